//! Sidon sets, B2[g] sequences and random-sequence experiments over `F_q[t]`.

pub mod combinat;
pub mod commands;
pub mod error;
pub mod estimates;
pub mod gf;
pub mod lifting;
pub mod parabola;
pub mod polyring;
pub mod randmodel;
pub mod ratio;
pub mod numeric;

pub use error::{Error, Result};
