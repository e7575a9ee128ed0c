//! Expectations, correlation sums and the degree-sum lemmas of the random model.

pub mod radial;
pub mod expectation;
pub mod montecarlo;
pub mod sigma;

pub use sigma::{
    calibrate, check_basic_lemma, geometric_tail, sigma_closed, sigma_direct, BoundReport,
    Calibration, CheckStatus, Lemma, LemmaParams, SigmaQuery,
};
pub use expectation::{
    delta_exact, expectation_exact, expectation_report, DeltaKind, ExpectationReport, Kind,
};
pub use montecarlo::{
    janson_empirical, kdsv_probability_empirical, mc_mean, JansonReport, JansonStatus, KdsvReport,
};
