//! Functions on `F_q[t]` that depend only on the degree, and their additive
//! convolutions.

use crate::polyring::Degree;

/// `f(0) = zero`, `f(x) = by_deg[deg x]` (zero past the end).
#[derive(Clone, Debug, PartialEq)]
pub struct Radial {
    pub q: u64,
    pub zero: f64,
    pub by_deg: Vec<f64>,
}

impl Radial {
    pub fn new(q: u64, zero: f64, by_deg: Vec<f64>) -> Self {
        Radial { q, zero, by_deg }
    }

    pub fn at(&self, d: Degree) -> f64 {
        match d.get() {
            None => self.zero,
            Some(d) => self.by_deg.get(d as usize).copied().unwrap_or(0.0),
        }
    }

    fn deg(&self, a: usize) -> f64 {
        self.by_deg.get(a).copied().unwrap_or(0.0)
    }

    /// Number of polynomials of degree `a`.
    fn class(&self, a: usize) -> f64 {
        (self.q - 1) as f64 * (self.q as f64).powi(a as i32)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Radial {
        Radial {
            q: self.q,
            zero: f(self.zero),
            by_deg: self.by_deg.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `(f * g)(z) = sum_y f(y) g(z - y)`, as a radial function of `z`.
    pub fn convolve(&self, g: &Radial) -> Radial {
        assert_eq!(self.q, g.q);
        let len = self.by_deg.len().max(g.by_deg.len());
        let q = self.q as f64;
        let zero = self.zero * g.zero
            + crate::numeric::sum((0..len).map(|a| self.class(a) * self.deg(a) * g.deg(a)));
        let by_deg = (0..len)
            .map(|e| {
                let mut acc = crate::numeric::Neumaier::default();
                // y = 0 and y = z
                acc.add(self.zero * g.deg(e));
                acc.add(self.deg(e) * g.zero);
                // deg y < deg z
                for a in 0..e {
                    acc.add(self.class(a) * self.deg(a) * g.deg(e));
                }
                // deg y > deg z
                for a in e + 1..len {
                    acc.add(self.class(a) * self.deg(a) * g.deg(a));
                }
                // deg y = deg z: leading coefficients differ, or agree and z - y drops to degree b
                acc.add((self.q - 2) as f64 * q.powi(e as i32) * self.deg(e) * g.deg(e));
                for b in 0..e {
                    acc.add(self.class(b) * self.deg(e) * g.deg(b));
                }
                acc.value()
            })
            .collect();
        Radial {
            q: self.q,
            zero,
            by_deg,
        }
    }
}
