//! The convolution sums `sigma_{a,b}(n; M)` and the three degree-sum lemmas.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, Neumaier};
use crate::polyring::PackedRing;
use crate::ratio::{self, Rational};

/// Largest number of terms a direct enumeration will visit.
pub const MAX_TERMS: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaQuery {
    pub p: u64,
    pub h: u32,
    #[serde(with = "ratio::serde_str")]
    pub alpha: Rational,
    #[serde(with = "ratio::serde_str")]
    pub beta: Rational,
    /// Canonical code of `n`.
    pub n: u64,
    /// Degree floor, `-1` allowed.
    #[serde(rename = "M")]
    pub m: i64,
    /// Truncation degree.
    #[serde(rename = "D")]
    pub d: u32,
}

impl SigmaQuery {
    fn check(&self) -> Result<PackedRing> {
        if self.m < -1 {
            return Err(Error::Invalid(format!("M must be at least -1, got {}", self.m)));
        }
        if i64::from(self.d) < self.m + 1 {
            return Err(Error::Invalid(format!("D={} must be at least M+1", self.d)));
        }
        Ok(PackedRing::new(self.p, self.h))
    }
}

fn q_pow_f(q: u64, e: f64) -> f64 {
    (e * (q as f64).ln()).exp()
}

/// `sum_{M < deg x <= D} q^{-alpha deg x} q^{-beta deg(n - x)}` by enumeration.
pub fn sigma_direct(qy: &SigmaQuery) -> Result<f64> {
    let pk = qy.check()?;
    let start = pk.q_pow((qy.m + 1).max(0) as u32).expect("below end");
    let too_large = || Error::WindowTooLarge(u128::from(pk.q()).saturating_pow(qy.d + 1), u128::from(MAX_TERMS));
    let end = pk.q_pow(qy.d + 1).ok_or_else(too_large)?;
    if end - start > MAX_TERMS {
        return Err(too_large());
    }
    let q = pk.q();
    let (a, b) = (ratio::to_f64(&qy.alpha), ratio::to_f64(&qy.beta));
    let top = qy.d.max(pk.deg(qy.n).get().unwrap_or(0)) as usize + 1;
    let wa: Vec<f64> = (0..top).map(|k| q_pow_f(q, -a * k as f64)).collect();
    let wb: Vec<f64> = (0..top).map(|k| q_pow_f(q, -b * k as f64)).collect();
    let n = qy.n;
    Ok(numeric::par_sum(end - start, |i| {
        let x = start + i;
        match pk.deg_diff(n, x).get() {
            None => 0.0,
            Some(e) => wa[pk.deg(x).get().expect("x != 0") as usize] * wb[e as usize],
        }
    }))
}

/// The same sum by degree classes, in `O(D^2)` operations.
pub fn sigma_closed(qy: &SigmaQuery) -> Result<f64> {
    let pk = qy.check()?;
    let q = pk.q();
    let qf = q as f64;
    let (a, b) = (ratio::to_f64(&qy.alpha), ratio::to_f64(&qy.beta));
    let class = |k: u32| (qf - 1.0) * qf.powi(k as i32);
    let lo = (qy.m + 1).max(0) as u32;
    let dn = pk.deg(qy.n);
    let mut acc = Neumaier::default();
    for k in lo..=qy.d {
        match dn.get() {
            Some(n0) if k < n0 => acc.add(class(k) * q_pow_f(q, -a * k as f64 - b * n0 as f64)),
            Some(n0) if k == n0 => {
                // x = n - z: z of degree n0 with a different leading coefficient, or any z of lower degree
                let mut inner = Neumaier::default();
                inner.add((qf - 2.0) * qf.powi(n0 as i32) * q_pow_f(q, -b * n0 as f64));
                for e in 0..n0 {
                    inner.add(class(e) * q_pow_f(q, -b * e as f64));
                }
                acc.add(q_pow_f(q, -a * n0 as f64) * inner.value());
            }
            _ => acc.add(class(k) * q_pow_f(q, -(a + b) * k as f64)),
        }
    }
    Ok(acc.value())
}

/// `sum_{deg x > R} q^{-gamma deg x}` for `gamma > 1`; `R = -1` includes the constants.
pub fn geometric_tail(q: u64, gamma: f64, r: i64) -> Result<f64> {
    if gamma <= 1.0 {
        return Err(Error::Invalid(format!(
            "tail exponent must exceed 1 for convergence, got {gamma}"
        )));
    }
    let qf = q as f64;
    let ratio = q_pow_f(q, 1.0 - gamma);
    Ok((qf - 1.0) * q_pow_f(q, (1.0 - gamma) * (r + 1) as f64) / (1.0 - ratio))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Basic1,
    Basic2,
    Basic3,
}

impl std::str::FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic1" => Ok(Lemma::Basic1),
            "basic2" => Ok(Lemma::Basic2),
            "basic3" => Ok(Lemma::Basic3),
            _ => Err(Error::Parse(format!("unknown lemma {s:?}"))),
        }
    }
}

/// Exponents of a lemma check. Unused exponents are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub p: u64,
    pub h: u32,
    #[serde(with = "ratio::serde_str")]
    pub alpha: Rational,
    #[serde(with = "ratio::serde_str")]
    pub beta: Rational,
    #[serde(with = "ratio::serde_str")]
    pub gamma: Rational,
    #[serde(with = "ratio::serde_str")]
    pub phi: Rational,
    #[serde(with = "ratio::serde_str")]
    pub kappa: Rational,
    /// Degree floor for the first and third lemmas.
    #[serde(rename = "M")]
    pub m: i64,
}

impl Default for LemmaParams {
    fn default() -> Self {
        let g = Rational::new(7, 11);
        LemmaParams {
            p: 5,
            h: 1,
            alpha: g,
            beta: g,
            gamma: g,
            phi: g,
            kappa: g,
            m: -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
    /// No pinned constant to compare against.
    Unpinned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Calibration key, e.g. `basic2` or `basic2_a0`.
    pub id: String,
    /// Degrees defining the sweep point, e.g. `{"n": 3}` or `{"a": 1, "b": 3}`.
    pub degrees: BTreeMap<String, i64>,
    /// The left side summed over `deg x <= D`.
    pub quantity: f64,
    pub bound: f64,
    pub ratio: f64,
    /// Exact value of the omitted `deg x > D` part.
    pub tail_estimate: f64,
    #[serde(rename = "D")]
    pub d: u32,
    pub pinned: Option<f64>,
    pub status: CheckStatus,
}

/// Degrees summed explicitly past the largest reference degree before the
/// geometric tail takes over.
pub const EXTRA_DEGREES: u32 = 40;

/// Sum of `weight(x)` over `lo <= deg x <= l` by enumeration, then over
/// `l < deg x <= D` where the weight is `q^{-c deg x}`, then the tail past `D`.
fn hybrid(pk: &PackedRing, lo: i64, l: u32, c: f64, weight: impl Fn(u64) -> f64 + Sync) -> Result<(f64, f64, u32)> {
    let q = pk.q();
    let start = if lo <= 0 { 0 } else { pk.q_pow(lo as u32).expect("small") };
    let end = pk
        .q_pow(l + 1)
        .filter(|&e| e - start <= MAX_TERMS)
        .ok_or(Error::WindowTooLarge(u128::from(q).pow(l + 1), u128::from(MAX_TERMS)))?;
    let near = numeric::par_sum(end - start, |i| weight(start + i));
    let d = l + EXTRA_DEGREES;
    let qf = q as f64;
    let far = numeric::sum(
        (l + 1..=d).map(|k| (qf - 1.0) * qf.powi(k as i32) * q_pow_f(q, -c * k as f64)),
    );
    let tail = geometric_tail(q, c, i64::from(d))?;
    Ok((near + far, tail, d))
}

fn check_open_unit(name: &str, r: &Rational) -> Result<()> {
    if *r <= Rational::from_integer(0) || *r >= Rational::from_integer(1) {
        return Err(Error::Hypothesis(format!(
            "{name} = {} must lie in (0, 1)",
            ratio::format_ratio(r)
        )));
    }
    Ok(())
}

fn status(quantity: f64, bound: f64, tail: f64, pinned: Option<f64>) -> CheckStatus {
    match pinned {
        None => CheckStatus::Unpinned,
        Some(c) if quantity > c * bound => CheckStatus::Fail,
        Some(c) if tail > 0.01 * (c * bound - quantity) => CheckStatus::Inconclusive,
        Some(_) => CheckStatus::Pass,
    }
}

/// `t^d + c` as a code, for `c` a field index.
fn monomial_plus(pk: &PackedRing, d: u32, c: u64) -> u64 {
    pk.q_pow(d).expect("small") + c
}

/// Evaluates a lemma's left side against its right side at each degree of the
/// sweep. For the second lemma each degree `d` gives the points
/// `(deg a, deg b) = (d, d), (1, d), (d, 1)` and the `a = 0` point `deg b = d`.
pub fn check_basic_lemma(
    which: Lemma,
    params: &LemmaParams,
    sweep: std::ops::RangeInclusive<u32>,
    calibration: Option<&Calibration>,
) -> Result<Vec<BoundReport>> {
    let pk = PackedRing::new(params.p, params.h);
    let q = pk.q();
    let pinned = |id: &str| calibration.and_then(|c| c.get(id));
    let mut out = Vec::new();
    let report = |id: &str, degrees: Vec<(&str, i64)>, (quantity, tail, d): (f64, f64, u32), bound: f64| {
        let pin = pinned(id);
        BoundReport {
            id: id.to_string(),
            degrees: degrees.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            quantity,
            bound,
            ratio: quantity / bound,
            tail_estimate: tail,
            d,
            pinned: pin,
            status: status(quantity, bound, tail, pin),
        }
    };
    match which {
        Lemma::Basic1 => {
            check_open_unit("alpha", &params.alpha)?;
            check_open_unit("beta", &params.beta)?;
            if params.alpha + params.beta <= Rational::from_integer(1) {
                return Err(Error::Hypothesis("alpha + beta must exceed 1".into()));
            }
            if params.m < -1 {
                return Err(Error::Hypothesis("M must be at least -1".into()));
            }
            let (a, b) = (ratio::to_f64(&params.alpha), ratio::to_f64(&params.beta));
            for dn in sweep {
                let n = pk.q_pow(dn).expect("small");
                let top = (dn as i64).max(params.m);
                let l = top.max(0) as u32;
                let val = hybrid(&pk, params.m + 1, l, a + b, |x| match pk.deg_diff(n, x).get() {
                    None => 0.0,
                    Some(e) => q_pow_f(q, -a * pk.deg(x).get().unwrap_or(0) as f64 - b * e as f64),
                })?;
                let bound = q_pow_f(q, -(a + b - 1.0) * top as f64);
                out.push(report("basic1", vec![("n", dn as i64), ("M", params.m)], val, bound));
            }
        }
        Lemma::Basic2 => {
            let g = params.gamma;
            if g <= Rational::new(1, 2) || g >= Rational::new(2, 3) {
                return Err(Error::Hypothesis(format!(
                    "gamma = {} must lie in (1/2, 2/3)",
                    ratio::format_ratio(&g)
                )));
            }
            let g = ratio::to_f64(&g);
            let weight = |a: u64, b: u64, x: u64| -> f64 {
                let (dx, da, db) = (pk.deg(x), pk.deg_diff(x, pk.neg(a)), pk.deg_diff(x, pk.neg(b)));
                match (dx.get(), da.get(), db.get()) {
                    (Some(dx), Some(da), Some(db)) => {
                        q_pow_f(q, -g * dx as f64 - g * da as f64 + (1.0 - 2.0 * g) * db as f64)
                    }
                    _ => 0.0,
                }
            };
            for d in sweep {
                let shapes = [(d, d, 1u64, 2u64), (1, d, 1, 0), (d, 1, 0, 2)];
                for (da, db, ca, cb) in shapes {
                    let a = monomial_plus(&pk, da, ca);
                    let b = if da == db {
                        2 * pk.q_pow(db).expect("small") + cb
                    } else {
                        monomial_plus(&pk, db, cb)
                    };
                    let val = hybrid(&pk, 0, da.max(db), 4.0 * g - 1.0, |x| weight(a, b, x))?;
                    let bound = q_pow_f(q, (1.0 - 2.0 * g) * (da + db) as f64);
                    out.push(report("basic2", vec![("a", da as i64), ("b", db as i64)], val, bound));
                }
                let b = monomial_plus(&pk, d, 1);
                let val = hybrid(&pk, 0, d, 4.0 * g - 1.0, |x| weight(0, b, x))?;
                let bound = q_pow_f(q, (1.0 - 2.0 * g) * d as f64);
                out.push(report("basic2_a0", vec![("a", -1), ("b", d as i64)], val, bound));
            }
        }
        Lemma::Basic3 => {
            check_open_unit("phi", &params.phi)?;
            check_open_unit("kappa", &params.kappa)?;
            if params.phi + params.kappa <= Rational::from_integer(1) {
                return Err(Error::Hypothesis("phi + kappa must exceed 1".into()));
            }
            if params.m < -1 {
                return Err(Error::Hypothesis("M must be at least -1".into()));
            }
            let (phi, kappa) = (ratio::to_f64(&params.phi), ratio::to_f64(&params.kappa));
            let m = params.m;
            for dr in sweep {
                let r = monomial_plus(&pk, dr, 1);
                let top = (dr as i64).max(m);
                let val = hybrid(&pk, m + 1, top.max(0) as u32, phi + kappa, |x| {
                    let dx = pk.deg(x).get().expect("deg x > M >= -1") as f64;
                    let e = pk.deg_diff(r, pk.neg(x)).as_i64_or(i64::MIN).max(m) as f64;
                    q_pow_f(q, -phi * dx - kappa * e)
                })?;
                let bound = q_pow_f(q, (1.0 - phi - kappa) * top as f64);
                out.push(report("basic3", vec![("r", dr as i64), ("M", m)], val, bound));
            }
        }
    }
    Ok(out)
}

/// Pinned ratio constants, keyed by check id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Calibration(pub BTreeMap<String, f64>);

impl Calibration {
    /// The constants committed with the crate.
    pub fn committed() -> Self {
        serde_json::from_str(include_str!("../../data/calibration.json"))
            .expect("committed calibration parses")
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }
}

/// Headroom applied to the largest observed ratio when pinning.
pub const HEADROOM: f64 = 1.01;

/// The reference sweeps whose ratios the committed constants bound.
pub fn reference_sweeps() -> Vec<(Lemma, LemmaParams)> {
    vec![
        (Lemma::Basic1, LemmaParams::default()),
        (Lemma::Basic2, LemmaParams::default()),
        (Lemma::Basic3, LemmaParams { m: 4, ..LemmaParams::default() }),
    ]
}

pub const REFERENCE_DEGREES: std::ops::RangeInclusive<u32> = 1..=8;

/// Runs the reference sweeps and pins `HEADROOM` times the largest ratio per id.
pub fn calibrate() -> Result<Calibration> {
    let mut out = BTreeMap::new();
    for (lemma, params) in reference_sweeps() {
        for r in check_basic_lemma(lemma, &params, REFERENCE_DEGREES, None)? {
            let e = out.entry(r.id.clone()).or_insert(0.0f64);
            *e = e.max(r.ratio * HEADROOM);
        }
    }
    Ok(Calibration(out))
}
