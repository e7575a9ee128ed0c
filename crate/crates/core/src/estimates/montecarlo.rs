//! Seeded sampling experiments against the exact expectations.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{self, FamilyKind, Omega, VectorFamily};
use crate::error::{Error, Result};
use crate::estimates::expectation::{self, DeltaKind, Kind};
use crate::numeric;
use crate::randmodel::Model;

/// Sample mean and its standard error.
pub fn mc_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = numeric::sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = numeric::sum(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// The seeds `seed0, seed0 + 1, ...` of a run with `trials` samples.
fn seeds(seed0: u64, trials: u64) -> Vec<u64> {
    (0..trials).map(|i| seed0.wrapping_add(i)).collect()
}

/// Family count at `target` in each seeded sample, in seed order.
pub fn mc_counts(model: &Model, kind: Kind, target: u64, seed0: u64, trials: u64) -> Result<Vec<u64>> {
    let eps = model.params().epsilon;
    seeds(seed0, trials)
        .par_iter()
        .map(|&seed| {
            let om = Omega::from_sample(&model.sample_with_seed(seed));
            Ok(match kind {
                Kind::Qn => combinat::count_qn(&om, target),
                Kind::Tn => combinat::count_tn(&om, target),
                Kind::Rn => combinat::count_rn(&om, target, eps)?,
                Kind::Bn => combinat::count_bn(&om, target, eps)?,
                other => combinat::family_counts(&om, other.family().expect("family"), target),
            })
        })
        .collect()
}

/// Mean and standard error of the family count over seeded samples.
pub fn mc_mean(model: &Model, kind: Kind, target: u64, seed0: u64, trials: u64) -> Result<(f64, f64)> {
    let counts = mc_counts(model, kind, target, seed0, trials)?;
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    Ok(mc_stats(&values))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JansonStatus {
    Holds,
    Violated,
    /// Empty family: nothing to test.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonReport {
    pub kind: DeltaKind,
    pub target: u64,
    pub mu: f64,
    pub delta: f64,
    pub trials: u64,
    /// Fraction of samples with count at most `mu / 2`.
    pub p_hat: f64,
    /// `exp(-mu / 16)`.
    pub bound: f64,
    /// `3 sqrt(p_hat (1 - p_hat) / trials)`.
    pub slack: f64,
    pub status: JansonStatus,
}

/// Lower-tail frequency of the family count against `exp(-mu/16)`.
pub fn janson_empirical(model: &Model, kind: DeltaKind, target: u64, trials: u64, seed0: u64) -> Result<JansonReport> {
    let ekind = match kind {
        DeltaKind::Qn => Kind::Qn,
        DeltaKind::Rn => Kind::Rn,
    };
    let mu = expectation::expectation_exact(model, ekind, target)?;
    let delta = expectation::delta_exact(model, kind, target)?;
    let bound = (-mu / 16.0).exp();
    if mu == 0.0 {
        return Ok(JansonReport {
            kind,
            target,
            mu,
            delta,
            trials: 0,
            p_hat: 0.0,
            bound,
            slack: 0.0,
            status: JansonStatus::Degenerate,
        });
    }
    if delta >= mu {
        return Err(Error::Hypothesis(format!(
            "Delta = {delta} is not below mu = {mu}"
        )));
    }
    if trials == 0 {
        return Err(Error::Invalid("at least one trial is needed".into()));
    }
    let counts = mc_counts(model, ekind, target, seed0, trials)?;
    let low = counts.iter().filter(|&&c| c as f64 <= mu / 2.0).count();
    let p_hat = low as f64 / trials as f64;
    let slack = 3.0 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    let status = if p_hat <= bound + slack {
        JansonStatus::Holds
    } else {
        JansonStatus::Violated
    };
    Ok(JansonReport {
        kind,
        target,
        mu,
        delta,
        trials,
        p_hat,
        bound,
        slack,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdsvReport {
    pub kind: FamilyKind,
    pub k: usize,
    pub trials: u64,
    /// Fraction of samples where some target's family holds `K` disjoint vectors.
    pub frequency: f64,
    pub stderr: f64,
    /// `sum_r E|F_r|^K / K!` over the truncated window.
    pub bound: f64,
    pub holds: bool,
}

/// Every nonempty family inside `om`, keyed by target. `W` is not supported.
pub fn families_by_target(om: &Omega, kind: FamilyKind) -> Result<BTreeMap<u64, Vec<Vec<u64>>>> {
    let pk = om.packed();
    let m = om.members();
    let mut out: BTreeMap<u64, Vec<Vec<u64>>> = BTreeMap::new();
    for &a in m {
        for &b in m {
            if a == b {
                continue;
            }
            match kind {
                FamilyKind::U => out.entry(pk.add(a, b)).or_default().push(vec![a, b]),
                FamilyKind::V => out.entry(pk.sub(a, b)).or_default().push(vec![a, b]),
                FamilyKind::UPrime | FamilyKind::VPrime => {
                    let s = pk.add(a, b);
                    for &c in m {
                        if c != a && c != b {
                            let r = if kind == FamilyKind::UPrime { pk.add(s, c) } else { pk.sub(s, c) };
                            out.entry(r).or_default().push(vec![a, b, c]);
                        }
                    }
                }
                FamilyKind::W => {
                    return Err(Error::Invalid("W families are not grouped by target".into()));
                }
            }
        }
    }
    Ok(out)
}

/// Whether some target's family inside `om` contains `k` vectors with pairwise
/// disjoint coordinate sets.
pub fn has_k_dsv(om: &Omega, kind: FamilyKind, k: usize) -> Result<bool> {
    Ok(families_by_target(om, kind)?.into_values().any(|members| {
        members.len() >= k
            && combinat::find_k_dsv(
                &VectorFamily::new(kind.arity(), members).expect("family members are distinct"),
                k,
            )
            .is_some()
    }))
}

fn log_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

pub fn kdsv_probability_empirical(
    model: &Model,
    kind: FamilyKind,
    k: usize,
    trials: u64,
    seed0: u64,
) -> Result<KdsvReport> {
    if k == 0 {
        return Err(Error::Invalid("K must be at least 1".into()));
    }
    let all = expectation::family_expectations_all(model, kind)?;
    let lf = log_factorial(k);
    let bound = numeric::sum(all.values().map(|&e| (k as f64 * e.ln() - lf).exp()));
    let hits = seeds(seed0, trials)
        .par_iter()
        .map(|&seed| {
            let om = Omega::from_sample(&model.sample_with_seed(seed));
            Ok(if has_k_dsv(&om, kind, k)? { 1.0 } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    let (frequency, _) = mc_stats(&hits);
    let stderr = (frequency * (1.0 - frequency) / trials.max(1) as f64).sqrt();
    Ok(KdsvReport {
        kind,
        k,
        trials,
        frequency,
        stderr,
        bound,
        holds: frequency <= bound + 3.0 * stderr,
    })
}
