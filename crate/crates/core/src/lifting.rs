//! Repairing a sample into a B2[2] set or a Sidon set by removing every element
//! that takes part in a violation. Removal is decided against the original set
//! and applied in one sweep.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::combinat::{self, Omega};
use crate::error::Result;
use crate::polyring::PackedRing;
use crate::randmodel::OmegaSample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftMode {
    B22,
    Sidon,
}

impl std::str::FromStr for LiftMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b22" => Ok(LiftMode::B22),
            "sidon" => Ok(LiftMode::Sidon),
            _ => Err(crate::Error::Parse(format!("unknown lift mode {s:?}"))),
        }
    }
}

impl LiftMode {
    /// The `g` of the B2[g] property that survivors satisfy.
    pub fn g(self) -> u64 {
        match self {
            LiftMode::B22 => 2,
            LiftMode::Sidon => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftReport {
    pub mode: LiftMode,
    pub removed: Vec<u64>,
    pub survivors: Vec<u64>,
    /// For each removed element `a1`, a tuple `(a1, a2, ...)` of the original set
    /// with `a1 + a2 = a3 + a4 (= a5 + a6)` and adjacent pairs different.
    pub witnesses: BTreeMap<u64, Vec<u64>>,
}

fn lift(pk: &PackedRing, a: &[u64], mode: LiftMode) -> LiftReport {
    let threshold = mode.g() as usize + 1;
    let sums = combinat::pair_sums(pk, a);
    let mut keys: Vec<&u64> = sums.keys().collect();
    keys.sort_unstable();
    let mut witnesses: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for n in keys {
        let pairs = &sums[n];
        if pairs.len() < threshold {
            continue;
        }
        for (i, &(x, y)) in pairs.iter().enumerate() {
            // other representations, in order, skipping the element's own pair
            let others = pairs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .take(threshold - 1)
                .flat_map(|(_, &(c, d))| [c, d]);
            let tail: Vec<u64> = others.collect();
            for (a1, a2) in [(x, y), (y, x)] {
                witnesses.entry(a1).or_insert_with(|| {
                    let mut w = vec![a1, a2];
                    w.extend(&tail);
                    w
                });
            }
        }
    }
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let (removed, survivors) = sorted.into_iter().partition(|x| witnesses.contains_key(x));
    LiftReport {
        mode,
        removed,
        survivors,
        witnesses,
    }
}

/// Removes every element lying in a pair whose sum has at least three
/// representations as an unordered pair.
pub fn lift_b22(pk: &PackedRing, a: &[u64]) -> LiftReport {
    lift(pk, a, LiftMode::B22)
}

/// Removes every element lying in a pair whose sum has at least two
/// representations as an unordered pair.
pub fn lift_sidon(pk: &PackedRing, a: &[u64]) -> LiftReport {
    lift(pk, a, LiftMode::Sidon)
}

pub fn lift_mode(pk: &PackedRing, a: &[u64], mode: LiftMode) -> LiftReport {
    lift(pk, a, mode)
}

/// Both sides of `|F_n(lifted)| >= |F_n(omega)| - |violations_n(omega)|` at one target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub n: u64,
    pub lifted: u64,
    pub original: u64,
    pub violations: u64,
}

impl InequalityRow {
    pub fn holds(&self) -> bool {
        self.lifted + self.violations >= self.original
    }
}

/// One lifting inequality over every target of a sample.
///
/// Each witness `theta` of `F_n(omega)` adds `1` to the original side, `1` to the
/// lifted side when it survives, and its violation tuples to the other side.
/// The inequality at `n` can only fail when some witness of `F_n` adds more
/// to the original side than to the other two; only those targets are summed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityCheck {
    /// `Q` for the three-summand family, `R` for the four-summand one.
    pub family: String,
    /// Witnesses over all targets.
    pub witnesses: u64,
    /// Targets whose sums were formed.
    pub targets_summed: u64,
    pub failures: Vec<InequalityRow>,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
    pub b22_survivors_ok: bool,
    pub sidon_survivors_ok: bool,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.b22_survivors_ok && self.sidon_survivors_ok && self.checks.iter().all(|c| c.holds())
    }
}

/// Sums per target of `(original, lifted, violations)` for the witnesses that
/// `for_each` visits, restricted to targets where one witness is short.
fn check_family<const K: usize>(
    family: &str,
    kept: &HashSet<u64>,
    chain: impl Fn(u64) -> u64,
    for_each: impl Fn(&mut dyn FnMut(u64, [u64; K])),
) -> InequalityCheck {
    let contribution = |th: &[u64; K]| -> (u64, u64) {
        let lifted = u64::from(th.iter().all(|x| kept.contains(x)));
        (lifted, th.iter().map(|&x| chain(x)).sum())
    };
    let mut witnesses = 0u64;
    let mut short: HashSet<u64> = HashSet::new();
    for_each(&mut |n, th| {
        witnesses += 1;
        let (l, v) = contribution(&th);
        if l + v < 1 {
            short.insert(n);
        }
    });
    let mut sums: BTreeMap<u64, InequalityRow> = BTreeMap::new();
    if !short.is_empty() {
        for_each(&mut |n, th| {
            if short.contains(&n) {
                let (l, v) = contribution(&th);
                let row = sums.entry(n).or_insert(InequalityRow {
                    n,
                    lifted: 0,
                    original: 0,
                    violations: 0,
                });
                row.original += 1;
                row.lifted += l;
                row.violations += v;
            }
        });
    }
    InequalityCheck {
        family: family.into(),
        witnesses,
        targets_summed: sums.len() as u64,
        failures: sums.into_values().filter(|r| !r.holds()).collect(),
    }
}

/// Checks both lifting inequalities at every target. Targets with an empty
/// original family hold trivially. The four-summand family is included when
/// the sample has an `epsilon`.
pub fn verify_lift_inequalities(sample: &OmegaSample) -> InequalityReport {
    let om = Omega::from_sample(sample);
    let pk = om.packed().clone();
    let b22 = lift_b22(&pk, om.members());
    let sidon = lift_sidon(&pk, om.members());
    let chains = om.chain_table();
    let kept: HashSet<u64> = b22.survivors.iter().copied().collect();
    let mut checks = vec![check_family(
        "Q",
        &kept,
        |x| 2 * chains[&x].0,
        |f| combinat::for_each_qn(&om, f),
    )];
    if let Some(eps) = sample.params.epsilon {
        let kept: HashSet<u64> = sidon.survivors.iter().copied().collect();
        checks.push(check_family(
            "R",
            &kept,
            |x| 6 * chains[&x].1,
            |f| combinat::for_each_rn(&om, eps, f),
        ));
    }
    InequalityReport {
        checks,
        b22_survivors_ok: combinat::verify_b2g(&pk, &b22.survivors, 2).holds(),
        sidon_survivors_ok: combinat::verify_b2g(&pk, &sidon.survivors, 1).holds(),
    }
}
