//! Exact expectations and correlation sums `Delta` of the counting families
//! under the random model, truncated to the model's degree window.
//!
//! When every admissible `x = s + t^N h` has `h != 0` (that is `M >= N - 1`),
//! the inclusion probability depends only on the residue `s` and on `deg h`, and
//! sums over `x` split into a residue count times a convolution of degree
//! profiles. Otherwise the admissible universe is enumerated.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{self, FamilyKind, Omega};
use crate::error::{Error, Result};
use crate::estimates::radial::Radial;
use crate::numeric;
use crate::polyring::PackedRing;
use crate::randmodel::Model;
use crate::ratio::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Qn,
    Tn,
    Rn,
    Bn,
    #[serde(rename = "U")]
    Ur,
    #[serde(rename = "V")]
    Vr,
    #[serde(rename = "W")]
    Wr,
    #[serde(rename = "U'")]
    UPrime,
    #[serde(rename = "V'")]
    VPrime,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Qn,
        Kind::Tn,
        Kind::Rn,
        Kind::Bn,
        Kind::Ur,
        Kind::Vr,
        Kind::Wr,
        Kind::UPrime,
        Kind::VPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Qn => "Qn",
            Kind::Tn => "Tn",
            Kind::Rn => "Rn",
            Kind::Bn => "Bn",
            Kind::Ur => "U",
            Kind::Vr => "V",
            Kind::Wr => "W",
            Kind::UPrime => "U'",
            Kind::VPrime => "V'",
        }
    }

    pub fn family(self) -> Option<FamilyKind> {
        match self {
            Kind::Ur => Some(FamilyKind::U),
            Kind::Vr => Some(FamilyKind::V),
            Kind::Wr => Some(FamilyKind::W),
            Kind::UPrime => Some(FamilyKind::UPrime),
            Kind::VPrime => Some(FamilyKind::VPrime),
            _ => None,
        }
    }

    fn needs_epsilon(self) -> bool {
        matches!(self, Kind::Rn | Kind::Bn)
    }
}

impl From<FamilyKind> for Kind {
    fn from(f: FamilyKind) -> Self {
        match f {
            FamilyKind::U => Kind::Ur,
            FamilyKind::V => Kind::Vr,
            FamilyKind::W => Kind::Wr,
            FamilyKind::UPrime => Kind::UPrime,
            FamilyKind::VPrime => Kind::VPrime,
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qn" | "q" => Ok(Kind::Qn),
            "tn" | "t" => Ok(Kind::Tn),
            "rn" | "r" => Ok(Kind::Rn),
            "bn" | "b" => Ok(Kind::Bn),
            "u" | "ur" => Ok(Kind::Ur),
            "v" | "vr" => Ok(Kind::Vr),
            "w" | "wr" => Ok(Kind::Wr),
            "u'" | "ur'" | "up" | "uprime" => Ok(Kind::UPrime),
            "v'" | "vr'" | "vp" | "vprime" => Ok(Kind::VPrime),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

/// Largest admissible universe for quadratic enumerations.
pub const PAIR_LIMIT: usize = 40_000;
/// Largest admissible universe for the cubic enumerations.
pub const CUBIC_LIMIT: usize = 1_500;
/// Largest admissible universe for the `T_n` and `B_n` chain enumerations.
pub const CHAIN_LIMIT: usize = 400;

fn guard(model: &Model, limit: usize) -> Result<()> {
    let size = model.admissible_count();
    if size > limit as u128 {
        return Err(Error::WindowTooLarge(size, limit as u128));
    }
    Ok(())
}

fn universe(model: &Model) -> Omega {
    Omega::new(model.packed().clone(), model.params().n, &model.admissible())
}

/// Probability that every listed element is in the sample.
fn prob_set(model: &Model, xs: &[u64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.dedup();
    v.iter().map(|&x| model.prob_code(x)).product()
}

/// `c * x` for `c` in the prime field, digit by digit.
fn scale(pk: &PackedRing, c: u64, x: u64) -> u64 {
    let p = pk.p();
    let (mut x, mut out, mut place) = (x, 0u64, 1u64);
    while x > 0 {
        out += (x % p * c % p) * place;
        x /= p;
        place = place.wrapping_mul(p);
    }
    out
}

fn inverse_mod(c: u64, p: u64) -> u64 {
    (1..p).find(|&d| c * d % p == 1).expect("p prime and c nonzero")
}

/// Degree-profile data for models with `M >= N - 1`.
struct RadialModel<'a> {
    model: &'a Model,
    pk: &'a PackedRing,
    qn: u64,
    /// `w(h) = P(s + t^N h)` for `s` in `S`.
    w: Radial,
    /// Ordered residue pairs by sum.
    c2: Vec<u64>,
    /// Ordered residue pairs with distinct entries, by sum.
    c2d: Vec<u64>,
    /// Ordered residue pairs by difference.
    cdiff: Vec<u64>,
    ww: Radial,
    w3: Radial,
    /// `w^2 * w^2`.
    ww2: Radial,
    /// `w^2 * w`.
    sq_w: Radial,
    /// `sum_x P(x)^2` over the admissible universe.
    sum_sq: f64,
}

impl<'a> RadialModel<'a> {
    fn new(model: &'a Model) -> Option<Self> {
        let params = model.params();
        if params.m + 1 < params.n {
            return None;
        }
        let pk = model.packed();
        let qn = pk.q_pow(params.n).expect("validated");
        let by_deg = (params.n..=params.d)
            .map(|d| model.prob_of_degree(crate::polyring::Degree::new(d)))
            .collect();
        let w = Radial::new(pk.q(), 0.0, by_deg);
        let s = model.residues();
        let mut c2 = vec![0u64; qn as usize];
        let mut c2d = vec![0u64; qn as usize];
        let mut cdiff = vec![0u64; qn as usize];
        for &a in s {
            for &b in s {
                c2[pk.add(a, b) as usize] += 1;
                if a != b {
                    c2d[pk.add(a, b) as usize] += 1;
                }
                cdiff[pk.sub(a, b) as usize] += 1;
            }
        }
        let ww = w.convolve(&w);
        let w3 = ww.convolve(&w);
        let sq = w.map(|v| v * v);
        let ww2 = sq.convolve(&sq);
        let sq_w = sq.convolve(&w);
        let q = pk.q() as f64;
        let sum_sq = s.len() as f64
            * numeric::sum(sq.by_deg.iter().enumerate().map(|(k, &v)| v * (q - 1.0) * q.powi(k as i32)));
        Some(RadialModel {
            model,
            pk,
            qn,
            w,
            c2,
            c2d,
            cdiff,
            ww,
            w3,
            ww2,
            sq_w,
            sum_sq,
        })
    }

    fn split(&self, x: u64) -> (u64, u64) {
        (x % self.qn, x / self.qn)
    }

    fn at(&self, f: &Radial, h: u64) -> f64 {
        f.at(self.pk.deg(h))
    }

    /// Ordered triples of pairwise distinct residues summing to `m`.
    fn c3d(&self, m: u64) -> u64 {
        let s = self.model.residues();
        let mut count = 0;
        for &a in s {
            for &b in s {
                let c = self.pk.sub(self.pk.sub(m, a), b);
                if a != b && c != a && c != b && self.model.residue_allowed(c) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Ordered 4-tuples of pairwise distinct residues summing to `m`.
    fn c4d(&self, m: u64) -> u64 {
        let s = self.model.residues();
        s.par_iter()
            .map(|&a| {
                let mut count = 0;
                for &b in s {
                    if b == a {
                        continue;
                    }
                    let ab = self.pk.add(a, b);
                    for &c in s {
                        let d = self.pk.sub(self.pk.sub(m, ab), c);
                        if c != a && c != b && d != a && d != b && d != c && self.model.residue_allowed(d) {
                            count += 1;
                        }
                    }
                }
                count
            })
            .sum()
    }

    fn ordered_triples(&self, m: u64, minus_last: bool) -> u64 {
        let s = self.model.residues();
        let mut count = 0;
        for &a in s {
            for &b in s {
                let ab = self.pk.add(a, b);
                let c = if minus_last { self.pk.sub(ab, m) } else { self.pk.sub(m, ab) };
                if self.model.residue_allowed(c) {
                    count += 1;
                }
            }
        }
        count
    }

    fn qn(&self, n: u64) -> f64 {
        let (lo, hi) = self.split(n);
        self.c3d(lo) as f64 / 6.0 * self.at(&self.w3, hi)
    }

    fn rn(&self, n: u64, eps: Rational) -> f64 {
        let (lo, hi) = self.split(n);
        let dn = self.pk.deg(n).as_i64_or(-1) as i128;
        let nn = self.model.params().n;
        // keep only degrees N + k above eps * deg n
        let large = Radial::new(
            self.w.q,
            0.0,
            self.w
                .by_deg
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let d = (nn as usize + k) as i128;
                    if d * (*eps.denom() as i128) > (*eps.numer() as i128) * dn {
                        v
                    } else {
                        0.0
                    }
                })
                .collect(),
        );
        let l2 = large.convolve(&large);
        let all = self.at(&self.ww.convolve(&self.ww), hi);
        let big = self.at(&l2.convolve(&l2), hi);
        self.c4d(lo) as f64 / 24.0 * (all - big)
    }

    fn half(&self, x: u64) -> u64 {
        scale(self.pk, inverse_mod(2, self.pk.p()), x)
    }

    /// `sum_{a != r - a} f(a) f(r - a)` for `f = P^power`.
    fn u_power(&self, r: u64, ww: &Radial, power: i32) -> f64 {
        let (lo, hi) = self.split(r);
        let diag = self.model.prob_code(self.half(r)).powi(2 * power);
        self.c2[lo as usize] as f64 * self.at(ww, hi) - diag
    }

    fn ur(&self, r: u64) -> f64 {
        self.u_power(r, &self.ww, 1)
    }

    fn vr(&self, r: u64) -> f64 {
        if r == 0 {
            return 0.0;
        }
        let (lo, hi) = self.split(r);
        self.cdiff[lo as usize] as f64 * self.at(&self.ww, hi)
    }

    fn wr(&self, r: u64) -> f64 {
        let pr = self.model.prob_code(r);
        let xs = self.model.admissible();
        numeric::par_sum_slice(&xs, |&x4| {
            let p4 = self.model.prob_code(x4);
            let sigma = self.pk.add(r, x4);
            let other = if r != x4 { 1.0 } else { 0.0 };
            let g = self.u_power(sigma, &self.ww, 1) - 2.0 * p4 * pr * other;
            let h = self.u_power(sigma, &self.ww2, 2) - 2.0 * (p4 * pr).powi(2) * other;
            p4 * (g * g - 2.0 * h)
        })
    }

    /// Inclusion-exclusion over the coincidences `x_i = x_j`.
    fn prime(&self, r: u64, minus_last: bool) -> Option<f64> {
        let p = self.pk.p();
        if p <= 3 {
            return None;
        }
        let (lo, hi) = self.split(r);
        let total = self.ordered_triples(lo, minus_last) as f64 * self.at(&self.w3, hi);
        let sq_w = self.at(&self.sq_w, hi);
        let s = self.model.residues();
        if !minus_last {
            // x1 = x2 = x, x3 = r - 2x, and symmetric
            let c = s
                .iter()
                .filter(|&&a| self.model.residue_allowed(self.pk.sub(lo, scale(self.pk, 2, a))))
                .count() as f64;
            let third = scale(self.pk, inverse_mod(3, p), r);
            Some(total - 3.0 * c * sq_w + 2.0 * self.model.prob_code(third).powi(3))
        } else {
            // x1 = x2 gives x3 = 2x - r; x1 = x3 or x2 = x3 forces the other to be r
            let c = s
                .iter()
                .filter(|&&a| self.model.residue_allowed(self.pk.sub(scale(self.pk, 2, a), lo)))
                .count() as f64;
            let pr = self.model.prob_code(r);
            Some(total - c * sq_w - 2.0 * pr * self.sum_sq + 2.0 * pr.powi(3))
        }
    }

    fn delta_qn(&self, n: u64) -> f64 {
        let xs = self.model.admissible();
        numeric::par_sum_slice(&xs, |&x1| {
            let r1 = x1 % self.qn;
            let (lo, hi) = self.split(self.pk.sub(n, x1));
            let partner = self.pk.sub(lo, r1);
            let mut c = self.c2d[lo as usize];
            if partner != r1 && self.model.residue_allowed(partner) {
                c -= 2;
            }
            let g = c as f64 * self.at(&self.ww, hi);
            let h = c as f64 * self.at(&self.ww2, hi);
            self.model.prob_code(x1) * (g * g / 4.0 - h / 2.0)
        })
    }
}

fn epsilon(model: &Model) -> Result<Rational> {
    model.params().epsilon.ok_or(Error::EpsilonUnset)
}

/// Exact expectation of the family count at `target`, truncated to the window.
pub fn expectation_exact(model: &Model, kind: Kind, target: u64) -> Result<f64> {
    if kind.needs_epsilon() {
        epsilon(model)?;
        if target == 0 {
            return Err(Error::Invalid("R_n needs a nonzero target".into()));
        }
    }
    if let Some(rm) = RadialModel::new(model) {
        let fast = match kind {
            Kind::Qn => Some(rm.qn(target)),
            Kind::Rn => Some(rm.rn(target, epsilon(model)?)),
            Kind::Ur => Some(rm.ur(target)),
            Kind::Vr => Some(rm.vr(target)),
            Kind::Wr if model.admissible_count() <= 1 << 24 => Some(rm.wr(target)),
            Kind::UPrime => rm.prime(target, false),
            Kind::VPrime => rm.prime(target, true),
            _ => None,
        };
        if let Some(v) = fast {
            // cancellation in the inclusion-exclusion can leave tiny negatives
            return Ok(v.max(0.0));
        }
    }
    expectation_enumerated(model, kind, target)
}

/// Exact expectation by listing every family member in the admissible universe.
pub fn expectation_enumerated(model: &Model, kind: Kind, target: u64) -> Result<f64> {
    match kind {
        Kind::Qn => {
            guard(model, PAIR_LIMIT)?;
            let u = universe(model);
            let ws = combinat::qn_witnesses(&u, target);
            Ok(numeric::par_sum_slice(&ws, |th| prob_set(model, th)))
        }
        Kind::Rn => {
            guard(model, CUBIC_LIMIT)?;
            let u = universe(model);
            let ws = combinat::rn_witnesses(&u, target, Some(epsilon(model)?))?;
            Ok(numeric::par_sum_slice(&ws, |th| prob_set(model, th)))
        }
        Kind::Tn => {
            guard(model, CHAIN_LIMIT)?;
            let u = universe(model);
            let mut acc = numeric::Neumaier::default();
            for_each_tn_tuple(&u, target, |t| acc.add(prob_set(model, t)));
            Ok(acc.value())
        }
        Kind::Bn => {
            guard(model, CHAIN_LIMIT)?;
            let u = universe(model);
            let mut acc = numeric::Neumaier::default();
            for_each_bn_tuple(&u, target, epsilon(model)?, |t| acc.add(prob_set(model, t)))?;
            Ok(acc.value())
        }
        Kind::Wr => {
            guard(model, CUBIC_LIMIT)?;
            let u = universe(model);
            let pk = u.packed();
            let xs = u.members();
            Ok(numeric::par_sum_slice(xs, |&x4| {
                let sigma = pk.add(target, x4);
                let pairs: Vec<(u64, u64)> = xs
                    .iter()
                    .map(|&a| (a, pk.sub(sigma, a)))
                    .filter(|&(a, b)| a != b && a != x4 && b != x4 && u.contains(b))
                    .collect();
                let mut acc = numeric::Neumaier::default();
                for &(x5, x6) in &pairs {
                    for &(x7, x8) in &pairs {
                        if x7 != x5 && x7 != x6 {
                            // all five coordinates are distinct here
                            acc.add([x4, x5, x6, x7, x8].iter().map(|&x| model.prob_code(x)).product());
                        }
                    }
                }
                acc.value()
            }))
        }
        _ => {
            let fam = kind.family().expect("family kind");
            guard(model, if fam.arity() == 2 { PAIR_LIMIT } else { CUBIC_LIMIT })?;
            let u = universe(model);
            let ms = combinat::family_members(&u, fam, target);
            Ok(numeric::par_sum_slice(&ms, |m| prob_set(model, m)))
        }
    }
}

/// Calls `visit` on every 8-tuple of `T_n` inside `om`.
pub fn for_each_tn_tuple(om: &Omega, n: u64, mut visit: impl FnMut(&[u64; 8])) {
    let pk = om.packed();
    for th in combinat::qn_witnesses(om, n) {
        for i in 0..3 {
            let x1 = th[i];
            let rest = [th[(i + 1) % 3], th[(i + 2) % 3]];
            for (x2, x3) in [(rest[0], rest[1]), (rest[1], rest[0])] {
                for &x4 in om.members() {
                    let sigma = pk.add(x1, x4);
                    let pairs = om.matched_pairs_vec(sigma, om.residue_of(x1), om.residue_of(x4));
                    for &(x5, x6) in &pairs {
                        if same_set((x5, x6), (x1, x4)) {
                            continue;
                        }
                        for &(x7, x8) in &pairs {
                            if !same_set((x7, x8), (x5, x6)) {
                                visit(&[x1, x2, x3, x4, x5, x6, x7, x8]);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Calls `visit` on every 7-tuple of `B_n` inside `om`.
pub fn for_each_bn_tuple(om: &Omega, n: u64, eps: Rational, mut visit: impl FnMut(&[u64; 7])) -> Result<()> {
    let pk = om.packed();
    for th in combinat::rn_witnesses(om, n, Some(eps))? {
        for i in 0..4 {
            let x1 = th[i];
            let rest: Vec<u64> = (1..4).map(|j| th[(i + j) % 4]).collect();
            for [a, b, c] in permutations3(&rest) {
                for &x5 in om.members() {
                    let sigma = pk.add(x1, x5);
                    for (x6, x7) in om.matched_pairs_vec(sigma, om.residue_of(x1), om.residue_of(x5)) {
                        if !same_set((x6, x7), (x1, x5)) {
                            visit(&[x1, a, b, c, x5, x6, x7]);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn same_set(a: (u64, u64), b: (u64, u64)) -> bool {
    (a.0.min(a.1), a.0.max(a.1)) == (b.0.min(b.1), b.0.max(b.1))
}

fn permutations3(v: &[u64]) -> [[u64; 3]; 6] {
    let (a, b, c) = (v[0], v[1], v[2]);
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaKind {
    Qn,
    Rn,
}

impl std::str::FromStr for DeltaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qn" | "q" => Ok(DeltaKind::Qn),
            "rn" | "r" => Ok(DeltaKind::Rn),
            _ => Err(Error::Parse(format!("no correlation sum for {s:?}"))),
        }
    }
}

/// Exact `Delta` at `target`: the sum over ordered pairs of distinct
/// intersecting members of the probability that both lie in the sample.
pub fn delta_exact(model: &Model, kind: DeltaKind, target: u64) -> Result<f64> {
    if kind == DeltaKind::Qn {
        if let Some(rm) = RadialModel::new(model) {
            return Ok(rm.delta_qn(target).max(0.0));
        }
    }
    delta_enumerated(model, kind, target)
}

pub fn delta_enumerated(model: &Model, kind: DeltaKind, target: u64) -> Result<f64> {
    let sets: Vec<Vec<u64>> = match kind {
        DeltaKind::Qn => {
            guard(model, PAIR_LIMIT)?;
            combinat::qn_witnesses(&universe(model), target)
                .into_iter()
                .map(|t| t.to_vec())
                .collect()
        }
        DeltaKind::Rn => {
            guard(model, CUBIC_LIMIT)?;
            combinat::rn_witnesses(&universe(model), target, Some(epsilon(model)?))?
                .into_iter()
                .map(|t| t.to_vec())
                .collect()
        }
    };
    Ok(delta_over(model, &sets, kind == DeltaKind::Qn))
}

/// `Delta` of an explicit list of distinct member sets.
pub fn delta_over(model: &Model, sets: &[Vec<u64>], single_overlap: bool) -> f64 {
    let mut by_elem: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        for &x in s {
            by_elem.entry(x).or_default().push(i);
        }
    }
    let per_set: Vec<f64> = (0..sets.len())
        .into_par_iter()
        .map(|i| {
            let mut partners: Vec<usize> = sets[i]
                .iter()
                .flat_map(|x| by_elem[x].iter().copied())
                .filter(|&j| j != i)
                .collect();
            partners.sort_unstable();
            partners.dedup();
            numeric::sum(partners.into_iter().map(|j| {
                let shared = sets[j].iter().filter(|x| sets[i].contains(x)).count();
                assert!(
                    !single_overlap || shared == 1,
                    "equal-sum 3-sets may share only one element"
                );
                let mut union = sets[i].clone();
                union.extend(&sets[j]);
                prob_set(model, &union)
            }))
        })
        .collect();
    numeric::sum(per_set)
}

/// `E|F_r|` for every `r` with a nonzero value.
pub fn family_expectations_all(model: &Model, kind: FamilyKind) -> Result<BTreeMap<u64, f64>> {
    let radial_ok = match kind {
        FamilyKind::U | FamilyKind::V => true,
        FamilyKind::UPrime | FamilyKind::VPrime => model.packed().p() > 3,
        FamilyKind::W => false,
    };
    let top = model.packed().q_pow(model.params().d + 1).filter(|&t| t <= 1 << 24);
    if let (true, Some(rm), Some(top)) = (radial_ok, RadialModel::new(model), top) {
        // every sum or difference of admissible elements has degree at most D
        return Ok((0..top)
            .into_par_iter()
            .filter_map(|r| {
                let v = match kind {
                    FamilyKind::U => rm.ur(r),
                    FamilyKind::V => rm.vr(r),
                    _ => rm.prime(r, kind == FamilyKind::VPrime).expect("p > 3"),
                };
                (v > 0.0).then_some((r, v))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect());
    }
    family_expectations_all_enumerated(model, kind)
}

/// [`family_expectations_all`] by enumerating ordered tuples of the admissible universe.
pub fn family_expectations_all_enumerated(model: &Model, kind: FamilyKind) -> Result<BTreeMap<u64, f64>> {
    let pk = model.packed();
    let xs = model.admissible();
    let probs: Vec<f64> = xs.iter().map(|&x| model.prob_code(x)).collect();
    let mut out: BTreeMap<u64, numeric::Neumaier> = BTreeMap::new();
    match kind {
        FamilyKind::U | FamilyKind::V => {
            guard(model, PAIR_LIMIT)?;
            for (i, &a) in xs.iter().enumerate() {
                for (j, &b) in xs.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let r = if kind == FamilyKind::U { pk.add(a, b) } else { pk.sub(a, b) };
                    out.entry(r).or_default().add(probs[i] * probs[j]);
                }
            }
        }
        FamilyKind::UPrime | FamilyKind::VPrime => {
            guard(model, CUBIC_LIMIT)?;
            for (i, &a) in xs.iter().enumerate() {
                for (j, &b) in xs.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let s = pk.add(a, b);
                    for (k, &c) in xs.iter().enumerate() {
                        if k == i || k == j {
                            continue;
                        }
                        let r = if kind == FamilyKind::UPrime { pk.add(s, c) } else { pk.sub(s, c) };
                        out.entry(r).or_default().add(probs[i] * probs[j] * probs[k]);
                    }
                }
            }
        }
        FamilyKind::W => {
            return Err(Error::Invalid(
                "per-target expectations of W are only available one target at a time".into(),
            ));
        }
    }
    Ok(out
        .into_iter()
        .map(|(r, acc)| (r, acc.value()))
        .filter(|&(_, v)| v > 0.0)
        .collect())
}

/// Exponent `c` of a bound `q^{c L}` and whether it bounds from above.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundShape {
    pub exponent: f64,
    /// `L = max(deg target, M)` when true, `deg target` otherwise.
    pub uses_max: bool,
    pub upper: bool,
}

/// The growth or decay rate claimed for `kind`: the first-moment bounds at
/// `gamma = 7/11` for `Q_n`, `T_n`, `U`, `V`, `W`, and the `epsilon` forms for
/// the four-summand side.
pub fn bound_shape(kind: Kind, gamma: Rational, eps: Option<Rational>) -> Result<BoundShape> {
    let g = ratio::to_f64(&gamma);
    let e = eps.map(|e| ratio::to_f64(&e));
    let need_e = || e.ok_or(Error::EpsilonUnset);
    let shape = |exponent, uses_max, upper| BoundShape {
        exponent,
        uses_max,
        upper,
    };
    Ok(match kind {
        Kind::Qn => shape(2.0 - 3.0 * g, false, false),
        Kind::Tn => shape(-1.0 / 11.0, true, true),
        Kind::Ur | Kind::Vr => shape(-3.0 / 11.0, true, true),
        Kind::Wr => shape(-2.0 / 11.0, true, true),
        Kind::Rn => {
            let e = need_e()?;
            shape(2.0 * e * e / (9.0 + 9.0 * e), false, false)
        }
        Kind::Bn => {
            let e = need_e()?;
            shape(-e * e / 18.0, true, true)
        }
        Kind::UPrime | Kind::VPrime => shape(-need_e()? / 6.0, true, true),
    })
}

/// Exponent of the claimed `Delta` bound in terms of `deg n`.
pub fn delta_exponent(kind: DeltaKind, gamma: Rational, eps: Option<Rational>) -> Result<f64> {
    match kind {
        DeltaKind::Qn => Ok(3.0 - 5.0 * ratio::to_f64(&gamma)),
        DeltaKind::Rn => {
            let e = ratio::to_f64(&eps.ok_or(Error::EpsilonUnset)?);
            Ok((-3.0 * e + 2.0 * e * e) / (9.0 + 9.0 * e))
        }
    }
}

/// One exact expectation with its claimed bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub kind: Kind,
    pub target: u64,
    pub deg: i64,
    pub mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub bound: f64,
    /// `mu / bound`; a lower bound holds with constant `c` when this stays above `c`.
    pub ratio: f64,
    pub upper: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_stderr: Option<f64>,
}

pub fn expectation_report(model: &Model, kind: Kind, target: u64, with_delta: bool) -> Result<ExpectationReport> {
    let params = model.params();
    let pk = model.packed();
    let mu = expectation_exact(model, kind, target)?;
    let shape = bound_shape(kind, params.gamma, params.epsilon)?;
    let deg = pk.deg(target).as_i64_or(-1);
    let level = if shape.uses_max { deg.max(i64::from(params.m)) } else { deg.max(0) };
    let q = pk.q() as f64;
    let bound = q.powf(shape.exponent * level as f64);
    let dkind = match kind {
        Kind::Qn => Some(DeltaKind::Qn),
        Kind::Rn => Some(DeltaKind::Rn),
        _ => None,
    };
    let (delta, delta_bound) = match dkind {
        Some(dk) if with_delta => (
            Some(delta_exact(model, dk, target)?),
            Some(q.powf(delta_exponent(dk, params.gamma, params.epsilon)? * deg.max(0) as f64)),
        ),
        _ => (None, None),
    };
    Ok(ExpectationReport {
        kind,
        target,
        deg,
        mu,
        delta,
        bound,
        ratio: mu / bound,
        upper: shape.upper,
        delta_bound,
        mc_mean: None,
        mc_stderr: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randmodel::ModelParams;

    fn model(n: u32, s: Vec<u64>, m: u32, d: u32) -> Model {
        Model::new(ModelParams {
            p: 5,
            h: 1,
            n,
            s,
            gamma: Rational::new(7, 11),
            m,
            d,
            epsilon: Some(Rational::new(1, 2)),
            seed: 0,
        })
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn radial_matches_enumeration() {
        let m = model(1, vec![0, 1, 2, 4], 0, 3);
        let pk = m.packed().clone();
        for t in [0u64, 7, 33, 126, 600, 2000] {
            for kind in [Kind::Qn, Kind::Ur, Kind::Vr, Kind::UPrime, Kind::VPrime] {
                let fast = expectation_exact(&m, kind, t).unwrap();
                let slow = expectation_enumerated(&m, kind, t).unwrap();
                assert!(close(fast, slow), "{kind:?} at {t}: {fast} vs {slow}");
            }
            if t != 0 {
                let fast = expectation_exact(&m, Kind::Rn, t).unwrap();
                let slow = expectation_enumerated(&m, Kind::Rn, t).unwrap();
                assert!(close(fast, slow), "Rn at {t}: {fast} vs {slow}");
            }
            let fast = delta_exact(&m, DeltaKind::Qn, t).unwrap();
            let slow = delta_enumerated(&m, DeltaKind::Qn, t).unwrap();
            assert!(close(fast, slow), "delta at {t} ({}): {fast} vs {slow}", pk.deg(t));
        }
    }

    #[test]
    fn wider_residue_window() {
        let m = model(2, vec![0, 3, 7, 11, 19, 24], 1, 3);
        for t in [0u64, 5, 48, 130, 260, 624] {
            for kind in [Kind::Qn, Kind::Ur, Kind::Vr, Kind::UPrime, Kind::VPrime, Kind::Wr] {
                let fast = expectation_exact(&m, kind, t).unwrap();
                let slow = expectation_enumerated(&m, kind, t).unwrap();
                assert!(close(fast, slow), "{kind:?} at {t}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn empty_window_is_zero() {
        let m = model(1, vec![], 0, 3);
        for kind in Kind::ALL {
            assert_eq!(expectation_exact(&m, kind, 7).unwrap(), 0.0);
        }
    }

    #[test]
    fn chain_tuples_match_counts() {
        let members: Vec<u64> = (1..125).step_by(3).collect();
        let u = Omega::new(PackedRing::new(5, 1), 1, &members);
        let eps = Rational::new(1, 2);
        for n in [3u64, 10, 37, 80] {
            let mut t = 0u64;
            for_each_tn_tuple(&u, n, |_| t += 1);
            assert_eq!(t, combinat::count_tn(&u, n));
            let mut b = 0u64;
            for_each_bn_tuple(&u, n, eps, |_| b += 1).unwrap();
            assert_eq!(b, combinat::count_bn(&u, n, Some(eps)).unwrap());
        }
    }

    #[test]
    fn all_r_arrays_agree_with_pointwise() {
        let m = model(1, vec![1, 2, 3], 0, 2);
        for fam in [FamilyKind::U, FamilyKind::V, FamilyKind::UPrime, FamilyKind::VPrime] {
            let fast = family_expectations_all(&m, fam).unwrap();
            let slow = family_expectations_all_enumerated(&m, fam).unwrap();
            let keys = |mp: &BTreeMap<u64, f64>| -> Vec<u64> {
                mp.iter().filter(|(_, &v)| v > 1e-12).map(|(&r, _)| r).collect()
            };
            assert_eq!(keys(&fast), keys(&slow), "{fam:?}");
            for (r, v) in &slow {
                assert!(close(fast[r], *v), "{fam:?} at {r}");
            }
        }
    }

    #[test]
    fn kind_names_parse() {
        for k in Kind::ALL {
            assert_eq!(k.name().parse::<Kind>().unwrap(), k);
        }
        assert_eq!("Ur".parse::<Kind>().unwrap(), Kind::Ur);
        assert_eq!("up".parse::<Kind>().unwrap(), Kind::UPrime);
    }
}
