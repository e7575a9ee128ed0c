//! Representation functions, the counting families attached to a sample, and
//! disjoint-vector / sunflower detection.
//!
//! Everything works on canonical polynomial codes with a [`PackedRing`] for the
//! additive structure.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::PackedRing;
use crate::randmodel::OmegaSample;
use crate::ratio::Rational;

/// Unordered pairs `{a, a'}` from `a` (with `a = a'` allowed) summing to `n`.
pub fn rep_sum_count(pk: &PackedRing, a: &[u64], n: u64) -> u64 {
    let set: HashSet<u64> = a.iter().copied().collect();
    let mut twice = 0;
    for &x in &set {
        let y = pk.sub(n, x);
        if set.contains(&y) {
            // each unordered pair with x != y is seen twice, {x, x} once
            twice += if x == y { 2 } else { 1 };
        }
    }
    twice / 2
}

/// Ordered pairs `(a, a')` from `a` with `a - a' = x`.
pub fn rep_diff_count_ring(pk: &PackedRing, a: &[u64], x: u64) -> u64 {
    let set: HashSet<u64> = a.iter().copied().collect();
    set.iter().filter(|&&b| set.contains(&pk.sub(b, x))).count() as u64
}

/// Unordered pairs `(a, b)` with `a <= b`, grouped by sum; pairs in each group are sorted.
pub fn pair_sums(pk: &PackedRing, a: &[u64]) -> HashMap<u64, Vec<(u64, u64)>> {
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
    for (i, &x) in sorted.iter().enumerate() {
        for &y in &sorted[i..] {
            out.entry(pk.add(x, y)).or_default().push((x, y));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct B2gWitness {
    pub n: u64,
    pub pairs: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct B2gReport {
    pub g: u64,
    pub max_reps: u64,
    /// The smallest sum attaining `max_reps` when it exceeds `g`.
    pub witness: Option<B2gWitness>,
}

impl B2gReport {
    pub fn holds(&self) -> bool {
        self.max_reps <= self.g
    }
}

pub fn verify_b2g(pk: &PackedRing, a: &[u64], g: u64) -> B2gReport {
    let sums = pair_sums(pk, a);
    let max_reps = sums.values().map(|v| v.len() as u64).max().unwrap_or(0);
    let witness = if max_reps > g {
        sums.iter()
            .filter(|(_, v)| v.len() as u64 == max_reps)
            .min_by_key(|(n, _)| **n)
            .map(|(&n, v)| B2gWitness { n, pairs: v.clone() })
    } else {
        None
    };
    B2gReport { g, max_reps, witness }
}

/// A sample prepared for counting: members with residue-class buckets.
#[derive(Clone, Debug)]
pub struct Omega {
    pk: PackedRing,
    n0: u32,
    members: Vec<u64>,
    pos: HashMap<u64, usize>,
    residue: Vec<u64>,
    classes: HashMap<u64, Vec<u64>>,
}

impl Omega {
    /// `n0` is the window `N` of the residue condition mod `t^N`.
    pub fn new(pk: PackedRing, n0: u32, members: &[u64]) -> Self {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let pos = members.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let residue: Vec<u64> = members.iter().map(|&x| pk.residue(x, n0)).collect();
        let mut classes: HashMap<u64, Vec<u64>> = HashMap::new();
        for (&x, &r) in members.iter().zip(&residue) {
            classes.entry(r).or_default().push(x);
        }
        Omega {
            pk,
            n0,
            members,
            pos,
            residue,
            classes,
        }
    }

    pub fn from_sample(sample: &OmegaSample) -> Self {
        let pk = PackedRing::new(sample.params.p, sample.params.h);
        Omega::new(pk, sample.params.n, &sample.members)
    }

    /// The sub-sample of members kept by `keep`.
    pub fn restrict(&self, keep: impl Fn(u64) -> bool) -> Self {
        let kept: Vec<u64> = self.members.iter().copied().filter(|&x| keep(x)).collect();
        Omega::new(self.pk.clone(), self.n0, &kept)
    }

    pub fn packed(&self) -> &PackedRing {
        &self.pk
    }

    pub fn window(&self) -> u32 {
        self.n0
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.pos.contains_key(&x)
    }

    pub fn residue_of(&self, x: u64) -> u64 {
        match self.pos.get(&x) {
            Some(&i) => self.residue[i],
            None => self.pk.residue(x, self.n0),
        }
    }

    fn class(&self, r: u64) -> &[u64] {
        self.classes.get(&r).map_or(&[], Vec::as_slice)
    }

    /// Ordered pairs `(a, b)` in the sample with `a + b = sigma`, `a ≡ ra`, `b ≡ rb`.
    fn matched_pairs(&self, sigma: u64, ra: u64, rb: u64) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.class(ra).iter().filter_map(move |&a| {
            let b = self.pk.sub(sigma, a);
            (self.contains(b) && self.residue_of(b) == rb).then_some((a, b))
        })
    }

    pub fn matched_pairs_vec(&self, sigma: u64, ra: u64, rb: u64) -> Vec<(u64, u64)> {
        self.matched_pairs(sigma, ra, rb).collect()
    }

    /// Number of ordered pairs in `P = {(a, b) : a + b = x + y, a ≡ x, b ≡ y}`
    /// whose underlying set is `{a, b}`; `(a, b)` itself is assumed to lie in `P`.
    fn same_set_multiplicity(&self, a: u64, b: u64) -> u64 {
        if a != b && self.residue_of(a) == self.residue_of(b) {
            2
        } else {
            1
        }
    }

    /// For `x1` in the sample: the number of `(x4, ..., x8)` completing the
    /// chain `x1 + x4 = x5 + x6 = x7 + x8` of the B2[2] violation family, and
    /// the number of `(x5, x6, x7)` completing `x1 + x5 = x6 + x7` of the Sidon
    /// violation family.
    pub fn chain_counts(&self, x1: u64) -> (u64, u64) {
        let r1 = self.residue_of(x1);
        let (mut t, mut b) = (0u64, 0u64);
        for (&x4, &r4) in self.members.iter().zip(&self.residue) {
            let sigma = self.pk.add(x1, x4);
            let pairs: Vec<(u64, u64)> = self.matched_pairs(sigma, r1, r4).collect();
            let k = pairs.len() as u64;
            let e = self.same_set_multiplicity(x1, x4);
            b += k - e;
            let (lo, hi) = (x1.min(x4), x1.max(x4));
            for &(x5, x6) in &pairs {
                if (x5.min(x6), x5.max(x6)) == (lo, hi) {
                    continue;
                }
                t += k - self.same_set_multiplicity(x5, x6);
            }
        }
        (t, b)
    }

    /// [`Omega::chain_counts`] for every member.
    pub fn chain_table(&self) -> HashMap<u64, (u64, u64)> {
        use rayon::prelude::*;
        self.members
            .par_iter()
            .map(|&x| (x, self.chain_counts(x)))
            .collect()
    }
}

/// 3-subsets `{x1 < x2 < x3}` summing to `n` with pairwise distinct residues.
pub fn qn_witnesses(om: &Omega, n: u64) -> Vec<[u64; 3]> {
    let m = om.members();
    let mut out = Vec::new();
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            let (a, b) = (m[i], m[j]);
            let c = om.pk.sub(om.pk.sub(n, a), b);
            if c > b && om.contains(c) && distinct_residues(om, &[a, b, c]) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

pub fn count_qn(om: &Omega, n: u64) -> u64 {
    qn_witnesses(om, n).len() as u64
}

fn distinct_residues(om: &Omega, xs: &[u64]) -> bool {
    let rs: Vec<u64> = xs.iter().map(|&x| om.residue_of(x)).collect();
    (0..rs.len()).all(|i| (i + 1..rs.len()).all(|j| rs[i] != rs[j]))
}

/// Ordered 8-tuples of the B2[2] violation family for target `n`.
pub fn count_tn(om: &Omega, n: u64) -> u64 {
    let mut memo: HashMap<u64, u64> = HashMap::new();
    let mut total = 0;
    for theta in qn_witnesses(om, n) {
        for x in theta {
            let c = *memo.entry(x).or_insert_with(|| om.chain_counts(x).0);
            // (x2, x3) may come in either order
            total += 2 * c;
        }
    }
    total
}

/// `min deg <= eps * deg n`, compared exactly.
fn small_summand(om: &Omega, xs: &[u64], eps: Rational, n: u64) -> bool {
    let dn = om.pk.deg(n).as_i64_or(-1) as i128;
    let min = xs
        .iter()
        .map(|&x| om.pk.deg(x).as_i64_or(-1))
        .min()
        .unwrap_or(-1) as i128;
    min * (*eps.denom() as i128) <= (*eps.numer() as i128) * dn
}

/// 4-subsets summing to `n` with pairwise distinct residues and a summand of
/// degree at most `eps * deg n`.
pub fn rn_witnesses(om: &Omega, n: u64, eps: Option<Rational>) -> Result<Vec<[u64; 4]>> {
    let eps = eps.ok_or(Error::EpsilonUnset)?;
    if n == 0 {
        return Err(Error::Invalid("R_n needs a nonzero target".into()));
    }
    let m = om.members();
    let mut out = Vec::new();
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            let s2 = om.pk.add(m[i], m[j]);
            for k in j + 1..m.len() {
                let d = om.pk.sub(om.pk.sub(n, s2), m[k]);
                let xs = [m[i], m[j], m[k], d];
                if d > m[k]
                    && om.contains(d)
                    && distinct_residues(om, &xs)
                    && small_summand(om, &xs, eps, n)
                {
                    out.push(xs);
                }
            }
        }
    }
    Ok(out)
}

pub fn count_rn(om: &Omega, n: u64, eps: Option<Rational>) -> Result<u64> {
    Ok(rn_witnesses(om, n, eps)?.len() as u64)
}

/// Ordered 7-tuples of the Sidon violation family for target `n`.
pub fn count_bn(om: &Omega, n: u64, eps: Option<Rational>) -> Result<u64> {
    let mut memo: HashMap<u64, u64> = HashMap::new();
    let mut total = 0;
    for theta in rn_witnesses(om, n, eps)? {
        for x in theta {
            let c = *memo.entry(x).or_insert_with(|| om.chain_counts(x).1);
            // orderings of the other three summands
            total += 6 * c;
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyKind {
    U,
    V,
    W,
    #[serde(rename = "U'")]
    UPrime,
    #[serde(rename = "V'")]
    VPrime,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::U,
        FamilyKind::V,
        FamilyKind::W,
        FamilyKind::UPrime,
        FamilyKind::VPrime,
    ];

    /// Number of coordinates of a member vector.
    pub fn arity(self) -> usize {
        match self {
            FamilyKind::U | FamilyKind::V => 2,
            FamilyKind::UPrime | FamilyKind::VPrime => 3,
            FamilyKind::W => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::U => "U",
            FamilyKind::V => "V",
            FamilyKind::W => "W",
            FamilyKind::UPrime => "U'",
            FamilyKind::VPrime => "V'",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u" => Ok(FamilyKind::U),
            "v" => Ok(FamilyKind::V),
            "w" => Ok(FamilyKind::W),
            "u'" | "up" | "uprime" => Ok(FamilyKind::UPrime),
            "v'" | "vp" | "vprime" => Ok(FamilyKind::VPrime),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

/// Ordered tuples of the sample in the family `kind` at `r`.
pub fn family_counts(om: &Omega, kind: FamilyKind, r: u64) -> u64 {
    let pk = &om.pk;
    let m = om.members();
    match kind {
        FamilyKind::U => m
            .iter()
            .filter(|&&a| {
                let b = pk.sub(r, a);
                b != a && om.contains(b)
            })
            .count() as u64,
        FamilyKind::V => {
            if r == 0 {
                return 0;
            }
            m.iter().filter(|&&a| om.contains(pk.sub(a, r))).count() as u64
        }
        FamilyKind::W => m
            .iter()
            .map(|&x4| {
                let sigma = pk.add(r, x4);
                let ordered = m
                    .iter()
                    .filter(|&&a| {
                        let b = pk.sub(sigma, a);
                        a != b && a != x4 && b != x4 && om.contains(b)
                    })
                    .count() as u64;
                // distinct unordered pairs with one sum are disjoint
                ordered * ordered.saturating_sub(2)
            })
            .sum(),
        FamilyKind::UPrime | FamilyKind::VPrime => {
            let mut count = 0;
            for &x1 in m {
                for &x2 in m {
                    if x1 == x2 {
                        continue;
                    }
                    let s = pk.add(x1, x2);
                    let x3 = if kind == FamilyKind::UPrime {
                        pk.sub(r, s)
                    } else {
                        pk.sub(s, r)
                    };
                    if x3 != x1 && x3 != x2 && om.contains(x3) {
                        count += 1;
                    }
                }
            }
            count
        }
    }
}

/// Members of the family `kind` at `r`, as ordered tuples.
pub fn family_members(om: &Omega, kind: FamilyKind, r: u64) -> Vec<Vec<u64>> {
    let pk = &om.pk;
    let m = om.members();
    let mut out = Vec::new();
    match kind {
        FamilyKind::U | FamilyKind::V => {
            for &a in m {
                let b = if kind == FamilyKind::U { pk.sub(r, a) } else { pk.sub(a, r) };
                if a != b && om.contains(b) {
                    out.push(vec![a, b]);
                }
            }
        }
        FamilyKind::UPrime | FamilyKind::VPrime => {
            for &x1 in m {
                for &x2 in m {
                    let s = pk.add(x1, x2);
                    let x3 = if kind == FamilyKind::UPrime {
                        pk.sub(r, s)
                    } else {
                        pk.sub(s, r)
                    };
                    if x1 != x2 && x3 != x1 && x3 != x2 && om.contains(x3) {
                        out.push(vec![x1, x2, x3]);
                    }
                }
            }
        }
        FamilyKind::W => {
            for &x4 in m {
                let sigma = pk.add(r, x4);
                let pairs: Vec<(u64, u64)> = m
                    .iter()
                    .map(|&a| (a, pk.sub(sigma, a)))
                    .filter(|&(a, b)| a != b && a != x4 && b != x4 && om.contains(b))
                    .collect();
                for &(x5, x6) in &pairs {
                    for &(x7, x8) in &pairs {
                        if x7 != x5 && x7 != x6 {
                            out.push(vec![x4, x5, x6, x7, x8]);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Calls `visit(n, theta)` for every `theta` in some `Q_n(om)`, members in increasing order.
pub fn for_each_qn(om: &Omega, mut visit: impl FnMut(u64, [u64; 3])) {
    let (m, r) = (&om.members, &om.residue);
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            if r[j] == r[i] {
                continue;
            }
            let s = om.pk.add(m[i], m[j]);
            for k in j + 1..m.len() {
                if r[k] != r[i] && r[k] != r[j] {
                    visit(om.pk.add(s, m[k]), [m[i], m[j], m[k]]);
                }
            }
        }
    }
}

/// Calls `visit(n, theta)` for every `theta` in some `R_n(om)` with `n != 0`.
pub fn for_each_rn(om: &Omega, eps: Rational, mut visit: impl FnMut(u64, [u64; 4])) {
    let (m, r) = (&om.members, &om.residue);
    let (num, den) = (i128::from(*eps.numer()), i128::from(*eps.denom()));
    for i in 0..m.len() {
        // members are sorted by code, so m[i] has the least degree of the subset
        let di = i128::from(om.pk.deg(m[i]).as_i64_or(-1));
        for j in i + 1..m.len() {
            if r[j] == r[i] {
                continue;
            }
            let s2 = om.pk.add(m[i], m[j]);
            for k in j + 1..m.len() {
                if r[k] == r[i] || r[k] == r[j] {
                    continue;
                }
                let s3 = om.pk.add(s2, m[k]);
                for l in k + 1..m.len() {
                    if r[l] == r[i] || r[l] == r[j] || r[l] == r[k] {
                        continue;
                    }
                    let n = om.pk.add(s3, m[l]);
                    if n != 0 && di * den <= num * i128::from(om.pk.deg(n).as_i64_or(-1)) {
                        visit(n, [m[i], m[j], m[k], m[l]]);
                    }
                }
            }
        }
    }
}

/// Every target with a nonempty `Q_n` among the sample, with its witnesses.
pub fn qn_support(om: &Omega) -> BTreeMap<u64, Vec<[u64; 3]>> {
    let mut out: BTreeMap<u64, Vec<[u64; 3]>> = BTreeMap::new();
    for_each_qn(om, |n, th| out.entry(n).or_default().push(th));
    out
}

/// Every nonzero target with a nonempty `R_n` among the sample, with its witnesses.
pub fn rn_support(om: &Omega, eps: Rational) -> BTreeMap<u64, Vec<[u64; 4]>> {
    let mut out: BTreeMap<u64, Vec<[u64; 4]>> = BTreeMap::new();
    for_each_rn(om, eps, |n, th| out.entry(n).or_default().push(th));
    out
}

/// `|Q_n|` and `|T_n|` at every target with a nonempty `Q_n`.
pub fn qt_counts(om: &Omega) -> BTreeMap<u64, (u64, u64)> {
    let chains = om.chain_table();
    let mut out: HashMap<u64, (u64, u64)> = HashMap::new();
    for_each_qn(om, |n, th| {
        let e = out.entry(n).or_default();
        e.0 += 1;
        e.1 += th.iter().map(|x| 2 * chains[x].0).sum::<u64>();
    });
    out.into_iter().collect()
}

/// `|R_n|` and `|B_n|` at every target with a nonempty `R_n`.
pub fn rb_counts(om: &Omega, eps: Rational) -> BTreeMap<u64, (u64, u64)> {
    let chains = om.chain_table();
    let mut out: HashMap<u64, (u64, u64)> = HashMap::new();
    for_each_rn(om, eps, |n, th| {
        let e = out.entry(n).or_default();
        e.0 += 1;
        e.1 += th.iter().map(|x| 6 * chains[x].1).sum::<u64>();
    });
    out.into_iter().collect()
}

/// Vectors of `H` coordinates; coordinates are polynomial codes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorFamily {
    pub h: usize,
    pub vectors: Vec<Vec<u64>>,
}

impl VectorFamily {
    pub fn new(h: usize, vectors: Vec<Vec<u64>>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != h) {
            return Err(Error::Invalid(format!(
                "vector with {} coordinates in a family of H={h}",
                v.len()
            )));
        }
        let mut seen = HashSet::new();
        if !vectors.iter().all(|v| seen.insert(v.clone())) {
            return Err(Error::Invalid("family contains repeated vectors".into()));
        }
        Ok(VectorFamily { h, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn disjoint(a: &[u64], b: &[u64]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

/// Indices of `k` vectors with pairwise disjoint coordinate sets, if any.
pub fn find_k_dsv(family: &VectorFamily, k: usize) -> Option<Vec<usize>> {
    find_dsv_in(&family.vectors, k)
}

fn find_dsv_in(vectors: &[Vec<u64>], k: usize) -> Option<Vec<usize>> {
    if k == 0 {
        return Some(Vec::new());
    }
    // greedy pass first
    let mut greedy: Vec<usize> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if greedy.iter().all(|&j| disjoint(v, &vectors[j])) {
            greedy.push(i);
            if greedy.len() == k {
                return Some(greedy);
            }
        }
    }
    let n = vectors.len();
    let conflict: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && !disjoint(&vectors[i], &vectors[j])).collect())
        .collect();
    let mut chosen = Vec::with_capacity(k);
    let candidates: Vec<usize> = (0..n).collect();
    backtrack(&conflict, &candidates, k, &mut chosen).then_some(chosen)
}

fn backtrack(conflict: &[Vec<bool>], candidates: &[usize], k: usize, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == k {
        return true;
    }
    if chosen.len() + candidates.len() < k {
        return false;
    }
    for (pos, &c) in candidates.iter().enumerate() {
        if chosen.len() + candidates.len() - pos < k {
            return false;
        }
        chosen.push(c);
        let rest: Vec<usize> = candidates[pos + 1..]
            .iter()
            .copied()
            .filter(|&d| !conflict[c][d])
            .collect();
        if backtrack(conflict, &rest, k, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SunflowerWitness {
    /// Kernel coordinates, 0-based.
    pub kernel: Vec<usize>,
    /// Indices of the petals in the family.
    pub petals: Vec<usize>,
}

/// A vectorial sunflower with `k` petals: vectors agreeing on a kernel `I` whose
/// remaining coordinates form a `k`-d.s.v.
pub fn find_sunflower(family: &VectorFamily, k: usize) -> Option<SunflowerWitness> {
    let h = family.h;
    // I = all coordinates cannot work for distinct vectors
    for mask in 0u32..(1 << h) - 1 {
        let kernel: Vec<usize> = (0..h).filter(|&i| mask >> i & 1 == 1).collect();
        let mut buckets: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
        for (idx, v) in family.vectors.iter().enumerate() {
            buckets
                .entry(kernel.iter().map(|&i| v[i]).collect())
                .or_default()
                .push(idx);
        }
        for members in buckets.values() {
            if members.len() < k {
                continue;
            }
            let residual: Vec<Vec<u64>> = members
                .iter()
                .map(|&idx| {
                    (0..h)
                        .filter(|&i| mask >> i & 1 == 0)
                        .map(|i| family.vectors[idx][i])
                        .collect()
                })
                .collect();
            if let Some(found) = find_dsv_in(&residual, k) {
                return Some(SunflowerWitness {
                    kernel: kernel.clone(),
                    petals: found.into_iter().map(|j| members[j]).collect(),
                });
            }
        }
    }
    None
}

/// `H! ((H^2 - H + 1) K)^H`, the size bound for sunflower-free families.
pub fn sunflower_free_bound(h: usize, k: usize) -> f64 {
    let fact: f64 = (1..=h).map(|i| i as f64).product();
    fact * (((h * h - h + 1) * k) as f64).powi(h as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pk() -> PackedRing {
        PackedRing::new(5, 1)
    }

    #[test]
    fn representation_examples() {
        let pk = pk();
        assert_eq!(rep_sum_count(&pk, &[1, 2, 3, 4], 0), 2);
        assert_eq!(rep_sum_count(&pk, &[3], pk.add(3, 3)), 1);
        assert_eq!(rep_diff_count_ring(&pk, &[1, 2, 3, 4], 0), 4);
    }

    #[test]
    fn b2g_examples() {
        let pk = pk();
        let r = verify_b2g(&pk, &[1, 2, 3, 4], 1);
        assert_eq!(r.max_reps, 2);
        assert!(!r.holds());
        assert_eq!(r.witness.unwrap().n, 0);
        assert!(verify_b2g(&pk, &[1, 2, 3, 4], 2).holds());
        // {1, t}
        assert!(verify_b2g(&pk, &[1, 5], 1).holds());
        assert_eq!(verify_b2g(&pk, &[], 1).max_reps, 0);
    }

    #[test]
    fn qn_examples() {
        let pk = pk();
        // N = 1: residues are constant terms
        let om = Omega::new(pk.clone(), 1, &[1 + 5, 2 + 10, 3 + 15]);
        let n = pk.add(pk.add(6, 12), 18);
        assert_eq!(count_qn(&om, n), 1);
        let om = Omega::new(pk.clone(), 1, &[1 + 5, 1 + 10, 3 + 15]);
        let n = pk.add(pk.add(6, 11), 18);
        assert_eq!(count_qn(&om, n), 0);
    }

    #[test]
    fn tn_small_cases() {
        let pk = pk();
        let empty = Omega::new(pk.clone(), 1, &[]);
        assert_eq!(count_tn(&empty, 7), 0);
        // two residue classes only
        let om = Omega::new(pk.clone(), 1, &[6, 11, 16, 7, 12]);
        for n in 0..125 {
            assert_eq!(count_qn(&om, n), 0);
            assert_eq!(count_tn(&om, n), 0);
        }
    }

    #[test]
    fn family_examples() {
        let pk = pk();
        let om = Omega::new(pk.clone(), 1, &[6, 12]);
        let r = pk.add(6, 12);
        assert_eq!(family_counts(&om, FamilyKind::U, r), 2);
        assert_eq!(family_counts(&om, FamilyKind::V, 0), 0);
        for kind in FamilyKind::ALL {
            for r in 0..125 {
                assert_eq!(
                    family_counts(&om, kind, r),
                    family_members(&om, kind, r).len() as u64
                );
            }
        }
    }

    #[test]
    fn rn_requires_epsilon() {
        let om = Omega::new(pk(), 1, &[6, 12]);
        assert_eq!(count_rn(&om, 3, None).unwrap_err(), Error::EpsilonUnset);
        assert_eq!(count_bn(&om, 3, None).unwrap_err(), Error::EpsilonUnset);
    }

    #[test]
    fn dsv_examples() {
        let f = VectorFamily::new(2, vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(find_k_dsv(&f, 2), Some(vec![0, 1]));
        let f = VectorFamily::new(2, vec![vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(find_k_dsv(&f, 2), None);
        // greedy picks (1,2) first, the answer needs the other two
        let f = VectorFamily::new(2, vec![vec![1, 2], vec![1, 3], vec![2, 4]]).unwrap();
        assert_eq!(find_k_dsv(&f, 2), Some(vec![1, 2]));
        assert!(VectorFamily::new(2, vec![vec![1]]).is_err());
        assert!(VectorFamily::new(1, vec![vec![1], vec![1]]).is_err());
    }

    #[test]
    fn sunflower_examples() {
        let f = VectorFamily::new(2, vec![vec![9, 1], vec![9, 2], vec![9, 3]]).unwrap();
        let w = find_sunflower(&f, 3).unwrap();
        assert_eq!(w.kernel, vec![0]);
        assert_eq!(w.petals, vec![0, 1, 2]);
        let f = VectorFamily::new(1, vec![vec![1], vec![2], vec![3], vec![4]]).unwrap();
        let w = find_sunflower(&f, 3).unwrap();
        assert!(w.kernel.is_empty());
        assert_eq!(sunflower_free_bound(1, 3), 3.0);
        assert_eq!(sunflower_free_bound(2, 1), 2.0 * 9.0);
    }
}
