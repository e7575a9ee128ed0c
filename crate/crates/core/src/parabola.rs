//! The parabola `{(x, x^2)}` in `F_{q'} x F_{q'}` and its pullback to `G_{4M0}`.
//!
//! Group elements of either ambient are stored as integer codes. A pair `(x, y)`
//! has code `x + q' y` using field indices; a polynomial of `G_{4M0}` has its
//! canonical code. Both groups are `(Z/p)^{4hM0}` with digitwise addition on the
//! base-`p` expansion of the code, which is what [`PackedRing`] implements.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FieldElem};
use crate::polyring::{FieldTag, PackedRing, Poly, PolyRing};

#[derive(Clone, Debug)]
pub struct ParabolaCtx {
    base: FieldCtx,
    m0: u32,
    prime: FieldCtx,
}

impl ParabolaCtx {
    pub fn new(p: u64, h: u32, m0: u32) -> Result<Self> {
        let base = FieldCtx::new(p, h)?;
        if p <= 3 {
            return Err(Error::SmallCharacteristic(p));
        }
        if m0 == 0 {
            return Err(Error::Invalid("M0 must be at least 1".into()));
        }
        let prime = FieldCtx::new(p, 2 * h * m0)?;
        if prime.q() > 1 << 16 {
            return Err(Error::FieldTooLarge(prime.q()));
        }
        Ok(ParabolaCtx { base, m0, prime })
    }

    pub fn base(&self) -> &FieldCtx {
        &self.base
    }

    pub fn prime_field(&self) -> &FieldCtx {
        &self.prime
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    pub fn q_prime(&self) -> u64 {
        self.prime.q()
    }

    /// Window `N = 4 M0` of the polynomial ambient.
    pub fn window(&self) -> u32 {
        4 * self.m0
    }

    pub fn pair_code(&self, x: FieldElem, y: FieldElem) -> u64 {
        x.index() as u64 + self.q_prime() * y.index() as u64
    }

    pub fn code_pair(&self, code: u64) -> (FieldElem, FieldElem) {
        let qp = self.q_prime();
        (FieldElem((code % qp) as u32), FieldElem((code / qp) as u32))
    }

    /// Additive bijection `G_{4M0} -> F_{q'} x F_{q'}` by degree-major flattening
    /// of coefficient coordinates.
    pub fn iso_to_product(&self, ring: &PolyRing, f: &Poly) -> Result<(FieldElem, FieldElem)> {
        self.check_ring(ring)?;
        let n = self.window();
        if let Some(d) = f.deg().get() {
            if d >= n {
                return Err(Error::OutOfWindow { deg: d, n });
            }
        }
        let flat: Vec<u64> = (0..n as usize)
            .flat_map(|i| self.base.coords(f.coeff(i)))
            .collect();
        let half = flat.len() / 2;
        Ok((
            self.prime.from_coords(&flat[..half])?,
            self.prime.from_coords(&flat[half..])?,
        ))
    }

    pub fn iso_from_product(&self, ring: &PolyRing, pair: (FieldElem, FieldElem)) -> Result<Poly> {
        self.check_ring(ring)?;
        let mut flat = self.prime.coords(pair.0);
        flat.extend(self.prime.coords(pair.1));
        let h = self.base.h() as usize;
        let coeffs = flat
            .chunks(h)
            .map(|c| self.base.from_coords(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::from_coeffs(ring.tag(), coeffs))
    }

    fn check_ring(&self, ring: &PolyRing) -> Result<()> {
        let want = FieldTag {
            p: self.base.p(),
            h: self.base.h(),
        };
        if ring.tag() != want {
            return Err(Error::MixedFields(ring.tag().to_string(), want.to_string()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ambient {
    /// `F_{q'} x F_{q'}`, codes `x + q' y`.
    Product { p: u64, q_prime: u64 },
    /// `G_n` over `F_{p^h}`, canonical codes.
    Gn { p: u64, h: u32, n: u32 },
}

impl Ambient {
    pub fn size(&self) -> u64 {
        match *self {
            Ambient::Product { q_prime, .. } => q_prime * q_prime,
            Ambient::Gn { p, h, n } => p.pow(h * n),
        }
    }

    pub fn packed(&self) -> PackedRing {
        match *self {
            Ambient::Product { p, .. } => PackedRing::new(p, 1),
            Ambient::Gn { p, h, .. } => PackedRing::new(p, h),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidonSet {
    pub ambient: Ambient,
    /// Sorted codes.
    pub elements: Vec<u64>,
}

impl SidonSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

pub fn build_parabola(ctx: &ParabolaCtx) -> SidonSet {
    let f = &ctx.prime;
    let mut elements: Vec<u64> = f
        .elements()
        .into_iter()
        .map(|x| ctx.pair_code(x, f.mul(x, x)))
        .collect();
    elements.sort_unstable();
    SidonSet {
        ambient: Ambient::Product {
            p: f.p(),
            q_prime: f.q(),
        },
        elements,
    }
}

/// The parabola pulled back to `G_{4M0}` over `F_{p^h}`.
pub fn build_sidon_in_gn(p: u64, h: u32, m0: u32) -> Result<SidonSet> {
    let ctx = ParabolaCtx::new(p, h, m0)?;
    let ring = PolyRing::new(ctx.base.clone());
    let product = build_parabola(&ctx);
    let mut elements = product
        .elements
        .iter()
        .map(|&c| {
            let f = ctx.iso_from_product(&ring, ctx.code_pair(c))?;
            ring.code(&f)
        })
        .collect::<Result<Vec<_>>>()?;
    elements.sort_unstable();
    let set = SidonSet {
        ambient: Ambient::Gn { p, h, n: ctx.window() },
        elements,
    };
    let report = verify_sidon(&set);
    if report.max_multiplicity > 1 {
        return Err(Error::Hypothesis(format!(
            "pulled-back set is not Sidon in G_{}",
            ctx.window()
        )));
    }
    Ok(set)
}

/// Ordered pairs `(a, a')` of `S` with `a - a' = e`.
pub fn rep_diff_count(set: &SidonSet, e: u64) -> u64 {
    let pk = set.ambient.packed();
    let mut n = 0;
    for &a in &set.elements {
        let b = pk.sub(a, e);
        if set.elements.binary_search(&b).is_ok() {
            n += 1;
        }
    }
    n
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidonReport {
    pub max_multiplicity: u64,
    /// `(a, b, c, d)` with `a - b = c - d`, `(a, b) != (c, d)` and `a != b`.
    pub witness: Option<[u64; 4]>,
}

impl SidonReport {
    pub fn is_sidon(&self) -> bool {
        self.max_multiplicity <= 1
    }
}

pub fn verify_sidon(set: &SidonSet) -> SidonReport {
    let pk = set.ambient.packed();
    let size = set.ambient.size() as usize;
    let mut first: Vec<Option<(u64, u64)>> = vec![None; size];
    let mut counts = vec![0u64; size];
    let mut witness = None;
    for &a in &set.elements {
        for &b in &set.elements {
            if a == b {
                continue;
            }
            let e = pk.sub(a, b) as usize;
            counts[e] += 1;
            match first[e] {
                None => first[e] = Some((a, b)),
                Some((c, d)) if witness.is_none() => witness = Some([a, b, c, d]),
                _ => {}
            }
        }
    }
    SidonReport {
        max_multiplicity: counts.into_iter().max().unwrap_or(0),
        witness,
    }
}

/// Solutions of `x + y + z = a`, `x^2 + y^2 + z^2 = b` in ordered triples over `F_{q'}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemCount {
    pub total: u64,
    pub distinct_coords: u64,
    pub with_zero_coord: u64,
}

impl SystemCount {
    pub fn repeated_coords(&self) -> u64 {
        self.total - self.distinct_coords
    }

    fn add(&mut self, x: FieldElem, y: FieldElem, z: FieldElem) {
        self.total += 1;
        if x != y && y != z && x != z {
            self.distinct_coords += 1;
        }
        if x.is_zero() || y.is_zero() || z.is_zero() {
            self.with_zero_coord += 1;
        }
    }

    fn merge(mut self, o: SystemCount) -> SystemCount {
        self.total += o.total;
        self.distinct_coords += o.distinct_coords;
        self.with_zero_coord += o.with_zero_coord;
        self
    }
}

pub fn count_system_solutions(ctx: &ParabolaCtx, a: FieldElem, b: FieldElem) -> SystemCount {
    let f = &ctx.prime;
    let elems = f.elements();
    elems
        .par_iter()
        .map(|&x| {
            let mut c = SystemCount::default();
            for &y in &elems {
                let z = f.sub(f.sub(a, x), y);
                let s = f.add(f.add(f.mul(x, x), f.mul(y, y)), f.mul(z, z));
                if s == b {
                    c.add(x, y, z);
                }
            }
            c
        })
        .reduce(SystemCount::default, SystemCount::merge)
}

/// [`SystemCount`] for every target at once, indexed by pair code `a + q' b`.
pub fn system_table(ctx: &ParabolaCtx) -> Vec<SystemCount> {
    let f = &ctx.prime;
    let qp = ctx.q_prime() as usize;
    let elems = f.elements();
    let squares: Vec<FieldElem> = elems.iter().map(|&x| f.mul(x, x)).collect();
    elems
        .par_iter()
        .fold(
            || vec![SystemCount::default(); qp * qp],
            |mut table, &x| {
                for &y in &elems {
                    for &z in &elems {
                        let a = f.add(f.add(x, y), z);
                        let b = f.add(
                            f.add(squares[x.index() as usize], squares[y.index() as usize]),
                            squares[z.index() as usize],
                        );
                        table[ctx.pair_code(a, b) as usize].add(x, y, z);
                    }
                }
                table
            },
        )
        .reduce(
            || vec![SystemCount::default(); qp * qp],
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
        )
}

/// Histogram of `total - q'` over all targets.
pub fn deviation_table(ctx: &ParabolaCtx, table: &[SystemCount]) -> BTreeMap<i64, u64> {
    let mut out = BTreeMap::new();
    for c in table {
        *out.entry(c.total as i64 - ctx.q_prime() as i64).or_insert(0) += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisReport {
    pub min_reps: u64,
    pub failing_targets: Vec<u64>,
}

impl BasisReport {
    fn from_counts(counts: &[u64]) -> Self {
        BasisReport {
            min_reps: counts.iter().copied().min().unwrap_or(0),
            failing_targets: (0..counts.len() as u64)
                .filter(|&g| counts[g as usize] == 0)
                .collect(),
        }
    }

    pub fn holds(&self) -> bool {
        self.min_reps >= 1
    }
}

/// Ordered triples of pairwise distinct elements, counted per sum.
pub fn three_sum_counts(set: &SidonSet) -> Vec<u64> {
    let pk = set.ambient.packed();
    let size = set.ambient.size() as usize;
    let e = &set.elements;
    (0..e.len())
        .into_par_iter()
        .fold(
            || vec![0u64; size],
            |mut acc, i| {
                for j in 0..e.len() {
                    if j == i {
                        continue;
                    }
                    let s = pk.add(e[i], e[j]);
                    for (k, &ek) in e.iter().enumerate() {
                        if k != i && k != j {
                            acc[pk.add(s, ek) as usize] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0u64; size], add_vecs)
}

/// 4-subsets counted per sum.
pub fn four_subset_counts(set: &SidonSet) -> Vec<u64> {
    let pk = set.ambient.packed();
    let size = set.ambient.size() as usize;
    let e = &set.elements;
    let m = e.len();
    (0..m)
        .into_par_iter()
        .fold(
            || vec![0u64; size],
            |mut acc, i| {
                for j in i + 1..m {
                    let s2 = pk.add(e[i], e[j]);
                    for k in j + 1..m {
                        let s3 = pk.add(s2, e[k]);
                        for &el in &e[k + 1..] {
                            acc[pk.add(s3, el) as usize] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0u64; size], add_vecs)
}

fn add_vecs(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Every target is a sum of three distinct parabola points; counts are ordered.
pub fn verify_basis3_distinct(ctx: &ParabolaCtx) -> BasisReport {
    BasisReport::from_counts(&three_sum_counts(&build_parabola(ctx)))
}

/// Every target is a sum of four distinct parabola points; counts are subsets.
pub fn verify_basis4_distinct(ctx: &ParabolaCtx) -> BasisReport {
    BasisReport::from_counts(&four_subset_counts(&build_parabola(ctx)))
}

/// Smallest `q'` among the listed parameter choices for which the order-3
/// basis property holds, scanning in order.
pub fn smallest_basis3(candidates: &[(u64, u32, u32)]) -> Result<Option<(u64, BasisReport)>> {
    for &(p, h, m0) in candidates {
        let ctx = ParabolaCtx::new(p, h, m0)?;
        let report = verify_basis3_distinct(&ctx);
        if report.holds() {
            return Ok(Some((ctx.q_prime(), report)));
        }
    }
    Ok(None)
}
