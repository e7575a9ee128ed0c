//! The random-sequence model: `x` is included independently with probability
//! `q^{-gamma deg x}` when `M < deg x <= D` and `x mod t^N` lies in `S`.
//!
//! Inclusion of `x = s + t^N h` is decided by the `h`-th 64-bit word of a ChaCha8
//! stream keyed by `(seed, s)`, so a sample does not depend on enumeration order
//! or thread count, and shrinking the degree window only removes members.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{is_prime, FieldCtx};
use crate::numeric;
use crate::polyring::{Degree, PackedRing, Poly, PolyRing};
use crate::ratio::{self, Rational};

/// Upper limit on the number of admissible polynomials in a window.
pub const MAX_WINDOW: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub p: u64,
    pub h: u32,
    #[serde(rename = "N")]
    pub n: u32,
    /// Residues mod `t^N` as canonical codes.
    #[serde(rename = "S")]
    pub s: Vec<u64>,
    #[serde(with = "ratio::serde_str")]
    pub gamma: Rational,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "D")]
    pub d: u32,
    #[serde(
        default,
        with = "ratio::serde_opt_str",
        skip_serializing_if = "Option::is_none"
    )]
    pub epsilon: Option<Rational>,
    pub seed: u64,
}

impl ModelParams {
    pub fn q(&self) -> u64 {
        self.p.pow(self.h)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::NotPrime(self.p));
        }
        if self.h == 0 {
            return Err(Error::BadDegree(0));
        }
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        if self.gamma <= zero || self.gamma >= one {
            return Err(Error::Invalid(format!(
                "gamma must lie in (0, 1), got {}",
                ratio::format_ratio(&self.gamma)
            )));
        }
        if let Some(e) = self.epsilon {
            if e <= zero || e >= one {
                return Err(Error::Invalid(format!(
                    "epsilon must lie in (0, 1), got {}",
                    ratio::format_ratio(&e)
                )));
            }
        }
        if self.d <= self.m {
            return Err(Error::Invalid(format!(
                "truncation degree D={} must exceed M={}",
                self.d, self.m
            )));
        }
        let q = u128::from(self.q());
        if q.checked_pow(self.d + 1).is_none_or(|t| t > u128::from(u64::MAX)) {
            return Err(Error::WindowTooLarge(u128::MAX, MAX_WINDOW));
        }
        let qn = q.pow(self.n);
        if let Some(&bad) = self.s.iter().find(|&&s| u128::from(s) >= qn) {
            return Err(Error::Invalid(format!("residue {bad} is not in G_{}", self.n)));
        }
        let mut sorted = self.s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.s.len() {
            return Err(Error::Invalid("S contains repeated residues".into()));
        }
        Ok(())
    }
}

/// A validated [`ModelParams`] with precomputed lookup tables.
#[derive(Clone, Debug)]
pub struct Model {
    params: ModelParams,
    pk: PackedRing,
    in_s: Vec<bool>,
    /// Sorted residues.
    s: Vec<u64>,
    /// `q^{-gamma d}` for `d <= D`.
    prob_by_deg: Vec<f64>,
}

impl Model {
    pub fn new(mut params: ModelParams) -> Result<Self> {
        params.validate()?;
        params.s.sort_unstable();
        let pk = PackedRing::new(params.p, params.h);
        let qn = pk
            .q_pow(params.n)
            .filter(|&v| v <= 1 << 28)
            .ok_or_else(|| Error::WindowTooLarge(u128::from(params.q()).pow(params.n), 1 << 28))?;
        let mut in_s = vec![false; qn as usize];
        for &s in &params.s {
            in_s[s as usize] = true;
        }
        let g = ratio::to_f64(&params.gamma);
        let ln_q = (params.q() as f64).ln();
        let prob_by_deg = (0..=params.d).map(|d| (-g * d as f64 * ln_q).exp()).collect();
        let model = Model {
            s: params.s.clone(),
            params,
            pk,
            in_s,
            prob_by_deg,
        };
        if model.admissible_count() > MAX_WINDOW {
            return Err(Error::WindowTooLarge(model.admissible_count(), MAX_WINDOW));
        }
        Ok(model)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn packed(&self) -> &PackedRing {
        &self.pk
    }

    pub fn q(&self) -> u64 {
        self.pk.q()
    }

    pub fn ring(&self) -> PolyRing {
        PolyRing::new(FieldCtx::new(self.params.p, self.params.h).expect("validated"))
    }

    /// Residues, sorted.
    pub fn residues(&self) -> &[u64] {
        &self.s
    }

    pub fn residue_allowed(&self, r: u64) -> bool {
        self.in_s.get(r as usize).copied().unwrap_or(false)
    }

    /// `q^{-gamma d}` for a degree inside the window, ignoring residues.
    pub fn prob_of_degree(&self, d: Degree) -> f64 {
        match d.get() {
            Some(d) if d > self.params.m && d <= self.params.d => self.prob_by_deg[d as usize],
            _ => 0.0,
        }
    }

    pub fn is_admissible(&self, x: u64) -> bool {
        match self.pk.deg(x).get() {
            Some(d) => {
                d > self.params.m
                    && d <= self.params.d
                    && self.in_s[self.pk.residue(x, self.params.n) as usize]
            }
            None => false,
        }
    }

    /// Inclusion probability of the polynomial with code `x`.
    #[inline]
    pub fn prob_code(&self, x: u64) -> f64 {
        if x == 0 || !self.in_s[self.pk.residue(x, self.params.n) as usize] {
            return 0.0;
        }
        self.prob_of_degree(self.pk.deg(x))
    }

    pub fn prob_of(&self, ring: &PolyRing, x: &Poly) -> Result<f64> {
        if x.deg().get().is_some_and(|d| d > self.params.d) {
            return Ok(0.0);
        }
        Ok(self.prob_code(ring.code(x)?))
    }

    /// Lowest degree with a nonempty admissible class.
    fn first_degree(&self) -> u32 {
        self.params.m + 1
    }

    /// Number of admissible polynomials of exact degree `d`.
    pub fn admissible_count_of_degree(&self, d: u32) -> u128 {
        if d <= self.params.m || d > self.params.d {
            return 0;
        }
        let q = u128::from(self.q());
        if d >= self.params.n {
            self.s.len() as u128 * (q - 1) * q.pow(d - self.params.n)
        } else {
            self.s.iter().filter(|&&s| self.pk.deg(s) == Degree::new(d)).count() as u128
        }
    }

    pub fn admissible_count(&self) -> u128 {
        (self.first_degree()..=self.params.d)
            .map(|d| self.admissible_count_of_degree(d))
            .sum()
    }

    /// All admissible codes of exact degree `d`, sorted.
    pub fn admissible_of_degree(&self, d: u32) -> Vec<u64> {
        if d <= self.params.m || d > self.params.d {
            return Vec::new();
        }
        let n = self.params.n;
        if d < n {
            return self
                .s
                .iter()
                .copied()
                .filter(|&s| self.pk.deg(s) == Degree::new(d))
                .collect();
        }
        let qn = self.pk.q_pow(n).expect("validated");
        let hs = self.pk.degree_range(d - n).expect("validated");
        let mut out = Vec::with_capacity(hs.clone().count() * self.s.len());
        for h in hs {
            for &s in &self.s {
                out.push(s + qn * h);
            }
        }
        out
    }

    /// All admissible codes, sorted.
    pub fn admissible(&self) -> Vec<u64> {
        (self.first_degree()..=self.params.d)
            .flat_map(|d| self.admissible_of_degree(d))
            .collect()
    }

    /// Expected sample size, by degree-class counting.
    pub fn expected_size(&self) -> f64 {
        numeric::sum((self.first_degree()..=self.params.d).map(|d| {
            self.admissible_count_of_degree(d) as f64 * self.prob_by_deg[d as usize]
        }))
    }

    /// Expected sample size as a direct sum over admissible polynomials.
    pub fn expected_size_direct(&self) -> f64 {
        let xs = self.admissible();
        numeric::par_sum_slice(&xs, |&x| self.prob_code(x))
    }

    /// Inclusion decision for every admissible `x`, with the sample's seed.
    pub fn sample(&self) -> OmegaSample {
        self.sample_with_seed(self.params.seed)
    }

    pub fn sample_with_seed(&self, seed: u64) -> OmegaSample {
        let n = self.params.n;
        let qn = self.pk.q_pow(n).expect("validated");
        // the high part h ranges over [0, q^{D+1-N}); h = 0 is x = s itself
        let h_end = if self.params.d + 1 >= n {
            self.pk.q_pow(self.params.d + 1 - n).expect("validated")
        } else {
            1
        };
        const BLOCK: u64 = 1 << 14;
        let tasks: Vec<(u64, u64)> = self
            .s
            .iter()
            .flat_map(|&s| (0..h_end.div_ceil(BLOCK)).map(move |b| (s, b)))
            .collect();
        let mut members: Vec<u64> = tasks
            .par_iter()
            .flat_map_iter(|&(s, b)| {
                let start = b * BLOCK;
                let end = (start + BLOCK).min(h_end);
                let mut rng = keyed_rng(seed, s, start);
                let mut out = Vec::new();
                for h in start..end {
                    let u = unit(rng.next_u64());
                    let x = s + qn * h;
                    if u < self.prob_code(x) {
                        out.push(x);
                    }
                }
                out
            })
            .collect();
        members.sort_unstable();
        OmegaSample {
            params: ModelParams {
                seed,
                ..self.params.clone()
            },
            members,
        }
    }

    /// Inclusion decision for one polynomial; agrees with [`Model::sample_with_seed`].
    pub fn includes(&self, seed: u64, x: u64) -> bool {
        let n = self.params.n;
        let s = self.pk.residue(x, n);
        let h = self.pk.shift_down(x, n);
        let mut rng = keyed_rng(seed, s, h);
        unit(rng.next_u64()) < self.prob_code(x)
    }
}

fn keyed_rng(seed: u64, stream: u64, word: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * u128::from(word));
    rng
}

#[inline]
fn unit(v: u64) -> f64 {
    (v >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A finite sample `omega`: members are canonical codes, sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaSample {
    pub params: ModelParams,
    pub members: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct MemberJson {
    x: u64,
    deg: Degree,
}

#[derive(Serialize, Deserialize)]
struct OmegaJson {
    params: ModelParams,
    members: Vec<MemberJson>,
}

impl Serialize for OmegaSample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pk = PackedRing::new(self.params.p, self.params.h);
        OmegaJson {
            params: self.params.clone(),
            members: self
                .members
                .iter()
                .map(|&x| MemberJson { x, deg: pk.deg(x) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OmegaSample {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = OmegaJson::deserialize(d)?;
        let mut members: Vec<u64> = raw.members.iter().map(|m| m.x).collect();
        members.sort_unstable();
        members.dedup();
        Ok(OmegaSample {
            params: raw.params,
            members,
        })
    }
}

impl OmegaSample {
    /// A hand-built sample; members must be admissible for `params`.
    pub fn from_members(params: ModelParams, mut members: Vec<u64>) -> Result<Self> {
        let model = Model::new(params.clone())?;
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&x| !model.is_admissible(x)) {
            return Err(Error::Invalid(format!("member {bad} is not admissible")));
        }
        Ok(OmegaSample { params, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn polys(&self, ring: &PolyRing) -> Vec<Poly> {
        self.members.iter().map(|&x| ring.from_code(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn params(s: Vec<u64>, n: u32, m: u32, d: u32, seed: u64) -> ModelParams {
        ModelParams {
            p: 5,
            h: 1,
            n,
            s,
            gamma: Rational::new(7, 11),
            m,
            d,
            epsilon: None,
            seed,
        }
    }

    #[test]
    fn prob_examples() {
        let m = Model::new(params(vec![1], 2, 0, 11, 0)).unwrap();
        let x = 1 + 25 * 5u64.pow(9); // degree 11, residue 1
        assert!((m.prob_code(x) - 1.0 / 78125.0).abs() < 1e-18);
        assert_eq!(m.prob_code(0), 0.0);
        assert_eq!(m.prob_code(2 + 25 * 5u64.pow(9)), 0.0);
        let ring = m.ring();
        assert!((m.prob_of(&ring, &ring.from_code(x)).unwrap() - 1.0 / 78125.0).abs() < 1e-18);
        assert_eq!(m.prob_of(&ring, &ring.monomial(ring.field().one(), 40)).unwrap(), 0.0);
    }

    #[test]
    fn residue_filter_exhaustive() {
        let s = vec![3, 77, 400, 624];
        let m = Model::new(params(s.clone(), 4, 1, 7, 0)).unwrap();
        let pk = m.packed().clone();
        for x in 0..5u64.pow(8) {
            let r = pk.residue(x, 4);
            let d = pk.deg(x).as_i64_or(-1);
            let want = s.contains(&r) && d > 1 && d <= 7;
            assert_eq!(m.prob_code(x) > 0.0, want, "x={x}");
            assert_eq!(m.is_admissible(x), want);
        }
    }

    #[test]
    fn validation() {
        assert!(Model::new(params(vec![1], 2, 3, 3, 0)).is_err());
        assert!(Model::new(params(vec![25], 2, 0, 3, 0)).is_err());
        let mut p = params(vec![1], 2, 0, 3, 0);
        p.gamma = Rational::new(1, 1);
        assert!(Model::new(p).is_err());
        let mut p = params(vec![1], 2, 0, 3, 0);
        p.p = 4;
        assert_eq!(Model::new(p).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(
            Model::new(params(vec![1], 2, 0, 14, 0)),
            Err(Error::WindowTooLarge(..))
        ));
    }

    #[test]
    fn expected_size_single_term() {
        let m = Model::new(params(vec![7], 4, 4, 5, 0)).unwrap();
        let want = 4.0 * 5.0 * 5f64.powf(-35.0 / 11.0);
        assert!((m.expected_size() - want).abs() < 1e-15);
        assert!((m.expected_size_direct() - want).abs() < 1e-15);
    }

    #[test]
    fn expected_size_closed_vs_direct() {
        for (s, n, mm, d) in [
            (vec![1, 2, 3, 30, 124], 3, 0, 7),
            ((0..625).collect(), 4, 2, 8),
            (vec![0, 5], 2, 0, 9),
        ] {
            let m = Model::new(params(s, n, mm, d, 0)).unwrap();
            let (a, b) = (m.expected_size(), m.expected_size_direct());
            assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
            assert_eq!(m.admissible().len() as u128, m.admissible_count());
        }
    }

    #[test]
    fn sample_is_deterministic_and_admissible() {
        let m = Model::new(params((0..25).collect(), 2, 1, 7, 42)).unwrap();
        let a = m.sample();
        assert_eq!(a, m.sample());
        assert!(a.members.iter().all(|&x| m.is_admissible(x)));
        assert_ne!(a.members, m.sample_with_seed(43).members);
        for &x in m.admissible().iter().step_by(97) {
            assert_eq!(a.members.binary_search(&x).is_ok(), m.includes(42, x));
        }
    }

    #[test]
    fn sample_thread_independent() {
        let m = Model::new(params((0..25).collect(), 2, 1, 8, 9)).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        assert_eq!(one.install(|| m.sample()), four.install(|| m.sample()));
    }

    #[test]
    fn raising_m_gives_subset() {
        let lo = Model::new(params((0..25).collect(), 2, 1, 7, 5)).unwrap().sample();
        let hi = Model::new(params((0..25).collect(), 2, 3, 7, 5)).unwrap().sample();
        assert!(hi.members.iter().all(|x| lo.members.binary_search(x).is_ok()));
        assert!(hi.members.len() < lo.members.len());
    }

    #[test]
    fn empty_s_gives_empty_sample() {
        let m = Model::new(params(vec![], 2, 0, 6, 1)).unwrap();
        assert!(m.sample().is_empty());
        assert_eq!(m.expected_size(), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let m = Model::new(params(vec![1, 2], 2, 0, 5, 3)).unwrap();
        let mut p = m.params().clone();
        p.epsilon = Some(Rational::new(1, 3));
        let sample = OmegaSample {
            params: p,
            members: m.sample().members,
        };
        let js = serde_json::to_string(&sample).unwrap();
        assert!(js.contains("\"gamma\":\"7/11\"") && js.contains("\"epsilon\":\"1/3\""));
        let back: OmegaSample = serde_json::from_str(&js).unwrap();
        assert_eq!(back, sample);
    }
}
