//! The ring `F_q[t]`.
//!
//! Two representations live here. [`Poly`] is the ordinary coefficient vector.
//! Enumeration-heavy code instead works on canonical integer codes: the
//! coefficients' field indices read as base-`q` digits, constant term least
//! significant. Because field indices are themselves base-`p` numbers, a code is
//! a base-`p` digit vector and addition is digitwise mod `p`. Ordering codes
//! numerically orders polynomials by degree first, which is the canonical total
//! order used throughout the crate.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FieldElem};

/// Degree of a polynomial; the zero polynomial has degree [`Degree::NEG_INF`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Degree(Option<u32>);

impl Degree {
    pub const NEG_INF: Degree = Degree(None);

    pub fn new(d: u32) -> Self {
        Degree(Some(d))
    }

    pub fn get(self) -> Option<u32> {
        self.0
    }

    pub fn is_neg_inf(self) -> bool {
        self.0.is_none()
    }

    /// Degree as a signed value with `-1` standing in for `-inf`; only for
    /// comparisons against window bounds such as `deg x > M` with `M >= -1`.
    pub fn as_i64_or(self, neg_inf: i64) -> i64 {
        self.0.map_or(neg_inf, i64::from)
    }
}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Degree {
    fn cmp(&self, other: &Self) -> Ordering {
        // None < Some(_) matches -inf < every finite degree
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("-inf"),
        }
    }
}

/// `q^{mu * deg}`, with `q^{mu * deg 0} = 0`.
pub fn q_pow_deg(q: f64, mu: f64, d: Degree) -> f64 {
    match d.get() {
        Some(d) => (mu * d as f64 * q.ln()).exp(),
        None => 0.0,
    }
}

/// Index of a polynomial of `G_N` under the canonical encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GnIndex(pub u64);

/// Identifies the coefficient field of a [`Poly`]; the modulus is a function of `(p, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldTag {
    pub p: u64,
    pub h: u32,
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.h)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    tag: FieldTag,
    /// Low degree first, no trailing zeros.
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn zero(tag: FieldTag) -> Self {
        Poly { tag, coeffs: Vec::new() }
    }

    pub fn from_coeffs(tag: FieldTag, mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { tag, coeffs }
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::NEG_INF,
            n => Degree::new(n as u32 - 1),
        }
    }

    pub fn lead(&self) -> Result<FieldElem> {
        self.coeffs.last().copied().ok_or(Error::ZeroLead)
    }
}

struct PackedInner {
    p: u64,
    h: u32,
    q: u64,
    /// `q^i` for every `i` with `q^i <= u64::MAX`.
    q_pows: Vec<u64>,
    /// Digitwise add/sub tables on chunks of `chunk_digits` base-p digits.
    chunk_base: u64,
    add: Vec<u16>,
    sub: Vec<u16>,
}

/// Additive arithmetic on canonical polynomial codes.
#[derive(Clone)]
pub struct PackedRing(Arc<PackedInner>);

impl fmt::Debug for PackedRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PackedRing(p={}, h={})", self.0.p, self.0.h)
    }
}

impl PartialEq for PackedRing {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.h == other.0.h
    }
}

impl PackedRing {
    pub fn new(p: u64, h: u32) -> Self {
        let q = p.pow(h);
        let mut q_pows = vec![1u64];
        while let Some(next) = q_pows.last().unwrap().checked_mul(q) {
            q_pows.push(next);
        }
        let mut chunk_base = p;
        while chunk_base * p <= 512 {
            chunk_base *= p;
        }
        let cb = chunk_base as usize;
        let mut add = vec![0u16; cb * cb];
        let mut sub = vec![0u16; cb * cb];
        for a in 0..chunk_base {
            for b in 0..chunk_base {
                add[(a * chunk_base + b) as usize] = digitwise(p, a, b, |x, y| (x + y) % p) as u16;
                sub[(a * chunk_base + b) as usize] = digitwise(p, a, b, |x, y| (x + p - y) % p) as u16;
            }
        }
        PackedRing(Arc::new(PackedInner {
            p,
            h,
            q,
            q_pows,
            chunk_base,
            add,
            sub,
        }))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn h(&self) -> u32 {
        self.0.h
    }

    pub fn q(&self) -> u64 {
        self.0.q
    }

    /// `q^n`, or `None` on overflow.
    pub fn q_pow(&self, n: u32) -> Option<u64> {
        self.0.q_pows.get(n as usize).copied()
    }

    #[inline]
    fn chunked(&self, mut a: u64, mut b: u64, table: &[u16]) -> u64 {
        let base = self.0.chunk_base;
        let (mut out, mut pw) = (0u64, 1u64);
        while a != 0 || b != 0 {
            let v = table[((a % base) * base + b % base) as usize] as u64;
            out += v * pw;
            a /= base;
            b /= base;
            pw = pw.wrapping_mul(base);
        }
        out
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        self.chunked(a, b, &self.0.add)
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.chunked(a, b, &self.0.sub)
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    #[inline]
    pub fn deg(&self, a: u64) -> Degree {
        if a == 0 {
            return Degree::NEG_INF;
        }
        // largest d with q^d <= a
        let pows = &self.0.q_pows;
        let d = pows.partition_point(|&pw| pw <= a) - 1;
        Degree::new(d as u32)
    }

    /// `deg(a - b)`: the position of the highest differing base-`q` digit.
    #[inline]
    pub fn deg_diff(&self, a: u64, b: u64) -> Degree {
        if a == b {
            return Degree::NEG_INF;
        }
        let pows = &self.0.q_pows;
        // first k with a div q^k == b div q^k; pows past the end behave as infinity
        let (mut lo, mut hi) = (1usize, pows.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if a / pows[mid] == b / pows[mid] {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Degree::new(lo as u32 - 1)
    }

    /// Residue modulo `t^n` (truncation to the low `n` coefficients).
    #[inline]
    pub fn residue(&self, a: u64, n: u32) -> u64 {
        match self.q_pow(n) {
            Some(m) => a % m,
            None => a,
        }
    }

    /// The quotient `a div t^n`.
    #[inline]
    pub fn shift_down(&self, a: u64, n: u32) -> u64 {
        match self.q_pow(n) {
            Some(m) => a / m,
            None => 0,
        }
    }

    /// Field index of the coefficient of `t^i`.
    pub fn coeff_index(&self, a: u64, i: u32) -> u64 {
        match self.q_pow(i) {
            Some(m) => a / m % self.0.q,
            None => 0,
        }
    }

    /// Codes of all polynomials of exact degree `d`: the range `[q^d, q^{d+1})`.
    pub fn degree_range(&self, d: u32) -> Option<std::ops::Range<u64>> {
        Some(self.q_pow(d)?..self.q_pow(d + 1)?)
    }
}

fn digitwise(p: u64, mut a: u64, mut b: u64, f: impl Fn(u64, u64) -> u64) -> u64 {
    let (mut out, mut pw) = (0u64, 1u64);
    while a != 0 || b != 0 {
        out += f(a % p, b % p) * pw;
        a /= p;
        b /= p;
        pw *= p;
    }
    out
}

/// `F_q[t]` over a fixed field, with conversions to and from codes.
#[derive(Clone, Debug)]
pub struct PolyRing {
    field: FieldCtx,
    packed: PackedRing,
}

impl PolyRing {
    pub fn new(field: FieldCtx) -> Self {
        let packed = PackedRing::new(field.p(), field.h());
        PolyRing { field, packed }
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn packed(&self) -> &PackedRing {
        &self.packed
    }

    pub fn tag(&self) -> FieldTag {
        FieldTag {
            p: self.field.p(),
            h: self.field.h(),
        }
    }

    pub fn q(&self) -> u64 {
        self.field.q()
    }

    fn check(&self, f: &Poly) -> Result<()> {
        if f.tag != self.tag() {
            return Err(Error::MixedFields(f.tag.to_string(), self.tag().to_string()));
        }
        Ok(())
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.tag())
    }

    pub fn constant(&self, c: FieldElem) -> Poly {
        Poly::from_coeffs(self.tag(), vec![c])
    }

    /// `c t^d`.
    pub fn monomial(&self, c: FieldElem, d: u32) -> Poly {
        let mut coeffs = vec![FieldElem::ZERO; d as usize];
        coeffs.push(c);
        Poly::from_coeffs(self.tag(), coeffs)
    }

    pub fn from_ints(&self, coeffs: &[i64]) -> Poly {
        Poly::from_coeffs(self.tag(), coeffs.iter().map(|&c| self.field.from_int(c)).collect())
    }

    fn zip(&self, a: &Poly, b: &Poly, op: impl Fn(FieldElem, FieldElem) -> FieldElem) -> Result<Poly> {
        self.check(a)?;
        self.check(b)?;
        let n = a.coeffs.len().max(b.coeffs.len());
        let coeffs = (0..n).map(|i| op(a.coeff(i), b.coeff(i))).collect();
        Ok(Poly::from_coeffs(self.tag(), coeffs))
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        self.zip(a, b, |x, y| self.field.add(x, y))
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        self.zip(a, b, |x, y| self.field.sub(x, y))
    }

    pub fn neg(&self, a: &Poly) -> Result<Poly> {
        self.check(a)?;
        Ok(Poly::from_coeffs(
            self.tag(),
            a.coeffs.iter().map(|&c| self.field.neg(c)).collect(),
        ))
    }

    pub fn scale(&self, c: FieldElem, a: &Poly) -> Result<Poly> {
        self.check(a)?;
        Ok(Poly::from_coeffs(
            self.tag(),
            a.coeffs.iter().map(|&x| self.field.mul(c, x)).collect(),
        ))
    }

    /// All `q^n` polynomials of degree `< n`, in code order.
    pub fn enumerate_g(&self, n: u32) -> Result<Vec<Poly>> {
        let size = self
            .packed
            .q_pow(n)
            .filter(|&s| s <= 1 << 26)
            .ok_or_else(|| Error::WindowTooLarge(u128::from(self.q()).pow(n), 1 << 26))?;
        (0..size).map(|i| self.decode(GnIndex(i), n)).collect()
    }

    pub fn encode(&self, f: &Poly, n: u32) -> Result<GnIndex> {
        self.check(f)?;
        if let Some(d) = f.deg().get() {
            if d >= n {
                return Err(Error::OutOfWindow { deg: d, n });
            }
        }
        self.code(f).map(GnIndex)
    }

    /// Canonical code of `f` without a window check.
    pub fn code(&self, f: &Poly) -> Result<u64> {
        let q = self.q();
        let mut v: u64 = 0;
        for c in f.coeffs.iter().rev() {
            v = v
                .checked_mul(q)
                .and_then(|v| v.checked_add(c.index() as u64))
                .ok_or_else(|| Error::Invalid("polynomial code overflows 64 bits".into()))?;
        }
        Ok(v)
    }

    pub fn decode(&self, i: GnIndex, n: u32) -> Result<Poly> {
        if let Some(limit) = self.packed.q_pow(n) {
            if i.0 >= limit {
                return Err(Error::Invalid(format!("index {} out of range for G_{n}", i.0)));
            }
        }
        Ok(self.from_code(i.0))
    }

    pub fn from_code(&self, mut v: u64) -> Poly {
        let q = self.q();
        let mut coeffs = Vec::new();
        while v > 0 {
            coeffs.push(FieldElem((v % q) as u32));
            v /= q;
        }
        Poly::from_coeffs(self.tag(), coeffs)
    }

    pub fn residue_mod_tn(&self, f: &Poly, n: u32) -> Poly {
        let k = (n as usize).min(f.coeffs.len());
        Poly::from_coeffs(f.tag, f.coeffs[..k].to_vec())
    }

    /// Number of polynomials of exact degree `d`: `q^{d+1} - q^d`.
    pub fn count_by_degree(&self, d: u32) -> u128 {
        let q = u128::from(self.q());
        (q - 1) * q.pow(d)
    }

    pub fn format(&self, f: &Poly) -> String {
        if f.is_zero() {
            return "0".into();
        }
        f.coeffs
            .iter()
            .map(|&c| self.field.format_elem(c))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses the dense form `"1,2,0,3"` or the sparse form `"3t^3+2t+1"`.
    pub fn parse(&self, s: &str) -> Result<Poly> {
        let s = s.trim();
        if s.contains('t') {
            self.parse_sparse(s)
        } else {
            let coeffs = split_top_level(s, ',')
                .into_iter()
                .map(|c| self.field.parse_elem(c))
                .collect::<Result<Vec<_>>>()?;
            Ok(Poly::from_coeffs(self.tag(), coeffs))
        }
    }

    fn parse_sparse(&self, s: &str) -> Result<Poly> {
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut negative = false;
        let mut depth = 0;
        for ch in s.chars().filter(|c| !c.is_whitespace()) {
            match ch {
                '[' => {
                    depth += 1;
                    cur.push(ch);
                }
                ']' => {
                    depth -= 1;
                    cur.push(ch);
                }
                '+' | '-' if depth == 0 && !cur.is_empty() => {
                    terms.push((negative, std::mem::take(&mut cur)));
                    negative = ch == '-';
                }
                '-' if depth == 0 => negative = !negative,
                '+' if depth == 0 => {}
                _ => cur.push(ch),
            }
        }
        if !cur.is_empty() {
            terms.push((negative, cur));
        }
        let mut acc = self.zero();
        for (neg, term) in terms {
            let (coef, power) = match term.find('t') {
                None => (term.as_str(), 0u32),
                Some(pos) => {
                    let coef = term[..pos].trim_end_matches('*');
                    let rest = &term[pos + 1..];
                    let power = match rest.strip_prefix('^') {
                        Some(e) => e
                            .parse::<u32>()
                            .map_err(|e| Error::Parse(format!("bad exponent in {term:?}: {e}")))?,
                        None if rest.is_empty() => 1,
                        None => return Err(Error::Parse(format!("bad term {term:?}"))),
                    };
                    (coef, power)
                }
            };
            let mut c = if coef.is_empty() {
                self.field.one()
            } else {
                self.field.parse_elem(coef)?
            };
            if neg {
                c = self.field.neg(c);
            }
            acc = self.add(&acc, &self.monomial(c, power))?;
        }
        Ok(acc)
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f5() -> PolyRing {
        PolyRing::new(FieldCtx::new(5, 1).unwrap())
    }

    #[test]
    fn additive_examples() {
        let r = f5();
        let a = r.from_ints(&[1, 2]);
        let b = r.from_ints(&[4, 3]);
        assert!(r.add(&a, &b).unwrap().is_zero());
        assert_eq!(r.sub(&a, &a).unwrap().deg(), Degree::NEG_INF);
        assert_eq!(
            r.scale(FieldElem(2), &r.from_ints(&[1, 1])).unwrap(),
            r.from_ints(&[2, 2])
        );
    }

    #[test]
    fn mixed_fields_rejected() {
        let r5 = f5();
        let r7 = PolyRing::new(FieldCtx::new(7, 1).unwrap());
        let e = r5.add(&r5.from_ints(&[1]), &r7.from_ints(&[1])).unwrap_err();
        assert!(matches!(e, Error::MixedFields(..)));
    }

    #[test]
    fn degree_and_lead() {
        let r = f5();
        let f = r.from_ints(&[1, 0, 3]);
        assert_eq!(f.deg(), Degree::new(2));
        assert_eq!(f.lead().unwrap(), FieldElem(3));
        assert_eq!(r.zero().deg(), Degree::NEG_INF);
        assert_eq!(r.zero().lead().unwrap_err(), Error::ZeroLead);
        assert_eq!(r.from_ints(&[4]).deg(), Degree::new(0));
        assert!(Degree::NEG_INF < Degree::new(0));
    }

    #[test]
    fn q_pow_deg_of_zero_is_zero() {
        assert_eq!(q_pow_deg(5.0, -0.5, Degree::NEG_INF), 0.0);
        assert_eq!(q_pow_deg(5.0, 1.0, Degree::NEG_INF), 0.0);
        assert!((q_pow_deg(5.0, -1.0, Degree::new(2)) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn enumerate_sizes() {
        let r = f5();
        assert_eq!(r.enumerate_g(2).unwrap().len(), 25);
        assert_eq!(r.enumerate_g(0).unwrap(), vec![r.zero()]);
        let r25 = PolyRing::new(FieldCtx::new(5, 2).unwrap());
        let g1 = r25.enumerate_g(1).unwrap();
        assert_eq!(g1.len(), 25);
        assert!(g1.iter().all(|f| f.deg() <= Degree::new(0)));
        assert!(g1[0].is_zero());
    }

    #[test]
    fn encode_examples() {
        let r = f5();
        assert_eq!(r.encode(&r.from_ints(&[1, 2]), 2).unwrap(), GnIndex(11));
        assert_eq!(r.encode(&r.zero(), 3).unwrap(), GnIndex(0));
        assert_eq!(r.decode(GnIndex(24), 2).unwrap(), r.from_ints(&[4, 4]));
        assert!(matches!(
            r.encode(&r.from_ints(&[0, 0, 1]), 2),
            Err(Error::OutOfWindow { deg: 2, n: 2 })
        ));
    }

    #[test]
    fn encode_decode_bijective_exhaustive() {
        let r = f5();
        for (i, f) in r.enumerate_g(6).unwrap().iter().enumerate() {
            assert_eq!(r.encode(f, 6).unwrap().0, i as u64);
        }
        let r49 = PolyRing::new(FieldCtx::new(7, 2).unwrap());
        for i in 0..49u64.pow(3) {
            let f = r49.decode(GnIndex(i), 3).unwrap();
            assert_eq!(r49.encode(&f, 3).unwrap(), GnIndex(i));
        }
    }

    #[test]
    fn residue_examples() {
        let r = f5();
        let f = r.from_ints(&[3, 1, 0, 2]);
        assert_eq!(r.residue_mod_tn(&f, 2), r.from_ints(&[3, 1]));
        let g = r.from_ints(&[1, 2]);
        assert_eq!(r.residue_mod_tn(&g, 3), g);
        assert!(r.residue_mod_tn(&r.monomial(FieldElem(1), 3), 3).is_zero());
    }

    #[test]
    fn count_by_degree_examples() {
        let r = f5();
        assert_eq!(r.count_by_degree(0), 4);
        assert_eq!(r.count_by_degree(3), 500);
        for d in 0..5 {
            let diff = r.enumerate_g(d + 1).unwrap().len() - r.enumerate_g(d).unwrap().len();
            assert_eq!(diff as u128, r.count_by_degree(d));
        }
        let n = 6;
        let total: u128 = (0..n).map(|d| r.count_by_degree(d)).sum::<u128>() + 1;
        assert_eq!(total, 5u128.pow(n));
    }

    #[test]
    fn degree_of_sum_exhaustive_g4() {
        let r = f5();
        let pk = r.packed();
        for a in 0..625u64 {
            for b in 0..625u64 {
                let (da, db) = (pk.deg(a), pk.deg(b));
                let ds = pk.deg(pk.add(a, b));
                assert!(ds <= da.max(db));
                if da != db {
                    assert_eq!(ds, da.max(db));
                }
            }
        }
    }

    #[test]
    fn packed_matches_poly_arithmetic() {
        for (p, h) in [(5, 1), (7, 1), (5, 2), (3, 2)] {
            let r = PolyRing::new(FieldCtx::new(p, h).unwrap());
            let pk = r.packed().clone();
            let top = pk.q_pow(3).unwrap();
            for a in (0..top).step_by(7) {
                for b in (0..top).step_by(13) {
                    let (fa, fb) = (r.from_code(a), r.from_code(b));
                    assert_eq!(pk.add(a, b), r.code(&r.add(&fa, &fb).unwrap()).unwrap());
                    assert_eq!(pk.sub(a, b), r.code(&r.sub(&fa, &fb).unwrap()).unwrap());
                    assert_eq!(pk.deg(a), fa.deg());
                    assert_eq!(pk.deg_diff(a, b), r.sub(&fa, &fb).unwrap().deg());
                }
            }
        }
    }

    #[test]
    fn text_formats() {
        let r = f5();
        let f = r.from_ints(&[1, 2, 0, 3]);
        assert_eq!(r.format(&f), "1,2,0,3");
        assert_eq!(r.parse("1,2,0,3").unwrap(), f);
        assert_eq!(r.parse("3t^3+2t+1").unwrap(), f);
        assert_eq!(r.parse("3*t^3 + 2t + 1").unwrap(), f);
        assert_eq!(r.parse("-t^2").unwrap(), r.from_ints(&[0, 0, 4]));
        assert_eq!(r.parse("t-1").unwrap(), r.from_ints(&[4, 1]));
        assert_eq!(r.parse("0").unwrap(), r.zero());
        let r25 = PolyRing::new(FieldCtx::new(5, 2).unwrap());
        let g = r25.parse("[1,2],0,[0,1]").unwrap();
        assert_eq!(g.deg(), Degree::new(2));
        assert_eq!(r25.format(&g), "[1,2],[0,0],[0,1]");
        assert_eq!(r25.parse("[0,1]t^2+[1,2]").unwrap(), g);
    }

    proptest! {
        #[test]
        fn residue_is_additive(a in 0u64..5u64.pow(8), b in 0u64..5u64.pow(8), n in 0u32..9) {
            let r = f5();
            let (fa, fb) = (r.from_code(a), r.from_code(b));
            let lhs = r.residue_mod_tn(&r.add(&fa, &fb).unwrap(), n);
            let rhs = r.add(&r.residue_mod_tn(&fa, n), &r.residue_mod_tn(&fb, n)).unwrap();
            prop_assert_eq!(&lhs, &rhs);
            prop_assert_eq!(r.code(&lhs).unwrap(), r.packed().residue(r.packed().add(a, b), n));
        }

        #[test]
        fn codes_order_by_degree(a in 0u64..5u64.pow(9), b in 0u64..5u64.pow(9)) {
            let pk = PackedRing::new(5, 1);
            if pk.deg(a) < pk.deg(b) {
                prop_assert!(a < b);
            }
        }
    }
}
