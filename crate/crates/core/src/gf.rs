//! Arithmetic in `F_p` and `F_{p^h}`.
//!
//! An element of `F_{p^h}` is stored as its index in the canonical enumeration:
//! the coordinates `c_0..c_{h-1}` in the basis `{1, u, .., u^{h-1}}` read as a
//! base-`p` number with `c_0` least significant. Index 0 is zero, index 1 is one,
//! and for `h = 1` the index is the residue itself.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fields up to this order get precomputed addition and multiplication tables.
const TABLE_LIMIT: u64 = 1024;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Element of a finite field, identified by its canonical index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
}

/// The field `F_{p^h}` with a fixed irreducible modulus.
#[derive(Clone)]
pub struct FieldCtx {
    p: u64,
    h: u32,
    q: u64,
    /// Monic, low degree first, length `h + 1`.
    modulus: Vec<u64>,
    tables: Option<Arc<Tables>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("h", &self.h)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.h == other.h && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl FieldCtx {
    /// Builds `F_{p^h}` using the smallest monic irreducible of degree `h`, where
    /// candidates are ordered by their coefficient vector read as a base-`p`
    /// number with the constant term least significant.
    pub fn new(p: u64, h: u32) -> Result<Self> {
        if !is_prime(p) || p >= 1 << 31 {
            return Err(Error::NotPrime(p));
        }
        if h < 1 {
            return Err(Error::BadDegree(h));
        }
        let q = p
            .checked_pow(h)
            .filter(|&q| q <= u32::MAX as u64)
            .ok_or(Error::FieldTooLarge(u64::MAX))?;
        let modulus = smallest_irreducible(p, h as usize);
        let mut ctx = FieldCtx {
            p,
            h,
            q,
            modulus,
            tables: None,
        };
        if q <= TABLE_LIMIT {
            ctx.tables = Some(Arc::new(ctx.build_tables()));
        }
        Ok(ctx)
    }

    fn build_tables(&self) -> Tables {
        let q = self.q as usize;
        let mut add = vec![0u32; q * q];
        let mut mul = vec![0u32; q * q];
        for a in 0..q {
            for b in 0..q {
                let (ea, eb) = (FieldElem(a as u32), FieldElem(b as u32));
                add[a * q + b] = self.add_slow(ea, eb).0;
                mul[a * q + b] = self.mul_slow(ea, eb).0;
            }
        }
        Tables { add, mul }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(0)
    }

    pub fn one(&self) -> FieldElem {
        FieldElem(1)
    }

    pub fn elem(&self, index: u64) -> Result<FieldElem> {
        if index >= self.q {
            return Err(Error::Invalid(format!(
                "index {index} out of range for field of order {}",
                self.q
            )));
        }
        Ok(FieldElem(index as u32))
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn coords(&self, a: FieldElem) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.h as usize);
        let mut x = a.0 as u64;
        for _ in 0..self.h {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    pub fn from_coords(&self, coords: &[u64]) -> Result<FieldElem> {
        if coords.len() != self.h as usize {
            return Err(Error::Invalid(format!(
                "expected {} coordinates, got {}",
                self.h,
                coords.len()
            )));
        }
        let mut idx = 0u64;
        for &c in coords.iter().rev() {
            if c >= self.p {
                return Err(Error::Invalid(format!("coordinate {c} not reduced mod {}", self.p)));
            }
            idx = idx * self.p + c;
        }
        Ok(FieldElem(idx as u32))
    }

    /// All `q` elements in canonical order.
    pub fn elements(&self) -> Vec<FieldElem> {
        (0..self.q as u32).map(FieldElem).collect()
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        match &self.tables {
            Some(t) => FieldElem(t.add[a.0 as usize * self.q as usize + b.0 as usize]),
            None => self.add_slow(a, b),
        }
    }

    fn add_slow(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let (mut x, mut y) = (a.0 as u64, b.0 as u64);
        let (mut out, mut pw) = (0u64, 1u64);
        for _ in 0..self.h {
            out += ((x % self.p + y % self.p) % self.p) * pw;
            x /= self.p;
            y /= self.p;
            pw *= self.p;
        }
        FieldElem(out as u32)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let mut x = a.0 as u64;
        let (mut out, mut pw) = (0u64, 1u64);
        for _ in 0..self.h {
            out += ((self.p - x % self.p) % self.p) * pw;
            x /= self.p;
            pw *= self.p;
        }
        FieldElem(out as u32)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        match &self.tables {
            Some(t) => FieldElem(t.mul[a.0 as usize * self.q as usize + b.0 as usize]),
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let p = self.p;
        let prod = poly_mul(p, &self.coords(a), &self.coords(b));
        let mut r = poly_rem(p, &prod, &self.modulus);
        r.resize(self.h as usize, 0);
        self.from_coords(&r).expect("reduced product has h coordinates")
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn format_elem(&self, a: FieldElem) -> String {
        if self.h == 1 {
            a.0.to_string()
        } else {
            let cs: Vec<String> = self.coords(a).iter().map(|c| c.to_string()).collect();
            format!("[{}]", cs.join(","))
        }
    }

    /// Parses `"3"` (reduced mod p, allowed for any h) or `"[c0,..,c_{h-1}]"`.
    pub fn parse_elem(&self, s: &str) -> Result<FieldElem> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let coords = inner
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<u64>()
                        .map_err(|e| Error::Parse(format!("bad coordinate {c:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            self.from_coords(&coords)
        } else {
            let n: i64 = s
                .parse()
                .map_err(|e| Error::Parse(format!("bad field element {s:?}: {e}")))?;
            Ok(self.from_int(n))
        }
    }
}

// Dense polynomials over F_p, low degree first. Used only to find and apply the modulus.

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(&mut out);
    out
}

fn inv_mod(p: u64, a: u64) -> u64 {
    let mut acc = 1u64;
    let (mut base, mut e) = (a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

fn poly_rem(p: u64, a: &[u64], m: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut m = m.to_vec();
    trim(&mut m);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(p, m[dm]);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p;
        for (i, &mi) in m.iter().enumerate() {
            let k = top - dm + i;
            r[k] = (r[k] + p - c * mi % p) % p;
        }
        trim(&mut r);
    }
    trim(&mut r);
    r
}

fn poly_gcd(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(p, &x, &y);
        x = y;
        y = r;
    }
    x
}

fn poly_powmod(p: u64, base: &[u64], mut e: u64, m: &[u64]) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(p, base, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(p, &poly_mul(p, &acc, &b), m);
        }
        b = poly_rem(p, &poly_mul(p, &b, &b), m);
        e >>= 1;
    }
    acc
}

/// Irreducibility of a monic polynomial over `F_p` (coefficients low degree first).
///
/// Uses the gcd test: `f` of degree `d` is irreducible iff
/// `gcd(f, t^{p^i} - t) = 1` for every `1 <= i <= d/2`.
pub fn is_irreducible(p: u64, f: &[u64]) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut f: Vec<u64> = f.iter().map(|c| c % p).collect();
    trim(&mut f);
    if f.last() != Some(&1) {
        return Err(Error::NotMonic);
    }
    let d = f.len() - 1;
    if d == 0 {
        return Err(Error::Invalid("constant polynomial".into()));
    }
    if d == 1 {
        return Ok(true);
    }
    let t = vec![0u64, 1];
    let mut frob = t.clone();
    for _ in 1..=d / 2 {
        frob = poly_powmod(p, &frob, p, &f);
        let mut diff = frob.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        trim(&mut diff);
        let g = poly_gcd(p, &f, &diff);
        if g.len() > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn smallest_irreducible(p: u64, h: usize) -> Vec<u64> {
    let count = p.pow(h as u32);
    for k in 0..count {
        let mut f = Vec::with_capacity(h + 1);
        let mut x = k;
        for _ in 0..h {
            f.push(x % p);
            x /= p;
        }
        f.push(1);
        if is_irreducible(p, &f).expect("candidate is monic over a prime field") {
            return f;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}
