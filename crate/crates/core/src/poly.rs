//! Arithmetic in F_q[X] and in the cyclic ring F_q[X]/(X^n − 1).
//!
//! [`Poly`] is a plain polynomial (used for gcds and CRT), [`CycPoly`] is the image
//! f_v = v_0 + v_1 X + … + v_{n−1} X^{n−1} of a [`CycVec`].

use std::fmt;

use crate::covering::{self, Budget};
use crate::error::{Error, Result};
use crate::gf::{add_mod, inv_mod, is_prime_u64, mul_mod, sub_mod, Ambient, Basis, CycVec};

/// A polynomial over F_q with coefficients in ascending degree; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    q: u8,
    coeffs: Vec<u8>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "X".to_string(),
                (1, c) => format!("{c}X"),
                (i, 1) => format!("X^{i}"),
                (i, c) => format!("{c}X^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Poly {
    pub fn new(q: u8, coeffs: &[u64]) -> Self {
        let mut p = Poly {
            q,
            coeffs: coeffs.iter().map(|&c| (c % q as u64) as u8).collect(),
        };
        p.trim();
        p
    }

    pub fn zero(q: u8) -> Self {
        Poly { q, coeffs: Vec::new() }
    }

    pub fn one(q: u8) -> Self {
        Poly { q, coeffs: vec![1] }
    }

    /// c · X^k
    pub fn monomial(q: u8, k: usize, c: u64) -> Self {
        let mut coeffs = vec![0u64; k + 1];
        coeffs[k] = c;
        Poly::new(q, &coeffs)
    }

    /// X^n − 1
    pub fn cyclic_modulus(q: u8, n: usize) -> Self {
        Poly::monomial(q, n, 1).sub(&Poly::one(q))
    }

    /// 1 + X + … + X^{n−1}
    pub fn all_ones(q: u8, n: usize) -> Self {
        Poly::new(q, &vec![1; n])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u8 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u8 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn eval(&self, x: u64) -> u8 {
        let q = self.q as u64;
        let x = x % q;
        self.coeffs.iter().rev().fold(0u64, |acc, &c| (acc * x + c as u64) % q) as u8
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut p = Poly {
            q: self.q,
            coeffs: (0..len).map(|i| add_mod(self.coeff(i), other.coeff(i), self.q)).collect(),
        };
        p.trim();
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut p = Poly {
            q: self.q,
            coeffs: (0..len).map(|i| sub_mod(self.coeff(i), other.coeff(i), self.q)).collect(),
        };
        p.trim();
        p
    }

    pub fn scale(&self, c: u8) -> Poly {
        let mut p = Poly {
            q: self.q,
            coeffs: self.coeffs.iter().map(|&x| mul_mod(x, c % self.q, self.q)).collect(),
        };
        p.trim();
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.q);
        }
        let q = self.q as u32;
        let mut acc = vec![0u32; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u32 * b as u32) % q;
            }
        }
        let mut p = Poly {
            q: self.q,
            coeffs: acc.into_iter().map(|c| c as u8).collect(),
        };
        p.trim();
        p
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let inv_lead = inv_mod(divisor.leading(), self.q);
        let mut rem = self.coeffs.clone();
        let mut quo = vec![0u8; rem.len().saturating_sub(dd).max(1)];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if c == 0 {
                continue;
            }
            let factor = mul_mod(c, inv_lead, self.q);
            quo[i - dd] = factor;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] = sub_mod(rem[i - dd + j], mul_mod(factor, d, self.q), self.q);
            }
        }
        let mut quo = Poly { q: self.q, coeffs: quo };
        let mut rem = Poly { q: self.q, coeffs: rem };
        quo.trim();
        rem.trim();
        (quo, rem)
    }

    pub fn rem(&self, divisor: &Poly) -> Poly {
        self.divrem(divisor).1
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.leading(), self.q))
    }

    /// Inverse of `self` modulo `m`, if it exists.
    pub fn inverse_mod(&self, m: &Poly) -> Option<Poly> {
        let (d, s, _) = ext_gcd(&self.rem(m), m).ok()?;
        (d == Poly::one(self.q)).then(|| s.rem(m))
    }
}

/// Extended Euclid over F_q[X]: returns (d, s, t) with s·f + t·g = d and d monic.
pub fn ext_gcd(f: &Poly, g: &Poly) -> Result<(Poly, Poly, Poly)> {
    if f.q != g.q {
        return Err(Error::Precondition("polynomials over different fields".into()));
    }
    let q = f.q;
    if f.is_zero() && g.is_zero() {
        return Err(Error::Precondition("ext_gcd of two zero polynomials".into()));
    }
    let (mut r0, mut r1) = (f.clone(), g.clone());
    let (mut s0, mut s1) = (Poly::one(q), Poly::zero(q));
    let (mut t0, mut t1) = (Poly::zero(q), Poly::one(q));
    while !r1.is_zero() {
        let (quo, rem) = r0.divrem(&r1);
        let s2 = s0.sub(&quo.mul(&s1));
        let t2 = t0.sub(&quo.mul(&t1));
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let inv = inv_mod(r0.leading(), q);
    Ok((r0.scale(inv), s0.scale(inv), t0.scale(inv)))
}

/// Element of F_q[X]/(X^n − 1).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycPoly(CycVec);

impl fmt::Debug for CycPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycPoly({:?})", self.to_plain())
    }
}

impl CycPoly {
    pub fn from_vec(v: &CycVec) -> Self {
        CycPoly(v.clone())
    }

    pub fn parse(ambient: Ambient, literal: &str) -> Result<Self> {
        Ok(CycPoly(CycVec::parse(ambient, literal)?))
    }

    /// Reduce a plain polynomial modulo X^n − 1.
    pub fn from_plain(ambient: Ambient, p: &Poly) -> Result<Self> {
        if p.q != ambient.q() {
            return Err(Error::Precondition("polynomial field differs from ambient".into()));
        }
        let n = ambient.n();
        let q = ambient.q();
        let mut digits = vec![0u8; n];
        for (i, &c) in p.coeffs.iter().enumerate() {
            digits[i % n] = add_mod(digits[i % n], c, q);
        }
        Ok(CycPoly(CycVec::from_digits(ambient, &digits)?))
    }

    pub fn one(ambient: Ambient) -> Self {
        CycPoly(CycVec::unit(ambient, 0))
    }

    /// X^k
    pub fn x_pow(ambient: Ambient, k: i64) -> Self {
        CycPoly(CycVec::unit(ambient, k))
    }

    pub fn ambient(&self) -> Ambient {
        self.0.ambient()
    }

    pub fn to_vec(&self) -> CycVec {
        self.0.clone()
    }

    pub fn as_vec(&self) -> &CycVec {
        &self.0
    }

    pub fn coeff(&self, i: i64) -> u8 {
        self.0.get(i)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_plain(&self) -> Poly {
        Poly::new(self.0.q(), &self.0.digits().iter().map(|&d| d as u64).collect::<Vec<_>>())
    }

    pub fn add(&self, other: &CycPoly) -> Result<CycPoly> {
        Ok(CycPoly(self.0.add(&other.0)?))
    }

    /// Cyclic convolution of the coefficient arrays.
    pub fn mul_mod(&self, other: &CycPoly) -> Result<CycPoly> {
        let ambient = self.ambient();
        ambient.ensure_same(&other.ambient())?;
        let n = ambient.n();
        if let (Some(a), Some(b)) = (self.0.word(), other.0.word()) {
            let prod = crate::bits::cyclic_mul(a, b, n as u32);
            return Ok(CycPoly(CycVec::from_word(ambient, prod)?));
        }
        let q = ambient.q() as u32;
        let a = self.0.digits();
        let b = other.0.digits();
        let mut acc = vec![0u32; n];
        for (i, &x) in a.iter().enumerate().filter(|(_, &x)| x != 0) {
            for (j, &y) in b.iter().enumerate().filter(|(_, &y)| y != 0) {
                let k = (i + j) % n;
                acc[k] = (acc[k] + x as u32 * y as u32) % q;
            }
        }
        let digits: Vec<u8> = acc.into_iter().map(|c| c as u8).collect();
        Ok(CycPoly(CycVec::from_digits(ambient, &digits)?))
    }

    /// f(1) in F_q.
    pub fn eval_at_one(&self) -> u8 {
        self.0.weight_sum()
    }
}

/// True iff gcd(f, X^n − 1) = 1, i.e. f is invertible in the cyclic ring.
pub fn is_unit(f: &CycPoly) -> bool {
    if f.is_zero() {
        return false;
    }
    let ambient = f.ambient();
    let modulus = Poly::cyclic_modulus(ambient.q(), ambient.n());
    match ext_gcd(&f.to_plain(), &modulus) {
        Ok((d, _, _)) => d == Poly::one(ambient.q()),
        Err(_) => false,
    }
}

/// Inverse in F_q[X]/(X^n − 1) when `f` is a unit.
pub fn inverse(f: &CycPoly) -> Option<CycPoly> {
    let ambient = f.ambient();
    let modulus = Poly::cyclic_modulus(ambient.q(), ambient.n());
    let inv = f.to_plain().inverse_mod(&modulus)?;
    CycPoly::from_plain(ambient, &inv).ok()
}

/// The exponent 2^b of the largest power of two dividing n.
pub fn two_adic_part(n: usize) -> usize {
    1 << n.trailing_zeros()
}

/// Whether (1 + X)^{2^b} divides f_v, with 2^b ∥ n. Reduces f_v modulo 1 + X^{2^b}.
pub fn works_closed_form(v: &CycVec) -> Result<bool> {
    v.ambient().ensure_binary()?;
    let r = two_adic_part(v.n());
    // (1 + X)^{2^b} = 1 + X^{2^b} over F_2
    let modulus = Poly::new(2, &{
        let mut c = vec![0u64; r + 1];
        c[0] = 1;
        c[r] = 1;
        c
    });
    Ok(CycPoly::from_vec(v).to_plain().rem(&modulus).is_zero())
}

/// Multiplicative order data for q modulo an odd prime p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModulusFactors {
    pub q: u64,
    pub p: u64,
    /// least e > 0 with q^e ≡ 1 (mod p)
    pub ord: u64,
    /// number of irreducible factors of 1 + X + … + X^{p−1} over F_q
    pub t: u64,
    pub irreducible: bool,
}

pub fn order_mod(q: u64, p: u64) -> Result<ModulusFactors> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if q % p == 0 {
        return Err(Error::Precondition(format!("{p} divides {q}")));
    }
    let base = q % p;
    let mut acc = base;
    let mut ord = 1;
    while acc != 1 {
        acc = acc * base % p;
        ord += 1;
    }
    Ok(ModulusFactors {
        q,
        p,
        ord,
        t: (p - 1) / ord,
        irreducible: ord == p - 1,
    })
}

/// Bézout coefficients (s, t) with s·a + t·b = 1 for coprime a, b.
fn coprime_bezout(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let (d, s, t) = ext_gcd(a, b).expect("nonzero inputs");
    assert_eq!(d, Poly::one(a.q), "factors must be coprime");
    (s, t)
}

/// Multiply every vector by the unit that sends f_{v^(1)} to ê.
///
/// The unit u is built by CRT: u ≡ 1 mod (1 + X) and u ≡ f_{v^(1)}^{-1} mod
/// 1 + X + … + X^{p−1}. Requires q = 2, n = p prime with 2 primitive mod p, and rows that
/// are nonzero, independent and work together. The output keeps the input order, so its
/// first vector is ê; postconditions are re-verified before returning.
pub fn normalize_to_e(rows: &[CycVec], p: usize, budget: Budget) -> Result<Vec<CycVec>> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Precondition("empty tuple".into()))?;
    let ambient = first.ambient();
    ambient.ensure_binary()?;
    if ambient.n() != p {
        return Err(Error::Precondition(format!("vectors have length {}, expected p = {p}", ambient.n())));
    }
    let factors = order_mod(2, p as u64)?;
    if !factors.irreducible {
        return Err(Error::Precondition(format!("2 is not a primitive root mod {p}")));
    }
    if rows.iter().any(|r| r.is_zero()) {
        return Err(Error::Precondition("zero row".into()));
    }
    let basis = Basis::from_rows(ambient, rows)?;
    if !covering::works_together(&basis, budget)?.covers {
        return Err(Error::Precondition("vectors do not work together".into()));
    }

    let phi = Poly::all_ones(2, p);
    let lin = Poly::new(2, &[1, 1]);
    let f1 = CycPoly::from_vec(first).to_plain();
    let inv = f1
        .inverse_mod(&phi)
        .ok_or_else(|| Error::Precondition("f_{v^(1)} is not invertible modulo Φ".into()))?;
    let (s, t) = coprime_bezout(&lin, &phi);
    // s(1+X) ≡ 1 mod Φ and ≡ 0 mod (1+X); tΦ is the opposite idempotent
    let unit = t.mul(&phi).add(&inv.mul(&s).mul(&lin));
    let unit = CycPoly::from_plain(ambient, &unit)?;
    debug_assert!(is_unit(&unit));

    let out = rows
        .iter()
        .map(|r| Ok(unit.mul_mod(&CycPoly::from_vec(r))?.to_vec()))
        .collect::<Result<Vec<_>>>()?;

    if out[0] != CycVec::e_hat(ambient) {
        return Err(Error::Precondition("normalization did not produce ê".into()));
    }
    let normalized = Basis::from_rows(ambient, &out)?;
    if !covering::works_together(&normalized, budget)?.covers {
        return Err(Error::Precondition("normalized vectors no longer work together".into()));
    }
    Ok(out)
}

/// For q odd, n = p prime > q with q primitive mod p and v ≠ 0: returns x such that
/// f_v · f_x has no zero coefficient, which shows v does not work (the vector
/// `x.reverse()` has no shift orthogonal to v).
pub fn failure_certificate(v: &CycVec, p: usize) -> Result<CycVec> {
    let ambient = v.ambient();
    let q = ambient.q();
    if q == 2 {
        return Err(Error::Precondition("q must be an odd prime".into()));
    }
    if ambient.n() != p || (p as u64) <= q as u64 || !is_prime_u64(p as u64) {
        return Err(Error::Precondition(format!("need n = p prime > q, got n = {}, p = {p}", ambient.n())));
    }
    if !order_mod(q as u64, p as u64)?.irreducible {
        return Err(Error::Precondition(format!("{q} is not a primitive root mod {p}")));
    }
    if v.is_zero() {
        return Err(Error::Precondition("v = 0 works trivially".into()));
    }

    let f = CycPoly::from_vec(v).to_plain();
    let phi = Poly::all_ones(q, p);
    let lin = Poly::new(q, &[q as u64 - 1, 1]); // X − 1
    let a = f.eval(1);
    let target = if a != 0 {
        phi.clone()
    } else {
        // (X − 1)(X^{p−2} + X^{p−4} + … + X − 1)
        let mut c = vec![0u64; p - 1];
        c[0] = q as u64 - 1;
        for k in (1..p - 1).step_by(2) {
            c[k] = 1;
        }
        lin.mul(&Poly::new(q, &c))
    };

    // g ≡ target/f modulo each coprime factor, glued by CRT
    let g_lin = if a != 0 {
        Poly::new(q, &[mul_mod(target.eval(1), inv_mod(a, q), q) as u64])
    } else {
        Poly::zero(q)
    };
    let f_phi = f.rem(&phi);
    let g_phi = match f_phi.inverse_mod(&phi) {
        Some(inv) => target.mul(&inv).rem(&phi),
        None => Poly::zero(q),
    };
    let (s, t) = coprime_bezout(&lin, &phi);
    let g = g_lin.mul(&t).mul(&phi).add(&g_phi.mul(&s).mul(&lin));
    let x = CycPoly::from_plain(ambient, &g)?;

    let product = CycPoly::from_vec(v).mul_mod(&x)?;
    let expected = CycPoly::from_plain(ambient, &target)?;
    if product != expected || (0..p as i64).any(|k| product.coeff(k) == 0) {
        return Err(Error::Precondition("certificate construction failed".into()));
    }
    Ok(x.to_vec())
}

/// Σ_{x ∈ F_p} x^r mod p, with 0^0 = 1.
pub fn power_sum(p: u64, r: u64) -> u64 {
    (0..p)
        .map(|x| {
            let mut acc = 1u64;
            for _ in 0..r {
                acc = acc * x % p;
            }
            acc
        })
        .sum::<u64>()
        % p
}

/// Σ_{x ∈ F_p} f(x) for a polynomial with coefficients in F_p.
pub fn field_sum(f: &Poly) -> u8 {
    let q = f.q() as u64;
    ((0..q).map(|x| f.eval(x) as u64).sum::<u64>() % q) as u8
}
