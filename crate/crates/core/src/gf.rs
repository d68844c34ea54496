//! Vectors over F_q^n with cyclic index semantics.
//!
//! Coordinates are indexed `0..n` and every index is read modulo `n`. Over F_2 the
//! coordinates are bit-packed (bit `i` of word `i / 64` is coordinate `i`), so shift and
//! dot reduce to word operations; for odd primes one byte per coordinate is used.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest prime modulus accepted by [`Ambient::new`].
pub const MAX_MODULUS: u8 = 251;

pub(crate) fn is_prime_u64(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub(crate) fn add_mod(a: u8, b: u8, q: u8) -> u8 {
    ((a as u16 + b as u16) % q as u16) as u8
}

#[inline]
pub(crate) fn sub_mod(a: u8, b: u8, q: u8) -> u8 {
    ((a as u16 + q as u16 - b as u16) % q as u16) as u8
}

#[inline]
pub(crate) fn mul_mod(a: u8, b: u8, q: u8) -> u8 {
    ((a as u16 * b as u16) % q as u16) as u8
}

/// Multiplicative inverse in F_q; `a` must be nonzero.
pub(crate) fn inv_mod(a: u8, q: u8) -> u8 {
    debug_assert!(a % q != 0);
    let mut result = 1u32;
    let mut base = a as u32 % q as u32;
    let mut e = q as u32 - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % q as u32;
        }
        base = base * base % q as u32;
        e >>= 1;
    }
    result as u8
}

pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The ambient space F_q^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ambient {
    q: u8,
    n: usize,
}

impl Ambient {
    pub fn new(q: u32, n: usize) -> Result<Self> {
        if q > MAX_MODULUS as u32 || !is_prime_u64(q as u64) {
            return Err(Error::InvalidModulus(q));
        }
        if n == 0 {
            return Err(Error::InvalidLength(n));
        }
        Ok(Ambient { q: q as u8, n })
    }

    /// Shorthand for `Ambient::new(2, n)`.
    pub fn binary(n: usize) -> Result<Self> {
        Self::new(2, n)
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_binary(&self) -> bool {
        self.q == 2
    }

    /// q^n as an exact integer, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        (self.q as u128).checked_pow(self.n as u32).unwrap_or(u128::MAX)
    }

    /// Reduce any integer index or shift amount into `0..n`.
    #[inline]
    pub fn index(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    fn words(&self) -> usize {
        self.n.div_ceil(64)
    }

    pub(crate) fn ensure_same(&self, other: &Ambient) -> Result<()> {
        if self != other {
            return Err(Error::AmbientMismatch {
                left: (self.q, self.n),
                right: (other.q, other.n),
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_binary(&self) -> Result<()> {
        if self.q != 2 {
            return Err(Error::RequiresBinary(self.q));
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Coords {
    Packed(Vec<u64>),
    Digits(Vec<u8>),
}

/// An element of F_q^n. Indices are always taken modulo n.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycVec {
    ambient: Ambient,
    coords: Coords,
}

impl CycVec {
    pub fn zero(ambient: Ambient) -> Self {
        let coords = if ambient.is_binary() {
            Coords::Packed(vec![0; ambient.words()])
        } else {
            Coords::Digits(vec![0; ambient.n])
        };
        CycVec { ambient, coords }
    }

    /// Build from residues; every entry must already lie in `[0, q)`.
    pub fn from_digits(ambient: Ambient, digits: &[u8]) -> Result<Self> {
        if digits.len() != ambient.n {
            return Err(Error::MalformedLiteral {
                literal: format!("{digits:?}"),
                reason: format!("expected {} coordinates, got {}", ambient.n, digits.len()),
            });
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= ambient.q) {
            return Err(Error::MalformedLiteral {
                literal: format!("{digits:?}"),
                reason: format!("coordinate {d} is not a residue mod {}", ambient.q),
            });
        }
        let mut v = CycVec::zero(ambient);
        for (i, &d) in digits.iter().enumerate() {
            v.set_raw(i, d);
        }
        Ok(v)
    }

    /// Binary vector from a packed word (bit i is coordinate i). Requires q = 2, n ≤ 64.
    pub fn from_word(ambient: Ambient, word: u64) -> Result<Self> {
        ambient.ensure_binary()?;
        if ambient.n > 64 {
            return Err(Error::Precondition(format!("n = {} does not fit in one word", ambient.n)));
        }
        let mask = word_mask(ambient.n);
        Ok(CycVec {
            ambient,
            coords: Coords::Packed(vec![word & mask]),
        })
    }

    /// Parse a coordinate string, index 0 first ("0110000"). Whitespace and commas are ignored.
    pub fn parse(ambient: Ambient, literal: &str) -> Result<Self> {
        let digits: Vec<u8> = literal
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| {
                c.to_digit(10).map(|d| d as u8).ok_or_else(|| Error::MalformedLiteral {
                    literal: literal.to_string(),
                    reason: format!("unexpected character {c:?}"),
                })
            })
            .collect::<Result<_>>()?;
        CycVec::from_digits(ambient, &digits).map_err(|e| match e {
            Error::MalformedLiteral { reason, .. } => Error::MalformedLiteral {
                literal: literal.to_string(),
                reason,
            },
            other => other,
        })
    }

    /// Parse a literal whose length determines n.
    pub fn parse_auto(q: u32, literal: &str) -> Result<Self> {
        let len = literal.chars().filter(|c| !c.is_whitespace() && *c != ',').count();
        let ambient = Ambient::new(q, len).map_err(|e| match e {
            Error::InvalidLength(_) => Error::MalformedLiteral {
                literal: literal.to_string(),
                reason: "empty literal".into(),
            },
            other => other,
        })?;
        CycVec::parse(ambient, literal)
    }

    /// Parse a literal with an optional "q:" prefix; q defaults to 2.
    pub fn from_tagged_literal(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((q, lit)) => {
                let q = q.trim().parse::<u32>().map_err(|_| Error::MalformedLiteral {
                    literal: s.to_string(),
                    reason: "bad field prefix".into(),
                })?;
                CycVec::parse_auto(q, lit)
            }
            None => CycVec::parse_auto(2, s),
        }
    }

    /// The standard basis vector e_i.
    pub fn unit(ambient: Ambient, i: i64) -> Self {
        let mut v = CycVec::zero(ambient);
        v.set(i, 1);
        v
    }

    pub fn ones(ambient: Ambient) -> Self {
        let mut v = CycVec::zero(ambient);
        for i in 0..ambient.n {
            v.set_raw(i, 1);
        }
        v
    }

    /// ê = (0, 1, 1, …, 1).
    pub fn e_hat(ambient: Ambient) -> Self {
        let mut v = CycVec::ones(ambient);
        v.set_raw(0, 0);
        v
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn n(&self) -> usize {
        self.ambient.n
    }

    pub fn q(&self) -> u8 {
        self.ambient.q
    }

    /// Packed form for binary vectors with n ≤ 64.
    pub fn word(&self) -> Option<u64> {
        match &self.coords {
            Coords::Packed(w) if w.len() == 1 => Some(w[0]),
            _ => None,
        }
    }

    #[inline]
    fn get_raw(&self, i: usize) -> u8 {
        match &self.coords {
            Coords::Packed(w) => ((w[i / 64] >> (i % 64)) & 1) as u8,
            Coords::Digits(d) => d[i],
        }
    }

    #[inline]
    fn set_raw(&mut self, i: usize, value: u8) {
        match &mut self.coords {
            Coords::Packed(w) => {
                let bit = 1u64 << (i % 64);
                if value & 1 == 1 {
                    w[i / 64] |= bit;
                } else {
                    w[i / 64] &= !bit;
                }
            }
            Coords::Digits(d) => d[i] = value,
        }
    }

    /// Coordinate at index `i mod n`.
    pub fn get(&self, i: i64) -> u8 {
        self.get_raw(self.ambient.index(i))
    }

    /// Set coordinate `i mod n` to `value mod q`.
    pub fn set(&mut self, i: i64, value: u64) {
        let idx = self.ambient.index(i);
        self.set_raw(idx, (value % self.ambient.q as u64) as u8);
    }

    pub fn digits(&self) -> Vec<u8> {
        (0..self.ambient.n).map(|i| self.get_raw(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        match &self.coords {
            Coords::Packed(w) => w.iter().all(|&x| x == 0),
            Coords::Digits(d) => d.iter().all(|&x| x == 0),
        }
    }

    /// Number of nonzero coordinates.
    pub fn hamming_weight(&self) -> usize {
        match &self.coords {
            Coords::Packed(w) => w.iter().map(|x| x.count_ones() as usize).sum(),
            Coords::Digits(d) => d.iter().filter(|&&x| x != 0).count(),
        }
    }

    /// Indices with a nonzero coordinate, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.ambient.n).filter(|&i| self.get_raw(i) != 0).collect()
    }

    /// |v|: the sum of the coordinates in F_q.
    pub fn weight_sum(&self) -> u8 {
        match &self.coords {
            Coords::Packed(w) => (w.iter().map(|x| x.count_ones()).sum::<u32>() & 1) as u8,
            Coords::Digits(d) => {
                (d.iter().map(|&x| x as u32).sum::<u32>() % self.ambient.q as u32) as u8
            }
        }
    }

    pub fn add(&self, other: &CycVec) -> Result<CycVec> {
        self.ambient.ensure_same(&other.ambient)?;
        Ok(self.zip_with(other, add_mod))
    }

    pub fn sub(&self, other: &CycVec) -> Result<CycVec> {
        self.ambient.ensure_same(&other.ambient)?;
        Ok(self.zip_with(other, sub_mod))
    }

    fn zip_with(&self, other: &CycVec, f: fn(u8, u8, u8) -> u8) -> CycVec {
        let q = self.ambient.q;
        let coords = match (&self.coords, &other.coords) {
            (Coords::Packed(a), Coords::Packed(b)) => {
                Coords::Packed(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
            }
            (Coords::Digits(a), Coords::Digits(b)) => {
                Coords::Digits(a.iter().zip(b).map(|(&x, &y)| f(x, y, q)).collect())
            }
            _ => unreachable!("same ambient implies same representation"),
        };
        CycVec {
            ambient: self.ambient,
            coords,
        }
    }

    /// c · v for a scalar c (reduced mod q).
    pub fn scale(&self, c: u64) -> CycVec {
        let q = self.ambient.q;
        let c = (c % q as u64) as u8;
        match &self.coords {
            Coords::Packed(_) if c == 1 => self.clone(),
            Coords::Packed(_) => CycVec::zero(self.ambient),
            Coords::Digits(d) => CycVec {
                ambient: self.ambient,
                coords: Coords::Digits(d.iter().map(|&x| mul_mod(x, c, q)).collect()),
            },
        }
    }

    pub fn neg(&self) -> CycVec {
        self.scale(self.ambient.q as u64 - 1)
    }

    /// σ^k: result[i] = x[i − k].
    pub fn shift(&self, k: i64) -> CycVec {
        let n = self.ambient.n;
        let k = self.ambient.index(k);
        if k == 0 {
            return self.clone();
        }
        if let Some(w) = self.word() {
            return CycVec {
                ambient: self.ambient,
                coords: Coords::Packed(vec![rotate_word(w, k, n)]),
            };
        }
        let mut out = CycVec::zero(self.ambient);
        for i in 0..n {
            out.set_raw((i + k) % n, self.get_raw(i));
        }
        out
    }

    /// Σ v_i x_i mod q.
    pub fn dot(&self, other: &CycVec) -> Result<u8> {
        self.ambient.ensure_same(&other.ambient)?;
        let q = self.ambient.q as u32;
        Ok(match (&self.coords, &other.coords) {
            (Coords::Packed(a), Coords::Packed(b)) => {
                (a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() & 1) as u8
            }
            (Coords::Digits(a), Coords::Digits(b)) => {
                (a.iter().zip(b).map(|(&x, &y)| x as u32 * y as u32).sum::<u32>() % q) as u8
            }
            _ => unreachable!(),
        })
    }

    /// result[i] = v[ℓ·i mod n]; requires gcd(ℓ, n) = 1.
    pub fn scale_indices(&self, ell: i64) -> Result<CycVec> {
        let n = self.ambient.n;
        let l = self.ambient.index(ell);
        if gcd_u64(l as u64, n as u64) != 1 {
            return Err(Error::NotCoprime { multiplier: ell, n });
        }
        let mut out = CycVec::zero(self.ambient);
        for i in 0..n {
            out.set_raw(i, self.get_raw(l * i % n));
        }
        Ok(out)
    }

    /// The reversal i ↦ −i.
    pub fn reverse(&self) -> CycVec {
        self.scale_indices(-1).expect("-1 is a unit mod n")
    }

    /// v_i = v_{−i} for every i.
    pub fn is_symmetric(&self) -> bool {
        let n = self.ambient.n;
        (1..n).all(|i| self.get_raw(i) == self.get_raw(n - i))
    }

    /// No index i with v_i = v_{−i} = 1 (binary only).
    pub fn is_small(&self) -> Result<bool> {
        self.ambient.ensure_binary()?;
        let n = self.ambient.n;
        Ok((0..n).all(|i| !(self.get_raw(i) == 1 && self.get_raw((n - i) % n) == 1)))
    }

    /// Coordinate string, index 0 first.
    pub fn literal(&self) -> String {
        (0..self.ambient.n)
            .map(|i| char::from_digit(self.get_raw(i) as u32, 10).expect("digit < 10"))
            .collect()
    }
}

impl fmt::Display for CycVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

impl fmt::Debug for CycVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycVec(q={}, {})", self.ambient.q, self.literal())
    }
}

/// Lexicographic order on the coordinate string (coordinate 0 most significant).
impl Ord for CycVec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient.cmp(&other.ambient).then_with(|| {
            (0..self.ambient.n)
                .map(|i| self.get_raw(i).cmp(&other.get_raw(i)))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for CycVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
pub(crate) fn word_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Rotate the low `n` bits of `w` up by `k` (coordinate i moves to i + k).
#[inline]
pub(crate) fn rotate_word(w: u64, k: usize, n: usize) -> u64 {
    let k = k % n;
    if k == 0 {
        return w;
    }
    ((w << k) | (w >> (n - k))) & word_mask(n)
}

/// Ordered, canonically row-reduced list of linearly independent vectors.
///
/// Rows are kept in reduced row-echelon form with pivots at ascending indices, so two
/// bases compare equal exactly when they span the same subspace.
#[derive(Clone)]
pub struct Basis {
    ambient: Ambient,
    rows: Vec<CycVec>,
    pivots: Vec<usize>,
    perp: OnceLock<Vec<CycVec>>,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.rows == other.rows
    }
}

impl Eq for Basis {}

impl Hash for Basis {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.rows.hash(state);
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows.iter().map(|r| r.literal())).finish()
    }
}

impl Basis {
    pub fn empty(ambient: Ambient) -> Self {
        Basis {
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
            perp: OnceLock::new(),
        }
    }

    /// Basis of the given vectors; fails if they are linearly dependent.
    pub fn from_rows(ambient: Ambient, rows: &[CycVec]) -> Result<Self> {
        let b = Basis::span(ambient, rows)?;
        if b.dim() != rows.len() {
            return Err(Error::DependentRows);
        }
        Ok(b)
    }

    /// Canonical basis of the span of `rows` (dependent rows are dropped).
    pub fn span(ambient: Ambient, rows: &[CycVec]) -> Result<Self> {
        let mut b = Basis::empty(ambient);
        for r in rows {
            ambient.ensure_same(&r.ambient)?;
            b.insert(r);
        }
        Ok(b)
    }

    /// Parse literals and build a basis (rows must be independent).
    pub fn parse(ambient: Ambient, literals: &[&str]) -> Result<Self> {
        let rows = literals
            .iter()
            .map(|l| CycVec::parse(ambient, l))
            .collect::<Result<Vec<_>>>()?;
        Basis::from_rows(ambient, &rows)
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[CycVec] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical representative of the coset v + span: all pivot coordinates cleared.
    pub fn reduce(&self, v: &CycVec) -> CycVec {
        let mut out = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = out.get_raw(p);
            if c != 0 {
                out = out.zip_with(&row.scale(c as u64), sub_mod);
            }
        }
        out
    }

    pub fn contains(&self, v: &CycVec) -> bool {
        v.ambient == self.ambient && self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns false if it was already in it.
    fn insert(&mut self, v: &CycVec) -> bool {
        let q = self.ambient.q;
        let r = self.reduce(v);
        let Some(p) = (0..self.ambient.n).find(|&i| r.get_raw(i) != 0) else {
            return false;
        };
        let r = r.scale(inv_mod(r.get_raw(p), q) as u64);
        for row in self.rows.iter_mut() {
            let c = row.get_raw(p);
            if c != 0 {
                *row = row.zip_with(&r.scale(c as u64), sub_mod);
            }
        }
        let pos = self.pivots.partition_point(|&x| x < p);
        self.rows.insert(pos, r);
        self.pivots.insert(pos, p);
        self.perp = OnceLock::new();
        true
    }

    /// New basis for span ∪ {v}; fails if v is already in the span.
    pub fn extended(&self, v: &CycVec) -> Result<Basis> {
        self.ambient.ensure_same(&v.ambient)?;
        let mut b = Basis {
            ambient: self.ambient,
            rows: self.rows.clone(),
            pivots: self.pivots.clone(),
            perp: OnceLock::new(),
        };
        if !b.insert(v) {
            return Err(Error::DependentRows);
        }
        Ok(b)
    }

    /// Basis of the orthogonal complement {x : row · x = 0 for every row}. Cached.
    pub fn perp(&self) -> &[CycVec] {
        self.perp.get_or_init(|| {
            let q = self.ambient.q;
            let n = self.ambient.n;
            let mut out = Vec::with_capacity(n - self.rows.len());
            let mut is_pivot = vec![false; n];
            for &p in &self.pivots {
                is_pivot[p] = true;
            }
            for f in (0..n).filter(|&f| !is_pivot[f]) {
                let mut x = CycVec::unit(self.ambient, f as i64);
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    let c = row.get_raw(f);
                    if c != 0 {
                        x.set_raw(p, sub_mod(0, c, q));
                    }
                }
                out.push(x);
            }
            out
        })
    }

    /// Every element of the span (q^m vectors).
    pub fn elements(&self) -> Vec<CycVec> {
        let mut out = vec![CycVec::zero(self.ambient)];
        for row in &self.rows {
            let mut next = Vec::with_capacity(out.len() * self.ambient.q as usize);
            for c in 0..self.ambient.q as u64 {
                let s = row.scale(c);
                next.extend(out.iter().map(|e| e.zip_with(&s, add_mod)));
            }
            out = next;
        }
        out
    }

    /// Apply a map to every row and return the canonical basis of the image span.
    pub fn map_rows(&self, f: impl Fn(&CycVec) -> CycVec) -> Basis {
        let rows: Vec<CycVec> = self.rows.iter().map(f).collect();
        Basis::span(self.ambient, &rows).expect("map preserves ambient")
    }

    pub fn literals(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.literal()).collect()
    }
}

// Vectors serialize as their literal; non-binary vectors carry a "q:" prefix ("3:0120").
impl serde::Serialize for CycVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.ambient.is_binary() {
            s.serialize_str(&self.literal())
        } else {
            s.serialize_str(&format!("{}:{}", self.ambient.q, self.literal()))
        }
    }
}

impl<'de> serde::Deserialize<'de> for CycVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CycVec::from_tagged_literal(&s).map_err(serde::de::Error::custom)
    }
}

impl serde::Serialize for Basis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Basis", 3)?;
        st.serialize_field("q", &self.ambient.q)?;
        st.serialize_field("n", &self.ambient.n)?;
        st.serialize_field("rows", &self.literals())?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for Basis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Raw {
            q: u32,
            n: usize,
            rows: Vec<String>,
        }
        let raw = Raw::deserialize(d)?;
        let ambient = Ambient::new(raw.q, raw.n).map_err(serde::de::Error::custom)?;
        let lits: Vec<&str> = raw.rows.iter().map(String::as_str).collect();
        Basis::parse(ambient, &lits).map_err(serde::de::Error::custom)
    }
}
