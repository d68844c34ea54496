//! Ground-truth predicates: works, works-together, coverage counts, uncovered witnesses,
//! and the closed-form description of W(n).
//!
//! Coverage is computed by marking: every element u of the orthogonal complement U is
//! enumerated once and all n shifts of u are marked in a q^n-entry bitmap. A vector x is
//! covered exactly when it lies in some σ^k(U).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{rotate_word, Ambient, Basis, CycVec};
use crate::poly::{two_adic_part, CycPoly};

/// Hard cap on the size of a coverage bitmap, in entries (one entry per x ∈ F_q^n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_entries: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_entries: 1 << 28 }
    }
}

impl Budget {
    pub fn bits(bits: u32) -> Self {
        Budget { max_entries: 1u64 << bits.min(63) }
    }

    pub fn unlimited() -> Self {
        Budget { max_entries: u64::MAX }
    }

    pub fn check(&self, ambient: Ambient) -> Result<()> {
        let needed = ambient.size();
        if needed > self.max_entries as u128 {
            return Err(Error::BudgetExceeded { needed, cap: self.max_entries });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub covers: bool,
    pub covered_count: u128,
    /// Minimum-weight, then lexicographically least uncovered vector.
    pub witness: Option<CycVec>,
    pub tested_space: u128,
}

/// Whether every x has a shift orthogonal to v.
pub fn works(v: &CycVec, budget: Budget) -> Result<bool> {
    if v.is_zero() {
        return Ok(true);
    }
    let basis = Basis::from_rows(v.ambient(), std::slice::from_ref(v))?;
    Ok(works_together(&basis, budget)?.covers)
}

/// Coverage report for the span of `basis`.
pub fn works_together(basis: &Basis, budget: Budget) -> Result<CoverageReport> {
    let ambient = basis.ambient();
    let size = ambient.size();
    if basis.is_empty() {
        return Ok(CoverageReport {
            covers: true,
            covered_count: size,
            witness: None,
            tested_space: size,
        });
    }
    budget.check(ambient)?;
    let map = if ambient.is_binary() {
        mark_binary(basis)
    } else {
        mark_general(basis)
    };
    let covered_count = map.count();
    let witness = if covered_count == size {
        None
    } else if ambient.is_binary() {
        Some(witness_binary(&map, ambient))
    } else {
        Some(witness_general(&map, ambient))
    };
    Ok(CoverageReport {
        covers: witness.is_none(),
        covered_count,
        witness,
        tested_space: size,
    })
}

/// A minimum-weight, lexicographically least uncovered x, if any.
pub fn find_uncovered_witness(basis: &Basis, budget: Budget) -> Result<Option<CycVec>> {
    Ok(works_together(basis, budget)?.witness)
}

/// Minimum-weight, lexicographically least uncovered x of odd Hamming weight (q = 2).
pub fn find_odd_uncovered(basis: &Basis, budget: Budget) -> Result<Option<CycVec>> {
    let ambient = basis.ambient();
    ambient.ensure_binary()?;
    if basis.is_empty() {
        return Ok(None);
    }
    budget.check(ambient)?;
    let map = mark_binary(basis);
    let n = ambient.n() as u32;
    Ok(map
        .zeros()
        .filter(|x| x.count_ones() % 2 == 1)
        .min_by_key(|&x| (x.count_ones(), x.reverse_bits() >> (64 - n)))
        .map(|w| CycVec::from_word(ambient, w).expect("fits")))
}

/// Checks that `x` is uncovered: every shift of x is non-orthogonal to some row.
pub fn is_uncovered(basis: &Basis, x: &CycVec) -> Result<bool> {
    let n = basis.ambient().n() as i64;
    for k in 0..n {
        let sx = x.shift(k);
        let mut all_zero = true;
        for row in basis.rows() {
            if row.dot(&sx)? != 0 {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Works-together decided through the polynomial identity: v · σ^k x is the coefficient
/// of X^k in f_v · f_{rev x}. Exhaustive over x; an independent route for cross-checks.
pub fn works_together_poly(basis: &Basis, budget: Budget) -> Result<bool> {
    let ambient = basis.ambient();
    budget.check(ambient)?;
    let n = ambient.n();
    let q = ambient.q() as u64;
    let rows: Vec<CycPoly> = basis.rows().iter().map(CycPoly::from_vec).collect();
    let total = ambient.size() as u64;
    let mut digits = vec![0u8; n];
    for idx in 0..total {
        let mut t = idx;
        for d in digits.iter_mut() {
            *d = (t % q) as u8;
            t /= q;
        }
        let x = CycVec::from_digits(ambient, &digits)?;
        let fx = CycPoly::from_vec(&x.reverse());
        let mut alive = vec![true; n];
        for f in &rows {
            let prod = f.mul_mod(&fx)?;
            for (k, a) in alive.iter_mut().enumerate() {
                *a &= prod.coeff(k as i64) == 0;
            }
        }
        if !alive.iter().any(|&a| a) {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Bitmap {
    words: Vec<u64>,
    len: u64,
}

impl Bitmap {
    fn new(len: u64) -> Self {
        Bitmap {
            words: vec![0; len.div_ceil(64) as usize],
            len,
        }
    }

    #[inline]
    fn set(&mut self, i: u64) {
        self.words[(i >> 6) as usize] |= 1 << (i & 63);
    }

    fn count(&self) -> u128 {
        self.words.iter().map(|w| w.count_ones() as u128).sum()
    }

    /// Indices of unset entries.
    fn zeros(&self) -> impl Iterator<Item = u64> + '_ {
        let len = self.len;
        self.words.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut free = !w;
            std::iter::from_fn(move || {
                if free == 0 {
                    return None;
                }
                let b = free.trailing_zeros() as u64;
                free &= free - 1;
                Some(wi as u64 * 64 + b)
            })
            .filter(move |&i| i < len)
        })
    }
}

fn mark_binary(basis: &Basis) -> Bitmap {
    let n = basis.ambient().n();
    let perp: Vec<u64> = basis
        .perp()
        .iter()
        .map(|p| p.word().expect("budget keeps binary n within one word"))
        .collect();
    let mut map = Bitmap::new(1u64 << n);
    let mut u = 0u64;
    let total = 1u64 << perp.len();
    for step in 0..total {
        if step > 0 {
            u ^= perp[step.trailing_zeros() as usize];
        }
        let mut s = u;
        for _ in 0..n {
            map.set(s);
            s = rotate_word(s, 1, n);
        }
    }
    map
}

fn mark_general(basis: &Basis) -> Bitmap {
    let ambient = basis.ambient();
    let n = ambient.n();
    let q = ambient.q();
    let perp: Vec<Vec<u8>> = basis.perp().iter().map(|p| p.digits()).collect();
    let size = ambient.size() as u64;
    let top = size / q as u64;
    let mut map = Bitmap::new(size);
    let mut u = vec![0u8; n];
    let mut counter = vec![0u8; perp.len()];
    loop {
        let mut idx = u.iter().rev().fold(0u64, |acc, &d| acc * q as u64 + d as u64);
        for _ in 0..n {
            map.set(idx);
            // shift by one: coordinate i moves to i + 1
            idx = (idx % top) * q as u64 + idx / top;
        }
        // odometer step; q additions of a generator return u to its previous value
        let mut j = 0;
        loop {
            if j == perp.len() {
                return map;
            }
            for (c, &g) in u.iter_mut().zip(&perp[j]) {
                *c = (*c + g) % q;
            }
            counter[j] += 1;
            if counter[j] < q {
                break;
            }
            counter[j] = 0;
            j += 1;
        }
    }
}

fn witness_binary(map: &Bitmap, ambient: Ambient) -> CycVec {
    let n = ambient.n() as u32;
    // lexicographic order on coordinate strings = numeric order on bit-reversed words
    let best = map
        .zeros()
        .min_by_key(|&x| (x.count_ones(), x.reverse_bits() >> (64 - n)))
        .expect("uncovered entry exists");
    CycVec::from_word(ambient, best).expect("fits")
}

fn witness_general(map: &Bitmap, ambient: Ambient) -> CycVec {
    let n = ambient.n();
    let q = ambient.q() as u64;
    let decode = |mut idx: u64| {
        let mut d = vec![0u8; n];
        for c in d.iter_mut() {
            *c = (idx % q) as u8;
            idx /= q;
        }
        d
    };
    let best = map
        .zeros()
        .map(decode)
        .min_by(|a, b| {
            let wa = a.iter().filter(|&&c| c != 0).count();
            let wb = b.iter().filter(|&&c| c != 0).count();
            wa.cmp(&wb).then_with(|| a.cmp(b))
        })
        .expect("uncovered entry exists");
    CycVec::from_digits(ambient, &best).expect("valid digits")
}

/// Closed-form membership in W(n): with n = a·2^b, a odd, every interleaved component
/// (v_t, v_{t+2^b}, v_{t+2·2^b}, …) has even weight.
pub fn is_in_w(v: &CycVec) -> Result<bool> {
    v.ambient().ensure_binary()?;
    let r = two_adic_part(v.n());
    let mut parity = vec![0u8; r];
    for i in v.support() {
        parity[i % r] ^= 1;
    }
    Ok(parity.iter().all(|&p| p == 0))
}

/// Basis of W(n): the vectors e_i + e_{i+2^b} for 0 ≤ i < n − 2^b.
pub fn w_basis(n: usize) -> Result<Basis> {
    let ambient = Ambient::binary(n)?;
    let r = two_adic_part(n);
    let rows: Vec<CycVec> = (0..n - r)
        .map(|i| {
            let mut v = CycVec::unit(ambient, i as i64);
            v.set((i + r) as i64, 1);
            v
        })
        .collect();
    Basis::from_rows(ambient, &rows)
}

/// Every member of W(n), each exactly once, in Gray-code order.
pub fn enumerate_w(n: usize, budget: Budget) -> Result<impl Iterator<Item = CycVec>> {
    let basis = w_basis(n)?;
    let dim = basis.dim();
    if (1u128 << dim) > budget.max_entries as u128 {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << dim,
            cap: budget.max_entries,
        });
    }
    let rows = basis.rows().to_vec();
    let ambient = basis.ambient();
    let mut current = CycVec::zero(ambient);
    let total = 1u64 << dim;
    Ok((0..total).map(move |step| {
        if step > 0 {
            let j = step.trailing_zeros() as usize;
            current = current.add(&rows[j]).expect("same ambient");
        }
        current.clone()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> CycVec {
        CycVec::parse_auto(2, s).unwrap()
    }

    fn basis(lits: &[&str]) -> Basis {
        let rows: Vec<CycVec> = lits.iter().map(|l| v(l)).collect();
        Basis::from_rows(rows[0].ambient(), &rows).unwrap()
    }

    #[test]
    fn works_examples() {
        let b = Budget::default();
        assert!(works(&v("0111111"), b).unwrap());
        assert!(!works(&v("100"), b).unwrap());
        for w in 1u64..256 {
            let x = CycVec::from_word(Ambient::binary(8).unwrap(), w).unwrap();
            assert!(!works(&x, b).unwrap());
        }
    }

    #[test]
    fn seven_pair_covers() {
        let r = works_together(&basis(&["0111111", "0110000"]), Budget::default()).unwrap();
        assert!(r.covers);
        assert_eq!(r.covered_count, 128);
        assert!(r.witness.is_none());
    }

    #[test]
    fn nine_pair_fails() {
        let b = basis(&["011111111", "010000100"]);
        let r = works_together(&b, Budget::default()).unwrap();
        assert!(!r.covers);
        let w = r.witness.unwrap();
        // the directed triangle {0, 3, 6} gives a lighter witness than the 5-vertex one
        assert_eq!(w, v("001001001"));
        // independent check: no lighter or lex-smaller weight-3 vector is uncovered
        let a = b.ambient();
        let mut light: Vec<CycVec> = (0u64..512)
            .filter(|x| x.count_ones() <= 3)
            .map(|x| CycVec::from_word(a, x).unwrap())
            .filter(|x| is_uncovered(&b, x).unwrap())
            .collect();
        light.sort_by(|x, y| x.hamming_weight().cmp(&y.hamming_weight()).then(x.cmp(y)));
        assert_eq!(light[0], w);
        assert!(is_uncovered(&b, &w).unwrap());
        assert!(is_uncovered(&b, &v("111010001")).unwrap());
    }

    #[test]
    fn e0_witness_is_all_ones() {
        for n in [3usize, 5, 7, 9] {
            let a = Ambient::binary(n).unwrap();
            let b = Basis::from_rows(a, &[CycVec::unit(a, 0)]).unwrap();
            let r = works_together(&b, Budget::default()).unwrap();
            assert_eq!(r.witness, Some(CycVec::ones(a)));
            assert_eq!(r.covered_count, (1u128 << n) - 1);
        }
    }

    #[test]
    fn empty_basis_covers() {
        let r = works_together(&Basis::empty(Ambient::new(3, 4).unwrap()), Budget::default()).unwrap();
        assert!(r.covers);
        assert_eq!(r.covered_count, 81);
    }

    #[test]
    fn budget_is_enforced() {
        let b = basis(&["011111111", "010000100"]);
        assert!(matches!(
            works_together(&b, Budget::bits(8)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn ternary_coverage_matches_poly_route() {
        let a = Ambient::new(3, 4).unwrap();
        for idx in 1..81u64 {
            let digits: Vec<u8> = (0..4).map(|i| ((idx / 3u64.pow(i)) % 3) as u8).collect();
            let x = CycVec::from_digits(a, &digits).unwrap();
            let b = Basis::from_rows(a, &[x]).unwrap();
            let r = works_together(&b, Budget::default()).unwrap();
            assert_eq!(r.covers, works_together_poly(&b, Budget::default()).unwrap());
            if let Some(w) = r.witness {
                assert!(is_uncovered(&b, &w).unwrap());
            }
        }
    }

    #[test]
    fn w_membership_examples() {
        assert!(is_in_w(&v("11000")).unwrap());
        assert!(is_in_w(&v("100111")).unwrap());
        assert!(!is_in_w(&v("1000")).unwrap());
        assert!(is_in_w(&CycVec::parse_auto(3, "11").unwrap()).is_err());
    }

    #[test]
    fn w_enumeration_counts() {
        assert_eq!(enumerate_w(3, Budget::default()).unwrap().count(), 4);
        let w6: Vec<_> = enumerate_w(6, Budget::default()).unwrap().collect();
        assert_eq!(w6.len(), 16);
        assert!(w6.iter().all(|x| is_in_w(x).unwrap()));
        let w4: Vec<_> = enumerate_w(4, Budget::default()).unwrap().collect();
        assert_eq!(w4, vec![CycVec::zero(Ambient::binary(4).unwrap())]);
    }
}
