//! Word-level kernels for binary vectors and F_2[X] polynomials of small degree.

use crate::gf::word_mask;

/// Carry-less product of two 64-bit polynomials.
#[cfg(all(target_arch = "x86_64", target_feature = "pclmulqdq"))]
#[inline(always)]
pub fn clmul(a: u64, b: u64) -> u128 {
    use std::arch::x86_64::{_mm_clmulepi64_si128, _mm_cvtsi64_si128, _mm_extract_epi64};
    // SAFETY: the intrinsic is only compiled in when the target enables pclmulqdq.
    unsafe {
        let r = _mm_clmulepi64_si128(_mm_cvtsi64_si128(a as i64), _mm_cvtsi64_si128(b as i64), 0);
        let lo = _mm_extract_epi64(r, 0) as u64;
        let hi = _mm_extract_epi64(r, 1) as u64;
        ((hi as u128) << 64) | lo as u128
    }
}

#[cfg(not(all(target_arch = "x86_64", target_feature = "pclmulqdq")))]
#[inline]
pub fn clmul(a: u64, b: u64) -> u128 {
    clmul_portable(a, b)
}

#[inline]
pub fn clmul_portable(a: u64, b: u64) -> u128 {
    let (a, b) = if a.count_ones() < b.count_ones() { (a, b) } else { (b, a) };
    let mut acc = 0u128;
    let mut rest = a;
    while rest != 0 {
        let i = rest.trailing_zeros();
        acc ^= (b as u128) << i;
        rest &= rest - 1;
    }
    acc
}

/// Product in F_2[X]/(X^n − 1) of two packed polynomials (n ≤ 64).
#[inline(always)]
pub fn cyclic_mul(a: u64, b: u64, n: u32) -> u64 {
    let p = clmul(a, b);
    let mask = word_mask(n as usize) as u128;
    ((p & mask) ^ (p >> n)) as u64 & (mask as u64)
}

/// Reversal i ↦ −i mod n of a packed vector.
pub fn reverse_word(x: u64, n: u32) -> u64 {
    let n = n as usize;
    let mut out = x & 1;
    let mut rest = x & !1;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        out |= 1u64 << (n - j);
        rest &= rest - 1;
    }
    out
}

/// Degree of a nonzero polynomial (`None` for zero).
#[inline]
pub fn degree(p: u128) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(127 - p.leading_zeros())
    }
}

/// Remainder of `a` modulo nonzero `m` in F_2[X].
pub fn poly_rem(mut a: u128, m: u128) -> u128 {
    let dm = degree(m).expect("nonzero modulus");
    while let Some(da) = degree(a) {
        if da < dm {
            break;
        }
        a ^= m << (da - dm);
    }
    a
}

/// Quotient and remainder in F_2[X].
pub fn poly_divrem(mut a: u128, m: u128) -> (u128, u128) {
    let dm = degree(m).expect("nonzero modulus");
    let mut quo = 0u128;
    while let Some(da) = degree(a) {
        if da < dm {
            break;
        }
        quo |= 1u128 << (da - dm);
        a ^= m << (da - dm);
    }
    (quo, a)
}

pub fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// X^n − 1 (= X^n + 1 over F_2) as a packed polynomial.
#[inline]
pub fn cyclic_modulus(n: u32) -> u128 {
    (1u128 << n) | 1
}

/// gcd(f, X^n − 1) for a packed f; gcd(0, ·) is X^n − 1 itself.
#[inline]
pub fn gcd_with_modulus(f: u64, n: u32) -> u128 {
    poly_gcd(cyclic_modulus(n), f as u128)
}
