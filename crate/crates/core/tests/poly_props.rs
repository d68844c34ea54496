use cyccover::covering::{self, Budget};
use cyccover::poly::{self, ext_gcd, order_mod, CycPoly, Poly};
use cyccover::{Ambient, Basis, CycVec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_vec(rng: &mut impl Rng, a: Ambient) -> CycVec {
    let d: Vec<u8> = (0..a.n()).map(|_| rng.gen_range(0..a.q())).collect();
    CycVec::from_digits(a, &d).unwrap()
}

proptest! {
    #[test]
    fn vec_poly_round_trip(q in prop_oneof![Just(2u32), Just(3), Just(5)], d in proptest::collection::vec(0u8..5, 1..20)) {
        let a = Ambient::new(q, d.len()).unwrap();
        let d: Vec<u8> = d.iter().map(|x| x % q as u8).collect();
        let v = CycVec::from_digits(a, &d).unwrap();
        prop_assert_eq!(CycPoly::from_vec(&v).to_vec(), v);
    }

    // coefficient k of f_v · f_{rev x} is v · σ^k x
    #[test]
    fn product_coefficients_are_shift_dots(q in prop_oneof![Just(2u32), Just(3)], n in 1usize..14, seed in any::<u64>()) {
        let a = Ambient::new(q, n).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let (v, x) = (random_vec(&mut rng, a), random_vec(&mut rng, a));
        let prod = CycPoly::from_vec(&v).mul_mod(&CycPoly::from_vec(&x.reverse())).unwrap();
        for k in 0..n {
            prop_assert_eq!(prod.coeff(k as i64), v.dot(&x.shift(k as i64)).unwrap());
        }
    }
}

#[test]
fn closed_form_matches_oracle_exhaustively() {
    for n in 1..=14 {
        let a = Ambient::binary(n).unwrap();
        for w in 0..1u64 << n {
            let v = CycVec::from_word(a, w).unwrap();
            let cf = poly::works_closed_form(&v).unwrap();
            assert_eq!(cf, covering::is_in_w(&v).unwrap(), "n={n} v={}", v.literal());
            if n <= 10 {
                assert_eq!(cf, covering::works(&v, Budget::default()).unwrap(), "n={n} v={}", v.literal());
            }
        }
    }
}

#[test]
fn vector_and_polynomial_routes_agree() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..2000 {
        let q = [2u32, 2, 3][rng.gen_range(0..3)];
        let n = rng.gen_range(1..=if q == 2 { 12 } else { 7 });
        let a = Ambient::new(q, n).unwrap();
        let m = rng.gen_range(1..=3.min(n));
        let rows: Vec<CycVec> = (0..m).map(|_| random_vec(&mut rng, a)).collect();
        let b = Basis::span(a, &rows).unwrap();
        let by_vec = covering::works_together(&b, Budget::default()).unwrap().covers;
        assert_eq!(by_vec, covering::works_together_poly(&b, Budget::default()).unwrap());
    }
}

#[test]
fn unit_action_preserves_working_bases() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 300 {
        let n = rng.gen_range(3..=12);
        let a = Ambient::binary(n).unwrap();
        let w = covering::w_basis(n).unwrap();
        if w.is_empty() {
            continue;
        }
        let rows: Vec<CycVec> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let mut acc = CycVec::zero(a);
                for r in w.rows() {
                    if rng.gen_bool(0.5) {
                        acc = acc.add(r).unwrap();
                    }
                }
                acc
            })
            .collect();
        let Ok(b) = Basis::from_rows(a, &rows) else { continue };
        if !covering::works_together(&b, Budget::default()).unwrap().covers {
            continue;
        }
        let u = CycPoly::from_vec(&random_vec(&mut rng, a));
        if !poly::is_unit(&u) {
            continue;
        }
        let image: Vec<CycVec> = b
            .rows()
            .iter()
            .map(|r| CycPoly::from_vec(r).mul_mod(&u).unwrap().to_vec())
            .collect();
        let img = Basis::from_rows(a, &image).expect("units keep rows independent");
        assert!(covering::works_together(&img, Budget::default()).unwrap().covers);
        checked += 1;
    }
}

#[test]
fn irreducible_modulus_gives_inverses() {
    for p in [3u64, 5, 7, 11, 13] {
        let f = order_mod(2, p).unwrap();
        if !f.irreducible {
            continue;
        }
        let m = Poly::all_ones(2, p as usize);
        for w in 1u64..1 << (p - 1) {
            let coeffs: Vec<u64> = (0..p - 1).map(|i| w >> i & 1).collect();
            let g = Poly::new(2, &coeffs);
            let (d, s, _) = ext_gcd(&g, &m).unwrap();
            assert_eq!(d, Poly::one(2), "p={p}");
            assert_eq!(g.mul(&s).rem(&m), Poly::one(2));
        }
    }
    assert!(!order_mod(2, 7).unwrap().irreducible);
    assert_eq!(order_mod(2, 7).unwrap().t, 2);
}

#[test]
fn failure_certificates_for_f3_5() {
    let a = Ambient::new(3, 5).unwrap();
    let mut count = 0;
    for code in 1..243u32 {
        let digits: Vec<u8> = (0..5).map(|i| (code / 3u32.pow(i) % 3) as u8).collect();
        let v = CycVec::from_digits(a, &digits).unwrap();
        let x = poly::failure_certificate(&v, 5).unwrap();
        let prod = CycPoly::from_vec(&v).mul_mod(&CycPoly::from_vec(&x)).unwrap();
        assert!((0..5).all(|k| prod.coeff(k) != 0));
        assert!(covering::is_uncovered(&Basis::from_rows(a, &[v]).unwrap(), &x.reverse()).unwrap());
        count += 1;
    }
    assert_eq!(count, 242);
}

#[test]
fn power_sums_vanish_below_p_minus_one() {
    for p in [3u64, 5, 7, 11] {
        for r in 0..p - 1 {
            assert_eq!(poly::power_sum(p, r), 0, "p={p} r={r}");
        }
        assert_eq!(poly::power_sum(p, p - 1), p - 1);
    }
}
