use cyccover::covering::{self, Budget};
use cyccover::search::log_floor;
use cyccover::{Ambient, Basis, CycVec};
use rand::{Rng, SeedableRng};

fn random_vec(rng: &mut impl Rng, a: Ambient) -> CycVec {
    let d: Vec<u8> = (0..a.n()).map(|_| rng.gen_range(0..a.q())).collect();
    CycVec::from_digits(a, &d).unwrap()
}

fn covers(b: &Basis) -> bool {
    covering::works_together(b, Budget::default()).unwrap().covers
}

#[test]
fn shift_closure_exhaustive_pairs() {
    for n in 1..=10 {
        let a = Ambient::binary(n).unwrap();
        // all single vectors, and all pairs for n ≤ 6
        for w in 1..1u64 << n {
            let v = CycVec::from_word(a, w).unwrap();
            let b = Basis::from_rows(a, &[v.clone()]).unwrap();
            let s = Basis::from_rows(a, &[v.shift(1)]).unwrap();
            assert_eq!(covers(&b), covers(&s), "n={n} v={}", v.literal());
        }
        if n > 6 {
            continue;
        }
        for w1 in 1..1u64 << n {
            for w2 in w1 + 1..1u64 << n {
                let rows = [CycVec::from_word(a, w1).unwrap(), CycVec::from_word(a, w2).unwrap()];
                let b = Basis::from_rows(a, &rows).unwrap();
                let s = b.map_rows(|r| r.shift(1));
                assert_eq!(covers(&b), covers(&s));
            }
        }
    }
}

#[test]
fn verdict_depends_on_span_and_scaling_only() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for _ in 0..500 {
        let q = [2u32, 2, 3][rng.gen_range(0..3)];
        let n = rng.gen_range(2..=if q == 2 { 12 } else { 7 });
        let a = Ambient::new(q, n).unwrap();
        let rows: Vec<CycVec> = (0..rng.gen_range(1..=3)).map(|_| random_vec(&mut rng, a)).collect();
        let b = Basis::span(a, &rows).unwrap();
        // row operations
        let mut mixed = rows.clone();
        for i in 1..mixed.len() {
            let extra = mixed[i - 1].scale(rng.gen_range(1..q as u64));
            mixed[i] = mixed[i].add(&extra).unwrap();
        }
        mixed.reverse();
        let raw: Vec<CycVec> = mixed.iter().filter(|r| !r.is_zero()).cloned().collect();
        let verdict = covers(&b);
        assert_eq!(verdict, covers(&Basis::span(a, &raw).unwrap()));
        for l in 1..n {
            if (1..=l).filter(|d| l % d == 0 && n % d == 0).count() == 1 {
                let scaled = b.map_rows(|r| r.scale_indices(l as i64).unwrap());
                assert_eq!(verdict, covers(&scaled), "n={n} l={l}");
            }
        }
    }
}

#[test]
fn w_membership_matches_works() {
    for n in 1..=12 {
        let a = Ambient::binary(n).unwrap();
        let members: Vec<CycVec> = covering::enumerate_w(n, Budget::default()).unwrap().collect();
        let w = covering::w_basis(n).unwrap();
        assert_eq!(members.len(), 1usize << w.dim());
        for x in 0..1u64 << n {
            let v = CycVec::from_word(a, x).unwrap();
            assert_eq!(covering::is_in_w(&v).unwrap(), w.contains(&v));
        }
        for v in &members {
            assert!(covering::works(v, Budget::default()).unwrap());
        }
    }
}

#[test]
fn union_bound_and_monotonicity() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..400 {
        let q = [2u32, 3][rng.gen_range(0..2)];
        let n = rng.gen_range(2..=if q == 2 { 11 } else { 6 });
        let a = Ambient::new(q, n).unwrap();
        let mut b = Basis::empty(a);
        let mut last = a.size();
        for _ in 0..4 {
            let v = random_vec(&mut rng, a);
            let Ok(next) = b.extended(&v) else { continue };
            b = next;
            let r = covering::works_together(&b, Budget::default()).unwrap();
            let m = b.dim() as u32;
            assert!(r.covered_count <= n as u128 * (q as u128).pow(n as u32 - m));
            assert!(r.covered_count <= last, "adding a row grew the coverage");
            last = r.covered_count;
            if r.covers {
                assert!(b.dim() <= log_floor(q as u64, n as u64));
            } else {
                let x = r.witness.unwrap();
                assert!(covering::is_uncovered(&b, &x).unwrap());
            }
        }
    }
}

#[test]
fn budget_is_enforced() {
    let a = Ambient::binary(20).unwrap();
    let b = Basis::from_rows(a, &[CycVec::e_hat(a)]).unwrap();
    assert!(matches!(
        covering::works_together(&b, Budget::bits(10)),
        Err(cyccover::Error::BudgetExceeded { .. })
    ));
}
