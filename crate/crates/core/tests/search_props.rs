use cyccover::bounds::bounds;
use cyccover::covering::{self, Budget};
use cyccover::search::{h_exact, h_exact_with, product_construction, SearchBudget, SearchConfig};
use cyccover::{Ambient, Basis, CycVec};

const TABLE: [usize; 20] = [0, 0, 1, 0, 2, 2, 2, 0, 3, 2, 2, 3, 2, 3, 3, 0, 4, 3, 2, 3];

fn h(n: usize) -> usize {
    h_exact(2, n, SearchBudget::default()).unwrap().value
}

#[test]
fn exact_values_witnesses_and_rule_soundness() {
    for n in 1..=20 {
        let r = h_exact(2, n, SearchBudget::default()).unwrap();
        assert!(r.complete);
        assert_eq!(r.value, TABLE[n - 1], "n={n}");
        assert_eq!(r.witness.dim(), r.value);
        if r.value > 0 {
            assert!(covering::works_together(&r.witness, Budget::default()).unwrap().covers);
        }
        let b = bounds(2, n as u64);
        assert!(b.lower as usize <= r.value && r.value <= b.upper as usize, "n={n} {b:?}");
    }
}

#[test]
fn superadditivity_and_halving_observed() {
    let hs: Vec<usize> = (1..=20).map(h).collect();
    let at = |n: usize| hs[n - 1];
    for m in 2..=18 {
        for n in 2..=18 / m {
            assert!(at(m * n) >= at(m) + at(n), "m={m} n={n}");
        }
    }
    for n in 1..=10 {
        assert!(at(2 * n) <= 2 * at(n), "n={n}");
    }
}

#[test]
fn symmetry_reductions_do_not_change_values() {
    let base = SearchConfig { deterministic: true, ..Default::default() };
    let variants = [
        SearchConfig { shift: false, ..base },
        SearchConfig { scaling: false, ..base },
        SearchConfig { units: false, ..base },
        SearchConfig::no_symmetry(),
    ];
    for n in 1..=14 {
        let want = TABLE[n - 1];
        for cfg in variants {
            let r = h_exact_with(2, n, SearchBudget::default(), cfg).unwrap();
            assert_eq!(r.value, want, "n={n} {cfg:?}");
        }
    }
}

#[test]
fn deterministic_runs_repeat() {
    let cfg = SearchConfig { deterministic: true, ..Default::default() };
    let a = h_exact_with(2, 18, SearchBudget::default(), cfg).unwrap();
    let b = h_exact_with(2, 18, SearchBudget::default(), cfg).unwrap();
    assert_eq!(a.witness, b.witness);
    assert_eq!(a.stats.nodes, b.stats.nodes);
}

#[test]
fn exhausted_budget_reports_incomplete_lower_bound() {
    let budget = SearchBudget { max_nodes: 3, ..Default::default() };
    let r = h_exact(2, 17, budget).unwrap();
    assert!(!r.complete);
    assert!(r.value <= 4);
    if r.value > 0 {
        assert!(covering::works_together(&r.witness, Budget::default()).unwrap().covers);
    }
    let big = h_exact(2, 40, SearchBudget::default());
    assert!(matches!(big, Err(cyccover::Error::BudgetExceeded { .. })));
}

#[test]
fn product_construction_valid_for_small_odd_factors() {
    let witness = |n: usize| h_exact(2, n, SearchBudget::default()).unwrap().witness;
    for m in [3usize, 5, 7] {
        for n in [3usize, 5, 7] {
            if m * n > 21 {
                continue;
            }
            let out = product_construction(&witness(m), &witness(n), Budget::default()).unwrap();
            assert_eq!(out.ambient().n(), m * n);
            assert_eq!(out.dim(), TABLE[m - 1] + TABLE[n - 1]);
            assert!(covering::works_together(&out, Budget::default()).unwrap().covers);
        }
    }
}

#[test]
fn product_construction_shapes() {
    let a3 = Ambient::binary(3).unwrap();
    let v = Basis::parse(a3, &["110"]).unwrap();
    let out = product_construction(&v, &v, Budget::default()).unwrap();
    assert_eq!(out.dim(), 2);
    let lifted = Basis::span(
        Ambient::binary(9).unwrap(),
        &[CycVec::parse(Ambient::binary(9).unwrap(), "111111000").unwrap(),
          CycVec::parse(Ambient::binary(9).unwrap(), "110110110").unwrap()],
    )
    .unwrap();
    assert_eq!(out, lifted);
    let empty = Basis::empty(Ambient::binary(5).unwrap());
    let only_v = product_construction(&v, &empty, Budget::default()).unwrap();
    assert_eq!(only_v.dim(), 1);
    // a tuple that does not work is refused
    let bad = Basis::parse(a3, &["100"]).unwrap();
    assert!(product_construction(&bad, &v, Budget::default()).is_err());
}

#[test]
fn ternary_exact_values() {
    for (n, want) in [(1, 0), (2, 0), (3, 0), (4, 0), (5, 0), (6, 0), (8, 1)] {
        let r = h_exact(3, n, SearchBudget::default()).unwrap();
        assert!(r.complete);
        assert_eq!(r.value, want, "n={n}");
        let b = bounds(3, n as u64);
        assert!(b.lower as usize <= want && want <= b.upper as usize);
    }
}
