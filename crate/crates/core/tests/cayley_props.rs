use std::collections::BTreeSet;

use cyccover::cayley::{
    self, find_bad_subgraph, find_bad_subgraph_colored, iterated_sumset, negate_vertices, sumset,
    verify_bad_subgraph, verify_bad_subgraph_colored, BadSubgraphCert, CirculantDigraph, Colors, Mode,
};
use cyccover::conjecture::verify_conjecture;
use cyccover::covering::{self, Budget};
use cyccover::{Ambient, Basis, CycVec};
use rand::{Rng, SeedableRng};

fn with_e_hat(rows: &[&CycVec]) -> bool {
    let a = rows[0].ambient();
    let mut all = vec![CycVec::e_hat(a)];
    all.extend(rows.iter().map(|r| (*r).clone()));
    covering::works_together(&Basis::span(a, &all).unwrap(), Budget::default()).unwrap().covers
}

/// Brute force over all odd vertex subsets.
fn any_bad_subset(n: usize, check: impl Fn(&BadSubgraphCert) -> bool, colors: Option<Colors>) -> bool {
    (1u64..1 << n).filter(|s| s.count_ones() % 2 == 1).any(|s| {
        let cert = BadSubgraphCert {
            n,
            vertices: (0..n).filter(|i| s >> i & 1 == 1).collect(),
            mode: Mode::Out,
            colors: colors.clone(),
        };
        check(&cert)
    })
}

#[test]
fn bad_subgraph_iff_not_working_with_e_hat() {
    // the equivalence is stated for odd n
    for n in (1..=13).step_by(2) {
        let a = Ambient::binary(n).unwrap();
        for w in (0..1u64 << n).filter(|w| w & 1 == 0) {
            let v = CycVec::from_word(a, w).unwrap();
            let cert = find_bad_subgraph(&v, Budget::default()).unwrap();
            let works = with_e_hat(&[&v]);
            assert_eq!(cert.is_none(), works, "n={n} v={}", v.literal());
            if let Some(c) = cert {
                assert!(verify_bad_subgraph(&v, &c));
                let neg = negate_vertices(&c, n);
                assert!(verify_bad_subgraph(&v, &neg));
            }
            // independent route: exhaustive subset search
            if n <= 11 {
                assert_eq!(any_bad_subset(n, |c| verify_bad_subgraph(&v, c), None), !works);
            }
        }
    }
}

#[test]
fn bad_subgraph_randomized_to_17() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(17);
    for _ in 0..300 {
        let n = 2 * rng.gen_range(7..=8) + 1;
        let a = Ambient::binary(n).unwrap();
        let w = rng.gen::<u64>() & ((1 << n) - 2);
        let v = CycVec::from_word(a, w).unwrap();
        let cert = find_bad_subgraph(&v, Budget::default()).unwrap();
        assert_eq!(cert.is_none(), with_e_hat(&[&v]));
        if let Some(c) = cert {
            assert!(verify_bad_subgraph(&v, &c));
        }
    }
}

fn small_vectors(n: usize) -> Vec<CycVec> {
    let a = Ambient::binary(n).unwrap();
    (0..1u64 << n)
        .filter(|w| w & 1 == 0)
        .map(|w| CycVec::from_word(a, w).unwrap())
        .filter(|v| v.is_small().unwrap())
        .collect()
}

#[test]
fn coloured_certificates_match_triple_oracle() {
    for p in [3usize, 5, 7, 11] {
        let smalls = small_vectors(p);
        for (i, v) in smalls.iter().enumerate() {
            for w in &smalls[i + 1..] {
                if !v.add(w).unwrap().is_small().unwrap() {
                    continue;
                }
                let cert = find_bad_subgraph_colored(v, w, Budget::default()).unwrap();
                let works = with_e_hat(&[v, w]);
                assert_eq!(cert.is_none(), works, "p={p} v={} w={}", v.literal(), w.literal());
                if let Some(c) = &cert {
                    assert!(verify_bad_subgraph_colored(v, w, c));
                }
                if p <= 7 {
                    let colors = Some(Colors::from_pair(v, w));
                    let brute = any_bad_subset(p, |c| verify_bad_subgraph_colored(v, w, c), colors);
                    assert_eq!(brute, !works, "p={p} v={} w={}", v.literal(), w.literal());
                }
            }
        }
    }
}

#[test]
fn paper_figure_certificate() {
    let a = Ambient::binary(9).unwrap();
    let v = CycVec::parse(a, "010000100").unwrap();
    let cert = BadSubgraphCert { n: 9, vertices: vec![0, 1, 2, 4, 8], mode: Mode::Out, colors: None };
    assert!(verify_bad_subgraph(&v, &cert));
    assert!(verify_bad_subgraph(&v, &negate_vertices(&cert, 9)));
    assert_eq!(cert.to_json(), r#"{"n":9,"vertices":[0,1,2,4,8],"mode":"out","colors":null}"#);
    let bad = BadSubgraphCert { vertices: vec![0, 1, 2], ..cert };
    assert!(!verify_bad_subgraph(&v, &bad));
}

#[test]
fn girth_facts() {
    assert_eq!(CirculantDigraph::new(7, &[1, 2]).unwrap().girth().unwrap(), 4);
    assert_eq!(cayley::girth(9, &[1, 6]).unwrap(), 3);
    assert_eq!(cayley::girth(10, &[5]).unwrap(), 2);
    assert_eq!(cayley::girth(6, &[1]).unwrap(), 6);
    assert!(CirculantDigraph::new(7, &[0, 1]).is_err());
    // girth is the least k with 0 ∈ kA
    for n in 2..=12 {
        for mask in 1u64..1 << (n - 1) {
            let gens: Vec<usize> = (1..n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            let a: BTreeSet<usize> = gens.iter().copied().collect();
            let k = cayley::girth(n, &gens).unwrap();
            assert!(iterated_sumset(&a, k, n).contains(&0));
            for j in 1..k {
                assert!(!iterated_sumset(&a, j, n).contains(&0));
            }
        }
    }
}

#[test]
fn exception_population_at_primes() {
    let mut witnessed = 0;
    for p in [5usize, 7, 11, 13, 17, 19, 23] {
        let report = verify_conjecture(p, Budget::default()).unwrap();
        for v in report.exceptions.iter().filter(|v| v.is_small().unwrap()) {
            let a_set = cayley::generator_set(v);
            let k = CirculantDigraph::from_vec(v).unwrap().girth().unwrap();
            let size = a_set.len();
            assert!(k % 2 == 0 && (k == 4 || k == 6), "girth {k}");
            assert!(p < size * k && size * (k - 1) < p, "size bounds");
            let mut a0 = a_set.clone();
            a0.insert(0);
            let lhs = sumset(&iterated_sumset(&a0, k - 2, p), &a_set, p);
            assert!(!lhs.contains(&0));
            witnessed += 1;
        }
    }
    assert!(witnessed > 0);
}
