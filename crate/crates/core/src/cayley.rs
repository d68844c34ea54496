//! Circulant digraphs G_v on Z/nZ (arc i → i + j for j ∈ A = supp v), girth, bad-subgraph
//! certificates for (ê, v) and coloured certificates for (ê, v, w), plus sumset and
//! progression utilities.
//!
//! A set B ⊆ Z/nZ of odd size in which every vertex has odd outdegree in G_v[B] is exactly
//! the support of an odd-weight x with no shift orthogonal to both ê and v, since
//! v · σ^{−k} x counts the outneighbours of k inside B.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::covering::{self, Budget};
use crate::error::{Error, Result};
use crate::gf::{Ambient, Basis, CycVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculantDigraph {
    n: usize,
    gens: Vec<usize>,
}

impl CirculantDigraph {
    /// Generators are reduced mod n; 0 is not allowed.
    pub fn new(n: usize, gens: &[i64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLength(0));
        }
        let set: BTreeSet<usize> = gens.iter().map(|&g| g.rem_euclid(n as i64) as usize).collect();
        if set.contains(&0) {
            return Err(Error::Precondition("0 is not a valid generator".into()));
        }
        Ok(CirculantDigraph { n, gens: set.into_iter().collect() })
    }

    /// G_v for a binary v with v_0 = 0.
    pub fn from_vec(v: &CycVec) -> Result<Self> {
        v.ambient().ensure_binary()?;
        if v.get(0) != 0 {
            return Err(Error::Precondition("v_0 must be 0".into()));
        }
        Ok(CirculantDigraph { n: v.n(), gens: v.support() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let d = (j + self.n - i % self.n) % self.n;
        self.gens.binary_search(&d).is_ok()
    }

    /// Length of the shortest directed cycle: the least k with 0 ∈ kA.
    pub fn girth(&self) -> Result<usize> {
        girth(self.n, &self.gens)
    }
}

/// Least k ≥ 1 such that 0 is a sum of k elements of A mod n.
pub fn girth(n: usize, gens: &[usize]) -> Result<usize> {
    if gens.is_empty() {
        return Err(Error::Precondition("empty generator set".into()));
    }
    let mut layer = vec![false; n];
    for &g in gens {
        layer[g % n] = true;
    }
    for k in 1..=n {
        if layer[0] {
            return Ok(k);
        }
        let mut next = vec![false; n];
        for (r, _) in layer.iter().enumerate().filter(|(_, &b)| b) {
            for &g in gens {
                next[(r + g) % n] = true;
            }
        }
        layer = next;
    }
    unreachable!("pigeonhole: some k ≤ n reaches 0")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Out,
    In,
}

impl Mode {
    pub fn flipped(self) -> Mode {
        match self {
            Mode::Out => Mode::In,
            Mode::In => Mode::Out,
        }
    }
}

/// Generator classes of the three-coloured graph built from (v, w).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Colors {
    /// A^(v) ∖ A^(w)
    pub red: Vec<usize>,
    /// A^(w) ∖ A^(v)
    pub blue: Vec<usize>,
    /// A^(v) ∩ A^(w)
    pub green: Vec<usize>,
}

impl Colors {
    pub fn from_pair(v: &CycVec, w: &CycVec) -> Self {
        let (mut red, mut blue, mut green) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..v.n() {
            match (v.get(i as i64), w.get(i as i64)) {
                (1, 1) => green.push(i),
                (1, 0) => red.push(i),
                (0, 1) => blue.push(i),
                _ => {}
            }
        }
        Colors { red, blue, green }
    }

    fn classes(&self) -> [&[usize]; 3] {
        [&self.red, &self.blue, &self.green]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BadSubgraphCert {
    pub n: usize,
    pub vertices: Vec<usize>,
    pub mode: Mode,
    pub colors: Option<Colors>,
}

impl BadSubgraphCert {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Number of neighbours of `i` inside `set` along differences in `class`, in the given mode.
fn degree_in(n: usize, set: &[bool], i: usize, class: &[usize], mode: Mode) -> usize {
    class
        .iter()
        .filter(|&&g| {
            let j = match mode {
                Mode::Out => (i + g) % n,
                Mode::In => (i + n - g % n) % n,
            };
            set[j]
        })
        .count()
}

fn membership(n: usize, vertices: &[usize]) -> Option<Vec<bool>> {
    let mut set = vec![false; n];
    for &x in vertices {
        if x >= n || set[x] {
            return None;
        }
        set[x] = true;
    }
    Some(set)
}

/// Checks a certificate against G_v. Coloured certificates must have red ∪ green = supp v.
pub fn verify_bad_subgraph(v: &CycVec, cert: &BadSubgraphCert) -> bool {
    if !v.ambient().is_binary() || v.get(0) != 0 || cert.n != v.n() || cert.vertices.len() % 2 == 0 {
        return false;
    }
    let n = cert.n;
    let Some(set) = membership(n, &cert.vertices) else {
        return false;
    };
    match &cert.colors {
        None => {
            let gens = v.support();
            cert.vertices
                .iter()
                .all(|&i| degree_in(n, &set, i, &gens, cert.mode) % 2 == 1)
        }
        Some(colors) => {
            let mut a_v: Vec<usize> = colors.red.iter().chain(&colors.green).copied().collect();
            a_v.sort_unstable();
            if a_v != v.support() || !colors_consistent(n, colors) {
                return false;
            }
            verify_colored_classes(n, &set, &cert.vertices, colors, cert.mode)
        }
    }
}

/// Checks a coloured certificate against the pair (v, w).
pub fn verify_bad_subgraph_colored(v: &CycVec, w: &CycVec, cert: &BadSubgraphCert) -> bool {
    let Some(colors) = &cert.colors else {
        return false;
    };
    if v.ambient() != w.ambient() || w.get(0) != 0 || *colors != Colors::from_pair(v, w) {
        return false;
    }
    verify_bad_subgraph(v, cert)
}

fn colors_consistent(n: usize, colors: &Colors) -> bool {
    let mut seen = vec![false; n];
    for class in colors.classes() {
        for &g in class {
            if g == 0 || g >= n || seen[g] {
                return false;
            }
            seen[g] = true;
        }
    }
    true
}

fn verify_colored_classes(n: usize, set: &[bool], vertices: &[usize], colors: &Colors, mode: Mode) -> bool {
    vertices.iter().all(|&i| {
        let parities = colors.classes().map(|c| degree_in(n, set, i, c, mode) % 2);
        !(parities[0] == parities[1] && parities[1] == parities[2])
    })
}

/// Maps every vertex i to −i and swaps out- and indegrees; validity is preserved.
pub fn negate_vertices(cert: &BadSubgraphCert, n: usize) -> BadSubgraphCert {
    let mut vertices: Vec<usize> = cert.vertices.iter().map(|&i| (n - i % n) % n).collect();
    vertices.sort_unstable();
    BadSubgraphCert {
        n,
        vertices,
        mode: cert.mode.flipped(),
        colors: cert.colors.clone(),
    }
}

/// Odd-weight uncovered vector for `basis`, built from the minimum witness.
///
/// `odd_rows` says whether some row other than ê has odd weight; then (n odd) every vertex
/// has odd degree in at least one colour and the full vertex set is bad.
fn odd_support(basis: &Basis, odd_rows: bool, budget: Budget) -> Result<Option<Vec<usize>>> {
    let ambient = basis.ambient();
    let n = ambient.n();
    let Some(x) = covering::find_uncovered_witness(basis, budget)? else {
        return Ok(None);
    };
    if x.hamming_weight() % 2 == 1 {
        return Ok(Some(x.support()));
    }
    if n % 2 == 1 {
        if odd_rows {
            return Ok(Some((0..n).collect()));
        }
        // x + 1 is uncovered too: ê·1 = n − 1 and every other row has even weight
        let y = x.add(&CycVec::ones(ambient))?;
        debug_assert!(covering::is_uncovered(basis, &y)?);
        return Ok(Some(y.support()));
    }
    match covering::find_odd_uncovered(basis, budget)? {
        Some(y) => Ok(Some(y.support())),
        None => Err(Error::Precondition(
            "no odd-weight uncovered vector; the bad-subgraph formulation does not apply".into(),
        )),
    }
}

/// A bad subgraph of G_v, or None iff ê and v work together.
pub fn find_bad_subgraph(v: &CycVec, budget: Budget) -> Result<Option<BadSubgraphCert>> {
    let ambient = v.ambient();
    ambient.ensure_binary()?;
    if v.get(0) != 0 {
        return Err(Error::Precondition("v_0 must be 0".into()));
    }
    let basis = Basis::span(ambient, &[CycVec::e_hat(ambient), v.clone()])?;
    let odd = v.hamming_weight() % 2 == 1;
    let Some(vertices) = odd_support(&basis, odd, budget)? else {
        return Ok(None);
    };
    let cert = BadSubgraphCert {
        n: ambient.n(),
        vertices,
        mode: Mode::Out,
        colors: None,
    };
    debug_assert!(verify_bad_subgraph(v, &cert));
    Ok(Some(cert))
}

/// A coloured bad subgraph for (v, w), or None iff ê, v and w work together.
/// Requires v, w and v + w small with v_0 = w_0 = 0.
pub fn find_bad_subgraph_colored(v: &CycVec, w: &CycVec, budget: Budget) -> Result<Option<BadSubgraphCert>> {
    let ambient = v.ambient();
    ambient.ensure_binary()?;
    ambient.ensure_same(&w.ambient())?;
    if v.get(0) != 0 || w.get(0) != 0 {
        return Err(Error::Precondition("v_0 and w_0 must be 0".into()));
    }
    if !v.is_small()? || !w.is_small()? || !v.add(w)?.is_small()? {
        return Err(Error::Precondition("v, w and v + w must all be small".into()));
    }
    let basis = Basis::span(ambient, &[CycVec::e_hat(ambient), v.clone(), w.clone()])?;
    let odd = v.hamming_weight() % 2 == 1 || w.hamming_weight() % 2 == 1;
    let Some(vertices) = odd_support(&basis, odd, budget)? else {
        return Ok(None);
    };
    let cert = BadSubgraphCert {
        n: ambient.n(),
        vertices,
        mode: Mode::Out,
        colors: Some(Colors::from_pair(v, w)),
    };
    debug_assert!(verify_bad_subgraph_colored(v, w, &cert));
    Ok(Some(cert))
}

/// A + B in Z/nZ.
pub fn sumset(a: &BTreeSet<usize>, b: &BTreeSet<usize>, n: usize) -> BTreeSet<usize> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (x + y) % n))
        .collect()
}

/// kA = A + … + A (k summands); 0A = {0}.
pub fn iterated_sumset(a: &BTreeSet<usize>, k: usize, n: usize) -> BTreeSet<usize> {
    let mut acc: BTreeSet<usize> = [0].into_iter().collect();
    for _ in 0..k {
        acc = sumset(&acc, a, n);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progression {
    pub start: usize,
    pub diff: usize,
    pub len: usize,
    /// The absent interior term of an almost progression.
    pub missing: Option<usize>,
}

/// Some (start, diff, len) with A = {start + i·diff}, diff ∈ [1, n/2] taken as small as
/// possible; singletons report diff 0.
pub fn is_arithmetic_progression(a: &BTreeSet<usize>, n: usize) -> Option<Progression> {
    let first = *a.iter().next()?;
    if a.len() == 1 {
        return Some(Progression { start: first, diff: 0, len: 1, missing: None });
    }
    for d in 1..=n / 2 {
        let starts: Vec<usize> = a.iter().copied().filter(|&x| !a.contains(&((x + n - d) % n))).collect();
        let start = match starts.len() {
            0 => first,
            1 => starts[0],
            _ => continue,
        };
        let mut len = 0;
        let mut x = start;
        while a.contains(&x) && len < a.len() {
            len += 1;
            x = (x + d) % n;
        }
        if len == a.len() {
            return Some(Progression { start, diff: d, len, missing: None });
        }
    }
    None
}

/// An arithmetic progression possibly missing one interior term.
pub fn is_almost_progression(a: &BTreeSet<usize>, n: usize) -> Option<Progression> {
    if let Some(p) = is_arithmetic_progression(a, n) {
        return Some(p);
    }
    (0..n).filter(|m| !a.contains(m)).find_map(|m| {
        let mut b = a.clone();
        b.insert(m);
        let p = is_arithmetic_progression(&b, n)?;
        let last = (p.start + (p.len - 1) * p.diff) % n;
        (m != p.start && m != last).then_some(Progression { missing: Some(m), ..p })
    })
}

/// Ambient-free helper for generator sets given as vectors.
pub fn generator_set(v: &CycVec) -> BTreeSet<usize> {
    v.support().into_iter().collect()
}

/// Indicator vector of a generator set.
pub fn vector_from_generators(n: usize, gens: &[usize]) -> Result<CycVec> {
    let ambient = Ambient::binary(n)?;
    let mut v = CycVec::zero(ambient);
    for &g in gens {
        v.set(g as i64, 1);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> CycVec {
        CycVec::parse_auto(2, s).unwrap()
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn girth_examples() {
        assert_eq!(girth(9, &[1]).unwrap(), 9);
        assert_eq!(girth(7, &[1, 2]).unwrap(), 4);
        assert_eq!(girth(9, &[1, 6]).unwrap(), 3);
        assert!(girth(9, &[]).is_err());
        assert!(CirculantDigraph::new(5, &[0, 1]).is_err());
    }

    #[test]
    fn figure_one_certificate() {
        let x = v("010000100");
        let cert = BadSubgraphCert { n: 9, vertices: vec![0, 1, 2, 4, 8], mode: Mode::Out, colors: None };
        assert!(verify_bad_subgraph(&x, &cert));
        assert_eq!(cert.to_json(), r#"{"n":9,"vertices":[0,1,2,4,8],"mode":"out","colors":null}"#);
        let tri = BadSubgraphCert { n: 9, vertices: vec![0, 3, 6], mode: Mode::Out, colors: None };
        assert!(verify_bad_subgraph(&x, &tri));
        let neg = negate_vertices(&tri, 9);
        assert_eq!(neg.vertices, vec![0, 3, 6]);
        assert_eq!(neg.mode, Mode::In);
        assert!(verify_bad_subgraph(&x, &neg));
        assert_eq!(negate_vertices(&neg, 9), tri);
        let single = BadSubgraphCert { n: 9, vertices: vec![0], mode: Mode::Out, colors: None };
        assert!(!verify_bad_subgraph(&x, &single));
    }

    #[test]
    fn find_examples() {
        let b = Budget::default();
        let cert = find_bad_subgraph(&v("010000100"), b).unwrap().unwrap();
        assert!(verify_bad_subgraph(&v("010000100"), &cert));
        assert!(find_bad_subgraph(&v("0110000"), b).unwrap().is_none());
        assert!(find_bad_subgraph(&v("0100100"), b).unwrap().is_none());
        assert!(find_bad_subgraph(&v("1100000"), b).is_err());
    }

    #[test]
    fn colored_degenerate_matches_uncolored() {
        let b = Budget::default();
        let zero = CycVec::zero(Ambient::binary(9).unwrap());
        let c = find_bad_subgraph_colored(&v("010000100"), &zero, b).unwrap().unwrap();
        assert!(verify_bad_subgraph_colored(&v("010000100"), &zero, &c));
        assert!(find_bad_subgraph_colored(&v("0110000"), &CycVec::zero(Ambient::binary(7).unwrap()), b)
            .unwrap()
            .is_none());
    }

    #[test]
    fn sumsets_and_progressions() {
        assert_eq!(sumset(&set(&[1, 2]), &set(&[1, 2]), 7), set(&[2, 3, 4]));
        assert_eq!(iterated_sumset(&set(&[0, 1, 2]), 3, 7), (0..7).collect());
        let p = is_arithmetic_progression(&set(&[1, 3, 5]), 7).unwrap();
        assert_eq!((p.diff, p.len), (2, 3));
        assert!(is_arithmetic_progression(&set(&[0, 1, 3]), 7).is_none());
        assert!(is_arithmetic_progression(&set(&[2, 5]), 11).is_some());
        let q = is_almost_progression(&set(&[0, 1, 3]), 7).unwrap();
        assert_eq!(q.missing, Some(2));
        // wraps around: {6, 0, 1} has difference 1
        let r = is_arithmetic_progression(&set(&[0, 1, 6]), 7).unwrap();
        assert_eq!((r.start, r.diff), (6, 1));
    }
}
