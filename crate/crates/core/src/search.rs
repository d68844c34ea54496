//! Exact computation of h_q(n) and the product construction.
//!
//! For q = 2 the search walks subspaces of W(n) (the vectors that work) by canonical
//! augmentation. Level 1 is reduced by the unit group of F_2[X]/(X^n − 1): every vector is
//! an associate of the divisor gcd(f_v, X^n − 1), so one representative per divisor class
//! suffices, provided the chosen vector is a minimal-rank element of the final subspace.
//! Index scalings merge classes further. Cheap witness filters (cached uncovered vectors)
//! run before any full coverage check.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::Mutex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{cyclic_mul, degree, gcd_with_modulus, poly_divrem, reverse_word};
use crate::covering::{self, Budget};
use crate::error::{Error, Result};
use crate::gf::{gcd_u64, rotate_word, word_mask, Ambient, Basis, CycVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// log2 of the largest admissible q^n
    pub max_map_bits: u32,
    pub max_nodes: u64,
    pub thread_count: usize,
    pub time_limit: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_map_bits: 28,
            max_nodes: u64::MAX,
            thread_count: 1,
            time_limit: None,
        }
    }
}

impl SearchBudget {
    pub fn coverage(&self) -> Budget {
        Budget::bits(self.max_map_bits)
    }
}

/// Symmetry reductions; each can be switched off for regression checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Skip final candidates that are shifts of one already checked.
    pub shift: bool,
    /// Merge divisor classes related by X ↦ X^ℓ.
    pub scaling: bool,
    /// Use one representative per unit-associate class for the first vector.
    pub units: bool,
    /// Single-threaded, fixed exploration order.
    pub deterministic: bool,
    /// Bound of the shared witness cache.
    pub cache_size: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            shift: true,
            scaling: true,
            units: true,
            deterministic: false,
            cache_size: 4096,
        }
    }
}

impl SearchConfig {
    pub fn no_symmetry() -> Self {
        SearchConfig {
            shift: false,
            scaling: false,
            units: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub full_checks: u64,
    pub witnesses: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HExact {
    pub q: u8,
    pub n: usize,
    /// h_q(n) when `complete`; otherwise the best verified lower bound.
    pub value: usize,
    pub witness: Basis,
    pub complete: bool,
    pub stats: SearchStats,
}

/// ⌊log_q n⌋
pub fn log_floor(q: u64, n: u64) -> usize {
    let mut m = 0;
    let mut p = q;
    while p <= n {
        m += 1;
        p = p.saturating_mul(q);
    }
    m
}

/// Lifts working tuples for m and n to a working tuple for mn: each v is stretched
/// (every coordinate repeated n times), each w is tiled m times.
pub fn product_construction(v: &Basis, w: &Basis, budget: Budget) -> Result<Basis> {
    let (av, aw) = (v.ambient(), w.ambient());
    if av.q() != aw.q() {
        return Err(Error::AmbientMismatch {
            left: (av.q(), av.n()),
            right: (aw.q(), aw.n()),
        });
    }
    let (m, n) = (av.n(), aw.n());
    let target = Ambient::new(av.q() as u32, m * n)?;
    for (b, what) in [(v, "first"), (w, "second")] {
        if budget.check(b.ambient()).is_ok() && !covering::works_together(b, budget)?.covers {
            return Err(Error::Precondition(format!("{what} tuple does not work together")));
        }
    }
    let mut rows = Vec::with_capacity(v.dim() + w.dim());
    for r in v.rows() {
        let d: Vec<u8> = (0..m * n).map(|j| r.get((j / n) as i64)).collect();
        rows.push(CycVec::from_digits(target, &d)?);
    }
    for r in w.rows() {
        let d: Vec<u8> = (0..m * n).map(|j| r.get((j % n) as i64)).collect();
        rows.push(CycVec::from_digits(target, &d)?);
    }
    let out = Basis::from_rows(target, &rows)?;
    if budget.check(target).is_ok() && !covering::works_together(&out, budget)?.covers {
        return Err(Error::Precondition("lifted tuple does not work together".into()));
    }
    Ok(out)
}

/// Exact h_q(n) with a witness basis.
pub fn h_exact(q: u32, n: usize, budget: SearchBudget) -> Result<HExact> {
    h_exact_with(q, n, budget, SearchConfig::default())
}

pub fn h_exact_with(q: u32, n: usize, budget: SearchBudget, config: SearchConfig) -> Result<HExact> {
    let ambient = Ambient::new(q, n)?;
    budget.coverage().check(ambient)?;
    let start = Instant::now();
    let ctl = Control::new(budget, start);
    let mut result = if ambient.is_binary() && n <= 63 {
        BinaryEngine::new(n, config, &ctl)?.run()?
    } else {
        generic_search(ambient, &ctl)?
    };
    result.stats.elapsed_ms = start.elapsed().as_millis() as u64;
    result.stats.nodes = ctl.nodes.load(Ordering::Relaxed);
    result.stats.full_checks = ctl.full_checks.load(Ordering::Relaxed);
    Ok(result)
}

/// Shared counters and abort conditions.
struct Control {
    budget: SearchBudget,
    start: Instant,
    nodes: AtomicU64,
    full_checks: AtomicU64,
    aborted: AtomicBool,
}

impl Control {
    fn new(budget: SearchBudget, start: Instant) -> Self {
        Control {
            budget,
            start,
            nodes: AtomicU64::new(0),
            full_checks: AtomicU64::new(0),
            aborted: AtomicBool::new(false),
        }
    }

    /// Counts a node; returns false once any limit has been hit.
    fn tick(&self) -> bool {
        if self.aborted.load(Ordering::Relaxed) {
            return false;
        }
        let nodes = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over_time = self
            .budget
            .time_limit
            .is_some_and(|t| nodes % 64 == 0 && self.start.elapsed() > t);
        if nodes > self.budget.max_nodes || over_time {
            self.aborted.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    fn aborted(&self) -> bool {
        self.aborted.load(Ordering::Relaxed)
    }
}

// ---------------------------------------------------------------------------------------
// q = 2 engine
// ---------------------------------------------------------------------------------------

/// Irreducible factors of X^a − 1 over F_2 (a odd), by trial division in increasing degree.
fn factor_odd_cyclic(a: usize) -> Vec<u128> {
    let mut f: u128 = (1u128 << a) | 1;
    let mut out = Vec::new();
    let mut d = 1;
    while degree(f).is_some_and(|df| 2 * d as u32 <= df) {
        for low in 0u128..(1u128 << (d - 1)) {
            let p = (1u128 << d) | (low << 1) | 1;
            loop {
                let (quo, rem) = poly_divrem(f, p);
                if rem != 0 {
                    break;
                }
                out.push(p);
                f = quo;
            }
        }
        d += 1;
    }
    if degree(f).is_some_and(|df| df > 0) {
        out.push(f);
    }
    out
}

fn poly_mul(a: u128, b: u128) -> u128 {
    let mut acc = 0u128;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

/// Coordinate i moves to ℓ·i (mod n).
pub(crate) fn scale_word(w: u64, ell: usize, n: usize) -> u64 {
    let mut out = 0;
    let mut rest = w;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        out |= 1u64 << (i * ell % n);
        rest &= rest - 1;
    }
    out
}

struct WitnessCache {
    items: Vec<u64>,
    seen: HashSet<u64>,
    cap: usize,
}

impl WitnessCache {
    fn push(&mut self, x: u64) {
        if self.seen.insert(x) {
            if self.items.len() == self.cap {
                let old = self.items.remove(0);
                self.seen.remove(&old);
            }
            self.items.push(x);
        }
    }
}

struct BinaryEngine<'a> {
    n: usize,
    mask: u64,
    config: SearchConfig,
    ctl: &'a Control,
    log_bound: usize,
    /// Basis of W(n) as words.
    w_basis: Vec<u64>,
    /// Rank of each divisor class (smaller = visited first).
    class_rank: HashMap<u128, u32>,
    /// (rank, representative) of every level-one branch.
    level_one: Vec<(u32, u64)>,
    seeds: Vec<u64>,
    cache: Mutex<WitnessCache>,
    /// Partner sets and stabilizers per first vector, reused across target values.
    pairs: Mutex<HashMap<u64, PairSet>>,
}

type PairSet = Arc<(Vec<u64>, Vec<(usize, u64)>)>;

/// A witness x with its reversal and the mask of shifts at which the current span covers it.
#[derive(Clone, Copy)]
struct Probe {
    xrev: u64,
    kmask: u64,
}

struct Found {
    rows: Vec<u64>,
}

impl<'a> BinaryEngine<'a> {
    fn new(n: usize, config: SearchConfig, ctl: &'a Control) -> Result<Self> {
        let mask = word_mask(n);
        let r = 1usize << n.trailing_zeros();
        let w_basis: Vec<u64> = (0..n - r).map(|i| (1u64 << i) | (1u64 << (i + r))).collect();

        // classes: divisors g of X^n − 1 = (X^a − 1)^{2^b} divisible by (1 + X)^{2^b}
        let a = n / r;
        let factors: Vec<u128> = factor_odd_cyclic(a).into_iter().filter(|&f| f != 0b11).collect();
        let base: u128 = (0..r).fold(1u128, |acc, _| poly_mul(acc, 0b11));
        let mut classes = vec![base];
        for &f in &factors {
            let mut next = Vec::new();
            for &g in &classes {
                let mut h = g;
                for _ in 0..=r {
                    next.push(h);
                    h = poly_mul(h, f);
                }
            }
            classes = next;
        }
        let full = (1u128 << n) | 1;
        classes.retain(|&g| g != full);

        let units: Vec<usize> = (1..n.max(2)).filter(|&l| gcd_u64(l as u64, n as u64) == 1).collect();
        let key = |g: u128| -> (u32, u128) {
            let deg = degree(g).unwrap_or(0);
            if !config.scaling {
                return (deg, g);
            }
            let orbit_min = units
                .iter()
                .map(|&l| gcd_with_modulus(scale_word(g as u64, l, n), n as u32))
                .min()
                .unwrap_or(g);
            (deg, orbit_min)
        };
        let mut keyed: Vec<((u32, u128), u128)> = classes.iter().map(|&g| (key(g), g)).collect();
        keyed.sort();
        let mut class_rank = HashMap::new();
        let mut level_one = Vec::new();
        let mut rank = 0u32;
        for (i, &(k, g)) in keyed.iter().enumerate() {
            if i > 0 && keyed[i - 1].0 != k {
                rank += 1;
            }
            class_rank.insert(g, rank);
            // one branch per orbit: the class equal to the orbit minimum
            if !config.scaling || k.1 == g {
                level_one.push((rank, g as u64));
            }
        }

        let mut seeds = vec![1u64];
        for i in 1..n {
            seeds.push(1 | (1u64 << i));
        }
        for i in 1..n {
            for j in i + 1..n {
                seeds.push(1 | (1u64 << i) | (1u64 << j));
            }
        }

        Ok(BinaryEngine {
            n,
            mask,
            config,
            ctl,
            log_bound: log_floor(2, n as u64),
            w_basis,
            class_rank,
            level_one,
            seeds,
            pairs: Mutex::new(HashMap::new()),
            cache: Mutex::new(WitnessCache {
                items: Vec::new(),
                seen: HashSet::new(),
                cap: config.cache_size.max(1),
            }),
        })
    }

    #[inline]
    fn corr(&self, c: u64, xrev: u64) -> u64 {
        cyclic_mul(c, xrev, self.n as u32)
    }

    fn rank_of(&self, c: u64) -> u32 {
        let g = gcd_with_modulus(c, self.n as u32);
        self.class_rank[&g]
    }

    fn probe(&self, x: u64, rows: &[u64]) -> Probe {
        let xrev = reverse_word(x, self.n as u32);
        let hit = rows.iter().fold(0, |acc, &r| acc | self.corr(r, xrev));
        Probe { xrev, kmask: !hit & self.mask }
    }

    /// Probes for the current span: seeds plus the shared cache.
    fn probes_for(&self, rows: &[u64]) -> Vec<Probe> {
        let cached: Vec<u64> = self.cache.lock().items.clone();
        self.seeds
            .iter()
            .chain(cached.iter())
            .map(|&x| self.probe(x, rows))
            .collect()
    }

    #[inline]
    fn passes(&self, probes: &[Probe], c: u64) -> bool {
        probes.iter().all(|p| p.kmask & !self.corr(c, p.xrev) != 0)
    }

    /// Every element of W(n), in Gray-code order.
    fn w_elements(&self) -> Vec<u64> {
        let dim = self.w_basis.len();
        let mut out = Vec::with_capacity(1 << dim);
        let mut cur = 0u64;
        out.push(0);
        for step in 1u64..(1u64 << dim) {
            cur ^= self.w_basis[step.trailing_zeros() as usize];
            out.push(cur);
        }
        out
    }

    /// Full works-together check of the span of `rows` (all of even weight).
    /// Scans x with x_0 = 1, x_1 = 0: every nonconstant x has such a shift, and the constants
    /// are covered because each row has even weight.
    fn full_check(&self, rows: &[u64]) -> Option<u64> {
        self.ctl.full_checks.fetch_add(1, Ordering::Relaxed);
        full_check_words(rows, self.n)
    }

    fn record_witness(&self, x: u64) {
        // lossy: a busy lock just drops the witness
        if let Some(mut c) = self.cache.try_lock() {
            c.push(x);
        }
    }

    /// Shift-canonical form of a span, for deduplicating final candidates.
    fn shift_canonical(&self, rows: &[u64]) -> Vec<u64> {
        (0..self.n)
            .map(|k| {
                let shifted: Vec<u64> = rows.iter().map(|&r| rotate_word(r, k, self.n)).collect();
                rref_words(&shifted)
            })
            .min()
            .expect("n ≥ 1")
    }

    fn run(self) -> Result<HExact> {
        let ambient = Ambient::binary(self.n)?;
        let mut best = Basis::empty(ambient);
        if self.w_basis.is_empty() || self.log_bound == 0 {
            return Ok(self.finish(best, true));
        }
        // any single vector of W works
        best = Basis::from_rows(ambient, &[CycVec::from_word(ambient, self.w_basis[0])?])?;
        let mut value = 1;
        while value < self.log_bound {
            match self.search(value + 1) {
                Some(found) => {
                    let rows: Vec<CycVec> = found
                        .rows
                        .iter()
                        .map(|&w| CycVec::from_word(ambient, w))
                        .collect::<Result<_>>()?;
                    best = Basis::from_rows(ambient, &rows)?;
                    value += 1;
                }
                None => break,
            }
            if self.ctl.aborted() {
                break;
            }
        }
        let complete = !self.ctl.aborted();
        Ok(self.finish(best, complete))
    }

    fn finish(&self, witness: Basis, complete: bool) -> HExact {
        HExact {
            q: 2,
            n: self.n,
            value: witness.dim(),
            witness,
            complete,
            stats: SearchStats {
                witnesses: self.cache.lock().items.len() as u64,
                ..Default::default()
            },
        }
    }

    /// Looks for `target` independent vectors that work together.
    fn search(&self, target: usize) -> Option<Found> {
        let seen = Mutex::new(HashSet::new());
        let stop = AtomicBool::new(false);
        if !self.config.units {
            let probes = self.probes_for(&[]);
            let mut s: Vec<u64> = self.w_elements().into_iter().filter(|&c| c != 0).collect();
            s.sort_unstable();
            return self.node(&[], probes, s, target, &seen, &stop).0;
        }
        let branch = |&(rank, d): &(u32, u64)| -> Option<Found> {
            if stop.load(Ordering::Relaxed) || !self.ctl.tick() {
                return None;
            }
            let found = self.branch(rank, d, target, &seen, &stop);
            if found.is_some() {
                stop.store(true, Ordering::Relaxed);
            }
            found
        };
        if self.config.deterministic || self.ctl.budget.thread_count <= 1 {
            self.level_one.iter().find_map(branch)
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.ctl.budget.thread_count)
                .build()
                .ok()?;
            pool.install(|| self.level_one.par_iter().find_map_any(branch))
        }
    }

    /// Subspaces whose minimal-rank class is represented by `d`.
    fn branch(
        &self,
        rank: u32,
        d: u64,
        target: usize,
        seen: &Mutex<HashSet<Vec<u64>>>,
        stop: &AtomicBool,
    ) -> Option<Found> {
        if target == 1 {
            return Some(Found { rows: vec![d] });
        }
        let cached = self.pairs.lock().get(&d).cloned();
        let set = match cached {
            Some(set) => set,
            None => {
                let set = Arc::new(self.exact_pairs(rank, d)?);
                self.pairs.lock().insert(d, set.clone());
                set
            }
        };
        let (pairs, gens) = (&set.0, &set.1);
        if target == 2 {
            return pairs.first().map(|&c| Found { rows: vec![d, c] });
        }
        let rows = [d];
        let probes = self.probes_for(&rows);
        let reps = self.orbit_representatives(&pairs, &gens, d);
        for a in reps {
            if stop.load(Ordering::Relaxed) || !self.ctl.tick() {
                return None;
            }
            let p = a.trailing_zeros();
            let next_rows = [d, a];
            let next_probes: Vec<Probe> = probes
                .iter()
                .map(|pr| Probe {
                    kmask: pr.kmask & !self.corr(a, pr.xrev),
                    ..*pr
                })
                .collect();
            let s: Vec<u64> = pairs
                .iter()
                .copied()
                .filter(|&c| (c >> p) & 1 == 0 && c != 0)
                .filter(|&c| pairs.binary_search(&(c ^ a)).is_ok())
                .filter(|&c| self.passes(&next_probes, c))
                .collect();
            let (found, _) = self.node(&next_rows, next_probes, s, target, seen, stop);
            if found.is_some() {
                return found;
            }
        }
        None
    }

    /// Symmetries fixing `d`: pairs (ℓ, u) acting by c ↦ u · c(X^ℓ), with u a unit and
    /// u · d(X^ℓ) = d. Includes a sample of the units in 1 + ann(d).
    fn stabilizer(&self, d: u64) -> Vec<(usize, u64)> {
        let n = self.n;
        let mut gens = Vec::new();
        let is_unit = |u: u64| gcd_with_modulus(u, n as u32) == 1;
        if self.config.scaling {
            for ell in 2..n {
                if gcd_u64(ell as u64, n as u64) != 1 {
                    continue;
                }
                let s = scale_word(d, ell, n);
                let Some((u0, kernel)) = solve_cyclic(s, d, n) else {
                    continue;
                };
                if let Some(u) = find_unit(u0, &kernel, is_unit) {
                    gens.push((ell, u));
                }
            }
        }
        let Some((_, ann)) = solve_cyclic(d, 0, n) else {
            return gens;
        };
        // 1 + a for annihilators a; a deterministic sample of combinations
        let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ d;
        for _ in 0..64 {
            if ann.is_empty() {
                break;
            }
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let a = ann
                .iter()
                .enumerate()
                .filter(|(i, _)| (state >> (i % 64)) & 1 == 1)
                .fold(0u64, |acc, (_, &k)| acc ^ k);
            let u = 1 ^ a;
            if a != 0 && is_unit(u) && !gens.contains(&(1, u)) {
                gens.push((1, u));
            }
            if gens.len() > 48 {
                break;
            }
        }
        gens.retain(|&(ell, u)| cyclic_mul(u, scale_word(d, ell, n), n as u32) == d);
        gens
    }

    #[inline]
    fn act(&self, g: (usize, u64), c: u64, d: u64) -> u64 {
        let img = cyclic_mul(g.1, scale_word(c, g.0, self.n), self.n as u32);
        if (img >> d.trailing_zeros()) & 1 == 1 {
            img ^ d
        } else {
            img
        }
    }

    fn orbit(&self, c: u64, gens: &[(usize, u64)], d: u64) -> Vec<u64> {
        let mut orbit = vec![c];
        let mut members = HashSet::from([c]);
        let mut i = 0;
        while i < orbit.len() {
            let x = orbit[i];
            for &g in gens {
                let y = self.act(g, x, d);
                if members.insert(y) {
                    orbit.push(y);
                }
            }
            i += 1;
        }
        orbit
    }

    /// First element of each orbit of the (sorted, invariant) set `set`.
    fn orbit_representatives(&self, set: &[u64], gens: &[(usize, u64)], d: u64) -> Vec<u64> {
        let mut done = HashSet::new();
        let mut reps = Vec::new();
        for &c in set {
            if done.contains(&c) {
                continue;
            }
            reps.push(c);
            done.extend(self.orbit(c, gens, d));
        }
        reps
    }

    /// All coset representatives c (mod d) with {d, c} working together and every element of
    /// c + ⟨d⟩ of rank at least `rank`, sorted. Only one member per stabilizer orbit is
    /// checked; the rest of the orbit inherits its verdict.
    fn exact_pairs(&self, rank: u32, d: u64) -> Option<(Vec<u64>, Vec<(usize, u64)>)> {
        let gens = self.stabilizer(d);
        let rows = [d];
        let mut probes = self.probes_for(&rows);
        if probes.iter().any(|p| p.kmask == 0) {
            return Some((Vec::new(), gens));
        }
        let p = d.trailing_zeros();
        let mut visited = vec![0u64; (1usize << self.n).div_ceil(64)];
        let mut pairs = Vec::new();
        let mut cur = 0u64;
        let dim = self.w_basis.len();
        for step in 1u64..(1u64 << dim) {
            cur ^= self.w_basis[step.trailing_zeros() as usize];
            let c = cur;
            if (c >> p) & 1 == 1 || visited[(c >> 6) as usize] >> (c & 63) & 1 == 1 {
                continue;
            }
            if !self.passes(&probes, c) {
                continue;
            }
            if step % 1024 == 0 && !self.ctl.tick() {
                return None;
            }
            let orbit = self.orbit(c, &gens, d);
            for &y in &orbit {
                visited[(y >> 6) as usize] |= 1 << (y & 63);
            }
            let admissible = orbit.iter().all(|&y| {
                self.rank_of(y) >= rank && self.rank_of(y ^ d) >= rank && self.passes(&probes, y)
            });
            if !admissible {
                continue;
            }
            match self.full_check(&[d, c]) {
                None => pairs.extend(orbit),
                Some(x) => {
                    self.record_witness(x);
                    probes.push(self.probe(x, &rows));
                }
            }
        }
        pairs.sort_unstable();
        Some((pairs, gens))
    }

    /// DFS node: `rows` span V, `s` holds the sorted coset
    /// representatives c (mod V) for which V + c passes every filter. Returns a success and
    /// the witnesses discovered below, for the caller to reuse.
    fn node(
        &self,
        rows: &[u64],
        mut probes: Vec<Probe>,
        s: Vec<u64>,
        target: usize,
        seen: &Mutex<HashSet<Vec<u64>>>,
        stop: &AtomicBool,
    ) -> (Option<Found>, Vec<u64>) {
        let r = rows.len();
        let mut discovered = Vec::new();
        if r + 1 == target {
            for &c in &s {
                if stop.load(Ordering::Relaxed) || !self.ctl.tick() {
                    break;
                }
                if !self.passes(&probes, c) {
                    continue;
                }
                let mut cand = rows.to_vec();
                cand.push(c);
                if self.config.shift && !seen.lock().insert(self.shift_canonical(&cand)) {
                    continue;
                }
                match self.full_check(&cand) {
                    None => return (Some(Found { rows: cand }), discovered),
                    Some(x) => {
                        self.record_witness(x);
                        discovered.push(x);
                        probes.push(self.probe(x, rows));
                    }
                }
            }
            return (None, discovered);
        }

        let need = (1usize << (target - r)) - 1;
        if s.len() < need {
            return (None, discovered);
        }
        for (i, &a) in s.iter().enumerate() {
            if stop.load(Ordering::Relaxed) || !self.ctl.tick() {
                break;
            }
            // S' needs 2^{target−r−1} − 1 pairs {c, c + a} from the tail of S
            if s.len() - i - 1 < 2 * ((need - 1) / 2) {
                break;
            }
            if !self.passes(&probes, a) {
                continue;
            }
            let p = a.trailing_zeros();
            let mut next_rows = rows.to_vec();
            next_rows.push(a);
            let next_probes: Vec<Probe> = probes
                .iter()
                .map(|pr| Probe {
                    kmask: pr.kmask & !self.corr(a, pr.xrev),
                    ..*pr
                })
                .collect();
            let next_s: Vec<u64> = s[i + 1..]
                .iter()
                .copied()
                .filter(|&c| (c >> p) & 1 == 0)
                .filter(|&c| s[i + 1..].binary_search(&(c ^ a)).is_ok())
                .filter(|&c| self.passes(&next_probes, c))
                .collect();
            let (found, new) = self.node(&next_rows, next_probes, next_s, target, seen, stop);
            if found.is_some() {
                return (found, discovered);
            }
            for x in new {
                probes.push(self.probe(x, rows));
                discovered.push(x);
            }
        }
        (None, discovered)
    }
}

/// Solves u · s = t in F_2[X]/(X^n − 1). Returns one solution and a basis of {a : a·s = 0}.
fn solve_cyclic(s: u64, t: u64, n: usize) -> Option<(u64, Vec<u64>)> {
    // echelon of the columns X^i·s, tracking which u produced each
    let mut pivots: Vec<(u64, u64)> = Vec::new();
    let mut kernel = Vec::new();
    for i in 0..n {
        let mut v = rotate_word(s, i, n);
        let mut combo = 1u64 << i;
        for &(pv, pc) in &pivots {
            if v >> pv.trailing_zeros() & 1 == 1 {
                v ^= pv;
                combo ^= pc;
            }
        }
        if v == 0 {
            kernel.push(combo);
        } else {
            // keep pivots reduced at their lowest bit
            let lp = v.trailing_zeros();
            for (pv, pc) in pivots.iter_mut() {
                if *pv >> lp & 1 == 1 {
                    *pv ^= v;
                    *pc ^= combo;
                }
            }
            pivots.push((v, combo));
        }
    }
    let mut r = t;
    let mut u = 0u64;
    for &(pv, pc) in &pivots {
        if r >> pv.trailing_zeros() & 1 == 1 {
            r ^= pv;
            u ^= pc;
        }
    }
    (r == 0).then_some((u, kernel))
}

/// A unit in u0 + span(kernel), trying small combinations first.
fn find_unit(u0: u64, kernel: &[u64], is_unit: impl Fn(u64) -> bool) -> Option<u64> {
    if is_unit(u0) {
        return Some(u0);
    }
    let k = kernel.len().min(16);
    (1u64..(1u64 << k))
        .map(|mask| {
            (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .fold(u0, |acc, i| acc ^ kernel[i])
        })
        .find(|&u| is_unit(u))
}

/// Works-together check for packed binary rows of even weight; returns an uncovered x.
pub(crate) fn full_check_words(rows: &[u64], n: usize) -> Option<u64> {
    let mask = word_mask(n);
    if rows.iter().any(|r| r.count_ones() % 2 == 1) {
        return full_check_words_plain(rows, n);
    }
    if n < 3 {
        return full_check_words_plain(rows, n);
    }
    let m = rows.len();
    let mut delta = vec![[0u64; 64]; m];
    for (ri, &r) in rows.iter().enumerate() {
        for j in 0..n {
            delta[ri][j] = cyclic_mul(r, reverse_word(1u64 << j, n as u32), n as u32);
        }
    }
    let mut t: Vec<u64> = (0..m).map(|ri| delta[ri][0]).collect();
    let mut x = 1u64;
    macro_rules! scan {
        ($m:expr) => {{
            let mut tt = [0u64; $m];
            tt.copy_from_slice(&t[..$m]);
            if tt.iter().fold(0, |a, &b| a | b) == mask {
                return Some(x);
            }
            for step in 1u64..(1u64 << (n - 2)) {
                let j = 2 + step.trailing_zeros() as usize;
                x ^= 1u64 << j;
                let mut acc = 0;
                for k in 0..$m {
                    tt[k] ^= delta[k][j];
                    acc |= tt[k];
                }
                if acc == mask {
                    return Some(x);
                }
            }
            None
        }};
    }
    match m {
        1 => scan!(1),
        2 => scan!(2),
        3 => scan!(3),
        4 => scan!(4),
        5 => scan!(5),
        _ => {
            if t.iter().fold(0, |a, &b| a | b) == mask {
                return Some(x);
            }
            for step in 1u64..(1u64 << (n - 2)) {
                let j = 2 + step.trailing_zeros() as usize;
                x ^= 1u64 << j;
                let mut acc = 0;
                for (k, tk) in t.iter_mut().enumerate() {
                    *tk ^= delta[k][j];
                    acc |= *tk;
                }
                if acc == mask {
                    return Some(x);
                }
            }
            None
        }
    }
}

fn full_check_words_plain(rows: &[u64], n: usize) -> Option<u64> {
    let mask = word_mask(n);
    (0..1u64 << n).find(|&x| {
        let xrev = reverse_word(x, n as u32);
        rows.iter().fold(0, |a, &r| a | cyclic_mul(r, xrev, n as u32)) == mask
    })
}

/// Reduced row-echelon form of packed rows (pivot = lowest set bit), sorted.
fn rref_words(rows: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(rows.len());
    for &r in rows {
        let mut v = r;
        for &b in &out {
            if v >> b.trailing_zeros() & 1 == 1 {
                v ^= b;
            }
        }
        if v == 0 {
            continue;
        }
        let p = v.trailing_zeros();
        for b in out.iter_mut() {
            if *b >> p & 1 == 1 {
                *b ^= v;
            }
        }
        out.push(v);
    }
    out.sort_unstable();
    out
}

// ---------------------------------------------------------------------------------------
// generic engine (q > 2): projective representatives + marking oracle
// ---------------------------------------------------------------------------------------

fn generic_search(ambient: Ambient, ctl: &Control) -> Result<HExact> {
    let q = ambient.q() as u64;
    let n = ambient.n();
    let budget = ctl.budget.coverage();
    let total = ambient.size() as u64;
    let normalize = |v: &CycVec| -> CycVec {
        let lead = v.digits().into_iter().find(|&d| d != 0).unwrap_or(1);
        v.scale(crate::gf::inv_mod(lead, q as u8) as u64)
    };
    // projective points that work on their own
    let mut working = Vec::new();
    let mut digits = vec![0u8; n];
    for idx in 1..total {
        let mut t = idx;
        for d in digits.iter_mut() {
            *d = (t % q) as u8;
            t /= q;
        }
        if digits.iter().find(|&&d| d != 0) != Some(&1) {
            continue;
        }
        let v = CycVec::from_digits(ambient, &digits)?;
        if covering::works(&v, budget)? {
            working.push(v);
        }
        if !ctl.tick() {
            break;
        }
    }
    let working_set: HashSet<CycVec> = working.iter().cloned().collect();
    let log_bound = log_floor(q, n as u64);

    let mut best = Basis::empty(ambient);
    if let Some(v) = working.first() {
        best = Basis::from_rows(ambient, std::slice::from_ref(v))?;
    }
    let mut value = best.dim();
    while value >= 1 && value < log_bound && !ctl.aborted() {
        let mut found = None;
        generic_dfs(&working, &working_set, &Basis::empty(ambient), 0, value + 1, &normalize, budget, ctl, &mut found)?;
        match found {
            Some(b) => {
                best = b;
                value += 1;
            }
            None => break,
        }
    }
    Ok(HExact {
        q: q as u8,
        n,
        value: best.dim(),
        witness: best,
        complete: !ctl.aborted(),
        stats: SearchStats::default(),
    })
}

#[allow(clippy::too_many_arguments)]
fn generic_dfs(
    working: &[CycVec],
    working_set: &HashSet<CycVec>,
    current: &Basis,
    from: usize,
    target: usize,
    normalize: &dyn Fn(&CycVec) -> CycVec,
    budget: Budget,
    ctl: &Control,
    found: &mut Option<Basis>,
) -> Result<()> {
    for (i, v) in working.iter().enumerate().skip(from) {
        if found.is_some() || !ctl.tick() {
            return Ok(());
        }
        if current.contains(v) {
            continue;
        }
        let next = current.extended(v)?;
        // every element of a working span works
        if !next.elements().iter().filter(|e| !e.is_zero()).all(|e| working_set.contains(&normalize(e))) {
            continue;
        }
        if next.dim() == target {
            ctl.full_checks.fetch_add(1, Ordering::Relaxed);
            if covering::works_together(&next, budget)?.covers {
                *found = Some(next);
                return Ok(());
            }
        } else {
            generic_dfs(working, working_set, &next, i + 1, target, normalize, budget, ctl, found)?;
        }
    }
    Ok(())
}
