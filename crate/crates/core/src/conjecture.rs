//! Checks that every v working together with ê is symmetric, for odd n.
//!
//! Candidates pass a pipeline of necessary conditions, cheapest first; only survivors get
//! the full coverage check. The reductions used (index scalings, v ↦ v + ê) map the pair
//! (ê, v) to a pair spanning the image subspace, so one representative per orbit is
//! checked and the orbit is reinstated (and rechecked) at the end.

use std::collections::BTreeSet;

use parking_lot::Mutex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{cyclic_mul, reverse_word};
use crate::covering::Budget;
use crate::error::{Error, Result};
use crate::gf::{gcd_u64, word_mask, Ambient, CycVec};
use crate::search::{full_check_words, scale_word};

/// Which filters run; switching any of them off must not change the exception set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filters {
    pub v0_zero: bool,
    pub even_weight: bool,
    pub skip_symmetric: bool,
    pub orbit_rep: bool,
    pub probes: bool,
    pub cache: bool,
}

impl Default for Filters {
    fn default() -> Self {
        Filters {
            v0_zero: true,
            even_weight: true,
            skip_symmetric: true,
            orbit_rep: true,
            probes: true,
            cache: true,
        }
    }
}

impl Filters {
    pub fn none() -> Self {
        Filters {
            v0_zero: false,
            even_weight: false,
            skip_symmetric: false,
            orbit_rep: false,
            probes: false,
            cache: false,
        }
    }
}

/// Candidates removed by each stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub v0_nonzero: u64,
    pub odd_weight: u64,
    pub symmetric: u64,
    pub not_orbit_rep: u64,
    pub probe: u64,
    pub cache: u64,
    pub full_check: u64,
    /// Candidates that passed the full check.
    pub passed: u64,
}

impl FilterStats {
    fn merge(mut self, o: FilterStats) -> FilterStats {
        self.v0_nonzero += o.v0_nonzero;
        self.odd_weight += o.odd_weight;
        self.symmetric += o.symmetric;
        self.not_orbit_rep += o.not_orbit_rep;
        self.probe += o.probe;
        self.cache += o.cache;
        self.full_check += o.full_check;
        self.passed += o.passed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub n: usize,
    #[serde(rename = "scanned")]
    pub candidates_scanned: u64,
    /// Non-symmetric v with v_0 = 0 working together with ê, sorted.
    pub exceptions: Vec<CycVec>,
    pub orbits: Vec<Vec<CycVec>>,
    pub filter_stats: FilterStats,
}

pub fn verify_conjecture(n: usize, budget: Budget) -> Result<ConjectureReport> {
    verify_conjecture_with(n, budget, Filters::default(), 1)
}

/// Runs the pipeline with the chosen filters on `threads` workers.
pub fn verify_conjecture_with(
    n: usize,
    budget: Budget,
    filters: Filters,
    threads: usize,
) -> Result<ConjectureReport> {
    if n % 2 == 0 {
        return Err(Error::Precondition(format!("n = {n} is even")));
    }
    let ambient = Ambient::binary(n)?;
    budget.check(ambient)?;
    if n > 63 {
        return Err(Error::InvalidLength(n));
    }
    let scan = Scanner::new(n, filters);

    // shard on the top bits of the candidate word; shards walk their low bits in Gray order
    let total_bits = n as u32;
    let shard_bits = total_bits.saturating_sub(12).min(8);
    let low_bits = total_bits - shard_bits;
    let shards: Vec<u64> = (0..1u64 << shard_bits).collect();
    let run = |s: &u64| scan.shard(*s, low_bits);
    let parts: Vec<(Vec<u64>, FilterStats, u64)> = if threads <= 1 {
        shards.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Precondition(e.to_string()))?;
        pool.install(|| shards.par_iter().map(run).collect())
    };

    let mut reps = BTreeSet::new();
    let mut stats = FilterStats::default();
    let mut scanned = 0;
    for (found, st, sc) in parts {
        reps.extend(found);
        stats = stats.merge(st);
        scanned += sc;
    }

    // reinstate orbits and recheck every member
    let mut all = BTreeSet::new();
    for &v in &reps {
        for w in scan.orbit(v) {
            if scan.is_symmetric(w) || all.contains(&w) {
                continue;
            }
            if full_check_words(&[scan.e_hat, w], n).is_some() {
                return Err(Error::Precondition(format!(
                    "orbit image {} of an exception fails to work with ê",
                    literal(w, n)
                )));
            }
            all.insert(w);
        }
    }
    let mut exceptions: Vec<CycVec> = all
        .iter()
        .map(|&w| CycVec::from_word(ambient, w))
        .collect::<Result<_>>()?;
    exceptions.sort();
    let mut report = ConjectureReport {
        n,
        candidates_scanned: scanned,
        exceptions,
        orbits: Vec::new(),
        filter_stats: stats,
    };
    report.orbits = exception_orbits(&report)?;
    Ok(report)
}

/// Groups exceptions under index scalings and v ↦ v + ê. Fails if the list is not closed
/// under these actions.
pub fn exception_orbits(report: &ConjectureReport) -> Result<Vec<Vec<CycVec>>> {
    let n = report.n;
    let ambient = Ambient::binary(n)?;
    let e_hat = CycVec::e_hat(ambient);
    let set: BTreeSet<&CycVec> = report.exceptions.iter().collect();
    let mut done: BTreeSet<CycVec> = BTreeSet::new();
    let mut orbits = Vec::new();
    for v in &report.exceptions {
        if done.contains(v) {
            continue;
        }
        let mut orbit = vec![v.clone()];
        let mut i = 0;
        while i < orbit.len() {
            let cur = orbit[i].clone();
            let mut images = vec![cur.add(&e_hat)?];
            for ell in 1..n {
                if gcd_u64(ell as u64, n as u64) == 1 {
                    images.push(cur.scale_indices(ell as i64)?);
                }
            }
            for w in images {
                if !set.contains(&w) {
                    return Err(Error::Precondition(format!(
                        "exception list not closed: {} missing",
                        w.literal()
                    )));
                }
                if !orbit.contains(&w) {
                    orbit.push(w);
                }
            }
            i += 1;
        }
        orbit.sort();
        done.extend(orbit.iter().cloned());
        orbits.push(orbit);
    }
    Ok(orbits)
}

fn literal(w: u64, n: usize) -> String {
    (0..n).map(|i| if w >> i & 1 == 1 { '1' } else { '0' }).collect()
}

struct Scanner {
    n: usize,
    filters: Filters,
    e_hat: u64,
    units: Vec<usize>,
    /// Weight-3 probes x = e_0 + e_i + e_{−j}: (reversed x, shifts where ê·σ^k x = 0).
    probes: Vec<(u64, u64)>,
    /// Shared probes built from uncovered vectors found by full checks.
    cache: Mutex<Vec<(u64, u64)>>,
}

const CACHE_CAP: usize = 4096;

impl Scanner {
    fn new(n: usize, filters: Filters) -> Self {
        let mask = word_mask(n);
        let e_hat = mask & !1;
        let units = (2..n).filter(|&l| gcd_u64(l as u64, n as u64) == 1).collect();
        let mut probes = Vec::new();
        if filters.probes {
            for i in 1..n {
                for j in i + 1..n {
                    let x = 1 | (1u64 << i) | (1u64 << j);
                    probes.push(Self::probe_of(x, e_hat, n));
                }
            }
        }
        Scanner {
            n,
            filters,
            e_hat,
            units,
            probes,
            cache: Mutex::new(Vec::new()),
        }
    }

    fn probe_of(x: u64, e_hat: u64, n: usize) -> (u64, u64) {
        let xrev = reverse_word(x, n as u32);
        let free = !cyclic_mul(e_hat, xrev, n as u32) & word_mask(n);
        (xrev, free)
    }

    /// True if some shift of x is orthogonal to both ê and v.
    #[inline]
    fn survives(&self, v: u64, probe: (u64, u64)) -> bool {
        probe.1 & !cyclic_mul(v, probe.0, self.n as u32) != 0
    }

    fn is_symmetric(&self, v: u64) -> bool {
        reverse_word(v, self.n as u32) == v
    }

    fn orbit(&self, v: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(2 * (self.units.len() + 1));
        for w in [v, v ^ self.e_hat] {
            out.push(w);
            out.extend(self.units.iter().map(|&l| scale_word(w, l, self.n)));
        }
        out
    }

    /// True if no orbit image is smaller than v.
    fn is_orbit_rep(&self, v: u64) -> bool {
        let w = v ^ self.e_hat;
        if w < v {
            return false;
        }
        self.units
            .iter()
            .all(|&l| scale_word(v, l, self.n) >= v && scale_word(w, l, self.n) >= v)
    }

    fn shard(&self, high: u64, low_bits: u32) -> (Vec<u64>, FilterStats, u64) {
        let mut st = FilterStats::default();
        let mut found = Vec::new();
        let mut local: Vec<(u64, u64)> = if self.filters.cache {
            self.cache.lock().clone()
        } else {
            Vec::new()
        };
        let mut scanned = 0;
        for i in 0..1u64 << low_bits {
            let v = (high << low_bits) | (i ^ (i >> 1));
            scanned += 1;
            if self.filters.v0_zero && v & 1 == 1 {
                st.v0_nonzero += 1;
                continue;
            }
            if self.filters.even_weight && v.count_ones() % 2 == 1 {
                st.odd_weight += 1;
                continue;
            }
            if self.filters.skip_symmetric && self.is_symmetric(v) {
                st.symmetric += 1;
                continue;
            }
            if self.filters.orbit_rep && !self.is_orbit_rep(v) {
                st.not_orbit_rep += 1;
                continue;
            }
            if !self.probes.iter().all(|&p| self.survives(v, p)) {
                st.probe += 1;
                continue;
            }
            if let Some(pos) = local.iter().position(|&p| !self.survives(v, p)) {
                // move the killer forward
                local[..=pos].rotate_right(1);
                st.cache += 1;
                continue;
            }
            match full_check_words(&[self.e_hat, v], self.n) {
                Some(x) => {
                    st.full_check += 1;
                    if self.filters.cache {
                        let p = Self::probe_of(x, self.e_hat, self.n);
                        if local.len() >= CACHE_CAP {
                            local.pop();
                        }
                        local.insert(0, p);
                        // lossy: a busy lock just drops the witness
                        if let Some(mut c) = self.cache.try_lock() {
                            if c.len() < CACHE_CAP {
                                c.push(p);
                            }
                        }
                    }
                }
                None => {
                    st.passed += 1;
                    if !self.is_symmetric(v) {
                        found.push(v);
                    }
                }
            }
        }
        (found, st, scanned)
    }
}
