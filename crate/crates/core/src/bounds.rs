//! Interval bounds on h_q(n) from known theorems, iterated to a fixed point over the
//! divisor lattice of n, optionally escalated to exact search.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gf::{gcd_u64, is_prime_u64, Basis};
use crate::poly::order_mod;
use crate::search::{h_exact, log_floor, SearchBudget};

/// Why a bound holds. Each tag carries the parameters needed to re-derive it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum Rule {
    /// h_q(n) ≤ ⌊log_q n⌋
    LogBound,
    /// h_q(ℓ·p^d) = 0 for ℓ < q, where p = q is the characteristic
    PowerOfCharZero { l: u64, d: u32 },
    /// h_2(2m) ≤ 2·h_2(m)
    Halving { m: u64 },
    /// h_q(p·m) ≤ p·h_q(m) for p the characteristic (q odd)
    CharMultiple { p: u64, m: u64 },
    /// h_q(mn) ≥ h_q(m) + h_q(n)
    ProductBound { m: u64, n: u64 },
    /// n prime with q a primitive root: h_2(n) ≤ 2, and h_q(n) = 0 for odd q < n
    ArtinExact { p: u64 },
    /// h_q(q^d − 1) = d − 1
    QdMinusOne { d: u32 },
    /// n = Σ_{r=0..d} q^{kr} with gcd(d+1, q^k − 1) = 1 gives h_q(n) = kd
    GeometricSeries { k: u32, d: u32 },
    /// h_2(n) ≥ 2 for odd n > 3
    OddAtLeastTwo,
    /// Exhaustive search; a lower bound carries its witness.
    BruteForce { witness: Option<Basis> },
    /// A value supplied from a cache of earlier results.
    Cached,
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rule::LogBound => write!(f, "LogBound"),
            Rule::PowerOfCharZero { l, d } => write!(f, "PowerOfCharZero({l},{d})"),
            Rule::Halving { m } => write!(f, "Halving({m})"),
            Rule::CharMultiple { p, m } => write!(f, "CharMultiple({p},{m})"),
            Rule::ProductBound { m, n } => write!(f, "ProductBound({m},{n})"),
            Rule::ArtinExact { p } => write!(f, "ArtinExact({p})"),
            Rule::QdMinusOne { d } => write!(f, "QdMinusOne({d})"),
            Rule::GeometricSeries { k, d } => write!(f, "GeometricSeries({k},{d})"),
            Rule::OddAtLeastTwo => write!(f, "OddAtLeastTwo"),
            Rule::BruteForce { .. } => write!(f, "BruteForce"),
            Rule::Cached => write!(f, "Cached"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsRecord {
    pub q: u8,
    pub n: u64,
    pub lower: u64,
    pub upper: u64,
    pub lower_rules: Vec<Rule>,
    pub upper_rules: Vec<Rule>,
    /// Set when an escalation ran out of budget before settling the row.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub incomplete: bool,
}

impl BoundsRecord {
    fn trivial(q: u8, n: u64) -> Self {
        BoundsRecord {
            q,
            n,
            lower: 0,
            upper: log_floor(q as u64, n) as u64,
            lower_rules: Vec::new(),
            upper_rules: vec![Rule::LogBound],
            incomplete: false,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    /// Raises the lower bound; returns true if it moved. A rule matching the current
    /// bound is recorded as an alternative source.
    pub fn raise(&mut self, value: u64, rule: Rule) -> bool {
        if value > self.lower {
            self.lower = value;
            self.lower_rules = vec![rule];
            true
        } else {
            if value == self.lower && value > 0 && !self.lower_rules.contains(&rule) {
                self.lower_rules.push(rule);
            }
            false
        }
    }

    /// Lowers the upper bound; returns true if it moved.
    pub fn cut(&mut self, value: u64, rule: Rule) -> bool {
        if value < self.upper {
            self.upper = value;
            self.upper_rules = vec![rule];
            true
        } else {
            if value == self.upper && !self.upper_rules.contains(&rule) {
                self.upper_rules.push(rule);
            }
            false
        }
    }
}

/// Largest n the divisor enumeration accepts.
pub const MAX_N: u64 = 1_000_000;

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Rule engine with a store of externally known records (exact search results, cache).
#[derive(Debug, Clone, Default)]
pub struct BoundsEngine {
    known: BTreeMap<(u8, u64), BoundsRecord>,
}

impl BoundsEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a record; later derivations intersect with it.
    pub fn insert(&mut self, record: BoundsRecord) {
        let key = (record.q, record.n);
        match self.known.get_mut(&key) {
            Some(old) => {
                old.raise(record.lower, first_or_cached(&record.lower_rules));
                old.cut(record.upper, first_or_cached(&record.upper_rules));
                old.incomplete = !old.is_exact() && (old.incomplete || record.incomplete);
            }
            None => {
                self.known.insert(key, record);
            }
        }
    }

    /// Best interval for h_q(n) from the theorem set and the known records.
    pub fn bounds(&self, q: u8, n: u64) -> BoundsRecord {
        assert!(n >= 1 && n <= MAX_N, "n out of range for the rule engine");
        let divs = divisors(n);
        let mut recs: BTreeMap<u64, BoundsRecord> =
            divs.iter().map(|&d| (d, self.direct(q, d))).collect();
        // only divisor-to-multiple rules remain; iterate until nothing moves
        loop {
            let mut changed = false;
            for &m in &divs {
                for &a in &divs {
                    if a == 1 || a > m || m % a != 0 {
                        continue;
                    }
                    let b = m / a;
                    if a > b {
                        continue;
                    }
                    let lo = recs[&a].lower + recs[&b].lower;
                    changed |= recs
                        .get_mut(&m)
                        .unwrap()
                        .raise(lo, Rule::ProductBound { m: a, n: b });
                }
                let p = q as u64;
                if m % p == 0 && m > p {
                    let sub = m / p;
                    let hi = p * recs[&sub].upper;
                    let rule = if q == 2 {
                        Rule::Halving { m: sub }
                    } else {
                        Rule::CharMultiple { p, m: sub }
                    };
                    changed |= recs.get_mut(&m).unwrap().cut(hi, rule);
                }
            }
            if !changed {
                break;
            }
        }
        let mut out = recs.remove(&n).unwrap();
        if out.lower > out.upper {
            // a contradiction can only come from a wrong cached record
            out.incomplete = true;
        }
        out
    }

    /// Rules that mention n alone, plus known records for n.
    fn direct(&self, q: u8, n: u64) -> BoundsRecord {
        let qq = q as u64;
        let mut r = BoundsRecord::trivial(q, n);
        // h_q(ℓ q^d) = 0 for ℓ < q
        let (mut l, mut d) = (n, 0u32);
        while l % qq == 0 {
            l /= qq;
            d += 1;
        }
        if l < qq {
            r.cut(0, Rule::PowerOfCharZero { l, d });
        }
        if is_prime_u64(n) && n > qq && order_mod(qq, n).is_ok_and(|f| f.irreducible) {
            r.cut(if q == 2 { 2 } else { 0 }, Rule::ArtinExact { p: n });
        }
        // q^d − 1
        let mut pw = qq;
        let mut d = 1u32;
        while pw - 1 <= n {
            if pw - 1 == n {
                r.raise((d - 1) as u64, Rule::QdMinusOne { d });
                r.cut((d - 1) as u64, Rule::QdMinusOne { d });
            }
            pw = match pw.checked_mul(qq) {
                Some(x) => x,
                None => break,
            };
            d += 1;
        }
        // Σ_{r=0..d} q^{kr}
        let mut k = 1u32;
        while qq.saturating_pow(k) <= n {
            let base = qq.pow(k);
            let (mut sum, mut term, mut dd) = (1u64, 1u64, 0u32);
            while sum < n {
                term = term.saturating_mul(base);
                sum = sum.saturating_add(term);
                dd += 1;
            }
            if sum == n && dd >= 1 && gcd_u64((dd + 1) as u64, base - 1) == 1 {
                let v = (k * dd) as u64;
                r.raise(v, Rule::GeometricSeries { k, d: dd });
                r.cut(v, Rule::GeometricSeries { k, d: dd });
            }
            k += 1;
        }
        if q == 2 && n % 2 == 1 && n > 3 {
            r.raise(2, Rule::OddAtLeastTwo);
        }
        if let Some(known) = self.known.get(&(q, n)) {
            r.raise(known.lower, first_or_cached(&known.lower_rules));
            r.cut(known.upper, first_or_cached(&known.upper_rules));
            r.incomplete = known.incomplete && !r.is_exact();
        }
        r
    }

    /// Settles h_q(n) by exhaustive search and records the result.
    pub fn escalate(&mut self, q: u8, n: u64, budget: SearchBudget) -> Result<BoundsRecord> {
        let mut rec = self.bounds(q, n);
        if rec.is_exact() {
            return Ok(rec);
        }
        let h = h_exact(q as u32, n as usize, budget)?;
        let witness = Some(h.witness.clone());
        rec.raise(h.value as u64, Rule::BruteForce { witness });
        if h.complete {
            rec.cut(h.value as u64, Rule::BruteForce { witness: None });
            rec.incomplete = false;
        } else {
            rec.incomplete = true;
        }
        self.insert(rec.clone());
        Ok(rec)
    }
}

fn first_or_cached(rules: &[Rule]) -> Rule {
    rules.first().cloned().unwrap_or(Rule::Cached)
}

/// Interval for h_q(n) from the theorem set alone.
pub fn bounds(q: u8, n: u64) -> BoundsRecord {
    BoundsEngine::new().bounds(q, n)
}

/// Rows 1..=max_n. With `escalate`, open rows whose q^n fits the budget are settled by
/// exact search, in increasing n so that later rows can build on them.
pub fn table(q: u8, max_n: u64, escalate: bool, budget: SearchBudget) -> Result<Vec<BoundsRecord>> {
    table_with(&mut BoundsEngine::new(), q, max_n, escalate, budget)
}

pub fn table_with(
    engine: &mut BoundsEngine,
    q: u8,
    max_n: u64,
    escalate: bool,
    budget: SearchBudget,
) -> Result<Vec<BoundsRecord>> {
    let bits_per = (q as f64).log2();
    let mut rows = Vec::with_capacity(max_n as usize);
    for n in 1..=max_n {
        let mut rec = engine.bounds(q, n);
        let fits = (n as f64) * bits_per <= budget.max_map_bits as f64;
        if escalate && !rec.is_exact() && fits {
            rec = engine.escalate(q, n, budget)?;
        } else if escalate && !rec.is_exact() {
            rec.incomplete = true;
        }
        rows.push(rec);
    }
    // a settled row can tighten earlier ones only through larger multiples, which the
    // rules never use downward, so one pass suffices
    Ok(rows)
}
