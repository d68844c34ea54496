//! Command-line front end: argument parsing, JSON/CSV/text output, exit codes, and the
//! on-disk result cache.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{BoundsEngine, BoundsRecord, Rule};
use crate::cayley::{self, BadSubgraphCert, Colors, Mode};
use crate::conjecture::{verify_conjecture_with, ConjectureReport, Filters};
use crate::covering::{self, Budget};
use crate::error::{Error, Result};
use crate::gf::{Ambient, Basis, CycVec};
use crate::poly::{self, CycPoly};
use crate::search::{h_exact_with, SearchBudget, SearchConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

pub const CACHE_VERSION: u32 = 1;
pub const DEFAULT_CACHE: &str = "./cyccover-cache.json";
const DEFAULT_BUDGET_BITS: u32 = 28;

#[derive(Debug, Parser)]
#[command(name = "cyccover", version, about = "Cyclically covering subspaces: predicates, search and bounds")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads (overrides CYCCOVER_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// log2 of the largest q^n handled (overrides CYCCOVER_BUDGET_BITS).
    #[arg(long, global = true)]
    budget_bits: Option<u32>,
    /// Single thread, fixed order, no timings: identical input gives identical output.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Read and update a result cache (default path ./cyccover-cache.json).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = DEFAULT_CACHE)]
    cache: Option<PathBuf>,
    /// Wrap the result with a run manifest.
    #[arg(long, global = true)]
    manifest: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Does v work (every x has a shift orthogonal to v)?
    Works {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        q: u32,
        v: String,
    },
    /// Do the given vectors work together?
    Together {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(required = true)]
        vs: Vec<String>,
    },
    /// List W(n), the binary vectors that work.
    WEnum {
        #[arg(long)]
        n: usize,
    },
    /// Girth of the circulant digraph on Z/n with the given generators.
    Girth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gens: String,
    },
    /// Find or verify a bad subgraph of G_v (coloured with --pair).
    Badsub {
        #[arg(long)]
        n: usize,
        v: String,
        #[arg(long)]
        pair: Option<String>,
        /// Vertex list to check instead of searching.
        #[arg(long)]
        verify: Option<String>,
        #[arg(long, default_value = "out")]
        mode: String,
    },
    /// Exact h_q(n) by search.
    H {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<u64>,
    },
    /// Interval for h_q(n) from the rule set (and the cache).
    Bounds {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        n: u64,
    },
    /// Rows 1..=max of the bounds table.
    Table {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        max: u64,
        /// Settle open rows by exact search.
        #[arg(long)]
        escalate: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Look for non-symmetric v working together with ê.
    Conjecture {
        #[arg(long, conflicts_with = "range", required_unless_present = "range")]
        n: Option<usize>,
        /// Inclusive range A..B; even n are skipped.
        #[arg(long)]
        range: Option<String>,
        /// Disable all filters (slow; for cross-checks).
        #[arg(long)]
        no_filters: bool,
    },
    /// Rewrite a working tuple for a prime p so that its first vector is ê.
    Normalize {
        #[arg(long)]
        p: usize,
        #[arg(required = true)]
        vs: Vec<String>,
    },
    /// Certificate that a nonzero v ∈ F_q^p does not work.
    CertifyFail {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        p: usize,
        v: String,
    },
}

/// Process-level result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub version: String,
    pub budget_bits: u32,
    pub threads: usize,
    /// Omitted in deterministic runs.
    pub wall_ms: Option<u64>,
    /// SHA-256 of the compact JSON result.
    pub digest: String,
}

pub fn digest(result: &Value) -> String {
    let bytes = serde_json::to_vec(result).expect("serializable");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolved run settings.
#[derive(Debug, Clone)]
struct Settings {
    pretty: bool,
    threads: usize,
    budget_bits: u32,
    deterministic: bool,
    cache: Option<PathBuf>,
}

fn env_number<T: std::str::FromStr>(name: &str) -> std::result::Result<Option<T>, String> {
    match std::env::var(name) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{name}={s:?} is not a valid number")),
        Err(_) => Ok(None),
    }
}

/// Runs the CLI on `argv` (including the program name).
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let usage = |msg: String| Outcome {
        code: EXIT_USAGE,
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
    };
    let env_threads = match env_number::<usize>("CYCCOVER_THREADS") {
        Ok(t) => t,
        Err(m) => return usage(m),
    };
    let env_bits = match env_number::<u32>("CYCCOVER_BUDGET_BITS") {
        Ok(b) => b,
        Err(m) => return usage(m),
    };
    let g = &cli.global;
    let default_threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let settings = Settings {
        pretty: g.pretty,
        threads: if g.deterministic {
            1
        } else {
            g.threads.or(env_threads).unwrap_or(default_threads).max(1)
        },
        budget_bits: g.budget_bits.or(env_bits).unwrap_or(DEFAULT_BUDGET_BITS).min(40),
        deterministic: g.deterministic,
        cache: g.cache.clone(),
    };

    let start = Instant::now();
    let run = execute(&cli.cmd, &settings);
    let (value, text, code) = match run {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                code: exit_code(&e),
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let stdout = if settings.pretty {
        text.unwrap_or_else(|| serde_json::to_string_pretty(&value).expect("serializable") + "\n")
    } else if g.manifest {
        let manifest = RunManifest {
            command: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            budget_bits: settings.budget_bits,
            threads: settings.threads,
            wall_ms: (!settings.deterministic).then(|| start.elapsed().as_millis() as u64),
            digest: digest(&value),
        };
        serde_json::to_string(&json!({ "result": value, "manifest": manifest })).expect("serializable")
            + "\n"
    } else {
        // CSV output arrives as text and is emitted verbatim
        match (&cli.cmd, text) {
            (Command::Table { csv: true, .. }, Some(t)) => t,
            _ => serde_json::to_string(&value).expect("serializable") + "\n",
        }
    };
    Outcome {
        code,
        stdout,
        stderr: String::new(),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MalformedLiteral { .. } => EXIT_DATA,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::InvalidModulus(_)
        | Error::InvalidLength(_)
        | Error::AmbientMismatch { .. }
        | Error::NotCoprime { .. }
        | Error::RequiresBinary(_)
        | Error::DependentRows
        | Error::NotPrime(_)
        | Error::Precondition(_) => EXIT_PRECONDITION,
        Error::CacheVersion { .. } | Error::CacheConflict { .. } | Error::Io(_) => EXIT_FAILURE,
    }
}

/// Any failure to read a command-line vector is a malformed literal.
fn literal(ambient: Ambient, s: &str) -> Result<CycVec> {
    CycVec::parse(ambient, s).map_err(|e| match e {
        Error::MalformedLiteral { .. } => e,
        other => Error::MalformedLiteral {
            literal: s.to_string(),
            reason: other.to_string(),
        },
    })
}

fn comma_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<i64>().map_err(|_| Error::MalformedLiteral {
                literal: s.to_string(),
                reason: format!("{t:?} is not an integer"),
            })
        })
        .collect()
}

type Rendered = (Value, Option<String>, i32);

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn execute(cmd: &Command, s: &Settings) -> Result<Rendered> {
    let budget = Budget::bits(s.budget_bits);
    match cmd {
        Command::Works { n, q, v } => {
            let ambient = Ambient::new(*q, *n)?;
            let v = literal(ambient, v)?;
            let report = if v.is_zero() {
                None
            } else {
                Some(covering::works_together(&Basis::from_rows(ambient, &[v.clone()])?, budget)?)
            };
            let works = report.as_ref().is_none_or(|r| r.covers);
            let closed_form = if *q == 2 { Some(poly::works_closed_form(&v)?) } else { None };
            let witness = report.and_then(|r| r.witness);
            Ok((json!({ "works": works, "closed_form": closed_form, "witness": witness }), None, EXIT_OK))
        }
        Command::Together { n, q, vs } => {
            let ambient = Ambient::new(*q, *n)?;
            let rows = vs.iter().map(|v| literal(ambient, v)).collect::<Result<Vec<_>>>()?;
            let basis = Basis::from_rows(ambient, &rows)?;
            let report = covering::works_together(&basis, budget)?;
            Ok((to_value(&report), None, EXIT_OK))
        }
        Command::WEnum { n } => {
            let basis = covering::w_basis(*n)?;
            let vectors: Vec<CycVec> = covering::enumerate_w(*n, budget)?.collect();
            let text = s.pretty.then(|| {
                let mut t = format!("W({n}): dimension {}, {} vectors\n", basis.dim(), vectors.len());
                for v in &vectors {
                    t.push_str(&v.literal());
                    t.push('\n');
                }
                t
            });
            let value = json!({
                "n": n,
                "dim": basis.dim(),
                "basis": basis.literals(),
                "count": vectors.len(),
                "vectors": vectors,
            });
            Ok((value, text, EXIT_OK))
        }
        Command::Girth { n, gens } => {
            let list = comma_list(gens)?;
            let g = cayley::CirculantDigraph::new(*n, &list)?;
            let k = g.girth()?;
            Ok((json!({ "n": n, "gens": g.generators(), "girth": k }), None, EXIT_OK))
        }
        Command::Badsub { n, v, pair, verify, mode } => {
            let ambient = Ambient::binary(*n)?;
            let v = literal(ambient, v)?;
            let w = pair.as_deref().map(|w| literal(ambient, w)).transpose()?;
            let mode = match mode.as_str() {
                "out" => Mode::Out,
                "in" => Mode::In,
                other => {
                    return Err(Error::MalformedLiteral {
                        literal: other.to_string(),
                        reason: "mode is `out` or `in`".into(),
                    })
                }
            };
            if let Some(list) = verify {
                let vertices: Vec<usize> = comma_list(list)?
                    .into_iter()
                    .map(|x| x.rem_euclid(*n as i64) as usize)
                    .collect();
                let cert = BadSubgraphCert {
                    n: *n,
                    vertices,
                    mode,
                    colors: w.as_ref().map(|w| Colors::from_pair(&v, w)),
                };
                let valid = match &w {
                    Some(w) => cayley::verify_bad_subgraph_colored(&v, w, &cert),
                    None => cayley::verify_bad_subgraph(&v, &cert),
                };
                return Ok((json!({ "certificate": cert, "valid": valid }), None, EXIT_OK));
            }
            let cert = match &w {
                Some(w) => cayley::find_bad_subgraph_colored(&v, w, budget)?,
                None => cayley::find_bad_subgraph(&v, budget)?,
            };
            let valid = cert.as_ref().map(|c| match &w {
                Some(w) => cayley::verify_bad_subgraph_colored(&v, w, c),
                None => cayley::verify_bad_subgraph(&v, c),
            });
            Ok((json!({ "certificate": cert, "valid": valid }), None, EXIT_OK))
        }
        Command::H { q, n, max_nodes, time_limit } => {
            let sb = SearchBudget {
                max_map_bits: s.budget_bits,
                max_nodes: max_nodes.unwrap_or(u64::MAX),
                thread_count: s.threads,
                time_limit: time_limit.map(Duration::from_secs),
            };
            let config = SearchConfig {
                deterministic: s.deterministic,
                ..Default::default()
            };
            let mut h = h_exact_with(*q, *n, sb, config)?;
            if s.deterministic {
                h.stats.elapsed_ms = 0;
            }
            if let Some(path) = &s.cache {
                let mut rec = BoundsEngine::new().bounds(h.q, h.n as u64);
                rec.raise(h.value as u64, Rule::BruteForce { witness: Some(h.witness.clone()) });
                if h.complete {
                    rec.cut(h.value as u64, Rule::BruteForce { witness: None });
                }
                cache_merge(path, &[rec])?;
            }
            let code = if h.complete { EXIT_OK } else { EXIT_BUDGET };
            Ok((to_value(&h), None, code))
        }
        Command::Bounds { q, n } => {
            let q = checked_q(*q)?;
            if *n == 0 || *n > crate::bounds::MAX_N {
                return Err(Error::Precondition(format!("n must be in 1..={}", crate::bounds::MAX_N)));
            }
            let engine = load_engine(s)?;
            let rec = engine.bounds(q, *n);
            let text = s.pretty.then(|| render_rows(std::slice::from_ref(&rec)));
            Ok((to_value(&rec), text, EXIT_OK))
        }
        Command::Table { q, max, escalate, csv } => {
            let q = checked_q(*q)?;
            if *max > crate::bounds::MAX_N {
                return Err(Error::Precondition(format!("max must be at most {}", crate::bounds::MAX_N)));
            }
            let mut engine = load_engine(s)?;
            let sb = SearchBudget {
                max_map_bits: s.budget_bits,
                thread_count: s.threads,
                ..Default::default()
            };
            let rows = crate::bounds::table_with(&mut engine, q, *max, *escalate, sb)?;
            if let Some(path) = &s.cache {
                cache_merge(path, &rows)?;
            }
            let text = if *csv {
                Some(render_csv(&rows))
            } else {
                s.pretty.then(|| render_rows(&rows))
            };
            let code = if rows.iter().any(|r| r.incomplete) { EXIT_BUDGET } else { EXIT_OK };
            Ok((to_value(&rows), text, code))
        }
        Command::Conjecture { n, range, no_filters } => {
            let ns: Vec<usize> = match (n, range) {
                (Some(n), _) => vec![*n],
                (None, Some(r)) => parse_range(r)?.filter(|n| n % 2 == 1).collect(),
                (None, None) => unreachable!("clap requires one of --n/--range"),
            };
            let filters = if *no_filters { Filters::none() } else { Filters::default() };
            let reports = ns
                .iter()
                .map(|&n| verify_conjecture_with(n, budget, filters, s.threads))
                .collect::<Result<Vec<ConjectureReport>>>()?;
            let text = s.pretty.then(|| render_conjecture(&reports));
            let value = if n.is_some() { to_value(&reports[0]) } else { to_value(&reports) };
            Ok((value, text, EXIT_OK))
        }
        Command::Normalize { p, vs } => {
            let ambient = Ambient::binary(*p)?;
            let rows = vs.iter().map(|v| literal(ambient, v)).collect::<Result<Vec<_>>>()?;
            let out = poly::normalize_to_e(&rows, *p, budget)?;
            Ok((json!({ "p": p, "vectors": out }), None, EXIT_OK))
        }
        Command::CertifyFail { q, p, v } => {
            let ambient = Ambient::new(*q, *p)?;
            let v = literal(ambient, v)?;
            let x = poly::failure_certificate(&v, *p)?;
            let product = CycPoly::from_vec(&v).mul_mod(&CycPoly::from_vec(&x))?.to_vec();
            Ok((
                json!({ "v": v, "x": x, "product": product, "uncovered": x.reverse() }),
                None,
                EXIT_OK,
            ))
        }
    }
}

fn checked_q(q: u32) -> Result<u8> {
    Ambient::new(q, 1)?;
    Ok(q as u8)
}

fn parse_range(r: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::MalformedLiteral {
        literal: r.to_string(),
        reason: "expected A..B".into(),
    };
    let (a, b) = r.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    Ok(a..=b)
}

fn load_engine(s: &Settings) -> Result<BoundsEngine> {
    let mut engine = BoundsEngine::new();
    if let Some(path) = &s.cache {
        for rec in read_cache(path)?.records.into_values() {
            engine.insert(rec);
        }
    }
    Ok(engine)
}

fn rules_text(rules: &[Rule]) -> String {
    rules.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ")
}

fn render_rows(rows: &[BoundsRecord]) -> String {
    let mut t = format!("{:>5}  {:>8}  {:<28}  {:<28}\n", "n", "(l,u)", "lower", "upper");
    for r in rows {
        let mark = if r.incomplete { " *" } else { "" };
        t.push_str(&format!(
            "{:>5}  {:>8}  {:<28}  {:<28}{mark}\n",
            r.n,
            format!("({},{})", r.lower, r.upper),
            rules_text(&r.lower_rules),
            rules_text(&r.upper_rules),
        ));
    }
    t
}

fn render_csv(rows: &[BoundsRecord]) -> String {
    let mut t = String::from("q,n,lower,upper,exact,lower_rules,upper_rules\n");
    for r in rows {
        t.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.q,
            r.n,
            r.lower,
            r.upper,
            r.is_exact(),
            rules_text(&r.lower_rules),
            rules_text(&r.upper_rules)
        ));
    }
    t
}

fn render_conjecture(reports: &[ConjectureReport]) -> String {
    let mut t = String::new();
    for r in reports {
        t.push_str(&format!(
            "n = {}: scanned {}, {} exceptions in {} orbits\n",
            r.n,
            r.candidates_scanned,
            r.exceptions.len(),
            r.orbits.len()
        ));
        for (i, orbit) in r.orbits.iter().enumerate() {
            let lits: Vec<String> = orbit.iter().map(|v| v.literal()).collect();
            t.push_str(&format!("  orbit {} ({}): {}\n", i + 1, orbit.len(), lits.join(" ")));
        }
    }
    t
}

/// Versioned cache file: {"version": 1, "records": {"q,n": BoundsRecord}}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheFile {
    pub version: u32,
    pub records: BTreeMap<String, BoundsRecord>,
}

impl Default for CacheFile {
    fn default() -> Self {
        CacheFile {
            version: CACHE_VERSION,
            records: BTreeMap::new(),
        }
    }
}

pub fn cache_key(q: u8, n: u64) -> String {
    format!("{q},{n}")
}

pub fn read_cache(path: &Path) -> Result<CacheFile> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(CacheFile::default()),
        Err(e) => return Err(e.into()),
    };
    let raw: Value = serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let found = raw.get("version").and_then(Value::as_u64).unwrap_or(0) as u32;
    if found != CACHE_VERSION {
        return Err(Error::CacheVersion {
            found,
            expected: CACHE_VERSION,
        });
    }
    serde_json::from_value(raw).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Intersects `incoming` into the cache; disjoint intervals are a hard error and leave
/// the file untouched.
pub fn merge_records(cache: &mut CacheFile, incoming: &[BoundsRecord]) -> Result<()> {
    for rec in incoming {
        let key = cache_key(rec.q, rec.n);
        match cache.records.get_mut(&key) {
            None => {
                cache.records.insert(key, rec.clone());
            }
            Some(old) => {
                if rec.lower > old.upper || old.lower > rec.upper {
                    return Err(Error::CacheConflict {
                        key,
                        detail: format!(
                            "cached [{}, {}] vs new [{}, {}]",
                            old.lower, old.upper, rec.lower, rec.upper
                        ),
                    });
                }
                let rule = |rules: &[Rule]| rules.first().cloned().unwrap_or(Rule::Cached);
                old.raise(rec.lower, rule(&rec.lower_rules));
                old.cut(rec.upper, rule(&rec.upper_rules));
                old.incomplete = !old.is_exact() && (old.incomplete && rec.incomplete);
            }
        }
    }
    Ok(())
}

/// Merges records into the cache file at `path` and returns the updated cache.
pub fn cache_merge(path: &Path, records: &[BoundsRecord]) -> Result<CacheFile> {
    let mut cache = read_cache(path)?;
    merge_records(&mut cache, records)?;
    let text = serde_json::to_string_pretty(&cache).expect("serializable") + "\n";
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(cache)
}
