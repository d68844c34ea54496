use std::process::Command;

use cyccover::bounds::{BoundsRecord, Rule};
use cyccover::cli::{cache_merge, digest, dispatch, read_cache, CacheFile, CACHE_VERSION};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["cyccover"];
    argv.extend_from_slice(args);
    let out = dispatch(argv);
    let v = serde_json::from_str(&out.stdout).unwrap_or(Value::Null);
    (out.code, v)
}

#[test]
fn together_example() {
    let (code, v) = run(&["together", "--n", "7", "0111111", "0110000"]);
    assert_eq!(code, 0);
    assert_eq!(v["covers"], true);
    let (_, v) = run(&["together", "--n", "9", "011111111", "010000100"]);
    assert_eq!(v["covers"], false);
    assert_eq!(v["witness"], "001001001");
}

#[test]
fn works_and_w_enum() {
    let (_, v) = run(&["works", "--n", "8", "11000000"]);
    assert_eq!(v["works"], false);
    let (_, v) = run(&["works", "--n", "6", "101000"]);
    assert_eq!(v["works"], true);
    assert_eq!(v["closed_form"], true);
    let (_, v) = run(&["w-enum", "--n", "6"]);
    assert_eq!(v["dim"], 4);
    assert_eq!(v["count"], 16);
    let (code, v) = run(&["works", "--q", "3", "--n", "5", "12000"]);
    assert_eq!(code, 0);
    assert_eq!(v["works"], false);
}

#[test]
fn badsub_find_and_verify() {
    let (code, v) = run(&["badsub", "--n", "9", "010000100"]);
    assert_eq!(code, 0);
    assert_eq!(v["valid"], true);
    let (_, v) = run(&["badsub", "--n", "9", "010000100", "--verify", "0,1,2,4,8"]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["certificate"]["vertices"], serde_json::json!([0, 1, 2, 4, 8]));
    let (_, v) = run(&["badsub", "--n", "9", "010000100", "--verify", "0,1,2"]);
    assert_eq!(v["valid"], false);
    let (_, v) = run(&["badsub", "--n", "7", "0110000"]);
    assert_eq!(v["certificate"], Value::Null);
}

#[test]
fn girth_and_bounds() {
    let (_, v) = run(&["girth", "--n", "7", "--gens", "1,2"]);
    assert_eq!(v["girth"], 4);
    let (_, v) = run(&["bounds", "--q", "2", "--n", "21"]);
    assert_eq!((v["lower"].as_u64(), v["upper"].as_u64()), (Some(3), Some(4)));
    assert_eq!(v["lower_rules"][0]["rule"], "ProductBound");
}

#[test]
fn table_escalated_to_twenty() {
    let paper = [
        (0, 0), (0, 0), (1, 1), (0, 0), (2, 2), (2, 2), (2, 2), (0, 0), (3, 3), (2, 2),
        (2, 2), (3, 3), (2, 2), (3, 3), (3, 3), (0, 0), (4, 4), (3, 3), (2, 2), (3, 3),
    ];
    let (code, v) = run(&["table", "--q", "2", "--max", "20", "--escalate"]);
    assert_eq!(code, 0);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 20);
    for (row, want) in rows.iter().zip(paper) {
        assert_eq!((row["lower"].as_u64().unwrap(), row["upper"].as_u64().unwrap()), want);
    }
    let out = dispatch(["cyccover", "table", "--max", "3", "--csv"]);
    assert!(out.stdout.starts_with("q,n,lower,upper"));
    assert_eq!(out.stdout.lines().count(), 4);
}

#[test]
fn conjecture_outputs() {
    let (_, v) = run(&["conjecture", "--n", "7"]);
    assert_eq!(v["exceptions"].as_array().unwrap().len(), 12);
    assert_eq!(v["orbits"].as_array().unwrap().len(), 1);
    let (_, v) = run(&["conjecture", "--range", "3..11"]);
    let ns: Vec<u64> = v.as_array().unwrap().iter().map(|r| r["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, vec![3, 5, 7, 9, 11]);
    let (code, _) = run(&["conjecture", "--n", "8"]);
    assert_eq!(code, 2);
}

#[test]
fn normalize_and_certify() {
    let (code, v) = run(&["normalize", "--p", "5", "11000", "00101"]);
    assert_eq!(code, 0);
    assert_eq!(v["vectors"][0], "01111");
    let rows: Vec<&str> = v["vectors"].as_array().unwrap().iter().map(|r| r.as_str().unwrap()).collect();
    let mut args = vec!["together", "--n", "5"];
    args.extend(rows);
    assert_eq!(run(&args).1["covers"], true);
    let (code, v) = run(&["certify-fail", "--q", "3", "--p", "5", "12000"]);
    assert_eq!(code, 0);
    let product = v["product"].as_str().unwrap();
    assert!(!product.trim_start_matches("3:").contains('0'));
    let (code, _) = run(&["certify-fail", "--q", "3", "--p", "7", "1200000"]);
    assert_eq!(code, 0);
    // 3 is not primitive mod 11
    let (code, _) = run(&["certify-fail", "--q", "3", "--p", "11", "12000000000"]);
    assert_eq!(code, 2);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["together", "--n", "7", "--nope", "0111111"]).0, 64);
    assert_eq!(run(&["frobnicate"]).0, 64);
    assert_eq!(run(&["together", "--n", "7", "01x1111"]).0, 65);
    assert_eq!(run(&["together", "--n", "7", "011"]).0, 65);
    assert_eq!(run(&["girth", "--n", "7", "--gens", "1,a"]).0, 65);
    assert_eq!(run(&["together", "--n", "7", "0110000", "0110000"]).0, 2);
    assert_eq!(run(&["h", "--n", "30"]).0, 3);
    assert_eq!(run(&["h", "--n", "17", "--max-nodes", "2"]).0, 3);
    assert_eq!(dispatch(["cyccover", "--help"]).code, 0);
}

#[test]
fn binary_exit_codes_match_dispatch() {
    let bin = env!("CARGO_BIN_EXE_cyccover");
    let out = Command::new(bin).args(["together", "--n", "7", "0111111", "0110000"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["covers"], true);
    let out = Command::new(bin).args(["works", "--n", "3", "1z0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(65));
    let out = Command::new(bin).args(["--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn deterministic_output_is_byte_identical() {
    for args in [
        vec!["cyccover", "--deterministic", "h", "--n", "14"],
        vec!["cyccover", "--deterministic", "table", "--max", "12", "--escalate"],
        vec!["cyccover", "--deterministic", "--manifest", "conjecture", "--n", "9"],
    ] {
        let a = dispatch(args.clone());
        let b = dispatch(args);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn manifest_digest_matches_result() {
    let out = dispatch(["cyccover", "--manifest", "--deterministic", "bounds", "--n", "25"]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["manifest"]["digest"].as_str().unwrap(), digest(&v["result"]));
    assert_eq!(v["manifest"]["wall_ms"], Value::Null);
    assert_eq!(v["manifest"]["threads"], 1);
}

#[test]
fn flags_override_environment() {
    // the environment is process-global; only this test touches it
    std::env::set_var("CYCCOVER_BUDGET_BITS", "10");
    assert_eq!(run(&["together", "--n", "12", "110000000000"]).0, 3);
    assert_eq!(run(&["--budget-bits", "20", "together", "--n", "12", "110000000000"]).0, 0);
    std::env::set_var("CYCCOVER_BUDGET_BITS", "lots");
    assert_eq!(run(&["together", "--n", "5", "11000"]).0, 64);
    std::env::remove_var("CYCCOVER_BUDGET_BITS");
}

fn record(q: u8, n: u64, lower: u64, upper: u64) -> BoundsRecord {
    BoundsRecord {
        q,
        n,
        lower,
        upper,
        lower_rules: vec![Rule::Cached],
        upper_rules: vec![Rule::Cached],
        incomplete: false,
    }
}

#[test]
fn cache_merge_tightens_and_detects_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.json");
    cache_merge(&path, &[record(2, 22, 2, 4)]).unwrap();
    let c = cache_merge(&path, &[record(2, 22, 3, 3)]).unwrap();
    assert_eq!(c.records["2,22"].lower, 3);
    assert_eq!(c.records["2,22"].upper, 3);
    // idempotent
    let again = cache_merge(&path, &[record(2, 22, 3, 3)]).unwrap();
    assert_eq!(again, c);
    // widening is ignored
    let wide = cache_merge(&path, &[record(2, 22, 2, 4)]).unwrap();
    assert_eq!(wide.records["2,22"].lower, 3);

    cache_merge(&path, &[record(2, 9, 3, 3)]).unwrap();
    let err = cache_merge(&path, &[record(2, 9, 2, 2)]).unwrap_err();
    assert!(matches!(err, cyccover::Error::CacheConflict { .. }));
    assert_eq!(read_cache(&path).unwrap().records["2,9"].lower, 3);

    std::fs::write(&path, r#"{"version":99,"records":{}}"#).unwrap();
    assert!(matches!(read_cache(&path), Err(cyccover::Error::CacheVersion { found: 99, .. })));
}

#[test]
fn cli_uses_and_updates_cache() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let p = path.to_str().unwrap();
    let out = dispatch(["cyccover", "--cache", p, "table", "--max", "14", "--escalate"]);
    assert_eq!(out.code, 0);
    let cache: CacheFile = read_cache(&path).unwrap();
    assert_eq!(cache.version, CACHE_VERSION);
    assert_eq!(cache.records["2,14"].lower, 3);
    // the cached h(14) = 3 lifts the product bound at 28
    let (_, v) = run(&["--cache", p, "bounds", "--n", "28"]);
    assert_eq!(v["lower"], 3);
    let (_, v) = run(&["bounds", "--n", "28"]);
    assert_eq!(v["lower"], 2);
}
