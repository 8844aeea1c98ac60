use serde_json::Value;
use sltensor_cli::{run, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
use std::time::Instant;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data");

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("sltensor").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = cli(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn empty_argv_prints_usage_and_fails() {
    let (code, out, err) = cli(&[]);
    assert_eq!(code, EXIT_USAGE);
    assert!((out + &err).contains("Usage"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let (code, _, err) = cli(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("Usage"));
    assert_eq!(cli(&["reproduce", "table99"]).0, EXIT_USAGE);
    assert_eq!(cli(&["koszul", "sl3"]).0, EXIT_USAGE);
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(cli(&["--help"]).0, EXIT_OK);
    let (code, out, _) = cli(&["--version"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn corrected_rank20_verifies_and_printed_one_does_not() {
    let good = format!("{DATA}/sl3_rank20.json");
    let (code, out, _) = cli(&["verify", "rank-decomp", &good, "--against", "sl3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("exact: true"));
    assert!(out.contains("convention:"));
    let bad = format!("{DATA}/sl3_rank20_printed.json");
    assert_eq!(cli(&["verify", "rank-decomp", &bad, "--against", "sl3"]).0, EXIT_VERIFY);
}

#[test]
fn wrong_decomposition_kind_is_a_usage_error() {
    let curve = format!("{DATA}/sl3_border18.txt");
    assert_eq!(cli(&["verify", "rank-decomp", &curve, "--against", "sl3"]).0, EXIT_USAGE);
    assert_eq!(cli(&["verify", "curve-decomp", &curve, "--against", "sl3"]).0, EXIT_OK);
    assert_eq!(cli(&["verify", "curve-decomp", &curve, "--against", "sl3", "--tol", "1e-20"]).0, EXIT_VERIFY);
    assert_eq!(cli(&["verify", "rank-decomp", "/nonexistent.json", "--against", "sl3"]).0, EXIT_USAGE);
}

#[test]
fn csv_headers_are_verbatim() {
    let (code, out, _) = cli(&["reproduce", "table2", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("p,k,Dimensions of Linear Map,Dimension of Kernel,Koszul Bound,Certification"));
    assert_eq!(lines.next(), Some("1,3,\"(24,24)\",0,12,two-prime"));
    let (_, out, _) = cli(&["reproduce", "table5", "--format", "csv"]);
    assert!(out.starts_with("p,Dimensions of Linear Map,Rank,Koszul Bound,Certification\n"));
}

#[test]
fn table6_bounds() {
    let v = json(&["reproduce", "table6", "--format", "json", "--no-cache"]);
    let bounds: Vec<u64> = v["result"]["rows"].as_array().unwrap().iter().map(|r| r["bound"].as_u64().unwrap()).collect();
    assert_eq!(bounds, [9, 8]);
}

#[test]
fn artifacts_embed_version_seed_and_certification() {
    let v = json(&["reproduce", "table1", "--format", "json", "--seed", "7", "--no-cache"]);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["certification"], "two-prime");
    let v = json(&["koszul", "sl3", "-p", "1", "--format", "json"]);
    assert_eq!(v["certification"], "two-prime");
    assert_eq!(v["seed"], 1);
}

#[test]
fn reproduce_is_byte_stable() {
    for format in ["json", "csv", "pretty"] {
        let a = cli(&["reproduce", "table8", "--format", format, "--no-cache"]).1;
        let b = cli(&["reproduce", "table8", "--format", format, "--no-cache"]).1;
        assert_eq!(a, b, "{format}");
    }
}

#[test]
fn exact_policy_agrees_with_two_primes() {
    let rows = |policy: &str| -> Vec<u64> {
        let v = json(&["reproduce", "table2", "--format", "json", "--policy", policy, "--no-cache"]);
        v["result"]["rows"].as_array().unwrap().iter().map(|r| r["kernel"].as_u64().unwrap()).collect()
    };
    assert_eq!(rows("exact"), rows("two-prime"));
}

#[test]
fn small_budget_skips_rows() {
    let v = json(&["reproduce", "table3", "--format", "json", "--budget", "1000000", "--no-cache"]);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0]["status"], "computed");
    assert!(rows.iter().any(|r| r["status"] == "skipped"));
    let (_, csv, _) = cli(&["reproduce", "table3", "--format", "csv", "--budget", "1000000", "--no-cache"]);
    assert!(csv.contains("skipped (size budget"));
}

#[test]
fn cache_speeds_up_the_second_run_and_survives_audit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let timed = |extra: &[&str]| {
        let mut args = vec!["reproduce", "table3", "--format", "csv", "--cache-dir", d];
        args.extend(extra);
        let start = Instant::now();
        let (code, out, err) = cli(&args);
        assert_eq!(code, EXIT_OK, "{err}");
        (start.elapsed(), out)
    };
    let (cold, a) = timed(&[]);
    let entries = std::fs::read_dir(d).unwrap().count();
    assert_eq!(entries, 7);
    let (warm, b) = timed(&[]);
    assert_eq!(a, b);
    assert!(cold >= warm * 10, "cold {cold:?}, warm {warm:?}");
    let (_, c) = timed(&["--audit"]);
    assert_eq!(a, c);
    // Corrupt entries are recomputed and overwritten.
    for e in std::fs::read_dir(d).unwrap() {
        std::fs::write(e.unwrap().path(), "not json").unwrap();
    }
    let (_, e) = timed(&[]);
    assert_eq!(a, e);
    let (_, f) = timed(&[]);
    assert_eq!(a, f);
}

#[test]
fn no_cache_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("c");
    let d = d.to_str().unwrap();
    assert_eq!(cli(&["reproduce", "table1", "--cache-dir", d, "--no-cache"]).0, EXIT_OK);
    assert!(!std::path::Path::new(d).exists());
    assert_eq!(cli(&["reproduce", "table1", "--cache-dir", d]).0, EXIT_OK);
    assert_eq!(std::fs::read_dir(d).unwrap().count(), 3);
}

#[test]
fn built_tensor_feeds_koszul() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sl3.json");
    let p = path.to_str().unwrap();
    assert_eq!(cli(&["tensor", "build", "sl3", "-o", p]).0, EXIT_OK);
    let from_file = cli(&["koszul", "--tensor", p, "-p", "1,2"]).1;
    let direct = cli(&["koszul", "sl3", "-p", "1,2"]).1;
    assert_eq!(from_file, direct);
    assert!(direct.contains("(64,224) rank 64 kernel 0 bound 10"));
    let generic = cli(&["koszul", "sl3", "-p", "3", "--generic"]).1;
    assert!(generic.contains("k=7 (280,280)"));
}

#[test]
fn substitute_reports_combined_bounds() {
    let (code, out, _) = cli(&["substitute", "so5", "-w", "0 1;1 0", "-p", "1,2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("p=1 k=3 (30,30) kernel 0 bound 15 combined 17"));
    assert!(out.contains("p=2 k=5 (100,100) kernel 4 bound 16 combined 18"));
    assert_eq!(cli(&["substitute", "so5", "-w", "9 9", "-p", "1"]).0, EXIT_USAGE);
}

#[test]
fn search_reports_every_start() {
    let v = json(&["search", "sl2", "-r", "5", "--starts", "2", "--max-iter", "30", "--format", "json"]);
    assert_eq!(v["result"]["starts"], 2);
    assert_eq!(v["result"]["residuals"].as_array().unwrap().len(), 2);
}

#[test]
fn apolarity_enumeration_at_dimension_one() {
    let (code, out, _) = cli(&["apolarity", "sl3", "--enumerate", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("5 candidates of dimension 1"));
}
