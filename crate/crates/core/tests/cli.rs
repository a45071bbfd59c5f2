use std::path::Path;

use meanomega_core::cli::{self, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};

fn run(args: &[&str]) -> (i32, String, String) {
    std::env::remove_var(cli::THREADS_ENV);
    let mut argv = vec!["meanomega"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn sieve(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).display().to_string();
    let mut args = vec!["--quiet", "sieve", "--cache", path.as_str()];
    args.extend_from_slice(extra);
    let (code, _, err) = run(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    path
}

#[test]
fn sieve_then_sum() {
    let dir = tempfile::tempdir().unwrap();
    let cache = sieve(dir.path(), "b.csv", &["--x", "10"]);
    let text = std::fs::read_to_string(&cache).unwrap();
    assert!(text.starts_with("# meanomega-buckets v1\nx,w,T\n"));
    assert!(text.lines().any(|l| l == "10,1,18"));

    let (code, out, _) = run(&["sum", "--k", "2", "--cache", &cache]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "x,S_num,S_den,S_float\n10,12,1,12.0\n");
    let (_, out, _) = run(&["sum", "--k", "3", "--cache", &cache]);
    assert!(out.ends_with("10,71,9,7.888888888888889\n"));
}

#[test]
fn sum_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let cache = sieve(dir.path(), "one.csv", &["--x", "1"]);
    let (_, out, _) = run(&["sum", "--k", "2", "--cache", &cache]);
    assert!(out.ends_with("1,1,1,1.0\n"));
}

#[test]
fn explicit_checkpoints_and_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--x", "1e6", "--checkpoints", "1e4,1e5,1e6"];
    let a = sieve(dir.path(), "a.csv", &args);
    let first = std::fs::read(&a).unwrap();
    sieve(dir.path(), "a.csv", &args);
    assert_eq!(first, std::fs::read(&a).unwrap());
    let xs: std::collections::BTreeSet<&str> = std::str::from_utf8(&first)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(xs.into_iter().collect::<Vec<_>>(), ["10000", "100000", "1000000"]);

    let b = sieve(
        dir.path(),
        "b.csv",
        &[
            "--threads",
            "3",
            "--segment-size",
            "4096",
            "--x",
            "1e6",
            "--checkpoints",
            "1e4,1e5,1e6",
        ],
    );
    assert_eq!(first, std::fs::read(&b).unwrap());
}

#[test]
fn constant_hand_value_and_variants() {
    let (code, out, _) = run(&[
        "constant",
        "--k",
        "2",
        "--variant",
        "thm3",
        "--method",
        "direct",
        "--prime-limit",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[..4], ["2", "thm3", "direct", "P=3"]);
    assert!((row[4].parse::<f64>().unwrap() - 65.0 / 48.0).abs() < 1e-14);

    let value = |args: &[&str]| -> f64 {
        let (code, out, err) = run(args);
        assert_eq!(code, EXIT_OK, "{err}");
        out.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap()
    };
    let series = value(&["constant", "--k", "3"]);
    let direct = value(&["constant", "--k", "3", "--method", "direct", "--prime-limit", "1e6"]);
    assert!((series - direct).abs() < 1e-7);
    let thm1 = value(&[
        "constant",
        "--k",
        "3",
        "--variant",
        "thm1",
        "--method",
        "direct",
        "--prime-limit",
        "1e5",
    ]);
    assert!(thm1 < series);
}

#[test]
fn thm1_series_is_a_domain_error() {
    let (code, _, err) = run(&["constant", "--k", "2", "--variant", "thm1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("c_1"));
}

#[test]
fn verify_examples() {
    let (code, out, _) = run(&["--quiet", "verify", "--lemma", "4", "--k", "2", "--x", "1e6"]);
    assert_eq!(code, EXIT_OK);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[..2], ["L4", "true"]);
    let measured: f64 = row[3].split(';').next().unwrap().parse().unwrap();
    assert!(measured < 14.0);

    let (code, out, _) = run(&["--quiet", "verify", "--lemma", "3", "--k", "3", "--x", "1e6"]);
    assert_eq!(code, EXIT_OK);
    let bound: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(4)
        .unwrap()
        .split(';')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((bound - 4.0 * 4f64.ln() / 9.0).abs() < 1e-14);

    let (code, _, err) = run(&["verify", "--lemma", "6", "--z", "1", "--x", "1e5"]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("sum 100000 "), "{err}");
}

#[test]
fn verify_failure_exits_two() {
    // A hand-made cache whose early normalized sum dwarfs the last one.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "# meanomega-buckets v1\nx,w,T\n100,0,99999999\n10000,0,99999999\n",
    )
    .unwrap();
    let (code, _, _) = run(&[
        "--quiet",
        "verify",
        "--lemma",
        "shiu",
        "--k",
        "2",
        "--cache",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_VERIFY);
}

#[test]
fn compare_with_discrepancy_on_small_cache_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cache = sieve(dir.path(), "c.csv", &["--x", "1e6", "--checkpoints", "1e3,1e4,1e5,1e6"]);
    let (code, out, _) = run(&["--quiet", "compare", "--k", "2", "--cache", &cache]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("x,S,M,ratio,e_norm\n"));
    assert_eq!(out.lines().count(), 5);
    let (code, _, _) = run(&["--quiet", "compare", "--k", "2", "--cache", &cache, "--discrepancy"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn compare_discrepancy_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cache = sieve(dir.path(), "d.csv", &["--x", "1e7", "--checkpoints", "1e4,1e5,1e6,1e7"]);
    let (code, out, _) = run(&["--quiet", "compare", "--k", "2", "--cache", &cache, "--discrepancy"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.ends_with("constant_variant: thm3\n"), "{out}");
}

#[test]
fn json_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cache = sieve(dir.path(), "j.csv", &["--x", "1e4"]);
    let (_, csv, _) = run(&["sum", "--k", "3", "--cache", &cache]);
    let (code, json, _) = run(&["--format", "json", "sum", "--k", "3", "--cache", &cache]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), lines.len());
    for (row, line) in rows.iter().zip(lines) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(row["x"].to_string(), f[0]);
        assert_eq!(row["S_num"].to_string(), f[1]);
        assert_eq!(row["S_den"].to_string(), f[2]);
        assert_eq!(row["S_float"].as_f64().unwrap(), f[3].parse::<f64>().unwrap());
    }
    let (_, json, _) = run(&[
        "--format",
        "json",
        "constant",
        "--k",
        "2",
        "--variant",
        "thm1",
        "--method",
        "direct",
        "--prime-limit",
        "10",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v[0]["tail_estimate"], "inf");
}

#[test]
fn gk_table() {
    let (code, out, _) = run(&["gk", "--k", "3", "--alpha-max", "3"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "alpha,g_num,g_den,g_float");
    assert_eq!(lines[1], "0,1,1,1.0");
    assert_eq!(lines[2], "1,0,1,0.0");
    assert_eq!(lines[3], "2,4,9,0.444444444444444");
    assert_eq!(lines.len(), 5);
}

#[test]
fn tauz_rows_for_z_one() {
    let (code, out, _) = run(&["tauz", "--z", "1", "--x", "1e3,1e4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out.lines().nth(1).unwrap().split(',').take(2).collect::<Vec<_>>(),
        ["1000", "1000.0"]
    );
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["sum", "--k", "1", "--cache", "x.csv"]).0, EXIT_USAGE);
    assert_eq!(run(&["sieve", "--x", "2e10"]).0, EXIT_USAGE);
    assert_eq!(run(&["sieve", "--x", "abc"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["--help"]).0, EXIT_OK);
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        run(&["sum", "--k", "2", "--cache", missing.to_str().unwrap()]).0,
        EXIT_IO
    );
    let corrupt = dir.path().join("corrupt.csv");
    std::fs::write(&corrupt, "# meanomega-buckets v0\nx,w,T\n").unwrap();
    assert_eq!(
        run(&["sum", "--k", "2", "--cache", corrupt.to_str().unwrap()]).0,
        EXIT_IO
    );
    let unwritable = dir.path().join("no/such/dir/b.csv");
    assert_eq!(
        run(&["--quiet", "sieve", "--x", "10", "--cache", unwritable.to_str().unwrap()]).0,
        EXIT_IO
    );
}
