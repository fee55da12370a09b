use std::process::{Command, Output};

use serde_json::Value;

fn qlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlat")).args(args).env_remove("QLAT_CACHE").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn binom_prints_a_number() {
    let out = qlat(&["binom", "4", "2", "2"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "35");
    let out = qlat(&["alpha", "2", "3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "28");
}

#[test]
fn covering_report() {
    let out = qlat(&["verify", "covering", "--q", "2", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "verify covering");
    assert_eq!(v["result"]["gamma_size"], 28);
    assert_eq!(v["result"]["ok"], true);
    assert_eq!(v["lattices"][0]["name"], "L_3(2)");
}

#[test]
fn theorem_on_antichains() {
    let out = qlat(&["verify", "theorem", "--id", "T3.1", "--q", "2", "--n", "3", "--scope", "antichains"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["violation_count"], 0);
    assert_eq!(v["result"]["max_lhs"]["lhs"], "1");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qlat(&["bogus"]).status.code(), Some(1));
    assert_eq!(qlat(&["binom", "x", "2"]).status.code(), Some(1));
    let wrong_lattice = qlat(&["verify", "theorem", "--id", "T1.1", "--q", "2", "--n", "3"]);
    assert_eq!(wrong_lattice.status.code(), Some(1));
    assert!(!wrong_lattice.stderr.is_empty());
    assert_eq!(qlat(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_construction_exits_two() {
    let out = qlat(&["bounds", "--theorem", "T1.14", "--q", "2", "--n", "3", "--s", "3", "--construct"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["result"]["construction"]["valid"], false);
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let built = qlat(&["--cache", cache, "lattice", "build", "--q", "2", "--n", "3"]);
    assert!(built.status.success());
    assert!(dir.path().join("L_q2_n3.qlat").exists());
    let fresh = json(&qlat(&["lattice", "info", "--q", "2", "--n", "3"]));
    let cached = json(&qlat(&["--cache", cache, "lattice", "info", "--q", "2", "--n", "3"]));
    assert_eq!(cached["result"]["source"], "cache");
    assert_eq!(fresh["result"]["digest"], cached["result"]["digest"]);
    assert_eq!(fresh["result"]["level_sizes"], cached["result"]["level_sizes"]);

    let via_env = Command::new(env!("CARGO_BIN_EXE_qlat"))
        .args(["lattice", "info", "--q", "2", "--n", "3"])
        .env("QLAT_CACHE", cache)
        .output()
        .unwrap();
    assert_eq!(json(&via_env)["result"]["source"], "cache");
}

#[test]
fn output_is_independent_of_worker_count() {
    for args in [
        &["search", "max", "--q", "2", "--n", "3", "--forbid", "Q2", "--mode", "exact"][..],
        &["verify", "theorem", "--id", "T4.5", "--q", "2", "--n", "3", "--s", "2"][..],
        &["search", "max", "--boolean", "--n", "4", "--forbid", "P2", "--mode", "sample", "--samples", "50"][..],
    ] {
        let mut one = vec!["--workers", "1"];
        one.extend_from_slice(args);
        let mut eight = vec!["--workers", "8"];
        eight.extend_from_slice(args);
        let a = qlat(&one);
        let b = qlat(&eight);
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn lemma_grid_csv() {
    let out = qlat(&["--format", "csv", "bounds", "--theorem", "L4.9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,l,k,n,lhs,rhs,holds"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1264);
    assert!(rows.contains(&"2,2,5,6,2760,2604,true"));
}

#[test]
fn report_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = qlat(&["--out", path.to_str().unwrap(), "verify", "covering", "--q", "3", "--n", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["gamma_size"], 24);
}
