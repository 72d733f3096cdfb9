use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_kdsm");

fn kdsm(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("KDSM_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

const N1: &str = "KDSM 1\nk 3\nn 1\npref 0 0 : 0\npref 1 0 : 0\npref 2 0 : 0\n";

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for p in [&a, &b] {
        let o = kdsm(&["gen", "--k", "3", "--n", "2", "--density", "1", "--seed", "7", "-o", s(p)]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().filter(|l| l.starts_with("pref ")).count(), 6);
    assert!(text.lines().skip(3).all(|l| l.split(':').nth(1).unwrap().split_whitespace().count() == 2));
}

#[test]
fn gen_empty_instance() {
    let o = kdsm(&["gen", "--k", "3", "--n", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "KDSM 1\nk 3\nn 0\n");
}

#[test]
fn flags_from_environment_and_config_echo() {
    let o = Command::new(BIN)
        .args(["gen"])
        .env("KDSM_K", "4")
        .env("KDSM_N", "1")
        .env("KDSM_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("KDSM 1\nk 4\nn 1\n"));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("seed: 3"), "{err}");
}

#[test]
fn unknown_flag_is_rejected() {
    let o = kdsm(&["gen", "--k", "3", "--n", "1", "--colour", "red"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reduce_headers_and_errors() {
    let dir = TempDir::new().unwrap();
    let x = dir.path().join("x");
    kdsm(&["gen", "--k", "3", "--n", "2", "--density", "0.5", "--seed", "1", "-o", s(&x)]);
    let out = dir.path().join("out");
    let map = dir.path().join("map");
    let o = kdsm(&["reduce", "--mode", "complete", "-i", s(&x), "-o", s(&out), "--map-output", s(&map)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(&out).unwrap().starts_with("KDSM 1\nk 3\nn 30\n"));
    assert_eq!(fs::read_to_string(&map).unwrap().lines().count(), 90);

    let o = kdsm(&["reduce", "--mode", "3k", "--target-k", "5", "-i", s(&x)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("KDSM 1\nk 5\nn 4\n"));

    let y = dir.path().join("y");
    kdsm(&["gen", "--k", "4", "--n", "2", "-o", s(&y)]);
    let o = kdsm(&["reduce", "--mode", "3k", "--target-k", "5", "-i", s(&y)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("k=3"));
}

#[test]
fn verify_verdicts_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i", N1);
    let full = write(&dir, "full", "KDSM-MATCHING 1\nfamily 0 0 0\n");
    let empty = write(&dir, "empty", "KDSM-MATCHING 1\n");
    let o = kdsm(&["verify", "--instance", s(&inst), "--matching", s(&full)]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "STABLE\n"));
    for method in ["naive", "cycle", "auto"] {
        let o = kdsm(&["verify", "--instance", s(&inst), "--matching", s(&empty), "--method", method]);
        assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(1), "UNSTABLE witness 0 0 0\n"));
    }
    let partial = write(&dir, "p", "KDSM 1\nk 3\nn 1\npref 0 0 : 0\npref 1 0 :\npref 2 0 : 0\n");
    let o = kdsm(&["verify", "--instance", s(&partial), "--matching", s(&full)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("invalid matching"));
}

#[test]
fn solve_modes() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i", N1);
    let o = kdsm(&["solve", "--instance", s(&inst), "--mode", "count"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "1\n"));

    let o = kdsm(&["solve", "--instance", &fixture("x0.kdsm"), "--mode", "find"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("EXHAUSTED-NONE\n"));

    let five = dir.path().join("five");
    kdsm(&["gen", "--k", "3", "--n", "5", "--seed", "11", "-o", s(&five)]);
    let o = kdsm(&["solve", "--instance", s(&five), "--mode", "enumerate", "--limit", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("count 2\n"));
    assert_eq!(text.matches("KDSM-MATCHING 1").count(), 2);
    assert_eq!(text.matches("family ").count(), 10);

    let big = dir.path().join("big");
    kdsm(&["gen", "--k", "3", "--n", "8", "-o", s(&big)]);
    let o = kdsm(&["solve", "--instance", s(&big), "--mode", "count", "--family-limit", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("512"));

    let o = kdsm(&["solve", "--instance", s(&big), "--max-nodes", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("BUDGET-EXCEEDED\n"));
}

#[test]
fn induce_round_trip_and_wrong_map() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x", "KDSM 1\nk 3\nn 2\npref 0 0 : 1 0\npref 0 1 : 0\npref 1 0 : 0 1\npref 1 1 : 1\npref 2 0 : 1 0\npref 2 1 : 0\n");
    let out = dir.path().join("out");
    let map = dir.path().join("map");
    kdsm(&["reduce", "--mode", "complete", "-i", s(&x), "-o", s(&out), "--map-output", s(&map)]);
    let found = stdout(&kdsm(&["solve", "--instance", s(&x), "--mode", "find"]));
    let text = &found[found.find("KDSM-MATCHING").unwrap()..];
    assert!(text.contains("family "));
    let mu = write(&dir, "mu", text);
    let up = dir.path().join("up");
    let o = kdsm(&["induce", "--direction", "up", "--map", s(&map), "--matching", s(&mu), "--instance", s(&x), "-o", s(&up)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = kdsm(&["verify", "--instance", s(&out), "--matching", s(&up)]);
    assert_eq!(o.status.code(), Some(0));
    let o = kdsm(&["induce", "--direction", "down", "--map", s(&map), "--matching", s(&up), "--instance", s(&x)]);
    assert_eq!(stdout(&o), text);

    let empty = write(&dir, "empty", "KDSM-MATCHING 1\n");
    let o = kdsm(&["induce", "--direction", "up", "--map", s(&map), "--matching", s(&empty), "--instance", s(&x)]);
    assert_eq!(stdout(&o).matches("family ").count(), 30);

    // lift map
    let lmap = dir.path().join("lmap");
    kdsm(&["reduce", "--mode", "3k", "--target-k", "4", "-i", s(&x), "--map-output", s(&lmap)]);
    let o = kdsm(&["induce", "--direction", "up", "--map", s(&lmap), "--matching", s(&mu)]);
    let lifted = write(&dir, "lifted", &stdout(&o));
    let o = kdsm(&["induce", "--direction", "down", "--map", s(&lmap), "--matching", s(&lifted)]);
    assert_eq!(stdout(&o), text);

    let broken = fs::read_to_string(&map).unwrap().replacen("0 0 0 0 0", "0 1 0 0 0", 1);
    let bad = write(&dir, "bad", &broken);
    let o = kdsm(&["induce", "--direction", "up", "--map", s(&bad), "--matching", s(&mu), "--instance", s(&x)]);
    assert_eq!(o.status.code(), Some(2));
    let o = kdsm(&["induce", "--direction", "up", "--map", s(&map), "--matching", s(&mu)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiments() {
    let o = kdsm(&["experiment", "--id", "boros-bound", "--k", "3", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("summary headline 64/64 stable\n"));

    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for p in [&a, &b] {
        let o = kdsm(&["experiment", "--id", "verifier-equivalence", "--samples", "1000", "--seed", "1", "--out", s(p)]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "1000/1000 agree\n");
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let report = fs::read_to_string(&a).unwrap();
    assert!(report.starts_with("report verifier-equivalence\nparam "));
    assert!(report.ends_with("summary headline 1000/1000 agree\nend\n"));
    assert_eq!(report.lines().filter(|l| l.starts_with("result ")).count(), 1000);

    let o = kdsm(&["experiment", "--id", "pp-two-matchings", "--samples", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));

    let o = kdsm(&["experiment", "--id", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn search_rediscovers_fixture() {
    let o = kdsm(&["search", "--max-n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), fs::read_to_string(fixture("x0.kdsm")).unwrap());
    let cert = fs::read_to_string(fixture("x0.cert")).unwrap();
    assert!(String::from_utf8(o.stderr).unwrap().contains(cert.trim_end()));
}
