use std::path::Path;
use std::process::{Command, Output};

fn bmtk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmtk"))
        .args(args)
        .env("BMTK_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_writes_reproducible_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = bmtk(&["verify", "--lemma", "3.4", "--trials", "3", "--grid", "32", "--seed", "7", "--out", path(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(report["trials"].as_array().unwrap().len(), 3);
    assert!(report["max_ratio"].as_f64().unwrap().is_finite());
    assert!(dir.path().join("a.manifest.json").exists());
}

#[test]
fn unknown_lemma_lists_known_ids() {
    let o = bmtk(&["verify", "--lemma", "9.9", "--grid", "16"]);
    assert_eq!(o.status.code(), Some(1));
    let t = text(&o);
    assert!(t.contains("3.4") && t.contains("2.1"), "{t}");
}

#[test]
fn invalid_q_is_an_error() {
    let o = bmtk(&["norms", "--grid", "16", "--q", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("1 ≤ q ≤ p"), "{}", text(&o));
}

#[test]
fn bad_flags_exit_with_one() {
    let o = bmtk(&["norms", "--p", "four"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bmtk(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn failed_bound_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = bmtk(&[
        "verify", "--lemma", "2.3", "--trials", "2", "--grid", "16", "--max-ratio", "1e-9", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn json_only_prints_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = bmtk(&["--json-only", "norms", "--grid", "16", "--p", "inf", "--q", "2", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["p"], "inf");
}

#[test]
fn euler_run_then_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = bmtk(&[
        "euler", "run", "--init", "taylor-green", "--scheme", "direct", "--N", "32", "--T", "0.1", "--dt", "1e-2",
        "--out", path(&run),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    for f in ["report.json", "manifest.json", "diagnostics.csv"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(run.join("manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap().to_string();

    let diag = dir.path().join("diag");
    let o = bmtk(&["diagnose", "--run", path(&run), "--grid", "32", "--expect-hash", &hash, "--out", path(&diag)]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let o = bmtk(&["diagnose", "--run", path(&run), "--grid", "32", "--expect-hash", "abc", "--out", path(&diag)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mhd_iterate_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = bmtk(&[
        "mhd", "run", "--init", "random", "--binit", "random", "--amplitude", "0.2", "--band-kmax", "4", "--N", "16",
        "--T", "0.05", "--dt", "1e-2", "--scheme", "iterate", "--s", "2", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(dir.path().join("iteration_report.json").exists());
    assert!(dir.path().join("snapshots").read_dir().unwrap().next().is_some());
}

#[test]
fn corpus_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = bmtk(&["corpus", "--grid", "16", "--trials", "1", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(dir.path().join("manifest.json").exists());
}
