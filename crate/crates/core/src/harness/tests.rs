use super::*;
use std::fs;

fn grid(n: usize) -> Grid {
    Grid::square(n).unwrap()
}

fn cfg_in(command: Command, n: usize, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(command, grid(n));
    cfg.output = out.to_path_buf();
    cfg
}

#[test]
fn hash_ignores_output_and_tracks_parameters() {
    let a = cfg_in(Command::Verify, 16, Path::new("a"));
    let b = cfg_in(Command::Verify, 16, Path::new("b"));
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
    let mut c = a.clone();
    c.seed = 1;
    assert_ne!(a.hash(), c.hash());
    let text = serde_json::to_string(&a).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back.hash(), a.hash());
}

#[test]
fn trial_seeds_are_distinct_and_stable() {
    let cfg = ExperimentConfig::new(Command::Verify, grid(16));
    let seeds: Vec<u64> = (0..20).map(|i| cfg.trial_seed(i)).collect();
    let mut sorted = seeds.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 20);
    assert_eq!(seeds[3], cfg.trial_seed(3));
}

#[test]
fn output_paths() {
    let cfg = cfg_in(Command::Verify, 16, Path::new("x/report.json"));
    assert_eq!(cfg.output_paths(), (PathBuf::from("x/report.json"), PathBuf::from("x")));
    let cfg = cfg_in(Command::Euler, 16, Path::new("run"));
    assert_eq!(cfg.output_paths(), (PathBuf::from("run/report.json"), PathBuf::from("run")));
    let cfg = cfg_in(Command::Verify, 16, Path::new("r.json"));
    assert_eq!(cfg.output_paths().1, PathBuf::from("."));
}

#[test]
fn validation_errors() {
    let mut cfg = ExperimentConfig::new(Command::Verify, grid(16));
    assert!(cfg.validate().is_err());
    cfg.lemma = Some(LemmaId::Commutator);
    assert!(cfg.validate().is_ok());
    cfg.band.kmax = 9;
    assert!(cfg.validate().is_err());
    let mut cfg = ExperimentConfig::new(Command::Euler, grid(16));
    cfg.solver.scheme = Scheme::Iterate;
    cfg.bm = cfg.bm.with_s(1.2);
    assert!(cfg.validate().is_err());
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for lemma in [LemmaId::Commutator, LemmaId::Bernstein, LemmaId::Moser] {
        let mut cfg = cfg_in(Command::Verify, 16, &dir.path().join("a.json"));
        cfg.lemma = Some(lemma);
        cfg.trials = 3;
        cfg.seed = 7;
        let first = run_experiment(&cfg).unwrap();
        let bytes_a = fs::read(&first.report_path).unwrap();
        cfg.output = dir.path().join("b.json");
        let second = run_experiment(&cfg).unwrap();
        let bytes_b = fs::read(&second.report_path).unwrap();
        assert_eq!(bytes_a, bytes_b);
        assert!(first.passed);
        assert_eq!(first.report["trials"].as_array().unwrap().len(), 3);
        assert_eq!(first.report["config_hash"], json!(cfg.hash()));
        assert!(dir.path().join("a.manifest.json").exists());
    }
}

#[test]
fn ratio_bound_failure_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cfg_in(Command::Verify, 16, &dir.path().join("r.json"));
    cfg.lemma = Some(LemmaId::Equivalence);
    cfg.trials = 2;
    cfg.max_ratio = Some(1e-9);
    let out = run_experiment(&cfg).unwrap();
    assert!(!out.passed);
    assert_eq!(out.exit_code(), 2);
}

#[test]
fn composition_trial() {
    let mut cfg = ExperimentConfig::new(Command::Verify, grid(16));
    cfg.solver.horizon = 0.2;
    cfg.solver.dt = 0.02;
    cfg.bm = cfg.bm.with_morrey(crate::norms::MorreyParams::new(2.0, 2.0).unwrap());
    let r = trial(&cfg, LemmaId::Composition, 3).unwrap();
    assert!((r.empirical_constant - 1.0).abs() < 0.05, "{}", r.empirical_constant);
    assert_eq!(r.seed, Some(3));
}

#[test]
fn empty_corpus_has_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cfg_in(Command::Corpus, 16, dir.path());
    cfg.trials = 0;
    let out = run_experiment(&cfg).unwrap();
    assert!(out.passed);
    let m = Corpus::read_manifest(dir.path()).unwrap();
    assert!(m.entries.is_empty());
}

#[test]
fn norms_on_generated_and_stored_fields() {
    let dir = tempfile::tempdir().unwrap();
    let g = grid(16);
    let f = corpus::random_scalar(&g, 1, 0, &BandSpec { kmax: 4, slope: 1.0, rms: 1.0 }).unwrap();
    io::write_field(&dir.path().join("f"), &f).unwrap();
    let mut cfg = cfg_in(Command::Norms, 16, &dir.path().join("out"));
    cfg.input = Some(dir.path().join("f"));
    let out = run_experiment(&cfg).unwrap();
    let expect = morrey_norm(&f, &cfg.bm.morrey, &cfg.window);
    assert_eq!(out.report["values"]["morrey"], json!(expect));
    assert!(dir.path().join("out/manifest.json").exists());
}

#[test]
fn euler_run_and_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let mut cfg = cfg_in(Command::Euler, 32, &run_dir);
    cfg.solver.horizon = 0.1;
    cfg.solver.dt = 0.01;
    let out = run_experiment(&cfg).unwrap();
    assert!(out.passed, "{}", out.report);
    for f in ["report.json", "manifest.json", "diagnostics.csv"] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let (manifest, sol) = load_run(&run_dir, Some(&cfg.hash())).unwrap();
    assert_eq!(manifest.outputs.snapshots.len(), sol.v.times().len());
    assert_eq!(*sol.v.times().last().unwrap(), 0.1);

    let mut diag = cfg_in(Command::Diagnose, 32, &dir.path().join("diag"));
    diag.input = Some(run_dir.clone());
    let d = run_experiment(&diag).unwrap();
    assert!(d.passed);
    diag.expect_hash = Some("0".repeat(64));
    assert!(run_experiment(&diag).is_err());

    let path = run_dir.join("manifest.json");
    let text = fs::read_to_string(&path).unwrap().replace("\"seed\": 0", "\"seed\": 5");
    fs::write(&path, text).unwrap();
    diag.expect_hash = None;
    assert!(run_experiment(&diag).is_err());
}

#[test]
fn iterate_scheme_writes_iteration_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cfg_in(Command::Mhd, 16, dir.path());
    cfg.solver.scheme = Scheme::Iterate;
    cfg.solver.init = InitKind::Random;
    cfg.solver.binit = InitKind::Aligned;
    cfg.solver.amplitude = 0.3;
    cfg.band.kmax = 4;
    cfg.solver.horizon = 0.05;
    cfg.solver.dt = 0.01;
    let out = run_experiment(&cfg).unwrap();
    assert!(out.passed, "{}", out.report);
    let rep: crate::flow::IterationReport = read_json(&dir.path().join("iteration_report.json")).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.system, "mhd");
}
