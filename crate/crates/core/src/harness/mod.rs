//! Experiment orchestration: configuration, reproducible seeding, report and
//! manifest files, and dispatch to the numerical modules.

mod runs;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::corpus::{self, BandSpec, Corpus, CorpusSpec, Family};
use crate::error::{Error, Result};
use crate::lp;
use crate::norms::{
    besov_infinity_norm, besov_morrey_norm, block_morrey_norms, fmt_exponent, morrey_norm, BMParams,
    WindowSet,
};
use crate::paraproduct::MoserVariant;
use crate::report::LemmaId;
use crate::spectral::{io, Grid};

pub use runs::{load_run, RunManifest, RunOutputs, Snapshot};
pub use verify::trial;

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "BMTK_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Norms,
    Verify,
    Euler,
    Mhd,
    Diagnose,
    Corpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Direct,
    Iterate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    TaylorGreen,
    Random,
    File,
    Zero,
    /// Magnetic field equal to the velocity.
    Aligned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverKnobs {
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: Scheme,
    pub init: InitKind,
    pub init_file: Option<PathBuf>,
    pub binit: InitKind,
    pub binit_file: Option<PathBuf>,
    /// Amplitude of generated initial data (root-mean-square for random data).
    pub amplitude: f64,
    /// Steps between snapshots; 0 picks about ten per run.
    pub snapshot_every: usize,
    /// Stored steps between diagnostic samples.
    pub diag_stride: usize,
}

impl Default for SolverKnobs {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            dt: 1e-3,
            tol: 1e-8,
            max_iter: 30,
            scheme: Scheme::Direct,
            init: InitKind::TaylorGreen,
            init_file: None,
            binit: InitKind::Random,
            binit_file: None,
            amplitude: 1.0,
            snapshot_every: 0,
            diag_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub grid: Grid,
    pub bm: BMParams,
    pub window: WindowSet,
    pub seed: u64,
    pub trials: usize,
    pub lemma: Option<LemmaId>,
    pub band: BandSpec,
    pub moser_variant: MoserVariant,
    /// Upper bound asserted on every trial ratio, if set.
    pub max_ratio: Option<f64>,
    pub solver: SolverKnobs,
    /// Field stem for `norms`, run directory for `diagnose`.
    pub input: Option<PathBuf>,
    /// Config hash a run directory must carry for `diagnose`.
    pub expect_hash: Option<String>,
    /// Report file (`*.json`) or output directory. Not part of the hash.
    #[serde(skip)]
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn new(command: Command, grid: Grid) -> Self {
        Self {
            command,
            grid,
            bm: BMParams::new(2.5, 4.0, 2.0, 2.0, false).expect("default parameters are valid"),
            window: WindowSet::full(&grid),
            seed: 0,
            trials: 10,
            lemma: None,
            band: BandSpec {
                kmax: (grid.size as i64 / 4).max(1),
                slope: 1.0,
                rms: 1.0,
            },
            moser_variant: MoserVariant::Inhomogeneous,
            max_ratio: None,
            solver: SolverKnobs::default(),
            input: None,
            expect_hash: None,
            output: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.grid.dim, self.grid.size, self.grid.length)?;
        self.window.validate(&self.grid)?;
        if 3 * self.band.kmax > self.grid.size as i64 || self.band.kmax < 1 {
            return Err(Error::InvalidParams(format!(
                "band limit must satisfy 1 ≤ kmax ≤ N/3 = {}, got {}",
                self.grid.size / 3,
                self.band.kmax
            )));
        }
        match self.command {
            Command::Verify if self.lemma.is_none() => {
                Err(Error::InvalidParams("verify needs a lemma id".into()))
            }
            Command::Diagnose if self.input.is_none() => {
                Err(Error::InvalidParams("diagnose needs a run directory as input".into()))
            }
            Command::Euler | Command::Mhd => {
                let k = &self.solver;
                if !(k.dt > 0.0) {
                    return Err(Error::InvalidTimeStep(k.dt));
                }
                if !(k.horizon >= 0.0) {
                    return Err(Error::InvalidParams(format!("horizon must be nonnegative, got {}", k.horizon)));
                }
                if k.scheme == Scheme::Iterate {
                    self.bm.check_solver_range(self.grid.dim)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// SHA-256 of the canonical JSON form (keys sorted, output path excluded).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    /// Seed of trial `i`, split from the master seed in counter mode.
    pub fn trial_seed(&self, i: usize) -> u64 {
        corpus::rng(self.seed, i as u64).next_u64()
    }

    /// Report path and output directory.
    pub fn output_paths(&self) -> (PathBuf, PathBuf) {
        let out = &self.output;
        if out.extension().is_some_and(|e| e == "json") {
            let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
            let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
            (out.clone(), dir)
        } else {
            (out.join("report.json"), out.clone())
        }
    }
}

/// Result of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub report: Value,
    pub report_path: PathBuf,
    pub summary: String,
}

impl Outcome {
    /// 0 on pass, 2 on a failed assertion.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

/// Caps the global worker pool at `BMTK_THREADS` if set.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidParams(format!("{THREADS_VAR} must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Format(format!("cannot size worker pool: {e}")))?;
    Ok(Some(n))
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub(crate) fn manifest_value(cfg: &ExperimentConfig, extra: Value) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "outputs": extra,
    })
}

/// Runs one experiment and writes its artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.command {
        Command::Norms => run_norms(cfg),
        Command::Verify => verify::run(cfg),
        Command::Euler | Command::Mhd => runs::run_solver(cfg),
        Command::Diagnose => runs::run_diagnose(cfg),
        Command::Corpus => run_corpus(cfg),
    }
}

fn finish(cfg: &ExperimentConfig, report: Value, passed: bool, summary: String, files: Value) -> Result<Outcome> {
    let (report_path, dir) = cfg.output_paths();
    write_json(&report_path, &report)?;
    let manifest = if report_path.file_name().is_some_and(|n| n == "report.json") {
        dir.join("manifest.json")
    } else {
        report_path.with_extension("manifest.json")
    };
    write_json(&manifest, &manifest_value(cfg, files))?;
    Ok(Outcome {
        passed,
        report,
        report_path,
        summary,
    })
}

fn run_norms(cfg: &ExperimentConfig) -> Result<Outcome> {
    let f = match &cfg.input {
        Some(stem) => io::read_field(stem)?,
        None => corpus::random_scalar(&cfg.grid, cfg.seed, 0, &cfg.band)?,
    };
    let g = *f.grid();
    cfg.window.validate(&g)?;
    let bp = cfg.bm;
    let blocks = block_morrey_norms(&f, &bp.morrey, bp.homogeneous, &cfg.window);
    let values = json!({
        "morrey": morrey_norm(&f, &bp.morrey, &cfg.window),
        "besov_morrey": besov_morrey_norm(&f, &bp, &cfg.window),
        "besov_morrey_inhomogeneous": besov_morrey_norm(&f, &bp.homogeneous(false), &cfg.window),
        "besov_morrey_homogeneous": besov_morrey_norm(&f, &bp.homogeneous(true), &cfg.window),
        "besov_infinity": finite_or_null(besov_infinity_norm(&f, bp.s, bp.r, bp.homogeneous)),
        "sup": f.sup_norm(),
        "mean": f.mean(),
        "blocks": blocks.iter().map(|(j, v)| json!({"j": j, "morrey": v})).collect::<Vec<_>>(),
        "top_block": lp::top_block(&g),
    });
    let report = json!({
        "command": "norms",
        "config_hash": cfg.hash(),
        "grid": crate::report::GridSummary::from(&g),
        "params": {
            "s": bp.s,
            "p": fmt_exponent(bp.p()),
            "q": fmt_exponent(bp.q()),
            "r": fmt_exponent(bp.r),
            "homogeneous": bp.homogeneous,
            "kmax": cfg.window.kmax,
            "stride": cfg.window.stride,
        },
        "values": values,
        "passed": true,
    });
    let summary = format!(
        "morrey norm {:.6e}, Besov-Morrey norm {:.6e}",
        values["morrey"].as_f64().unwrap_or(f64::NAN),
        values["besov_morrey"].as_f64().unwrap_or(f64::NAN)
    );
    finish(cfg, report, true, summary, json!({}))
}

fn run_corpus(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = CorpusSpec {
        grid: cfg.grid,
        seed: cfg.seed,
        trials: cfg.trials,
        band: cfg.band,
        families: Family::ALL.to_vec(),
    };
    let corpus = Corpus::generate(&spec)?;
    let (report_path, dir) = cfg.output_paths();
    corpus.write(&dir)?;
    let report = json!({
        "command": "corpus",
        "config_hash": cfg.hash(),
        "entries": corpus.manifest.entries,
        "passed": true,
    });
    write_json(&report_path, &report)?;
    Ok(Outcome {
        passed: true,
        summary: format!("{} fields written to {}", corpus.fields.len(), dir.display()),
        report,
        report_path,
    })
}

#[cfg(test)]
mod tests;
