use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{finish, finite_or_null, read_json, write_json, Command, ExperimentConfig, InitKind, Outcome, Scheme};
use crate::corpus::{self, BandSpec};
use crate::error::{Error, Result};
use crate::flow::{
    blowup_diagnostics, direct_run_recorded, euler_iterate, mhd_iterate, step_times, DiagnosticsSeries, FlowState,
    IterationReport, IterationSettings, Solution,
};
use crate::series::VectorSeries;
use crate::spectral::{self, io, VectorField};

/// Record of a solver run, stored as `manifest.json` in the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub outputs: RunOutputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutputs {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: String,
    pub iteration_report: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub v: String,
    pub b: Option<String>,
}

fn initial_field(cfg: &ExperimentConfig, kind: InitKind, file: Option<&PathBuf>, stream: u64) -> Result<VectorField> {
    let g = &cfg.grid;
    let amp = cfg.solver.amplitude;
    match kind {
        InitKind::TaylorGreen => Ok(corpus::taylor_green(g, amp)),
        InitKind::Random => corpus::random_solenoidal(g, cfg.seed, stream, &BandSpec { rms: amp, ..cfg.band }),
        InitKind::Zero => Ok(VectorField::zeros(*g)),
        InitKind::File => {
            let path = file.ok_or_else(|| Error::InvalidParams("file initial data needs a path".into()))?;
            let v = io::read_vector(path)?;
            if *v.grid() != *g {
                return Err(Error::InvalidParams(format!(
                    "{} holds a field on a different grid than the run",
                    path.display()
                )));
            }
            Ok(v)
        }
        InitKind::Aligned => Err(Error::InvalidParams("aligned initial data applies only to the magnetic field".into())),
    }
}

fn max_relative_divergence(series: &VectorSeries) -> f64 {
    series
        .fields()
        .iter()
        .map(|v| spectral::max_divergence(v) / v.sup_norm().max(1.0))
        .fold(0.0, f64::max)
}

fn snapshot_stride(cfg: &ExperimentConfig, stored: usize) -> usize {
    match cfg.solver.snapshot_every {
        0 => stored.saturating_sub(1).div_ceil(10).max(1),
        k => k,
    }
}

fn write_snapshots(dir: &Path, sol: &Solution, every: usize) -> Result<Vec<Snapshot>> {
    let n = sol.v.times().len();
    let mut out = Vec::new();
    for i in (0..n).filter(|&i| i % every == 0 || i + 1 == n) {
        let v_name = format!("snapshots/v_{i:06}");
        io::write_vector(&dir.join(&v_name), &sol.v.fields()[i])?;
        let b_name = match &sol.b {
            Some(b) => {
                let name = format!("snapshots/b_{i:06}");
                io::write_vector(&dir.join(&name), &b.fields()[i])?;
                Some(name)
            }
            None => None,
        };
        out.push(Snapshot {
            time: sol.v.times()[i],
            v: v_name,
            b: b_name,
        });
    }
    Ok(out)
}

fn diagnostics_summary(d: &DiagnosticsSeries) -> Value {
    let last = d.times.len() - 1;
    let dominated = d.b0_inf_inf.iter().zip(&d.b0_inf_1).all(|(a, b)| a <= b);
    let mut out = json!({
        "samples": d.times.len(),
        "sup_vorticity_initial": d.sup_vorticity[0],
        "sup_vorticity_final": d.sup_vorticity[last],
        "vorticity_drift": d.vorticity_drift(),
        "bkm_integral": d.bkm_integral[last],
        "b0_inf_inf_max": d.b0_inf_inf.iter().copied().fold(0.0, f64::max),
        "b0_inf_1_max": d.b0_inf_1.iter().copied().fold(0.0, f64::max),
        "besov_ordering_holds": dominated,
        "besov_morrey_v_final": d.besov_morrey_v[last],
        "growth_exponent": finite_or_null(d.growth_exponent()),
    });
    if let Some(c) = &d.current {
        out["sup_current_final"] = json!(c.sup_current[last]);
        out["current_bkm_integral"] = json!(c.bkm_integral[last]);
    }
    out
}

fn all_finite(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        Value::Array(a) => a.iter().all(all_finite),
        Value::Object(o) => o.values().all(all_finite),
        _ => true,
    }
}

pub(super) fn run_solver(cfg: &ExperimentConfig) -> Result<Outcome> {
    let k = &cfg.solver;
    let mhd = cfg.command == Command::Mhd;
    let v0 = initial_field(cfg, k.init, k.init_file.as_ref(), 0)?;
    let b0 = if mhd {
        Some(match k.binit {
            InitKind::Aligned => v0.clone(),
            kind => initial_field(cfg, kind, k.binit_file.as_ref(), 1)?,
        })
    } else {
        None
    };
    let state = FlowState::new(0.0, v0, b0)?;
    let e0 = state.energy();
    let (_, dir) = cfg.output_paths();
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;

    let (sol, iteration): (Solution, Option<IterationReport>) = match k.scheme {
        Scheme::Direct => (direct_run_recorded(&state, k.horizon, k.dt, k.diag_stride)?, None),
        Scheme::Iterate => {
            let set = IterationSettings {
                horizon: k.horizon,
                dt: k.dt,
                tol: k.tol,
                max_iter: k.max_iter,
                window: cfg.window,
            };
            let (sol, rep) = match &state.b {
                None => {
                    let (v, rep) = euler_iterate(&state.v, &cfg.bm, &set)?;
                    (Solution { v, b: None }, rep)
                }
                Some(b0) => mhd_iterate(&state.v, b0, &cfg.bm, &set)?,
            };
            let stride = k.diag_stride.max(1);
            let sol = Solution {
                v: sol.v.subsample(stride),
                b: sol.b.map(|b| b.subsample(stride)),
            };
            (sol, Some(rep))
        }
    };
    let diag = blowup_diagnostics(&sol, &cfg.bm, &cfg.window, 1)?;
    diag.write_csv(&dir.join("diagnostics.csv"))?;
    let iteration_file = match &iteration {
        Some(rep) => {
            write_json(&dir.join("iteration_report.json"), rep)?;
            Some("iteration_report.json".to_string())
        }
        None => None,
    };
    let stored = sol.v.times().len();
    let snapshots = write_snapshots(&dir, &sol, snapshot_stride(cfg, stored))?;

    let end = sol.state_at_end();
    let e1 = end.energy();
    let divergence = max_relative_divergence(&sol.v).max(sol.b.as_ref().map_or(0.0, max_relative_divergence));
    let summary = diagnostics_summary(&diag);
    let iteration_summary = iteration.as_ref().map(|r| {
        json!({
            "converged": r.converged,
            "iterations": r.iterates.len(),
            "max_ratio_from_2": r.max_ratio_from(2),
            "last_difference": r.last_difference(),
        })
    });
    let energy_drift = if e0 > 0.0 { (e1 - e0).abs() / e0 } else { e1 };
    let mut report = json!({
        "command": if mhd { "mhd" } else { "euler" },
        "config_hash": cfg.hash(),
        "scheme": k.scheme,
        "steps": step_times(0.0, k.horizon, k.dt)?.len() - 1,
        "final_time": end.time,
        "energy_initial": e0,
        "energy_final": e1,
        "energy_drift": energy_drift,
        "max_divergence": divergence,
        "diagnostics": summary,
        "iteration": iteration_summary,
    });
    let healthy = all_finite(&report) && divergence <= 1e-10;
    let converged = iteration.as_ref().is_none_or(|r| r.converged);
    let passed = healthy && converged;
    report["passed"] = json!(passed);
    let text = format!(
        "{} {:?} run to t = {}: energy drift {:.3e}, sup vorticity {:.6} -> {:.6}{}",
        if mhd { "MHD" } else { "Euler" },
        k.scheme,
        end.time,
        energy_drift,
        diag.sup_vorticity[0],
        diag.sup_vorticity[diag.times.len() - 1],
        match &iteration {
            Some(r) if r.converged => format!(", converged after {} iterates", r.iterates.len()),
            Some(r) => format!(", not converged after {} iterates", r.iterates.len()),
            None => String::new(),
        }
    );
    let outputs = json!({
        "snapshots": snapshots,
        "diagnostics": "diagnostics.csv",
        "iteration_report": iteration_file,
    });
    finish(cfg, report, passed, text, outputs)
}

/// Reads a run directory after checking its manifest against its own hash
/// and, if given, the expected one.
pub fn load_run(dir: &Path, expect_hash: Option<&str>) -> Result<(RunManifest, Solution)> {
    let manifest: RunManifest = read_json(&dir.join("manifest.json"))?;
    let recomputed = manifest.config.hash();
    if recomputed != manifest.config_hash {
        return Err(Error::Format(format!(
            "{}: manifest hash {} does not match its config ({recomputed})",
            dir.display(),
            manifest.config_hash
        )));
    }
    if let Some(h) = expect_hash {
        if h != manifest.config_hash {
            return Err(Error::Format(format!(
                "{}: run was produced by config {}, expected {h}",
                dir.display(),
                manifest.config_hash
            )));
        }
    }
    if !matches!(manifest.config.command, Command::Euler | Command::Mhd) {
        return Err(Error::Format(format!("{} is not a solver run directory", dir.display())));
    }
    let grid = manifest.config.grid;
    let snaps = &manifest.outputs.snapshots;
    if snaps.is_empty() {
        return Err(Error::Format(format!("{}: run has no snapshots", dir.display())));
    }
    let mut times = Vec::new();
    let mut vs = Vec::new();
    let mut bs = Vec::new();
    for s in snaps {
        let v = io::read_vector(&dir.join(&s.v))?;
        if *v.grid() != grid {
            return Err(Error::Format(format!("{}: snapshot {} is on a different grid", dir.display(), s.v)));
        }
        times.push(s.time);
        vs.push(v);
        if let Some(b) = &s.b {
            let b = io::read_vector(&dir.join(b))?;
            if *b.grid() != grid {
                return Err(Error::Format(format!("{}: snapshot {} is on a different grid", dir.display(), s.v)));
            }
            bs.push(b);
        }
    }
    let b = if bs.is_empty() {
        None
    } else if bs.len() == vs.len() {
        Some(VectorSeries::new(times.clone(), bs)?)
    } else {
        return Err(Error::Format(format!("{}: magnetic snapshots are incomplete", dir.display())));
    };
    let v = VectorSeries::new(times, vs)?;
    Ok((manifest, Solution { v, b }))
}

pub(super) fn run_diagnose(cfg: &ExperimentConfig) -> Result<Outcome> {
    let run_dir = cfg.input.as_ref().expect("validated");
    let (manifest, sol) = load_run(run_dir, cfg.expect_hash.as_deref())?;
    let run_cfg = &manifest.config;
    let diag = blowup_diagnostics(&sol, &cfg.bm, &run_cfg.window, 1)?;
    let (_, dir) = cfg.output_paths();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    diag.write_csv(&dir.join("diagnostics.csv"))?;
    let summary = diagnostics_summary(&diag);
    let passed = all_finite(&summary) && summary["besov_ordering_holds"] == json!(true);
    let report = json!({
        "command": "diagnose",
        "config_hash": cfg.hash(),
        "run_config_hash": manifest.config_hash,
        "diagnostics": summary,
        "passed": passed,
    });
    let text = format!(
        "diagnosed {} snapshots: sup vorticity drift {:.3e}, BKM integral {:.6}",
        diag.times.len(),
        diag.vorticity_drift(),
        diag.bkm_integral[diag.times.len() - 1]
    );
    finish(cfg, report, passed, text, json!({"diagnostics": "diagnostics.csv"}))
}
