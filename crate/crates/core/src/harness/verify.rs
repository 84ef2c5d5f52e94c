use rayon::prelude::*;
use serde_json::json;

use super::{finish, ExperimentConfig, Outcome};
use crate::commutator::{lemma34_report, lemma35_report, CommutatorSplit};
use crate::corpus::{self, BandSpec};
use crate::error::Result;
use crate::flowmap::{advect_trajectories, composition_report, grid_seeds};
use crate::norms::lemmas::{bernstein_report, lemma_ratio};
use crate::paraproduct::{moser_report, MoserSplit};
use crate::report::{EstimateReport, LemmaId};
use crate::series::VectorSeries;

/// One trial of the configured inequality on fields drawn from `seed`.
pub fn trial(cfg: &ExperimentConfig, lemma: LemmaId, seed: u64) -> Result<EstimateReport> {
    let g = &cfg.grid;
    let band = cfg.band;
    let ws = &cfg.window;
    let bp = &cfg.bm;
    let scalar = |stream| corpus::random_scalar(g, seed, stream, &band);
    let report = match lemma {
        LemmaId::Bernstein => bernstein_report(&scalar(0)?, &bp.morrey, ws, 1)?,
        LemmaId::Equivalence | LemmaId::Embedding | LemmaId::LogInequality => {
            lemma_ratio(&scalar(0)?, None, lemma, bp, ws)?
        }
        LemmaId::Algebra => lemma_ratio(&scalar(0)?, Some(&scalar(1)?), lemma, bp, ws)?,
        LemmaId::Moser => {
            let split = MoserSplit::solver_default(bp);
            moser_report(&scalar(0)?, &scalar(1)?, bp, cfg.moser_variant, &split, ws)?
        }
        LemmaId::Commutator | LemmaId::CommutatorLowRegularity => {
            let v = corpus::random_solenoidal(g, seed, 2, &band)?;
            let theta = scalar(3)?;
            let split = CommutatorSplit::solver_default(bp);
            if lemma == LemmaId::Commutator {
                lemma34_report(&v, &theta, bp, &split, ws)?
            } else {
                lemma35_report(&v, &theta, bp, &split, ws)?
            }
        }
        LemmaId::Composition => {
            let drive = BandSpec {
                rms: cfg.solver.amplitude,
                ..band
            };
            let v = corpus::random_solenoidal(g, seed, 4, &drive)?;
            let k = &cfg.solver;
            let ts = advect_trajectories(&VectorSeries::steady(v, k.horizon), &grid_seeds(g), k.dt, k.horizon)?;
            composition_report(&scalar(0)?, &ts, &bp.morrey, ws)?
        }
    };
    Ok(report.with_seed(seed))
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lemma = cfg.lemma.expect("validated");
    let seeds: Vec<u64> = (0..cfg.trials).map(|i| cfg.trial_seed(i)).collect();
    let rows: Vec<EstimateReport> = seeds
        .par_iter()
        .map(|&s| trial(cfg, lemma, s))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.empirical_constant).collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let finite = ratios.iter().all(|r| r.is_finite());
    let bounded = cfg.max_ratio.is_none_or(|c| ratios.iter().all(|&r| r <= c));
    let passed = finite && bounded;
    let (max_v, min_v) = if rows.is_empty() {
        (serde_json::Value::Null, serde_json::Value::Null)
    } else {
        (json!(max), json!(min))
    };
    let report = json!({
        "command": "verify",
        "lemma": lemma.as_str(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "trials": rows,
        "max_ratio": max_v,
        "min_ratio": min_v,
        "ratio_bound": cfg.max_ratio,
        "passed": passed,
    });
    let summary = if rows.is_empty() {
        format!("estimate {lemma}: no trials")
    } else {
        format!(
            "estimate {lemma}: {} trials, ratio in [{min:.4e}, {max:.4e}]{}",
            rows.len(),
            if passed { "" } else { " (assertion failed)" }
        )
    };
    finish(cfg, report, passed, summary, json!({}))
}
