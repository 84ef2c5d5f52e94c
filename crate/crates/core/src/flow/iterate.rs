use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_linear_system, step_times, Solution};
use crate::error::{Error, Result};
use crate::lp;
use crate::norms::{besov_morrey_norm_vector, fmt_exponent, BMParams, WindowSet};
use crate::series::VectorSeries;
use crate::spectral::{self, Grid, VectorField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSettings {
    pub horizon: f64,
    pub dt: f64,
    /// Stop once the difference norm falls below `tol · ‖v0‖_{N^{s-1}}`.
    pub tol: f64,
    pub max_iter: usize,
    pub window: WindowSet,
}

impl IterationSettings {
    pub fn new(grid: &Grid, horizon: f64, dt: f64) -> Self {
        Self {
            horizon,
            dt,
            tol: 1e-8,
            max_iter: 30,
            window: WindowSet::full(grid),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    /// Record `m` describes the step from `u^m` to `u^{m+1}`, starting at 0.
    pub m: usize,
    /// `sup_t ‖u^{m+1}(t)‖_{N^s}`.
    pub norm_s: f64,
    /// `sup_t ‖u^{m+1}(t) - u^m(t)‖_{N^{s-1}}`.
    pub difference: f64,
    /// `difference_m / difference_{m-1}`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub system: String,
    pub s: f64,
    pub p: String,
    pub q: String,
    pub r: String,
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
    /// `‖u0‖_{N^{s-1}}`, the scale the tolerance is relative to.
    pub reference_norm: f64,
    pub iterates: Vec<IterateRecord>,
    pub converged: bool,
}

impl IterationReport {
    pub fn ratios(&self) -> Vec<(usize, f64)> {
        self.iterates
            .iter()
            .filter_map(|r| r.ratio.map(|x| (r.m, x)))
            .collect()
    }

    /// Largest contraction ratio among iterates `m >= from`.
    pub fn max_ratio_from(&self, from: usize) -> Option<f64> {
        self.ratios()
            .into_iter()
            .filter(|&(m, _)| m >= from)
            .map(|(_, r)| r)
            .reduce(f64::max)
    }

    pub fn last_difference(&self) -> Option<f64> {
        self.iterates.last().map(|r| r.difference)
    }
}

/// `S_{m}` on every component, identity once `m` passes the top block.
fn truncated_data(v: &VectorField, m: usize) -> VectorField {
    let top = lp::top_block(v.grid());
    if m as i32 > top {
        return v.clone();
    }
    v.map(|c| lp::low_pass(c, m as i32))
}

fn sup_in_time(series: &[&VectorSeries], bp: &BMParams, ws: &WindowSet) -> f64 {
    let times = series[0].times().to_vec();
    times
        .par_iter()
        .map(|&t| series.iter().map(|s| besov_morrey_norm_vector(&s.at(t), bp, ws)).sum::<f64>())
        .reduce(|| 0.0, f64::max)
}

fn difference_in_time(a: &[&VectorSeries], b: &[&VectorSeries], bp: &BMParams, ws: &WindowSet) -> Result<f64> {
    let times = a[0].times().to_vec();
    times
        .par_iter()
        .map(|&t| -> Result<f64> {
            let mut total = 0.0;
            for (x, y) in a.iter().zip(b) {
                total += besov_morrey_norm_vector(&x.at(t).sub(&y.at(t))?, bp, ws);
            }
            Ok(total)
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))
}

fn check_inputs(v0: &VectorField, b0: Option<&VectorField>, bp: &BMParams, set: &IterationSettings) -> Result<()> {
    let g = v0.grid();
    bp.check_solver_range(g.dim)?;
    set.window.validate(g)?;
    step_times(0.0, set.horizon, set.dt)?;
    if !(set.tol >= 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be nonnegative, got {}", set.tol)));
    }
    spectral::check_solenoidal(v0, "initial velocity", 1e-10)?;
    if let Some(b0) = b0 {
        g.check_same(b0.grid())?;
        spectral::check_solenoidal(b0, "initial magnetic field", 1e-10)?;
    }
    Ok(())
}

fn run(
    v0: &VectorField,
    b0: Option<&VectorField>,
    bp: &BMParams,
    set: &IterationSettings,
) -> Result<(Solution, IterationReport)> {
    check_inputs(v0, b0, bp, set)?;
    let grid = *v0.grid();
    let ws = &set.window;
    let bp_s = bp.homogeneous(false);
    let bp_low = bp_s.with_s(bp.s - 1.0);
    let reference_norm = besov_morrey_norm_vector(v0, &bp_low, ws)
        + b0.map_or(0.0, |b| besov_morrey_norm_vector(b, &bp_low, ws));
    let threshold = set.tol * reference_norm;

    let mut current = Solution {
        v: VectorSeries::zeros(grid, set.horizon),
        b: b0.map(|_| VectorSeries::zeros(grid, set.horizon)),
    };
    let mut iterates: Vec<IterateRecord> = Vec::new();
    let mut converged = false;
    for m in 0..set.max_iter {
        let v_init = truncated_data(v0, m + 1);
        let b_init = b0.map(|b| truncated_data(b, m + 1));
        let next = solve_linear_system(
            &current.v,
            current.b.as_ref(),
            &v_init,
            b_init.as_ref(),
            set.horizon,
            set.dt,
        )?;
        let parts = |s: &Solution| -> Vec<VectorSeries> {
            let mut out = vec![s.v.clone()];
            out.extend(s.b.clone());
            out
        };
        let (np, cp) = (parts(&next), parts(&current));
        let nref: Vec<&VectorSeries> = np.iter().collect();
        let cref: Vec<&VectorSeries> = cp.iter().collect();
        let norm_s = sup_in_time(&nref, &bp_s, ws);
        let difference = difference_in_time(&nref, &cref, &bp_low, ws)?;
        let ratio = iterates.last().and_then(|prev| {
            if prev.difference > 0.0 {
                Some(difference / prev.difference)
            } else {
                None
            }
        });
        iterates.push(IterateRecord {
            m,
            norm_s,
            difference,
            ratio,
        });
        current = next;
        if difference <= threshold {
            converged = true;
            break;
        }
    }
    let report = IterationReport {
        system: if b0.is_some() { "mhd" } else { "euler" }.into(),
        s: bp.s,
        p: fmt_exponent(bp.p()),
        q: fmt_exponent(bp.q()),
        r: fmt_exponent(bp.r),
        horizon: set.horizon,
        dt: set.dt,
        tol: set.tol,
        reference_norm,
        iterates,
        converged,
    };
    Ok((current, report))
}

/// Successive approximation for Euler: `v^0 = 0` and `v^{m+1}` solves the
/// linear transport problem driven by `v^m` from `S_{m+1} v0`.
/// Non-convergence within `max_iter` is reported, not raised.
pub fn euler_iterate(
    v0: &VectorField,
    bp: &BMParams,
    set: &IterationSettings,
) -> Result<(VectorSeries, IterationReport)> {
    let (sol, report) = run(v0, None, bp, set)?;
    Ok((sol.v, report))
}

/// Successive approximation for ideal MHD: `(v^{m+1}, b^{m+1})` solves the
/// coupled linear system driven by `(v^m, b^m)`.
pub fn mhd_iterate(
    v0: &VectorField,
    b0: &VectorField,
    bp: &BMParams,
    set: &IterationSettings,
) -> Result<(Solution, IterationReport)> {
    run(v0, Some(b0), bp, set)
}
