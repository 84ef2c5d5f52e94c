use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Solution;
use crate::commutator::gradient_sup_norm;
use crate::error::{Error, Result};
use crate::norms::{besov_infinity_norm_vector, besov_morrey_norm_vector, BMParams, WindowSet};
use crate::series::VectorSeries;
use crate::spectral::{self, magnitude_of, VectorField};

/// Blow-up functionals of the curl of the magnetic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentDiagnostics {
    pub sup_current: Vec<f64>,
    pub b0_inf_inf: Vec<f64>,
    pub b0_inf_1: Vec<f64>,
    pub bkm_integral: Vec<f64>,
    pub besov_morrey_b: Vec<f64>,
}

/// Blow-up monitor sampled at every stored time of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    /// `‖ω(t)‖_∞` with `ω = ∇×v`.
    pub sup_vorticity: Vec<f64>,
    /// `‖ω(t)‖_{Ḃ⁰_{∞,∞}}`.
    pub b0_inf_inf: Vec<f64>,
    /// `‖ω(t)‖_{Ḃ⁰_{∞,1}}`.
    pub b0_inf_1: Vec<f64>,
    /// Trapezoid rule for `∫₀ᵗ ‖ω‖_∞`.
    pub bkm_integral: Vec<f64>,
    /// `‖v(t)‖_{N^s_{p,q,r}}`.
    pub besov_morrey_v: Vec<f64>,
    /// `‖∇v(t)‖_∞`.
    pub grad_v_sup: Vec<f64>,
    pub current: Option<CurrentDiagnostics>,
}

struct Sample {
    sup: f64,
    b_inf: f64,
    b_one: f64,
    bm: f64,
    grad: f64,
}

fn sample(u: &VectorField, bp: &BMParams, ws: &WindowSet) -> Sample {
    let w = spectral::curl(u);
    Sample {
        sup: magnitude_of(&w).into_iter().fold(0.0, f64::max),
        b_inf: besov_infinity_norm_vector(&w, 0.0, f64::INFINITY, true),
        b_one: besov_infinity_norm_vector(&w, 0.0, 1.0, true),
        bm: besov_morrey_norm_vector(u, bp, ws),
        grad: gradient_sup_norm(u),
    }
}

fn trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for i in 0..values.len() {
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        }
        out.push(acc);
    }
    out
}

fn sample_series(series: &VectorSeries, bp: &BMParams, ws: &WindowSet) -> Vec<Sample> {
    series
        .fields()
        .par_iter()
        .take(series.times().len())
        .map(|u| sample(u, bp, ws))
        .collect()
}

/// Vorticity (and current) functionals at every stored time, with `stride`
/// subsampling of the stored series.
pub fn blowup_diagnostics(sol: &Solution, bp: &BMParams, ws: &WindowSet, stride: usize) -> Result<DiagnosticsSeries> {
    ws.validate(sol.v.grid())?;
    let v = sol.v.subsample(stride);
    let times = v.times().to_vec();
    let sv = sample_series(&v, bp, ws);
    let col = |s: &[Sample], f: fn(&Sample) -> f64| s.iter().map(f).collect::<Vec<f64>>();
    let sup = col(&sv, |s| s.sup);
    let current = match &sol.b {
        Some(b) => {
            let b = b.subsample(stride);
            if b.times() != times.as_slice() {
                return Err(Error::InvalidParams("velocity and magnetic series have different times".into()));
            }
            let sb = sample_series(&b, bp, ws);
            let sup_b = col(&sb, |s| s.sup);
            Some(CurrentDiagnostics {
                bkm_integral: trapezoid(&times, &sup_b),
                sup_current: sup_b,
                b0_inf_inf: col(&sb, |s| s.b_inf),
                b0_inf_1: col(&sb, |s| s.b_one),
                besov_morrey_b: col(&sb, |s| s.bm),
            })
        }
        None => None,
    };
    Ok(DiagnosticsSeries {
        bkm_integral: trapezoid(&times, &sup),
        sup_vorticity: sup,
        b0_inf_inf: col(&sv, |s| s.b_inf),
        b0_inf_1: col(&sv, |s| s.b_one),
        besov_morrey_v: col(&sv, |s| s.bm),
        grad_v_sup: col(&sv, |s| s.grad),
        times,
        current,
    })
}

impl DiagnosticsSeries {
    /// Smallest `C` with `‖v(t)‖_{N^s} <= ‖v(0)‖_{N^s} exp(C ∫₀ᵗ ‖∇v‖_∞)`
    /// at every sample.
    pub fn growth_exponent(&self) -> f64 {
        let integral = trapezoid(&self.times, &self.grad_v_sup);
        let base = self.besov_morrey_v[0];
        self.besov_morrey_v
            .iter()
            .zip(&integral)
            .skip(1)
            .filter(|(&n, _)| base > 0.0 && n > base)
            .map(|(&n, &i)| if i > 0.0 { (n / base).ln() / i } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }

    /// Largest relative deviation of `‖ω(t)‖_∞` from its initial value.
    pub fn vorticity_drift(&self) -> f64 {
        let w0 = self.sup_vorticity[0];
        if w0 == 0.0 {
            return self.sup_vorticity.iter().fold(0.0, |m, x| m.max(x.abs()));
        }
        self.sup_vorticity
            .iter()
            .fold(0.0, |m, x| m.max((x - w0).abs() / w0))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,sup_vorticity,b0_inf_inf,b0_inf_1,bkm_integral,besov_morrey_v,grad_v_sup");
        if self.current.is_some() {
            out.push_str(",sup_current,current_b0_inf_inf,current_b0_inf_1,current_bkm_integral,besov_morrey_b");
        }
        out.push('\n');
        for i in 0..self.times.len() {
            let _ = write!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                self.times[i],
                self.sup_vorticity[i],
                self.b0_inf_inf[i],
                self.b0_inf_1[i],
                self.bkm_integral[i],
                self.besov_morrey_v[i],
                self.grad_v_sup[i]
            );
            if let Some(c) = &self.current {
                let _ = write!(
                    out,
                    ",{:e},{:e},{:e},{:e},{:e}",
                    c.sup_current[i], c.b0_inf_inf[i], c.b0_inf_1[i], c.bkm_integral[i], c.besov_morrey_b[i]
                );
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
