//! Commutators `[v·∇, Δ̇_j] θ = (v·∇) Δ̇_j θ - Δ̇_j ((v·∇) θ)` and the two
//! commutator estimates built on them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lp;
use crate::norms::{
    besov_morrey_norm, besov_morrey_norm_vector, exponent, fmt_exponent, lr_norm, morrey_norm,
    morrey_norm_vector, BMParams, MorreyParams, WindowSet,
};
use crate::report::{EstimateReport, LemmaId};
use crate::spectral::{self, fft, FieldKind, Ops, Padding, RealField, VectorField};

const DIV_TOL: f64 = 1e-10;

fn is_constant(v: &VectorField) -> bool {
    v.components().iter().all(|c| {
        let first = c.samples()[0];
        c.samples().iter().all(|&x| x == first)
    })
}

/// `(v·∇) θ` with alias-free products.
fn advect(v: &VectorField, theta: &RealField) -> Result<RealField> {
    let grad = spectral::gradient(theta);
    let mut acc = RealField::zeros(*theta.grid());
    for (va, ga) in v.components().iter().zip(grad.components()) {
        acc = acc.add(&spectral::product(va, ga)?)?;
    }
    Ok(acc)
}

/// One commutator field, evaluated straight from its definition.
pub fn commutator_field(
    v: &VectorField,
    theta: &RealField,
    j: i32,
    homogeneous: bool,
) -> Result<RealField> {
    let grid = *theta.grid();
    grid.check_same(v.grid())?;
    spectral::check_solenoidal(v, "advecting field v", DIV_TOL)?;
    if is_constant(v) {
        return Ok(RealField::zeros(grid));
    }
    let first = advect(v, &lp::dyadic_block(theta, j, homogeneous))?;
    let second = lp::dyadic_block(&advect(v, theta)?, j, homogeneous);
    first.sub(&second)
}

/// Every commutator field `j` in the block range, sharing transforms across
/// blocks. Agrees with [`commutator_field`] to roundoff.
pub fn commutator_blocks(
    v: &VectorField,
    theta: &RealField,
    homogeneous: bool,
) -> Result<Vec<(i32, RealField)>> {
    let grid = *theta.grid();
    grid.check_same(v.grid())?;
    spectral::check_solenoidal(v, "advecting field v", DIV_TOL)?;
    let range: Vec<i32> = lp::block_range(&grid, homogeneous).collect();
    if is_constant(v) {
        return Ok(range.into_iter().map(|j| (j, RealField::zeros(grid))).collect());
    }
    let ops = Ops::new(&grid);
    let pad = Padding::new(&grid);
    let v_fine: Vec<Vec<f64>> = v
        .components()
        .iter()
        .map(|c| pad.upsample(&ops.forward(c.samples())))
        .collect();
    let theta_hat = ops.forward(theta.samples());
    let grads: Vec<Vec<Complex64>> = (0..grid.dim).map(|a| ops.derivative(&theta_hat, a)).collect();
    let advect_fine = |grads: &[Vec<Complex64>]| -> Vec<Complex64> {
        let mut acc = vec![0.0; pad.fine().len()];
        for (va, ga) in v_fine.iter().zip(grads) {
            for (s, (x, y)) in acc.iter_mut().zip(va.iter().zip(pad.upsample(ga))) {
                *s += x * y;
            }
        }
        pad.downsample(&acc)
    };
    let full = advect_fine(&grads);
    let radii = grid.lattice_radii();
    Ok(range
        .into_par_iter()
        .map(|j| {
            let mult: Vec<f64> = radii
                .iter()
                .map(|&r| lp::block_multiplier(j, r, homogeneous))
                .collect();
            let filtered: Vec<Vec<Complex64>> = grads
                .iter()
                .map(|g| g.iter().zip(&mult).map(|(c, m)| c * m).collect())
                .collect();
            let first = advect_fine(&filtered);
            let hat: Vec<Complex64> = first
                .iter()
                .zip(&full)
                .zip(&mult)
                .map(|((a, b), m)| a - b * m)
                .collect();
            (
                j,
                RealField::from_parts(grid, fft::inverse_real(hat, grid.dim, grid.size), FieldKind::Scalar),
            )
        })
        .collect())
}

/// `(p_1, q_1, p_2, q_2)` with `1/p = 1/p_1 + 1/p_2` and
/// `1/q <= 1/q_1 + 1/q_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorSplit {
    #[serde(with = "exponent")]
    pub p1: f64,
    #[serde(with = "exponent")]
    pub q1: f64,
    #[serde(with = "exponent")]
    pub p2: f64,
    #[serde(with = "exponent")]
    pub q2: f64,
}

impl CommutatorSplit {
    /// `p_1 = ∞`, `q_1 = q_2 = q`, `p_2 = p`.
    pub fn solver_default(bp: &BMParams) -> Self {
        Self {
            p1: f64::INFINITY,
            q1: bp.q(),
            p2: bp.p(),
            q2: bp.q(),
        }
    }

    pub fn validate(&self, bp: &BMParams) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParams(format!("commutator split violates {what}")));
        if MorreyParams::new(self.p1, self.q1).is_err() {
            return bad(format!(
                "1 ≤ q1 ≤ p1 ≤ ∞ (got p1 = {}, q1 = {})",
                fmt_exponent(self.p1),
                fmt_exponent(self.q1)
            ));
        }
        if MorreyParams::new(self.p2, self.q2).is_err() {
            return bad(format!(
                "1 ≤ q2 ≤ p2 ≤ ∞ (got p2 = {}, q2 = {})",
                fmt_exponent(self.p2),
                fmt_exponent(self.q2)
            ));
        }
        if (1.0 / bp.p() - 1.0 / self.p1 - 1.0 / self.p2).abs() > 1e-12 {
            return bad("1/p = 1/p1 + 1/p2".into());
        }
        if 1.0 / bp.q() > 1.0 / self.q1 + 1.0 / self.q2 + 1e-12 {
            return bad("1/q ≤ 1/q1 + 1/q2".into());
        }
        Ok(())
    }
}

fn check_common(bp: &BMParams, split: &CommutatorSplit, lemma: LemmaId, s_min: f64) -> Result<()> {
    if !(bp.s > s_min) {
        return Err(Error::InvalidParams(format!(
            "estimate {lemma} requires s > {s_min}, got s = {}",
            bp.s
        )));
    }
    if bp.p().is_infinite() {
        return Err(Error::InvalidParams(format!(
            "estimate {lemma} requires p < ∞"
        )));
    }
    split.validate(bp)
}

/// `‖(2^{js} ‖[v·∇, Δ̇_j] θ‖_{M^p_q})_j‖_{ℓ^r}`.
pub fn commutator_lhs(v: &VectorField, theta: &RealField, bp: &BMParams, ws: &WindowSet) -> Result<f64> {
    let blocks = commutator_blocks(v, theta, true)?;
    let weighted: Vec<f64> = blocks
        .par_iter()
        .map(|(j, c)| 2f64.powf(*j as f64 * bp.s) * morrey_norm(c, &bp.morrey, ws))
        .collect();
    Ok(lr_norm(&weighted, bp.r))
}

/// `sup_x |∇v(x)|` with the Frobenius norm of the Jacobian.
pub fn gradient_sup_norm(v: &VectorField) -> f64 {
    let jac = spectral::jacobian(v);
    let all: Vec<RealField> = jac.into_iter().flatten().collect();
    spectral::magnitude_of(&all).into_iter().fold(0.0, f64::max)
}

fn echo(bp: &BMParams, split: &CommutatorSplit, ws: &WindowSet) -> serde_json::Value {
    json!({
        "s": bp.s,
        "p": fmt_exponent(bp.p()),
        "q": fmt_exponent(bp.q()),
        "r": fmt_exponent(bp.r),
        "split": split,
        "kmax": ws.kmax,
        "stride": ws.stride,
    })
}

/// Commutator estimate with `‖∇θ‖_{M^{p_1}_{q_1}} ‖v‖_{N^s_{p_2,q_2,r}}` as the
/// second right-hand term. Needs `s > 0`, `p < ∞`.
pub fn lemma34_report(
    v: &VectorField,
    theta: &RealField,
    bp: &BMParams,
    split: &CommutatorSplit,
    ws: &WindowSet,
) -> Result<EstimateReport> {
    check_common(bp, split, LemmaId::Commutator, 0.0)?;
    let grid = *theta.grid();
    ws.validate(&grid)?;
    let lhs = commutator_lhs(v, theta, bp, ws)?;
    let hom = bp.homogeneous(true);
    let first = gradient_sup_norm(v) * besov_morrey_norm(theta, &hom, ws);
    let grad_theta = spectral::gradient(theta);
    let second = morrey_norm_vector(&grad_theta, &MorreyParams::new(split.p1, split.q1)?, ws)
        * besov_morrey_norm_vector(v, &BMParams::new(bp.s, split.p2, split.q2, bp.r, false)?, ws);
    EstimateReport::new(
        LemmaId::Commutator,
        lhs,
        vec![("grad_v_sup_times_theta", first), ("grad_theta_times_v", second)],
        echo(bp, split, ws),
        &grid,
    )
}

/// Commutator estimate with `‖θ‖_{M^{p_1}_{q_1}} ‖v‖_{Ṅ^{s+1}_{p_2,q_2,r}}` as
/// the second right-hand term. Needs `s > -1`, `p < ∞`.
pub fn lemma35_report(
    v: &VectorField,
    theta: &RealField,
    bp: &BMParams,
    split: &CommutatorSplit,
    ws: &WindowSet,
) -> Result<EstimateReport> {
    check_common(bp, split, LemmaId::CommutatorLowRegularity, -1.0)?;
    let grid = *theta.grid();
    ws.validate(&grid)?;
    let lhs = commutator_lhs(v, theta, bp, ws)?;
    let hom = bp.homogeneous(true);
    let first = gradient_sup_norm(v) * besov_morrey_norm(theta, &hom, ws);
    let second = morrey_norm(theta, &MorreyParams::new(split.p1, split.q1)?, ws)
        * besov_morrey_norm_vector(v, &BMParams::new(bp.s + 1.0, split.p2, split.q2, bp.r, true)?, ws);
    EstimateReport::new(
        LemmaId::CommutatorLowRegularity,
        lhs,
        vec![("grad_v_sup_times_theta", first), ("theta_times_v", second)],
        echo(bp, split, ws),
        &grid,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, BandSpec};
    use crate::spectral::{to_spectral, Grid};

    fn grid(n: usize) -> Grid {
        Grid::square(n).unwrap()
    }

    fn band(kmax: i64) -> BandSpec {
        BandSpec {
            kmax,
            slope: 1.0,
            rms: 1.0,
        }
    }

    fn pair(g: &Grid, stream: u64, kmax: i64) -> (VectorField, RealField) {
        let v = corpus::random_solenoidal(g, 41, 2 * stream, &band(kmax)).unwrap();
        let t = corpus::random_scalar(g, 41, 2 * stream + 1, &band(kmax)).unwrap();
        (v, t)
    }

    fn max_abs_diff(a: &RealField, b: &RealField) -> f64 {
        a.samples()
            .iter()
            .zip(b.samples())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn constant_and_zero_advectors() {
        let g = grid(32);
        let (_, t) = pair(&g, 0, 8);
        let c = VectorField::constant(g, &[0.3, -2.0]);
        for j in 0..=5 {
            assert_eq!(commutator_field(&c, &t, j, true).unwrap().sup_norm(), 0.0);
            let z = VectorField::zeros(g);
            assert_eq!(commutator_field(&z, &t, j, true).unwrap().sup_norm(), 0.0);
        }
        let ws = WindowSet::full(&g);
        let bp = BMParams::new(2.5, 4.0, 2.0, 2.0, true).unwrap();
        let split = CommutatorSplit::solver_default(&bp);
        let r = lemma34_report(&c, &t, &bp, &split, &ws).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.empirical_constant, 0.0);
        let r = lemma35_report(&c, &t, &bp.with_s(1.5), &split, &ws).unwrap();
        assert_eq!(r.empirical_constant, 0.0);
    }

    #[test]
    fn matches_convolution_oracle() {
        let g = grid(32);
        let (v, t) = pair(&g, 1, 5);
        let j = 2;
        let got = to_spectral(&commutator_field(&v, &t, j, true).unwrap());
        let ks = g.wavevectors();
        let radii = g.lattice_radii();
        let scale = g.frequency_scale();
        let vh: Vec<_> = v.components().iter().map(to_spectral).collect();
        let th = to_spectral(&t);
        let n = g.size as i64;
        let mut expect = vec![Complex64::default(); g.len()];
        for (a, k) in ks.iter().enumerate() {
            for (b, l) in ks.iter().enumerate() {
                let tc = th.coefficients()[b];
                if tc.norm() == 0.0 {
                    continue;
                }
                let sum = [k[0] + l[0], k[1] + l[1]];
                if sum.iter().any(|&c| c < -n / 2 || c >= n / 2) {
                    continue;
                }
                let idx = [sum[0].rem_euclid(n) as usize, sum[1].rem_euclid(n) as usize];
                let out = g.flat_index(&idx);
                let weight = lp::homogeneous_multiplier(j, radii[b])
                    - lp::homogeneous_multiplier(j, radii[out]);
                if weight == 0.0 {
                    continue;
                }
                let mut dot = Complex64::default();
                for ax in 0..2 {
                    dot += vh[ax].coefficients()[a] * Complex64::new(0.0, scale * l[ax] as f64);
                }
                expect[out] += dot * tc * weight;
            }
        }
        let err = got
            .coefficients()
            .iter()
            .zip(&expect)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        let size = expect.iter().fold(0.0f64, |m, y| m.max(y.norm()));
        assert!(size > 1e-3);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn batched_matches_reference() {
        let g = grid(64);
        let (v, t) = pair(&g, 2, 20);
        let batched = commutator_blocks(&v, &t, true).unwrap();
        for (j, c) in &batched {
            let reference = commutator_field(&v, &t, *j, true).unwrap();
            assert!(max_abs_diff(c, &reference) < 1e-12, "j = {j}");
        }
        let inhom = commutator_blocks(&v, &t, false).unwrap();
        assert_eq!(inhom[0].0, -1);
        let reference = commutator_field(&v, &t, -1, false).unwrap();
        assert!(max_abs_diff(&inhom[0].1, &reference) < 1e-12);
    }

    #[test]
    fn linear_in_each_argument() {
        let g = grid(32);
        let (v1, t1) = pair(&g, 3, 10);
        let (v2, t2) = pair(&g, 4, 10);
        let (a, b) = (1.7, -0.4);
        let j = 3;
        let c = |v: &VectorField, t: &RealField| commutator_field(v, t, j, true).unwrap();
        let lhs = c(&v1, &t1.scale(a).add(&t2.scale(b)).unwrap());
        let rhs = c(&v1, &t1).scale(a).add(&c(&v1, &t2).scale(b)).unwrap();
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        let lhs = c(&v1.scale(a).add(&v2.scale(b)).unwrap(), &t1);
        let rhs = c(&v1, &t1).scale(a).add(&c(&v2, &t1).scale(b)).unwrap();
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn low_frequency_data_gives_small_high_block() {
        let g = grid(128);
        let v = corpus::random_solenoidal(&g, 5, 0, &band(2)).unwrap();
        let t = corpus::random_scalar(&g, 5, 1, &band(2)).unwrap();
        let c = commutator_field(&v, &t, 6, true).unwrap();
        assert!(c.sup_norm() < 1e-12);
    }

    #[test]
    fn ratios_are_scale_invariant() {
        let g = grid(32);
        let ws = WindowSet::full(&g);
        let (v, t) = pair(&g, 6, 10);
        let bp = BMParams::new(2.5, 4.0, 2.0, 2.0, true).unwrap();
        let split = CommutatorSplit::solver_default(&bp);
        let base = lemma34_report(&v, &t, &bp, &split, &ws).unwrap();
        let scaled = lemma34_report(&v, &t.scale(7.5), &bp, &split, &ws).unwrap();
        let rel = (base.empirical_constant - scaled.empirical_constant).abs() / base.empirical_constant;
        assert!(rel < 1e-12);
        let bp5 = bp.with_s(1.5);
        let base = lemma35_report(&v, &t, &bp5, &split, &ws).unwrap();
        let scaled = lemma35_report(&v.scale(0.2), &t, &bp5, &split, &ws).unwrap();
        let rel = (base.empirical_constant - scaled.empirical_constant).abs() / base.empirical_constant;
        assert!(rel < 1e-12);
    }

    #[test]
    fn parameter_checks() {
        let g = grid(16);
        let ws = WindowSet::full(&g);
        let (v, t) = pair(&g, 7, 5);
        let bp = BMParams::new(2.5, 4.0, 2.0, 2.0, true).unwrap();
        let split = CommutatorSplit::solver_default(&bp);
        assert!(lemma34_report(&v, &t, &bp.with_s(-0.5), &split, &ws).is_err());
        assert!(lemma35_report(&v, &t, &bp.with_s(-0.5), &split, &ws).is_ok());
        assert!(lemma35_report(&v, &t, &bp.with_s(-1.5), &split, &ws).is_err());
        let inf = bp.with_morrey(MorreyParams::sup());
        assert!(lemma34_report(&v, &t, &inf, &split, &ws).is_err());
        let bad = CommutatorSplit { p1: 4.0, ..split };
        let err = lemma34_report(&v, &t, &bp, &bad, &ws).unwrap_err().to_string();
        assert!(err.contains("1/p = 1/p1 + 1/p2"), "{err}");
        let compressible = spectral::gradient(&t);
        assert!(matches!(
            commutator_field(&compressible, &t, 1, true),
            Err(Error::Divergence { .. })
        ));
    }
}
