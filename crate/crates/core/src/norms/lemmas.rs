//! Evaluators for the embedding, equivalence, algebra, logarithmic and
//! Bernstein inequalities. Each returns the left side, the right side
//! without its constant, and their ratio.

use serde_json::json;

use super::{
    besov_infinity_norm, besov_morrey_norm, decomposition_morrey_norms, fmt_exponent, morrey_norm,
    BMParams, MorreyParams, WindowSet,
};
use crate::error::{Error, Result};
use crate::lp;
use crate::report::{EstimateReport, LemmaId};
use crate::spectral::{self, RealField};

fn echo(bp: &BMParams, ws: &WindowSet) -> serde_json::Value {
    json!({
        "s": bp.s,
        "p": fmt_exponent(bp.p()),
        "q": fmt_exponent(bp.q()),
        "r": fmt_exponent(bp.r),
        "homogeneous": bp.homogeneous,
        "kmax": ws.kmax,
        "stride": ws.stride,
    })
}

fn range_error(lemma: LemmaId, what: String) -> Error {
    Error::InvalidParams(format!("estimate {lemma} requires {what}"))
}

/// Evaluates one of the scalar inequalities on `f` (and `g` for the algebra
/// estimate).
pub fn lemma_ratio(
    f: &RealField,
    g: Option<&RealField>,
    lemma: LemmaId,
    bp: &BMParams,
    ws: &WindowSet,
) -> Result<EstimateReport> {
    let grid = *f.grid();
    ws.validate(&grid)?;
    let n = grid.dim as f64;
    let inhom = bp.homogeneous(false);
    let hom = bp.homogeneous(true);
    let params = echo(bp, ws);
    match lemma {
        LemmaId::Equivalence => {
            if !(bp.s > 0.0) {
                return Err(range_error(lemma, format!("s > 0, got s = {}", bp.s)));
            }
            let lhs = besov_morrey_norm(f, &inhom, ws);
            let m = morrey_norm(f, &bp.morrey, ws);
            let h = besov_morrey_norm(f, &hom, ws);
            EstimateReport::new(lemma, lhs, vec![("morrey", m), ("homogeneous_besov_morrey", h)], params, &grid)
        }
        LemmaId::Embedding => {
            if !(bp.s > 0.0) {
                return Err(range_error(lemma, format!("s > 0, got s = {}", bp.s)));
            }
            let lhs = besov_infinity_norm(f, bp.s - n / bp.p(), bp.r, true);
            let rhs = besov_morrey_norm(f, &hom, ws);
            EstimateReport::new(lemma, lhs, vec![("homogeneous_besov_morrey", rhs)], params, &grid)
        }
        LemmaId::Algebra => {
            if !bp.is_algebra(grid.dim) {
                return Err(range_error(
                    lemma,
                    format!(
                        "s > n/p, or s = n/p with r = 1 (got s = {}, n/p = {}, r = {})",
                        bp.s,
                        n / bp.p(),
                        fmt_exponent(bp.r)
                    ),
                ));
            }
            let g = g.ok_or_else(|| range_error(lemma, "a second factor g".into()))?;
            let fg = spectral::product(f, g)?;
            let lhs = besov_morrey_norm(&fg, bp, ws);
            let nf = besov_morrey_norm(f, bp, ws);
            let ng = besov_morrey_norm(g, bp, ws);
            EstimateReport::new(lemma, lhs, vec![("product_of_norms", nf * ng)], params, &grid)
        }
        LemmaId::LogInequality => {
            if !(bp.s > n / bp.p()) {
                return Err(range_error(
                    lemma,
                    format!("s > n/p = {}, got s = {}", n / bp.p(), bp.s),
                ));
            }
            let lhs = f.sup_norm();
            let b0 = besov_infinity_norm(f, 0.0, f64::INFINITY, true);
            let full = besov_morrey_norm(f, &inhom, ws);
            let log_plus = if full > 1.0 { full.ln() } else { 0.0 };
            EstimateReport::new(
                lemma,
                lhs,
                vec![("one", 1.0), ("besov_log", b0 * (log_plus + 1.0))],
                params,
                &grid,
            )
        }
        LemmaId::Bernstein => bernstein_report(f, &bp.morrey, ws, 1),
        other => Err(Error::InvalidParams(format!(
            "estimate {other} is not a scalar-field estimate; use its dedicated evaluator"
        ))),
    }
}

/// Per-block ratios `‖Λ^k Δ̇_j f‖_{M^p_q} / ((2π/L)^k 2^{jk} ‖Δ̇_j f‖_{M^p_q})`
/// with `Λ = (-Δ)^{1/2}`, over every nonzero homogeneous block.
pub fn bernstein_ratios(
    f: &RealField,
    mp: &MorreyParams,
    ws: &WindowSet,
    order: u32,
) -> Result<Vec<(i32, f64)>> {
    if order == 0 {
        return Err(Error::InvalidParams("derivative order must be >= 1".into()));
    }
    let grid = *f.grid();
    ws.validate(&grid)?;
    let scale = grid.frequency_scale();
    let radii = grid.lattice_radii();
    let d = lp::decompose(f, true);
    let base = decomposition_morrey_norms(&d, mp, ws);
    let peak = base.iter().fold(0.0f64, |m, &(_, x)| m.max(x));
    let mut out = Vec::new();
    for ((j, block), &(_, norm)) in d.blocks_with_index().zip(&base) {
        if norm <= 1e-12 * peak || norm == 0.0 {
            continue;
        }
        let deriv = spectral::apply_multiplier(block, |i| (scale * radii[i]).powi(order as i32));
        let top = morrey_norm(&deriv, mp, ws);
        let unit = (scale * 2f64.powi(j)).powi(order as i32);
        out.push((j, top / (unit * norm)));
    }
    Ok(out)
}

/// Bernstein evaluation as a report: `ratio` is the largest per-block ratio,
/// and the smallest one is echoed in `params.min_ratio`.
pub fn bernstein_report(
    f: &RealField,
    mp: &MorreyParams,
    ws: &WindowSet,
    order: u32,
) -> Result<EstimateReport> {
    let ratios = bernstein_ratios(f, mp, ws, order)?;
    let max = ratios.iter().fold(0.0f64, |m, &(_, r)| m.max(r));
    let min = ratios.iter().fold(f64::INFINITY, |m, &(_, r)| m.min(r));
    let params = json!({
        "p": fmt_exponent(mp.p),
        "q": fmt_exponent(mp.q),
        "order": order,
        "kmax": ws.kmax,
        "stride": ws.stride,
        "min_ratio": if ratios.is_empty() { 0.0 } else { min },
        "blocks": ratios.iter().map(|&(j, r)| json!({"j": j, "ratio": r})).collect::<Vec<_>>(),
    });
    let rhs = if ratios.is_empty() { 0.0 } else { 1.0 };
    EstimateReport::new(LemmaId::Bernstein, max, vec![("unit", rhs)], params, f.grid())
}
