//! Morrey, Besov-Morrey and plain Besov norms on the torus.

mod morrey;
mod params;
pub mod lemmas;

pub use morrey::{morrey_norm, morrey_norm_of_magnitude, morrey_norm_vector};
pub(crate) use morrey::morrey_norm_components;
pub use params::*;

use rayon::prelude::*;

use crate::lp::{self, DyadicDecomposition};
use crate::spectral::{magnitude_of, RealField, VectorField};

/// `ℓ^r` norm of a finite sequence.
pub fn lr_norm(values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        values.iter().fold(0.0, |m, &x| m.max(x.abs()))
    } else if r == 1.0 {
        values.iter().map(|x| x.abs()).sum()
    } else {
        values.iter().map(|x| x.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

fn weighted(blocks: &[(i32, f64)], s: f64) -> Vec<f64> {
    blocks.iter().map(|&(j, m)| 2f64.powf(j as f64 * s) * m).collect()
}

/// `(j, ‖Δ_j f‖_{M^p_q})` for every block that can be nonzero on the grid.
pub fn block_morrey_norms(
    f: &RealField,
    mp: &MorreyParams,
    homogeneous: bool,
    ws: &WindowSet,
) -> Vec<(i32, f64)> {
    decomposition_morrey_norms(&lp::decompose(f, homogeneous), mp, ws)
}

pub(crate) fn decomposition_morrey_norms(
    d: &DyadicDecomposition,
    mp: &MorreyParams,
    ws: &WindowSet,
) -> Vec<(i32, f64)> {
    d.blocks
        .par_iter()
        .enumerate()
        .map(|(i, b)| (d.j_min + i as i32, morrey_norm(b, mp, ws)))
        .collect()
}

/// `‖(2^{js} ‖Δ_j f‖_{M^p_q})_j‖_{ℓ^r}`; the homogeneous variant ignores the
/// mean.
pub fn besov_morrey_norm(f: &RealField, bp: &BMParams, ws: &WindowSet) -> f64 {
    let blocks = block_morrey_norms(f, &bp.morrey, bp.homogeneous, ws);
    lr_norm(&weighted(&blocks, bp.s), bp.r)
}

/// Block norms of a vector field, using the pointwise magnitude of each
/// vector-valued block.
pub fn block_morrey_norms_vector(
    v: &VectorField,
    mp: &MorreyParams,
    homogeneous: bool,
    ws: &WindowSet,
) -> Vec<(i32, f64)> {
    components_block_norms(v.components(), mp, homogeneous, ws)
}

pub(crate) fn components_block_norms(
    comps: &[RealField],
    mp: &MorreyParams,
    homogeneous: bool,
    ws: &WindowSet,
) -> Vec<(i32, f64)> {
    let decs: Vec<DyadicDecomposition> = comps
        .iter()
        .map(|c| lp::decompose(c, homogeneous))
        .collect();
    let j_min = decs[0].j_min;
    (0..decs[0].blocks.len())
        .into_par_iter()
        .map(|i| {
            let parts: Vec<RealField> = decs.iter().map(|d| d.blocks[i].clone()).collect();
            (j_min + i as i32, morrey_norm_components(&parts, mp, ws))
        })
        .collect()
}

pub fn besov_morrey_norm_vector(v: &VectorField, bp: &BMParams, ws: &WindowSet) -> f64 {
    let blocks = block_morrey_norms_vector(v, &bp.morrey, bp.homogeneous, ws);
    lr_norm(&weighted(&blocks, bp.s), bp.r)
}

/// `‖(2^{js} ‖Δ_j f‖_∞)_j‖_{ℓ^r}`.
pub fn besov_infinity_norm(f: &RealField, s: f64, r: f64, homogeneous: bool) -> f64 {
    let d = lp::decompose(f, homogeneous);
    let blocks: Vec<(i32, f64)> = d.blocks_with_index().map(|(j, b)| (j, b.sup_norm())).collect();
    lr_norm(&weighted(&blocks, s), r)
}

/// Vector version of [`besov_infinity_norm`] using pointwise magnitudes.
pub fn besov_infinity_norm_vector(comps: &[RealField], s: f64, r: f64, homogeneous: bool) -> f64 {
    let decs: Vec<DyadicDecomposition> = comps
        .iter()
        .map(|c| lp::decompose(c, homogeneous))
        .collect();
    let blocks: Vec<(i32, f64)> = (0..decs[0].blocks.len())
        .map(|i| {
            let parts: Vec<RealField> = decs.iter().map(|d| d.blocks[i].clone()).collect();
            let sup = magnitude_of(&parts).into_iter().fold(0.0, f64::max);
            (decs[0].j_min + i as i32, sup)
        })
        .collect();
    lr_norm(&weighted(&blocks, s), r)
}
