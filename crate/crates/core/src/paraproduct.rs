//! Bony decomposition `f g = T_f g + T_g f + R(f, g)` with alias-free
//! products, and the Moser-type product estimates.
//!
//! `T_f g = Σ_j S_{j-2} f · Δ̇_j g`, where `S_{j-2} f` is the mean of `f` plus
//! every block `Δ̇_{j'} f` with `j' <= j - 2`. The remainder collects the
//! near-diagonal pairs `|j - j'| <= 1` together with the product of the
//! means, so the three parts add up to `f g` exactly.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lp::{self, chi};
use crate::norms::{
    besov_morrey_norm, exponent, fmt_exponent, morrey_norm, BMParams, MorreyParams, WindowSet,
};
use crate::report::{EstimateReport, LemmaId};
use crate::spectral::{self, fft, FieldKind, Padding, RealField};

/// The three Bony parts of a product and the reconstruction residual
/// `‖T_f g + T_g f + R - f g‖_{L²} / ‖f g‖_{L²}`.
#[derive(Debug, Clone)]
pub struct BonySplit {
    pub t_fg: RealField,
    pub t_gf: RealField,
    pub remainder: RealField,
    pub residual: f64,
}

type Multiplier = Vec<f64>;

/// `Σ_i (A_i f)(B_i g)` for Fourier multipliers `A_i`, `B_i`, with each
/// product formed on the padded grid.
fn bilinear_sum(f: &RealField, g: &RealField, pairs: &[(Multiplier, Multiplier)]) -> Result<RealField> {
    let grid = *f.grid();
    grid.check_same(g.grid())?;
    let pad = Padding::new(&grid);
    let fh = fft::forward_real(f.samples(), grid.dim, grid.size);
    let gh = fft::forward_real(g.samples(), grid.dim, grid.size);
    let apply = |hat: &[Complex64], m: &[f64]| -> Option<Vec<Complex64>> {
        let out: Vec<Complex64> = hat.iter().zip(m).map(|(c, w)| c * w).collect();
        out.iter().any(|c| c.norm_sqr() > 0.0).then_some(out)
    };
    let terms: Vec<Option<Vec<f64>>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let fa = apply(&fh, a)?;
            let gb = apply(&gh, b)?;
            let x = pad.upsample(&fa);
            let y = pad.upsample(&gb);
            Some(x.iter().zip(&y).map(|(p, q)| p * q).collect())
        })
        .collect();
    let mut acc = vec![0.0; pad.fine().len()];
    for t in terms.into_iter().flatten() {
        for (a, x) in acc.iter_mut().zip(&t) {
            *a += x;
        }
    }
    Ok(RealField::from_parts(
        grid,
        fft::inverse_real(pad.downsample(&acc), grid.dim, grid.size),
        FieldKind::Scalar,
    ))
}

fn block_table(radii: &[f64], j: i32) -> Multiplier {
    radii.iter().map(|&r| lp::homogeneous_multiplier(j, r)).collect()
}

fn low_table(radii: &[f64], j: i32) -> Multiplier {
    let scale = 2f64.powi(-j);
    radii.iter().map(|&r| chi(r * scale)).collect()
}

fn mean_table(radii: &[f64]) -> Multiplier {
    radii.iter().map(|&r| if r == 0.0 { 1.0 } else { 0.0 }).collect()
}

fn paraproduct_pairs(f: &RealField) -> Vec<(Multiplier, Multiplier)> {
    let g = f.grid();
    let radii = g.lattice_radii();
    lp::block_range(g, true)
        .map(|j| (low_table(&radii, j - 2), block_table(&radii, j)))
        .collect()
}

/// `T_f g = Σ_j S_{j-2} f · Δ̇_j g`.
pub fn paraproduct(f: &RealField, g: &RealField) -> Result<RealField> {
    bilinear_sum(f, g, &paraproduct_pairs(f))
}

/// `R(f, g) = Σ_{|j-j'| <= 1} Δ̇_j f · Δ̇_{j'} g + mean(f) mean(g)`.
pub fn remainder(f: &RealField, g: &RealField) -> Result<RealField> {
    let grid = f.grid();
    let radii = grid.lattice_radii();
    let mut pairs: Vec<(Multiplier, Multiplier)> = lp::block_range(grid, true)
        .map(|j| {
            let near: Multiplier = radii
                .iter()
                .map(|&r| (j - 1..=j + 1).map(|i| lp::homogeneous_multiplier(i, r)).sum())
                .collect();
            (block_table(&radii, j), near)
        })
        .collect();
    pairs.push((mean_table(&radii), mean_table(&radii)));
    bilinear_sum(f, g, &pairs)
}

pub fn bony_split(f: &RealField, g: &RealField) -> Result<BonySplit> {
    f.grid().check_same(g.grid())?;
    let t_fg = paraproduct(f, g)?;
    let t_gf = paraproduct(g, f)?;
    let remainder = remainder(f, g)?;
    let direct = spectral::product(f, g)?;
    let sum = t_fg.add(&t_gf)?.add(&remainder)?;
    let err = sum.sub(&direct)?.l2_norm();
    let scale = direct.l2_norm();
    let residual = if scale > 0.0 { err / scale } else { err };
    Ok(BonySplit {
        t_fg,
        t_gf,
        remainder,
        residual,
    })
}

/// Which product estimate to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoserVariant {
    /// `‖fg‖_{Ṅ^s}` against Morrey norms times homogeneous norms.
    Homogeneous,
    /// `‖fg‖_{N^s}` against Morrey norms times inhomogeneous norms.
    Inhomogeneous,
    /// `‖fg‖_{Ṅ^s}` against `Ṅ^{-α}` norms times `Ṅ^{s+α}` norms.
    SmoothnessShift,
}

/// Exponent split for the product estimates. Index `i` holds `p_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoserSplit {
    #[serde(with = "exponent4")]
    pub p: [f64; 4],
    #[serde(with = "exponent4")]
    pub q: [f64; 4],
    #[serde(with = "exponent4")]
    pub r: [f64; 4],
    pub alpha: f64,
}

mod exponent4 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct E(#[serde(with = "super::exponent")] f64);

    pub fn serialize<S: Serializer>(x: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
        x.map(E).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 4], D::Error> {
        let v = <[E; 4]>::deserialize(d)?;
        Ok(v.map(|e| e.0))
    }
}

impl MoserSplit {
    /// `p_1 = p_3 = ∞`, `q_1 = q_3 = ∞`, `p_2 = p_4 = p`, `q_2 = q_4 = q`,
    /// `r_1 = r_3 = ∞`, `r_2 = r_4 = r`, `α = 1`.
    pub fn solver_default(bp: &BMParams) -> Self {
        let inf = f64::INFINITY;
        Self {
            p: [inf, bp.p(), inf, bp.p()],
            q: [inf, bp.q(), inf, bp.q()],
            r: [inf, bp.r, inf, bp.r],
            alpha: 1.0,
        }
    }

    pub fn validate(&self, bp: &BMParams, variant: MoserVariant) -> Result<()> {
        const TOL: f64 = 1e-12;
        let bad = |what: String| Err(Error::InvalidParams(format!("product split violates {what}")));
        for i in 0..4 {
            if MorreyParams::new(self.p[i], self.q[i]).is_err() {
                return bad(format!(
                    "1 ≤ q{0} ≤ p{0} ≤ ∞ (got p{0} = {1}, q{0} = {2})",
                    i + 1,
                    fmt_exponent(self.p[i]),
                    fmt_exponent(self.q[i])
                ));
            }
        }
        let inv = |x: f64| 1.0 / x;
        for (a, b) in [(0, 1), (2, 3)] {
            if (inv(bp.p()) - inv(self.p[a]) - inv(self.p[b])).abs() > TOL {
                return bad(format!("1/p = 1/p{} + 1/p{}", a + 1, b + 1));
            }
            if inv(bp.q()) > inv(self.q[a]) + inv(self.q[b]) + TOL {
                return bad(format!("1/q ≤ 1/q{} + 1/q{}", a + 1, b + 1));
            }
        }
        if variant == MoserVariant::SmoothnessShift {
            for (a, b) in [(0, 1), (2, 3)] {
                if self.r[a] < 1.0 || self.r[b] < 1.0 {
                    return bad(format!("r{} ≥ 1 and r{} ≥ 1", a + 1, b + 1));
                }
                if (inv(bp.r) - inv(self.r[a]) - inv(self.r[b])).abs() > TOL {
                    return bad(format!("1/r = 1/r{} + 1/r{}", a + 1, b + 1));
                }
            }
            if !(self.alpha > 0.0) {
                return bad(format!("α > 0 (got α = {})", self.alpha));
            }
        }
        Ok(())
    }
}

fn bm(s: f64, p: f64, q: f64, r: f64, homogeneous: bool) -> Result<BMParams> {
    BMParams::new(s, p, q, r, homogeneous)
}

/// Evaluates a product estimate on `(f, g)`.
pub fn moser_report(
    f: &RealField,
    g: &RealField,
    bp: &BMParams,
    variant: MoserVariant,
    split: &MoserSplit,
    ws: &WindowSet,
) -> Result<EstimateReport> {
    let grid = *f.grid();
    grid.check_same(g.grid())?;
    ws.validate(&grid)?;
    let n = grid.dim as f64;
    let regular = (bp.s > n / bp.p() && bp.p().is_finite())
        || (bp.p().is_infinite() && bp.r.is_infinite());
    if !regular {
        return Err(Error::InvalidParams(format!(
            "product estimates require s > n/p with p < ∞, or p = r = ∞ (got s = {}, p = {}, r = {})",
            bp.s,
            fmt_exponent(bp.p()),
            fmt_exponent(bp.r)
        )));
    }
    split.validate(bp, variant)?;
    let fg = spectral::product(f, g)?;
    let [p1, p2, p3, p4] = split.p;
    let [q1, q2, q3, q4] = split.q;
    let (lhs, rhs1, rhs2) = match variant {
        MoserVariant::Homogeneous | MoserVariant::Inhomogeneous => {
            let hom = variant == MoserVariant::Homogeneous;
            let lhs = besov_morrey_norm(&fg, &bp.homogeneous(hom), ws);
            let a = morrey_norm(f, &MorreyParams::new(p1, q1)?, ws)
                * besov_morrey_norm(g, &bm(bp.s, p2, q2, bp.r, hom)?, ws);
            let b = morrey_norm(g, &MorreyParams::new(p3, q3)?, ws)
                * besov_morrey_norm(f, &bm(bp.s, p4, q4, bp.r, hom)?, ws);
            (lhs, a, b)
        }
        MoserVariant::SmoothnessShift => {
            let [r1, r2, r3, r4] = split.r;
            let al = split.alpha;
            let lhs = besov_morrey_norm(&fg, &bp.homogeneous(true), ws);
            let a = besov_morrey_norm(f, &bm(-al, p1, q1, r1, true)?, ws)
                * besov_morrey_norm(g, &bm(bp.s + al, p2, q2, r2, true)?, ws);
            let b = besov_morrey_norm(g, &bm(-al, p3, q3, r3, true)?, ws)
                * besov_morrey_norm(f, &bm(bp.s + al, p4, q4, r4, true)?, ws);
            (lhs, a, b)
        }
    };
    let params = json!({
        "s": bp.s,
        "p": fmt_exponent(bp.p()),
        "q": fmt_exponent(bp.q()),
        "r": fmt_exponent(bp.r),
        "variant": variant,
        "split": split,
        "kmax": ws.kmax,
        "stride": ws.stride,
    });
    EstimateReport::new(
        LemmaId::Moser,
        lhs,
        vec![("f_low_times_g_high", rhs1), ("g_low_times_f_high", rhs2)],
        params,
        &grid,
    )
}
