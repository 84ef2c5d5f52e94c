//! Littlewood-Paley decomposition on the lattice.
//!
//! Filters are radial in the Euclidean norm of the integer wavevector. The
//! homogeneous block `Δ̇_j` has multiplier `χ(2^{-j}ρ) - χ(2^{1-j}ρ)`,
//! supported in `2^{j-1} < ρ < 2^{j+1}` and equal to 1 at `ρ = 2^j`. The
//! inhomogeneous family is `Δ_{-1} = χ(ρ)` together with `Δ_j = Δ̇_j` for
//! `j >= 1`; `Δ_0` is identically zero.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fft, io, FieldKind, Grid, RealField};

fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`, and
/// `B(2-t) / (B(2-t) + B(t-1))` with `B(x) = e^{-1/x}` in between.
pub fn cutoff_chi(t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParams(format!(
            "cutoff argument must be >= 0, got {t}"
        )));
    }
    Ok(chi(t))
}

pub(crate) fn chi(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let a = bump(2.0 - t);
        let b = bump(t - 1.0);
        a / (a + b)
    }
}

/// Multiplier of the homogeneous block `j` at lattice radius `rho`.
pub fn homogeneous_multiplier(j: i32, rho: f64) -> f64 {
    chi(rho * 2f64.powi(-j)) - chi(rho * 2f64.powi(1 - j))
}

/// Multiplier of the inhomogeneous block `j` at lattice radius `rho`.
pub fn inhomogeneous_multiplier(j: i32, rho: f64) -> f64 {
    match j {
        j if j <= -2 => 0.0,
        -1 => chi(rho),
        0 => 0.0,
        j => homogeneous_multiplier(j, rho),
    }
}

pub fn block_multiplier(j: i32, rho: f64, homogeneous: bool) -> f64 {
    if homogeneous {
        homogeneous_multiplier(j, rho)
    } else {
        inhomogeneous_multiplier(j, rho)
    }
}

/// Highest block index that can be nonzero on this grid.
pub fn top_block(grid: &Grid) -> i32 {
    grid.log2_size() as i32
}

/// Indices of every block that can be nonzero on the grid.
pub fn block_range(grid: &Grid, homogeneous: bool) -> std::ops::RangeInclusive<i32> {
    let lo = if homogeneous { 0 } else { -1 };
    lo..=top_block(grid)
}

/// Per-slot multipliers of each block in [`block_range`], in order.
pub(crate) fn block_tables(grid: &Grid, homogeneous: bool) -> Vec<(i32, Vec<f64>)> {
    let radii = grid.lattice_radii();
    block_range(grid, homogeneous)
        .map(|j| {
            (
                j,
                radii
                    .iter()
                    .map(|&r| block_multiplier(j, r, homogeneous))
                    .collect(),
            )
        })
        .collect()
}

fn filtered(grid: &Grid, hat: &[Complex64], mult: &[f64], kind: FieldKind) -> RealField {
    let coeffs = hat.iter().zip(mult).map(|(c, m)| c * m).collect();
    RealField::from_parts(*grid, fft::inverse_real(coeffs, grid.dim, grid.size), kind)
}

pub fn dyadic_block(f: &RealField, j: i32, homogeneous: bool) -> RealField {
    let g = *f.grid();
    let radii = g.lattice_radii();
    let mult: Vec<f64> = radii
        .iter()
        .map(|&r| block_multiplier(j, r, homogeneous))
        .collect();
    let hat = fft::forward_real(f.samples(), g.dim, g.size);
    filtered(&g, &hat, &mult, f.kind())
}

/// `S_j`: multiplier `χ(2^{-j}ρ)`. Keeps the mean for every `j`.
pub fn low_pass(f: &RealField, j: i32) -> RealField {
    let g = *f.grid();
    let scale = 2f64.powi(-j);
    let mult: Vec<f64> = g.lattice_radii().iter().map(|&r| chi(r * scale)).collect();
    let hat = fft::forward_real(f.samples(), g.dim, g.size);
    filtered(&g, &hat, &mult, f.kind())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition {
    pub j_min: i32,
    pub blocks: Vec<RealField>,
    /// Zero-mode value. Held separately in the homogeneous case; carried by
    /// `Δ_{-1}` (and recorded here for reference) in the inhomogeneous case.
    pub mean: f64,
    pub homogeneous: bool,
}

impl DyadicDecomposition {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.blocks.len() as i32 - 1
    }

    pub fn block(&self, j: i32) -> Option<&RealField> {
        if j < self.j_min {
            return None;
        }
        self.blocks.get((j - self.j_min) as usize)
    }

    pub fn blocks_with_index(&self) -> impl Iterator<Item = (i32, &RealField)> {
        self.blocks
            .iter()
            .enumerate()
            .map(move |(i, b)| (self.j_min + i as i32, b))
    }

    pub fn grid(&self) -> &Grid {
        self.blocks[0].grid()
    }
}

/// Splits `f` into every block that can be nonzero on its grid. Blocks are
/// filtered in parallel from one forward transform.
pub fn decompose(f: &RealField, homogeneous: bool) -> DyadicDecomposition {
    let g = *f.grid();
    let hat = fft::forward_real(f.samples(), g.dim, g.size);
    let mean = hat[0].re;
    let tables = block_tables(&g, homogeneous);
    let blocks: Vec<RealField> = tables
        .par_iter()
        .map(|(_, m)| filtered(&g, &hat, m, f.kind()))
        .collect();
    DyadicDecomposition {
        j_min: tables[0].0,
        blocks,
        mean,
        homogeneous,
    }
}

pub fn reconstruct(d: &DyadicDecomposition) -> RealField {
    let g = *d.grid();
    let mut acc = vec![if d.homogeneous { d.mean } else { 0.0 }; g.len()];
    for b in &d.blocks {
        for (a, x) in acc.iter_mut().zip(b.samples()) {
            *a += x;
        }
    }
    RealField::from_parts(g, acc, d.blocks[0].kind())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionManifest {
    pub homogeneous: bool,
    pub j_min: i32,
    pub j_max: i32,
    pub mean: f64,
    /// File stems of the blocks, relative to the manifest directory.
    pub blocks: Vec<String>,
}

/// Writes `decomposition.json` plus one field file pair per block.
pub fn write_decomposition(dir: &Path, d: &DyadicDecomposition) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for (j, b) in d.blocks_with_index() {
        let name = format!("block_{j:+03}");
        io::write_field(&dir.join(&name), b)?;
        names.push(name);
    }
    let manifest = DecompositionManifest {
        homogeneous: d.homogeneous,
        j_min: d.j_min,
        j_max: d.j_max(),
        mean: d.mean,
        blocks: names,
    };
    let path = dir.join("decomposition.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&path, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub fn read_decomposition(dir: &Path) -> Result<DyadicDecomposition> {
    let path = dir.join("decomposition.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: DecompositionManifest = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
    let blocks = m
        .blocks
        .iter()
        .map(|name| io::read_field(&dir.join(name)))
        .collect::<Result<Vec<_>>>()?;
    if blocks.len() as i32 != m.j_max - m.j_min + 1 {
        return Err(Error::Format(format!(
            "{}: block count does not match index range",
            path.display()
        )));
    }
    Ok(DyadicDecomposition {
        j_min: m.j_min,
        blocks,
        mean: m.mean,
        homogeneous: m.homogeneous,
    })
}

#[cfg(test)]
mod tests;
