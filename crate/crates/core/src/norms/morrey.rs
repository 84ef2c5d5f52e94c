//! Morrey norms over periodic axis-aligned cubes.
//!
//! One summed-area table over the torus extended by a full period per axis
//! answers every cube sum with `2^dim` lookups, so each radius costs
//! `O(size^dim)`.

use rayon::prelude::*;

use super::params::{MorreyParams, WindowSet};
use crate::spectral::{magnitude_of, Grid, RealField, VectorField};

pub(crate) fn pow_q(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        x
    } else if q == 2.0 {
        x * x
    } else {
        x.powf(q)
    }
}

pub(crate) fn root_q(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        x
    } else if q == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / q)
    }
}

/// Summed-area table of a periodic array over `[0, 2N)^dim`.
pub(crate) struct PeriodicSat {
    dim: usize,
    /// Table side, `2N + 1`.
    side: usize,
    table: Vec<f64>,
}

impl PeriodicSat {
    pub fn new(grid: &Grid, values: &[f64]) -> Self {
        let n = grid.size;
        let side = 2 * n + 1;
        let dim = grid.dim;
        let total = side.pow(dim as u32);
        let mut table = vec![0.0; total];
        // Scatter values at offset +1 on every axis.
        let ext = 2 * n;
        let ext_count = ext.pow(dim as u32);
        for e in 0..ext_count {
            let mut rem = e;
            let mut src = 0usize;
            let mut dst = 0usize;
            let mut idx = [0usize; 3];
            for a in (0..dim).rev() {
                idx[a] = rem % ext;
                rem /= ext;
            }
            for a in 0..dim {
                src = src * n + idx[a] % n;
                dst = dst * side + idx[a] + 1;
            }
            table[dst] = values[src];
        }
        // Prefix sums along each axis.
        for axis in 0..dim {
            let stride = side.pow((dim - 1 - axis) as u32);
            let block = stride * side;
            for chunk in table.chunks_exact_mut(block) {
                for t in 1..side {
                    let (prev, cur) = chunk.split_at_mut(t * stride);
                    let prev = &prev[(t - 1) * stride..];
                    for (c, p) in cur[..stride].iter_mut().zip(prev) {
                        *c += *p;
                    }
                }
            }
        }
        Self { dim, side, table }
    }

    /// Sum over the cube with lower corner `start` and `m` cells per side.
    pub fn cube_sum(&self, start: &[usize; 3], m: usize) -> f64 {
        let mut sum = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut flat = 0usize;
            let mut ones = 0;
            for a in 0..self.dim {
                let hi = (corner >> a) & 1 == 1;
                ones += hi as usize;
                flat = flat * self.side + start[a] + if hi { m } else { 0 };
            }
            if (self.dim - ones) % 2 == 0 {
                sum += self.table[flat];
            } else {
                sum -= self.table[flat];
            }
        }
        sum
    }
}

/// Largest cube sum of `|values|^q` per window side, largest side first.
fn max_cube_sums(grid: &Grid, powered: &[f64], ws: &WindowSet) -> Vec<f64> {
    let sat = PeriodicSat::new(grid, powered);
    let starts_per_axis = grid.size / ws.stride;
    let count = starts_per_axis.pow(grid.dim as u32);
    ws.sides(grid)
        .par_iter()
        .map(|&m| {
            if m == grid.size {
                return sat.cube_sum(&[0; 3], m).max(0.0);
            }
            let mut best = 0.0f64;
            for c in 0..count {
                let mut rem = c;
                let mut start = [0usize; 3];
                for a in (0..grid.dim).rev() {
                    start[a] = (rem % starts_per_axis) * ws.stride;
                    rem /= starts_per_axis;
                }
                best = best.max(sat.cube_sum(&start, m));
            }
            best
        })
        .collect()
}

/// Morrey norm of nonnegative pointwise magnitudes.
pub fn morrey_norm_of_magnitude(
    grid: &Grid,
    magnitude: &[f64],
    mp: &MorreyParams,
    ws: &WindowSet,
) -> f64 {
    if mp.q.is_infinite() {
        return magnitude.iter().fold(0.0, |m, &x| m.max(x));
    }
    let powered: Vec<f64> = magnitude.iter().map(|&x| pow_q(x, mp.q)).collect();
    let sums = max_cube_sums(grid, &powered, ws);
    let n = grid.dim as f64;
    let vol = grid.cell_volume();
    let exponent = n * (mp.inv_p() - mp.inv_q());
    ws.radii(grid)
        .iter()
        .zip(&sums)
        .map(|(&r, &s)| r.powf(exponent) * root_q(vol * s, mp.q))
        .fold(0.0, f64::max)
}

/// `sup_{x0, r} r^{n/p - n/q} (Σ_{cube} h^n |f|^q)^{1/q}` over the dyadic
/// windows of `ws`.
pub fn morrey_norm(f: &RealField, mp: &MorreyParams, ws: &WindowSet) -> f64 {
    let mag: Vec<f64> = f.samples().iter().map(|x| x.abs()).collect();
    morrey_norm_of_magnitude(f.grid(), &mag, mp, ws)
}

/// Morrey norm of the pointwise Euclidean magnitude.
pub fn morrey_norm_vector(v: &VectorField, mp: &MorreyParams, ws: &WindowSet) -> f64 {
    morrey_norm_of_magnitude(v.grid(), &v.magnitude(), mp, ws)
}

pub(crate) fn morrey_norm_components(
    comps: &[RealField],
    mp: &MorreyParams,
    ws: &WindowSet,
) -> f64 {
    let grid = comps[0].grid();
    if comps.len() == 1 {
        morrey_norm(&comps[0], mp, ws)
    } else {
        morrey_norm_of_magnitude(grid, &magnitude_of(comps), mp, ws)
    }
}
