//! Periodic grids, Fourier transforms and the spectral operators built on
//! them: derivatives, Leray projection, pressure recovery, dealiasing and
//! alias-free products.
//!
//! Odd-order derivative multipliers vanish on the Nyquist index of the axis
//! being differentiated, so every first-order operator (gradient,
//! divergence, Leray projection, pressure) maps real fields to real fields
//! and composes consistently: `div ∘ leray = 0` holds mode by mode.

pub(crate) mod fft;
mod grid;
pub mod io;

pub use grid::{FieldKind, Grid, RealField, SpectralField, VectorField};
pub(crate) use grid::magnitude_of;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Precomputed wavevector tables for one grid.
pub(crate) struct Ops {
    pub grid: Grid,
    /// Physical wavevectors `2π k / L`, Nyquist included.
    pub xi: Vec<[f64; 3]>,
    /// Wavevectors for odd-order derivatives: Nyquist components zeroed.
    pub dxi: Vec<[f64; 3]>,
    /// `1 / |dxi|²`, zero where `dxi` vanishes.
    pub inv_dxi2: Vec<f64>,
    /// 2/3-rule mask.
    pub keep: Vec<bool>,
}

impl Ops {
    pub fn new(grid: &Grid) -> Self {
        let scale = grid.frequency_scale();
        let nyq = -(grid.size as i64 / 2);
        let cutoff = (grid.size / 3) as i64;
        let ks = grid.wavevectors();
        let mut xi = Vec::with_capacity(ks.len());
        let mut dxi = Vec::with_capacity(ks.len());
        let mut inv = Vec::with_capacity(ks.len());
        let mut keep = Vec::with_capacity(ks.len());
        for k in &ks {
            let mut x = [0.0; 3];
            let mut d = [0.0; 3];
            let mut kept = true;
            for a in 0..grid.dim {
                x[a] = k[a] as f64 * scale;
                d[a] = if k[a] == nyq { 0.0 } else { x[a] };
                kept &= k[a].abs() <= cutoff;
            }
            let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            xi.push(x);
            dxi.push(d);
            inv.push(if d2 > 0.0 { 1.0 / d2 } else { 0.0 });
            keep.push(kept);
        }
        Self {
            grid: *grid,
            xi,
            dxi,
            inv_dxi2: inv,
            keep,
        }
    }

    pub fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        fft::forward_real(samples, self.grid.dim, self.grid.size)
    }

    pub fn inverse(&self, coeffs: Vec<Complex64>) -> Vec<f64> {
        fft::inverse_real(coeffs, self.grid.dim, self.grid.size)
    }

    /// `i dxi_axis · hat`.
    pub fn derivative(&self, hat: &[Complex64], axis: usize) -> Vec<Complex64> {
        hat.iter()
            .zip(&self.dxi)
            .map(|(c, d)| Complex64::new(-c.im * d[axis], c.re * d[axis]))
            .collect()
    }

    pub fn divergence(&self, comps: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.grid.len()];
        for (a, hat) in comps.iter().enumerate() {
            for ((o, c), d) in out.iter_mut().zip(hat).zip(&self.dxi) {
                *o += Complex64::new(-c.im * d[a], c.re * d[a]);
            }
        }
        out
    }

    /// Removes the gradient part in place: `v - d (d·v) / |d|²`.
    pub fn leray_in_place(&self, comps: &mut [Vec<Complex64>]) {
        let dim = self.grid.dim;
        for i in 0..self.grid.len() {
            let inv = self.inv_dxi2[i];
            if inv == 0.0 {
                continue;
            }
            let d = &self.dxi[i];
            let mut dot = Complex64::default();
            for a in 0..dim {
                dot += comps[a][i] * d[a];
            }
            let dot = dot * inv;
            for a in 0..dim {
                comps[a][i] -= dot * d[a];
            }
        }
    }

    /// `∇P` for `-ΔP = div N`, i.e. `-d (d·N) / |d|²`; the zero mode of `P`
    /// is pinned to 0.
    pub fn pressure_gradient(&self, nonlinear: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let dim = self.grid.dim;
        let mut out = vec![vec![Complex64::default(); self.grid.len()]; dim];
        for i in 0..self.grid.len() {
            let inv = self.inv_dxi2[i];
            if inv == 0.0 {
                continue;
            }
            let d = &self.dxi[i];
            let mut dot = Complex64::default();
            for a in 0..dim {
                dot += nonlinear[a][i] * d[a];
            }
            let dot = dot * inv;
            for a in 0..dim {
                out[a][i] = -dot * d[a];
            }
        }
        out
    }

    pub fn dealias_in_place(&self, hat: &mut [Complex64]) {
        for (c, &k) in hat.iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex64::default();
            }
        }
    }

    /// Physical values of `(w·∇) u` for spectral `u` and physical `w`,
    /// returned spectrally after 2/3 dealiasing.
    pub fn advection(&self, w: &[Vec<f64>], u_hat: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let dim = self.grid.dim;
        let n = self.grid.len();
        u_hat
            .iter()
            .map(|ui| {
                let mut acc = vec![0.0; n];
                for (j, wj) in w.iter().enumerate().take(dim) {
                    let d = self.inverse(self.derivative(ui, j));
                    for ((a, x), y) in acc.iter_mut().zip(&d).zip(wj) {
                        *a += x * y;
                    }
                }
                let mut hat = self.forward(&acc);
                self.dealias_in_place(&mut hat);
                hat
            })
            .collect()
    }
}

pub fn to_spectral(f: &RealField) -> SpectralField {
    let g = *f.grid();
    SpectralField::from_parts(g, fft::forward_real(f.samples(), g.dim, g.size))
}

pub fn to_physical(f: &SpectralField) -> RealField {
    let g = *f.grid();
    RealField::from_parts(
        g,
        fft::inverse_real(f.coefficients().to_vec(), g.dim, g.size),
        FieldKind::Scalar,
    )
}

/// Applies a real Fourier multiplier given per spectral slot.
pub(crate) fn apply_multiplier(f: &RealField, multiplier: impl Fn(usize) -> f64) -> RealField {
    let g = *f.grid();
    let mut hat = fft::forward_real(f.samples(), g.dim, g.size);
    for (i, c) in hat.iter_mut().enumerate() {
        *c *= multiplier(i);
    }
    RealField::from_parts(g, fft::inverse_real(hat, g.dim, g.size), f.kind())
}

/// `∂^order f / ∂x_axis^order` by multiplication with `(i ξ_axis)^order`.
pub fn spectral_derivative(f: &RealField, axis: usize, order: u32) -> Result<RealField> {
    let g = *f.grid();
    if axis >= g.dim {
        return Err(Error::InvalidParams(format!(
            "axis {axis} out of range for dim {}",
            g.dim
        )));
    }
    if order == 0 {
        return Err(Error::InvalidParams("derivative order must be >= 1".into()));
    }
    let ops = Ops::new(&g);
    let table = if order % 2 == 1 { &ops.dxi } else { &ops.xi };
    let mut hat = ops.forward(f.samples());
    let unit = Complex64::new(0.0, 1.0).powu(order);
    for (c, k) in hat.iter_mut().zip(table) {
        *c *= unit * k[axis].powi(order as i32);
    }
    Ok(RealField::from_parts(g, ops.inverse(hat), f.kind()))
}

pub fn gradient(f: &RealField) -> VectorField {
    let g = *f.grid();
    let ops = Ops::new(&g);
    let hat = ops.forward(f.samples());
    VectorField::from_samples(
        g,
        (0..g.dim)
            .map(|a| ops.inverse(ops.derivative(&hat, a)))
            .collect(),
    )
}

/// Full Jacobian `∂_j v_i`, returned as `[i][j]`.
pub fn jacobian(v: &VectorField) -> Vec<Vec<RealField>> {
    let g = *v.grid();
    let ops = Ops::new(&g);
    v.components()
        .iter()
        .map(|c| {
            let hat = ops.forward(c.samples());
            (0..g.dim)
                .map(|j| RealField::from_parts(g, ops.inverse(ops.derivative(&hat, j)), FieldKind::Scalar))
                .collect()
        })
        .collect()
}

pub fn divergence(v: &VectorField) -> RealField {
    let g = *v.grid();
    let ops = Ops::new(&g);
    let hats: Vec<_> = v.components().iter().map(|c| ops.forward(c.samples())).collect();
    RealField::from_parts(g, ops.inverse(ops.divergence(&hats)), FieldKind::Scalar)
}

pub fn max_divergence(v: &VectorField) -> f64 {
    divergence(v).sup_norm()
}

/// Vorticity: one scalar component in 2D (`∂_0 v_1 - ∂_1 v_0`), three in 3D.
pub fn curl(v: &VectorField) -> Vec<RealField> {
    let jac = jacobian(v);
    let g = *v.grid();
    let diff = |a: &RealField, b: &RealField| {
        RealField::from_parts(
            g,
            a.samples().iter().zip(b.samples()).map(|(x, y)| x - y).collect(),
            FieldKind::Scalar,
        )
    };
    if g.dim == 2 {
        vec![diff(&jac[1][0], &jac[0][1])]
    } else {
        vec![
            diff(&jac[2][1], &jac[1][2]),
            diff(&jac[0][2], &jac[2][0]),
            diff(&jac[1][0], &jac[0][1]),
        ]
    }
}

/// Orthogonal projection onto divergence-free fields. The zero mode passes
/// through unchanged.
pub fn leray_project(v: &VectorField) -> VectorField {
    let g = *v.grid();
    let ops = Ops::new(&g);
    let mut hats: Vec<_> = v.components().iter().map(|c| ops.forward(c.samples())).collect();
    ops.leray_in_place(&mut hats);
    VectorField::from_samples(g, hats.into_iter().map(|h| ops.inverse(h)).collect())
}

/// Divergence tolerance used by operations that require a solenoidal input.
pub(crate) fn check_solenoidal(v: &VectorField, what: &'static str, tol: f64) -> Result<()> {
    let max = max_divergence(v);
    let limit = tol * v.sup_norm().max(1.0);
    if max > limit {
        Err(Error::Divergence { what, max, tol: limit })
    } else {
        Ok(())
    }
}

/// Pressure gradient `∇P` with `-ΔP = div((w·∇)v)`, or for the magnetic
/// variant `-ΔP = div((w·∇)v - (a·∇)b)` where `b_pair = (a, b)`. Products are
/// 2/3-dealiased; the zero mode of `P` is fixed at 0.
pub fn pressure_gradient(
    w: &VectorField,
    v: &VectorField,
    b_pair: Option<(&VectorField, &VectorField)>,
) -> Result<VectorField> {
    let g = *w.grid();
    g.check_same(v.grid())?;
    check_solenoidal(w, "advecting field w", 1e-10)?;
    let ops = Ops::new(&g);
    let phys = |f: &VectorField| -> Vec<Vec<f64>> {
        f.components().iter().map(|c| c.samples().to_vec()).collect()
    };
    let hats = |f: &VectorField| -> Vec<Vec<Complex64>> {
        f.components().iter().map(|c| ops.forward(c.samples())).collect()
    };
    let mut nonlinear = ops.advection(&phys(w), &hats(v));
    if let Some((a, b)) = b_pair {
        g.check_same(a.grid())?;
        g.check_same(b.grid())?;
        let magnetic = ops.advection(&phys(a), &hats(b));
        for (n, m) in nonlinear.iter_mut().zip(&magnetic) {
            for (x, y) in n.iter_mut().zip(m) {
                *x -= y;
            }
        }
    }
    let grad = ops.pressure_gradient(&nonlinear);
    Ok(VectorField::from_samples(
        g,
        grad.into_iter().map(|h| ops.inverse(h)).collect(),
    ))
}

/// 2/3 rule: zero every mode with some `|k_a| > floor(size/3)`.
pub fn dealias(f: &RealField) -> RealField {
    let ops = Ops::new(f.grid());
    let mut hat = ops.forward(f.samples());
    ops.dealias_in_place(&mut hat);
    RealField::from_parts(*f.grid(), ops.inverse(hat), f.kind())
}

/// Zero-padded spectra on a grid with twice the samples per axis. Nyquist
/// coefficients are split evenly between `±size/2` on the way in and folded
/// back on the way out, so both directions preserve real fields.
pub(crate) struct Padding {
    fine: Grid,
    /// For every coarse slot, the fine slots it maps to and the weight used
    /// when spreading.
    targets: Vec<Vec<(usize, f64)>>,
}

impl Padding {
    pub fn new(grid: &Grid) -> Self {
        let fine = grid.refined(2);
        let n = grid.size as i64;
        let big = fine.size as i64;
        let mut targets = Vec::with_capacity(grid.len());
        for flat in 0..grid.len() {
            let idx = grid.multi_index(flat);
            let mut combos: Vec<([usize; 3], f64)> = vec![([0; 3], 1.0)];
            for a in 0..grid.dim {
                let k = grid.signed_frequency(idx[a]);
                let opts: Vec<(i64, f64)> = if k == -n / 2 {
                    vec![(k, 0.5), (-k, 0.5)]
                } else {
                    vec![(k, 1.0)]
                };
                combos = combos
                    .into_iter()
                    .flat_map(|(pos, w)| {
                        opts.iter().map(move |&(kk, ww)| {
                            let mut p = pos;
                            p[a] = kk.rem_euclid(big) as usize;
                            (p, w * ww)
                        })
                    })
                    .collect();
            }
            targets.push(
                combos
                    .into_iter()
                    .map(|(p, w)| (fine.flat_index(&p), w))
                    .collect(),
            );
        }
        Self {
            fine,
            targets,
        }
    }

    pub fn fine(&self) -> &Grid {
        &self.fine
    }

    pub fn spread(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.fine.len()];
        for (c, ts) in hat.iter().zip(&self.targets) {
            for &(t, w) in ts {
                out[t] = *c * w;
            }
        }
        out
    }

    pub fn fold(&self, fine_hat: &[Complex64]) -> Vec<Complex64> {
        self.targets
            .iter()
            .map(|ts| ts.iter().map(|&(t, _)| fine_hat[t]).sum())
            .collect()
    }

    /// Physical samples on the fine grid of a coarse spectrum.
    pub fn upsample(&self, hat: &[Complex64]) -> Vec<f64> {
        fft::inverse_real(self.spread(hat), self.fine.dim, self.fine.size)
    }

    /// Coarse spectrum of fine-grid samples, truncated to the coarse band.
    pub fn downsample(&self, samples: &[f64]) -> Vec<Complex64> {
        self.fold(&fft::forward_real(samples, self.fine.dim, self.fine.size))
    }
}

/// Alias-free product: both factors are evaluated on a grid with twice the
/// resolution, multiplied exactly there, and the result truncated back to the
/// coarse band.
pub fn product(f: &RealField, g: &RealField) -> Result<RealField> {
    let grid = *f.grid();
    grid.check_same(g.grid())?;
    let pad = Padding::new(&grid);
    let a = pad.upsample(&fft::forward_real(f.samples(), grid.dim, grid.size));
    let b = pad.upsample(&fft::forward_real(g.samples(), grid.dim, grid.size));
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(RealField::from_parts(
        grid,
        fft::inverse_real(pad.downsample(&prod), grid.dim, grid.size),
        FieldKind::Scalar,
    ))
}
