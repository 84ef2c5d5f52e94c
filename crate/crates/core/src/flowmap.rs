//! Particle trajectories `∂_t X = v(X, t)`, their Jacobians, volume checks and
//! the composition test `‖f ∘ X‖_{M^p_q} / ‖f‖_{M^p_q}`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::norms::{fmt_exponent, morrey_norm, MorreyParams, WindowSet};
use crate::report::{EstimateReport, LemmaId};
use crate::series::VectorSeries;
use crate::spectral::{self, FieldKind, Grid, Ops, RealField, VectorField};

const DIV_TOL: f64 = 1e-10;
const SNAP: f64 = 1e-9;
const SPECTRAL_MAX_SIZE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Periodic cubic Hermite with spectral nodal derivatives.
    #[default]
    Hermite,
    /// Exact trigonometric interpolation; `N <= 64` only.
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMapOptions {
    pub interpolation: Interpolation,
    /// Store every `record_every`-th step (the final step is always stored).
    pub record_every: usize,
}

impl Default for FlowMapOptions {
    fn default() -> Self {
        Self {
            interpolation: Interpolation::Hermite,
            record_every: 1,
        }
    }
}

/// Scalar fields sampled at arbitrary torus points.
struct Sampler {
    grid: Grid,
    nfields: usize,
    mode: SamplerMode,
}

enum SamplerMode {
    /// `tables[c << dim | mask]` holds the mixed derivative `∂_mask` of field `c`.
    Hermite(Vec<Vec<f64>>),
    Spectral(Vec<Vec<Complex64>>),
}

fn hermite_basis(t: f64, h: f64) -> [[f64; 2]; 2] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        [2.0 * t3 - 3.0 * t2 + 1.0, h * (t3 - 2.0 * t2 + t)],
        [-2.0 * t3 + 3.0 * t2, h * (t3 - t2)],
    ]
}

fn cell_coordinate(x: f64, h: f64, n: usize) -> (usize, f64) {
    let mut u = x / h;
    let r = u.round();
    if (u - r).abs() < SNAP {
        u = r;
    }
    let f = u.floor();
    ((f as i64).rem_euclid(n as i64) as usize, u - f)
}

impl Sampler {
    /// `values[c]`, when given, replaces the transformed samples of field `c`
    /// so that nodes reproduce the input exactly.
    fn new(
        grid: &Grid,
        hats: &[Vec<Complex64>],
        values: &[&[f64]],
        interpolation: Interpolation,
    ) -> Result<Self> {
        let ops = Ops::new(grid);
        let mode = match interpolation {
            Interpolation::Hermite => {
                let masks = 1usize << grid.dim;
                let tables = (0..hats.len() * masks)
                    .into_par_iter()
                    .map(|idx| {
                        let (c, mask) = (idx / masks, idx % masks);
                        if mask == 0 && c < values.len() {
                            return values[c].to_vec();
                        }
                        let mut hat = hats[c].clone();
                        for a in 0..grid.dim {
                            if mask & (1 << a) != 0 {
                                hat = ops.derivative(&hat, a);
                            }
                        }
                        ops.inverse(hat)
                    })
                    .collect();
                SamplerMode::Hermite(tables)
            }
            Interpolation::Spectral => {
                if grid.size > SPECTRAL_MAX_SIZE {
                    return Err(Error::InvalidParams(format!(
                        "spectral interpolation is limited to N <= {SPECTRAL_MAX_SIZE}, got {}",
                        grid.size
                    )));
                }
                SamplerMode::Spectral(hats.to_vec())
            }
        };
        Ok(Self {
            grid: *grid,
            nfields: hats.len(),
            mode,
        })
    }

    fn eval(&self, x: &[f64; 3], out: &mut [f64]) {
        let g = &self.grid;
        let dim = g.dim;
        out[..self.nfields].iter_mut().for_each(|o| *o = 0.0);
        match &self.mode {
            SamplerMode::Hermite(tables) => {
                let h = g.spacing();
                let mut cells = [(0usize, [[0.0; 2]; 2]); 3];
                for a in 0..dim {
                    let (i0, t) = cell_coordinate(x[a], h, g.size);
                    cells[a] = (i0, hermite_basis(t, h));
                }
                let masks = 1usize << dim;
                for corner in 0..masks {
                    let mut idx = [0usize; 3];
                    for a in 0..dim {
                        idx[a] = (cells[a].0 + ((corner >> a) & 1)) % g.size;
                    }
                    let flat = g.flat_index(&idx[..dim]);
                    for mask in 0..masks {
                        let mut w = 1.0;
                        for a in 0..dim {
                            w *= cells[a].1[(corner >> a) & 1][(mask >> a) & 1];
                        }
                        if w == 0.0 {
                            continue;
                        }
                        for (c, o) in out[..self.nfields].iter_mut().enumerate() {
                            *o += w * tables[c * masks + mask][flat];
                        }
                    }
                }
            }
            SamplerMode::Spectral(hats) => {
                let s = g.frequency_scale();
                let phases: Vec<Vec<Complex64>> = (0..dim)
                    .map(|a| {
                        (0..g.size)
                            .map(|i| Complex64::from_polar(1.0, s * g.signed_frequency(i) as f64 * x[a]))
                            .collect()
                    })
                    .collect();
                for flat in 0..g.len() {
                    let idx = g.multi_index(flat);
                    let mut e = phases[0][idx[0]];
                    for a in 1..dim {
                        e *= phases[a][idx[a]];
                    }
                    for (c, o) in out[..self.nfields].iter_mut().enumerate() {
                        *o += (hats[c][flat] * e).re;
                    }
                }
            }
        }
    }
}

/// Velocity and Jacobian `∂_j v_i` interpolants of one driver sample.
fn driver_sampler(v: &VectorField, interpolation: Interpolation) -> Result<Sampler> {
    let g = *v.grid();
    let ops = Ops::new(&g);
    let vh: Vec<Vec<Complex64>> = v.components().iter().map(|c| ops.forward(c.samples())).collect();
    let mut hats = vh.clone();
    for vi in &vh {
        for j in 0..g.dim {
            hats.push(ops.derivative(vi, j));
        }
    }
    let values: Vec<&[f64]> = v.components().iter().map(|c| c.samples()).collect();
    Sampler::new(&g, &hats, &values, interpolation)
}

fn determinant(j: &[f64], dim: usize) -> f64 {
    match dim {
        1 => j[0],
        2 => j[0] * j[3] - j[1] * j[2],
        _ => {
            j[0] * (j[4] * j[8] - j[5] * j[7]) - j[1] * (j[3] * j[8] - j[5] * j[6])
                + j[2] * (j[3] * j[7] - j[4] * j[6])
        }
    }
}

/// Flow-map samples: positions (wrapped into `[0, L)`) and Jacobian
/// determinants per seed and recorded time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySet {
    pub dim: usize,
    pub length: f64,
    pub seeds: Vec<[f64; 3]>,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<[f64; 3]>>,
    pub jacobian_dets: Vec<Vec<f64>>,
}

impl TrajectorySet {
    pub fn final_positions(&self) -> Vec<[f64; 3]> {
        self.positions.iter().map(|p| *p.last().unwrap()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed_id,t");
        for a in 0..self.dim {
            let _ = write!(out, ",x{a}");
        }
        out.push_str(",det\n");
        for (id, (pos, dets)) in self.positions.iter().zip(&self.jacobian_dets).enumerate() {
            for ((t, x), d) in self.times.iter().zip(pos).zip(dets) {
                let _ = write!(out, "{id},{t:e}");
                for xa in &x[..self.dim] {
                    let _ = write!(out, ",{xa:e}");
                }
                let _ = writeln!(out, ",{d:e}");
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Every grid node, in flat order.
pub fn grid_seeds(grid: &Grid) -> Vec<[f64; 3]> {
    (0..grid.len()).map(|i| grid.node(i)).collect()
}

pub fn advect_trajectories(
    driver: &VectorSeries,
    seeds: &[[f64; 3]],
    dt: f64,
    horizon: f64,
) -> Result<TrajectorySet> {
    advect_trajectories_with(driver, seeds, dt, horizon, &FlowMapOptions::default())
}

struct SamplerCache {
    interpolation: Interpolation,
    built: HashMap<usize, Arc<Sampler>>,
}

impl SamplerCache {
    fn get(&mut self, driver: &VectorSeries, i: usize) -> Result<Arc<Sampler>> {
        if let Some(s) = self.built.get(&i) {
            return Ok(s.clone());
        }
        let s = Arc::new(driver_sampler(&driver.fields()[i], self.interpolation)?);
        self.built.insert(i, s.clone());
        Ok(s)
    }

    fn drop_before(&mut self, i: usize) {
        self.built.retain(|&k, _| k >= i);
    }
}

type Stage = (Arc<Sampler>, Arc<Sampler>, f64);

fn velocity_at(stage: &Stage, x: &[f64; 3], dim: usize, a: &mut [f64], b: &mut [f64]) {
    let n = dim + dim * dim;
    stage.0.eval(x, a);
    if stage.2 != 0.0 {
        stage.1.eval(x, b);
        for (p, q) in a[..n].iter_mut().zip(&b[..n]) {
            *p = (1.0 - stage.2) * *p + stage.2 * q;
        }
    }
}

/// Right-hand side `(v(X), ∇v(X) J)` of the trajectory and variational system.
fn flow_rhs(stage: &Stage, dim: usize, y: &[f64], dy: &mut [f64], a: &mut [f64], b: &mut [f64]) {
    let mut x = [0.0; 3];
    x[..dim].copy_from_slice(&y[..dim]);
    velocity_at(stage, &x, dim, a, b);
    dy[..dim].copy_from_slice(&a[..dim]);
    let grad = &a[dim..dim + dim * dim];
    let jac = &y[dim..];
    for i in 0..dim {
        for k in 0..dim {
            dy[dim + i * dim + k] = (0..dim).map(|j| grad[i * dim + j] * jac[j * dim + k]).sum();
        }
    }
}

fn rk4_step(stages: &[Stage; 3], dim: usize, y: &mut [f64], dt: f64) {
    let n = y.len();
    let (mut a, mut b) = ([0.0; 12], [0.0; 12]);
    let mut k = [[0.0; 12]; 4];
    let mut tmp = [0.0; 12];
    flow_rhs(&stages[0], dim, y, &mut k[0], &mut a, &mut b);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k[0][i];
    }
    flow_rhs(&stages[1], dim, &tmp[..n], &mut k[1], &mut a, &mut b);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k[1][i];
    }
    flow_rhs(&stages[1], dim, &tmp[..n], &mut k[2], &mut a, &mut b);
    for i in 0..n {
        tmp[i] = y[i] + dt * k[2][i];
    }
    flow_rhs(&stages[2], dim, &tmp[..n], &mut k[3], &mut a, &mut b);
    for i in 0..n {
        y[i] += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

/// Classical RK4 for `X` and `∇X` from `t = start` to `start + horizon`,
/// where `start` is the first driver time.
pub fn advect_trajectories_with(
    driver: &VectorSeries,
    seeds: &[[f64; 3]],
    dt: f64,
    horizon: f64,
    opts: &FlowMapOptions,
) -> Result<TrajectorySet> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParams(format!("horizon must be nonnegative, got {horizon}")));
    }
    let t0 = driver.start();
    driver.check_horizon(t0 + horizon)?;
    for v in driver.fields() {
        spectral::check_solenoidal(v, "trajectory driver", DIV_TOL)?;
    }
    let g = *driver.grid();
    let dim = g.dim;
    let len = g.length;
    let every = opts.record_every.max(1);

    let steps = ((horizon / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut state: Vec<Vec<f64>> = seeds
        .iter()
        .map(|s| {
            let mut y = vec![0.0; dim + dim * dim];
            y[..dim].copy_from_slice(&s[..dim]);
            for a in 0..dim {
                y[dim + a * dim + a] = 1.0;
            }
            y
        })
        .collect();
    let mut times = vec![t0];
    let mut positions: Vec<Vec<[f64; 3]>> = seeds.iter().map(|s| vec![wrap(s, dim, len)]).collect();
    let mut dets: Vec<Vec<f64>> = seeds.iter().map(|_| vec![1.0]).collect();

    let mut cache = SamplerCache {
        interpolation: opts.interpolation,
        built: HashMap::new(),
    };
    let stage = |cache: &mut SamplerCache, t: f64| -> Result<Stage> {
        let (lo, hi, w) = driver.bracket(t);
        Ok((cache.get(driver, lo)?, cache.get(driver, hi)?, w))
    };

    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        let h = if step + 1 == steps { t0 + horizon - t } else { dt };
        let stages = [stage(&mut cache, t)?, stage(&mut cache, t + 0.5 * h)?, stage(&mut cache, t + h)?];
        cache.drop_before(driver.bracket(t).0);
        state.par_iter_mut().for_each(|y| rk4_step(&stages, dim, y, h));
        if (step + 1) % every == 0 || step + 1 == steps {
            times.push(t + h);
            for ((y, p), d) in state.iter().zip(positions.iter_mut()).zip(dets.iter_mut()) {
                let mut x = [0.0; 3];
                x[..dim].copy_from_slice(&y[..dim]);
                p.push(wrap(&x, dim, len));
                d.push(determinant(&y[dim..], dim));
            }
        }
    }
    Ok(TrajectorySet {
        dim,
        length: len,
        seeds: seeds.to_vec(),
        times,
        positions,
        jacobian_dets: dets,
    })
}

fn wrap(x: &[f64; 3], dim: usize, len: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for a in 0..dim {
        out[a] = x[a].rem_euclid(len);
        if out[a] >= len {
            out[a] = 0.0;
        }
    }
    out
}

/// `max |det ∇X - 1|` over all seeds and recorded times.
pub fn volume_check(ts: &TrajectorySet) -> f64 {
    ts.jacobian_dets
        .iter()
        .flatten()
        .fold(0.0, |m, d| m.max((d - 1.0).abs()))
}

/// `f ∘ X_T` on the grid of `f`, where the seeds of `ts` are the grid nodes.
pub fn compose(f: &RealField, ts: &TrajectorySet, interpolation: Interpolation) -> Result<RealField> {
    let g = *f.grid();
    if ts.dim != g.dim || ts.seeds.len() != g.len() || (ts.length - g.length).abs() > 1e-12 * g.length {
        return Err(Error::InvalidParams(
            "composition needs one trajectory per grid node of the field's grid".into(),
        ));
    }
    let tol = 1e-12 * g.length;
    for (i, s) in ts.seeds.iter().enumerate() {
        let node = g.node(i);
        if (0..g.dim).any(|a| (s[a] - node[a]).abs() > tol) {
            return Err(Error::InvalidParams(format!(
                "trajectory seed {i} is not the grid node it should be"
            )));
        }
    }
    let hat = Ops::new(&g).forward(f.samples());
    let sampler = Sampler::new(&g, std::slice::from_ref(&hat), &[f.samples()], interpolation)?;
    let samples = ts
        .final_positions()
        .par_iter()
        .map(|x| {
            let mut out = [0.0];
            sampler.eval(x, &mut out);
            out[0]
        })
        .collect();
    Ok(RealField::from_parts(g, samples, FieldKind::Scalar))
}

/// `‖f ∘ X_T‖_{M^p_q} / ‖f‖_{M^p_q}`.
pub fn composition_norm_ratio(
    f: &RealField,
    ts: &TrajectorySet,
    mp: &MorreyParams,
    ws: &WindowSet,
) -> Result<f64> {
    composition_norm_ratio_with(f, ts, mp, ws, Interpolation::Hermite)
}

pub fn composition_norm_ratio_with(
    f: &RealField,
    ts: &TrajectorySet,
    mp: &MorreyParams,
    ws: &WindowSet,
    interpolation: Interpolation,
) -> Result<f64> {
    ws.validate(f.grid())?;
    let base = morrey_norm(f, mp, ws);
    if base == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let composed = compose(f, ts, interpolation)?;
    Ok(morrey_norm(&composed, mp, ws) / base)
}

/// Composition check as a report: `lhs = ‖f ∘ X_T‖_{M^p_q}`, single right-hand
/// term `‖f‖_{M^p_q}`.
pub fn composition_report(
    f: &RealField,
    ts: &TrajectorySet,
    mp: &MorreyParams,
    ws: &WindowSet,
) -> Result<EstimateReport> {
    let grid = *f.grid();
    ws.validate(&grid)?;
    let base = morrey_norm(f, mp, ws);
    let composed = morrey_norm(&compose(f, ts, Interpolation::Hermite)?, mp, ws);
    let min_det = ts.jacobian_dets.iter().flatten().fold(f64::INFINITY, |m, &d| m.min(d));
    let max_det = ts.jacobian_dets.iter().flatten().fold(f64::NEG_INFINITY, |m, &d| m.max(d));
    EstimateReport::new(
        LemmaId::Composition,
        composed,
        vec![("f", base)],
        json!({
            "p": fmt_exponent(mp.p),
            "q": fmt_exponent(mp.q),
            "horizon": ts.times.last().copied().unwrap_or(0.0) - ts.times[0],
            "volume_defect": volume_check(ts),
            "min_det": min_det,
            "max_det": max_det,
            "kmax": ws.kmax,
            "stride": ws.stride,
        }),
        &grid,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::square(n).unwrap()
    }

    fn periodic_gap(a: f64, b: f64, len: f64) -> f64 {
        let d = (a - b).rem_euclid(len);
        d.min(len - d)
    }

    fn sample_seeds(g: &Grid, stride: usize) -> Vec<[f64; 3]> {
        (0..g.len())
            .filter(|&i| {
                let m = g.multi_index(i);
                m[0] % stride == 0 && m[1] % stride == 0
            })
            .map(|i| g.node(i))
            .collect()
    }

    #[test]
    fn zero_driver_fixes_points() {
        let g = grid(16);
        let seeds = vec![[0.3, 1.7, 0.0], [6.0, 0.0, 0.0]];
        let ts = advect_trajectories(&VectorSeries::zeros(g, 1.0), &seeds, 0.1, 1.0).unwrap();
        assert_eq!(ts.times.len(), 11);
        for (p, s) in ts.positions.iter().zip(&seeds) {
            assert!(p.iter().all(|x| x == s));
        }
        assert_eq!(volume_check(&ts), 0.0);
    }

    #[test]
    fn constant_driver_translates() {
        let g = grid(16);
        let c = [0.7, -1.3];
        let driver = VectorSeries::steady(VectorField::constant(g, &c), 2.0);
        let seeds = sample_seeds(&g, 3);
        let ts = advect_trajectories(&driver, &seeds, 0.05, 2.0).unwrap();
        let t = *ts.times.last().unwrap();
        for (s, x) in seeds.iter().zip(ts.final_positions()) {
            for a in 0..2 {
                assert!(periodic_gap(x[a], s[a] + c[a] * t, g.length) < 1e-12);
            }
        }
        assert!(volume_check(&ts) < 1e-15);
    }

    #[test]
    fn shear_matches_closed_form() {
        let g = grid(64);
        let driver = VectorSeries::steady(corpus::shear(&g, 1.0), 1.0);
        let mut seeds = sample_seeds(&g, 5);
        seeds.push([0.123, 2.345, 0.0]);
        let ts = advect_trajectories(&driver, &seeds, 1e-3, 1.0).unwrap();
        let mut worst = 0.0f64;
        for (s, x) in seeds.iter().zip(ts.final_positions()).take(seeds.len() - 1) {
            worst = worst.max(periodic_gap(x[0], s[0] + s[1].sin(), g.length));
            worst = worst.max(periodic_gap(x[1], s[1], g.length));
        }
        assert!(worst < 1e-8, "{worst}");
        let (s, x) = (seeds.last().unwrap(), ts.final_positions().pop().unwrap());
        assert!(periodic_gap(x[0], s[0] + s[1].sin(), g.length) < 1e-6);
        assert!(volume_check(&ts) < 1e-13);
    }

    #[test]
    fn spectral_path_agrees_off_grid() {
        let g = grid(32);
        let v = corpus::taylor_green(&g, 1.0);
        let driver = VectorSeries::steady(v, 0.5);
        let seeds = vec![[0.41, 1.93, 0.0], [3.3, 5.1, 0.0]];
        let opts = FlowMapOptions {
            interpolation: Interpolation::Spectral,
            record_every: 100,
        };
        let exact = advect_trajectories_with(&driver, &seeds, 1e-2, 0.5, &opts).unwrap();
        let herm = advect_trajectories(&driver, &seeds, 1e-2, 0.5).unwrap();
        assert_eq!(exact.times.len(), 2);
        for (a, b) in exact.final_positions().iter().zip(herm.final_positions()) {
            for k in 0..2 {
                assert!(periodic_gap(a[k], b[k], g.length) < 1e-4);
            }
        }
        assert!(volume_check(&exact) < 1e-8);
        let too_big = advect_trajectories_with(&VectorSeries::zeros(grid(128), 1.0), &seeds, 0.1, 0.1, &opts);
        assert!(too_big.is_err());
    }

    #[test]
    fn taylor_green_preserves_volume() {
        let g = grid(64);
        let driver = VectorSeries::steady(corpus::taylor_green(&g, 1.0), 1.0);
        let ts = advect_trajectories_with(
            &driver,
            &sample_seeds(&g, 8),
            1e-2,
            1.0,
            &FlowMapOptions {
                record_every: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(ts.times.len(), 11);
        assert!(volume_check(&ts) < 1e-6, "{}", volume_check(&ts));
    }

    #[test]
    fn group_property_for_steady_driver() {
        let g = grid(32);
        let driver = VectorSeries::steady(corpus::taylor_green(&g, 1.0), 1.0);
        let seeds = vec![[1.0, 2.0, 0.0]];
        let full = advect_trajectories(&driver, &seeds, 1e-2, 1.0).unwrap();
        let half = advect_trajectories(&driver, &seeds, 1e-2, 0.5).unwrap();
        let rest = advect_trajectories(&driver, &half.final_positions(), 1e-2, 0.5).unwrap();
        let (a, b) = (full.final_positions()[0], rest.final_positions()[0]);
        for k in 0..2 {
            assert!(periodic_gap(a[k], b[k], g.length) < 1e-10);
        }
    }

    #[test]
    fn time_dependent_driver() {
        let g = grid(16);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let fields = times.iter().map(|&t| VectorField::constant(g, &[t, 0.0])).collect();
        let driver = VectorSeries::new(times, fields).unwrap();
        let ts = advect_trajectories(&driver, &[[1.0, 1.0, 0.0]], 0.05, 1.0).unwrap();
        let x = ts.final_positions()[0];
        assert!((x[0] - 1.5).abs() < 1e-12);
        assert!(matches!(
            advect_trajectories(&driver, &[[1.0, 1.0, 0.0]], 0.05, 1.5),
            Err(Error::SeriesTooShort { .. })
        ));
        assert!(matches!(
            advect_trajectories(&driver, &[[1.0, 1.0, 0.0]], 0.0, 1.0),
            Err(Error::InvalidTimeStep(_))
        ));
    }

    #[test]
    fn rejects_compressible_driver() {
        let g = grid(16);
        let f = corpus::single_mode(&g, &[1, 0], 1.0);
        let driver = VectorSeries::steady(spectral::gradient(&f), 1.0);
        assert!(matches!(
            advect_trajectories(&driver, &[[0.0; 3]], 0.1, 1.0),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn composition_identity_and_translation() {
        let g = grid(32);
        let f = RealField::from_fn(g, |x| (x[0].sin() * (2.0 * x[1]).cos() + 1.2).powi(2)).unwrap();
        let ws = WindowSet::full(&g);
        let mp = MorreyParams::new(4.0, 2.0).unwrap();
        let seeds = grid_seeds(&g);
        let id = advect_trajectories(&VectorSeries::zeros(g, 0.0), &seeds, 0.1, 0.0).unwrap();
        assert_eq!(composition_norm_ratio(&f, &id, &mp, &ws).unwrap(), 1.0);
        let h = g.spacing();
        let driver = VectorSeries::steady(VectorField::constant(g, &[3.0 * h, -5.0 * h]), 1.0);
        let shifted = advect_trajectories(&driver, &seeds, 0.25, 1.0).unwrap();
        let ratio = composition_norm_ratio(&f, &shifted, &mp, &ws).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12, "{ratio}");
        let moved = compose(&f, &shifted, Interpolation::Hermite).unwrap();
        let expect = f.shifted(&[-3, 5]);
        let diff = moved.sub(&expect).unwrap().sup_norm();
        assert!(diff < 1e-12, "{diff}");
        assert!(matches!(
            composition_norm_ratio(&RealField::zeros(g), &id, &mp, &ws),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let g = grid(16);
        let ts = advect_trajectories(&VectorSeries::zeros(g, 0.2), &[[0.0; 3], [PI, PI, 0.0]], 0.1, 0.2).unwrap();
        let csv = ts.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "seed_id,t,x0,x1,det");
        assert_eq!(lines.len(), 1 + 2 * 3);
    }
}
