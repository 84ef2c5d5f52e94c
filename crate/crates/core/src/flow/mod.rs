//! Pseudo-spectral incompressible Euler and ideal MHD: direct RK4 integration,
//! linear transport solves and the successive-approximation drivers.

mod diagnostics;
mod iterate;

pub use diagnostics::{blowup_diagnostics, CurrentDiagnostics, DiagnosticsSeries};
pub use iterate::{euler_iterate, mhd_iterate, IterateRecord, IterationReport, IterationSettings};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::VectorSeries;
use crate::spectral::{self, Grid, Ops, VectorField};

/// Largest admissible `max|u| dt / h`.
pub const CFL_LIMIT: f64 = 0.5;
const DIV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub time: f64,
    pub v: VectorField,
    pub b: Option<VectorField>,
}

impl FlowState {
    pub fn new(time: f64, v: VectorField, b: Option<VectorField>) -> Result<Self> {
        spectral::check_solenoidal(&v, "velocity", DIV_TOL)?;
        if let Some(b) = &b {
            v.grid().check_same(b.grid())?;
            spectral::check_solenoidal(b, "magnetic field", DIV_TOL)?;
        }
        Ok(Self { time, v, b })
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }

    /// `‖v‖²_{L²} + ‖b‖²_{L²}`.
    pub fn energy(&self) -> f64 {
        let b = self.b.as_ref().map_or(0.0, |b| b.l2_norm().powi(2));
        self.v.l2_norm().powi(2) + b
    }

    /// Fastest characteristic speed: `max|v|`, or `max|v ± b|` with a field.
    pub fn max_speed(&self) -> f64 {
        max_speed(&self.v, self.b.as_ref())
    }
}

/// Elsässer variables `z± = v ± b`.
pub fn elsasser(v: &VectorField, b: &VectorField) -> Result<(VectorField, VectorField)> {
    Ok((v.add(b)?, v.sub(b)?))
}

/// Inverse of [`elsasser`]: `v = (z⁺ + z⁻)/2`, `b = (z⁺ - z⁻)/2`.
pub fn elsasser_inverse(zplus: &VectorField, zminus: &VectorField) -> Result<(VectorField, VectorField)> {
    Ok((zplus.add(zminus)?.scale(0.5), zplus.sub(zminus)?.scale(0.5)))
}

fn max_speed(v: &VectorField, b: Option<&VectorField>) -> f64 {
    match b {
        None => v.sup_norm(),
        Some(b) => {
            let plus = v.components().iter().zip(b.components());
            let n = v.grid().len();
            (0..n)
                .map(|i| {
                    let (mut p, mut m) = (0.0, 0.0);
                    for (x, y) in plus.clone() {
                        let (a, c) = (x.samples()[i], y.samples()[i]);
                        p += (a + c) * (a + c);
                        m += (a - c) * (a - c);
                    }
                    p.max(m).sqrt()
                })
                .fold(0.0, f64::max)
        }
    }
}

pub(crate) fn check_cfl(speed: f64, dt: f64, grid: &Grid) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    let courant = speed * dt / grid.spacing();
    if courant > CFL_LIMIT || !courant.is_finite() {
        Err(Error::Cfl {
            courant,
            limit: CFL_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Evaluation points `t0 + k dt`, with a shortened last step if `horizon` is
/// not a multiple of `dt`.
pub fn step_times(t0: f64, horizon: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParams(format!("horizon must be nonnegative, got {horizon}")));
    }
    let steps = (horizon / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..=steps).map(|k| t0 + k as f64 * dt).collect();
    *times.last_mut().unwrap() = t0 + horizon;
    Ok(times)
}

/// Spectral state `(v̂, b̂)`.
#[derive(Clone)]
struct Hats {
    v: Vec<Vec<Complex64>>,
    b: Option<Vec<Vec<Complex64>>>,
}

impl Hats {
    fn axpy(&self, h: f64, k: &Hats) -> Hats {
        let comb = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            x.iter()
                .zip(y)
                .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + q * h).collect())
                .collect()
        };
        Hats {
            v: comb(&self.v, &k.v),
            b: self.b.as_ref().map(|b| comb(b, k.b.as_ref().unwrap())),
        }
    }

    fn rk4_combine(&self, dt: f64, k: &[Hats; 4]) -> Hats {
        let comb = |x: &[Vec<Complex64>], ks: [&[Vec<Complex64>]; 4]| -> Vec<Vec<Complex64>> {
            x.iter()
                .enumerate()
                .map(|(a, xa)| {
                    xa.iter()
                        .enumerate()
                        .map(|(i, c)| {
                            c + (ks[0][a][i] + ks[1][a][i] * 2.0 + ks[2][a][i] * 2.0 + ks[3][a][i]) * (dt / 6.0)
                        })
                        .collect()
                })
                .collect()
        };
        Hats {
            v: comb(&self.v, [&k[0].v, &k[1].v, &k[2].v, &k[3].v]),
            b: self.b.as_ref().map(|b| {
                comb(
                    b,
                    [
                        k[0].b.as_ref().unwrap(),
                        k[1].b.as_ref().unwrap(),
                        k[2].b.as_ref().unwrap(),
                        k[3].b.as_ref().unwrap(),
                    ],
                )
            }),
        }
    }
}

struct Solver {
    ops: Ops,
}

/// Advecting fields in physical space, already 2/3-truncated.
struct Drivers {
    v: Vec<Vec<f64>>,
    b: Option<Vec<Vec<f64>>>,
}

impl Solver {
    fn new(grid: &Grid) -> Self {
        Self { ops: Ops::new(grid) }
    }

    fn hats(&self, v: &VectorField, b: Option<&VectorField>) -> Hats {
        let f = |w: &VectorField| w.components().iter().map(|c| self.ops.forward(c.samples())).collect();
        Hats { v: f(v), b: b.map(f) }
    }

    fn fields(&self, h: &Hats) -> (VectorField, Option<VectorField>) {
        let g = self.ops.grid;
        let f = |c: &Vec<Vec<Complex64>>| VectorField::from_samples(g, c.iter().map(|x| self.ops.inverse(x.clone())).collect());
        (f(&h.v), h.b.as_ref().map(f))
    }

    fn truncated(&self, hat: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        hat.iter()
            .map(|c| {
                let mut c = c.clone();
                self.ops.dealias_in_place(&mut c);
                c
            })
            .collect()
    }

    fn drivers_from_hats(&self, h: &Hats) -> Drivers {
        let phys = |c: &[Vec<Complex64>]| self.truncated(c).into_iter().map(|x| self.ops.inverse(x)).collect();
        Drivers {
            v: phys(&h.v),
            b: h.b.as_deref().map(phys),
        }
    }

    fn drivers_from_fields(&self, v: &VectorField, b: Option<&VectorField>) -> Drivers {
        self.drivers_from_hats(&self.hats(v, b))
    }

    /// `-P[(w·∇)v - (c·∇)b]` and `-P[(w·∇)b - (c·∇)v]` for drivers `(w, c)`.
    fn rhs(&self, d: &Drivers, u: &Hats) -> Hats {
        let v = self.truncated(&u.v);
        let b = u.b.as_deref().map(|b| self.truncated(b));
        let mut rv = self.ops.advection(&d.v, &v);
        let mut rb = b.as_ref().map(|b| self.ops.advection(&d.v, b));
        if let Some(db) = &d.b {
            if let Some(b) = &b {
                sub_in_place(&mut rv, &self.ops.advection(db, b));
            }
            if let Some(rb) = rb.as_mut() {
                sub_in_place(rb, &self.ops.advection(db, &v));
            }
        }
        let finish = |mut r: Vec<Vec<Complex64>>| {
            self.ops.leray_in_place(&mut r);
            r.iter_mut().flatten().for_each(|c| *c = -*c);
            r
        };
        Hats {
            v: finish(rv),
            b: rb.map(finish),
        }
    }
}

fn sub_in_place(a: &mut [Vec<Complex64>], b: &[Vec<Complex64>]) {
    for (x, y) in a.iter_mut().zip(b) {
        for (p, q) in x.iter_mut().zip(y) {
            *p -= q;
        }
    }
}

/// One classical RK4 step of the Leray-projected nonlinear system: Euler when
/// `b` is absent, ideal MHD otherwise. Products are 2/3-dealiased.
pub fn direct_step(state: &FlowState, dt: f64) -> Result<FlowState> {
    direct_step_with(&Solver::new(state.grid()), state, dt)
}

fn direct_step_with(solver: &Solver, state: &FlowState, dt: f64) -> Result<FlowState> {
    check_cfl(state.max_speed(), dt, state.grid())?;
    let y = solver.hats(&state.v, state.b.as_ref());
    let stage = |u: &Hats| {
        let d = solver.drivers_from_hats(u);
        solver.rhs(&d, u)
    };
    let k1 = stage(&y);
    let k2 = stage(&y.axpy(0.5 * dt, &k1));
    let k3 = stage(&y.axpy(0.5 * dt, &k2));
    let k4 = stage(&y.axpy(dt, &k3));
    let (v, b) = solver.fields(&y.rk4_combine(dt, &[k1, k2, k3, k4]));
    Ok(FlowState {
        time: state.time + dt,
        v,
        b,
    })
}

/// Stored trajectory of a run: `v` and, for MHD, `b` at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub v: VectorSeries,
    pub b: Option<VectorSeries>,
}

impl Solution {
    pub fn state_at_end(&self) -> FlowState {
        FlowState {
            time: self.v.end(),
            v: self.v.last().clone(),
            b: self.b.as_ref().map(|b| b.last().clone()),
        }
    }
}

/// Repeated [`direct_step`] from `state.time` to `state.time + horizon`,
/// storing every step.
pub fn direct_run(state: &FlowState, horizon: f64, dt: f64) -> Result<Solution> {
    direct_run_recorded(state, horizon, dt, 1)
}

/// As [`direct_run`], storing every `every`-th step and the final one.
pub fn direct_run_recorded(state: &FlowState, horizon: f64, dt: f64, every: usize) -> Result<Solution> {
    let every = every.max(1);
    let times = step_times(state.time, horizon, dt)?;
    let solver = Solver::new(state.grid());
    let mut kept = vec![times[0]];
    let mut vs = vec![state.v.clone()];
    let mut bs = state.b.as_ref().map(|b| vec![b.clone()]);
    let mut cur = state.clone();
    let last = times.len() - 1;
    for (k, w) in times.windows(2).enumerate() {
        cur = direct_step_with(&solver, &cur, w[1] - w[0])?;
        cur.time = w[1];
        if (k + 1) % every == 0 || k + 1 == last {
            kept.push(w[1]);
            vs.push(cur.v.clone());
            if let (Some(bs), Some(b)) = (bs.as_mut(), cur.b.as_ref()) {
                bs.push(b.clone());
            }
        }
    }
    Ok(Solution {
        v: VectorSeries::new(kept.clone(), vs)?,
        b: bs.map(|bs| VectorSeries::new(kept, bs)).transpose()?,
    })
}

/// RK4 for `∂_t v + (w·∇)v + ∇P = 0`, `-ΔP = div((w·∇)v)`, with `w` taken
/// linearly in time from the driver series.
pub fn solve_linear_transport(w: &VectorSeries, v0: &VectorField, horizon: f64, dt: f64) -> Result<VectorSeries> {
    let sol = solve_linear_system(w, None, v0, None, horizon, dt)?;
    Ok(sol.v)
}

/// Coupled linear system
/// `∂_t v + (w·∇)v - (c·∇)b + ∇Π = 0`, `∂_t b + (w·∇)b - (c·∇)v = 0`
/// with drivers `(w, c)`; `b` is kept solenoidal by projection.
pub fn solve_linear_system(
    w: &VectorSeries,
    c: Option<&VectorSeries>,
    v0: &VectorField,
    b0: Option<&VectorField>,
    horizon: f64,
    dt: f64,
) -> Result<Solution> {
    let grid = *w.grid();
    grid.check_same(v0.grid())?;
    let t0 = w.start();
    w.check_horizon(t0 + horizon)?;
    if let Some(c) = c {
        grid.check_same(c.grid())?;
        c.check_horizon(t0 + horizon)?;
    }
    spectral::check_solenoidal(v0, "initial velocity", DIV_TOL)?;
    if let Some(b0) = b0 {
        grid.check_same(b0.grid())?;
        spectral::check_solenoidal(b0, "initial magnetic field", DIV_TOL)?;
    }
    let mut speed = 0.0f64;
    for f in w.fields() {
        spectral::check_solenoidal(f, "transport driver", DIV_TOL)?;
    }
    if let Some(c) = c {
        for f in c.fields() {
            spectral::check_solenoidal(f, "magnetic driver", DIV_TOL)?;
        }
        for (i, f) in w.fields().iter().enumerate() {
            let g = &c.fields()[i.min(c.len() - 1)];
            speed = speed.max(max_speed(f, Some(g)));
        }
    } else {
        speed = w.fields().iter().map(VectorField::sup_norm).fold(0.0, f64::max);
    }
    let times = step_times(t0, horizon, dt)?;
    check_cfl(speed, dt, &grid)?;

    let solver = Solver::new(&grid);
    let drivers_at = |t: f64| {
        let wf = w.at(t);
        let cf = c.map(|c| c.at(t));
        solver.drivers_from_fields(&wf, cf.as_ref())
    };
    let mut y = solver.hats(v0, b0);
    let mut vs = vec![v0.clone()];
    let mut bs = b0.map(|b| vec![b.clone()]);
    let mut d_start = drivers_at(times[0]);
    for win in times.windows(2) {
        let (t, h) = (win[0], win[1] - win[0]);
        let d_mid = drivers_at(t + 0.5 * h);
        let d_end = drivers_at(t + h);
        let k1 = solver.rhs(&d_start, &y);
        let k2 = solver.rhs(&d_mid, &y.axpy(0.5 * h, &k1));
        let k3 = solver.rhs(&d_mid, &y.axpy(0.5 * h, &k2));
        let k4 = solver.rhs(&d_end, &y.axpy(h, &k3));
        y = y.rk4_combine(h, &[k1, k2, k3, k4]);
        let (v, b) = solver.fields(&y);
        vs.push(v);
        if let (Some(bs), Some(b)) = (bs.as_mut(), b) {
            bs.push(b);
        }
        d_start = d_end;
    }
    Ok(Solution {
        v: VectorSeries::new(times.clone(), vs)?,
        b: bs.map(|bs| VectorSeries::new(times, bs)).transpose()?,
    })
}
