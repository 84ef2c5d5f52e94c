//! Time series of vector fields on a fixed grid.

use crate::error::{Error, Result};
use crate::spectral::{Grid, VectorField};

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSeries {
    times: Vec<f64>,
    fields: Vec<VectorField>,
    steady: bool,
}

impl VectorSeries {
    /// Samples at strictly increasing times, all on one grid.
    pub fn new(times: Vec<f64>, fields: Vec<VectorField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::InvalidParams(format!(
                "series needs matching nonempty times and fields, got {} and {}",
                times.len(),
                fields.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("series times must be finite and strictly increasing".into()));
        }
        let g = *fields[0].grid();
        for f in &fields[1..] {
            g.check_same(f.grid())?;
        }
        Ok(Self {
            times,
            fields,
            steady: false,
        })
    }

    /// A field held fixed on `[0, horizon]`.
    pub fn steady(field: VectorField, horizon: f64) -> Self {
        Self {
            times: vec![0.0, horizon.max(0.0)],
            fields: vec![field],
            steady: true,
        }
    }

    pub fn zeros(grid: Grid, horizon: f64) -> Self {
        Self::steady(VectorField::zeros(grid), horizon)
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn is_steady(&self) -> bool {
        self.steady
    }

    pub fn times(&self) -> &[f64] {
        if self.steady {
            &self.times[..1]
        } else {
            &self.times
        }
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn first(&self) -> &VectorField {
        &self.fields[0]
    }

    pub fn last(&self) -> &VectorField {
        self.fields.last().unwrap()
    }

    pub fn check_horizon(&self, horizon: f64) -> Result<()> {
        let slack = 1e-9 * horizon.abs().max(1.0);
        if horizon > self.end() + slack {
            Err(Error::SeriesTooShort {
                available: self.end(),
                requested: horizon,
            })
        } else {
            Ok(())
        }
    }

    /// Bracketing sample indices and the weight of the upper one for linear
    /// interpolation at `t` (clamped to the series range).
    pub fn bracket(&self, t: f64) -> (usize, usize, f64) {
        if self.steady || t <= self.times[0] {
            return (0, 0, 0.0);
        }
        let n = self.times.len();
        if t >= self.times[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let hi = self.times.partition_point(|&s| s <= t);
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        if w == 0.0 {
            (lo, lo, 0.0)
        } else {
            (lo, hi, w)
        }
    }

    /// Field at `t`, linear in time between samples.
    pub fn at(&self, t: f64) -> VectorField {
        let (lo, hi, w) = self.bracket(t);
        if lo == hi {
            return self.fields[lo].clone();
        }
        let (a, b) = (&self.fields[lo], &self.fields[hi]);
        VectorField::from_samples(
            *a.grid(),
            a.components()
                .iter()
                .zip(b.components())
                .map(|(x, y)| {
                    x.samples()
                        .iter()
                        .zip(y.samples())
                        .map(|(p, q)| (1.0 - w) * p + w * q)
                        .collect()
                })
                .collect(),
        )
    }

    /// Every `stride`-th sample plus the final one.
    pub fn subsample(&self, stride: usize) -> Self {
        if self.steady || stride <= 1 {
            return self.clone();
        }
        let n = self.times.len();
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        Self {
            times: idx.iter().map(|&i| self.times[i]).collect(),
            fields: idx.iter().map(|&i| self.fields[i].clone()).collect(),
            steady: false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &VectorField)> {
        self.times().iter().copied().zip(&self.fields)
    }
}
