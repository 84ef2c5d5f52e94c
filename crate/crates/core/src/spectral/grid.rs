use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, length)^dim`.
///
/// Samples are stored row-major: the last axis is contiguous and axis 0 is
/// the slowest. Sample `i` along an axis sits at `x = i * length / size`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub size: usize,
    pub length: f64,
}

impl Grid {
    pub fn new(dim: usize, size: usize, length: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "size must be a power of two >= 8, got {size}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        Ok(Self { dim, size, length })
    }

    /// 2D grid of period 2π.
    pub fn square(size: usize) -> Result<Self> {
        Self::new(2, size, 2.0 * PI)
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.size as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Physical wavenumber of one unit of integer frequency, `2π / L`.
    pub fn frequency_scale(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn log2_size(&self) -> u32 {
        self.size.trailing_zeros()
    }

    /// Signed integer frequency stored at FFT index `i`. The Nyquist index
    /// `size/2` maps to `-size/2`.
    pub fn signed_frequency(&self, i: usize) -> i64 {
        let n = self.size as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.size;
            flat /= self.size;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0usize, |acc, &i| acc * self.size + i)
    }

    /// Integer wavevector of every spectral slot, FFT layout.
    pub fn wavevectors(&self) -> Vec<[i64; 3]> {
        (0..self.len())
            .map(|flat| {
                let idx = self.multi_index(flat);
                let mut k = [0i64; 3];
                for a in 0..self.dim {
                    k[a] = self.signed_frequency(idx[a]);
                }
                k
            })
            .collect()
    }

    /// Euclidean norm of the integer wavevector of every spectral slot.
    pub fn lattice_radii(&self) -> Vec<f64> {
        self.wavevectors()
            .iter()
            .map(|k| ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt())
            .collect()
    }

    /// Coordinates of a grid node.
    pub fn node(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    /// Same geometry with `factor` times as many samples per axis.
    pub(crate) fn refined(&self, factor: usize) -> Grid {
        Grid {
            dim: self.dim,
            size: self.size * factor,
            length: self.length,
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Scalar,
    ComponentOfVector,
}

/// Real samples of a periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    samples: Vec<f64>,
    kind: FieldKind,
}

impl RealField {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        Self::with_kind(grid, samples, FieldKind::Scalar)
    }

    pub fn with_kind(grid: Grid, samples: Vec<f64>, kind: FieldKind) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid,
            samples,
            kind,
        })
    }

    /// Internal constructor for samples produced by our own transforms.
    pub(crate) fn from_parts(grid: Grid, samples: Vec<f64>, kind: FieldKind) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self {
            grid,
            samples,
            kind,
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.len()], FieldKind::Scalar)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::from_parts(grid, vec![value; grid.len()], FieldKind::Scalar)
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let samples = (0..grid.len())
            .map(|i| f(&grid.node(i)[..grid.dim]))
            .collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub(crate) fn set_kind(mut self, kind: FieldKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Discrete `L²` norm, `(h^dim Σ f²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.samples.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(
            self.grid,
            self.samples.iter().map(|x| x * factor).collect(),
            self.kind,
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product on the grid (aliased; see `spectral::product` for the
    /// alias-free version).
    pub fn mul_pointwise(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_parts(
            self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            self.kind,
        ))
    }

    /// Circular shift by whole grid cells along each axis.
    pub fn shifted(&self, offset: &[isize]) -> Self {
        let g = self.grid;
        let n = g.size as isize;
        let mut out = vec![0.0; g.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = g.multi_index(flat);
            let mut src = [0usize; 3];
            for a in 0..g.dim {
                src[a] = (idx[a] as isize - offset[a]).rem_euclid(n) as usize;
            }
            *slot = self.samples[g.flat_index(&src)];
        }
        Self::from_parts(g, out, self.kind)
    }
}

/// Fourier coefficients of a field in standard FFT layout. Coefficients are
/// normalized Fourier-series coefficients: `f(x) = Σ_k c_k e^{i 2π k·x / L}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coefficients.len()
            )));
        }
        Ok(Self { grid, coefficients })
    }

    pub(crate) fn from_parts(grid: Grid, coefficients: Vec<Complex64>) -> Self {
        Self { grid, coefficients }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    /// Largest violation of `c_{-k} = conj(c_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst = 0.0f64;
        for flat in 0..g.len() {
            let idx = g.multi_index(flat);
            let mut mirror = [0usize; 3];
            for a in 0..g.dim {
                mirror[a] = (g.size - idx[a]) % g.size;
            }
            let m = g.flat_index(&mirror);
            worst = worst.max((self.coefficients[flat] - self.coefficients[m].conj()).norm());
        }
        worst
    }
}

/// `dim` real components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<RealField>,
}

impl VectorField {
    pub fn new(components: Vec<RealField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidGrid("vector field needs components".into()))?;
        let grid = *first.grid();
        if components.len() != grid.dim {
            return Err(Error::InvalidGrid(format!(
                "expected {} components, got {}",
                grid.dim,
                components.len()
            )));
        }
        for c in &components {
            grid.check_same(c.grid())?;
        }
        Ok(Self {
            components: components
                .into_iter()
                .map(|c| c.set_kind(FieldKind::ComponentOfVector))
                .collect(),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, &[0.0; 3])
    }

    pub fn constant(grid: Grid, value: &[f64]) -> Self {
        Self {
            components: (0..grid.dim)
                .map(|a| {
                    RealField::from_parts(
                        grid,
                        vec![value[a]; grid.len()],
                        FieldKind::ComponentOfVector,
                    )
                })
                .collect(),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let values: Vec<Vec<f64>> = (0..grid.len())
            .map(|i| f(&grid.node(i)[..grid.dim]))
            .collect();
        let comps = (0..grid.dim)
            .map(|a| RealField::new(grid, values.iter().map(|v| v[a]).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub(crate) fn from_samples(grid: Grid, comps: Vec<Vec<f64>>) -> Self {
        Self {
            components: comps
                .into_iter()
                .map(|s| RealField::from_parts(grid, s, FieldKind::ComponentOfVector))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[RealField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &RealField {
        &self.components[axis]
    }

    pub fn into_components(self) -> Vec<RealField> {
        self.components
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> Vec<f64> {
        magnitude_of(&self.components)
    }

    pub fn sup_norm(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    /// `(Σ_a ‖v_a‖²_{L²})^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|c| c.scale(factor))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn map(&self, f: impl Fn(&RealField) -> RealField) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| f(c).set_kind(FieldKind::ComponentOfVector))
                .collect(),
        }
    }

    fn zip(
        &self,
        other: &Self,
        f: impl Fn(&RealField, &RealField) -> Result<RealField>,
    ) -> Result<Self> {
        self.grid().check_same(other.grid())?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect::<Result<_>>()?,
        })
    }
}

pub(crate) fn magnitude_of(components: &[RealField]) -> Vec<f64> {
    let n = components[0].samples().len();
    (0..n)
        .map(|i| {
            components
                .iter()
                .map(|c| c.samples()[i] * c.samples()[i])
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1, 16, 1.0).is_err());
        assert!(Grid::new(2, 12, 1.0).is_err());
        assert!(Grid::new(2, 4, 1.0).is_err());
        assert!(Grid::new(2, 16, 0.0).is_err());
        assert!(Grid::new(3, 8, 1.0).is_ok());
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        for flat in [0, 1, 7, 8, 63, 64, 511] {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.signed_frequency(4), -4);
        assert_eq!(g.signed_frequency(3), 3);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::square(8).unwrap();
        let mut s = vec![0.0; 64];
        s[5] = f64::NAN;
        assert!(matches!(RealField::new(g, s), Err(Error::NonFinite { index: 5 })));
    }
}
