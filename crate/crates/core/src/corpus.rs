//! Deterministic test-field generators and the on-disk corpus.
//!
//! Random fields are drawn mode by mode over the integer cube `[-K, K]^dim`
//! in a fixed order, so a given `(seed, stream, K)` produces the same
//! trigonometric polynomial on every grid that resolves it. Per-trial
//! streams come from ChaCha's stream counter, never from reseeding.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, fft, io, FieldKind, Grid, Ops, RealField, VectorField};

/// Band and decay of a random field: modes with `1 <= |k|` and every
/// `|k_a| <= kmax`, amplitude `∝ |k|^{-slope - dim/2}` so that the `L²`
/// norm of dyadic block `j` scales like `2^{-slope j}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub kmax: i64,
    pub slope: f64,
    /// Root-mean-square value of the generated field.
    pub rms: f64,
}

impl Default for BandSpec {
    fn default() -> Self {
        Self {
            kmax: 8,
            slope: 1.0,
            rms: 1.0,
        }
    }
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn check_band(grid: &Grid, band: &BandSpec) -> Result<()> {
    if band.kmax < 1 || band.kmax as usize > grid.size / 3 {
        return Err(Error::InvalidParams(format!(
            "band limit {} must lie in [1, size/3 = {}]",
            band.kmax,
            grid.size / 3
        )));
    }
    Ok(())
}

/// Integer wavevectors of the random band in draw order, one per conjugate
/// pair (first nonzero component positive).
fn half_band(dim: usize, kmax: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    let range = -kmax..=kmax;
    for k0 in range.clone() {
        for k1 in range.clone() {
            let k2s: Vec<i64> = if dim == 3 { range.clone().collect() } else { vec![0] };
            for &k2 in &k2s {
                let k = [k0, k1, k2];
                let first = k.iter().copied().find(|&c| c != 0);
                if matches!(first, Some(c) if c > 0) {
                    out.push(k);
                }
            }
        }
    }
    out
}

fn slot(grid: &Grid, k: &[i64; 3]) -> usize {
    let n = grid.size as i64;
    let mut idx = [0usize; 3];
    for a in 0..grid.dim {
        idx[a] = k[a].rem_euclid(n) as usize;
    }
    grid.flat_index(&idx)
}

fn random_spectrum(grid: &Grid, rng: &mut ChaCha8Rng, band: &BandSpec) -> Vec<Complex64> {
    let mut hat = vec![Complex64::default(); grid.len()];
    let mut energy = 0.0;
    for k in half_band(grid.dim, band.kmax) {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let r = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        let amp = r.powf(-band.slope - grid.dim as f64 / 2.0);
        let c = Complex64::new(re, im) * amp;
        let neg = [-k[0], -k[1], -k[2]];
        hat[slot(grid, &k)] = c;
        hat[slot(grid, &neg)] = c.conj();
        energy += 2.0 * c.norm_sqr();
    }
    if energy > 0.0 {
        let s = band.rms / energy.sqrt();
        for c in &mut hat {
            *c *= s;
        }
    }
    hat
}

/// Random mean-zero scalar field.
pub fn random_scalar(grid: &Grid, seed: u64, stream: u64, band: &BandSpec) -> Result<RealField> {
    check_band(grid, band)?;
    let mut r = rng(seed, stream);
    let hat = random_spectrum(grid, &mut r, band);
    Ok(RealField::from_parts(
        *grid,
        fft::inverse_real(hat, grid.dim, grid.size),
        FieldKind::Scalar,
    ))
}

/// Random divergence-free vector field with root-mean-square speed `band.rms`.
pub fn random_solenoidal(
    grid: &Grid,
    seed: u64,
    stream: u64,
    band: &BandSpec,
) -> Result<VectorField> {
    check_band(grid, band)?;
    let mut r = rng(seed, stream);
    let unit = BandSpec { rms: 1.0, ..*band };
    let ops = Ops::new(grid);
    let mut hats: Vec<_> = (0..grid.dim)
        .map(|_| random_spectrum(grid, &mut r, &unit))
        .collect();
    ops.leray_in_place(&mut hats);
    let energy: f64 = hats.iter().flatten().map(|c| c.norm_sqr()).sum();
    let s = if energy > 0.0 { band.rms / energy.sqrt() } else { 0.0 };
    Ok(VectorField::from_samples(
        *grid,
        hats.into_iter()
            .map(|mut h| {
                h.iter_mut().for_each(|c| *c *= s);
                ops.inverse(h)
            })
            .collect(),
    ))
}

/// `amplitude · cos(k·x)` for an integer wavevector `k`.
pub fn single_mode(grid: &Grid, k: &[i64], amplitude: f64) -> RealField {
    let s = grid.frequency_scale();
    let samples = (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            let phase: f64 = (0..grid.dim).map(|a| k[a] as f64 * s * x[a]).sum();
            amplitude * phase.cos()
        })
        .collect();
    RealField::from_parts(*grid, samples, FieldKind::Scalar)
}

/// Steady Taylor-Green cell `∇⊥(cos x cos y)` scaled by `amplitude`; in 3D
/// the third component is zero and the field is independent of `z`.
pub fn taylor_green(grid: &Grid, amplitude: f64) -> VectorField {
    let s = grid.frequency_scale();
    let mut comps = vec![vec![0.0; grid.len()]; grid.dim];
    for i in 0..grid.len() {
        let x = grid.node(i);
        let (cx, sx) = ((s * x[0]).cos(), (s * x[0]).sin());
        let (cy, sy) = ((s * x[1]).cos(), (s * x[1]).sin());
        comps[0][i] = amplitude * cx * sy;
        comps[1][i] = -amplitude * sx * cy;
    }
    VectorField::from_samples(*grid, comps)
}

/// Shear flow `(sin x_1, 0, ...)` scaled by `amplitude`.
pub fn shear(grid: &Grid, amplitude: f64) -> VectorField {
    let s = grid.frequency_scale();
    let mut comps = vec![vec![0.0; grid.len()]; grid.dim];
    for i in 0..grid.len() {
        comps[0][i] = amplitude * (s * grid.node(i)[1]).sin();
    }
    VectorField::from_samples(*grid, comps)
}

/// Product of two periodic bumps `exp(κ (cos(x - c) - 1))` with random
/// centres, dealiased.
pub fn bump_product(grid: &Grid, seed: u64, stream: u64, kappa: f64) -> RealField {
    let mut r = rng(seed, stream);
    let mut centre = || -> [f64; 3] {
        let mut c = [0.0; 3];
        for x in c.iter_mut().take(grid.dim) {
            let u: f64 = rand::Rng::random(&mut r);
            *x = u * grid.length;
        }
        c
    };
    let (c1, c2) = (centre(), centre());
    let s = grid.frequency_scale();
    let samples = (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            let bump = |c: &[f64; 3]| {
                (0..grid.dim)
                    .map(|a| (kappa * ((s * (x[a] - c[a])).cos() - 1.0)).exp())
                    .product::<f64>()
            };
            bump(&c1) * bump(&c2)
        })
        .collect();
    spectral::dealias(&RealField::from_parts(*grid, samples, FieldKind::Scalar))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Random,
    SingleMode,
    TaylorGreen,
    Shear,
    BumpProduct,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Random,
        Family::SingleMode,
        Family::TaylorGreen,
        Family::Shear,
        Family::BumpProduct,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub grid: Grid,
    pub seed: u64,
    pub trials: usize,
    pub band: BandSpec,
    pub families: Vec<Family>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub label: String,
    pub family: Family,
    pub stream: u64,
    /// File stem relative to the corpus directory (vector fields add `_cN`).
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub spec: CorpusSpec,
    pub entries: Vec<CorpusEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusField {
    Scalar(RealField),
    Vector(VectorField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub manifest: CorpusManifest,
    pub fields: Vec<CorpusField>,
}

fn generate_entry(spec: &CorpusSpec, family: Family, stream: u64) -> Result<CorpusField> {
    let g = &spec.grid;
    Ok(match family {
        Family::Random => CorpusField::Scalar(random_scalar(g, spec.seed, stream, &spec.band)?),
        Family::SingleMode => {
            let mut r = rng(spec.seed, stream);
            let top = (spec.band.kmax.max(1) as f64).log2().floor() as u32;
            let j = rand::Rng::random_range(&mut r, 0..=top);
            let axis = rand::Rng::random_range(&mut r, 0..g.dim);
            let mut k = [0i64; 3];
            k[axis] = 1 << j;
            CorpusField::Scalar(single_mode(g, &k, spec.band.rms * 2f64.sqrt()))
        }
        Family::TaylorGreen => CorpusField::Vector(taylor_green(g, spec.band.rms)),
        Family::Shear => CorpusField::Vector(shear(g, spec.band.rms)),
        Family::BumpProduct => CorpusField::Scalar(bump_product(g, spec.seed, stream, 4.0)),
    })
}

impl Corpus {
    pub fn generate(spec: &CorpusSpec) -> Result<Self> {
        let mut entries = Vec::new();
        let mut fields = Vec::new();
        for trial in 0..spec.trials {
            for (fi, &family) in spec.families.iter().enumerate() {
                let stream = (trial * spec.families.len() + fi) as u64;
                let label = format!("{}-{trial:04}", serde_plain(family));
                fields.push(generate_entry(spec, family, stream)?);
                entries.push(CorpusEntry {
                    file: label.clone(),
                    label,
                    family,
                    stream,
                });
            }
        }
        Ok(Self {
            manifest: CorpusManifest {
                spec: spec.clone(),
                entries,
            },
            fields,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (entry, field) in self.manifest.entries.iter().zip(&self.fields) {
            let stem = dir.join(&entry.file);
            match field {
                CorpusField::Scalar(f) => io::write_field(&stem, f)?,
                CorpusField::Vector(v) => io::write_vector(&stem, v)?,
            }
        }
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| Error::json(&path, e))?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn read_manifest(dir: &Path) -> Result<CorpusManifest> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(&path, e))
    }
}

fn serde_plain(f: Family) -> String {
    serde_json::to_value(f)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Standard deviation in `L²` of each homogeneous dyadic block, used to check
/// the spectral slope of a generated corpus.
pub fn block_l2_profile(f: &RealField) -> Vec<(i32, f64)> {
    crate::lp::decompose(f, true)
        .blocks_with_index()
        .map(|(j, b)| (j, b.l2_norm() / (2.0 * PI).powf(f.grid().dim as f64 / 2.0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_bit_identical() {
        let g = Grid::square(32).unwrap();
        let spec = CorpusSpec {
            grid: g,
            seed: 11,
            trials: 3,
            band: BandSpec::default(),
            families: Family::ALL.to_vec(),
        };
        let a = Corpus::generate(&spec).unwrap();
        let b = Corpus::generate(&spec).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.fields.iter().zip(&b.fields) {
            if let (CorpusField::Scalar(x), CorpusField::Scalar(y)) = (x, y) {
                for (p, q) in x.samples().iter().zip(y.samples()) {
                    assert_eq!(p.to_bits(), q.to_bits());
                }
            }
        }
    }

    #[test]
    fn zero_trials_gives_empty_corpus_with_valid_manifest() {
        let g = Grid::square(16).unwrap();
        let spec = CorpusSpec {
            grid: g,
            seed: 1,
            trials: 0,
            band: BandSpec { kmax: 4, ..Default::default() },
            families: vec![Family::Random],
        };
        let c = Corpus::generate(&spec).unwrap();
        assert!(c.fields.is_empty());
        let dir = tempfile::tempdir().unwrap();
        c.write(dir.path()).unwrap();
        let m = Corpus::read_manifest(dir.path()).unwrap();
        assert_eq!(m, c.manifest);
    }

    #[test]
    fn regeneration_from_manifest_matches_files() {
        let g = Grid::square(16).unwrap();
        let spec = CorpusSpec {
            grid: g,
            seed: 5,
            trials: 2,
            band: BandSpec { kmax: 5, ..Default::default() },
            families: vec![Family::Random, Family::TaylorGreen],
        };
        let c = Corpus::generate(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        c.write(dir.path()).unwrap();
        let m = Corpus::read_manifest(dir.path()).unwrap();
        let again = Corpus::generate(&m.spec).unwrap();
        let on_disk = io::read_field(&dir.path().join(&m.entries[0].file)).unwrap();
        match &again.fields[0] {
            CorpusField::Scalar(f) => assert_eq!(f.samples(), on_disk.samples()),
            CorpusField::Vector(_) => panic!("expected scalar"),
        }
    }

    #[test]
    fn random_fields_are_resolution_independent() {
        let band = BandSpec { kmax: 6, slope: 1.0, rms: 1.0 };
        let coarse = random_scalar(&Grid::square(32).unwrap(), 3, 9, &band).unwrap();
        let fine = random_scalar(&Grid::square(64).unwrap(), 3, 9, &band).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let a = coarse.samples()[i * 32 + j];
                let b = fine.samples()[(2 * i) * 64 + 2 * j];
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!((coarse.l2_norm() / (2.0 * PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solenoidal_fields_are_divergence_free() {
        let g = Grid::new(3, 16, 2.0 * PI).unwrap();
        let band = BandSpec { kmax: 4, ..Default::default() };
        let v = random_solenoidal(&g, 2, 0, &band).unwrap();
        assert!(spectral::max_divergence(&v) < 1e-12 * v.sup_norm());
    }

    #[test]
    fn slope_two_block_decay() {
        // Mid-band block norms should fall by about 2^{-2} per octave.
        let g = Grid::square(128).unwrap();
        let band = BandSpec { kmax: 40, slope: 2.0, rms: 1.0 };
        let f = random_scalar(&g, 17, 0, &band).unwrap();
        let profile = block_l2_profile(&f);
        let norm = |j: i32| profile.iter().find(|(jj, _)| *jj == j).unwrap().1;
        for j in 2..=4 {
            let measured = norm(j + 1) / norm(j);
            let expected = 0.25;
            assert!(
                measured / expected < 3.0 && expected / measured < 3.0,
                "j={j}: ratio {measured}"
            );
        }
    }
}
