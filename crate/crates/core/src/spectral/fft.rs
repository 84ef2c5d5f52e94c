//! Multi-dimensional complex FFT over row-major cubes, built from
//! one-dimensional `rustfft` plans applied axis by axis.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((n, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// In-place unnormalized transform of a `dim`-cube with `n` samples per axis.
pub(crate) fn transform(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // Last axis is contiguous.
    fft.process_with_scratch(data, &mut scratch);

    let mut lines: Vec<Complex64> = Vec::new();
    for axis in 0..dim.saturating_sub(1) {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        lines.resize(block, Complex64::default());
        for chunk in data.chunks_exact_mut(block) {
            // Gather the `stride` lines of this block so each is contiguous.
            for i in 0..stride {
                for t in 0..n {
                    lines[i * n + t] = chunk[t * stride + i];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for i in 0..stride {
                for t in 0..n {
                    chunk[t * stride + i] = lines[i * n + t];
                }
            }
        }
    }
}

/// Forward transform normalized so that coefficients are Fourier-series
/// coefficients: a constant field `c` maps to `c` at the zero mode.
pub(crate) fn forward_real(samples: &[f64], dim: usize, n: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform(&mut data, dim, n, false);
    let scale = 1.0 / data.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    data
}

/// Inverse of [`forward_real`]; the imaginary part is discarded.
pub(crate) fn inverse_real(mut coeffs: Vec<Complex64>, dim: usize, n: usize) -> Vec<f64> {
    transform(&mut coeffs, dim, n, true);
    coeffs.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], dim: usize, n: usize) -> Vec<Complex64> {
        let total = data.len();
        let mut out = vec![Complex64::default(); total];
        for (ko, o) in out.iter_mut().enumerate() {
            for (xi, &x) in data.iter().enumerate() {
                let mut phase = 0.0;
                let (mut a, mut b) = (ko, xi);
                for _ in 0..dim {
                    phase += ((a % n) * (b % n)) as f64;
                    a /= n;
                    b /= n;
                }
                let ang = -2.0 * std::f64::consts::PI * phase / n as f64;
                *o += x * Complex64::from_polar(1.0, ang);
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_2d_and_3d() {
        for &(dim, n) in &[(2usize, 8usize), (3, 4)] {
            let total = n.pow(dim as u32);
            let data: Vec<Complex64> = (0..total)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let expect = naive_dft(&data, dim, n);
            let mut got = data.clone();
            transform(&mut got, dim, n, false);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10, "{a} vs {b}");
            }
        }
    }
}
