use super::*;
use crate::corpus::{self, BandSpec};
use crate::norms::{morrey_norm, MorreyParams, WindowSet};
use crate::spectral::{self, to_spectral};

fn grid(n: usize) -> Grid {
    Grid::square(n).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn random(g: &Grid, stream: u64, kmax: i64) -> RealField {
    let band = BandSpec {
        kmax,
        slope: 0.5,
        rms: 1.0,
    };
    corpus::random_scalar(g, 5, stream, &band).unwrap()
}

fn mode(g: &Grid, k: &[i64]) -> RealField {
    corpus::single_mode(g, k, 1.0)
}

#[test]
fn cutoff_values() {
    assert_eq!(cutoff_chi(0.0).unwrap(), 1.0);
    assert_eq!(cutoff_chi(0.5).unwrap(), 1.0);
    assert_eq!(cutoff_chi(1.0).unwrap(), 1.0);
    assert_eq!(cutoff_chi(2.0).unwrap(), 0.0);
    assert_eq!(cutoff_chi(3.0).unwrap(), 0.0);
    assert_eq!(cutoff_chi(1.5).unwrap(), 0.5);
    let golden = 1.0 / (1.0 + (-8.0f64 / 3.0).exp());
    assert!((cutoff_chi(1.25).unwrap() - golden).abs() < 1e-15);
    assert!(cutoff_chi(-0.1).is_err());
    assert!(cutoff_chi(f64::NAN).is_err());
}

#[test]
fn cutoff_is_monotone_and_symmetric() {
    let mut prev = 1.0;
    for i in 0..=400 {
        let t = 1.0 + i as f64 / 400.0;
        let c = chi(t);
        assert!(c <= prev && (0.0..=1.0).contains(&c));
        assert!((c + chi(3.0 - t) - 1.0).abs() < 1e-14);
        prev = c;
    }
}

#[test]
fn block_plateau_and_support() {
    let g = grid(128);
    for j in 0..=4 {
        let k = 1i64 << j;
        let f = mode(&g, &[k, 0]);
        let b = dyadic_block(&f, j, true);
        assert!(max_abs_diff(b.samples(), f.samples()) < 1e-12, "j = {j}");
        let far = mode(&g, &[k << 3, 0]);
        assert!(dyadic_block(&far, j, true).sup_norm() < 1e-14);
    }
}

#[test]
fn inhomogeneous_low_block() {
    let g = grid(32);
    let f = RealField::constant(g, 1.5).add(&mode(&g, &[1, 0])).unwrap();
    let low = dyadic_block(&f, -1, false);
    assert!(max_abs_diff(low.samples(), f.samples()) < 1e-12);
    assert!(dyadic_block(&f, 0, false).sup_norm() == 0.0);
    assert!(dyadic_block(&f, -2, false).sup_norm() == 0.0);
}

#[test]
fn reconstruction_is_exact() {
    for dim in [2, 3] {
        let g = Grid::new(dim, 32, 2.0).unwrap();
        let f = random(&g, 1, 10).add(&RealField::constant(g, 0.3)).unwrap();
        for homogeneous in [true, false] {
            let d = decompose(&f, homogeneous);
            let back = reconstruct(&d);
            let err = max_abs_diff(back.samples(), f.samples());
            assert!(err <= 1e-12 * f.sup_norm(), "{err}");
        }
    }
}

#[test]
fn zero_field_decomposes_to_zero() {
    let g = grid(16);
    let d = decompose(&RealField::zeros(g), true);
    assert_eq!(d.mean, 0.0);
    assert!(d.blocks.iter().all(|b| b.sup_norm() == 0.0));
}

#[test]
fn homogeneous_blocks_have_zero_mean() {
    let g = grid(32);
    let f = random(&g, 2, 10).add(&RealField::constant(g, 4.0)).unwrap();
    let d = decompose(&f, true);
    assert!((d.mean - 4.0).abs() < 1e-12);
    for b in &d.blocks {
        assert!(b.mean().abs() < 1e-14);
    }
}

#[test]
fn almost_orthogonality() {
    let g = grid(64);
    let f = random(&g, 3, 21);
    let top = top_block(&g);
    for i in 0..=top {
        for j in 0..=top {
            if (i - j).abs() >= 2 {
                let bij = dyadic_block(&dyadic_block(&f, j, true), i, true);
                assert!(bij.sup_norm() < 1e-12, "({i}, {j})");
            }
        }
    }
}

#[test]
fn nonzero_block_range_is_exhaustive() {
    for n in [8usize, 16, 32, 64] {
        let g = grid(n);
        let radii = g.lattice_radii();
        let top = top_block(&g);
        for j in -6..=top + 4 {
            let any = radii.iter().any(|&r| block_multiplier(j, r, true) != 0.0)
                || radii.iter().any(|&r| block_multiplier(j, r, false) != 0.0);
            let inside = (-1..=top).contains(&j);
            assert!(!any || inside, "block {j} nonzero outside range on N = {n}");
        }
        // The top block does reach the corner of the lattice.
        assert!(radii.iter().any(|&r| block_multiplier(top, r, true) > 0.0));
    }
}

#[test]
fn low_pass_examples() {
    let g = grid(64);
    let c = RealField::constant(g, 2.0);
    for j in -1..=6 {
        assert!(max_abs_diff(low_pass(&c, j).samples(), c.samples()) < 1e-14);
    }
    let m = mode(&g, &[16, 0]);
    assert!(low_pass(&m, 2).sup_norm() < 1e-14);
    assert!(max_abs_diff(low_pass(&m, 4).samples(), m.samples()) < 1e-12);
    let f = random(&g, 4, 21);
    let top = top_block(&g);
    assert!(max_abs_diff(low_pass(&f, top).samples(), f.samples()) < 1e-12);
    assert!(max_abs_diff(low_pass(&f, top + 1).samples(), f.samples()) < 1e-12);
    let d2 = max_abs_diff(low_pass(&f, 2).samples(), f.samples());
    let d4 = max_abs_diff(low_pass(&f, 4).samples(), f.samples());
    assert!(d4 < d2);
}

#[test]
fn separated_modes_land_in_disjoint_blocks() {
    let g = grid(256);
    let f = mode(&g, &[2, 0]).add(&mode(&g, &[0, 64])).unwrap();
    let d = decompose(&f, true);
    let active: Vec<i32> = d
        .blocks_with_index()
        .filter(|(_, b)| b.sup_norm() > 1e-12)
        .map(|(j, _)| j)
        .collect();
    assert_eq!(active, vec![1, 6]);
    let hat_low = to_spectral(d.block(1).unwrap());
    let hat_high = to_spectral(d.block(6).unwrap());
    for (a, b) in hat_low.coefficients().iter().zip(hat_high.coefficients()) {
        assert!(a.norm() < 1e-14 || b.norm() < 1e-14);
    }
}

#[test]
fn decomposition_file_round_trip() {
    let g = grid(16);
    let f = random(&g, 5, 5);
    let d = decompose(&f, false);
    let dir = tempfile::tempdir().unwrap();
    write_decomposition(dir.path(), &d).unwrap();
    let back = read_decomposition(dir.path()).unwrap();
    assert_eq!(back, d);
    assert!(dir.path().join("block_-01.json").exists());
    assert!(dir.path().join("block_+04.bin").exists());
}

#[test]
fn bernstein_constant_is_stable() {
    let mp = MorreyParams::new(4.0, 2.0).unwrap();
    let band = BandSpec {
        kmax: 20,
        slope: 0.5,
        rms: 1.0,
    };
    let mut ranges = Vec::new();
    for n in [64usize, 128] {
        let g = grid(n);
        let ws = WindowSet::full(&g);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for t in 0..3 {
            let f = corpus::random_scalar(&g, 9, t, &band).unwrap();
            let d = decompose(&f, true);
            for (j, b) in d.blocks_with_index() {
                let base = morrey_norm(b, &mp, &ws);
                if base < 1e-10 {
                    continue;
                }
                let grad = spectral::gradient(b);
                let top = crate::norms::morrey_norm_vector(&grad, &mp, &ws);
                let r = top / (2f64.powi(j) * base);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        ranges.push((lo, hi));
    }
    let (a, b) = (ranges[0], ranges[1]);
    assert!(a.0 > 0.2 && a.1 < 5.0, "{a:?}");
    assert!((a.1 / b.1 - 1.0).abs() < 0.3 && (a.0 / b.0 - 1.0).abs() < 0.3, "{a:?} vs {b:?}");
}
