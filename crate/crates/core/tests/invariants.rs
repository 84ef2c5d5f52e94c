use bmtk::commutator::{commutator_blocks, commutator_field};
use bmtk::corpus::{self, BandSpec};
use bmtk::flow::{direct_run, FlowState};
use bmtk::lp::{decompose, reconstruct};
use bmtk::norms::{besov_morrey_norm, morrey_norm, BMParams, MorreyParams, WindowSet};
use bmtk::paraproduct::bony_split;
use bmtk::spectral::{leray_project, max_divergence};
use bmtk::{Grid, RealField};
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    Grid::square(n).unwrap()
}

fn band(kmax: i64) -> BandSpec {
    BandSpec {
        kmax,
        slope: 1.0,
        rms: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn blocks_sum_to_the_field(seed in 0u64..1000, homogeneous in any::<bool>()) {
        let g = grid(32);
        let f = corpus::random_scalar(&g, seed, 0, &band(10)).unwrap();
        let err = reconstruct(&decompose(&f, homogeneous)).sub(&f).unwrap().sup_norm();
        prop_assert!(err < 1e-12 * f.sup_norm().max(1.0));
    }

    #[test]
    fn morrey_norm_is_homogeneous_and_shift_invariant(
        seed in 0u64..1000,
        c in -5.0f64..5.0,
        dx in -8isize..8,
        dy in -8isize..8,
    ) {
        let g = grid(16);
        let ws = WindowSet::full(&g);
        let mp = MorreyParams::new(4.0, 2.0).unwrap();
        let f = corpus::random_scalar(&g, seed, 0, &band(5)).unwrap();
        let base = morrey_norm(&f, &mp, &ws);
        prop_assert!((morrey_norm(&f.scale(c), &mp, &ws) - c.abs() * base).abs() <= 1e-12 * base.max(1e-300));
        prop_assert!((morrey_norm(&f.shifted(&[dx, dy]), &mp, &ws) - base).abs() <= 1e-12 * base);
    }

    #[test]
    fn besov_morrey_triangle_inequality(seed in 0u64..1000) {
        let g = grid(32);
        let ws = WindowSet::full(&g);
        let bp = BMParams::new(1.5, 4.0, 2.0, 2.0, false).unwrap();
        let f = corpus::random_scalar(&g, seed, 0, &band(8)).unwrap();
        let h = corpus::random_scalar(&g, seed, 1, &band(8)).unwrap();
        let lhs = besov_morrey_norm(&f.add(&h).unwrap(), &bp, &ws);
        let rhs = besov_morrey_norm(&f, &bp, &ws) + besov_morrey_norm(&h, &bp, &ws);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn bony_parts_are_symmetric(seed in 0u64..1000) {
        let g = grid(32);
        let f = corpus::random_scalar(&g, seed, 0, &band(7)).unwrap();
        let h = corpus::random_scalar(&g, seed, 1, &band(7)).unwrap();
        let a = bony_split(&f, &h).unwrap();
        let b = bony_split(&h, &f).unwrap();
        prop_assert!(a.t_fg.sub(&b.t_gf).unwrap().sup_norm() < 1e-12);
        prop_assert!(a.remainder.sub(&b.remainder).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent(seed in 0u64..1000) {
        let g = grid(32);
        let comps: Vec<RealField> = (0..2)
            .map(|s| corpus::random_scalar(&g, seed, s, &band(10)).unwrap())
            .collect();
        let v = bmtk::VectorField::new(comps).unwrap();
        let p = leray_project(&v);
        prop_assert!(max_divergence(&p) < 1e-12);
        prop_assert!(leray_project(&p).sub(&p).unwrap().sup_norm() < 1e-13);
    }
}

#[test]
fn batched_and_reference_commutators_agree() {
    let g = grid(32);
    let v = corpus::random_solenoidal(&g, 4, 2, &band(6)).unwrap();
    let theta = corpus::random_scalar(&g, 4, 3, &band(6)).unwrap();
    for homogeneous in [false, true] {
        for (j, block) in commutator_blocks(&v, &theta, homogeneous).unwrap() {
            let reference = commutator_field(&v, &theta, j, homogeneous).unwrap();
            assert!(block.sub(&reference).unwrap().sup_norm() < 1e-12, "block {j}");
        }
    }
}

#[test]
fn euler_run_is_reversible() {
    let g = grid(32);
    let v0 = corpus::random_solenoidal(&g, 2, 0, &band(4)).unwrap().scale(0.5);
    let forward = direct_run(&FlowState::new(0.0, v0.clone(), None).unwrap(), 0.2, 1e-3).unwrap();
    let reversed = forward.v.last().scale(-1.0);
    let back = direct_run(&FlowState::new(0.0, reversed, None).unwrap(), 0.2, 1e-3).unwrap();
    let err = back.v.last().scale(-1.0).sub(&v0).unwrap().l2_norm() / v0.l2_norm();
    assert!(err < 1e-8, "{err}");
}
