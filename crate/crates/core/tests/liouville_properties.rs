mod common;

use common::*;
use pmme_core::linalg::{self, c, CMatrix};
use pmme_core::liouville::{damping_basis, trace_distance, DensityMatrix};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn damping_basis_is_biorthonormal(seed in any::<u64>(), d in 2usize..4) {
        let mut r = rng(seed);
        let generator = random_generator(&mut r, d);
        let basis = damping_basis(&generator).unwrap();
        prop_assert!(basis.biorthonormality_residual() <= 1e-12);
        for ((lambda, right), left) in basis.eigenvalues().iter().zip(basis.right_ops()).zip(basis.left_ops()) {
            prop_assert!(lambda.re <= 1e-12);
            let image = generator.apply(right).unwrap();
            prop_assert!(linalg::max_abs(&(image - right * *lambda)) <= 1e-10);
            // Left action: Tr[L 𝓛(X)] = λ Tr[L X] for matrix units X.
            for i in 0..d {
                for j in 0..d {
                    let mut e = CMatrix::zeros(d, d);
                    e[(i, j)] = c(1.0, 0.0);
                    let lhs = (left * generator.apply(&e).unwrap()).trace();
                    let rhs = (left * &e).trace() * *lambda;
                    prop_assert!((lhs - rhs).norm() <= 1e-10);
                }
            }
        }
        let rebuilt = basis.generator();
        prop_assert!(rebuilt.max_abs_diff(&generator) <= 1e-10);
    }

    #[test]
    fn generator_annihilates_trace(seed in any::<u64>(), d in 2usize..5) {
        let mut r = rng(seed);
        let generator = random_generator(&mut r, d);
        let x = random_matrix(&mut r, d, d);
        let image = generator.apply(&x).unwrap();
        prop_assert!(image.trace().norm() <= 1e-12 * x.norm().max(1.0));
        let h = random_hermitian(&mut r, d);
        prop_assert!(linalg::hermiticity_defect(&generator.apply(&h).unwrap()) <= 1e-12);
    }
}

#[test]
fn damping_basis_reconstructs_hermitian_operators() {
    let mut r = rng(7);
    for trial in 0..100 {
        let d = 2 + trial % 2;
        let basis = damping_basis(&random_generator(&mut r, d)).unwrap();
        let x = random_hermitian(&mut r, d);
        let alpha = basis.coefficients(&x);
        let mut rebuilt = CMatrix::zeros(d, d);
        for (a, right) in alpha.iter().zip(basis.right_ops()) {
            rebuilt += right * *a;
        }
        assert!(linalg::max_abs(&(rebuilt - &x)) <= 1e-10, "trial {trial}");
    }
}

#[test]
fn trace_distance_contracts_under_channels() {
    let mut r = rng(11);
    for trial in 0..100 {
        let channel = random_channel(&mut r, 2, 1 + trial % 4);
        let (a, b) = (random_state(&mut r, 2), random_state(&mut r, 2));
        let before = trace_distance(&a, &b).unwrap();
        let image = |s: &DensityMatrix| DensityMatrix::with_psd_tolerance(channel.apply(s.matrix()).unwrap(), 1e-10);
        let after = trace_distance(&image(&a).unwrap(), &image(&b).unwrap()).unwrap();
        assert!(after <= before + 1e-12, "trial {trial}: {after} > {before}");
    }
}
