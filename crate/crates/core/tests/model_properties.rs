mod common;

use common::*;
use pmme_core::linalg::{self, c};
use pmme_core::liouville::DensityMatrix;
use pmme_core::models::{
    appendix_sigma, appendix_state, f1, f2, sigma_windows, AmplitudeDampingParams, DephasingParams, KernelChoice,
};
use pmme_core::solver::{solve_volterra, SolverConfig, TimeGrid};
use proptest::prelude::*;

#[test]
fn figure_one_coherences_stay_in_unit_interval() {
    let p = DephasingParams::figure_one();
    for k in 0..=50_000 {
        let t = k as f64 * 1e-3;
        assert!(f1(t, &p).abs() <= 1.0 && f2(t, &p).abs() <= 1.0, "t = {t}");
    }
}

#[test]
fn appendix_backflow_never_positive() {
    let n = 100;
    for i in 0..n {
        let gamma0 = 0.05 + 5.0 * i as f64 / n as f64;
        for j in 0..n {
            let mean = 3.0 * j as f64 / n as f64;
            for k in 0..n {
                let rate = 0.05 + 5.0 * k as f64 / n as f64;
                let p = AmplitudeDampingParams::new(gamma0, mean, rate).unwrap();
                for t in [0.0, 0.1, 1.0, 5.0] {
                    assert!(appendix_sigma(&p, 0.9, 0.2, t) <= 0.0);
                }
            }
        }
    }
}

#[test]
fn appendix_closed_form_matches_volterra() {
    let p = AmplitudeDampingParams::new(1.0, 0.5, 2.0).unwrap();
    let mut m = linalg::CMatrix::zeros(2, 2);
    m[(0, 0)] = c(0.3, 0.0);
    m[(1, 1)] = c(0.7, 0.0);
    m[(0, 1)] = c(0.2, -0.3);
    m[(1, 0)] = c(0.2, 0.3);
    let rho0 = DensityMatrix::new(m).unwrap();
    let grid = TimeGrid::new(5.0, 100).unwrap();
    let traj = solve_volterra(&p.kernel(), &p.generator(), &rho0, &grid, &SolverConfig::default()).unwrap();
    for (t, s) in traj.times().iter().zip(traj.states()) {
        let exact = appendix_state(&p, &rho0, *t).unwrap();
        assert!(linalg::max_abs(&(s.matrix() - exact.matrix())) <= 1e-6, "t = {t}");
    }
}

#[test]
fn damped_oscillatory_windows_exist_for_figure_one() {
    let p = DephasingParams::figure_one();
    for choice in [KernelChoice::Exponential, KernelChoice::DampedOscillatory] {
        let windows = sigma_windows(&p, choice, 10.0);
        assert!(!windows.is_empty(), "{choice:?}");
        for (lo, hi) in windows {
            let mid = 0.5 * (lo + hi);
            let (f, df) = p.coherence(choice, mid);
            assert!(f * df > 0.0);
        }
    }
}

proptest! {
    // Expanding B² − 4A with A = Γγ, B = γ + Γ gives (γ − Γ)².
    #[test]
    fn discriminant_is_a_perfect_square(g0 in 0.01f64..10.0, n in 0.0f64..5.0, g in 0.01f64..10.0) {
        let p = AmplitudeDampingParams::new(g0, n, g).unwrap();
        let (a, b) = (p.a_coefficient(), p.b_coefficient());
        let expected = (g - p.relaxation_rate()).powi(2);
        prop_assert!((b * b - 4.0 * a - expected).abs() <= 1e-10 * b * b);
    }

    #[test]
    fn appendix_state_is_physical(g0 in 0.01f64..5.0, n in 0.0f64..3.0, g in 0.01f64..5.0, t in 0.0f64..20.0, seed in any::<u64>()) {
        let p = AmplitudeDampingParams::new(g0, n, g).unwrap();
        let rho0 = random_state(&mut rng(seed), 2);
        let s = appendix_state(&p, &rho0, t).unwrap();
        prop_assert!(s.min_eigenvalue() >= -1e-12);
    }
}
