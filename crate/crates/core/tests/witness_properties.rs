mod common;

use common::*;
use pmme_core::kernels::MemoryKernel;
use pmme_core::models::{f1, f1_derivative, sigma_closed_form, DephasingParams};
use pmme_core::solver::{assemble_map, SolverConfig, XiSet};
use pmme_core::witnesses::{
    blp_aggregate, choi_matrix, choi_min_eigenvalue, default_pair_sampler, divisibility_report, divisibility_spectrum,
    divisibility_tolerance, intermediate_map, rate_spectrum, sigma_trace,
};
use rand::Rng;

fn figure_one_xis() -> (DephasingParams, XiSet) {
    let p = DephasingParams::figure_one();
    let xis = XiSet::from_generator(&p.generator(), &p.exponential_kernel(), &SolverConfig::default()).unwrap();
    (p, xis)
}

#[test]
fn intermediate_maps_compose() {
    let mut r = rng(31);
    let k = MemoryKernel::exponential(2.0, 1.0).unwrap();
    for _ in 0..3 {
        let xis = XiSet::from_generator(&random_generator(&mut r, 2), &k, &SolverConfig::default()).unwrap();
        for _ in 0..20 {
            let mut ts = [r.gen_range(0.0..3.0), r.gen_range(0.0..3.0), r.gen_range(0.0..3.0)];
            ts.sort_by(f64::total_cmp);
            let [t1, t2, t3] = ts;
            let Ok(first) = intermediate_map(&xis, t1, t2) else { continue };
            let Ok(second) = intermediate_map(&xis, t2, t3) else { continue };
            let whole = intermediate_map(&xis, t1, t3).unwrap();
            assert!(second.compose(&first).unwrap().max_abs_diff(&whole) <= 1e-9);
            let lifted = whole.compose(&assemble_map(&xis, t1).unwrap()).unwrap();
            assert!(lifted.max_abs_diff(&assemble_map(&xis, t3).unwrap()) <= 1e-9);
        }
    }
}

#[test]
fn choi_and_spectrum_agree_in_sign() {
    let (p, xis) = figure_one_xis();
    let mut r = rng(37);
    for _ in 0..200 {
        let t = r.gen_range(0.0..10.0);
        let dt = r.gen_range(1e-4..1e-2);
        if f1(t, &p).abs() < 1e-3 {
            continue;
        }
        let tol = divisibility_tolerance(dt);
        let spec = divisibility_spectrum(&xis, t, dt).unwrap()[0];
        let choi = choi_min_eigenvalue(&choi_matrix(&intermediate_map(&xis, t, t + dt).unwrap()));
        assert!((spec - choi).abs() <= 1e-10, "t = {t}, dt = {dt}");
        assert_eq!(spec < -tol, choi < -tol);
    }
}

#[test]
fn backflow_matches_divisibility_and_rates() {
    // σ > 0 ⇒ the rate is negative ⇒ the step map is not CP.
    let (p, xis) = figure_one_xis();
    let grid = uniform_grid(10.0, 400);
    let dt = 1e-3;
    let report = divisibility_report(&xis, &grid, dt).unwrap();
    let trace = sigma_trace(&xis, &plus_state(), &minus_state(), &grid, None).unwrap();
    for (i, &t) in grid.iter().enumerate() {
        let rate = -f1_derivative(t, &p) / f1(t, &p);
        if trace.sigma[i] > 1e-6 {
            assert!(rate < 0.0, "t = {t}");
            assert!(report.min_spectrum()[i].unwrap() < -report.tolerance, "t = {t}");
        }
        if let Some(g) = report.gamma_t[i] {
            if f1(t, &p).abs() > 1e-2 {
                assert!((g - rate).abs() <= 1e-4 * rate.abs().max(1.0), "t = {t}: {g} vs {rate}");
            }
        }
    }
    assert!(!trace.positive_windows.is_empty());
    assert!(!report.violation_windows.is_empty());
}

#[test]
fn rate_spectrum_tracks_time_local_rate() {
    let (p, xis) = figure_one_xis();
    let dt = 1e-3;
    for k in 0..100 {
        let t = 0.05 + k as f64 * 0.1;
        if f1(t, &p).abs() < 0.05 {
            continue;
        }
        let g = -f1_derivative(t, &p) / f1(t, &p);
        let mut expected = [0.0, 0.0, g, 2.0 - g];
        expected.sort_by(f64::total_cmp);
        let got = rate_spectrum(&xis, t, dt).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() <= 10.0 * dt * g.abs().max(1.0), "t = {t}: {got:?} vs {expected:?}");
        }
    }
}

#[test]
fn sigma_trace_matches_closed_form() {
    let (p, xis) = figure_one_xis();
    let grid = uniform_grid(10.0, 500);
    let pairs = default_pair_sampler();
    for (rho1, rho2) in pairs.iter().step_by(7) {
        let trace = sigma_trace(&xis, rho1, rho2, &grid, None).unwrap();
        let (b1, b2) = (rho1.bloch().unwrap(), rho2.bloch().unwrap());
        let delta = [b1[0] - b2[0], b1[1] - b2[1], b1[2] - b2[2]];
        for (i, &t) in grid.iter().enumerate() {
            if let Some(s) = sigma_closed_form(delta, f1(t, &p), f1_derivative(t, &p)) {
                assert!((trace.sigma[i] - s).abs() <= 1e-6, "t = {t}: {} vs {s}", trace.sigma[i]);
            }
        }
    }
}

#[test]
fn markovian_limit_has_no_backflow() {
    let p = DephasingParams::figure_one();
    let xis = XiSet::from_generator(&p.generator(), &MemoryKernel::delta(), &SolverConfig::default()).unwrap();
    let grid = uniform_grid(5.0, 200);
    let blp = blp_aggregate(&xis, &default_pair_sampler(), &grid).unwrap();
    assert_eq!(blp.value, 0.0);
    let report = divisibility_report(&xis, &grid, 1e-3).unwrap();
    assert!(report.violation_windows.is_empty());
    assert!(report.min_overall().unwrap() >= -report.tolerance);
}
