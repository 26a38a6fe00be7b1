#![allow(dead_code)]

use num_complex::Complex64;
use pmme_core::linalg::{c, CMatrix};
use pmme_core::liouville::{build_gksl_generator, DensityMatrix, Superoperator};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let g = random_matrix(rng, d, d);
    (&g + g.adjoint()).scale(0.5)
}

pub fn random_state<R: Rng>(rng: &mut R, d: usize) -> DensityMatrix {
    let g = random_matrix(rng, d, d);
    let rho = &g * g.adjoint();
    let tr: Complex64 = rho.trace();
    DensityMatrix::new(rho / tr).unwrap()
}

/// A generic GKSL generator: random Hamiltonian plus two random dissipators.
pub fn random_generator<R: Rng>(rng: &mut R, d: usize) -> Superoperator {
    let h = random_hermitian(rng, d);
    let dissipators: Vec<(CMatrix, f64)> =
        (0..2).map(|_| (random_matrix(rng, d, d), rng.gen_range(0.1..1.0))).collect();
    build_gksl_generator(&h, &dissipators).unwrap()
}

/// A random CPTP map from a random isometry split into Kraus operators.
pub fn random_channel<R: Rng>(rng: &mut R, d: usize, kraus: usize) -> Superoperator {
    let g = random_matrix(rng, kraus * d, d);
    let q = g.qr().q();
    let mut total = Superoperator::zero(d);
    for k in 0..kraus {
        let op = q.rows(k * d, d).into_owned();
        total = total.add(&Superoperator::sandwich(&op, &op.adjoint())).unwrap();
    }
    total
}

pub fn plus_state() -> DensityMatrix {
    DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
}

pub fn minus_state() -> DensityMatrix {
    DensityMatrix::pure(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap()
}

pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect()
}
