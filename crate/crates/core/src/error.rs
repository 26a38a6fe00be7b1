use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the PMME library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max |X - X†| = {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "generator is not diagonalizable near eigenvalue {eigenvalue}: \
         {found} independent eigenvectors for multiplicity {multiplicity}"
    )]
    DefectiveGenerator { eigenvalue: Complex64, multiplicity: usize, found: usize },

    #[error("ill-conditioned damping basis (condition estimate {0:.3e})")]
    IllConditionedBasis(f64),

    #[error("kernel transform is singular at s = {0}")]
    KernelPole(Complex64),

    #[error("kernel `{0}` is distributional and has no pointwise time-domain value")]
    DistributionalKernel(String),

    #[error("Laplace quadrature requested at Re s = {re:.6} not right of abscissa {abscissa:.6}")]
    OutsideAbscissa { re: f64, abscissa: f64 },

    #[error("quadrature did not converge (error estimate {0:.3e})")]
    Quadrature(f64),

    #[error("pole of multiplicity {multiplicity} exceeds supported order {max}")]
    RootMultiplicity { multiplicity: usize, max: usize },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("Talbot inversion did not converge at t = {t}: node counts disagree by {diff:.3e} (tol {tol:.1e})")]
    TalbotNonConvergence { t: f64, diff: f64, tol: f64 },

    #[error("Volterra step-halving error estimate {estimate:.3e} exceeds tolerance {tol:.1e}")]
    RefinementFailure { estimate: f64, tol: f64 },

    #[error("dynamical map is not invertible at t = {t}: |xi_{index}| = {magnitude:.3e}")]
    MapSingular { index: usize, t: f64, magnitude: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("pair sampler produced no state pairs")]
    EmptySampler,

    #[error("every sample was masked")]
    AllMasked,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
