//! Non-Markovianity witnesses: trace-distance backflow, intermediate maps,
//! Choi-matrix CP checks, the divisibility spectrum and time-local rates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::liouville::{trace_distance, BlochVector, DensityMatrix, Superoperator};
use crate::solver::{Evolver, XiSet};

/// `|ξ|` below which the map is treated as non-invertible.
pub const SINGULAR_TOL: f64 = 1e-9;
/// `σ` above which a grid point counts as backflow.
pub const BACKFLOW_TOL: f64 = 1e-10;
/// Default step for the divisibility spectrum.
pub const DEFAULT_DIVISIBILITY_DT: f64 = 1e-3;
/// Default `|f|` below which time-local rates are masked.
pub const RATE_MASK_TOL: f64 = 1e-2;

/// Check that `grid` is nonempty, finite, nonnegative and strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {}", grid.len())));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidGrid("times must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Maximal runs of grid points where `flag` holds, as `(first, last)` times.
pub fn windows_where(grid: &[f64], flag: impl Fn(usize) -> bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..grid.len() {
        match (flag(i), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((grid[s], grid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((grid[s], grid[grid.len() - 1]));
    }
    out
}

/// `σ(t) = dD(ρ₁(t), ρ₂(t))/dt` sampled on a grid.
#[derive(Debug, Clone)]
pub struct BackflowTrace {
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub distance: Vec<f64>,
    pub pair: (DensityMatrix, DensityMatrix),
    /// Maximal runs of grid points with `σ > BACKFLOW_TOL`.
    pub positive_windows: Vec<(f64, f64)>,
}

impl BackflowTrace {
    /// `∫ max(σ, 0) dt` by the trapezoidal rule, counting only samples
    /// above `BACKFLOW_TOL`.
    pub fn positive_integral(&self) -> f64 {
        let clip = |s: f64| if s > BACKFLOW_TOL { s } else { 0.0 };
        self.times
            .windows(2)
            .zip(self.sigma.windows(2))
            .map(|(t, s)| 0.5 * (t[1] - t[0]) * (clip(s[0]) + clip(s[1])))
            .sum()
    }
}

/// Backflow for one pair of initial states.
///
/// `σ` is the central difference of `D` with step `h` (default
/// `min(grid spacing, 1e-4)`); the first grid point uses a second-order
/// forward difference and the last a second-order backward one.
pub fn sigma_trace<E: Evolver + ?Sized>(
    evolver: &E,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    grid: &[f64],
    h: Option<f64>,
) -> Result<BackflowTrace> {
    check_grid(grid)?;
    let spacing = grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let h = h.unwrap_or(spacing.min(1e-4));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("derivative step must be positive, got {h}")));
    }
    let dist =
        |t: f64| -> Result<f64> { trace_distance(&evolver.evolve_state(rho1, t)?, &evolver.evolve_state(rho2, t)?) };
    let last = grid.len() - 1;
    let rows: Vec<(f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let d = dist(t)?;
            let s = if i == 0 || t < h {
                (-3.0 * d + 4.0 * dist(t + h)? - dist(t + 2.0 * h)?) / (2.0 * h)
            } else if i == last {
                (3.0 * d - 4.0 * dist(t - h)? + dist(t - 2.0 * h)?) / (2.0 * h)
            } else {
                (dist(t + h)? - dist(t - h)?) / (2.0 * h)
            };
            Ok((d, s))
        })
        .collect::<Result<_>>()?;
    let (distance, sigma): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let positive_windows = windows_where(grid, |i| sigma[i] > BACKFLOW_TOL);
    Ok(BackflowTrace { times: grid.to_vec(), sigma, distance, pair: (rho1.clone(), rho2.clone()), positive_windows })
}

/// `count` antipodal Bloch pairs `(v, −v)` with `v` on a Fibonacci sphere.
pub fn fibonacci_pairs(count: usize) -> Vec<(BlochVector, BlochVector)> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            let v = BlochVector::new(r * phi.cos(), r * phi.sin(), z).expect("unit vector");
            (v, v.antipode())
        })
        .collect()
}

/// The antipodal pairs along ±x, ±y, ±z.
pub fn pauli_axis_pairs() -> Vec<(BlochVector, BlochVector)> {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        .iter()
        .map(|v| {
            let b = BlochVector::new(v[0], v[1], v[2]).expect("unit vector");
            (b, b.antipode())
        })
        .collect()
}

/// Deterministic qubit sampler: 64 Fibonacci-sphere antipodal pairs, then
/// the three Pauli-axis pairs.
pub fn default_pair_sampler() -> Vec<(DensityMatrix, DensityMatrix)> {
    fibonacci_pairs(64)
        .into_iter()
        .chain(pauli_axis_pairs())
        .map(|(a, b)| (DensityMatrix::from_bloch(a), DensityMatrix::from_bloch(b)))
        .collect()
}

/// Best backflow found over a set of pairs. This is a lower bound on the
/// supremum over all pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BlpEstimate {
    pub value: f64,
    pub best_pair: usize,
    /// `∫ max(σ, 0)` for each pair, in sampler order.
    pub per_pair: Vec<f64>,
    /// Largest `σ` over all pairs and grid points.
    pub max_sigma: f64,
}

/// `max` over pairs of `∫ max(σ, 0) dt`.
pub fn blp_aggregate<E: Evolver + ?Sized>(
    evolver: &E,
    pairs: &[(DensityMatrix, DensityMatrix)],
    grid: &[f64],
) -> Result<BlpEstimate> {
    if pairs.is_empty() {
        return Err(Error::EmptySampler);
    }
    let traces: Vec<BackflowTrace> =
        pairs.iter().map(|(a, b)| sigma_trace(evolver, a, b, grid, None)).collect::<Result<_>>()?;
    let per_pair: Vec<f64> = traces.iter().map(|t| t.positive_integral()).collect();
    let max_sigma = traces.iter().flat_map(|t| t.sigma.iter().copied()).fold(f64::NEG_INFINITY, f64::max);
    let (best_pair, value) =
        per_pair
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(BlpEstimate { value, best_pair, per_pair, max_sigma })
}

fn ratios(xis: &XiSet, t1: f64, t2: f64) -> Result<Vec<num_complex::Complex64>> {
    let a = xis.eval(t1)?;
    let b = xis.eval(t2)?;
    a.iter()
        .zip(&b)
        .enumerate()
        .map(|(i, (x1, x2))| {
            if x1.norm() < SINGULAR_TOL {
                Err(Error::MapSingular { index: i, t: t1, magnitude: x1.norm() })
            } else {
                Ok(x2 / x1)
            }
        })
        .collect()
}

/// `Φ_{t₂,t₁} = Σᵢ (ξᵢ(t₂)/ξᵢ(t₁)) |Rᵢ⟩⟩⟨⟨Lᵢ†|`, i.e. `Φ_{t₂} Φ_{t₁}⁻¹`.
pub fn intermediate_map(xis: &XiSet, t1: f64, t2: f64) -> Result<Superoperator> {
    if t2 < t1 {
        return Err(Error::InvalidParameter(format!("intermediate map needs t2 ≥ t1, got {t1} → {t2}")));
    }
    Ok(xis.basis().weighted_map(&ratios(xis, t1, t2)?))
}

/// Choi matrix `Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
pub fn choi_matrix(map: &Superoperator) -> CMatrix {
    let d = map.dim();
    let mut choi = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(i, j)] = ONE;
            let image = map.apply(&e).expect("matching dimension");
            choi += linalg::kron(&e, &image);
        }
    }
    choi
}

/// Smallest eigenvalue of the Hermitian part of a Choi matrix.
pub fn choi_min_eigenvalue(choi: &CMatrix) -> f64 {
    linalg::hermitian_eigenvalues(choi)[0]
}

/// CP iff the Choi matrix has no eigenvalue below `−tol`.
pub fn is_cp(choi: &CMatrix, tol: f64) -> bool {
    choi_min_eigenvalue(choi) >= -tol
}

fn spectrum_of(xis: &XiSet, weights: &[num_complex::Complex64]) -> Vec<f64> {
    let basis = xis.basis();
    let n = basis.dim() * basis.dim();
    let mut m = CMatrix::zeros(n, n);
    for ((w, l), r) in weights.iter().zip(basis.left_ops()).zip(basis.right_ops()) {
        if *w != ZERO {
            m += linalg::kron(&l.transpose(), r) * *w;
        }
    }
    linalg::hermitian_eigenvalues(&m)
}

/// Ascending eigenvalues of `Σᵢ (ξᵢ(t + dt)/ξᵢ(t)) Lᵢᵀ ⊗ Rᵢ`, the Choi
/// matrix of the map from `t` to `t + dt`.
pub fn divisibility_spectrum(xis: &XiSet, t: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be nonnegative, got {dt}")));
    }
    Ok(spectrum_of(xis, &ratios(xis, t, t + dt)?))
}

/// Ascending eigenvalues of `Σᵢ (1 + (ξᵢ(t + dt)/ξᵢ(t) − 1)/dt) Lᵢᵀ ⊗ Rᵢ`:
/// the identity Choi matrix plus the generator of the step `t → t + dt` per
/// unit time. For dephasing these approach `{0, 0, γ(t), 2 − γ(t)}`.
pub fn rate_spectrum(xis: &XiSet, t: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let w: Vec<_> = ratios(xis, t, t + dt)?.into_iter().map(|r| ONE + (r - ONE) / dt).collect();
    Ok(spectrum_of(xis, &w))
}

/// Fornberg weights for the first derivative at `x0` from `xs`.
fn derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[j][k]: weight of xs[j] for the k-th derivative, k ≤ 1.
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Time-local rate `γ(t) = −f′(t)/f(t)` from samples of `f` on `grid`.
///
/// `f′` uses five-point finite differences (centered where possible).
/// Samples with `|f| < mask_tol` are masked (`None`).
pub fn extract_time_local_rate(samples: &[f64], grid: &[f64], mask_tol: f64) -> Result<Vec<Option<f64>>> {
    check_grid(grid)?;
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!("{} samples for {} grid points", samples.len(), grid.len())));
    }
    let n = grid.len();
    let width = n.min(5);
    let out: Vec<Option<f64>> = (0..n)
        .map(|i| {
            if samples[i].abs() < mask_tol {
                return None;
            }
            let lo = i.saturating_sub(width / 2).min(n - width);
            let w = derivative_weights(grid[i], &grid[lo..lo + width]);
            let df: f64 = w.iter().zip(&samples[lo..lo + width]).map(|(a, b)| a * b).sum();
            Some(-df / samples[i])
        })
        .collect();
    if out.iter().all(Option::is_none) {
        return Err(Error::AllMasked);
    }
    Ok(out)
}

/// Smallest time-local decay rate `min_i −Re(ξᵢ′/ξᵢ)` over non-stationary
/// indices, by central differences with step `h` (second-order forward
/// differences for `t < h`); `None` where some `|ξᵢ|` is below `mask_tol`.
pub fn min_time_local_rate(xis: &XiSet, t: f64, h: f64, mask_tol: f64) -> Result<Option<f64>> {
    let here = xis.eval(t)?;
    let derivative: Vec<num_complex::Complex64> = if t >= h {
        let (before, after) = (xis.eval(t - h)?, xis.eval(t + h)?);
        before.iter().zip(&after).map(|(b, a)| (a - b) / (2.0 * h)).collect()
    } else {
        let (one, two) = (xis.eval(t + h)?, xis.eval(t + 2.0 * h)?);
        here.iter().zip(one.iter().zip(&two)).map(|(x0, (x1, x2))| (-3.0 * x0 + 4.0 * x1 - x2) / (2.0 * h)).collect()
    };
    let mut best: Option<f64> = None;
    for (i, lambda) in xis.basis().eigenvalues().iter().enumerate() {
        if *lambda == ZERO {
            continue;
        }
        if here[i].norm() < mask_tol {
            return Ok(None);
        }
        let rate = -(derivative[i] / here[i]).re;
        best = Some(best.map_or(rate, |b: f64| b.min(rate)));
    }
    Ok(best)
}

/// CP-divisibility diagnostics on a grid. Entries are `None` where the map
/// is singular at `t`.
#[derive(Debug, Clone)]
pub struct DivisibilityReport {
    pub times: Vec<f64>,
    pub dt: f64,
    /// Divisibility spectrum at each `t`.
    pub spectrum: Vec<Option<Vec<f64>>>,
    /// Smallest Choi eigenvalue of the assembled map `Φ_{t+dt,t}`.
    pub min_choi_eig: Vec<Option<f64>>,
    /// Runs of grid points with a spectrum eigenvalue below `−tolerance`.
    pub violation_windows: Vec<(f64, f64)>,
    pub tolerance: f64,
    /// Smallest time-local rate at each `t`.
    pub gamma_t: Vec<Option<f64>>,
    /// Grid points where the `dt` and `dt/2` spectra disagree in sign.
    pub half_step_disagreements: usize,
}

impl DivisibilityReport {
    pub fn min_spectrum(&self) -> Vec<Option<f64>> {
        self.spectrum.iter().map(|s| s.as_ref().map(|v| v[0])).collect()
    }

    pub fn min_overall(&self) -> Option<f64> {
        self.min_spectrum().into_iter().flatten().reduce(f64::min)
    }
}

/// Sign tolerance for the divisibility spectrum at step `dt`.
pub fn divisibility_tolerance(dt: f64) -> f64 {
    10.0 * dt * 1e-8
}

/// Divisibility spectrum, Choi check and time-local rates over `grid`.
pub fn divisibility_report(xis: &XiSet, grid: &[f64], dt: f64) -> Result<DivisibilityReport> {
    check_grid(grid)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let tol = divisibility_tolerance(dt);
    type Row = (Option<Vec<f64>>, Option<f64>, Option<f64>, bool);
    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&t| -> Result<Row> {
            let spectrum = match divisibility_spectrum(xis, t, dt) {
                Ok(s) => s,
                Err(Error::MapSingular { .. }) => return Ok((None, None, None, false)),
                Err(e) => return Err(e),
            };
            let half = divisibility_spectrum(xis, t, dt / 2.0)?;
            let disagree = (spectrum[0] < -tol) != (half[0] < -divisibility_tolerance(dt / 2.0));
            let choi = choi_min_eigenvalue(&choi_matrix(&intermediate_map(xis, t, t + dt)?));
            let gamma = min_time_local_rate(xis, t, dt, SINGULAR_TOL)?;
            Ok((Some(spectrum), Some(choi), gamma, disagree))
        })
        .collect::<Result<_>>()?;
    let mut spectrum = Vec::with_capacity(rows.len());
    let mut min_choi_eig = Vec::with_capacity(rows.len());
    let mut gamma_t = Vec::with_capacity(rows.len());
    let mut half_step_disagreements = 0;
    for (s, c, g, d) in rows {
        spectrum.push(s);
        min_choi_eig.push(c);
        gamma_t.push(g);
        half_step_disagreements += d as usize;
    }
    let violation_windows = windows_where(grid, |i| spectrum[i].as_ref().is_some_and(|s| s[0] < -tol));
    Ok(DivisibilityReport {
        times: grid.to_vec(),
        dt,
        spectrum,
        min_choi_eig,
        violation_windows,
        tolerance: tol,
        gamma_t,
        half_step_disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MemoryKernel;
    use crate::linalg::{c, pauli_x, pauli_y, pauli_z};
    use crate::models::{dephasing_generator, f1, f1_derivative, DephasingParams};
    use crate::solver::SolverConfig;

    fn dephasing_xis(kernel: &MemoryKernel) -> XiSet {
        XiSet::from_generator(&dephasing_generator(1.0), kernel, &SolverConfig::default()).unwrap()
    }

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
    }

    #[test]
    fn identical_states_have_no_backflow() {
        let xis = dephasing_xis(&DephasingParams::figure_one().exponential_kernel());
        let rho = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let tr = sigma_trace(&xis, &rho, &rho, &grid(2.0, 20), None).unwrap();
        assert!(tr.sigma.iter().all(|s| *s == 0.0));
        assert!(tr.positive_windows.is_empty());
    }

    #[test]
    fn backflow_sign_follows_f_times_derivative() {
        let p = DephasingParams::figure_one();
        let xis = dephasing_xis(&p.exponential_kernel());
        let plus = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let minus = DensityMatrix::pure(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let g = grid(5.0, 100);
        let tr = sigma_trace(&xis, &plus, &minus, &g, None).unwrap();
        for (t, s) in g.iter().zip(&tr.sigma) {
            let prod = f1(*t, &p) * f1_derivative(*t, &p);
            if prod.abs() > 1e-6 {
                assert_eq!(*s > 0.0, prod > 0.0, "t={t}");
            }
        }
        assert!(!tr.positive_windows.is_empty());
    }

    #[test]
    fn fibonacci_sampler_is_antipodal() {
        let pairs = default_pair_sampler();
        assert_eq!(pairs.len(), 67);
        for (a, b) in &pairs {
            let (va, vb) = (a.bloch().unwrap(), b.bloch().unwrap());
            for k in 0..3 {
                assert!((va[k] + vb[k]).abs() < 1e-15);
            }
            assert!((trace_distance(a, b).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn blp_rejects_empty_sampler() {
        let xis = dephasing_xis(&MemoryKernel::delta());
        assert!(matches!(blp_aggregate(&xis, &[], &grid(1.0, 4)), Err(Error::EmptySampler)));
    }

    #[test]
    fn markovian_dephasing_has_zero_blp() {
        let xis = dephasing_xis(&MemoryKernel::delta());
        let est = blp_aggregate(&xis, &default_pair_sampler(), &grid(5.0, 50)).unwrap();
        assert!(est.value.abs() < 1e-10);
    }

    #[test]
    fn intermediate_map_identity_and_mixing_coefficients() {
        let p = DephasingParams::figure_one();
        let xis = dephasing_xis(&p.exponential_kernel());
        let same = intermediate_map(&xis, 0.7, 0.7).unwrap();
        assert!(same.max_abs_diff(&Superoperator::identity(2)) < 1e-12);
        // Φ_{t2,t1}(X) = a₂X + b₂σzXσz.
        let (t1, t2) = (0.4, 0.9);
        let r = f1(t2, &p) / f1(t1, &p);
        let (a2, b2) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
        let expected = Superoperator::sandwich(&linalg::identity(2), &linalg::identity(2))
            .scale(c(a2, 0.0))
            .add(&Superoperator::sandwich(&pauli_z(), &pauli_z()).scale(c(b2, 0.0)))
            .unwrap();
        assert!(intermediate_map(&xis, t1, t2).unwrap().max_abs_diff(&expected) < 1e-12);
        assert!(intermediate_map(&xis, 1.0, 0.5).is_err());
    }

    #[test]
    fn singular_map_is_reported() {
        let p = DephasingParams::figure_one();
        let xis = dephasing_xis(&p.exponential_kernel());
        let root = crate::models::bisect(|t| f1(t, &p), 0.5, 1.0, 1e-15);
        assert!(matches!(intermediate_map(&xis, root, root + 0.1), Err(Error::MapSingular { .. })));
    }

    #[test]
    fn choi_examples() {
        let id = choi_matrix(&Superoperator::identity(2));
        let ev = linalg::hermitian_eigenvalues(&id);
        assert!((ev[3] - 2.0).abs() < 1e-14 && ev[..3].iter().all(|v| v.abs() < 1e-14));
        // Completely depolarizing: X ↦ Tr[X] I/2.
        let dep = Superoperator::sandwich(&linalg::identity(2), &linalg::identity(2))
            .add(&Superoperator::sandwich(&pauli_x(), &pauli_x()))
            .unwrap()
            .add(&Superoperator::sandwich(&pauli_y(), &pauli_y()))
            .unwrap()
            .add(&Superoperator::sandwich(&pauli_z(), &pauli_z()))
            .unwrap()
            .scale(c(0.25, 0.0));
        let ev = linalg::hermitian_eigenvalues(&choi_matrix(&dep));
        assert!(ev.iter().all(|v| (v - 0.5).abs() < 1e-14));
        assert!(is_cp(&choi_matrix(&dep), 1e-12));
    }

    #[test]
    fn expanding_dephasing_step_is_not_cp() {
        let p = DephasingParams::figure_one();
        let xis = dephasing_xis(&p.exponential_kernel());
        // f f′ > 0 just after the first zero of f′.
        let w = crate::models::sigma_windows(&p, crate::models::KernelChoice::Exponential, 5.0)[0];
        let t = 0.5 * (w.0 + w.1);
        assert!(f1(t + 0.01, &p) / f1(t, &p) > 1.0);
        assert!(!is_cp(&choi_matrix(&intermediate_map(&xis, t, t + 0.01).unwrap()), 1e-12));
    }

    #[test]
    fn divisibility_spectrum_at_zero_step_is_identity_choi() {
        let xis = dephasing_xis(&DephasingParams::figure_one().exponential_kernel());
        let s = divisibility_spectrum(&xis, 0.3, 0.0).unwrap();
        assert!(s[..3].iter().all(|v| v.abs() < 1e-12) && (s[3] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn markovian_divisibility_spectrum_is_nonnegative() {
        let xis = dephasing_xis(&MemoryKernel::delta());
        let rep = divisibility_report(&xis, &grid(5.0, 50), 1e-3).unwrap();
        assert!(rep.violation_windows.is_empty());
        assert!(rep.min_overall().unwrap() > -1e-12);
        for s in rate_spectrum(&xis, 1.0, 1e-4).unwrap().iter().zip([0.0, 0.0, 1.0, 1.0]) {
            assert!((s.0 - s.1).abs() < 1e-3);
        }
    }

    #[test]
    fn exponential_rate_is_constant() {
        let g = grid(3.0, 300);
        let f: Vec<f64> = g.iter().map(|t| (-t).exp()).collect();
        let rates = extract_time_local_rate(&f, &g, RATE_MASK_TOL).unwrap();
        for r in rates {
            assert!((r.unwrap() - 1.0).abs() < 1e-8);
        }
        assert!(matches!(extract_time_local_rate(&[0.0, 0.0], &[0.0, 1.0], 1e-3), Err(Error::AllMasked)));
    }

    #[test]
    fn rates_are_masked_near_zeros() {
        let p = DephasingParams::figure_one();
        let g = grid(5.0, 500);
        let f: Vec<f64> = g.iter().map(|t| f1(*t, &p)).collect();
        let rates = extract_time_local_rate(&f, &g, RATE_MASK_TOL).unwrap();
        for (i, r) in rates.iter().enumerate() {
            assert_eq!(r.is_none(), f[i].abs() < RATE_MASK_TOL);
            if let Some(v) = r {
                let exact = -f1_derivative(g[i], &p) / f[i];
                assert!((v - exact).abs() < 1e-3 * (1.0 + exact.abs()), "t={}", g[i]);
            }
        }
    }
}
