//! PMME solvers.
//!
//! The spectral path expands the dynamical map in the damping basis of `𝓛`:
//! `Φ_t(X) = Σᵢ ξᵢ(t) Tr[Lᵢ X] Rᵢ`, where `ξᵢ` is the inverse Laplace
//! transform of `1/(s − λᵢ k̃(s − λᵢ))`. The Volterra path integrates the
//! integro-differential equation directly on a uniform grid and serves as an
//! independent oracle.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::MemoryKernel;
use crate::laplace::{talbot_invert, PartialFractions, TalbotConfig};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::liouville::{damping_basis, devectorize, vectorize, DampingBasis, DensityMatrix, Superoperator, PSD_TOL};
use crate::poly::Poly;

/// Lower bound on state eigenvalues accepted on the Volterra path.
pub const VOLTERRA_PSD_TOL: f64 = 1e-8;
/// Trace tolerance for solver trajectories.
pub const TRAJECTORY_TRACE_TOL: f64 = 1e-10;

/// How `ξ(t)` is recovered from its transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InversionMethod {
    /// Partial fractions for rational kernels, Talbot otherwise.
    #[default]
    Auto,
    PartialFractions,
    Talbot,
}

/// Time stepping for [`solve_volterra`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolterraOrder {
    /// Trapezoidal rule in both the memory integral and the time step.
    Trapezoidal,
    /// Richardson extrapolation of the step `h` and `h/2` trapezoidal runs.
    #[default]
    Extrapolated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub inversion: InversionMethod,
    pub talbot: TalbotConfig,
    /// Coarse Volterra step; the fine pass uses half of it.
    pub volterra_step: f64,
    pub volterra_order: VolterraOrder,
    /// Bound on the step-halving error estimate.
    pub volterra_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            inversion: InversionMethod::Auto,
            talbot: TalbotConfig::default(),
            volterra_step: 1e-3,
            volterra_order: VolterraOrder::Extrapolated,
            volterra_tol: 1e-5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("volterra_step", self.volterra_step)?;
        positive("volterra_tol", self.volterra_tol)?;
        positive("talbot.scale", self.talbot.scale)?;
        positive("talbot.aspect", self.talbot.aspect)?;
        positive("talbot.tol", self.talbot.tol)?;
        if self.talbot.nodes < 8 {
            return Err(Error::InvalidParameter(format!("talbot.nodes must be at least 8, got {}", self.talbot.nodes)));
        }
        if !self.talbot.shift.is_finite() {
            return Err(Error::InvalidParameter("talbot.shift must be finite".into()));
        }
        Ok(())
    }
}

/// Which inversion produced a `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiMethod {
    PartialFractions,
    NumericalInversion,
}

/// A single scalar solution `ξ(t)` for one eigenvalue.
#[derive(Debug, Clone)]
pub enum XiFn {
    /// `λ = 0`: `ξ ≡ 1`.
    Unity,
    PartialFractions(PartialFractions),
    Talbot {
        kernel: MemoryKernel,
        lambda: Complex64,
        contour: TalbotConfig,
    },
}

impl XiFn {
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("negative time {t}")));
        }
        match self {
            XiFn::Unity => Ok(ONE),
            XiFn::PartialFractions(pf) => Ok(if t == 0.0 { ONE } else { pf.eval(t) }),
            XiFn::Talbot { kernel, lambda, contour } => {
                if t == 0.0 {
                    return Ok(ONE);
                }
                let lambda = *lambda;
                talbot_invert(|s| Ok(1.0 / (s - lambda * kernel.laplace(s - lambda)?)), t, contour)
            }
        }
    }

    pub fn method(&self) -> XiMethod {
        match self {
            XiFn::Unity | XiFn::PartialFractions(_) => XiMethod::PartialFractions,
            XiFn::Talbot { .. } => XiMethod::NumericalInversion,
        }
    }

    pub fn poles(&self) -> Option<Vec<Complex64>> {
        match self {
            XiFn::Unity => Some(Vec::new()),
            XiFn::PartialFractions(pf) => Some(pf.poles()),
            XiFn::Talbot { .. } => None,
        }
    }
}

/// `ξ(t) = Lap⁻¹[1/(s − λ k̃(s − λ))]`.
///
/// For a rational `k̃ = N/D` the transform is `P/Q` with `P(s) = D(s − λ)`
/// and `Q(s) = s P(s) − λ N(s − λ)`, expanded in partial fractions.
pub fn xi_spectral(kernel: &MemoryKernel, lambda: Complex64, cfg: &SolverConfig) -> Result<XiFn> {
    if lambda == ZERO {
        return Ok(XiFn::Unity);
    }
    let rational =
        match cfg.inversion {
            InversionMethod::Talbot => None,
            InversionMethod::Auto => kernel.rational_form(),
            InversionMethod::PartialFractions => Some(kernel.rational_form().ok_or_else(|| {
                Error::InvalidParameter(format!("kernel `{}` has no rational transform", kernel.name()))
            })?),
        };
    match rational {
        Some(form) => {
            let p = form.denominator.taylor_shift(-lambda);
            let n = form.numerator.taylor_shift(-lambda);
            let q = Poly::new(vec![ZERO, ONE]).mul(&p).add(&n.scale(-lambda));
            Ok(XiFn::PartialFractions(PartialFractions::from_rational(&p, &q)?))
        }
        None => Ok(XiFn::Talbot { kernel: kernel.clone(), lambda, contour: cfg.talbot }),
    }
}

/// The per-eigenvalue functions `ξᵢ` of a PMME map, tied to their damping
/// basis. Degenerate eigenvalues share one function and conjugate
/// eigenvalues use the conjugate function, so maps stay Hermiticity
/// preserving.
#[derive(Debug, Clone)]
pub struct XiSet {
    basis: Arc<DampingBasis>,
    fns: Vec<XiFn>,
    /// Per basis index: (function index, conjugate?).
    slots: Vec<(usize, bool)>,
}

impl XiSet {
    pub fn new(basis: Arc<DampingBasis>, kernel: &MemoryKernel, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let scale = basis.eigenvalues().iter().fold(1.0f64, |m, l| m.max(l.norm()));
        let tol = crate::liouville::DEGENERACY_TOL * scale;
        let mut fns: Vec<XiFn> = Vec::new();
        let mut reps: Vec<Complex64> = Vec::new();
        let mut slots = Vec::with_capacity(basis.len());
        for &lambda in basis.eigenvalues() {
            if let Some(k) = reps.iter().position(|r| (*r - lambda).norm() <= tol) {
                slots.push((k, false));
            } else if let Some(k) = reps.iter().position(|r| r.im != 0.0 && (r.conj() - lambda).norm() <= tol) {
                slots.push((k, true));
            } else {
                reps.push(lambda);
                fns.push(xi_spectral(kernel, lambda, cfg)?);
                slots.push((fns.len() - 1, false));
            }
        }
        Ok(Self { basis, fns, slots })
    }

    /// Build the damping basis of `generator` and the matching ξ set.
    pub fn from_generator(generator: &Superoperator, kernel: &MemoryKernel, cfg: &SolverConfig) -> Result<Self> {
        Self::new(Arc::new(damping_basis(generator)?), kernel, cfg)
    }

    pub fn basis(&self) -> &DampingBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn eval_index(&self, i: usize, t: f64) -> Result<Complex64> {
        let (k, conj) = self.slots[i];
        let v = self.fns[k].eval(t)?;
        Ok(if conj { v.conj() } else { v })
    }

    /// All `ξᵢ(t)`, evaluating each distinct function once.
    pub fn eval(&self, t: f64) -> Result<Vec<Complex64>> {
        let values: Vec<Complex64> = self.fns.iter().map(|f| f.eval(t)).collect::<Result<_>>()?;
        Ok(self.slots.iter().map(|&(k, conj)| if conj { values[k].conj() } else { values[k] }).collect())
    }

    /// Partial fractions if every ξ was inverted exactly.
    pub fn method(&self) -> XiMethod {
        if self.fns.iter().all(|f| f.method() == XiMethod::PartialFractions) {
            XiMethod::PartialFractions
        } else {
            XiMethod::NumericalInversion
        }
    }

    /// Poles of `ξᵢ`'s transform (partial-fractions path only).
    pub fn poles(&self, i: usize) -> Option<Vec<Complex64>> {
        let (k, conj) = self.slots[i];
        self.fns[k].poles().map(|p| if conj { p.iter().map(|z| z.conj()).collect() } else { p })
    }

    /// Largest real part over all poles, if known.
    pub fn max_pole_real_part(&self) -> Option<f64> {
        let mut worst = f64::NEG_INFINITY;
        for f in &self.fns {
            for p in f.poles()? {
                worst = worst.max(p.re);
            }
        }
        Some(worst)
    }
}

/// `Φ_t = Σᵢ ξᵢ(t) |Rᵢ⟩⟩⟨⟨Lᵢ†|`.
pub fn assemble_map(xis: &XiSet, t: f64) -> Result<Superoperator> {
    Ok(xis.basis().weighted_map(&xis.eval(t)?))
}

/// Result of [`evolve`]: the state plus the most negative eigenvalue when it
/// falls below the state tolerance, which signals a non-CP map.
#[derive(Debug, Clone)]
pub struct Evolved {
    pub state: DensityMatrix,
    pub cp_violation: Option<f64>,
}

/// `ρ(t) = Σᵢ ξᵢ(t) Tr[Lᵢ ρ₀] Rᵢ`.
pub fn evolve(xis: &XiSet, rho0: &DensityMatrix, t: f64) -> Result<Evolved> {
    let basis = xis.basis();
    if rho0.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(format!("state dim {} vs basis dim {}", rho0.dim(), basis.dim())));
    }
    let xi = xis.eval(t)?;
    let alpha = basis.coefficients(rho0.matrix());
    let d = basis.dim();
    let mut rho = CMatrix::zeros(d, d);
    for ((x, a), r) in xi.iter().zip(&alpha).zip(basis.right_ops()) {
        rho += r * (x * a);
    }
    let state = DensityMatrix::unchecked(rho)?;
    let min = state.min_eigenvalue();
    Ok(Evolved { state, cp_violation: (min < -PSD_TOL).then_some(min) })
}

/// Smallest eigenvalue of `Σₖ ξₖ(t) Lₖᵀ ⊗ Rₖ`; the map is CP at `t` iff it
/// is nonnegative.
pub fn cp_min_eigenvalue(xis: &XiSet, t: f64) -> Result<f64> {
    let basis = xis.basis();
    let xi = xis.eval(t)?;
    let n = basis.dim() * basis.dim();
    let mut m = CMatrix::zeros(n, n);
    for ((x, l), r) in xi.iter().zip(basis.left_ops()).zip(basis.right_ops()) {
        m += linalg::kron(&l.transpose(), r) * *x;
    }
    Ok(linalg::hermitian_eigenvalues(&m)[0])
}

/// A family of dynamical maps `t ↦ Φ_t`, used by the witnesses.
pub trait Evolver: Sync {
    fn dim(&self) -> usize;
    fn evolve_state(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix>;
}

impl Evolver for XiSet {
    fn dim(&self) -> usize {
        self.basis().dim()
    }

    fn evolve_state(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        Ok(evolve(self, rho0, t)?.state)
    }
}

/// Adapter turning a closure into an [`Evolver`].
pub struct FnEvolver<F> {
    dim: usize,
    f: F,
}

impl<F> FnEvolver<F>
where
    F: Fn(&DensityMatrix, f64) -> Result<DensityMatrix> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Evolver for FnEvolver<F>
where
    F: Fn(&DensityMatrix, f64) -> Result<DensityMatrix> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evolve_state(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        (self.f)(rho0, t)
    }
}

/// Uniform grid `tₖ = k·t_max/steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max must be positive, got {t_max}")));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 steps, got {steps}")));
        }
        Ok(Self { t_max, steps })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spacing(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.t_max * k as f64 / self.steps as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverMeta {
    pub method: String,
    /// Coarse internal step.
    pub step: f64,
    pub order: u32,
    /// Step-halving estimate of the sup-norm error in vectorized states.
    pub error_estimate: f64,
}

/// States on a time grid from [`solve_volterra`].
#[derive(Debug, Clone)]
pub struct PmmeTrajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    meta: SolverMeta,
}

impl PmmeTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn meta(&self) -> &SolverMeta {
        &self.meta
    }

    /// Largest trace error over all states.
    pub fn max_trace_defect(&self) -> f64 {
        self.states.iter().map(|s| (linalg::trace(s.matrix()) - ONE).norm()).fold(0.0, f64::max)
    }

    /// Check trace, Hermiticity and the relaxed positivity bound.
    pub fn check_invariants(&self) -> Result<()> {
        for (t, s) in self.times.iter().zip(&self.states) {
            let m = s.matrix();
            let tr = (linalg::trace(m) - ONE).norm();
            if tr > TRAJECTORY_TRACE_TOL {
                return Err(Error::InvalidState(format!("trace defect {tr:.3e} at t = {t}")));
            }
            let herm = linalg::hermiticity_defect(m);
            if herm > TRAJECTORY_TRACE_TOL {
                return Err(Error::InvalidState(format!("Hermiticity defect {herm:.3e} at t = {t}")));
            }
            let min = s.min_eigenvalue();
            if min < -VOLTERRA_PSD_TOL {
                return Err(Error::InvalidState(format!("eigenvalue {min:.3e} at t = {t}")));
            }
        }
        Ok(())
    }
}

/// Integrate the PMME directly on `grid`.
///
/// The memory integral uses the trapezoidal rule on a uniform internal grid
/// and the time step is the implicit trapezoidal rule, so each step solves
/// one small linear system. `e^{𝓛t′}` comes from the damping basis once per
/// grid offset. The run is repeated at half the step; their difference is
/// the error estimate and, with [`VolterraOrder::Extrapolated`], they are
/// combined by Richardson extrapolation. The delta kernel integrates
/// `dρ/dt = 𝓛ρ` with RK4 instead.
pub fn solve_volterra(
    kernel: &MemoryKernel,
    generator: &Superoperator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    cfg: &SolverConfig,
) -> Result<PmmeTrajectory> {
    cfg.validate()?;
    if rho0.dim() != generator.dim() {
        return Err(Error::DimensionMismatch(format!("state dim {} vs generator dim {}", rho0.dim(), generator.dim())));
    }
    let spacing = grid.spacing();
    let per_output = (spacing / cfg.volterra_step - 1e-9).ceil().max(1.0) as usize;
    let h = spacing / per_output as f64;
    let total = per_output * grid.steps();
    let y0 = vectorize(rho0.matrix());

    let (coarse, fine, order, method, rel) = if kernel.is_distributional() {
        let coarse = rk4_pass(generator.matrix(), &y0, h, per_output, grid.steps());
        let fine = rk4_pass(generator.matrix(), &y0, h / 2.0, 2 * per_output, grid.steps());
        (coarse, fine, 4, "lindblad-rk4", 15.0)
    } else {
        let basis = damping_basis(generator)?;
        let coarse = volterra_pass(kernel, &basis, &y0, h, total, per_output)?;
        let fine = volterra_pass(kernel, &basis, &y0, h / 2.0, 2 * total, 2 * per_output)?;
        (coarse, fine, 2, "volterra-trapezoidal", 3.0)
    };

    let n = y0.len();
    let mut estimate: f64 = 0.0;
    let mut states = Vec::with_capacity(grid.steps() + 1);
    for k in 0..=grid.steps() {
        let yc = &coarse[k * n..(k + 1) * n];
        let yf = &fine[k * n..(k + 1) * n];
        let mut out = nalgebra::DVector::<Complex64>::zeros(n);
        for i in 0..n {
            let diff = (yf[i] - yc[i]) / rel;
            estimate = estimate.max(diff.norm());
            out[i] = match cfg.volterra_order {
                VolterraOrder::Trapezoidal => yf[i],
                VolterraOrder::Extrapolated => yf[i] + diff,
            };
        }
        states.push(DensityMatrix::unchecked(devectorize(&out)?)?);
    }
    if !estimate.is_finite() || estimate > cfg.volterra_tol {
        return Err(Error::RefinementFailure { estimate, tol: cfg.volterra_tol });
    }
    let order = match cfg.volterra_order {
        VolterraOrder::Trapezoidal => order,
        VolterraOrder::Extrapolated => order + if order == 2 { 2 } else { 1 },
    };
    Ok(PmmeTrajectory {
        times: grid.points(),
        states,
        meta: SolverMeta { method: method.to_string(), step: h, order, error_estimate: estimate },
    })
}

/// One trapezoidal Volterra run with `total` steps of size `h`; returns the
/// vectorized states every `stride` steps, flattened.
fn volterra_pass(
    kernel: &MemoryKernel,
    basis: &DampingBasis,
    y0: &nalgebra::DVector<Complex64>,
    h: f64,
    total: usize,
    stride: usize,
) -> Result<Vec<Complex64>> {
    let n = y0.len();
    let nn = n * n;
    // Kⱼ = h k(jh) 𝓛 e^{𝓛jh}, stored row-major.
    let lambdas = basis.eigenvalues().to_vec();
    let blocks: Vec<Vec<Complex64>> = (0..=total)
        .into_par_iter()
        .map(|j| {
            let tau = j as f64 * h;
            let kv = kernel.time_value(tau)?;
            let w: Vec<Complex64> = lambdas.iter().map(|l| l * (l * tau).exp() * (h * kv)).collect();
            let m = basis.weighted_map(&w);
            let m = m.matrix();
            let mut row_major = Vec::with_capacity(nn);
            for r in 0..n {
                for c in 0..n {
                    row_major.push(m[(r, c)]);
                }
            }
            Ok(row_major)
        })
        .collect::<Result<_>>()?;
    let mut kmat = Vec::with_capacity((total + 1) * nn);
    for b in blocks {
        kmat.extend(b);
    }

    let k0 = DMatrix::from_row_slice(n, n, &kmat[..nn]);
    let system = DMatrix::<Complex64>::identity(n, n) - k0.scale(h / 4.0);
    let inv = system.try_inverse().ok_or_else(|| Error::InvalidParameter("singular Volterra step matrix".into()))?;

    let mut ys = vec![ZERO; (total + 1) * n];
    ys[..n].copy_from_slice(y0.as_slice());
    let mut integral_prev = vec![ZERO; n];
    let mut out = Vec::with_capacity((total / stride + 1) * n);
    out.extend_from_slice(y0.as_slice());

    const PARALLEL_MIN: usize = 4096;
    const CHUNK: usize = 1024;
    let mut rest = vec![ZERO; n];
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(n);
    for m in 1..=total {
        // rest = Σ_{j=1}^{m−1} Kⱼ y_{m−j} + ½ K_m y₀
        let partial = |lo: usize, hi: usize| {
            let mut acc = vec![ZERO; n];
            for j in lo..hi {
                let kb = &kmat[j * nn..(j + 1) * nn];
                let yb = &ys[(m - j) * n..(m - j + 1) * n];
                for r in 0..n {
                    let row = &kb[r * n..(r + 1) * n];
                    let mut s = ZERO;
                    for c in 0..n {
                        s += row[c] * yb[c];
                    }
                    acc[r] += s;
                }
            }
            acc
        };
        rest.iter_mut().for_each(|v| *v = ZERO);
        if m - 1 >= PARALLEL_MIN {
            let ranges: Vec<(usize, usize)> = (1..m).step_by(CHUNK).map(|lo| (lo, (lo + CHUNK).min(m))).collect();
            let parts: Vec<Vec<Complex64>> = ranges.par_iter().map(|&(lo, hi)| partial(lo, hi)).collect();
            for p in parts {
                for r in 0..n {
                    rest[r] += p[r];
                }
            }
        } else {
            let p = partial(1, m);
            rest.copy_from_slice(&p);
        }
        let km = &kmat[m * nn..(m + 1) * nn];
        for r in 0..n {
            let mut s = ZERO;
            for c in 0..n {
                s += km[r * n + c] * ys[c];
            }
            rest[r] += s * 0.5;
        }
        for r in 0..n {
            rhs[r] = ys[(m - 1) * n + r] + (integral_prev[r] + rest[r]) * (h / 2.0);
        }
        let ym = &inv * &rhs;
        for r in 0..n {
            ys[m * n + r] = ym[r];
        }
        // I_m = ½ K₀ y_m + rest
        for r in 0..n {
            let mut s = ZERO;
            for c in 0..n {
                s += kmat[r * n + c] * ym[c];
            }
            integral_prev[r] = s * 0.5 + rest[r];
        }
        if m % stride == 0 {
            out.extend_from_slice(ym.as_slice());
        }
    }
    Ok(out)
}

/// RK4 for `dy/dt = 𝓛y`; states every `stride` steps for `outputs` outputs.
fn rk4_pass(gen: &CMatrix, y0: &nalgebra::DVector<Complex64>, h: f64, stride: usize, outputs: usize) -> Vec<Complex64> {
    let n = y0.len();
    let hl = gen.scale(h);
    let mut step = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=4 {
        term = &term * &hl / Complex64::new(k as f64, 0.0);
        step += &term;
    }
    let mut y = y0.clone();
    let mut out = Vec::with_capacity((outputs + 1) * n);
    out.extend_from_slice(y.as_slice());
    for _ in 0..outputs {
        for _ in 0..stride {
            y = &step * &y;
        }
        out.extend_from_slice(y.as_slice());
    }
    out
}
