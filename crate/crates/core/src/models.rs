//! Closed-form reference solutions: qubit dephasing under the exponential
//! and damped-oscillatory kernels, and amplitude damping at finite
//! temperature under the kernel `γe^{−γt}`.

use crate::error::{Error, Result};
use crate::kernels::MemoryKernel;
use crate::linalg::{c, pauli_z, sigma_minus, sigma_plus, CMatrix};
use crate::liouville::{build_gksl_generator, DensityMatrix, Superoperator};

/// Relative discriminant size below which the critically damped series is
/// used.
const DEGENERATE_TOL: f64 = 1e-10;

/// `cos √x` for `x ≥ 0`, `cosh √−x` otherwise.
fn cos_like(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        series(x, 0)
    } else if x > 0.0 {
        x.sqrt().cos()
    } else {
        (-x).sqrt().cosh()
    }
}

/// `sin √x / √x` for `x ≥ 0`, `sinh √−x / √−x` otherwise.
fn sinc_like(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        series(x, 1)
    } else if x > 0.0 {
        let r = x.sqrt();
        r.sin() / r
    } else {
        let r = (-x).sqrt();
        r.sinh() / r
    }
}

/// `Σₖ (−x)ᵏ/(2k + offset)!`
fn series(x: f64, offset: u32) -> f64 {
    let mut term = 1.0;
    for j in 1..=offset {
        term /= j as f64;
    }
    let mut sum = term;
    for k in 1..12u32 {
        let n = 2 * k + offset;
        term *= -x / ((n - 1) * n) as f64;
        sum += term;
    }
    sum
}

/// `e^{−bt}[cos ωt + (b/ω) sin ωt]` with `ω² = w2` of either sign, and its
/// derivative `−(b² + ω²) t e^{−bt} sin(ωt)/(ωt)`.
fn damped_pair(b: f64, w2: f64, t: f64, degenerate: bool) -> (f64, f64) {
    let x = if degenerate { 0.0 } else { w2 * t * t };
    let env = (-b * t).exp();
    let s = sinc_like(x);
    (env * (cos_like(x) + b * t * s), -(b * b + w2) * t * env * s)
}

/// Parameters of the dephasing model `𝓛ρ = (a/2)(σzρσz − ρ)` with kernel
/// amplitude `A`, decay `γ` and, for the damped-oscillatory kernel, the
/// frequency `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    pub amplitude: f64,
    pub dephasing_rate: f64,
    pub decay_rate: f64,
    pub frequency: f64,
}

impl DephasingParams {
    pub fn new(amplitude: f64, dephasing_rate: f64, decay_rate: f64, frequency: f64) -> Result<Self> {
        for (name, v) in [("A", amplitude), ("a", dephasing_rate), ("gamma", decay_rate), ("mu", frequency)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { amplitude, dephasing_rate, decay_rate, frequency })
    }

    /// `A = 6, a = 1, γ = 1.1, μ = π`.
    pub fn figure_one() -> Self {
        Self { amplitude: 6.0, dephasing_rate: 1.0, decay_rate: 1.1, frequency: std::f64::consts::PI }
    }

    /// `4aA > (a + γ)²`: `f₁` oscillates.
    pub fn is_oscillatory(&self) -> bool {
        self.discriminant() > 0.0
    }

    fn discriminant(&self) -> f64 {
        4.0 * self.dephasing_rate * self.amplitude - (self.dephasing_rate + self.decay_rate).powi(2)
    }

    /// `ω = √(4aA − (a + γ)²)/2`, or `None` outside the oscillatory regime.
    pub fn omega(&self) -> Option<f64> {
        self.is_oscillatory().then(|| self.discriminant().sqrt() / 2.0)
    }

    /// `Ω = √(μ² + Aa)`.
    pub fn big_omega(&self) -> f64 {
        (self.frequency.powi(2) + self.amplitude * self.dephasing_rate).sqrt()
    }

    pub fn generator(&self) -> Superoperator {
        dephasing_generator(self.dephasing_rate)
    }

    pub fn exponential_kernel(&self) -> MemoryKernel {
        MemoryKernel::exponential(self.amplitude, self.decay_rate).expect("validated parameters")
    }

    pub fn damped_oscillatory_kernel(&self) -> MemoryKernel {
        MemoryKernel::damped_oscillatory(self.amplitude, self.decay_rate, self.dephasing_rate, self.frequency)
            .expect("validated parameters")
    }

    pub fn kernel(&self, choice: KernelChoice) -> MemoryKernel {
        match choice {
            KernelChoice::Exponential => self.exponential_kernel(),
            KernelChoice::DampedOscillatory => self.damped_oscillatory_kernel(),
        }
    }

    /// Coherence factor `f(t)` and `f′(t)` for the chosen kernel.
    pub fn coherence(&self, choice: KernelChoice, t: f64) -> (f64, f64) {
        match choice {
            KernelChoice::Exponential => (f1(t, self), f1_derivative(t, self)),
            KernelChoice::DampedOscillatory => (f2(t, self), f2_derivative(t, self)),
        }
    }
}

/// The two dephasing kernels with closed-form coherence factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Exponential,
    DampedOscillatory,
}

/// `𝓛ρ = (a/2)(σzρσz − ρ)`, eigenvalues `{0, −a, −a, 0}`.
pub fn dephasing_generator(rate: f64) -> Superoperator {
    build_gksl_generator(&CMatrix::zeros(2, 2), &[(pauli_z(), rate / 2.0)]).expect("valid dephasing generator")
}

fn f1_parts(t: f64, p: &DephasingParams) -> (f64, f64) {
    let sum = p.dephasing_rate + p.decay_rate;
    let disc = p.discriminant();
    let degenerate = disc.abs() <= DEGENERATE_TOL * sum * sum;
    damped_pair(sum / 2.0, disc / 4.0, t, degenerate)
}

/// Coherence factor for the exponential kernel:
/// `e^{−t(a+γ)/2}[cos ωt + sin(ωt)(a+γ)/(2ω)]`, continued analytically to the
/// critically damped and overdamped regimes.
pub fn f1(t: f64, p: &DephasingParams) -> f64 {
    f1_parts(t, p).0
}

/// `f₁′(t) = −aA e^{−t(a+γ)/2} sin(ωt)/ω`.
pub fn f1_derivative(t: f64, p: &DephasingParams) -> f64 {
    f1_parts(t, p).1
}

/// Coherence factor for the damped-oscillatory kernel:
/// `1 − (Aa/(γ² + Ω²))[1 − e^{−γt}(cos Ωt + (γ/Ω) sin Ωt)]`.
pub fn f2(t: f64, p: &DephasingParams) -> f64 {
    let w = p.big_omega();
    let g = p.decay_rate;
    let weight = p.amplitude * p.dephasing_rate / (g * g + w * w);
    1.0 - weight * (1.0 - (-g * t).exp() * ((w * t).cos() + g / w * (w * t).sin()))
}

/// `f₂′(t) = −(Aa/Ω) e^{−γt} sin Ωt`.
pub fn f2_derivative(t: f64, p: &DephasingParams) -> f64 {
    let w = p.big_omega();
    -(p.amplitude * p.dephasing_rate / w) * (-p.decay_rate * t).exp() * (w * t).sin()
}

/// Backflow `σ = dD/dt` for a qubit pair whose Bloch vectors differ by
/// `(Δx, Δy, Δz)` under dephasing with coherence factor `f`:
/// `D = ½√((Δx² + Δy²)f² + Δz²)`, so
/// `σ = ½(Δx² + Δy²) f f′ / √((Δx² + Δy²)f² + Δz²)`.
/// `None` where the distance vanishes.
pub fn sigma_closed_form(delta: [f64; 3], f: f64, df: f64) -> Option<f64> {
    let transverse = delta[0] * delta[0] + delta[1] * delta[1];
    let norm = (transverse * f * f + delta[2] * delta[2]).sqrt();
    if transverse == 0.0 {
        return Some(0.0);
    }
    (norm > 0.0).then(|| 0.5 * transverse * f * df / norm)
}

/// Root of `g` in `[lo, hi]` by bisection to `tol`; `g(lo)` and `g(hi)`
/// must differ in sign.
pub fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut g_lo = g(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign changes of `g` on `[0, t_max]`, bracketed on a uniform scan of
/// `scan` points and refined by bisection to `1e-10`.
fn roots_on(g: &dyn Fn(f64) -> f64, t_max: f64, scan: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_t = 0.0;
    let mut prev = g(0.0);
    for k in 1..=scan {
        let t = t_max * k as f64 / scan as f64;
        let v = g(t);
        if prev != 0.0 && v != 0.0 && (prev > 0.0) != (v > 0.0) {
            roots.push(bisect(g, prev_t, t, 1e-10));
        }
        prev_t = t;
        prev = v;
    }
    roots
}

/// Maximal intervals of `[0, t_max]` on which `f·f′ > 0`, with boundaries
/// from root finding on `f` and `f′` separately (scan resolution `step`).
pub fn positive_product_windows(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    t_max: f64,
    step: f64,
) -> Vec<(f64, f64)> {
    let scan = (t_max / step).ceil().max(1.0) as usize;
    let mut cuts = roots_on(f, t_max, scan);
    cuts.extend(roots_on(df, t_max, scan));
    cuts.push(0.0);
    cuts.push(t_max);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) * df(mid) > 0.0 {
            match windows.last_mut() {
                Some(last) if (last.1 - lo).abs() < 1e-12 => last.1 = hi,
                _ => windows.push((lo, hi)),
            }
        }
    }
    windows
}

/// Positive windows of `f·f′` for the chosen dephasing kernel on
/// `[0, t_max]`. Empty outside the oscillatory regime of the exponential
/// kernel, where `f₁` decays monotonically.
pub fn sigma_windows(p: &DephasingParams, choice: KernelChoice, t_max: f64) -> Vec<(f64, f64)> {
    let period = match choice {
        KernelChoice::Exponential => match p.omega() {
            Some(w) => std::f64::consts::PI / w,
            None => return Vec::new(),
        },
        KernelChoice::DampedOscillatory => std::f64::consts::PI / p.big_omega(),
    };
    let step = (period / 64.0).min(1e-2);
    positive_product_windows(&|t| p.coherence(choice, t).0, &|t| p.coherence(choice, t).1, t_max, step)
}

/// Parameters of the finite-temperature amplitude-damping model with
/// dissipation rate `γ₀`, mean bath excitation `N` and kernel rate `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeDampingParams {
    pub dissipation_rate: f64,
    pub mean_excitation: f64,
    pub kernel_rate: f64,
}

impl AmplitudeDampingParams {
    pub fn new(dissipation_rate: f64, mean_excitation: f64, kernel_rate: f64) -> Result<Self> {
        if !(dissipation_rate.is_finite() && dissipation_rate > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma0 must be positive, got {dissipation_rate}")));
        }
        if !(mean_excitation.is_finite() && mean_excitation >= 0.0) {
            return Err(Error::InvalidParameter(format!("N must be nonnegative, got {mean_excitation}")));
        }
        if !(kernel_rate.is_finite() && kernel_rate > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {kernel_rate}")));
        }
        Ok(Self { dissipation_rate, mean_excitation, kernel_rate })
    }

    /// Population relaxation rate of the generator, `Γ = (1 + 2N)γ₀`.
    pub fn relaxation_rate(&self) -> f64 {
        (1.0 + 2.0 * self.mean_excitation) * self.dissipation_rate
    }

    /// `A = (1 + 2N)γγ₀`.
    pub fn a_coefficient(&self) -> f64 {
        self.relaxation_rate() * self.kernel_rate
    }

    /// `B = γ + (1 + 2N)γ₀`.
    pub fn b_coefficient(&self) -> f64 {
        self.kernel_rate + self.relaxation_rate()
    }

    /// `(A, B)` for the coherences, whose generator eigenvalue is `−Γ/2`.
    pub fn coherence_coefficients(&self) -> (f64, f64) {
        let g = self.relaxation_rate();
        (g * self.kernel_rate / 2.0, self.kernel_rate + g / 2.0)
    }

    /// Ground-state population of the stationary state, `(1 + N)/(1 + 2N)`.
    pub fn stationary_ground_population(&self) -> f64 {
        (1.0 + self.mean_excitation) / (1.0 + 2.0 * self.mean_excitation)
    }

    pub fn stationary_state(&self) -> DensityMatrix {
        let g = self.stationary_ground_population();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(g, 0.0);
        m[(1, 1)] = c(1.0 - g, 0.0);
        DensityMatrix::new(m).expect("diagonal state")
    }

    pub fn generator(&self) -> Superoperator {
        appendix_generator(self.dissipation_rate, self.mean_excitation)
    }

    pub fn kernel(&self) -> MemoryKernel {
        MemoryKernel::appendix(self.kernel_rate).expect("validated parameters")
    }
}

/// Amplitude damping with thermal excitation; index 0 is the ground state,
/// `σ₋ = |0⟩⟨1|`.
pub fn appendix_generator(dissipation_rate: f64, mean_excitation: f64) -> Superoperator {
    build_gksl_generator(
        &CMatrix::zeros(2, 2),
        &[
            (sigma_minus(), dissipation_rate * (mean_excitation + 1.0)),
            (sigma_plus(), dissipation_rate * mean_excitation),
        ],
    )
    .expect("valid amplitude-damping generator")
}

/// `ξ(A, B, t) = e^{−Bt/2}[cosh(κt) + (B/2κ) sinh(κt)]`, `κ = √(B² − 4A)/2`,
/// with the series limit at `B² = 4A`. Returns the value and derivative.
pub fn xi_ab(a_coef: f64, b_coef: f64, t: f64) -> (f64, f64) {
    let disc = b_coef * b_coef - 4.0 * a_coef;
    let degenerate = disc.abs() <= DEGENERATE_TOL * b_coef * b_coef;
    damped_pair(b_coef / 2.0, -disc / 4.0, t, degenerate)
}

/// Population factor `ξ(A, B, t)` of the amplitude-damping model.
pub fn appendix_xi(p: &AmplitudeDampingParams, t: f64) -> f64 {
    xi_ab(p.a_coefficient(), p.b_coefficient(), t).0
}

/// Coherence factor, `ξ` at the coherence coefficients.
pub fn appendix_coherence_xi(p: &AmplitudeDampingParams, t: f64) -> f64 {
    let (a, b) = p.coherence_coefficients();
    xi_ab(a, b, t).0
}

/// Closed-form `ρ(t)`: populations relax to the stationary state with the
/// population factor, coherences decay with the coherence factor.
pub fn appendix_state(p: &AmplitudeDampingParams, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("qubit model, got dimension {}", rho0.dim())));
    }
    let m0 = rho0.matrix();
    let ground = p.stationary_ground_population();
    let xp = appendix_xi(p, t);
    let xc = appendix_coherence_xi(p, t);
    let pop = ground + xp * (m0[(0, 0)].re - ground);
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = c(pop, 0.0);
    m[(1, 1)] = c(1.0 - pop, 0.0);
    m[(0, 1)] = m0[(0, 1)] * xc;
    m[(1, 0)] = m0[(1, 0)] * xc;
    DensityMatrix::new(m)
}

/// Backflow for the diagonal pair `diag(a, 1−a)`, `diag(c, 1−c)`:
/// `σ = −2A|a − c| e^{−Bt/2} sinh(κt)/√(B² − 4A)`.
pub fn appendix_sigma(p: &AmplitudeDampingParams, a: f64, c_pop: f64, t: f64) -> f64 {
    let (_, dxi) = xi_ab(p.a_coefficient(), p.b_coefficient(), t);
    (a - c_pop).abs() * dxi
}
