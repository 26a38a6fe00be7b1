//! Inverse Laplace transforms: exact partial fractions for rational
//! transforms and a Talbot-type contour quadrature otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, ZERO};
use crate::poly::Poly;

/// Highest pole multiplicity handled by [`PartialFractions`].
pub const MAX_MULTIPLICITY: usize = 4;
/// Relative distance under which computed roots are merged into one
/// repeated pole.
const ROOT_CLUSTER_TOL: f64 = 1e-6;

/// Group numerically split copies of repeated roots. A root of
/// multiplicity m is perturbed by about ε^{1/m}, so for each seed the largest
/// group of nearest roots lying within that radius of their mean is taken.
fn cluster_roots(roots: Vec<Complex64>) -> Vec<(Complex64, Vec<Complex64>)> {
    let mut left = roots;
    let mut clusters = Vec::new();
    while let Some(seed) = left.first().copied() {
        let mut by_distance: Vec<usize> = (0..left.len()).collect();
        by_distance.sort_by(|&a, &b| (left[a] - seed).norm().total_cmp(&(left[b] - seed).norm()));
        let mut take = 1;
        for m in (2..=left.len()).rev() {
            let members: Vec<Complex64> = by_distance[..m].iter().map(|&k| left[k]).collect();
            let mean = members.iter().sum::<Complex64>() / m as f64;
            let radius = ROOT_CLUSTER_TOL.max(10.0 * f64::EPSILON.powf(1.0 / m as f64)) * mean.norm().max(1.0);
            if members.iter().all(|r| (r - mean).norm() <= radius) {
                take = m;
                break;
            }
        }
        let mut chosen: Vec<usize> = by_distance[..take].to_vec();
        chosen.sort_unstable_by(|a, b| b.cmp(a));
        let members: Vec<Complex64> = chosen.into_iter().map(|k| left.swap_remove(k)).collect();
        let mean = members.iter().sum::<Complex64>() / members.len() as f64;
        clusters.push((mean, members));
    }
    clusters
}

/// One pole `p` with coefficients `a₁, …, a_M` of `a_m / (s − p)^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub coeffs: Vec<Complex64>,
}

/// `F(s) = Σⱼ Σₘ aⱼₘ/(s − pⱼ)^m`, inverted term by term to
/// `f(t) = Σⱼ Σₘ aⱼₘ t^{m−1}/(m−1)! e^{pⱼt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractions {
    terms: Vec<PoleTerm>,
}

impl PartialFractions {
    /// Expand a strictly proper rational function `num/den`.
    pub fn from_rational(num: &Poly, den: &Poly) -> Result<Self> {
        let den = den.trimmed(1e-15);
        if den.degree() == 0 {
            return Err(Error::RootFinding("denominator has no roots".into()));
        }
        if !num.is_zero() && num.degree() >= den.degree() {
            return Err(Error::RootFinding(format!(
                "transform is not strictly proper (deg num {} ≥ deg den {})",
                num.degree(),
                den.degree()
            )));
        }
        let lead = den.coeffs()[den.degree()];

        let mut clusters = cluster_roots(den.roots());
        clusters.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        let poles: Vec<(Complex64, usize)> = clusters.iter().map(|(p, m)| (*p, m.len())).collect();
        if let Some(&(_, m)) = poles.iter().find(|(_, m)| *m > MAX_MULTIPLICITY) {
            return Err(Error::RootMultiplicity { multiplicity: m, max: MAX_MULTIPLICITY });
        }

        let mut terms = Vec::with_capacity(poles.len());
        for (j, &(p, mult)) in poles.iter().enumerate() {
            // G(s) = num(s) / (lead · Π_{q≠p} (s − q)^{m_q}); F = G/(s − p)^mult.
            let mut rest = Poly::constant(lead);
            for (k, &(q, mq)) in poles.iter().enumerate() {
                if k != j {
                    for _ in 0..mq {
                        rest = rest.mul(&Poly::linear(q));
                    }
                }
            }
            let n_sh = num.taylor_shift(p);
            let h_sh = rest.taylor_shift(p);
            let (n, h) = (n_sh.coeffs(), h_sh.coeffs());
            let get = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or(ZERO);
            let mut g = vec![ZERO; mult];
            for k in 0..mult {
                let mut acc = get(n, k);
                for i in 1..=k {
                    acc -= get(h, i) * g[k - i];
                }
                g[k] = acc / h[0];
            }
            // g_k multiplies (s − p)^{k − mult}, i.e. coefficient a_{mult − k}.
            let coeffs: Vec<Complex64> = (1..=mult).map(|m| g[mult - m]).collect();
            terms.push(PoleTerm { pole: p, coeffs });
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.terms.iter().map(|t| t.pole).collect()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let mut total = ZERO;
        for term in &self.terms {
            let e = (term.pole * t).exp();
            let mut power = 1.0; // t^{m−1}/(m−1)!
            for (m, a) in term.coeffs.iter().enumerate() {
                if m > 0 {
                    power *= t / m as f64;
                }
                total += a * e * power;
            }
        }
        total
    }

    /// Evaluate the transform itself, `Σ a_m/(s − p)^m`.
    pub fn eval_transform(&self, s: Complex64) -> Complex64 {
        let mut total = ZERO;
        for term in &self.terms {
            let inv = (s - term.pole).inv();
            let mut pw = inv;
            for a in &term.coeffs {
                total += a * pw;
                pw *= inv;
            }
        }
        total
    }
}

/// Contour parameters for [`talbot_invert`]. The contour is
/// `s(θ) = shift + (scale/t)(θ cot θ + i·aspect·θ)`, `θ ∈ (−π, π)`, sampled
/// with the midpoint rule. All singularities of `F` must lie to its left;
/// `aspect` widens the contour for poles with large imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotConfig {
    pub nodes: usize,
    pub scale: f64,
    pub aspect: f64,
    pub shift: f64,
    /// Maximum disagreement between `nodes` and `3·nodes/2` evaluations.
    pub tol: f64,
}

impl Default for TalbotConfig {
    fn default() -> Self {
        Self { nodes: 96, scale: 10.0, aspect: 3.0, shift: 0.0, tol: 1e-8 }
    }
}

fn talbot_sum<F>(f: &F, t: f64, nodes: usize, cfg: &TalbotConfig) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mu = cfg.scale / t;
    let mut acc = ZERO;
    for k in 0..nodes {
        let theta = -PI + (k as f64 + 0.5) * 2.0 * PI / nodes as f64;
        let cot = theta.cos() / theta.sin();
        let s = c(cfg.shift + mu * theta * cot, mu * cfg.aspect * theta);
        let sin = theta.sin();
        let ds = c(mu * (cot - theta / (sin * sin)), mu * cfg.aspect);
        acc += (s * t).exp() * f(s)? * ds;
    }
    // (1/2πi) · (2π/N) · Σ
    Ok(acc / c(0.0, nodes as f64))
}

/// Numerically invert `F` at `t > 0`, checking that `nodes` and
/// `3·nodes/2` contour points agree to `cfg.tol`.
pub fn talbot_invert<F>(f: F, t: f64, cfg: &TalbotConfig) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("Talbot inversion needs t > 0, got {t}")));
    }
    let coarse = talbot_sum(&f, t, cfg.nodes, cfg)?;
    let fine = talbot_sum(&f, t, cfg.nodes + cfg.nodes / 2, cfg)?;
    let diff = (fine - coarse).norm();
    if !diff.is_finite() || diff > cfg.tol * fine.norm().max(1.0) {
        return Err(Error::TalbotNonConvergence { t, diff, tol: cfg.tol });
    }
    Ok(fine)
}
