//! Memory kernels `k(t)` and their Laplace transforms `k̃(s)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, ONE};
use crate::poly::Poly;
use crate::quad;

type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type LaplaceFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Relative size of `|den(s)|` below which a rational transform is treated
/// as evaluated at a pole.
const POLE_TOL: f64 = 1e-13;

/// `k̃(s) = numerator(s) / denominator(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalForm {
    pub numerator: Poly,
    pub denominator: Poly,
}

impl RationalForm {
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let den = self.denominator.eval(s);
        let scale = self.denominator.max_coeff() * (1.0 + s.norm()).powi(self.denominator.degree() as i32);
        if den.norm() <= POLE_TOL * scale {
            return Err(Error::KernelPole(s));
        }
        Ok(self.numerator.eval(s) / den)
    }
}

#[derive(Clone)]
enum TimeRepr {
    Pointwise(TimeFn),
    Distributional,
}

#[derive(Clone)]
enum LaplaceRepr {
    Analytic(LaplaceFn),
    /// Computed by quadrature of the time function, valid right of `abscissa`.
    Quadrature,
}

/// A memory kernel: pointwise time function (unless distributional), its
/// Laplace transform, and an optional exact rational form of the transform.
#[derive(Clone)]
pub struct MemoryKernel {
    name: String,
    params: Vec<(String, f64)>,
    time: TimeRepr,
    laplace: LaplaceRepr,
    rational: Option<RationalForm>,
    abscissa: f64,
}

impl fmt::Debug for MemoryKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MemoryKernel")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("rational", &self.rational)
            .field("abscissa", &self.abscissa)
            .finish()
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

impl MemoryKernel {
    /// `k(t) = A e^{−γt}`, `k̃(s) = A/(s + γ)`.
    pub fn exponential(amplitude: f64, gamma: f64) -> Result<Self> {
        require_positive("A", amplitude)?;
        require_positive("gamma", gamma)?;
        Ok(Self {
            name: "exponential".into(),
            params: vec![("A".into(), amplitude), ("gamma".into(), gamma)],
            time: TimeRepr::Pointwise(Arc::new(move |t| amplitude * (-gamma * t).exp())),
            laplace: LaplaceRepr::Analytic(Arc::new(move |s| amplitude / (s + gamma))),
            rational: Some(RationalForm {
                numerator: Poly::from_real(&[amplitude]),
                denominator: Poly::from_real(&[gamma, 1.0]),
            }),
            abscissa: -gamma,
        })
    }

    /// `k(t) = A e^{−(γ−a)t} [cos μt − (γ/μ) sin μt]`,
    /// `k̃(s) = A (s − a) / ((s + γ − a)² + μ²)`.
    pub fn damped_oscillatory(amplitude: f64, gamma: f64, a: f64, mu: f64) -> Result<Self> {
        require_finite("A", amplitude)?;
        require_finite("gamma", gamma)?;
        require_finite("a", a)?;
        require_finite("mu", mu)?;
        if mu == 0.0 {
            return Err(Error::InvalidParameter("mu must be non-zero".into()));
        }
        let decay = gamma - a;
        Ok(Self {
            name: "damped_oscillatory".into(),
            params: vec![("A".into(), amplitude), ("gamma".into(), gamma), ("a".into(), a), ("mu".into(), mu)],
            time: TimeRepr::Pointwise(Arc::new(move |t| {
                amplitude * (-decay * t).exp() * ((mu * t).cos() - gamma / mu * (mu * t).sin())
            })),
            laplace: LaplaceRepr::Analytic(Arc::new(move |s| {
                let shifted = s + decay;
                amplitude * (s - a) / (shifted * shifted + mu * mu)
            })),
            rational: Some(RationalForm {
                numerator: Poly::from_real(&[-amplitude * a, amplitude]),
                denominator: Poly::from_real(&[decay * decay + mu * mu, 2.0 * decay, 1.0]),
            }),
            abscissa: -decay,
        })
    }

    /// Markovian limit `k(t) = δ(t)`, `k̃(s) = 1`. No pointwise values.
    pub fn delta() -> Self {
        Self {
            name: "delta".into(),
            params: Vec::new(),
            time: TimeRepr::Distributional,
            laplace: LaplaceRepr::Analytic(Arc::new(|_| ONE)),
            rational: Some(RationalForm { numerator: Poly::from_real(&[1.0]), denominator: Poly::from_real(&[1.0]) }),
            abscissa: f64::NEG_INFINITY,
        }
    }

    /// Normalized exponential `k(t) = γ e^{−γt}`, `k̃(s) = γ/(s + γ)`.
    pub fn appendix(gamma: f64) -> Result<Self> {
        let mut k = Self::exponential(gamma, gamma)?;
        k.name = "appendix".into();
        k.params = vec![("gamma".into(), gamma)];
        Ok(k)
    }

    /// User kernel with an analytic transform. The transform must be valid
    /// wherever the inversion contour goes (analytic continuation).
    pub fn custom<T, L>(name: &str, time_fn: T, laplace_fn: L, abscissa: f64) -> Self
    where
        T: Fn(f64) -> f64 + Send + Sync + 'static,
        L: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            params: Vec::new(),
            time: TimeRepr::Pointwise(Arc::new(time_fn)),
            laplace: LaplaceRepr::Analytic(Arc::new(laplace_fn)),
            rational: None,
            abscissa,
        }
    }

    /// User kernel given only in the time domain. Its transform is computed
    /// by quadrature and is only defined for `Re s > abscissa`, where
    /// `abscissa` bounds the exponential growth rate of `k`.
    pub fn from_time_fn<T>(name: &str, time_fn: T, abscissa: f64) -> Self
    where
        T: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            params: Vec::new(),
            time: TimeRepr::Pointwise(Arc::new(time_fn)),
            laplace: LaplaceRepr::Quadrature,
            rational: None,
            abscissa,
        }
    }

    /// `wa·ka + wb·kb`. Rational if both parts are.
    pub fn linear_combination(wa: f64, ka: &MemoryKernel, wb: f64, kb: &MemoryKernel) -> Self {
        let time = match (&ka.time, &kb.time) {
            (TimeRepr::Pointwise(fa), TimeRepr::Pointwise(fb)) => {
                let (fa, fb) = (fa.clone(), fb.clone());
                TimeRepr::Pointwise(Arc::new(move |t| wa * fa(t) + wb * fb(t)))
            }
            _ => TimeRepr::Distributional,
        };
        let (ka2, kb2) = (ka.clone(), kb.clone());
        let laplace: LaplaceFn = Arc::new(move |s| {
            let va = ka2.laplace(s).unwrap_or(c(f64::NAN, f64::NAN));
            let vb = kb2.laplace(s).unwrap_or(c(f64::NAN, f64::NAN));
            va * wa + vb * wb
        });
        let rational = match (&ka.rational, &kb.rational) {
            (Some(ra), Some(rb)) => Some(RationalForm {
                numerator: ra
                    .numerator
                    .mul(&rb.denominator)
                    .scale(c(wa, 0.0))
                    .add(&rb.numerator.mul(&ra.denominator).scale(c(wb, 0.0))),
                denominator: ra.denominator.mul(&rb.denominator),
            }),
            _ => None,
        };
        Self {
            name: format!("{}*{}+{}*{}", wa, ka.name, wb, kb.name),
            params: Vec::new(),
            time,
            laplace: LaplaceRepr::Analytic(laplace),
            rational,
            abscissa: ka.abscissa.max(kb.abscissa),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }

    pub fn rational_form(&self) -> Option<&RationalForm> {
        self.rational.as_ref()
    }

    pub fn is_distributional(&self) -> bool {
        matches!(self.time, TimeRepr::Distributional)
    }

    /// Abscissa of convergence of the Laplace integral.
    pub fn abscissa(&self) -> f64 {
        self.abscissa
    }

    /// Pointwise `k(t)`.
    pub fn time_value(&self, t: f64) -> Result<f64> {
        match &self.time {
            TimeRepr::Pointwise(f) => Ok(f(t)),
            TimeRepr::Distributional => Err(Error::DistributionalKernel(self.name.clone())),
        }
    }

    /// `k̃(s)`. Rational kernels signal poles; quadrature-backed kernels
    /// reject `Re s ≤ abscissa`.
    pub fn laplace(&self, s: Complex64) -> Result<Complex64> {
        match &self.laplace {
            LaplaceRepr::Analytic(f) => {
                if let Some(r) = &self.rational {
                    // Pole check only; the analytic expression is the value.
                    r.eval(s)?;
                }
                Ok(f(s))
            }
            LaplaceRepr::Quadrature => self.laplace_by_quadrature(s),
        }
    }

    /// `∫₀^∞ k(t) e^{−st} dt` by adaptive quadrature.
    pub fn laplace_by_quadrature(&self, s: Complex64) -> Result<Complex64> {
        if s.re <= self.abscissa {
            return Err(Error::OutsideAbscissa { re: s.re, abscissa: self.abscissa });
        }
        let f = match &self.time {
            TimeRepr::Pointwise(f) => f.clone(),
            TimeRepr::Distributional => return Err(Error::DistributionalKernel(self.name.clone())),
        };
        quad::integrate_semi_infinite(move |t| (-s * t).exp() * f(t), 1e-14, 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponential_examples() {
        let k = MemoryKernel::exponential(6.0, 1.1).unwrap();
        assert_eq!(k.time_value(0.0).unwrap(), 6.0);
        let v = k.laplace(c(0.0, 0.0)).unwrap();
        assert!((v.re - 6.0 / 1.1).abs() < 1e-14 && v.im == 0.0);
        assert!(matches!(k.laplace(c(-1.1, 0.0)), Err(Error::KernelPole(_))));
        assert!(MemoryKernel::exponential(0.0, 1.0).is_err());
        assert!(MemoryKernel::exponential(1.0, -1.0).is_err());
    }

    #[test]
    fn damped_oscillatory_examples() {
        let k = MemoryKernel::damped_oscillatory(6.0, 1.1, 1.0, PI).unwrap();
        assert!((k.time_value(0.0).unwrap() - 6.0).abs() < 1e-15);
        let v = k.laplace(c(0.0, 0.0)).unwrap();
        let expected = -6.0 / (0.1f64.powi(2) + PI * PI);
        assert!((v.re - expected).abs() < 1e-14, "{v}");
        assert!((expected + 0.607_312).abs() < 1e-6);
        assert_eq!(k.laplace(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(MemoryKernel::damped_oscillatory(6.0, 1.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn delta_examples() {
        let k = MemoryKernel::delta();
        assert_eq!(k.laplace(c(3.0, 2.0)).unwrap(), c(1.0, 0.0));
        assert!(matches!(k.time_value(0.5), Err(Error::DistributionalKernel(_))));
        assert!(k.is_distributional());
    }

    #[test]
    fn appendix_examples() {
        let k = MemoryKernel::appendix(2.5).unwrap();
        assert!((k.laplace(c(0.0, 0.0)).unwrap().re - 1.0).abs() < 1e-15);
        assert_eq!(k.time_value(0.0).unwrap(), 2.5);
        let e = MemoryKernel::exponential(2.5, 2.5).unwrap();
        for i in 0..50 {
            let t = 0.173 * i as f64;
            assert_eq!(k.time_value(t).unwrap(), e.time_value(t).unwrap());
        }
        assert!(MemoryKernel::appendix(0.0).is_err());
    }

    #[test]
    fn quadrature_kernel_respects_abscissa() {
        let k = MemoryKernel::from_time_fn("gauss", |t| (-t * t).exp(), -1.0);
        assert!(matches!(k.laplace(c(-2.0, 0.0)), Err(Error::OutsideAbscissa { .. })));
        // ∫ e^{−t²} dt = √π/2
        let v = k.laplace(c(0.0, 0.0)).unwrap();
        assert!((v.re - PI.sqrt() / 2.0).abs() < 1e-12);
    }
}
