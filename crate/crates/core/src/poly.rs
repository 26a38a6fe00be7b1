//! Dense complex polynomials, coefficients in ascending order.

use num_complex::Complex64;

use crate::linalg::{self, CMatrix, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(Vec<Complex64>);

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == ZERO {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self(coeffs)
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(v: Complex64) -> Self {
        Self::new(vec![v])
    }

    /// `s − root`
    pub fn linear(root: Complex64) -> Self {
        Self::new(vec![-root, ONE])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == ZERO)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.0.iter().rev().fold(ZERO, |acc, c| acc * s + c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let get = |p: &Poly, i: usize| p.0.get(i).copied().unwrap_or(ZERO);
        Poly::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![ZERO; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, k: Complex64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * k).collect())
    }

    /// Coefficients of `p(z + h)` as a polynomial in `h`.
    pub fn taylor_shift(&self, z: Complex64) -> Poly {
        // Repeated synthetic division.
        let mut a = self.0.clone();
        let n = a.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let next = a[j + 1];
                a[j] += z * next;
            }
        }
        Poly::new(a)
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Drop leading coefficients negligible relative to the largest one.
    pub fn trimmed(&self, rel_tol: f64) -> Poly {
        let scale = self.max_coeff();
        let mut c = self.0.clone();
        while c.len() > 1 && c.last().unwrap().norm() <= rel_tol * scale {
            c.pop();
        }
        Poly::new(c)
    }

    /// All complex roots: companion-matrix eigenvalues followed by Newton
    /// polishing.
    pub fn roots(&self) -> Vec<Complex64> {
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.0[deg];
        let monic: Vec<Complex64> = self.0.iter().map(|c| c / lead).collect();
        let mut roots = match deg {
            1 => vec![-monic[0]],
            2 => {
                let (b, c) = (monic[1], monic[0]);
                let disc = (b * b - c * 4.0).sqrt();
                // Numerically stable pair.
                let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
                if q == ZERO {
                    vec![ZERO, ZERO]
                } else {
                    vec![q, c / q]
                }
            }
            _ => {
                let mut comp = CMatrix::zeros(deg, deg);
                for i in 1..deg {
                    comp[(i, i - 1)] = ONE;
                }
                for i in 0..deg {
                    comp[(i, deg - 1)] = -monic[i];
                }
                linalg::eigenvalues(&comp)
            }
        };
        let p = Poly::new(monic);
        let dp = p.derivative();
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = p.eval(*r) / d;
                let candidate = *r - step;
                if p.eval(candidate).norm() < p.eval(*r).norm() {
                    *r = candidate;
                } else {
                    break;
                }
            }
        }
        roots
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::constant(ZERO);
        }
        Poly::new(self.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn arithmetic_and_eval() {
        let p = Poly::from_real(&[1.0, 2.0, 3.0]); // 1 + 2s + 3s²
        let q = Poly::from_real(&[-1.0, 1.0]);
        assert_eq!(p.eval(c(2.0, 0.0)), c(17.0, 0.0));
        assert_eq!(p.mul(&q).eval(c(2.0, 0.0)), c(17.0, 0.0));
        assert_eq!(p.add(&q).coeffs(), Poly::from_real(&[0.0, 3.0, 3.0]).coeffs());
        let shifted = p.taylor_shift(c(1.0, 0.0)); // p(1 + h) = 6 + 8h + 3h²
        assert_eq!(shifted, Poly::from_real(&[6.0, 8.0, 3.0]));
    }

    #[test]
    fn roots_of_known_polynomials() {
        // (s + 1)(s + 2)(s − 3i)
        let p = Poly::linear(c(-1.0, 0.0)).mul(&Poly::linear(c(-2.0, 0.0))).mul(&Poly::linear(c(0.0, 3.0)));
        let mut r = p.roots();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] - c(-2.0, 0.0)).norm() < 1e-13);
        assert!((r[1] - c(-1.0, 0.0)).norm() < 1e-13);
        assert!((r[2] - c(0.0, 3.0)).norm() < 1e-13);
        let quad = Poly::from_real(&[2.0, 2.0, 1.0]); // roots −1 ± i
        for z in quad.roots() {
            assert!(quad.eval(z).norm() < 1e-14);
        }
    }
}
