//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// σ₋ = |0⟩⟨1|. Index 0 is the ground state.
pub fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

/// σ₊ = |1⟩⟨0|.
pub fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

/// Entrywise complex conjugate (no transpose).
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// max |X − X†| entrywise.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Hilbert–Schmidt inner product Tr[A† B].
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Eigenvalues of a Hermitian matrix in ascending order. The input is
/// symmetrized first so round-off in the anti-Hermitian part is ignored.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let (_, t) = m.clone().schur().unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let sub = if i + 1 < n { t[(i + 1, i)].norm() } else { 0.0 };
        let scale = t[(i, i)].norm() + if i + 1 < n { t[(i + 1, i + 1)].norm() } else { 0.0 };
        if i + 1 < n && sub > 1e-14 * scale.max(1e-300) {
            // Unreduced 2×2 block.
            let (a, b, cc, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5).powi(2) + b * cc;
            let root = disc.sqrt();
            out.push(half_tr + root);
            out.push(half_tr - root);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

/// Orthonormal basis of the (numerical) null space of `m`, taking the
/// `count` right-singular vectors with the smallest singular values.
/// Returns the vectors as columns along with those singular values.
pub fn smallest_singular_vectors(m: &CMatrix, count: usize) -> (CMatrix, Vec<f64>) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut basis = CMatrix::zeros(n, count);
    let mut sv = Vec::with_capacity(count);
    for (col, &k) in order.iter().take(count).enumerate() {
        for r in 0..n {
            basis[(r, col)] = v_t[(k, r)].conj();
        }
        sv.push(svd.singular_values[k]);
    }
    (basis, sv)
}

/// 2-norm condition number estimate via singular values.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_rotation_generator() {
        // [[0, -1], [1, 0]] has eigenvalues ±i.
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        assert!(max_abs(&(&x * &y - z.scale(1.0) * I)) < 1e-15);
        assert_eq!(hermitian_eigenvalues(&z), vec![-1.0, 1.0]);
        assert!(
            max_abs(&(&sigma_minus() * &sigma_plus() - CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO])))
                < 1e-15
        );
    }

    #[test]
    fn null_space_of_projector() {
        let p = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let (v, sv) = smallest_singular_vectors(&p, 1);
        assert!(sv[0] < 1e-15);
        assert!(v[(0, 0)].norm() < 1e-15);
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }
}
