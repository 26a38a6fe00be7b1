//! Liouville-space linear algebra: states, superoperators, GKSL generators
//! and the damping basis.
//!
//! Operators are vectorized by column stacking: `vec(X)[i + d·j] = X[i, j]`.
//! Under this convention `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, and the linear
//! functional `X ↦ Tr[L X]` is the row vector `vec(Lᵀ)ᵀ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ONE, ZERO};

/// Hermiticity and unit-trace tolerance for states.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue admitted for a state.
pub const PSD_TOL: f64 = 1e-10;
/// Relative tolerance for grouping degenerate generator eigenvalues.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Eigenvector-matrix condition number above which a generator is treated as
/// defective.
pub const MAX_BASIS_CONDITION: f64 = 1e8;

/// A `d × d` density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::with_psd_tolerance(entries, PSD_TOL)
    }

    /// Validate with a custom lower bound on the spectrum (the Volterra
    /// path admits `-1e-8`).
    pub fn with_psd_tolerance(entries: CMatrix, psd_tol: f64) -> Result<Self> {
        let rho = Self::unchecked(entries)?;
        rho.validate(psd_tol)?;
        Ok(rho)
    }

    /// Wrap a square matrix without checking the state invariants.
    pub(crate) fn unchecked(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square and non-empty, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    pub fn validate(&self, psd_tol: f64) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.entries);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:.3e})")));
        }
        let tr = linalg::trace(&self.entries);
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -psd_tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Pure state `|ψ⟩⟨ψ|`; `psi` is normalized first.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = CVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { entries: linalg::identity(dim).unscale(dim as f64) }
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = ONE;
        Self { entries: m }
    }

    pub fn from_bloch(b: BlochVector) -> Self {
        let [x, y, z] = b.components();
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y), c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)],
        );
        Self { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.entries)[0]
    }

    /// Bloch vector of a qubit state; `None` for other dimensions.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let m = &self.entries;
        Some([2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re])
    }
}

/// Qubit Bloch vector `(αx, αy, αz)` with `ρ = ½(I + α·σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n > 1.0 + 1e-12 {
            return Err(Error::InvalidState(format!("Bloch vector norm {n} exceeds 1")));
        }
        Ok(Self([x, y, z]))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn antipode(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Column-stacking vectorization.
pub fn vectorize(op: &CMatrix) -> CVector {
    CVector::from_column_slice(op.as_slice())
}

pub fn devectorize(v: &CVector) -> Result<CMatrix> {
    let n = v.len();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || n == 0 {
        return Err(Error::DimensionMismatch(format!("vector length {n} is not a perfect square")));
    }
    Ok(CMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Linear map on `d × d` operators, stored as a `d² × d²` matrix in the
/// column-stacking convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    entries: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, entries: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if dim == 0 || entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "superoperator for dim {dim} must be {n}×{n}, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, entries: linalg::identity(dim * dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: CMatrix::zeros(dim * dim, dim * dim) }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        Self { dim: a.nrows(), entries: linalg::kron(&b.transpose(), a) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn apply(&self, op: &CMatrix) -> Result<CMatrix> {
        if op.nrows() != self.dim || op.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator {}×{} for superoperator of dim {}",
                op.nrows(),
                op.ncols(),
                self.dim
            )));
        }
        devectorize(&(&self.entries * vectorize(op)))
    }

    /// Map a density matrix; the result is not re-validated.
    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::unchecked(self.apply(rho.matrix())?)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("compose dim {} with {}", self.dim, other.dim)));
        }
        Ok(Self { dim: self.dim, entries: &self.entries * &other.entries })
    }

    /// Dense matrix exponential `exp(t · self)` (Padé scaling and squaring).
    pub fn exp(&self, t: f64) -> Superoperator {
        Self { dim: self.dim, entries: (&self.entries * c(t, 0.0)).exp() }
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("add dim {} with {}", self.dim, other.dim)));
        }
        Ok(Self { dim: self.dim, entries: &self.entries + &other.entries })
    }

    pub fn scale(&self, s: Complex64) -> Superoperator {
        Self { dim: self.dim, entries: &self.entries * s }
    }

    /// `max_ij |Φ(E_ij†) − Φ(E_ij)†|` over matrix units; zero for
    /// Hermiticity-preserving maps.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = ONE;
                let out = self.apply(&e).expect("dims match");
                let out_dag = self.apply(&e.adjoint()).expect("dims match");
                worst = worst.max(linalg::max_abs(&(out_dag - out.adjoint())));
            }
        }
        worst
    }

    /// `max |Tr 𝓛(E_ij)|` over matrix units; zero for trace-annihilating maps.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        (0..n).map(|col| (0..d).map(|k| self.entries[(k + d * k, col)]).sum::<Complex64>().norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        linalg::max_abs(&(&self.entries - &other.entries))
    }
}

/// GKSL generator `𝓛ρ = −i[H, ρ] + Σ γₖ (Lₖ ρ Lₖ† − ½{Lₖ†Lₖ, ρ})`.
pub fn build_gksl_generator(hamiltonian: &CMatrix, dissipators: &[(CMatrix, f64)]) -> Result<Superoperator> {
    let d = hamiltonian.nrows();
    if d == 0 || hamiltonian.ncols() != d {
        return Err(Error::DimensionMismatch("Hamiltonian must be square and non-empty".into()));
    }
    let herm = linalg::hermiticity_defect(hamiltonian);
    if herm > 1e-12 * linalg::max_abs(hamiltonian).max(1.0) {
        return Err(Error::NotHermitian(herm));
    }
    let id = linalg::identity(d);
    let mut gen = (linalg::kron(&id, hamiltonian) - linalg::kron(&hamiltonian.transpose(), &id)) * c(0.0, -1.0);
    for (k, (op, rate)) in dissipators.iter().enumerate() {
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "dissipator {k} is {}×{}, expected {d}×{d}",
                op.nrows(),
                op.ncols()
            )));
        }
        if !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("dissipator {k} rate {rate} is not finite")));
        }
        let ldl = op.adjoint() * op;
        let jump = linalg::kron(&linalg::conj(op), op);
        let anti = (linalg::kron(&id, &ldl) + linalg::kron(&ldl.transpose(), &id)) * c(0.5, 0.0);
        gen += (jump - anti) * c(*rate, 0.0);
    }
    Superoperator::from_matrix(d, gen)
}

/// Trace distance `½ Tr|ρ₁ − ρ₂|`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(format!("trace distance of dims {} and {}", rho1.dim(), rho2.dim())));
    }
    Ok(operator_trace_norm(&(rho1.matrix() - rho2.matrix())) * 0.5)
}

/// Trace norm of a (numerically) Hermitian operator.
pub(crate) fn operator_trace_norm(diff: &CMatrix) -> f64 {
    linalg::hermitian_eigenvalues(diff).iter().map(|v| v.abs()).sum()
}

/// Eigen-decomposition of a diagonalizable generator into biorthonormal
/// left/right eigenoperators: `𝓛Rᵢ = λᵢRᵢ`, `Tr[Lᵢ 𝓛(X)] = λᵢ Tr[Lᵢ X]`,
/// `Tr[Lⱼ Rᵢ] = δᵢⱼ`.
#[derive(Debug, Clone)]
pub struct DampingBasis {
    dim: usize,
    eigenvalues: Vec<Complex64>,
    right_ops: Vec<CMatrix>,
    left_ops: Vec<CMatrix>,
    degeneracy_groups: Vec<Vec<usize>>,
}

impl DampingBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn right_ops(&self) -> &[CMatrix] {
        &self.right_ops
    }

    pub fn left_ops(&self) -> &[CMatrix] {
        &self.left_ops
    }

    pub fn degeneracy_groups(&self) -> &[Vec<usize>] {
        &self.degeneracy_groups
    }

    /// Expansion coefficients `αᵢ = Tr[Lᵢ X]`.
    pub fn coefficients(&self, x: &CMatrix) -> Vec<Complex64> {
        self.left_ops.iter().map(|l| (l * x).trace()).collect()
    }

    /// `max_ij |Tr[Lⱼ Rᵢ] − δᵢⱼ|`.
    pub fn biorthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, l) in self.left_ops.iter().enumerate() {
            for (i, r) in self.right_ops.iter().enumerate() {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max(((l * r).trace() - target).norm());
            }
        }
        worst
    }

    /// `Σᵢ wᵢ |Rᵢ⟩⟩⟨⟨Lᵢ†|`, i.e. `X ↦ Σᵢ wᵢ Tr[Lᵢ X] Rᵢ`.
    pub fn weighted_map(&self, weights: &[Complex64]) -> Superoperator {
        debug_assert_eq!(weights.len(), self.len());
        let n = self.dim * self.dim;
        let mut m = CMatrix::zeros(n, n);
        for ((w, r), l) in weights.iter().zip(&self.right_ops).zip(&self.left_ops) {
            if *w == ZERO {
                continue;
            }
            let rv = vectorize(r);
            let lv = vectorize(&l.transpose());
            m += (rv * lv.transpose()) * *w;
        }
        Superoperator { dim: self.dim, entries: m }
    }

    /// `exp(𝓛t) = Σᵢ e^{λᵢt} |Rᵢ⟩⟩⟨⟨Lᵢ†|`.
    pub fn semigroup(&self, t: f64) -> Superoperator {
        let w: Vec<Complex64> = self.eigenvalues.iter().map(|l| (l * t).exp()).collect();
        self.weighted_map(&w)
    }

    /// The generator reassembled from its spectral decomposition.
    pub fn generator(&self) -> Superoperator {
        self.weighted_map(&self.eigenvalues)
    }
}

/// Orthonormal Hermitian reference basis: `I/√d`, then generalized Gell-Mann
/// matrices (per index pair: symmetric, antisymmetric; then diagonals). For
/// qubits this is `{I, σx, σy, σz}/√2`.
pub fn hermitian_reference_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    out.push(linalg::identity(d).unscale((d as f64).sqrt()));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = c(s, 0.0);
            sym[(k, j)] = c(s, 0.0);
            out.push(sym);
            let mut asym = CMatrix::zeros(d, d);
            asym[(j, k)] = c(0.0, -s);
            asym[(k, j)] = c(0.0, s);
            out.push(asym);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for m in 0..l {
            diag[(m, m)] = c(norm, 0.0);
        }
        diag[(l, l)] = c(-(l as f64) * norm, 0.0);
        out.push(diag);
    }
    out
}

/// Project the reference basis onto `span`, Gram–Schmidt the projections in
/// reference order and keep the first `k` that survive. `span` must be
/// HS-orthonormal. With `real_coefficients` the output stays in the real
/// span of Hermitian inputs.
fn canonical_subspace_basis(span: &[CMatrix], reference: &[CMatrix], real_coefficients: bool) -> Vec<CMatrix> {
    let k = span.len();
    let mut chosen: Vec<CMatrix> = Vec::with_capacity(k);
    for e in reference {
        if chosen.len() == k {
            break;
        }
        let mut v = CMatrix::zeros(e.nrows(), e.ncols());
        for q in span {
            let mut coeff = linalg::hs_inner(q, e);
            if real_coefficients {
                coeff = c(coeff.re, 0.0);
            }
            v += q * coeff;
        }
        for q in &chosen {
            let mut coeff = linalg::hs_inner(q, &v);
            if real_coefficients {
                coeff = c(coeff.re, 0.0);
            }
            v -= q * coeff;
        }
        let n = linalg::hs_inner(&v, &v).re.sqrt();
        if n > 1e-6 {
            chosen.push(v.unscale(n));
        }
    }
    chosen
}

/// HS-orthonormalize a set of operators (modified Gram–Schmidt), dropping
/// dependent members.
fn orthonormalize(ops: &[CMatrix], real_coefficients: bool) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::new();
    for op in ops {
        let mut v = op.clone();
        for _ in 0..2 {
            for q in &out {
                let mut coeff = linalg::hs_inner(q, &v);
                if real_coefficients {
                    coeff = c(coeff.re, 0.0);
                }
                v -= q * coeff;
            }
        }
        let n = linalg::hs_inner(&v, &v).re.sqrt();
        if n > 1e-8 {
            out.push(v.unscale(n));
        }
    }
    out
}

fn eigen_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im))
}

/// Compute the damping basis of a diagonalizable generator.
///
/// Eigenvalues are sorted by `(Re λ descending, Im λ ascending)`. Values
/// within `DEGENERACY_TOL` (relative to the generator scale) form one group.
/// Real-eigenvalue groups of Hermiticity-preserving generators get a
/// Hermitian basis, canonicalized against [`hermitian_reference_basis`];
/// conjugate eigenvalue pairs get adjoint eigenoperators.
pub fn damping_basis(generator: &Superoperator) -> Result<DampingBasis> {
    let d = generator.dim();
    let n = d * d;
    let gen = generator.matrix();
    let scale = linalg::max_abs(gen).max(1.0);
    let group_tol = DEGENERACY_TOL * scale;
    let herm_preserving = generator.hermiticity_defect() <= 1e-12 * scale;

    let mut raw = linalg::eigenvalues(gen);
    raw.sort_by(eigen_order);

    // Cluster eigenvalues; the representative is the running mean.
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for ev in raw {
        match clusters.iter_mut().find(|(m, _)| (*m - ev).norm() <= group_tol) {
            Some((mean, count)) => {
                *mean = (*mean * (*count as f64) + ev) / ((*count + 1) as f64);
                *count += 1;
            }
            None => clusters.push((ev, 1)),
        }
    }
    for (mean, _) in clusters.iter_mut() {
        if mean.im.abs() <= group_tol {
            mean.im = 0.0;
        }
        if mean.re.abs() <= group_tol {
            mean.re = 0.0;
        }
    }
    clusters.sort_by(|a, b| eigen_order(&a.0, &b.0));

    let reference = hermitian_reference_basis(d);
    let id_n = linalg::identity(n);

    // Right eigenoperators per cluster.
    let mut right_groups: Vec<Vec<CMatrix>> = Vec::with_capacity(clusters.len());
    for (gi, &(lambda, mult)) in clusters.iter().enumerate() {
        let partner = if herm_preserving && lambda.im < 0.0 {
            clusters[..gi].iter().position(|(m, k)| (*m - lambda.conj()).norm() <= group_tol && *k == mult)
        } else {
            None
        };
        if let Some(p) = partner {
            let adj: Vec<CMatrix> = right_groups[p].iter().map(|r| r.adjoint()).collect();
            right_groups.push(adj);
            continue;
        }
        let shifted = gen - &id_n * lambda;
        let (vecs, sv) = linalg::smallest_singular_vectors(&shifted, mult);
        let null_tol = 1e-6 * scale;
        let found = sv.iter().filter(|s| **s <= null_tol).count();
        if found < mult {
            return Err(Error::DefectiveGenerator { eigenvalue: lambda, multiplicity: mult, found });
        }
        let span: Vec<CMatrix> =
            (0..mult).map(|k| devectorize(&vecs.column(k).into_owned()).expect("square")).collect();
        let group = if herm_preserving && lambda.im == 0.0 {
            let mut herm = Vec::with_capacity(2 * mult);
            for r in &span {
                herm.push((r + r.adjoint()).scale(0.5));
                herm.push((r - r.adjoint()) * c(0.0, -0.5));
            }
            let q = orthonormalize(&herm, true);
            if q.len() != mult {
                return Err(Error::DefectiveGenerator { eigenvalue: lambda, multiplicity: mult, found: q.len() });
            }
            canonical_subspace_basis(&q, &reference, true)
        } else {
            canonical_subspace_basis(&span, &reference, false)
        };
        if group.len() != mult {
            // Reference projections failed to span the eigenspace; fall back to the raw span.
            right_groups.push(span);
        } else {
            right_groups.push(group);
        }
    }

    // Left eigenoperators: null space of (𝓛 − λ)ᵀ, made dual to the right
    // group with the inverse overlap matrix.
    let mut eigenvalues = Vec::with_capacity(n);
    let mut right_ops = Vec::with_capacity(n);
    let mut left_ops = Vec::with_capacity(n);
    let mut degeneracy_groups = Vec::with_capacity(clusters.len());
    for (&(lambda, mult), rights) in clusters.iter().zip(&right_groups) {
        let shifted_t = (gen - &id_n * lambda).transpose();
        let (w, _) = linalg::smallest_singular_vectors(&shifted_t, mult);
        // overlap[j, l] = w_jᵀ vec(R_l)
        let mut overlap = CMatrix::zeros(mult, mult);
        for j in 0..mult {
            for (l, r) in rights.iter().enumerate() {
                overlap[(j, l)] = w.column(j).iter().zip(vectorize(r).iter()).map(|(a, b)| a * b).sum();
            }
        }
        let cond = linalg::condition_number(&overlap);
        if !cond.is_finite() || cond > MAX_BASIS_CONDITION {
            return Err(Error::IllConditionedBasis(cond));
        }
        let inv = overlap.try_inverse().ok_or(Error::IllConditionedBasis(f64::INFINITY))?;
        // Dual functionals: rows of inv · Wᵀ.
        let duals = &inv * w.transpose();
        let start = eigenvalues.len();
        for (k, r) in rights.iter().enumerate() {
            let row: CVector = duals.row(k).transpose();
            let mut l = devectorize(&row)?.transpose();
            if herm_preserving && lambda.im == 0.0 {
                l = (&l + l.adjoint()).scale(0.5);
            }
            eigenvalues.push(lambda);
            right_ops.push(r.clone());
            left_ops.push(l);
        }
        degeneracy_groups.push((start..start + mult).collect());
    }

    // Global eigenvector conditioning.
    let mut rmat = CMatrix::zeros(n, n);
    for (k, r) in right_ops.iter().enumerate() {
        rmat.set_column(k, &vectorize(r));
    }
    let cond = linalg::condition_number(&rmat);
    if !cond.is_finite() || cond > MAX_BASIS_CONDITION {
        return Err(Error::IllConditionedBasis(cond));
    }

    Ok(DampingBasis { dim: d, eigenvalues, right_ops, left_ops, degeneracy_groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y, pauli_z, sigma_minus, sigma_plus};

    fn dephasing(a: f64) -> Superoperator {
        build_gksl_generator(&CMatrix::zeros(2, 2), &[(pauli_z(), a / 2.0)]).unwrap()
    }

    #[test]
    fn dephasing_generator_damps_sigma_x_at_rate_a() {
        let gen = dephasing(1.0);
        let out = gen.apply(&pauli_x()).unwrap();
        assert!(linalg::max_abs(&(out + pauli_x())) < 1e-15);
    }

    #[test]
    fn identity_is_stationary_for_dephasing() {
        let gen = build_gksl_generator(&CMatrix::zeros(2, 2), &[(pauli_z(), 0.7)]).unwrap();
        let out = gen.apply(&linalg::identity(2)).unwrap();
        assert!(linalg::max_abs(&out) < 1e-15);
    }

    #[test]
    fn amplitude_damping_decays_excited_population() {
        // N = 0: only σ₋ with rate γ₀ = 1. 𝓛(|1⟩⟨1|) = γ₀(|0⟩⟨0| − |1⟩⟨1|).
        let gen = build_gksl_generator(&CMatrix::zeros(2, 2), &[(sigma_minus(), 1.0), (sigma_plus(), 0.0)]).unwrap();
        let excited = DensityMatrix::basis_state(2, 1);
        let out = gen.apply(excited.matrix()).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert!(linalg::max_abs(&(out - expected)) < 1e-15);
    }

    #[test]
    fn gksl_rejects_bad_input() {
        let h = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(build_gksl_generator(&h, &[]), Err(Error::NotHermitian(_))));
        let err = build_gksl_generator(&pauli_z(), &[(linalg::identity(3), 1.0)]);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn dephasing_damping_basis_is_pauli() {
        let basis = damping_basis(&dephasing(1.0)).unwrap();
        let ev: Vec<Complex64> = basis.eigenvalues().to_vec();
        // Sorted by Re descending: {0, 0, −1, −1}; as a set equal to {0, −a, −a, 0}.
        let expected = [0.0, 0.0, -1.0, -1.0];
        for (e, x) in ev.iter().zip(expected) {
            assert!((e - c(x, 0.0)).norm() < 1e-12, "{ev:?}");
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let paulis = [linalg::identity(2), pauli_z(), pauli_x(), pauli_y()];
        for (k, p) in paulis.iter().enumerate() {
            let p = p.scale(s);
            assert!(linalg::max_abs(&(&basis.right_ops()[k] - &p)) < 1e-12, "R{k}");
            assert!(linalg::max_abs(&(&basis.left_ops()[k] - &p)) < 1e-12, "L{k}");
        }
        assert!(basis.biorthonormality_residual() < 1e-12);
        assert_eq!(basis.degeneracy_groups(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn zero_generator_gives_reference_basis() {
        let basis = damping_basis(&Superoperator::zero(2)).unwrap();
        assert!(basis.eigenvalues().iter().all(|l| l.norm() == 0.0));
        let reference = hermitian_reference_basis(2);
        for (r, e) in basis.right_ops().iter().zip(&reference) {
            assert!(linalg::max_abs(&(r - e)) < 1e-12);
        }
        assert_eq!(basis.degeneracy_groups().len(), 1);
    }

    #[test]
    fn defective_generator_is_rejected() {
        // Single Jordan block acting on vec space of a qubit (not a GKSL map).
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 1)] = ONE;
        let gen = Superoperator::from_matrix(2, m).unwrap();
        let err = damping_basis(&gen).unwrap_err();
        assert!(matches!(err, Error::DefectiveGenerator { .. } | Error::IllConditionedBasis(_)), "{err}");
    }

    #[test]
    fn vectorize_round_trip_and_convention() {
        let x = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 1.0), c(3.0, 0.0), c(4.0, -1.0)]);
        let v = vectorize(&x);
        assert_eq!(v[1], c(3.0, 0.0)); // column stacking: X[1,0] second
        assert_eq!(devectorize(&v).unwrap(), x);
        assert!(vectorize(&CMatrix::zeros(3, 3)).iter().all(|z| *z == ZERO));
        assert!(devectorize(&CVector::zeros(3)).is_err());
        let gen = dephasing(1.0);
        let out = gen.matrix() * vectorize(&pauli_x());
        assert!((out + vectorize(&pauli_x())).norm() < 1e-15);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::basis_state(2, 0);
        let one = DensityMatrix::basis_state(2, 1);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(&zero, &zero).unwrap(), 0.0);
        let diag = |a: f64| {
            DensityMatrix::new(CMatrix::from_row_slice(2, 2, &[c(a, 0.0), ZERO, ZERO, c(1.0 - a, 0.0)])).unwrap()
        };
        assert!((trace_distance(&diag(0.8), &diag(0.35)).unwrap() - 0.45).abs() < 1e-14);
        assert!(trace_distance(&zero, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn state_validation() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        let nonherm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), ZERO, c(0.5, 0.0)]);
        assert!(DensityMatrix::new(nonherm).is_err());
        assert!(BlochVector::new(1.0, 0.1, 0.0).is_err());
        let b = BlochVector::new(0.3, -0.2, 0.5).unwrap();
        let rho = DensityMatrix::from_bloch(b);
        let back = rho.bloch().unwrap();
        for (x, y) in back.iter().zip(b.components()) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
