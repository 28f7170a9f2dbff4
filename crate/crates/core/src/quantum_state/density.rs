use num_complex::Complex64;

use super::matrix::{hermitian_eigenvalues, ComplexMatrix, ONE};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Largest anti-Hermitian residue tolerated in a difference of two states
/// before its spectrum is taken.
pub const SYMMETRIZATION_TOL: f64 = 1e-10;

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates all three state invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dim("density operator must be square"));
        }
        let herm = matrix.hermiticity_residual();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (residual {herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {} + {}i is not 1",
                tr.re, tr.im
            )));
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix whose invariants hold by construction (e.g. the output
    /// of a trace-preserving propagator that checks its own drift).
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    /// |ψ⟩⟨ψ| for a normalized ψ.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("state vector norm² is {norm}")));
        }
        Ok(Self::from_matrix_unchecked(ComplexMatrix::outer(psi, psi)))
    }

    /// |k⟩⟨k| in an n-dimensional space.
    pub fn basis_state(n: usize, k: usize) -> Self {
        assert!(k < n);
        Self::from_matrix_unchecked(ComplexMatrix::unit(n, k, k))
    }

    /// I/n
    pub fn maximally_mixed(n: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    /// (1/n)·𝟙_n, the all-ones matrix scaled to unit trace. This is the pure
    /// state |+…+⟩⟨+…+| when n is a power of two.
    pub fn uniform_superposition(n: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::all_ones(n).scale_real(1.0 / n as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// tr(ρ²)
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(self.matrix.kron(&other.matrix))
    }

    /// Worst residual over the three invariants: (hermiticity, |tr − 1|, −min eigenvalue).
    pub fn invariant_residuals(matrix: &ComplexMatrix) -> (f64, f64, f64) {
        let herm = matrix.hermiticity_residual();
        let tr = (matrix.trace() - ONE).norm();
        let min_eig = hermitian_eigenvalues(matrix)[0];
        (herm, tr, min_eig)
    }
}

/// Reduced state of subsystem `keep` of a composite system whose factors have
/// dimensions `local_dims` (first factor most significant in the index).
pub fn partial_trace(
    rho: &DensityOperator,
    local_dims: &[usize],
    keep: usize,
) -> Result<DensityOperator> {
    let total: usize = local_dims.iter().product();
    if local_dims.is_empty() || total != rho.dim() {
        return Err(Error::dim(format!(
            "local dimensions {local_dims:?} do not factor a {}-dimensional state",
            rho.dim()
        )));
    }
    if keep >= local_dims.len() {
        return Err(Error::dim(format!(
            "subsystem {keep} out of range for {} factors",
            local_dims.len()
        )));
    }
    let d = local_dims[keep];
    let left: usize = local_dims[..keep].iter().product();
    let right: usize = local_dims[keep + 1..].iter().product();
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..left {
                for r in 0..right {
                    acc += m[((l * d + a) * right + r, (l * d + b) * right + r)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(out))
}

/// All single-factor reduced states, in factor order.
pub fn reduced_states(rho: &DensityOperator, local_dims: &[usize]) -> Result<Vec<DensityOperator>> {
    (0..local_dims.len())
        .map(|k| partial_trace(rho, local_dims, k))
        .collect()
}

/// ½ Σ|λ_j| over the eigenvalues of ρ − σ.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim(format!(
            "trace distance between {}- and {}-dimensional states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.matrix() - sigma.matrix();
    let residue = diff.hermiticity_residual();
    if residue > SYMMETRIZATION_TOL {
        return Err(Error::InvalidState(format!(
            "difference matrix is not Hermitian (residual {residue:.3e})"
        )));
    }
    let half: f64 = hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>() * 0.5;
    Ok(half.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_state::basis::{pauli, Axis};

    fn plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn rejects_non_states() {
        assert!(DensityOperator::new(pauli(Axis::X)).is_err());
        assert!(DensityOperator::new(ComplexMatrix::identity(2)).is_err());
        let neg = ComplexMatrix::from_real(2, 2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(DensityOperator::new(neg).is_err());
        assert!(DensityOperator::new(ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn product_state_partial_trace() {
        let a = plus();
        let b = DensityOperator::basis_state(2, 1);
        let ab = a.tensor(&b);
        let ra = partial_trace(&ab, &[2, 2], 0).unwrap();
        let rb = partial_trace(&ab, &[2, 2], 1).unwrap();
        assert!((ra.matrix() - a.matrix()).max_abs() < 1e-15);
        assert!((rb.matrix() - b.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn all_ones_reduces_to_all_ones() {
        let bar = DensityOperator::uniform_superposition(8);
        let half_ones = ComplexMatrix::all_ones(2).scale_real(0.5);
        for k in 0..3 {
            let r = partial_trace(&bar, &[2, 2, 2], k).unwrap();
            assert!((r.matrix() - &half_ones).max_abs() < 1e-12);
        }
    }

    #[test]
    fn bell_state_marginals_are_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let bell =
            DensityOperator::pure(&[Complex64::new(s, 0.0), z, z, Complex64::new(s, 0.0)]).unwrap();
        let mixed = DensityOperator::maximally_mixed(2);
        for k in 0..2 {
            let r = partial_trace(&bell, &[2, 2], k).unwrap();
            assert!((r.matrix() - mixed.matrix()).max_abs() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = DensityOperator::maximally_mixed(4);
        assert!(partial_trace(&rho, &[2, 3], 0).is_err());
        assert!(partial_trace(&rho, &[2, 2], 2).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
        let d = trace_distance(&zero, &plus()).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(trace_distance(&zero, &DensityOperator::maximally_mixed(4)).is_err());
    }
}
