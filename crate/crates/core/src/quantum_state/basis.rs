use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityOperator;
use super::matrix::{ComplexMatrix, I, ONE};
use crate::error::{Error, Result};

/// Imaginary residue tolerated in tr(U_l ρ) before the input is declared
/// non-Hermitian.
pub const COHERENT_IMAG_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pauli matrix for the given axis.
pub fn pauli(axis: Axis) -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let data = match axis {
        Axis::X => vec![z, ONE, ONE, z],
        Axis::Y => vec![z, -I, I, z],
        Axis::Z => vec![ONE, z, z, -ONE],
    };
    ComplexMatrix::new(2, 2, data).expect("2x2")
}

/// Traceless Hermitian generators of su(n), normalized so that
/// tr(U_l U_m) = 2δ_lm.
///
/// Ordering is the generalized Gell-Mann one: symmetric off-diagonal pairs
/// (j<k, row-major), then antisymmetric pairs in the same order, then the
/// n−1 diagonal generators. For n = 2 this is (σ_x, σ_y, σ_z).
#[derive(Clone, Debug)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<ComplexMatrix>,
}

impl GeneratorBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::dim(format!("generator basis needs n >= 2, got {n}")));
        }
        let mut generators = Vec::with_capacity(n * n - 1);
        for j in 0..n {
            for k in j + 1..n {
                let mut m = ComplexMatrix::zeros(n, n);
                m[(j, k)] = ONE;
                m[(k, j)] = ONE;
                generators.push(m);
            }
        }
        for j in 0..n {
            for k in j + 1..n {
                let mut m = ComplexMatrix::zeros(n, n);
                m[(j, k)] = -I;
                m[(k, j)] = I;
                generators.push(m);
            }
        }
        for l in 1..n {
            let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut m = ComplexMatrix::zeros(n, n);
            for j in 0..l {
                m[(j, j)] = Complex64::new(scale, 0.0);
            }
            m[(l, l)] = Complex64::new(-(l as f64) * scale, 0.0);
            generators.push(m);
        }
        Ok(Self { dim: n, generators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn get(&self, l: usize) -> &ComplexMatrix {
        &self.generators[l]
    }
}

/// Shorthand for [`GeneratorBasis::new`].
pub fn generator_basis(n: usize) -> Result<GeneratorBasis> {
    GeneratorBasis::new(n)
}

/// Real coordinates y_l = tr(U_l ρ) of a state in a generator basis. For a
/// qubit this is the Bloch vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentVector {
    dim: usize,
    components: Vec<f64>,
}

impl CoherentVector {
    pub fn new(dim: usize, components: Vec<f64>) -> Result<Self> {
        if dim < 2 || components.len() != dim * dim - 1 {
            return Err(Error::dim(format!(
                "{} components for a {dim}-level system",
                components.len()
            )));
        }
        Ok(Self { dim, components })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            components: vec![0.0; dim * dim - 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn into_components(self) -> Vec<f64> {
        self.components
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum()
    }

    /// ‖self − other‖²
    pub fn distance_sqr(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Upper bound 2(1 − 1/n) on ‖y‖² for physical states.
    pub fn norm_bound(dim: usize) -> f64 {
        2.0 * (1.0 - 1.0 / dim as f64)
    }
}

/// y_l = tr(U_l ρ).
pub fn to_coherent(rho: &DensityOperator, basis: &GeneratorBasis) -> Result<CoherentVector> {
    to_coherent_matrix(rho.matrix(), basis)
}

/// Same as [`to_coherent`] for a bare matrix; used for traceless operators
/// such as right-hand sides of the master equation.
pub fn to_coherent_matrix(m: &ComplexMatrix, basis: &GeneratorBasis) -> Result<CoherentVector> {
    if m.rows() != basis.dim() || !m.is_square() {
        return Err(Error::dim(format!(
            "{}x{} matrix against a {}-level basis",
            m.rows(),
            m.cols(),
            basis.dim()
        )));
    }
    let mut components = Vec::with_capacity(basis.len());
    for (l, u) in basis.generators().iter().enumerate() {
        let z = u.trace_product(m);
        if z.im.abs() > COHERENT_IMAG_TOL * (1.0 + z.re.abs()) {
            return Err(Error::InvalidState(format!(
                "component {l} has imaginary part {:.3e}; input is not Hermitian",
                z.im
            )));
        }
        components.push(z.re);
    }
    Ok(CoherentVector {
        dim: basis.dim(),
        components,
    })
}

/// I/n + ½ Σ y_l U_l, without any positivity check.
pub fn reconstruct(y: &CoherentVector, basis: &GeneratorBasis) -> Result<ComplexMatrix> {
    if y.dim() != basis.dim() {
        return Err(Error::dim(format!(
            "{}-level coherent vector against a {}-level basis",
            y.dim(),
            basis.dim()
        )));
    }
    let n = basis.dim();
    let mut m = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
    for (yl, u) in y.components().iter().zip(basis.generators()) {
        m.axpy(Complex64::new(0.5 * yl, 0.0), u);
    }
    Ok(m)
}

/// Rebuilds a density operator from coherent coordinates. Vectors outside the
/// physical set come back as [`Error::InvalidState`].
pub fn from_coherent(y: &CoherentVector, basis: &GeneratorBasis) -> Result<DensityOperator> {
    DensityOperator::new(reconstruct(y, basis)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_entries() {
        let x = pauli(Axis::X);
        assert_eq!(x, ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap());
        let z = pauli(Axis::Z);
        assert_eq!(z, ComplexMatrix::from_real(2, 2, &[1., 0., 0., -1.]).unwrap());
        let y = pauli(Axis::Y);
        assert_eq!(y[(0, 1)], -I);
        assert_eq!(y[(1, 0)], I);
        assert_eq!(y.matmul(&y), ComplexMatrix::identity(2));
    }

    #[test]
    fn qubit_basis_is_pauli() {
        let b = generator_basis(2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.get(0), &pauli(Axis::X));
        assert_eq!(b.get(1), &pauli(Axis::Y));
        assert_eq!(b.get(2), &pauli(Axis::Z));
    }

    #[test]
    fn rejects_trivial_dimension() {
        assert!(generator_basis(1).is_err());
        assert!(generator_basis(0).is_err());
    }

    #[test]
    fn orthonormality() {
        for n in [2, 3, 4, 8] {
            let b = generator_basis(n).unwrap();
            assert_eq!(b.len(), n * n - 1);
            for (l, ul) in b.generators().iter().enumerate() {
                assert!(ul.trace().norm() <= 1e-12);
                assert!(ul.hermiticity_residual() == 0.0);
                for (m, um) in b.generators().iter().enumerate() {
                    let expected = if l == m { 2.0 } else { 0.0 };
                    let got = ul.trace_product(um);
                    assert!((got.re - expected).abs() <= 1e-12 && got.im.abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn coherent_examples() {
        let b = generator_basis(2).unwrap();
        let up = DensityOperator::basis_state(2, 0);
        assert_eq!(to_coherent(&up, &b).unwrap().components(), &[0.0, 0.0, 1.0]);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!(to_coherent(&mixed, &b).unwrap().norm_sqr() < 1e-30);

        let down = from_coherent(&CoherentVector::new(2, vec![0., 0., -1.]).unwrap(), &b).unwrap();
        assert!((down.matrix() - DensityOperator::basis_state(2, 1).matrix()).max_abs() < 1e-15);
        let origin = from_coherent(&CoherentVector::zeros(3), &generator_basis(3).unwrap()).unwrap();
        assert!((origin.matrix() - DensityOperator::maximally_mixed(3).matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn uniform_superposition_is_pure_in_coherent_form() {
        let b = generator_basis(8).unwrap();
        let y = to_coherent(&DensityOperator::uniform_superposition(8), &b).unwrap();
        assert!((y.norm_sqr() - 2.0 * (1.0 - 1.0 / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn outside_ball_is_flagged() {
        let b = generator_basis(2).unwrap();
        let y = CoherentVector::new(2, vec![0., 0., 1.5]).unwrap();
        assert!(matches!(from_coherent(&y, &b), Err(Error::InvalidState(_))));
        assert!(reconstruct(&y, &b).is_ok());
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let b = generator_basis(2).unwrap();
        let m = ComplexMatrix::unit(2, 0, 1);
        assert!(to_coherent_matrix(&m, &b).is_err());
    }
}
