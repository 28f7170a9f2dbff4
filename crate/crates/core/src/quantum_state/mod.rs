//! Dense linear algebra for few-level quantum systems: density operators,
//! su(n) generator bases, tensor products, partial traces, trace distance and
//! coherent-vector coordinates.

mod basis;
mod density;
mod matrix;

pub use basis::{
    from_coherent, generator_basis, pauli, reconstruct, to_coherent, to_coherent_matrix, Axis,
    CoherentVector, GeneratorBasis, COHERENT_IMAG_TOL,
};
pub use density::{
    partial_trace, reduced_states, trace_distance, DensityOperator, HERMITIAN_TOL, POSITIVITY_TOL,
    SYMMETRIZATION_TOL, TRACE_TOL,
};
pub use matrix::{hermitian_eigen, hermitian_eigenvalues, tensor, tensor_all, ComplexMatrix, I, ONE, ZERO};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Random full-rank state ρ = AA†/tr(AA†) with Gaussian A.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityOperator {
    let data = (0..n * n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let a = ComplexMatrix::new(n, n, data).expect("square");
    let m = a.matmul(&a.adjoint());
    let tr = m.trace().re;
    DensityOperator::new(m.scale_real(1.0 / tr).hermitian_part()).expect("AA† is a state")
}

/// Random pure state with Haar-distributed vector.
pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityOperator {
    let mut psi: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    DensityOperator::pure(&psi).expect("normalized")
}
