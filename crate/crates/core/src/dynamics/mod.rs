//! State propagation under piecewise-constant controls: Lindblad master
//! equation, closed-system unitary evolution and the affine coherent-vector
//! flow derived from a Lindblad model.

mod bloch;
mod control;
mod integrator;
mod lindblad;
mod unitary;

pub use bloch::{
    build_bloch_system, propagate_bloch, propagate_bloch_into, AffineBlochSystem, BlochWorkspace, RealMatrix,
};
pub use control::{Bounds, PiecewiseConstantControl, UncertaintyTuple};
pub use integrator::{Integrator, DEFAULT_RK4_SUBSTEPS};
pub use lindblad::{
    lindblad_rhs, propagate_lindblad, propagate_lindblad_trajectory, Dissipator, LindbladModel,
    HAMILTONIAN_HERMITIAN_TOL, TRACE_DRIFT_LIMIT,
};
pub use unitary::{
    evolve_free, propagate_unitary, unitary_exp, RealStateVectorModel, StateVectorWorkspace, UNITARITY_TOL,
};
