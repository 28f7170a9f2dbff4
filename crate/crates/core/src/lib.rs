//! Robust quantum control by sampling-based differential evolution.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum_state`]: density operators, su(n) bases, partial trace, trace distance.
//! - [`dynamics`]: Lindblad, unitary and coherent-vector propagation under
//!   piecewise-constant controls.
//! - [`problems`]: the inhomogeneous two-level ensemble and the three-qubit
//!   consensus network, uncertainty grids, robustness testing.
//! - [`optimizers`]: mixed-strategy multi-sample DE, fixed-strategy DE and a
//!   real-coded GA baseline.
//! - [`harness`]: configuration, training/evaluation runs, verification and
//!   result files.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod optimizers;
pub mod problems;
pub mod quantum_state;

pub use error::{Error, Result};
pub use optimizers::{Algorithm, OptimizerConfig, RunHistory};
pub use problems::{ConsensusProblem, EnsembleProblem, RobustProblem, UncertaintySampleGrid};
pub use quantum_state::{ComplexMatrix, DensityOperator};
