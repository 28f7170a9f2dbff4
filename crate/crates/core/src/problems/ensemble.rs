use serde::{Deserialize, Serialize};

use super::{fidelity_objective, make_grid, RobustProblem, UncertaintySampleGrid};
use crate::dynamics::{
    build_bloch_system, propagate_bloch_into, propagate_lindblad, AffineBlochSystem, BlochWorkspace, Bounds,
    Dissipator, Integrator, LindbladModel, PiecewiseConstantControl, UncertaintyTuple,
};
use crate::error::{Error, Result};
use crate::quantum_state::{generator_basis, pauli, to_coherent, Axis, CoherentVector, ComplexMatrix, DensityOperator, GeneratorBasis};

/// Which propagator scores an ensemble member.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleBackend {
    /// Coherent-vector flow; the fast path.
    #[default]
    Bloch,
    /// Full density-matrix master equation.
    Lindblad,
}

/// Physical and discretization constants of the two-level open ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleParams {
    /// Coefficient of σ_z in the drift Hamiltonian.
    pub drift_coefficient: f64,
    /// Control field phase φ.
    pub phi: f64,
    pub steps: usize,
    pub dt: f64,
    /// Controls live in [−control_bound, control_bound].
    pub control_bound: f64,
    /// Uncertainty bound E on θ_0 and θ_1.
    pub uncertainty_bound: f64,
    /// Training samples per uncertain parameter.
    pub grid_points: usize,
    /// Nonzero entries of L_1 = c|1⟩⟨0|, L_2 = c|0⟩⟨1|, L_3 = c|0⟩⟨0|.
    pub lindblad_amplitudes: [f64; 3],
    pub lindblad_rates: [f64; 3],
    pub backend: EnsembleBackend,
    pub integrator: Integrator,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            drift_coefficient: 0.5,
            phi: 0.0,
            steps: 200,
            dt: 0.05,
            control_bound: 10.0,
            uncertainty_bound: 0.2,
            grid_points: 3,
            lindblad_amplitudes: [0.1, 0.2, 0.2],
            lindblad_rates: [1.0, 1.0, 1.0],
            backend: EnsembleBackend::Bloch,
            integrator: Integrator::Exponential,
        }
    }
}

impl EnsembleParams {
    /// Lindblad model H = θ_0·c·σ_z + θ_1·u·H_1 with the three dissipators.
    ///
    /// The control Hamiltonian is H_1 = −(cos φ σ_x + sin φ σ_y). With this
    /// sign the derived Bloch flow has control block
    /// [[0, 0, −2 sin φ], [0, 0, 2 cos φ], [2 sin φ, −2 cos φ, 0]].
    /// The opposite sign only maps u to −u, which the symmetric control
    /// bounds absorb.
    pub fn model(&self) -> Result<LindbladModel> {
        let h0 = pauli(Axis::Z).scale_real(self.drift_coefficient);
        let mut h1 = pauli(Axis::X).scale_real(-self.phi.cos());
        h1.axpy(num_complex::Complex64::new(-self.phi.sin(), 0.0), &pauli(Axis::Y));
        let [a1, a2, a3] = self.lindblad_amplitudes;
        let [g1, g2, g3] = self.lindblad_rates;
        let dissipators = vec![
            Dissipator::new(g1, ComplexMatrix::unit(2, 1, 0).scale_real(a1))?,
            Dissipator::new(g2, ComplexMatrix::unit(2, 0, 1).scale_real(a2))?,
            Dissipator::new(g3, ComplexMatrix::unit(2, 0, 0).scale_real(a3))?,
        ];
        LindbladModel::new(h0, vec![h1], dissipators)
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }
}

/// Steering an inhomogeneous open two-level ensemble from |0⟩ to |1⟩ with one
/// piecewise-constant control field. Uncertain multipliers: (θ_0, θ_1).
#[derive(Clone, Debug)]
pub struct EnsembleProblem {
    params: EnsembleParams,
    model: LindbladModel,
    basis: GeneratorBasis,
    flow: AffineBlochSystem,
    grid: UncertaintySampleGrid,
    bounds: Vec<Bounds>,
    initial: DensityOperator,
    target: DensityOperator,
    initial_y: CoherentVector,
    target_y: CoherentVector,
}

impl EnsembleProblem {
    pub fn new(params: EnsembleParams) -> Result<Self> {
        if params.steps == 0 || !(params.dt > 0.0) {
            return Err(Error::config("ensemble needs steps >= 1 and dt > 0"));
        }
        if !(params.control_bound >= 0.0) {
            return Err(Error::config("control bound must be non-negative"));
        }
        params.integrator.validate()?;
        let model = params.model()?;
        let basis = generator_basis(2)?;
        let flow = build_bloch_system(&model, &basis)?;
        let grid = make_grid(params.uncertainty_bound, params.grid_points, 2)?;
        let bound = Bounds::new(-params.control_bound, params.control_bound)?;
        let initial = DensityOperator::basis_state(2, 0);
        let target = DensityOperator::basis_state(2, 1);
        let initial_y = to_coherent(&initial, &basis)?;
        let target_y = to_coherent(&target, &basis)?;
        Ok(Self {
            bounds: vec![bound; params.steps],
            params,
            model,
            basis,
            flow,
            grid,
            initial,
            target,
            initial_y,
            target_y,
        })
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    pub fn basis(&self) -> &GeneratorBasis {
        &self.basis
    }

    pub fn flow(&self) -> &AffineBlochSystem {
        &self.flow
    }

    /// Training grid.
    pub fn grid(&self) -> &UncertaintySampleGrid {
        &self.grid
    }

    pub fn initial_state(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn target_state(&self) -> &DensityOperator {
        &self.target
    }

    pub fn control(&self, genome: &[f64]) -> Result<PiecewiseConstantControl> {
        if genome.len() != self.params.steps {
            return Err(Error::dim(format!(
                "genome has {} values, the ensemble needs {}",
                genome.len(),
                self.params.steps
            )));
        }
        PiecewiseConstantControl::new(1, self.params.steps, self.params.dt, genome.to_vec(), vec![self.bounds[0]])
    }

    /// Final Bloch vector for one ensemble member, using the configured backend.
    pub fn final_bloch(&self, genome: &[f64], theta: &[f64]) -> Result<CoherentVector> {
        let control = self.control(genome)?;
        let theta = self.theta(theta)?;
        match self.params.backend {
            EnsembleBackend::Bloch => {
                let mut y = self.initial_y.components().to_vec();
                let mut ws = BlochWorkspace::default();
                propagate_bloch_into(&self.flow, &control, &theta, &mut y, self.params.integrator, &mut ws);
                CoherentVector::new(2, y)
            }
            EnsembleBackend::Lindblad => {
                let rho = propagate_lindblad(&self.model, &control, &theta, &self.initial, self.params.integrator)?;
                to_coherent(&rho, &self.basis)
            }
        }
    }

    fn theta(&self, theta: &[f64]) -> Result<UncertaintyTuple> {
        if theta.len() != 2 {
            return Err(Error::dim(format!(
                "ensemble samples carry (θ_0, θ_1), got {} values",
                theta.len()
            )));
        }
        UncertaintyTuple::new(theta.to_vec())
    }
}

impl RobustProblem for EnsembleProblem {
    fn name(&self) -> &str {
        "ensemble"
    }

    fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    fn uncertain_params(&self) -> usize {
        2
    }

    fn uncertainty_bound(&self) -> f64 {
        self.params.uncertainty_bound
    }

    fn fitness(&self, genome: &[f64], theta: &[f64]) -> Result<f64> {
        let reached = self.final_bloch(genome, theta)?;
        Ok(fidelity_objective(&self.target_y, &reached, 2))
    }
}

/// Average fitness of a control over the problem's training grid.
pub fn ensemble_fitness(genome: &[f64], problem: &EnsembleProblem) -> Result<(f64, Vec<f64>)> {
    problem.averaged_fitness(genome, problem.grid())
}
