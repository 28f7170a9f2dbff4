use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fidelity_from_distance, fidelity_objective, make_grid, RobustProblem, UncertaintySampleGrid};
use crate::dynamics::{
    propagate_unitary, unitary_exp, Bounds, LindbladModel, PiecewiseConstantControl, RealStateVectorModel,
    StateVectorWorkspace, UncertaintyTuple,
};
use crate::error::{Error, Result};
use crate::quantum_state::{
    generator_basis, pauli, partial_trace, tensor_all, to_coherent, trace_distance, Axis, CoherentVector,
    ComplexMatrix, DensityOperator, GeneratorBasis,
};

/// Tolerance for exact reduced-state consensus.
pub const EXACT_CONSENSUS_TOL: f64 = 1e-6;
/// Tolerance for approximate consensus (a 2% relative error).
pub const APPROX_CONSENSUS_TOL: f64 = 0.02;

const QUBITS: usize = 3;
const LOCAL_DIMS: [usize; QUBITS] = [2, 2, 2];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusBackend {
    /// Pure-state propagation of ψ; valid because the network is closed.
    #[default]
    StateVector,
    /// ρ ← UρU† with spectral propagators.
    Density,
}

/// Constants of the three-qubit network. Units: ħ = 1, Hamiltonian
/// coefficients in rad/ns, times in ns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConsensusParams {
    /// (ω_12, ω_23, ω_13) of the XX couplings.
    pub couplings: [f64; 3],
    pub steps: usize,
    pub dt: f64,
    pub control_min: f64,
    pub control_max: f64,
    /// Uncertainty bound E on θ_x and θ_z.
    pub uncertainty_bound: f64,
    pub grid_points: usize,
    pub backend: ConsensusBackend,
    /// Length of the free evolution recorded after the control is withdrawn.
    pub drift_horizon: f64,
    pub drift_dt: f64,
}

impl Default for ConsensusParams {
    fn default() -> Self {
        Self {
            couplings: [0.1, 0.1, 0.1],
            steps: 100,
            dt: 0.2,
            control_min: 0.0,
            control_max: 1.0,
            uncertainty_bound: 0.02,
            grid_points: 3,
            backend: ConsensusBackend::StateVector,
            drift_horizon: 20.0,
            drift_dt: 0.2,
        }
    }
}

fn local(op: &ComplexMatrix, site: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let factors: Vec<&ComplexMatrix> = (0..QUBITS).map(|k| if k == site { op } else { &id }).collect();
    tensor_all(factors)
}

impl ConsensusParams {
    /// H_0 = ω_12 XXI + ω_23 IXX + ω_13 XIX.
    pub fn free_hamiltonian(&self) -> ComplexMatrix {
        let x = pauli(Axis::X);
        let id = ComplexMatrix::identity(2);
        let [w12, w23, w13] = self.couplings;
        let mut h = tensor_all([&x, &x, &id]).scale_real(w12);
        h += &tensor_all([&id, &x, &x]).scale_real(w23);
        h += &tensor_all([&x, &id, &x]).scale_real(w13);
        h
    }

    /// Control Hamiltonians in channel order u_1^x, u_1^z, u_2^x, u_2^z, u_3^x, u_3^z.
    pub fn control_hamiltonians(&self) -> Vec<ComplexMatrix> {
        let (x, z) = (pauli(Axis::X), pauli(Axis::Z));
        (0..QUBITS).flat_map(|k| [local(&x, k), local(&z, k)]).collect()
    }

    pub fn model(&self) -> Result<LindbladModel> {
        LindbladModel::closed(self.free_hamiltonian(), self.control_hamiltonians())
    }
}

/// The network's initial pure state |0⟩ ⊗ |−⟩ ⊗ |1⟩.
pub fn consensus_initial_state() -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q1 = [1.0, 0.0];
    let q2 = [s, -s];
    let q3 = [0.0, 1.0];
    let mut psi = Vec::with_capacity(8);
    for a in q1 {
        for b in q2 {
            for c in q3 {
                psi.push(Complex64::new(a * b * c, 0.0));
            }
        }
    }
    psi
}

/// Driving a three-qubit XX network into the symmetric consensus state
/// (1/8)·𝟙_8 under uncertain control couplings (θ_x, θ_z).
#[derive(Clone, Debug)]
pub struct ConsensusProblem {
    params: ConsensusParams,
    model: LindbladModel,
    fast: RealStateVectorModel,
    basis: GeneratorBasis,
    grid: UncertaintySampleGrid,
    bounds: Vec<Bounds>,
    channel_bound: Bounds,
    psi0: Vec<Complex64>,
    initial: DensityOperator,
    target: DensityOperator,
    target_y: CoherentVector,
}

impl ConsensusProblem {
    pub fn new(params: ConsensusParams) -> Result<Self> {
        if params.steps == 0 || !(params.dt > 0.0) {
            return Err(Error::config("consensus needs steps >= 1 and dt > 0"));
        }
        if !(params.drift_dt > 0.0) || !(params.drift_horizon >= 0.0) {
            return Err(Error::config("drift analysis needs dt > 0 and a non-negative horizon"));
        }
        let channel_bound = Bounds::new(params.control_min, params.control_max)?;
        let model = params.model()?;
        let fast = RealStateVectorModel::from_model(&model)?;
        let basis = generator_basis(8)?;
        let grid = make_grid(params.uncertainty_bound, params.grid_points, 2)?;
        let psi0 = consensus_initial_state();
        let initial = DensityOperator::pure(&psi0)?;
        let target = DensityOperator::uniform_superposition(8);
        let target_y = to_coherent(&target, &basis)?;
        Ok(Self {
            bounds: vec![channel_bound; 2 * QUBITS * params.steps],
            params,
            model,
            fast,
            basis,
            grid,
            channel_bound,
            psi0,
            initial,
            target,
            target_y,
        })
    }

    pub fn params(&self) -> &ConsensusParams {
        &self.params
    }

    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    pub fn grid(&self) -> &UncertaintySampleGrid {
        &self.grid
    }

    pub fn initial_state(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn target_state(&self) -> &DensityOperator {
        &self.target
    }

    pub fn local_dims(&self) -> &'static [usize] {
        &LOCAL_DIMS
    }

    pub fn control(&self, genome: &[f64]) -> Result<PiecewiseConstantControl> {
        let channels = 2 * QUBITS;
        if genome.len() != channels * self.params.steps {
            return Err(Error::dim(format!(
                "genome has {} values, the network needs {}",
                genome.len(),
                channels * self.params.steps
            )));
        }
        PiecewiseConstantControl::new(
            channels,
            self.params.steps,
            self.params.dt,
            genome.to_vec(),
            vec![self.channel_bound; channels],
        )
    }

    /// Expands a sample (θ_x, θ_z) into per-channel multipliers with θ_0 = 1.
    pub fn uncertainty_tuple(theta: &[f64]) -> Result<UncertaintyTuple> {
        if theta.len() != 2 {
            return Err(Error::dim(format!(
                "network samples carry (θ_x, θ_z), got {} values",
                theta.len()
            )));
        }
        let mut t = vec![1.0];
        for _ in 0..QUBITS {
            t.extend_from_slice(theta);
        }
        UncertaintyTuple::new(t)
    }

    /// State reached at T under the configured backend.
    pub fn final_state(&self, genome: &[f64], theta: &[f64]) -> Result<DensityOperator> {
        let control = self.control(genome)?;
        let tuple = Self::uncertainty_tuple(theta)?;
        match self.params.backend {
            ConsensusBackend::StateVector => {
                let psi = self.fast.propagate(&control, &tuple, &self.psi0)?;
                DensityOperator::pure(&psi)
            }
            ConsensusBackend::Density => propagate_unitary(&self.model, &control, &tuple, &self.initial),
        }
    }

    fn fitness_state_vector(&self, control: &PiecewiseConstantControl, tuple: &UncertaintyTuple) -> f64 {
        let mut re: Vec<f64> = self.psi0.iter().map(|z| z.re).collect();
        let mut im: Vec<f64> = self.psi0.iter().map(|z| z.im).collect();
        let mut ws = StateVectorWorkspace::default();
        self.fast.propagate_into(control, tuple, &mut re, &mut im, &mut ws);
        // Both states are pure: ‖Δy‖² = 2 tr((ρ − ρ̄)²) = 4(1 − |⟨+++|ψ⟩|²).
        let overlap = (re.iter().sum::<f64>().powi(2) + im.iter().sum::<f64>().powi(2)) / 8.0;
        fidelity_from_distance(4.0 * (1.0 - overlap), 8)
    }
}

impl RobustProblem for ConsensusProblem {
    fn name(&self) -> &str {
        "consensus"
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

    fn channels(&self) -> usize {
        2 * QUBITS
    }

    fn fitness(&self, genome: &[f64], theta: &[f64]) -> Result<f64> {
        let control = self.control(genome)?;
        let tuple = Self::uncertainty_tuple(theta)?;
        match self.params.backend {
            ConsensusBackend::StateVector => Ok(self.fitness_state_vector(&control, &tuple)),
            ConsensusBackend::Density => {
                let rho = propagate_unitary(&self.model, &control, &tuple, &self.initial)?;
                let y = to_coherent(&rho, &self.basis)?;
                Ok(fidelity_objective(&self.target_y, &y, 8))
            }
        }
    }
}

pub fn consensus_fitness(genome: &[f64], problem: &ConsensusProblem) -> Result<(f64, Vec<f64>)> {
    problem.averaged_fitness(genome, problem.grid())
}

/// Outcome of a reduced-state consensus check.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsensusCheck {
    pub is_consensus: bool,
    /// Trace distance for every pair (i, j), i < j, in lexicographic order.
    pub distances: Vec<((usize, usize), f64)>,
    pub max_distance: f64,
}

pub fn check_consensus(rho: &DensityOperator, local_dims: &[usize], tol: f64) -> Result<ConsensusCheck> {
    if let Some(d) = local_dims.iter().find(|&&d| d != local_dims[0]) {
        return Err(Error::dim(format!(
            "reduced states of different dimension ({d} vs {}) cannot agree",
            local_dims[0]
        )));
    }
    let reduced = (0..local_dims.len())
        .map(|k| partial_trace(rho, local_dims, k))
        .collect::<Result<Vec<_>>>()?;
    let mut distances = Vec::new();
    for i in 0..reduced.len() {
        for j in i + 1..reduced.len() {
            distances.push(((i, j), trace_distance(&reduced[i], &reduced[j])?));
        }
    }
    let max_distance = distances.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    Ok(ConsensusCheck {
        is_consensus: max_distance <= tol,
        distances,
        max_distance,
    })
}

/// Trace distances recorded during free evolution of a three-qubit state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DriftSeries {
    pub times: Vec<f64>,
    /// d(ρ_k, ½𝟙_2) for k = 1, 2, 3.
    pub to_target: [Vec<f64>; 3],
    /// d12, d13, d23.
    pub pairwise: [Vec<f64>; 3],
}

impl DriftSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Pointwise mean of series sharing one time axis.
    pub fn mean(series: &[DriftSeries]) -> Result<DriftSeries> {
        let Some(first) = series.first() else {
            return Ok(DriftSeries::default());
        };
        if series.iter().any(|s| s.times != first.times) {
            return Err(Error::dim("drift series have different time axes"));
        }
        let n = series.len() as f64;
        let avg = |pick: &dyn Fn(&DriftSeries) -> &Vec<f64>| -> Vec<f64> {
            (0..first.len())
                .map(|t| series.iter().map(|s| pick(s)[t]).sum::<f64>() / n)
                .collect()
        };
        Ok(DriftSeries {
            times: first.times.clone(),
            to_target: [avg(&|s| &s.to_target[0]), avg(&|s| &s.to_target[1]), avg(&|s| &s.to_target[2])],
            pairwise: [avg(&|s| &s.pairwise[0]), avg(&|s| &s.pairwise[1]), avg(&|s| &s.pairwise[2])],
        })
    }

    /// Largest pairwise distance at each recorded time.
    pub fn max_pairwise(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| self.pairwise.iter().map(|c| c[t]).fold(0.0, f64::max))
            .collect()
    }
}

/// Evolves `rho_t` under `h0` alone for `horizon` and records reduced-state
/// trace distances at t = 0, dt, 2dt, …
pub fn free_drift_analysis(rho_t: &DensityOperator, h0: &ComplexMatrix, horizon: f64, dt: f64) -> Result<DriftSeries> {
    if rho_t.dim() != 8 || h0.rows() != 8 || !h0.is_square() {
        return Err(Error::dim("drift analysis expects a three-qubit state and Hamiltonian"));
    }
    if !(dt > 0.0) || !(horizon >= 0.0) {
        return Err(Error::config("drift analysis needs dt > 0 and a non-negative horizon"));
    }
    let steps = (horizon / dt).round() as usize;
    let u = unitary_exp(h0, dt);
    let u_dag = u.adjoint();
    let half = DensityOperator::uniform_superposition(2);
    let mut series = DriftSeries::default();
    let mut rho = rho_t.matrix().clone();
    for step in 0..=steps {
        if step > 0 {
            rho = u.matmul(&rho).matmul(&u_dag);
        }
        let state = DensityOperator::from_matrix_unchecked(rho.clone());
        let reduced = (0..QUBITS)
            .map(|k| partial_trace(&state, &LOCAL_DIMS, k))
            .collect::<Result<Vec<_>>>()?;
        series.times.push(step as f64 * dt);
        for k in 0..QUBITS {
            series.to_target[k].push(trace_distance(&reduced[k], &half)?);
        }
        for (slot, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            series.pairwise[slot].push(trace_distance(&reduced[i], &reduced[j])?);
        }
    }
    Ok(series)
}
