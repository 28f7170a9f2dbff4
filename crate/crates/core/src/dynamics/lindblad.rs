use num_complex::Complex64;

use super::control::{PiecewiseConstantControl, UncertaintyTuple};
use super::integrator::{advance_linear, Integrator};
use crate::error::{Error, Result};
use crate::quantum_state::{ComplexMatrix, DensityOperator, I, ONE};

/// Largest trace drift tolerated after a propagation step.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Tolerance on Hermiticity of Hamiltonian terms.
pub const HAMILTONIAN_HERMITIAN_TOL: f64 = 1e-12;

/// One dissipation channel γ·D[L].
#[derive(Clone, Debug)]
pub struct Dissipator {
    pub rate: f64,
    pub operator: ComplexMatrix,
    // L†L, cached
    ldl: ComplexMatrix,
}

impl Dissipator {
    pub fn new(rate: f64, operator: ComplexMatrix) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::config(format!("relaxation rate must be >= 0, got {rate}")));
        }
        if !operator.is_square() {
            return Err(Error::dim("Lindblad operator must be square"));
        }
        let ldl = operator.adjoint().matmul(&operator);
        Ok(Self { rate, operator, ldl })
    }

    /// D[L]X = L X L† − ½ L†L X − ½ X L†L
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.operator.matmul(x).matmul(&self.operator.adjoint());
        out.axpy(Complex64::new(-0.5, 0.0), &self.ldl.matmul(x));
        out.axpy(Complex64::new(-0.5, 0.0), &x.matmul(&self.ldl));
        out
    }
}

/// Open-system model H(t) = θ_0 H_0 + Σ_j θ_j u_j(t) H_j with Lindblad
/// dissipators. ħ = 1.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    dim: usize,
    drift: ComplexMatrix,
    controls: Vec<ComplexMatrix>,
    dissipators: Vec<Dissipator>,
}

impl LindbladModel {
    pub fn new(
        drift: ComplexMatrix,
        controls: Vec<ComplexMatrix>,
        dissipators: Vec<Dissipator>,
    ) -> Result<Self> {
        let dim = drift.rows();
        let check = |name: &str, m: &ComplexMatrix| -> Result<()> {
            if !m.is_square() || m.rows() != dim {
                return Err(Error::dim(format!("{name} is {}x{}, expected {dim}x{dim}", m.rows(), m.cols())));
            }
            Ok(())
        };
        check("drift Hamiltonian", &drift)?;
        for (j, h) in std::iter::once(&drift).chain(&controls).enumerate() {
            check("control Hamiltonian", h)?;
            let r = h.hermiticity_residual();
            if r > HAMILTONIAN_HERMITIAN_TOL {
                return Err(Error::config(format!(
                    "Hamiltonian term {j} is not Hermitian (residual {r:.3e})"
                )));
            }
        }
        for d in &dissipators {
            check("Lindblad operator", &d.operator)?;
        }
        Ok(Self {
            dim,
            drift,
            controls,
            dissipators,
        })
    }

    /// Closed system with no dissipators.
    pub fn closed(drift: ComplexMatrix, controls: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(drift, controls, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    pub fn controls(&self) -> &[ComplexMatrix] {
        &self.controls
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    /// θ_0 H_0 + Σ_j θ_j u_j H_j
    pub fn hamiltonian(&self, theta: &UncertaintyTuple, amplitudes: &[f64]) -> ComplexMatrix {
        let mut h = self.drift.scale_real(theta.drift());
        for (j, (hj, u)) in self.controls.iter().zip(amplitudes).enumerate() {
            h.axpy(Complex64::new(theta.control(j) * u, 0.0), hj);
        }
        h
    }

    /// Σ_k γ_k D[L_k] X
    pub fn dissipate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for d in &self.dissipators {
            if d.rate != 0.0 {
                out.axpy(Complex64::new(d.rate, 0.0), &d.apply(x));
            }
        }
        out
    }

    /// −i[H, X] + Σ_k γ_k D[L_k] X for an arbitrary operator X.
    pub fn rhs(&self, x: &ComplexMatrix, h: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::commutator(h, x).scale(-I);
        out += &self.dissipate(x);
        out
    }

    fn generator_norm_bound(&self, h: &ComplexMatrix) -> f64 {
        let fro = |m: &ComplexMatrix| m.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        2.0 * fro(h)
            + self
                .dissipators
                .iter()
                .map(|d| 2.0 * d.rate * fro(&d.operator).powi(2))
                .sum::<f64>()
    }

    fn check_compatible(&self, control: &PiecewiseConstantControl, theta: &UncertaintyTuple) -> Result<()> {
        if control.channels() != self.controls.len() {
            return Err(Error::dim(format!(
                "control has {} channels, model has {}",
                control.channels(),
                self.controls.len()
            )));
        }
        if theta.channels() != self.controls.len() {
            return Err(Error::dim(format!(
                "uncertainty tuple has {} control multipliers, model has {} channels",
                theta.channels(),
                self.controls.len()
            )));
        }
        Ok(())
    }
}

/// Right-hand side of the master equation for state ρ and Hamiltonian H.
pub fn lindblad_rhs(rho: &DensityOperator, h: &ComplexMatrix, model: &LindbladModel) -> ComplexMatrix {
    model.rhs(rho.matrix(), h)
}

/// Propagates ρ0 through every control step and returns ρ(T).
pub fn propagate_lindblad(
    model: &LindbladModel,
    control: &PiecewiseConstantControl,
    theta: &UncertaintyTuple,
    rho0: &DensityOperator,
    integrator: Integrator,
) -> Result<DensityOperator> {
    let mut last = None;
    propagate_lindblad_with(model, control, theta, rho0, integrator, |_, rho| {
        last = Some(rho.clone())
    })?;
    Ok(last.expect("at least the initial state is visited"))
}

/// Like [`propagate_lindblad`] but returns the D + 1 states at the step
/// boundaries, starting with ρ0.
pub fn propagate_lindblad_trajectory(
    model: &LindbladModel,
    control: &PiecewiseConstantControl,
    theta: &UncertaintyTuple,
    rho0: &DensityOperator,
    integrator: Integrator,
) -> Result<Vec<DensityOperator>> {
    let mut traj = Vec::with_capacity(control.steps() + 1);
    propagate_lindblad_with(model, control, theta, rho0, integrator, |_, rho| {
        traj.push(rho.clone())
    })?;
    Ok(traj)
}

fn propagate_lindblad_with(
    model: &LindbladModel,
    control: &PiecewiseConstantControl,
    theta: &UncertaintyTuple,
    rho0: &DensityOperator,
    integrator: Integrator,
    mut visit: impl FnMut(usize, &DensityOperator),
) -> Result<()> {
    integrator.validate()?;
    model.check_compatible(control, theta)?;
    if rho0.dim() != model.dim() {
        return Err(Error::dim(format!(
            "{}-level state for a {}-level model",
            rho0.dim(),
            model.dim()
        )));
    }
    let mut amps = vec![0.0; control.channels()];
    let mut rho = rho0.matrix().clone();
    visit(0, rho0);
    for step in 0..control.steps() {
        control.at_step(step, &mut amps);
        let h = model.hamiltonian(theta, &amps);
        let norm = model.generator_norm_bound(&h);
        rho = advance_linear(integrator, &rho, control.dt(), norm, |x| model.rhs(x, &h));
        let drift = (rho.trace() - ONE).norm();
        if drift > TRACE_DRIFT_LIMIT || !drift.is_finite() {
            return Err(Error::Invariant(format!(
                "trace drifted by {drift:.3e} at step {step}"
            )));
        }
        visit(step + 1, &DensityOperator::from_matrix_unchecked(rho.clone()));
    }
    Ok(())
}
