use rand::Rng;

use crate::dynamics::{build_bloch_system, evolve_free, propagate_lindblad, RealMatrix, UncertaintyTuple};
use crate::error::Result;
use crate::optimizers::seeded_rng;
use crate::problems::{
    fidelity_objective, ConsensusBackend, ConsensusParams, ConsensusProblem, EnsembleBackend, EnsembleParams,
    EnsembleProblem, RobustProblem,
};
use crate::quantum_state::{
    partial_trace, random_density, to_coherent, ComplexMatrix, DensityOperator, GeneratorBasis,
};

const VERIFY_SEED: u64 = 0x5eed;
const RANDOM_CONTROLS: usize = 20;

/// One analytic check: a measured residual against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl VerificationCheck {
    fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            residual,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual < self.tolerance
    }
}

/// Coherent-vector flow of the two-level ensemble written out by hand, at
/// θ_0 = 1: (drift, offset, control coupling) for control phase `phi`.
pub fn reference_ensemble_flow(phi: f64) -> (RealMatrix, Vec<f64>, RealMatrix) {
    let (c, s) = (phi.cos(), phi.sin());
    let drift = RealMatrix::from_rows(&[&[-0.045, -1.0, 0.0], &[1.0, -0.045, 0.0], &[0.0, 0.0, -0.05]]);
    let control = RealMatrix::from_rows(&[
        &[0.0, 0.0, -2.0 * s],
        &[0.0, 0.0, 2.0 * c],
        &[2.0 * s, -2.0 * c, 0.0],
    ]);
    (drift, vec![0.0, 0.0, 0.03], control)
}

/// Largest entry-wise deviation of the derived ensemble flow from
/// [`reference_ensemble_flow`], over several control phases.
pub fn ensemble_flow_residuals() -> Result<(f64, f64, f64)> {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for phi in [0.0, 0.3, std::f64::consts::FRAC_PI_2, 2.1] {
        let params = EnsembleParams {
            phi,
            ..EnsembleParams::default()
        };
        let basis = GeneratorBasis::new(2)?;
        let flow = build_bloch_system(&params.model()?, &basis)?;
        let (drift, offset, control) = reference_ensemble_flow(phi);
        worst.0 = worst.0.max(flow.drift(1.0).max_abs_diff(&drift));
        let off = flow
            .offset
            .iter()
            .zip(&offset)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst.1 = worst.1.max(off);
        worst.2 = worst.2.max(flow.controls[0].max_abs_diff(&control));
    }
    Ok(worst)
}

fn random_genome<R: Rng + ?Sized>(problem: &dyn RobustProblem, rng: &mut R) -> Vec<f64> {
    problem
        .bounds()
        .iter()
        .map(|b| rng.random_range(b.lo..=b.hi))
        .collect()
}

/// Runs every analytic check. Checks never short-circuit; the caller decides
/// what a failure means.
pub fn run_verification() -> Result<Vec<VerificationCheck>> {
    let mut checks = Vec::new();
    let mut rng = seeded_rng(VERIFY_SEED);

    let (drift, offset, control) = ensemble_flow_residuals()?;
    checks.push(VerificationCheck::new("ensemble flow: drift coefficients", drift, 1e-10));
    checks.push(VerificationCheck::new("ensemble flow: offset", offset, 1e-10));
    checks.push(VerificationCheck::new("ensemble flow: control coupling", control, 1e-10));

    let params = ConsensusParams::default();
    let h0 = params.free_hamiltonian();
    let target = DensityOperator::uniform_superposition(8);
    let half = DensityOperator::uniform_superposition(2);
    let mut reduced = 0.0f64;
    for k in 0..3 {
        let r = partial_trace(&target, &[2, 2, 2], k)?;
        reduced = reduced.max((r.matrix() - half.matrix()).max_abs());
    }
    checks.push(VerificationCheck::new("consensus target: reduced states equal |+><+|", reduced, 1e-12));
    let comm = ComplexMatrix::commutator(&h0, target.matrix()).max_abs();
    checks.push(VerificationCheck::new("consensus target: [H0, rho] max entry", comm, 1e-12));
    let evolved = evolve_free(&h0, &target, 20.0);
    let change = (evolved.matrix() - target.matrix()).max_abs();
    checks.push(VerificationCheck::new("consensus target: free evolution over T=20", change, 1e-9));

    let basis = GeneratorBasis::new(2)?;
    let mut bound = 0.0f64;
    for _ in 0..200 {
        let a = to_coherent(&random_density(2, &mut rng), &basis)?;
        let b = to_coherent(&random_density(2, &mut rng), &basis)?;
        let j = fidelity_objective(&a, &b, 2);
        bound = bound.max(-j).max(j - 1.0);
        bound = bound.max((fidelity_objective(&a, &a, 2) - 1.0).abs());
    }
    let up = to_coherent(&DensityOperator::basis_state(2, 0), &basis)?;
    let down = to_coherent(&DensityOperator::basis_state(2, 1), &basis)?;
    bound = bound.max(fidelity_objective(&up, &down, 2).abs());
    checks.push(VerificationCheck::new("fidelity: bounds and extremes", bound, 1e-12));

    let ensemble = EnsembleProblem::new(EnsembleParams::default())?;
    let lindblad = EnsembleProblem::new(EnsembleParams {
        backend: EnsembleBackend::Lindblad,
        ..EnsembleParams::default()
    })?;
    let (mut herm, mut trace, mut neg, mut agree) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..RANDOM_CONTROLS {
        let g = random_genome(&ensemble, &mut rng);
        let theta = [rng.random_range(0.8..=1.2), rng.random_range(0.8..=1.2)];
        let control = ensemble.control(&g)?;
        let tuple = UncertaintyTuple::new(theta.to_vec())?;
        let rho = propagate_lindblad(
            ensemble.model(),
            &control,
            &tuple,
            ensemble.initial_state(),
            ensemble.params().integrator,
        )?;
        let (h, t, min_eig) = DensityOperator::invariant_residuals(rho.matrix());
        herm = herm.max(h);
        trace = trace.max(t);
        neg = neg.max(-min_eig);
        let a = ensemble.final_bloch(&g, &theta)?;
        let b = lindblad.final_bloch(&g, &theta)?;
        let d = a
            .components()
            .iter()
            .zip(b.components())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        agree = agree.max(d);
    }
    checks.push(VerificationCheck::new("lindblad propagation: hermiticity", herm, 1e-9));
    checks.push(VerificationCheck::new("lindblad propagation: trace", trace, 1e-9));
    checks.push(VerificationCheck::new("lindblad propagation: negative eigenvalue", neg, 1e-8));
    checks.push(VerificationCheck::new("ensemble: bloch vs lindblad backend", agree, 1e-8));

    let consensus = ConsensusProblem::new(ConsensusParams {
        backend: ConsensusBackend::Density,
        ..ConsensusParams::default()
    })?;
    let mut purity = 0.0f64;
    for _ in 0..RANDOM_CONTROLS / 4 {
        let g = random_genome(&consensus, &mut rng);
        let theta = [rng.random_range(0.98..=1.02), rng.random_range(0.98..=1.02)];
        let rho = consensus.final_state(&g, &theta)?;
        purity = purity.max((rho.purity() - 1.0).abs());
    }
    checks.push(VerificationCheck::new("closed propagation: purity drift", purity, 1e-9));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_verification().unwrap();
        assert!(checks.len() >= 10);
        for c in &checks {
            assert!(c.passed(), "{} residual {:e} >= {:e}", c.name, c.residual, c.tolerance);
        }
    }
}
