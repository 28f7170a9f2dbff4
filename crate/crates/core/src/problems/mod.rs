//! Robust control problems and the machinery to score them: fitness
//! functions, uncertainty grids, Monte-Carlo robustness tests and consensus
//! diagnostics.

mod benchmarks;
mod consensus;
mod ensemble;
mod grid;
mod noise;
mod robustness;

pub use benchmarks::{NoisyLandscape, Sphere};
pub use consensus::{
    check_consensus, consensus_fitness, consensus_initial_state, free_drift_analysis, ConsensusBackend, ConsensusCheck, ConsensusParams,
    ConsensusProblem, DriftSeries, APPROX_CONSENSUS_TOL, EXACT_CONSENSUS_TOL,
};
pub use ensemble::{ensemble_fitness, EnsembleBackend, EnsembleParams, EnsembleProblem};
pub use grid::{make_grid, UncertaintySampleGrid};
pub use noise::{additive_noise_samples, NoiseMode};
pub use robustness::{monte_carlo_test, noise_test, sample_uniform_tuples, ReportSummary, RobustnessReport};

use crate::dynamics::Bounds;
use crate::error::Result;
use crate::quantum_state::CoherentVector;

/// J = 1 − n/(8(n−1)) ‖y_f − y(T)‖².
pub fn fidelity_objective(target: &CoherentVector, reached: &CoherentVector, n: usize) -> f64 {
    assert_eq!(
        target.components().len(),
        reached.components().len(),
        "coherent vectors of different length"
    );
    fidelity_from_distance(target.distance_sqr(reached), n)
}

#[inline]
pub(crate) fn fidelity_from_distance(dist_sqr: f64, n: usize) -> f64 {
    let n = n as f64;
    1.0 - n / (8.0 * (n - 1.0)) * dist_sqr
}

/// A maximization problem whose fitness depends on uncertain multipliers.
pub trait RobustProblem: Sync {
    /// Short identifier used in result files.
    fn name(&self) -> &str;

    /// Genome length.
    fn dim(&self) -> usize {
        self.bounds().len()
    }

    /// Per-component bounds of the genome.
    fn bounds(&self) -> &[Bounds];

    /// Number of uncertain multipliers in a sample tuple.
    fn uncertain_params(&self) -> usize;

    /// Uncertainty bound E used for testing.
    fn uncertainty_bound(&self) -> f64;

    /// Number of control channels the genome is split into (channel-major).
    fn channels(&self) -> usize {
        1
    }

    /// Fitness of `genome` for one uncertainty sample.
    fn fitness(&self, genome: &[f64], theta: &[f64]) -> Result<f64>;

    /// Mean fitness over a grid plus the per-sample values.
    fn averaged_fitness(&self, genome: &[f64], grid: &UncertaintySampleGrid) -> Result<(f64, Vec<f64>)> {
        let per_sample = grid
            .tuples()
            .iter()
            .map(|t| self.fitness(genome, t))
            .collect::<Result<Vec<_>>>()?;
        let mean = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
        Ok((mean, per_sample))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_examples() {
        let a = CoherentVector::new(2, vec![0., 0., -1.]).unwrap();
        let b = CoherentVector::new(2, vec![0., 0., 1.]).unwrap();
        assert_eq!(fidelity_objective(&a, &a, 2), 1.0);
        assert_eq!(fidelity_objective(&a, &b, 2), 0.0);
        // n = 8: 1 − 8/56 · 0.7 = 0.9
        assert!((fidelity_from_distance(0.7, 8) - 0.9).abs() < 1e-15);
    }
}
