use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{additive_noise_samples, NoiseMode};
use super::RobustProblem;
use crate::error::Result;

/// Per-sample fitness of one genome, with the sample that produced each value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RobustnessReport {
    /// Uncertainty tuple per sample.
    pub thetas: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// Summary statistics of a report. Empty reports give NaN statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (n − 1 denominator; 0 for a single sample).
    pub std: f64,
}

impl RobustnessReport {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn std(&self) -> f64 {
        match self.values.len() {
            0 => f64::NAN,
            1 => 0.0,
            n => {
                // Shifted two-sum form; exactly zero when all values agree.
                let k = self.values[0];
                let (s, s2) = self
                    .values
                    .iter()
                    .fold((0.0, 0.0), |(s, s2), v| (s + (v - k), s2 + (v - k) * (v - k)));
                ((s2 - s * s / n as f64).max(0.0) / (n - 1) as f64).sqrt()
            }
        }
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            count: self.len(),
            mean: self.mean(),
            min: self.min(),
            max: self.max(),
            std: self.std(),
        }
    }
}

/// `count` tuples drawn uniformly from [1 − e, 1 + e]^n_params, tuple-major.
pub fn sample_uniform_tuples<R: Rng + ?Sized>(count: usize, n_params: usize, e: f64, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            (0..n_params)
                .map(|_| 1.0 - e + 2.0 * e * rng.random::<f64>())
                .collect()
        })
        .collect()
}

/// Scores `genome` on `n_samples` uniformly drawn uncertainty tuples. All
/// draws happen before the (parallel) evaluation.
pub fn monte_carlo_test<P: RobustProblem + ?Sized, R: Rng + ?Sized>(
    problem: &P,
    genome: &[f64],
    n_samples: usize,
    rng: &mut R,
) -> Result<RobustnessReport> {
    let thetas = sample_uniform_tuples(n_samples, problem.uncertain_params(), problem.uncertainty_bound(), rng);
    let values = thetas
        .par_iter()
        .map(|t| problem.fitness(genome, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(RobustnessReport { thetas, values })
}

/// Scores `count` additively perturbed copies of `genome` at nominal θ.
pub fn noise_test<P: RobustProblem + ?Sized, R: Rng + ?Sized>(
    problem: &P,
    genome: &[f64],
    fraction: f64,
    count: usize,
    rng: &mut R,
) -> Result<RobustnessReport> {
    let genomes = additive_noise_samples(genome, problem.bounds(), fraction, NoiseMode::Testing { count }, rng)?;
    let nominal = vec![1.0; problem.uncertain_params()];
    let values = genomes
        .par_iter()
        .map(|g| problem.fitness(g, &nominal))
        .collect::<Result<Vec<_>>>()?;
    Ok(RobustnessReport {
        thetas: vec![nominal; count],
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{EnsembleParams, EnsembleProblem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn statistics() {
        let r = RobustnessReport {
            thetas: vec![vec![]; 4],
            values: vec![1.0, 2.0, 3.0, 4.0],
        };
        let s = r.summary();
        assert_eq!((s.count, s.mean, s.min, s.max), (4, 2.5, 1.0, 4.0));
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let empty = RobustnessReport::default().summary();
        assert_eq!(empty.count, 0);
        assert!(empty.mean.is_nan());
    }

    #[test]
    fn tuples_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = sample_uniform_tuples(500, 2, 0.2, &mut rng);
        assert!(t.iter().flatten().all(|x| (0.8..=1.2).contains(x)));
    }

    #[test]
    fn zero_bound_gives_identical_samples() {
        let p = EnsembleProblem::new(EnsembleParams {
            uncertainty_bound: 0.0,
            ..EnsembleParams::default()
        })
        .unwrap();
        let g: Vec<f64> = (0..200).map(|k| ((k as f64) * 0.2).sin()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = monte_carlo_test(&p, &g, 20, &mut rng).unwrap();
        assert_eq!(r.std(), 0.0);
    }

    #[test]
    fn seeded_reports_repeat() {
        let p = EnsembleProblem::new(EnsembleParams::default()).unwrap();
        let g: Vec<f64> = (0..200).map(|k| 3.0 * ((k as f64) * 0.2).cos()).collect();
        let a = monte_carlo_test(&p, &g, 30, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = monte_carlo_test(&p, &g, 30, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }
}
