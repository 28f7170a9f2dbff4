//! Evolutionary search engines maximizing a fitness averaged over an
//! uncertainty grid: the mixed-strategy DE with sampled F/CR, fixed-strategy
//! DE/rand/1/bin and a real-coded GA.
//!
//! All random decisions are drawn sequentially from one seeded stream in a
//! fixed order, and only fitness evaluation runs in parallel, so results do
//! not depend on the number of worker threads.

mod de;
mod ga;
mod history;

pub use de::{
    crossover, initialize, mutate, mutate_with, repair_bounds, run_basic_de, run_msms_de, sample_cr, sample_f, select,
    select_strategy, Population,
};
pub use ga::run_ga;
pub use history::{GenerationRecord, RunHistory};

use std::sync::atomic::AtomicBool;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{RobustProblem, UncertaintySampleGrid};

/// The seeded generator used by every engine.
pub type OptimizerRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> OptimizerRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Mixed four-strategy DE with sampled F and CR over the training grid.
    MsmsDe,
    /// DE/rand/1/bin with fixed F, CR over the training grid.
    MsDe,
    /// DE/rand/1/bin with fixed F, CR on the nominal sample only.
    De1,
    /// Real-coded GA over the training grid.
    Ga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::MsmsDe, Algorithm::MsDe, Algorithm::De1, Algorithm::Ga];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::MsmsDe => "msms_de",
            Algorithm::MsDe => "ms_de",
            Algorithm::De1 => "de1",
            Algorithm::Ga => "ga",
        }
    }

    /// False for the single-sample baseline, which trains on θ = 1 only.
    pub fn uses_grid(self) -> bool {
        self != Algorithm::De1
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::config(format!("unknown algorithm '{s}' (expected msms_de, ms_de, de1 or ga)")))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// DE mutation strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// V = X_r1 + F(X_r2 − X_r3)
    Rand1,
    /// V = X_i + F(X_best − X_i) + F(X_r1 − X_r2) + F(X_r3 − X_r4)
    RandToBest2,
    /// V = X_r1 + F(X_r2 − X_r3) + F(X_r4 − X_r5)
    Rand2,
    /// V = X_i + K(X_r1 − X_i) + F(X_r2 − X_r3)
    CurrentToRand1,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Rand1,
        Strategy::RandToBest2,
        Strategy::Rand2,
        Strategy::CurrentToRand1,
    ];

    /// Number of distinct indices, all different from i, the strategy needs.
    pub fn index_demand(self) -> usize {
        match self {
            Strategy::Rand1 | Strategy::CurrentToRand1 => 3,
            Strategy::RandToBest2 => 4,
            Strategy::Rand2 => 5,
        }
    }

    /// Position 0..4 in [`Strategy::ALL`].
    pub fn ordinal(self) -> usize {
        match self {
            Strategy::Rand1 => 0,
            Strategy::RandToBest2 => 1,
            Strategy::Rand2 => 2,
            Strategy::CurrentToRand1 => 3,
        }
    }
}

/// Search settings shared by all engines. Fields irrelevant to an algorithm
/// are ignored by it but still recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    /// Population size NP.
    pub population: usize,
    pub max_generations: usize,
    /// Fixed scale factor for ms_de/de1, and for msms_de when sampling is off.
    pub f: f64,
    /// Fixed crossover rate for ms_de/de1, and for msms_de when sampling is off.
    pub cr: f64,
    /// Whether msms_de draws F and CR per individual.
    pub sample_parameters: bool,
    pub f_mean: f64,
    pub f_std: f64,
    pub cr_mean: f64,
    pub cr_std: f64,
    /// Coefficient K of the current-to-rand strategy.
    pub k: f64,
    /// Strategy pool of msms_de, chosen uniformly by pp.
    pub strategies: Vec<Strategy>,
    /// GA crossover probability P_c.
    pub crossover_prob: f64,
    /// GA per-gene mutation probability P_m.
    pub mutation_prob: f64,
    /// GA mutation standard deviation as a fraction of each gene's range.
    pub mutation_scale: f64,
    /// Worker threads for fitness evaluation; `None` uses all cores.
    pub threads: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::MsmsDe,
            population: 50,
            max_generations: 2000,
            f: 0.9,
            cr: 0.1,
            sample_parameters: true,
            f_mean: 0.5,
            f_std: 0.3,
            cr_mean: 0.5,
            cr_std: 0.1,
            k: 0.5,
            strategies: Strategy::ALL.to_vec(),
            crossover_prob: 0.8,
            mutation_prob: 0.05,
            mutation_scale: 0.05,
            threads: None,
        }
    }
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::config("genome dimension must be at least 1"));
        }
        let min_pop = match self.algorithm {
            Algorithm::Ga => 2,
            // Enough distinct donors for the widest strategy, whichever is used.
            _ => Strategy::Rand2.index_demand(),
        };
        if self.population < min_pop {
            return Err(Error::config(format!(
                "population {} is too small for {} (needs at least {min_pop})",
                self.population, self.algorithm
            )));
        }
        if self.algorithm == Algorithm::MsmsDe {
            if self.strategies.is_empty() {
                return Err(Error::config("strategy pool is empty"));
            }
            let demand = self.strategies.iter().map(|s| s.index_demand()).max().unwrap_or(0);
            if self.population < demand + 1 {
                return Err(Error::config(format!(
                    "population {} cannot supply {demand} distinct donors",
                    self.population
                )));
            }
        }
        let finite = [
            self.f,
            self.cr,
            self.f_mean,
            self.f_std,
            self.cr_mean,
            self.cr_std,
            self.k,
            self.mutation_scale,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("optimizer parameters must be finite"));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::config(format!("CR must lie in [0, 1], got {}", self.cr)));
        }
        if self.f_std < 0.0 || self.cr_std < 0.0 || self.mutation_scale < 0.0 {
            return Err(Error::config("standard deviations must be non-negative"));
        }
        if self.cr_std == 0.0 && !(0.0..=1.0).contains(&self.cr_mean) {
            return Err(Error::config("CR distribution never yields a value in [0, 1]"));
        }
        for (name, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads must be at least 1"));
        }
        Ok(())
    }
}

/// Grid an algorithm trains on: the problem grid, or the nominal sample for DE1.
pub fn training_grid(algorithm: Algorithm, problem_grid: &UncertaintySampleGrid) -> UncertaintySampleGrid {
    if algorithm.uses_grid() {
        problem_grid.clone()
    } else {
        let n_params = problem_grid.tuples().first().map_or(0, |t| t.len());
        UncertaintySampleGrid::nominal(n_params)
    }
}

/// Runs the configured algorithm from `seed`, in a dedicated thread pool when
/// `config.threads` is set. A raised `stop` flag ends the run after the
/// current generation.
pub fn optimize<P: RobustProblem + ?Sized>(
    problem: &P,
    grid: &UncertaintySampleGrid,
    config: &OptimizerConfig,
    seed: u64,
    stop: Option<&AtomicBool>,
) -> Result<RunHistory> {
    let run = || {
        let mut rng = seeded_rng(seed);
        match config.algorithm {
            Algorithm::MsmsDe => run_msms_de(problem, grid, config, &mut rng, stop),
            Algorithm::MsDe | Algorithm::De1 => run_basic_de(problem, grid, config, &mut rng, stop),
            Algorithm::Ga => run_ga(problem, grid, config, &mut rng, stop),
        }
    };
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("cannot start {n} worker threads: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Averaged fitness of each genome, in order.
pub(crate) fn evaluate_all<P: RobustProblem + ?Sized>(
    problem: &P,
    grid: &UncertaintySampleGrid,
    genomes: &[Vec<f64>],
) -> Result<Vec<f64>> {
    genomes
        .par_iter()
        .map(|g| {
            problem
                .averaged_fitness(g, grid)
                .and_then(|(mean, _)| {
                    if mean.is_finite() {
                        Ok(mean)
                    } else {
                        Err(Error::Invariant(format!("non-finite fitness {mean}")))
                    }
                })
                .map_err(|e| Error::Evaluation {
                    reason: e.to_string(),
                    genome: format_genome(g),
                })
        })
        .collect()
}

fn format_genome(g: &[f64]) -> String {
    let parts: Vec<String> = g.iter().map(|x| format!("{x:e}")).collect();
    format!("[{}]", parts.join(","))
}

pub(crate) fn is_stopped(stop: Option<&AtomicBool>) -> bool {
    stop.is_some_and(|s| s.load(std::sync::atomic::Ordering::SeqCst))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.tag().parse::<Algorithm>().unwrap(), a);
        }
        assert!("pso".parse::<Algorithm>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        assert!(c.validate(10).is_ok());
        assert!(c.validate(0).is_err());
        c.population = 4;
        assert!(c.validate(10).is_err());
        c.population = 5;
        // rand/2 needs five donors besides the target
        assert!(c.validate(10).is_err());
        c.population = 6;
        assert!(c.validate(10).is_ok());
        c.cr = 1.5;
        assert!(c.validate(10).is_err());
        c.cr = 0.1;
        c.strategies.clear();
        assert!(c.validate(10).is_err());
        c.strategies = vec![Strategy::Rand1];
        c.population = 4;
        assert!(c.validate(10).is_err());
        c.population = 5;
        assert!(c.validate(10).is_ok());
        c.threads = Some(0);
        assert!(c.validate(10).is_err());
    }

    #[test]
    fn config_toml_round_trip() {
        let c = OptimizerConfig {
            strategies: vec![Strategy::Rand2, Strategy::CurrentToRand1],
            threads: Some(3),
            ..OptimizerConfig::new(Algorithm::Ga)
        };
        let text = toml::to_string(&c).unwrap();
        let back: OptimizerConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
