use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::{Algorithm, OptimizerConfig};
use crate::problems::{
    make_grid, ConsensusParams, ConsensusProblem, EnsembleParams, EnsembleProblem, NoisyLandscape, RobustProblem,
    Sphere, UncertaintySampleGrid,
};

/// Generation limit used by `--full-scale`.
pub const FULL_SCALE_GENERATIONS: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Ensemble,
    Consensus,
    Sphere,
    NoisyLandscape,
}

impl ProblemKind {
    pub fn tag(self) -> &'static str {
        match self {
            ProblemKind::Ensemble => "ensemble",
            ProblemKind::Consensus => "consensus",
            ProblemKind::Sphere => "sphere",
            ProblemKind::NoisyLandscape => "noisy-landscape",
        }
    }

    /// Desk-scale generation limit.
    pub fn default_generations(self) -> usize {
        match self {
            ProblemKind::Ensemble => 2000,
            ProblemKind::Consensus => 3000,
            ProblemKind::Sphere | ProblemKind::NoisyLandscape => 500,
        }
    }

    pub fn default_population(self) -> usize {
        match self {
            ProblemKind::Consensus => 100,
            _ => 50,
        }
    }
}

/// Settings of the two synthetic benchmark problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkParams {
    pub sphere_dim: usize,
    pub landscape_dim: usize,
    pub landscape_uncertainty: f64,
    pub landscape_grid_points: usize,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        Self {
            sphere_dim: Sphere::DEFAULT_DIM,
            landscape_dim: NoisyLandscape::DEFAULT_DIM,
            landscape_uncertainty: NoisyLandscape::DEFAULT_UNCERTAINTY,
            landscape_grid_points: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    /// Uniformly drawn uncertainty tuples.
    MonteCarlo,
    /// Additively perturbed genomes at nominal θ.
    AdditiveNoise,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestSpec {
    pub mode: TestMode,
    pub samples: usize,
    /// Seed of the testing stream; defaults to the training seed plus one.
    pub seed: Option<u64>,
    pub noise_fraction: f64,
}

impl Default for TestSpec {
    fn default() -> Self {
        Self {
            mode: TestMode::MonteCarlo,
            samples: 2000,
            seed: None,
            noise_fraction: 0.075,
        }
    }
}

/// A complete experiment description. Unset optional values are filled in by
/// [`ExperimentConfig::resolve`], and the resolved form is what runs write out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub test: TestSpec,
    #[serde(default)]
    pub ensemble: EnsembleParams,
    #[serde(default)]
    pub consensus: ConsensusParams,
    #[serde(default)]
    pub benchmark: BenchmarkParams,
}

/// Command-line adjustments applied on top of a configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub algorithm: Option<Algorithm>,
    pub max_generations: Option<usize>,
    pub threads: Option<usize>,
    pub full_scale: bool,
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemKind) -> Self {
        Self {
            problem,
            seed: 0,
            output_dir: None,
            optimizer: OptimizerConfig {
                population: problem.default_population(),
                max_generations: problem.default_generations(),
                ..OptimizerConfig::default()
            },
            test: TestSpec::default(),
            ensemble: EnsembleParams::default(),
            consensus: ConsensusParams::default(),
            benchmark: BenchmarkParams::default(),
        }
    }

    /// Parses a configuration document. Population size and generation limit
    /// take per-problem defaults when the document leaves them out.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |e: toml::de::Error| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        };
        let mut config: Self = toml::from_str(text).map_err(parse_err)?;
        let table: toml::Table = toml::from_str(text).map_err(parse_err)?;
        let given = |key: &str| {
            table
                .get("optimizer")
                .and_then(|o| o.as_table())
                .is_some_and(|o| o.contains_key(key))
        };
        if !given("population") {
            config.optimizer.population = config.problem.default_population();
        }
        if !given("max_generations") {
            config.optimizer.max_generations = config.problem.default_generations();
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize configuration: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(a) = o.algorithm {
            self.optimizer.algorithm = a;
        }
        if o.full_scale {
            self.optimizer.max_generations = FULL_SCALE_GENERATIONS;
        }
        if let Some(g) = o.max_generations {
            self.optimizer.max_generations = g;
        }
        if let Some(t) = o.threads {
            self.optimizer.threads = Some(t);
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = Some(d.clone());
        }
    }

    /// Fills every defaulted value explicitly and validates the result.
    pub fn resolve(mut self) -> Result<Self> {
        self.test.seed.get_or_insert(self.seed.wrapping_add(1));
        if !(0.0..1.0).contains(&self.test.noise_fraction) {
            return Err(Error::config(format!(
                "test.noise_fraction must lie in [0, 1), got {}",
                self.test.noise_fraction
            )));
        }
        let problem = self.build_problem()?;
        self.optimizer.validate(problem.as_dyn().dim())?;
        Ok(self)
    }

    pub fn test_seed(&self) -> u64 {
        self.test.seed.unwrap_or(self.seed.wrapping_add(1))
    }

    pub fn build_problem(&self) -> Result<ProblemInstance> {
        Ok(match self.problem {
            ProblemKind::Ensemble => ProblemInstance::Ensemble(EnsembleProblem::new(self.ensemble.clone())?),
            ProblemKind::Consensus => ProblemInstance::Consensus(ConsensusProblem::new(self.consensus.clone())?),
            ProblemKind::Sphere => ProblemInstance::Sphere(Sphere::new(self.benchmark.sphere_dim)?),
            ProblemKind::NoisyLandscape => {
                let b = &self.benchmark;
                let grid = make_grid(b.landscape_uncertainty, b.landscape_grid_points, 2)?;
                ProblemInstance::Landscape(NoisyLandscape::new(b.landscape_dim, b.landscape_uncertainty)?, grid)
            }
        })
    }
}

/// A constructed problem together with its training grid.
#[derive(Clone, Debug)]
pub enum ProblemInstance {
    Ensemble(EnsembleProblem),
    Consensus(ConsensusProblem),
    Sphere(Sphere),
    Landscape(NoisyLandscape, UncertaintySampleGrid),
}

impl ProblemInstance {
    pub fn as_dyn(&self) -> &dyn RobustProblem {
        match self {
            ProblemInstance::Ensemble(p) => p,
            ProblemInstance::Consensus(p) => p,
            ProblemInstance::Sphere(p) => p,
            ProblemInstance::Landscape(p, _) => p,
        }
    }

    pub fn grid(&self) -> UncertaintySampleGrid {
        match self {
            ProblemInstance::Ensemble(p) => p.grid().clone(),
            ProblemInstance::Consensus(p) => p.grid().clone(),
            ProblemInstance::Sphere(_) => UncertaintySampleGrid::nominal(0),
            ProblemInstance::Landscape(_, g) => g.clone(),
        }
    }
}
