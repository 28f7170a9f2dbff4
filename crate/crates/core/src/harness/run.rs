use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ProblemInstance, ProblemKind, TestMode};
use super::io::{
    drift_csv, genome_csv, history_csv, parse_genome_csv, read_text, report_csv, timing_csv, write_atomic,
};
use crate::error::{Error, Result};
use crate::optimizers::{optimize, seeded_rng, training_grid, Algorithm, OptimizerConfig, RunHistory};
use crate::problems::{
    free_drift_analysis, monte_carlo_test, noise_test, DriftSeries, ReportSummary, RobustProblem, RobustnessReport,
};

pub const CONFIG_FILE: &str = "config.resolved.toml";
pub const HISTORY_FILE: &str = "history.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const GENOME_FILE: &str = "genome.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const DRIFT_FILE: &str = "drift.csv";
pub const RECORD_FILE: &str = "record.toml";
pub const EVALUATION_FILE: &str = "evaluation.toml";

/// Build and seed information stored with every run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStamp {
    pub version: String,
    pub seed: u64,
}

impl RunStamp {
    pub fn new(seed: u64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }
}

/// Testing outcome of one genome.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Evaluation {
    pub report: RobustnessReport,
    /// Mean free-drift series after the control ends; consensus only.
    pub drift: Option<DriftSeries>,
}

/// Everything a training run produces.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub stamp: RunStamp,
    pub history: RunHistory,
    /// Absent when the run was interrupted before testing.
    pub evaluation: Option<Evaluation>,
}

impl RunRecord {
    pub fn genome(&self) -> &[f64] {
        &self.history.best_genome
    }

    pub fn summary(&self) -> RecordSummary {
        let opt = &self.config.optimizer;
        RecordSummary {
            version: self.stamp.version.clone(),
            seed: self.stamp.seed,
            problem: self.config.problem,
            algorithm: opt.algorithm,
            parameters: describe_parameters(opt),
            generations: self.history.generations(),
            interrupted: self.history.interrupted,
            evaluations: self.history.total_evaluations(),
            training_fitness: self.history.best_fitness,
            test: self.evaluation.as_ref().map(|e| TestSummary::new(&self.config, &e.report)),
        }
    }
}

/// Contents of `record.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordSummary {
    pub version: String,
    pub seed: u64,
    pub problem: ProblemKind,
    pub algorithm: Algorithm,
    pub parameters: String,
    pub generations: usize,
    pub interrupted: bool,
    pub evaluations: u64,
    /// Best averaged fitness on the algorithm's training samples.
    pub training_fitness: f64,
    pub test: Option<TestSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSummary {
    pub mode: TestMode,
    pub seed: u64,
    #[serde(flatten)]
    pub stats: ReportSummary,
}

impl TestSummary {
    fn new(config: &ExperimentConfig, report: &RobustnessReport) -> Self {
        Self {
            mode: config.test.mode,
            seed: config.test_seed(),
            stats: report.summary(),
        }
    }
}

/// Short human-readable parameter description used in comparison tables.
pub fn describe_parameters(c: &OptimizerConfig) -> String {
    match c.algorithm {
        Algorithm::MsmsDe if c.sample_parameters => format!(
            "NP={} F~N({},{}) CR~N({},{}) K={} pool={}",
            c.population,
            c.f_mean,
            c.f_std,
            c.cr_mean,
            c.cr_std,
            c.k,
            c.strategies.len()
        ),
        Algorithm::MsmsDe => format!(
            "NP={} F={} CR={} K={} pool={}",
            c.population,
            c.f,
            c.cr,
            c.k,
            c.strategies.len()
        ),
        Algorithm::MsDe | Algorithm::De1 => format!("NP={} F={} CR={}", c.population, c.f, c.cr),
        Algorithm::Ga => format!("NP={} Pc={} Pm={}", c.population, c.crossover_prob, c.mutation_prob),
    }
}

/// Runs `f` inside a pool of `threads` workers, or the global pool.
pub fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("cannot start {n} worker threads: {e}")))?
            .install(f)),
        None => Ok(f()),
    }
}

/// Resolves `config`, trains, and tests the best genome unless stopped early.
pub fn train(config: &ExperimentConfig, stop: Option<&AtomicBool>) -> Result<RunRecord> {
    let config = config.clone().resolve()?;
    let problem = config.build_problem()?;
    let grid = training_grid(config.optimizer.algorithm, &problem.grid());
    let history = optimize(problem.as_dyn(), &grid, &config.optimizer, config.seed, stop)?;
    if history.records.windows(2).any(|w| w[1].best_fitness < w[0].best_fitness)
        || history.records.iter().any(|r| r.mean_fitness > r.best_fitness)
    {
        return Err(Error::Invariant("best fitness decreased during training".into()));
    }
    let evaluation = if history.interrupted {
        None
    } else {
        Some(evaluate_with(&config, &problem, &history.best_genome)?)
    };
    Ok(RunRecord {
        stamp: RunStamp::new(config.seed),
        config,
        history,
        evaluation,
    })
}

/// Tests `genome` according to the configuration's test section.
pub fn evaluate(config: &ExperimentConfig, genome: &[f64]) -> Result<Evaluation> {
    let config = config.clone().resolve()?;
    let problem = config.build_problem()?;
    evaluate_with(&config, &problem, genome)
}

fn evaluate_with(config: &ExperimentConfig, problem: &ProblemInstance, genome: &[f64]) -> Result<Evaluation> {
    let dim = problem.as_dyn().dim();
    if genome.len() != dim {
        return Err(Error::dim(format!(
            "genome has {} values but the {} problem needs {dim}",
            genome.len(),
            config.problem.tag()
        )));
    }
    let spec = &config.test;
    in_pool(config.optimizer.threads, || {
        let mut rng = seeded_rng(config.test_seed());
        let p = problem.as_dyn();
        let report = match spec.mode {
            TestMode::MonteCarlo => monte_carlo_test(p, genome, spec.samples, &mut rng)?,
            TestMode::AdditiveNoise => noise_test(p, genome, spec.noise_fraction, spec.samples, &mut rng)?,
        };
        let drift = match problem {
            ProblemInstance::Consensus(c) => {
                let nominal = vec![vec![1.0; c.uncertain_params()]];
                let thetas = if report.is_empty() { &nominal } else { &report.thetas };
                let h0 = c.params().free_hamiltonian();
                let (horizon, dt) = (c.params().drift_horizon, c.params().drift_dt);
                let series = thetas
                    .par_iter()
                    .map(|t| free_drift_analysis(&c.final_state(genome, t)?, &h0, horizon, dt))
                    .collect::<Result<Vec<_>>>()?;
                Some(DriftSeries::mean(&series)?)
            }
            _ => None,
        };
        Ok(Evaluation { report, drift })
    })?
}

/// Output directory for a run: the configured one, or `runs/<problem>-<algorithm>-s<seed>`.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    match &config.output_dir {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from("runs").join(format!(
            "{}-{}-s{}",
            config.problem.tag(),
            config.optimizer.algorithm.tag(),
            config.seed
        )),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn channels(config: &ExperimentConfig) -> usize {
    match config.problem {
        ProblemKind::Ensemble => 1,
        ProblemKind::Consensus => 6,
        ProblemKind::Sphere | ProblemKind::NoisyLandscape => 1,
    }
}

fn write_evaluation(dir: &Path, evaluation: &Evaluation) -> Result<()> {
    write_atomic(&dir.join(REPORT_FILE), &report_csv(&evaluation.report))?;
    if let Some(drift) = &evaluation.drift {
        write_atomic(&dir.join(DRIFT_FILE), &drift_csv(drift))?;
    }
    Ok(())
}

/// Writes every file of a training run into `dir`.
pub fn write_run(dir: &Path, record: &RunRecord) -> Result<()> {
    ensure_dir(dir)?;
    write_atomic(&dir.join(CONFIG_FILE), &record.config.to_toml_string()?)?;
    write_atomic(&dir.join(HISTORY_FILE), &history_csv(&record.history))?;
    write_atomic(&dir.join(TIMING_FILE), &timing_csv(&record.history))?;
    write_atomic(&dir.join(GENOME_FILE), &genome_csv(record.genome(), channels(&record.config))?)?;
    if let Some(e) = &record.evaluation {
        write_evaluation(dir, e)?;
    }
    let summary = toml::to_string(&record.summary())
        .map_err(|e| Error::config(format!("cannot serialize run record: {e}")))?;
    write_atomic(&dir.join(RECORD_FILE), &summary)
}

/// Writes the files of a standalone evaluation into `dir`.
pub fn write_evaluation_dir(dir: &Path, config: &ExperimentConfig, evaluation: &Evaluation) -> Result<()> {
    ensure_dir(dir)?;
    write_evaluation(dir, evaluation)?;
    let summary = TestSummary::new(config, &evaluation.report);
    let text = toml::to_string(&summary).map_err(|e| Error::config(format!("cannot serialize report: {e}")))?;
    write_atomic(&dir.join(EVALUATION_FILE), &text)
}

pub fn read_genome(path: &Path) -> Result<Vec<f64>> {
    parse_genome_csv(&read_text(path)?, &path.display().to_string())
}

pub fn read_record(dir: &Path) -> Result<RecordSummary> {
    let path = dir.join(RECORD_FILE);
    toml::from_str(&read_text(&path)?).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
