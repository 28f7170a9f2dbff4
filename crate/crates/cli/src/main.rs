use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use qrobust::harness::{
    evaluate, output_dir, read_genome, run_verification, train, write_evaluation_dir, write_atomic, write_run,
    ComparisonTable, ExperimentConfig, Overrides,
};
use qrobust::{Algorithm, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Robust quantum control by sampling-based differential evolution.
#[derive(Parser, Debug)]
#[command(name = "qrobust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a control field and test the result.
    Train(TrainArgs),
    /// Test a stored genome.
    Evaluate(EvaluateArgs),
    /// Run the built-in analytic checks.
    Verify,
    /// Tabulate finished runs of one problem.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Training seed; the test seed defaults to this plus one.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// msms_de, ms_de, de1 or ga.
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Generation limit.
    #[arg(long)]
    gmax: Option<usize>,
    /// Worker threads for fitness evaluation.
    #[arg(long)]
    threads: Option<usize>,
    /// Use the long generation limit unless --gmax is also given.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Experiment configuration (TOML); its test section is used.
    #[arg(long)]
    config: PathBuf,
    /// Genome file written by `train`.
    #[arg(long)]
    genome: PathBuf,
    /// Test seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of test samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory; defaults to the genome's directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Run directories.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Also write comparison.csv and comparison.md here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Train(a) => run_train(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Verify => run_verify(),
        Command::Compare(a) => run_compare(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Invariant(_)) | Some(Error::Evaluation { .. }) | Some(Error::InvalidState(_)) => EXIT_RUNTIME,
        _ => EXIT_USAGE,
    }
}

fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
    Ok(ExperimentConfig::load(path)?)
}

fn run_train(a: TrainArgs) -> anyhow::Result<u8> {
    let mut config = load(&a.config)?;
    config.apply(&Overrides {
        seed: a.seed,
        algorithm: a.algorithm,
        max_generations: a.gmax,
        threads: a.threads,
        full_scale: a.full_scale,
        output_dir: a.out.map(|p| p.display().to_string()),
    });
    let config = config.resolve()?;
    let dir = output_dir(&config);

    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)).context("cannot install interrupt handler")?;

    let record = train(&config, Some(&stop))?;
    write_run(&dir, &record)?;
    let h = &record.history;
    println!(
        "{} {} seed {}: {} generations, training fitness {:.6}",
        config.problem.tag(),
        config.optimizer.algorithm,
        config.seed,
        h.generations(),
        h.best_fitness
    );
    match &record.evaluation {
        Some(e) if !e.report.is_empty() => {
            let s = e.report.summary();
            println!(
                "test ({} samples): mean {:.6} min {:.6} max {:.6} std {:.3e}",
                s.count, s.mean, s.min, s.max, s.std
            );
        }
        Some(_) => println!("test: no samples requested"),
        None => eprintln!("interrupted; results up to generation {} written", h.generations()),
    }
    println!("results in {}", dir.display());
    Ok(0)
}

fn run_evaluate(a: EvaluateArgs) -> anyhow::Result<u8> {
    let mut config = load(&a.config)?;
    if let Some(seed) = a.seed {
        config.test.seed = Some(seed);
    }
    if let Some(n) = a.samples {
        config.test.samples = n;
    }
    if a.threads.is_some() {
        config.optimizer.threads = a.threads;
    }
    let config = config.resolve()?;
    let genome = read_genome(&a.genome)?;
    let evaluation = evaluate(&config, &genome)?;
    let dir = match a.out {
        Some(d) => d,
        None => a
            .genome
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    write_evaluation_dir(&dir, &config, &evaluation)?;
    let s = evaluation.report.summary();
    if s.count == 0 {
        println!("no samples requested; empty report written");
    } else {
        println!(
            "{} samples: mean {:.6} min {:.6} max {:.6} std {:.3e}",
            s.count, s.mean, s.min, s.max, s.std
        );
    }
    if let Some(d) = &evaluation.drift {
        let worst = d.max_pairwise().into_iter().fold(0.0, f64::max);
        println!("free drift: largest mean pairwise trace distance {worst:.4}");
    }
    println!("results in {}", dir.display());
    Ok(0)
}

fn run_verify() -> anyhow::Result<u8> {
    let checks = run_verification()?;
    let mut failed = 0;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        if !c.passed() {
            failed += 1;
        }
        println!("{status}  {:<48} residual {:.3e}  tolerance {:.0e}", c.name, c.residual, c.tolerance);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY })
}

fn run_compare(a: CompareArgs) -> anyhow::Result<u8> {
    let table = ComparisonTable::load(&a.runs)?;
    print!("{}", table.to_markdown());
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        write_atomic(&dir.join("comparison.csv"), &table.to_csv())?;
        write_atomic(&dir.join("comparison.md"), &table.to_markdown())?;
    }
    Ok(0)
}
