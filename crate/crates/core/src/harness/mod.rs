//! Configuration-driven experiments: training and testing runs, analytic
//! verification, result files and comparison tables.

mod compare;
mod config;
mod io;
mod run;
mod verify;

pub use compare::{ComparisonRow, ComparisonTable};
pub use config::{
    BenchmarkParams, ExperimentConfig, Overrides, ProblemInstance, ProblemKind, TestMode, TestSpec,
    FULL_SCALE_GENERATIONS,
};
pub use io::{fmt_f64, genome_csv, history_csv, parse_genome_csv, write_atomic, HISTORY_HEADER};
pub use run::{
    describe_parameters, evaluate, in_pool, output_dir, read_genome, read_record, train, write_evaluation_dir,
    write_run, Evaluation, RecordSummary, RunRecord, RunStamp, TestSummary, CONFIG_FILE, DRIFT_FILE,
    EVALUATION_FILE, GENOME_FILE, HISTORY_FILE, RECORD_FILE, REPORT_FILE, TIMING_FILE,
};
pub use verify::{ensemble_flow_residuals, reference_ensemble_flow, run_verification, VerificationCheck};
