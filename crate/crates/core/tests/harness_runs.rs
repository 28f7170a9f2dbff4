use std::fs;
use std::path::Path;

use qrobust::harness::{
    evaluate, read_genome, read_record, train, write_run, ComparisonTable, ExperimentConfig, Overrides, ProblemKind,
    CONFIG_FILE, DRIFT_FILE, GENOME_FILE, HISTORY_FILE, REPORT_FILE,
};
use qrobust::Algorithm;

fn config(problem: ProblemKind, algorithm: Algorithm, seed: u64, gmax: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(problem);
    c.apply(&Overrides {
        seed: Some(seed),
        algorithm: Some(algorithm),
        max_generations: Some(gmax),
        ..Overrides::default()
    });
    c.optimizer.population = 10;
    c.test.samples = 20;
    c
}

fn run_into(dir: &Path, c: &ExperimentConfig) {
    let record = train(c, None).unwrap();
    write_run(dir, &record).unwrap();
}

fn history_columns(dir: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(dir.join(HISTORY_FILE))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn ensemble_training_writes_monotone_history() {
    let tmp = tempfile::tempdir().unwrap();
    run_into(tmp.path(), &config(ProblemKind::Ensemble, Algorithm::MsmsDe, 7, 15));
    for f in [CONFIG_FILE, HISTORY_FILE, GENOME_FILE, REPORT_FILE] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let rows = history_columns(tmp.path());
    assert_eq!(rows.len(), 16);
    assert!(rows.windows(2).all(|w| w[1].0 >= w[0].0));
    assert!(rows.iter().all(|(best, mean)| mean <= best));
}

#[test]
fn repeated_training_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let c = config(ProblemKind::Ensemble, Algorithm::MsmsDe, 3, 10);
    run_into(a.path(), &c);
    run_into(b.path(), &c);
    for f in [HISTORY_FILE, GENOME_FILE, REPORT_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn consensus_genome_has_600_values_and_drift_file() {
    let tmp = tempfile::tempdir().unwrap();
    run_into(tmp.path(), &config(ProblemKind::Consensus, Algorithm::De1, 1, 2));
    assert_eq!(read_genome(&tmp.path().join(GENOME_FILE)).unwrap().len(), 600);
    let drift = fs::read_to_string(tmp.path().join(DRIFT_FILE)).unwrap();
    let mut lines = drift.lines();
    assert_eq!(lines.next(), Some("t,d1_target,d2_target,d3_target,d12,d13,d23"));
    assert_eq!(lines.count(), 101);
}

#[test]
fn stored_genome_reproduces_stored_report() {
    let tmp = tempfile::tempdir().unwrap();
    run_into(tmp.path(), &config(ProblemKind::Ensemble, Algorithm::Ga, 5, 5));
    let stored = ExperimentConfig::load(&tmp.path().join(CONFIG_FILE)).unwrap();
    let genome = read_genome(&tmp.path().join(GENOME_FILE)).unwrap();
    let again = evaluate(&stored, &genome).unwrap();
    let record = read_record(tmp.path()).unwrap();
    let stats = record.test.unwrap().stats;
    assert_eq!(again.report.summary(), stats);
    let report = fs::read_to_string(tmp.path().join(REPORT_FILE)).unwrap();
    let values: Vec<f64> = report
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, again.report.values);
}

#[test]
fn comparison_table_sorts_runs() {
    let root = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for alg in [Algorithm::De1, Algorithm::MsDe, Algorithm::MsmsDe] {
        let d = root.path().join(alg.tag());
        run_into(&d, &config(ProblemKind::Ensemble, alg, 2, 5));
        dirs.push(d);
    }
    let table = ComparisonTable::load(&dirs).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows.windows(2).all(|w| w[0].testing_mean >= w[1].testing_mean));
    let single = ComparisonTable::load(&dirs[..1]).unwrap();
    assert_eq!(single.rows.len(), 1);

    let other = root.path().join("sphere");
    run_into(&other, &config(ProblemKind::Sphere, Algorithm::De1, 2, 5));
    dirs.push(other);
    assert!(ComparisonTable::load(&dirs).is_err());
}
