use super::Algorithm;

/// Summary of one completed generation. Generation 0 is the initial population.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Cumulative single-sample fitness evaluations.
    pub evaluations: u64,
    /// How often each DE strategy produced a donor this generation, in
    /// [`super::Strategy::ALL`] order. Zero for engines without a pool.
    pub strategy_counts: [u64; 4],
    /// Wall-clock seconds since the run started.
    pub elapsed_seconds: f64,
}

/// Outcome of an optimization run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunHistory {
    pub algorithm: Algorithm,
    pub records: Vec<GenerationRecord>,
    pub best_genome: Vec<f64>,
    pub best_fitness: f64,
    /// True when a stop request ended the run before the generation limit.
    pub interrupted: bool,
}

impl RunHistory {
    pub fn best_sequence(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_fitness).collect()
    }

    /// Completed generations, excluding the initial population.
    pub fn generations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn total_evaluations(&self) -> u64 {
        self.records.last().map_or(0, |r| r.evaluations)
    }

    pub fn elapsed_seconds(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.elapsed_seconds)
    }

    /// Total strategy usage over the whole run.
    pub fn strategy_totals(&self) -> [u64; 4] {
        let mut out = [0; 4];
        for r in &self.records {
            for (o, c) in out.iter_mut().zip(r.strategy_counts) {
                *o += c;
            }
        }
        out
    }

    pub fn is_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness)
    }
}
