use std::sync::atomic::AtomicBool;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{evaluate_all, is_stopped, GenerationRecord, OptimizerConfig, RunHistory, Strategy};
use crate::dynamics::Bounds;
use crate::error::Result;
use crate::problems::{RobustProblem, UncertaintySampleGrid};

/// Genomes with their cached averaged fitness.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    genomes: Vec<Vec<f64>>,
    fitness: Vec<f64>,
    generation: usize,
    best: usize,
}

impl Population {
    pub fn new(genomes: Vec<Vec<f64>>, fitness: Vec<f64>, generation: usize) -> Self {
        assert_eq!(genomes.len(), fitness.len(), "one fitness value per genome");
        assert!(!genomes.is_empty(), "empty population");
        let best = best_index(&fitness);
        Self {
            genomes,
            fitness,
            generation,
            best,
        }
    }

    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    pub fn genomes(&self) -> &[Vec<f64>] {
        &self.genomes
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Index of the maximal cached fitness; ties go to the lowest index.
    pub fn best_index(&self) -> usize {
        self.best
    }

    pub fn best_genome(&self) -> &[f64] {
        &self.genomes[self.best]
    }

    pub fn best_fitness(&self) -> f64 {
        self.fitness[self.best]
    }

    pub fn mean_fitness(&self) -> f64 {
        self.fitness.iter().sum::<f64>() / self.fitness.len() as f64
    }

    /// Greedy one-to-one replacement, then a fresh best index.
    fn advance(&mut self, trials: Vec<Vec<f64>>, trial_fitness: &[f64]) {
        for (i, (trial, &ft)) in trials.into_iter().zip(trial_fitness).enumerate() {
            if select(self.fitness[i], ft) {
                self.genomes[i] = trial;
                self.fitness[i] = ft;
            }
        }
        self.generation += 1;
        self.best = best_index(&self.fitness);
    }

    fn record(&self, evaluations: u64, strategy_counts: [u64; 4], start: Instant) -> GenerationRecord {
        GenerationRecord {
            generation: self.generation,
            best_fitness: self.best_fitness(),
            mean_fitness: self.mean_fitness(),
            evaluations,
            strategy_counts,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

fn best_index(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate().skip(1) {
        if f > fitness[best] {
            best = i;
        }
    }
    best
}

/// x^j = lo^j + rand(0,1)·(hi^j − lo^j), individual-major, component-minor.
pub fn initialize<R: Rng + ?Sized>(bounds: &[Bounds], np: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..np)
        .map(|_| bounds.iter().map(|b| b.lo + rng.random::<f64>() * b.range()).collect())
        .collect()
}

/// F ~ N(mean, std), accepted as drawn.
pub fn sample_f<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + std * z
}

/// CR ~ N(mean, std), redrawn until it lies in [0, 1].
pub fn sample_cr<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let cr = mean + std * z;
        if (0.0..=1.0).contains(&cr) {
            return cr;
        }
    }
}

/// Maps pp ∈ [0, 1] onto equal-width slots of the pool: with four strategies
/// pp ≤ 0.25 picks the first, pp ≤ 0.5 the second and so on.
pub fn select_strategy(pool: &[Strategy], pp: f64) -> Strategy {
    let m = pool.len();
    let slot = ((pp * m as f64).ceil() as usize).clamp(1, m) - 1;
    pool[slot]
}

/// `count` mutually distinct indices from {0..np} \ {exclude}, by a partial
/// Fisher–Yates shuffle.
pub(crate) fn distinct_indices<R: Rng + ?Sized>(np: usize, exclude: usize, count: usize, rng: &mut R) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..np).filter(|&k| k != exclude).collect();
    assert!(count <= pool.len(), "not enough individuals for {count} distinct donors");
    for k in 0..count {
        let j = rng.random_range(k..pool.len());
        pool.swap(k, j);
    }
    pool.truncate(count);
    pool
}

/// Donor vector for individual `i`. Draws the strategy's distinct indices
/// from `rng`; the donor is not yet repaired.
pub fn mutate<R: Rng + ?Sized>(
    strategy: Strategy,
    genomes: &[Vec<f64>],
    i: usize,
    best: usize,
    f: f64,
    k: f64,
    rng: &mut R,
) -> Vec<f64> {
    let r = distinct_indices(genomes.len(), i, strategy.index_demand(), rng);
    mutate_with(strategy, genomes, i, best, &r, f, k)
}

/// Donor vector from explicit indices r_1, r_2, ….
pub fn mutate_with(
    strategy: Strategy,
    genomes: &[Vec<f64>],
    i: usize,
    best: usize,
    r: &[usize],
    f: f64,
    k: f64,
) -> Vec<f64> {
    let x = |idx: usize, j: usize| genomes[idx][j];
    let dim = genomes[i].len();
    (0..dim)
        .map(|j| match strategy {
            Strategy::Rand1 => x(r[0], j) + f * (x(r[1], j) - x(r[2], j)),
            Strategy::RandToBest2 => {
                x(i, j) + f * (x(best, j) - x(i, j)) + f * (x(r[0], j) - x(r[1], j)) + f * (x(r[2], j) - x(r[3], j))
            }
            Strategy::Rand2 => x(r[0], j) + f * (x(r[1], j) - x(r[2], j)) + f * (x(r[3], j) - x(r[4], j)),
            Strategy::CurrentToRand1 => x(i, j) + k * (x(r[0], j) - x(i, j)) + f * (x(r[1], j) - x(r[2], j)),
        })
        .collect()
}

/// Re-randomizes every out-of-bounds component uniformly within its bounds.
pub fn repair_bounds<R: Rng + ?Sized>(donor: &mut [f64], bounds: &[Bounds], rng: &mut R) {
    for (v, b) in donor.iter_mut().zip(bounds) {
        if !b.contains(*v) {
            *v = b.lo + rng.random::<f64>() * b.range();
        }
    }
}

/// Binomial crossover. Draws j_rand, then one uniform per component.
pub fn crossover<R: Rng + ?Sized>(target: &[f64], donor: &[f64], cr: f64, rng: &mut R) -> Vec<f64> {
    let j_rand = rng.random_range(0..target.len());
    target
        .iter()
        .zip(donor)
        .enumerate()
        .map(|(j, (&t, &v))| {
            let r: f64 = rng.random();
            if r <= cr || j == j_rand {
                v
            } else {
                t
            }
        })
        .collect()
}

/// Whether the trial replaces the target: f̄(U) ≥ f̄(X).
pub fn select(target_fitness: f64, trial_fitness: f64) -> bool {
    trial_fitness >= target_fitness
}

/// Mixed-strategy multi-sample DE. Per individual the stream supplies, in
/// order: F (when sampled), pp (when the pool has more than one strategy),
/// the donor indices, repair draws, CR (when sampled), then j_rand and the
/// crossover uniforms (skipped for current-to-rand, whose trial is the donor).
pub fn run_msms_de<P: RobustProblem + ?Sized, R: Rng + ?Sized>(
    problem: &P,
    grid: &UncertaintySampleGrid,
    config: &OptimizerConfig,
    rng: &mut R,
    stop: Option<&AtomicBool>,
) -> Result<RunHistory> {
    let bounds = problem.bounds();
    config.validate(bounds.len())?;
    let start = Instant::now();
    let np = config.population;
    let per_genome = grid.len() as u64;
    let genomes = initialize(bounds, np, rng);
    let fitness = evaluate_all(problem, grid, &genomes)?;
    let mut pop = Population::new(genomes, fitness, 0);
    let mut evaluations = np as u64 * per_genome;
    let mut records = vec![pop.record(evaluations, [0; 4], start)];
    let mut interrupted = false;
    let pool = &config.strategies;

    for _ in 0..config.max_generations {
        if is_stopped(stop) {
            interrupted = true;
            break;
        }
        let best = pop.best_index();
        let mut counts = [0u64; 4];
        let mut trials = Vec::with_capacity(np);
        for i in 0..np {
            let f = if config.sample_parameters {
                sample_f(config.f_mean, config.f_std, rng)
            } else {
                config.f
            };
            let strategy = if pool.len() > 1 {
                select_strategy(pool, rng.random::<f64>())
            } else {
                pool[0]
            };
            let mut donor = mutate(strategy, pop.genomes(), i, best, f, config.k, rng);
            repair_bounds(&mut donor, bounds, rng);
            let cr = if config.sample_parameters {
                sample_cr(config.cr_mean, config.cr_std, rng)
            } else {
                config.cr
            };
            let trial = if strategy == Strategy::CurrentToRand1 {
                donor
            } else {
                crossover(&pop.genomes()[i], &donor, cr, rng)
            };
            counts[strategy.ordinal()] += 1;
            trials.push(trial);
        }
        let trial_fitness = evaluate_all(problem, grid, &trials)?;
        evaluations += np as u64 * per_genome;
        pop.advance(trials, &trial_fitness);
        records.push(pop.record(evaluations, counts, start));
    }
    Ok(RunHistory {
        algorithm: config.algorithm,
        records,
        best_genome: pop.best_genome().to_vec(),
        best_fitness: pop.best_fitness(),
        interrupted,
    })
}

/// Classic DE/rand/1/bin with fixed F and CR. Per individual the stream
/// supplies three donor indices, repair draws, j_rand and the crossover
/// uniforms.
pub fn run_basic_de<P: RobustProblem + ?Sized, R: Rng + ?Sized>(
    problem: &P,
    grid: &UncertaintySampleGrid,
    config: &OptimizerConfig,
    rng: &mut R,
    stop: Option<&AtomicBool>,
) -> Result<RunHistory> {
    let bounds = problem.bounds();
    config.validate(bounds.len())?;
    let start = Instant::now();
    let np = config.population;
    let dim = bounds.len();
    let per_genome = grid.len() as u64;
    let genomes = initialize(bounds, np, rng);
    let fitness = evaluate_all(problem, grid, &genomes)?;
    let mut pop = Population::new(genomes, fitness, 0);
    let mut evaluations = np as u64 * per_genome;
    let mut records = vec![pop.record(evaluations, [0; 4], start)];
    let mut interrupted = false;

    for _ in 0..config.max_generations {
        if is_stopped(stop) {
            interrupted = true;
            break;
        }
        let mut trials = Vec::with_capacity(np);
        for i in 0..np {
            let r = distinct_indices(np, i, 3, rng);
            let x = pop.genomes();
            let mut donor: Vec<f64> = (0..dim)
                .map(|j| x[r[0]][j] + config.f * (x[r[1]][j] - x[r[2]][j]))
                .collect();
            repair_bounds(&mut donor, bounds, rng);
            trials.push(crossover(&x[i], &donor, config.cr, rng));
        }
        let trial_fitness = evaluate_all(problem, grid, &trials)?;
        evaluations += np as u64 * per_genome;
        pop.advance(trials, &trial_fitness);
        records.push(pop.record(evaluations, [np as u64, 0, 0, 0], start));
    }
    Ok(RunHistory {
        algorithm: config.algorithm,
        records,
        best_genome: pop.best_genome().to_vec(),
        best_fitness: pop.best_fitness(),
        interrupted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> Vec<Vec<f64>> {
        vec![
            vec![1.0, 2.0, 3.0],
            vec![0.0, 1.0, 0.0],
            vec![2.0, 2.0, 2.0],
            vec![-1.0, 0.5, 4.0],
            vec![3.0, -2.0, 1.0],
            vec![0.5, 0.5, 0.5],
        ]
    }

    #[test]
    fn degenerate_mutations() {
        let g = toy();
        let d = mutate_with(Strategy::Rand1, &g, 0, 0, &[2, 3, 4], 0.0, 0.5);
        assert_eq!(d, g[2]);
        let d = mutate_with(Strategy::CurrentToRand1, &g, 0, 0, &[2, 3, 4], 0.0, 0.5);
        assert_eq!(d, vec![1.5, 2.0, 2.5]);
    }

    #[test]
    fn rand_to_best_by_hand() {
        let g = toy();
        // X_i = X_best = (1,2,3); F = 0.5; r = (1, 2, 3, 4)
        // V = X_i + 0.5·((0,1,0) − (2,2,2)) + 0.5·((−1,0.5,4) − (3,−2,1))
        //   = (1,2,3) + (−1,−0.5,−1) + (−2,1.25,1.5) = (−2, 2.75, 3.5)
        let d = mutate_with(Strategy::RandToBest2, &g, 0, 0, &[1, 2, 3, 4], 0.5, 0.5);
        assert_eq!(d, vec![-2.0, 2.75, 3.5]);
    }

    #[test]
    fn distinct_indices_exclude_self() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r = distinct_indices(6, 2, 5, &mut rng);
            let mut s = r.clone();
            s.sort();
            s.dedup();
            assert_eq!(s.len(), 5);
            assert!(!r.contains(&2));
        }
    }

    #[test]
    fn repair_only_touches_violations() {
        let b = vec![Bounds::new(0.0, 1.0).unwrap(); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v = vec![0.5, 2.0, 0.25];
        repair_bounds(&mut v, &b, &mut rng);
        assert_eq!((v[0], v[2]), (0.5, 0.25));
        assert!(b[1].contains(v[1]));
        let fixed = vec![Bounds::new(0.3, 0.3).unwrap()];
        let mut w = vec![7.0];
        repair_bounds(&mut w, &fixed, &mut rng);
        assert_eq!(w, vec![0.3]);
    }

    #[test]
    fn crossover_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = vec![0.0; 20];
        let d = vec![1.0; 20];
        for _ in 0..100 {
            let u = crossover(&t, &d, 0.0, &mut rng);
            assert_eq!(u.iter().filter(|&&x| x == 1.0).count(), 1);
        }
        assert_eq!(crossover(&t, &t, 0.7, &mut rng), t);
    }

    #[test]
    fn strategy_quartiles() {
        let pool = Strategy::ALL;
        assert_eq!(select_strategy(&pool, 0.0), Strategy::Rand1);
        assert_eq!(select_strategy(&pool, 0.25), Strategy::Rand1);
        assert_eq!(select_strategy(&pool, 0.2500001), Strategy::RandToBest2);
        assert_eq!(select_strategy(&pool, 0.5), Strategy::RandToBest2);
        assert_eq!(select_strategy(&pool, 0.75), Strategy::Rand2);
        assert_eq!(select_strategy(&pool, 0.99), Strategy::CurrentToRand1);
        assert_eq!(select_strategy(&pool, 1.0), Strategy::CurrentToRand1);
        assert_eq!(select_strategy(&[Strategy::Rand2], 0.7), Strategy::Rand2);
    }

    #[test]
    fn selection_rule() {
        assert!(select(0.5, 0.5));
        assert!(select(0.5, 0.6));
        assert!(!select(0.5, 0.4));
        assert!(!select(0.5, f64::NAN));
    }

    #[test]
    fn best_ties_go_to_lowest_index() {
        let p = Population::new(vec![vec![0.0]; 4], vec![1.0, 3.0, 3.0, 2.0], 0);
        assert_eq!(p.best_index(), 1);
    }

    #[test]
    fn zero_width_bounds_give_constant_population() {
        let b = vec![Bounds::new(0.0, 0.0).unwrap(); 4];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(initialize(&b, 10, &mut rng).iter().flatten().all(|&x| x == 0.0));
    }
}
