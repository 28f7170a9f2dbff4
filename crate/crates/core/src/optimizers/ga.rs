use std::sync::atomic::AtomicBool;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use super::de::{initialize, Population};
use super::{evaluate_all, is_stopped, GenerationRecord, OptimizerConfig, RunHistory};
use crate::error::Result;
use crate::problems::{RobustProblem, UncertaintySampleGrid};

fn tournament<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> usize {
    let a = rng.random_range(0..fitness.len());
    let b = rng.random_range(0..fitness.len());
    if fitness[b] > fitness[a] {
        b
    } else {
        a
    }
}

/// Generational real-coded GA with elitism of one.
///
/// Each child takes two size-2 tournament winners. With probability P_c it
/// is their uniform crossover, otherwise a copy of the first. Each gene then
/// mutates with probability P_m by Gaussian noise of std `mutation_scale`
/// times the gene's range, and is clamped to bounds. The best individual is
/// carried over unchanged in slot 0.
pub fn run_ga<P: RobustProblem + ?Sized, R: Rng + ?Sized>(
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
    let record = |pop: &Population, evaluations| GenerationRecord {
        generation: pop.generation(),
        best_fitness: pop.best_fitness(),
        mean_fitness: pop.mean_fitness(),
        evaluations,
        strategy_counts: [0; 4],
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    let mut records = vec![record(&pop, evaluations)];
    let mut interrupted = false;

    for _ in 0..config.max_generations {
        if is_stopped(stop) {
            interrupted = true;
            break;
        }
        let parents = pop.genomes();
        let fit = pop.fitness();
        let mut children = Vec::with_capacity(np - 1);
        for _ in 1..np {
            let a = tournament(fit, rng);
            let b = tournament(fit, rng);
            let mut child = if rng.random::<f64>() < config.crossover_prob {
                parents[a]
                    .iter()
                    .zip(&parents[b])
                    .map(|(&x, &y)| if rng.random::<f64>() < 0.5 { x } else { y })
                    .collect()
            } else {
                parents[a].clone()
            };
            for (v, bd) in child.iter_mut().zip(bounds) {
                if rng.random::<f64>() < config.mutation_prob {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = bd.clamp(*v + config.mutation_scale * bd.range() * z);
                }
            }
            children.push(child);
        }
        let child_fitness = evaluate_all(problem, grid, &children)?;
        evaluations += children.len() as u64 * per_genome;
        let mut genomes = Vec::with_capacity(np);
        let mut fitness = Vec::with_capacity(np);
        genomes.push(pop.best_genome().to_vec());
        fitness.push(pop.best_fitness());
        genomes.extend(children);
        fitness.extend(child_fitness);
        pop = Population::new(genomes, fitness, pop.generation() + 1);
        records.push(record(&pop, evaluations));
    }
    Ok(RunHistory {
        algorithm: config.algorithm,
        records,
        best_genome: pop.best_genome().to_vec(),
        best_fitness: pop.best_fitness(),
        interrupted,
    })
}
