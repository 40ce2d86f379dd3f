use fixedbitset::FixedBitSet;
use rand::Rng;

use super::operators::{crossover_into, mutate, random_population};
use super::{FitnessContext, ScheduleRun, SchedulerConfig, SleepSolution};
use crate::rng::RngStream;

/// GSO from a random initial population.
pub fn gso_schedule(ctx: &FitnessContext, cfg: &SchedulerConfig, rng: &mut RngStream) -> SleepSolution {
    let population = random_population(ctx.len(), cfg.population_size, rng);
    gso_run(ctx, cfg, population, rng).best
}

/// Genetic swarm optimization over `population`.
///
/// Each of the `max_iterations` generations sweeps the population in index
/// order. Solution `it` of `P` is mutated, then crossed with the local best
/// with probability `1 - it/P`, otherwise with the global best with
/// probability `it/P`. The local best persists across generations; the
/// global best follows it whenever it improves and is what gets returned.
pub fn gso_run(
    ctx: &FitnessContext,
    cfg: &SchedulerConfig,
    mut population: Vec<FixedBitSet>,
    rng: &mut RngStream,
) -> ScheduleRun {
    let size = population.len();
    let rate = cfg.mutation_rate_for(ctx.len());
    let mut fitness: Vec<f64> = population.iter().map(|g| ctx.evaluate(g)).collect();

    let first = argmax(&fitness);
    let mut local_best = SleepSolution {
        asleep: population[first].clone(),
        fitness: fitness[first],
    };
    let mut global_best = local_best.clone();
    let mut max_observed = local_best.fitness;
    let mut best_trace = vec![global_best.fitness];

    for _ in 0..cfg.max_iterations {
        for it in 0..size {
            let current = &mut population[it];
            mutate(current, rate, rng);
            let toward_local = 1.0 - it as f64 / size as f64;
            let toward_global = it as f64 / size as f64;
            if rng.random::<f64>() < toward_local {
                crossover_into(current, &local_best.asleep, rng);
            } else if rng.random::<f64>() < toward_global {
                crossover_into(current, &global_best.asleep, rng);
            }
            fitness[it] = ctx.evaluate(current);
            max_observed = max_observed.max(fitness[it]);
            if fitness[it] > local_best.fitness {
                local_best = SleepSolution {
                    asleep: current.clone(),
                    fitness: fitness[it],
                };
                if local_best.fitness > global_best.fitness {
                    global_best = local_best.clone();
                }
            }
        }
        best_trace.push(global_best.fitness);
    }

    ScheduleRun {
        best: global_best,
        best_trace,
        max_observed,
    }
}

/// Index of the first maximum.
pub(super) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
