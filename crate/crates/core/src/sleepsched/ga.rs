use fixedbitset::FixedBitSet;
use rand::Rng;

use super::gso::argmax;
use super::operators::{crossover_into, mutate, random_population};
use super::{FitnessContext, ScheduleRun, SchedulerConfig, SleepSolution};
use crate::rng::RngStream;

pub fn ga_schedule(ctx: &FitnessContext, cfg: &SchedulerConfig, rng: &mut RngStream) -> SleepSolution {
    let population = random_population(ctx.len(), cfg.population_size, rng);
    ga_run(ctx, cfg, population, rng).best
}

/// Generational GA: every child comes from two uniformly drawn parents,
/// each mutated, then combined by uniform crossover. The best solution
/// ever evaluated is returned.
pub fn ga_run(
    ctx: &FitnessContext,
    cfg: &SchedulerConfig,
    mut population: Vec<FixedBitSet>,
    rng: &mut RngStream,
) -> ScheduleRun {
    let size = population.len();
    let rate = cfg.mutation_rate_for(ctx.len());
    let fitness: Vec<f64> = population.iter().map(|g| ctx.evaluate(g)).collect();
    let first = argmax(&fitness);
    let mut best = SleepSolution {
        asleep: population[first].clone(),
        fitness: fitness[first],
    };
    let mut best_trace = vec![best.fitness];

    for _ in 0..cfg.max_iterations {
        let mut next = Vec::with_capacity(size);
        for _ in 0..size {
            let i = rng.random_range(0..size);
            let mut j = rng.random_range(0..size - 1);
            if j >= i {
                j += 1;
            }
            let mut child = population[i].clone();
            let mut other = population[j].clone();
            mutate(&mut child, rate, rng);
            mutate(&mut other, rate, rng);
            crossover_into(&mut child, &other, rng);
            let f = ctx.evaluate(&child);
            if f > best.fitness {
                best = SleepSolution {
                    asleep: child.clone(),
                    fitness: f,
                };
            }
            next.push(child);
        }
        population = next;
        best_trace.push(best.fitness);
    }

    ScheduleRun {
        max_observed: best.fitness,
        best,
        best_trace,
    }
}
