use fixedbitset::FixedBitSet;
use rand::Rng;

use super::gso::argmax;
use super::operators::random_population;
use super::{FitnessContext, ScheduleRun, SchedulerConfig, SleepSolution};
use crate::rng::RngStream;

pub fn pso_schedule(ctx: &FitnessContext, cfg: &SchedulerConfig, rng: &mut RngStream) -> SleepSolution {
    let population = random_population(ctx.len(), cfg.population_size, rng);
    pso_run(ctx, cfg, population, rng).best
}

fn bit(g: &FixedBitSet, i: usize) -> f64 {
    if g.contains(i) {
        1.0
    } else {
        0.0
    }
}

/// One binary-PSO move: per gene,
/// `v <- w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x)`, clamped to
/// `[-vmax, vmax]`, then the gene is set with probability `sigmoid(v)`.
pub fn update_particle(
    position: &mut FixedBitSet,
    velocity: &mut [f64],
    personal_best: &FixedBitSet,
    global_best: &FixedBitSet,
    cfg: &SchedulerConfig,
    rng: &mut RngStream,
) {
    for (i, v) in velocity.iter_mut().enumerate() {
        let x = bit(position, i);
        // A pull toward a best that agrees with `x` is zero whatever r is,
        // so its random factor is only drawn when it matters.
        let to_personal = bit(personal_best, i) - x;
        let to_global = bit(global_best, i) - x;
        let mut next = cfg.pso_inertia * *v;
        if to_personal != 0.0 {
            next += cfg.pso_c1 * rng.random::<f64>() * to_personal;
        }
        if to_global != 0.0 {
            next += cfg.pso_c2 * rng.random::<f64>() * to_global;
        }
        *v = next.clamp(-cfg.pso_vmax, cfg.pso_vmax);
        let p = 1.0 / (1.0 + (-*v).exp());
        position.set(i, rng.random::<f64>() < p);
    }
}

/// Binary particle swarm with zero initial velocities.
pub fn pso_run(
    ctx: &FitnessContext,
    cfg: &SchedulerConfig,
    mut positions: Vec<FixedBitSet>,
    rng: &mut RngStream,
) -> ScheduleRun {
    let genes = ctx.len();
    let mut velocities = vec![vec![0.0; genes]; positions.len()];
    let fitness: Vec<f64> = positions.iter().map(|g| ctx.evaluate(g)).collect();
    let mut personal: Vec<SleepSolution> = positions
        .iter()
        .zip(&fitness)
        .map(|(g, &f)| SleepSolution {
            asleep: g.clone(),
            fitness: f,
        })
        .collect();
    let mut global = personal[argmax(&fitness)].clone();
    let mut best_trace = vec![global.fitness];

    for _ in 0..cfg.max_iterations {
        for p in 0..positions.len() {
            update_particle(
                &mut positions[p],
                &mut velocities[p],
                &personal[p].asleep,
                &global.asleep,
                cfg,
                rng,
            );
            let f = ctx.evaluate(&positions[p]);
            if f > personal[p].fitness {
                personal[p] = SleepSolution {
                    asleep: positions[p].clone(),
                    fitness: f,
                };
                if f > global.fitness {
                    global = personal[p].clone();
                }
            }
        }
        best_trace.push(global.fitness);
    }

    ScheduleRun {
        max_observed: global.fitness,
        best: global,
        best_trace,
    }
}
