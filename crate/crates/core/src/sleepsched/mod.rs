//! Evolutionary sleep scheduling.
//!
//! A schedule is a bit array over the alive nodes; a set bit puts that node
//! to sleep for one round. Three optimizers search the space of schedules
//! against the same fitness: GSO (mutation plus crossover toward the
//! running best solutions), a plain GA, and a binary PSO.

mod fitness;
mod ga;
mod gso;
mod operators;
mod pso;

pub use fitness::{coverage_of, fitness, FitnessContext};
pub use ga::{ga_run, ga_schedule};
pub use gso::{gso_run, gso_schedule};
pub use operators::{crossover, mutate, random_population};
pub use pso::{pso_run, pso_schedule, update_particle};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::config::SchedulerKind;
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub algorithm: SchedulerKind,
    /// Weight of the energy term.
    pub alpha: f64,
    /// Weight of the coverage term.
    pub beta: f64,
    /// Generations per schedule (M).
    pub max_iterations: usize,
    pub population_size: usize,
    /// Per-gene flip probability; `None` means `1 / n`.
    pub mutation_rate: Option<f64>,
    /// Reward awake coverage instead of penalizing it.
    pub coverage_preserving: bool,
    pub pso_inertia: f64,
    pub pso_c1: f64,
    pub pso_c2: f64,
    pub pso_vmax: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            algorithm: SchedulerKind::None,
            alpha: 0.34,
            beta: 0.33,
            max_iterations: 50,
            population_size: 30,
            mutation_rate: None,
            coverage_preserving: false,
            pso_inertia: 0.7,
            pso_c1: 1.5,
            pso_c2: 1.5,
            pso_vmax: 4.0,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::config("alpha and beta must be non-negative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        if self.population_size < 2 {
            return Err(Error::config("population_size must be at least 2"));
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::config(format!("mutation_rate {r} outside [0, 1]")));
            }
        }
        if !(self.pso_vmax > 0.0) {
            return Err(Error::config("pso_vmax must be positive"));
        }
        Ok(())
    }

    pub fn mutation_rate_for(&self, genes: usize) -> f64 {
        self.mutation_rate
            .unwrap_or(if genes == 0 { 0.0 } else { 1.0 / genes as f64 })
    }
}

/// Sleep bits (set = asleep) and their fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct SleepSolution {
    pub asleep: FixedBitSet,
    pub fitness: f64,
}

impl SleepSolution {
    pub fn len(&self) -> usize {
        self.asleep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.asleep.is_empty()
    }

    pub fn is_asleep(&self, i: usize) -> bool {
        self.asleep.contains(i)
    }

    pub fn asleep_count(&self) -> usize {
        self.asleep.count_ones(..)
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.asleep.contains(i)).collect()
    }
}

pub fn genome_from_bools(bits: &[bool]) -> FixedBitSet {
    let mut g = FixedBitSet::with_capacity(bits.len());
    for (i, &b) in bits.iter().enumerate() {
        g.set(i, b);
    }
    g
}

/// Output of one optimizer run, with the data needed to audit it.
#[derive(Debug, Clone)]
pub struct ScheduleRun {
    pub best: SleepSolution,
    /// Best fitness after initialization and after each generation.
    pub best_trace: Vec<f64>,
    /// Largest fitness of any candidate evaluated during the run.
    pub max_observed: f64,
}

/// Runs the configured optimizer. `None` for [`SchedulerKind::None`].
pub fn schedule(
    ctx: &FitnessContext,
    cfg: &SchedulerConfig,
    rng: &mut RngStream,
) -> Option<SleepSolution> {
    match cfg.algorithm {
        SchedulerKind::None => None,
        SchedulerKind::Gso => Some(gso_schedule(ctx, cfg, rng)),
        SchedulerKind::Ga => Some(ga_schedule(ctx, cfg, rng)),
        SchedulerKind::Pso => Some(pso_schedule(ctx, cfg, rng)),
    }
}
