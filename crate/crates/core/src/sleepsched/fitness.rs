use fixedbitset::FixedBitSet;

use crate::coverage::CoverageGeometry;
use crate::error::{Error, Result};
use crate::network::NodeState;

/// Precomputed per-round inputs of the fitness function over the alive
/// nodes.
///
/// `fitness = alpha * (1 - E_awake / E_total) + beta * term2` where `term2`
/// is `1 - C_awake / C_total`, or `C_awake / C_total` when coverage is
/// preserved. Totals include every alive node whatever its sleep state; a
/// zero total makes its term 0.
#[derive(Debug, Clone)]
pub struct FitnessContext<'a> {
    ids: Vec<usize>,
    energies: Vec<f64>,
    masks: Vec<&'a FixedBitSet>,
    cells: usize,
    total_energy: f64,
    total_coverage: usize,
    alpha: f64,
    beta: f64,
    coverage_preserving: bool,
}

impl<'a> FitnessContext<'a> {
    /// `masks[id]` is the coverage mask of node `id`.
    pub fn new(
        nodes: &[NodeState],
        masks: &'a [FixedBitSet],
        alpha: f64,
        beta: f64,
        coverage_preserving: bool,
    ) -> Self {
        let alive: Vec<&NodeState> = nodes.iter().filter(|n| n.alive).collect();
        let ids: Vec<usize> = alive.iter().map(|n| n.id).collect();
        let energies: Vec<f64> = alive.iter().map(|n| n.energy).collect();
        let masks: Vec<&FixedBitSet> = ids.iter().map(|&id| &masks[id]).collect();
        let cells = masks.first().map_or(0, |m| m.len());
        let mut ctx = Self {
            total_energy: energies.iter().sum(),
            ids,
            energies,
            masks,
            cells,
            total_coverage: 0,
            alpha,
            beta,
            coverage_preserving,
        };
        ctx.total_coverage = ctx.union_count(|_| true);
        ctx
    }

    /// Number of genes, one per alive node.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Node id behind each gene.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn total_coverage(&self) -> usize {
        self.total_coverage
    }

    pub fn max_fitness(&self) -> f64 {
        self.alpha + self.beta
    }

    fn union_count(&self, awake: impl Fn(usize) -> bool) -> usize {
        let mut union = FixedBitSet::with_capacity(self.cells);
        for (i, m) in self.masks.iter().enumerate() {
            if awake(i) {
                union.union_with(m);
            }
        }
        union.count_ones(..)
    }

    pub fn awake_energy(&self, asleep: &FixedBitSet) -> f64 {
        asleep.zeroes().take_while(|&i| i < self.len()).map(|i| self.energies[i]).sum()
    }

    pub fn awake_coverage(&self, asleep: &FixedBitSet) -> usize {
        let mut union = FixedBitSet::with_capacity(self.cells);
        for i in asleep.zeroes() {
            if i >= self.len() {
                break;
            }
            union.union_with(self.masks[i]);
        }
        union.count_ones(..)
    }

    /// Fitness of a genome whose length is already known to match.
    pub(crate) fn evaluate(&self, asleep: &FixedBitSet) -> f64 {
        debug_assert_eq!(asleep.len(), self.len());
        let term1 = if self.total_energy > 0.0 {
            1.0 - self.awake_energy(asleep) / self.total_energy
        } else {
            0.0
        };
        let term2 = if self.total_coverage > 0 {
            let ratio = self.awake_coverage(asleep) as f64 / self.total_coverage as f64;
            if self.coverage_preserving {
                ratio
            } else {
                1.0 - ratio
            }
        } else {
            0.0
        };
        // Rounding can push a ratio a hair past 1.
        self.alpha * term1.clamp(0.0, 1.0) + self.beta * term2.clamp(0.0, 1.0)
    }

    pub fn try_evaluate(&self, asleep: &FixedBitSet) -> Result<f64> {
        if asleep.len() != self.len() {
            return Err(Error::contract(format!(
                "schedule has {} genes but {} nodes are alive",
                asleep.len(),
                self.len()
            )));
        }
        Ok(self.evaluate(asleep))
    }
}

/// Fitness of a boolean schedule (`true` = asleep).
pub fn fitness(asleep: &[bool], ctx: &FitnessContext) -> Result<f64> {
    ctx.try_evaluate(&super::genome_from_bools(asleep))
}

/// Cells covered by the alive, awake nodes among `nodes`.
pub fn coverage_of(nodes: &[NodeState], geom: &CoverageGeometry) -> usize {
    geom.covered_cells(nodes.iter().filter(|n| n.is_active()).map(|n| &n.pos))
}
