//! Square sensing grid over the deployment area.
//!
//! A cell is covered by a node when the cell center lies within the node's
//! sensing radius.

use fixedbitset::FixedBitSet;

use crate::network::{distance, NodeState, Position};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGeometry {
    pub width: f64,
    pub height: f64,
    /// Cells per axis.
    pub cells: usize,
    pub radius: f64,
}

impl CoverageGeometry {
    pub fn new(width: f64, height: f64, cells: usize, radius: f64) -> Self {
        Self {
            width,
            height,
            cells,
            radius,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells * self.cells
    }

    fn cell_w(&self) -> f64 {
        self.width / self.cells as f64
    }

    fn cell_h(&self) -> f64 {
        self.height / self.cells as f64
    }

    /// Center of the cell at row-major `index` (row = y, column = x).
    pub fn cell_center(&self, index: usize) -> Position {
        let (row, col) = (index / self.cells, index % self.cells);
        Position::new(
            (col as f64 + 0.5) * self.cell_w(),
            (row as f64 + 0.5) * self.cell_h(),
        )
    }

    /// Row-major indices of the cells sensed from `pos`.
    pub fn cells_covered_by(&self, pos: Position) -> Vec<usize> {
        let (cw, ch) = (self.cell_w(), self.cell_h());
        let span = |center: f64, size: f64| {
            let lo = ((center - self.radius) / size - 0.5).floor().max(0.0) as usize;
            let hi = (((center + self.radius) / size - 0.5).ceil().max(0.0) as usize)
                .min(self.cells - 1);
            (lo, hi)
        };
        let (c0, c1) = span(pos.x, cw);
        let (r0, r1) = span(pos.y, ch);
        let mut out = Vec::new();
        if c0 > c1 || r0 > r1 {
            return out;
        }
        for row in r0..=r1 {
            for col in c0..=c1 {
                let idx = row * self.cells + col;
                if distance(self.cell_center(idx), pos) <= self.radius {
                    out.push(idx);
                }
            }
        }
        out
    }

    pub fn mask_for(&self, pos: Position) -> FixedBitSet {
        let mut mask = FixedBitSet::with_capacity(self.cell_count());
        for idx in self.cells_covered_by(pos) {
            mask.insert(idx);
        }
        mask
    }

    /// One coverage mask per node, indexed by node id.
    pub fn node_masks(&self, nodes: &[NodeState]) -> Vec<FixedBitSet> {
        nodes.iter().map(|n| self.mask_for(n.pos)).collect()
    }

    /// Number of cells covered by at least one of `positions`.
    pub fn covered_cells<'a>(&self, positions: impl IntoIterator<Item = &'a Position>) -> usize {
        let mut union = FixedBitSet::with_capacity(self.cell_count());
        for p in positions {
            union.union_with(&self.mask_for(*p));
        }
        union.count_ones(..)
    }
}
