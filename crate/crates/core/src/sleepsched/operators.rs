use fixedbitset::{Block, FixedBitSet};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngStream;

const BLOCK_BITS: usize = Block::BITS as usize;

fn clear_tail(g: &mut FixedBitSet) {
    let len = g.len();
    let rem = len % BLOCK_BITS;
    if rem != 0 {
        if let Some(last) = g.as_mut_slice().last_mut() {
            *last &= (1 << rem) - 1;
        }
    }
}

/// `size` genomes of `genes` bits, each bit set with probability 1/2.
pub fn random_population(genes: usize, size: usize, rng: &mut RngStream) -> Vec<FixedBitSet> {
    (0..size)
        .map(|_| {
            let mut g = FixedBitSet::with_capacity(genes);
            for block in g.as_mut_slice() {
                *block = rng.random::<u64>() as Block;
            }
            clear_tail(&mut g);
            g
        })
        .collect()
}

/// Flips every gene independently with probability `rate`.
pub fn mutate(genome: &mut FixedBitSet, rate: f64, rng: &mut RngStream) {
    let n = genome.len();
    if rate <= 0.0 || n == 0 {
        return;
    }
    if rate >= 1.0 {
        genome.toggle_range(..);
        return;
    }
    // Gaps between flips of a Bernoulli(rate) sequence are geometric.
    let log_keep = (-rate).ln_1p();
    let mut i = 0usize;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_keep).floor();
        if gap >= (n - i) as f64 {
            break;
        }
        i += gap as usize;
        genome.toggle(i);
        i += 1;
        if i >= n {
            break;
        }
    }
}

/// Uniform crossover: each gene comes from `a` or `b` with probability 1/2.
pub fn crossover(a: &FixedBitSet, b: &FixedBitSet, rng: &mut RngStream) -> Result<FixedBitSet> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "crossover parents differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let mut child = a.clone();
    crossover_into(&mut child, b, rng);
    Ok(child)
}

/// In-place form of [`crossover`] with `target` as the first parent.
pub(crate) fn crossover_into(target: &mut FixedBitSet, other: &FixedBitSet, rng: &mut RngStream) {
    for (t, &o) in target.as_mut_slice().iter_mut().zip(other.as_slice()) {
        let mask = rng.random::<u64>() as Block;
        *t = (*t & mask) | (o & !mask);
    }
}
