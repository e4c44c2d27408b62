// SPDX-License-Identifier: Apache-2.0

//! Seeded random instances for the verification suites.
//!
//! Instance `i` of a run with seed `s` draws from a Xoshiro256++ stream
//! seeded with `SplitMix64(s) ⊕ i`; Xoshiro's own SplitMix64 seeding then
//! spreads neighbouring indices apart. Each instance is therefore
//! reproducible on its own, independent of how a suite schedules the
//! others.

use rand::{Rng, RngExt, SeedableRng};
use rand_distr::{Distribution, LogNormal};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

use crate::error::Result;
use crate::filtration::{FilteredSpace, LeafSet, SimpleFunction, SpaceDocument};
use crate::weights::Weight;

/// The per-instance generator.
pub fn instance_rng(seed: u64, index: u64) -> Xoshiro256PlusPlus {
    let base = SplitMix64::seed_from_u64(seed).next_u64();
    Xoshiro256PlusPlus::seed_from_u64(base ^ index)
}

/// Cap on leaves for randomly branching trees.
const MAX_RANDOM_LEAVES: usize = 4096;

/// Where a suite takes its spaces from.
#[derive(Debug, Clone)]
pub enum SpaceSource {
    /// The same space for every instance.
    Fixed(FilteredSpace),
    /// Dyadic trees of depth `1..=max_depth` with uniform or random masses.
    Dyadic { max_depth: usize },
    /// Dyadic trees half the time, randomly branching trees otherwise.
    Mixed { max_depth: usize },
}

impl SpaceSource {
    pub fn draw(&self, rng: &mut impl Rng) -> Result<FilteredSpace> {
        match self {
            Self::Fixed(space) => Ok(space.clone()),
            Self::Dyadic { max_depth } => random_dyadic(rng, *max_depth),
            Self::Mixed { max_depth } => {
                if rng.random_bool(0.5) {
                    random_dyadic(rng, *max_depth)
                } else {
                    random_tree(rng, *max_depth)
                }
            }
        }
    }
}

fn random_masses(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.05..1.0)).collect()
}

pub fn random_dyadic(rng: &mut impl Rng, max_depth: usize) -> Result<FilteredSpace> {
    let depth = rng.random_range(1..=max_depth.max(1));
    if rng.random_bool(0.5) {
        FilteredSpace::dyadic(depth, None)
    } else {
        let masses = random_masses(rng, 1 << depth);
        FilteredSpace::dyadic(depth, Some(&masses))
    }
}

/// A tree where every node has one to three children, with random leaf masses.
pub fn random_tree(rng: &mut impl Rng, max_depth: usize) -> Result<FilteredSpace> {
    let depth = rng.random_range(1..=max_depth.max(1));
    // children[i][k]: number of children of node k at level i.
    let mut children: Vec<Vec<usize>> = Vec::with_capacity(depth);
    let mut width = 1usize;
    for _ in 0..depth {
        let most = if width * 3 <= MAX_RANDOM_LEAVES {
            3
        } else if width * 2 <= MAX_RANDOM_LEAVES {
            2
        } else {
            1
        };
        let row: Vec<usize> = (0..width).map(|_| rng.random_range(1..=most)).collect();
        width = row.iter().sum();
        children.push(row);
    }
    let mut sizes = vec![vec![1usize; width]];
    for row in children.iter().rev() {
        let below = sizes.last().expect("nonempty");
        let mut at = 0;
        let level: Vec<usize> = row
            .iter()
            .map(|&c| {
                let s = below[at..at + c].iter().sum();
                at += c;
                s
            })
            .collect();
        sizes.push(level);
    }
    sizes.reverse();
    FilteredSpace::from_document(&SpaceDocument {
        depth,
        leaf_measures: random_masses(rng, width),
        levels: sizes,
    })
}

/// Signed values: some zeros, log-normal magnitudes, occasional spikes.
pub fn random_signed(rng: &mut impl Rng, n: usize) -> SimpleFunction {
    let magnitude = LogNormal::new(0.0, 1.5).expect("valid parameters");
    let values = (0..n)
        .map(|_| {
            if rng.random_bool(0.15) {
                return 0.0;
            }
            let mut x = magnitude.sample(rng);
            if rng.random_bool(0.05) {
                x *= 100.0;
            }
            if rng.random_bool(0.5) {
                -x
            } else {
                x
            }
        })
        .collect();
    SimpleFunction::new(values).expect("finite samples")
}

pub fn random_nonnegative(rng: &mut impl Rng, n: usize) -> SimpleFunction {
    random_signed(rng, n).abs()
}

/// Log-normal weight with a random spread, optionally modulated by a
/// log-normal factor that is constant on the nodes of one level.
pub fn random_weight(rng: &mut impl Rng, space: &FilteredSpace) -> Weight {
    let spread = rng.random_range(0.1..2.5);
    let noise = LogNormal::new(0.0, spread).expect("valid parameters");
    let mut values: Vec<f64> = (0..space.leaf_count()).map(|_| noise.sample(rng)).collect();
    if rng.random_bool(0.5) {
        let level = rng.random_range(0..=space.depth());
        let block = LogNormal::new(0.0, rng.random_range(0.5..2.0)).expect("valid parameters");
        for node in space.nodes(level).collect::<Vec<_>>() {
            let factor = block.sample(rng);
            for leaf in space.node_range(node) {
                values[leaf] *= factor;
            }
        }
    }
    Weight::new(values).expect("log-normal samples are positive")
}

/// A union of level-`level` nodes, each kept with probability 1/2, or the
/// whole space half the time. Never empty.
pub fn random_measurable_set(rng: &mut impl Rng, space: &FilteredSpace, level: usize) -> LeafSet {
    let n = space.leaf_count();
    if rng.random_bool(0.5) {
        return LeafSet::full(n);
    }
    let nodes: Vec<_> = space.nodes(level).collect();
    let mut set = LeafSet::empty(n);
    for &node in &nodes {
        if rng.random_bool(0.5) {
            for leaf in space.node_range(node) {
                set.insert(leaf);
            }
        }
    }
    if set.is_empty() {
        let node = nodes[rng.random_range(0..nodes.len())];
        for leaf in space.node_range(node) {
            set.insert(leaf);
        }
    }
    set
}

pub fn pick<T: Copy>(rng: &mut impl Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| instance_rng(7, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(instance_rng(7, 3).next_u64(), instance_rng(7, 4).next_u64());
        assert_ne!(instance_rng(7, 3).next_u64(), instance_rng(8, 3).next_u64());
    }

    #[test]
    fn random_trees_are_valid() {
        let mut rng = instance_rng(1, 0);
        for _ in 0..50 {
            let space = random_tree(&mut rng, 8).unwrap();
            assert!(space.leaf_count() <= MAX_RANDOM_LEAVES);
            let again = FilteredSpace::from_document(&space.to_document()).unwrap();
            assert_eq!(again.leaf_count(), space.leaf_count());
            let v = random_weight(&mut rng, &space);
            assert_eq!(v.len(), space.leaf_count());
            let level = rng.random_range(0..=space.depth());
            let set = random_measurable_set(&mut rng, &space, level);
            assert!(!set.is_empty() && space.is_measurable(&set, level));
        }
    }

    #[test]
    fn signed_samples_have_both_signs() {
        let mut rng = instance_rng(2, 0);
        let f = random_signed(&mut rng, 400);
        assert!(f.values().iter().any(|&x| x < 0.0));
        assert!(f.values().iter().any(|&x| x > 0.0));
        assert!(random_nonnegative(&mut rng, 100).is_nonnegative());
    }
}
