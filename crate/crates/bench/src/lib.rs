// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use doob_ap_core::sample::{instance_rng, random_signed, random_weight};
use doob_ap_core::{FilteredSpace, SimpleFunction, Weight};

/// A uniform dyadic space of depth `depth` with a seeded signed function and weight.
pub fn fixture(depth: usize, seed: u64) -> (FilteredSpace, SimpleFunction, Weight) {
    let space = FilteredSpace::dyadic(depth, None).expect("depth within range");
    let mut rng = instance_rng(seed, 0);
    let f = random_signed(&mut rng, space.leaf_count());
    let v = random_weight(&mut rng, &space);
    (space, f, v)
}
