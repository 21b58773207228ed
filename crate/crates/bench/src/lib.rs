//! Shared fixtures for the criterion benchmarks.

use fairdec_core::generators::{random_goods, random_public, RandomShape};
use fairdec_core::{DecisionInstance, GoodsInstance};

pub fn shape(players: usize, items: usize, max_alternatives: usize) -> RandomShape {
    RandomShape {
        players,
        items,
        max_alternatives,
        low: 0,
        high: 10,
    }
}

/// A fixed batch of seeded public instances.
pub fn public_batch(players: usize, issues: usize, max_alternatives: usize, count: u64) -> Vec<DecisionInstance> {
    (0..count)
        .map(|seed| random_public(&shape(players, issues, max_alternatives), seed).expect("valid shape"))
        .collect()
}

/// A fixed batch of seeded goods instances with positive utilities.
pub fn goods_batch(players: usize, goods: usize, count: u64) -> Vec<GoodsInstance> {
    let shape = RandomShape {
        low: 1,
        ..shape(players, goods, 2)
    };
    (0..count)
        .map(|seed| random_goods(&shape, seed).expect("valid shape"))
        .collect()
}
