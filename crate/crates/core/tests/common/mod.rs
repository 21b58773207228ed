#![allow(dead_code)]

use fairdec_core::rational::int;
use fairdec_core::{Allocation, DecisionInstance, GoodsInstance, Rational};
use proptest::prelude::*;

pub fn utility(high: i64) -> impl Strategy<Value = Rational> {
    (0..=high).prop_map(int)
}

/// Public instances with up to `players` players, `issues` issues and
/// `alternatives` alternatives per issue, utilities in `0..=high`.
pub fn public_instance(
    players: usize,
    issues: usize,
    alternatives: usize,
    high: i64,
) -> impl Strategy<Value = DecisionInstance> {
    (1..=players, 1..=issues).prop_flat_map(move |(n, m)| {
        prop::collection::vec(
            (1..=alternatives).prop_flat_map(move |k| {
                prop::collection::vec(prop::collection::vec(utility(high), k), n)
            }),
            m,
        )
        .prop_map(move |tables| DecisionInstance::from_tables(n, tables))
    })
}

pub fn goods_instance(players: usize, goods: usize, low: i64, high: i64) -> impl Strategy<Value = GoodsInstance> {
    (1..=players, 1..=goods).prop_flat_map(move |(n, m)| {
        prop::collection::vec(prop::collection::vec((low..=high).prop_map(int), m), n).prop_map(GoodsInstance::new)
    })
}

/// Every allocation of `goods` goods to `players` players, as owner vectors
/// in lexicographic order.
pub fn all_allocations(players: usize, goods: usize) -> impl Iterator<Item = Allocation> {
    let total = players.pow(goods as u32);
    (0..total).map(move |mut code| {
        let mut owners = vec![0; goods];
        for slot in owners.iter_mut().rev() {
            *slot = code % players;
            code /= players;
        }
        Allocation::from_owners(players, &owners)
    })
}
