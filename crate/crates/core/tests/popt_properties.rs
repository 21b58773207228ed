mod common;

use common::goods_instance;
use fairdec_core::popt::{is_weighted_argmax, PpsPoResult};
use fairdec_core::{
    audit_goods, check_pareto_optimal_goods, pps_po_allocate, prop1_po_search, pps_share, weighted_welfare_allocation,
    Allocation, Axiom, AuditOptions, FairError, GoodsInstance, WeightVector,
};
use fairdec_core::rational::int;
use proptest::prelude::*;

/// Replays the recorded transfers from the uniform-weight start, checking
/// the per-round invariants, and returns the final allocation.
fn replay(goods: &GoodsInstance, result: &PpsPoResult) -> Result<Allocation, TestCaseError> {
    let n = goods.players;
    let p = goods.goods / n;
    let start = weighted_welfare_allocation(goods, &WeightVector::uniform(n)).unwrap();
    let mut owners = start.owners(goods.goods);
    let sizes = |owners: &[usize]| {
        let mut s = vec![0; n];
        for &o in owners {
            s[o] += 1;
        }
        s
    };
    prop_assert!(result.trace.rounds.len() <= goods.goods);
    let mut reached = vec![false; n];
    for round in &result.trace.rounds {
        prop_assert!(round.metric_after < round.metric_before);
        prop_assert!(round.dec.len() <= n);
        prop_assert!(round.transfers.len() <= n);
        let before = sizes(&owners);
        for t in &round.transfers {
            prop_assert_eq!(owners[t.good], t.from);
            prop_assert!(round.dec.last().unwrap().contains(&t.to));
            owners[t.good] = t.to;
        }
        let after = sizes(&owners);
        for i in 0..n {
            let delta = after[i] as i64 - before[i] as i64;
            if round.at.contains(&i) {
                prop_assert_eq!(delta, 0);
            }
            prop_assert!((-1..=1).contains(&delta));
            if before[i] >= p {
                reached[i] = true;
            }
            if reached[i] {
                prop_assert!(after[i] >= p, "player {} fell below the target", i);
            }
        }
        let gained: Vec<usize> = (0..n).filter(|&i| after[i] > before[i]).collect();
        let lost: Vec<usize> = (0..n).filter(|&i| after[i] < before[i]).collect();
        prop_assert_eq!(gained.len(), 1);
        prop_assert_eq!(lost.len(), 1);
        prop_assert!(round.below.contains(&gained[0]));
        prop_assert!(round.above.contains(&lost[0]));
    }
    Ok(Allocation::from_owners(n, &owners))
}

fn check_pps_po(goods: &GoodsInstance, result: &PpsPoResult) -> Result<(), TestCaseError> {
    let n = goods.players;
    let p = goods.goods / n;
    prop_assert!(is_weighted_argmax(goods, &result.weights, &result.allocation));
    prop_assert_eq!(&replay(goods, result)?, &result.allocation);
    let public = goods.to_public();
    for i in 0..n {
        if pps_share(&public, i).unwrap() > int(0) {
            prop_assert!(result.allocation.bundle(i).len() >= p);
        }
    }
    let report = audit_goods(goods, &result.allocation, AuditOptions::default()).unwrap();
    prop_assert!(report.all_satisfied(Axiom::Pps));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pps_po_on_positive_utilities(goods in goods_instance(6, 20, 1, 10)) {
        let result = pps_po_allocate(&goods).unwrap();
        check_pps_po(&goods, &result)?;
    }

    #[test]
    fn pps_po_is_pareto_optimal(goods in goods_instance(3, 7, 1, 10)) {
        let result = pps_po_allocate(&goods).unwrap();
        prop_assert!(check_pareto_optimal_goods(&goods, &result.allocation, 100_000).unwrap().satisfied);
    }

    #[test]
    fn pps_po_with_zero_utilities(goods in goods_instance(4, 10, 0, 4)) {
        match pps_po_allocate(&goods) {
            Ok(result) => check_pps_po(&goods, &result)?,
            Err(FairError::Degenerate(_)) => {}
            Err(other) => prop_assert!(false, "unexpected error {}", other),
        }
    }

    #[test]
    fn prop1_search_stays_weighted_optimal(goods in goods_instance(4, 12, 1, 10)) {
        let result = prop1_po_search(&goods, 200).unwrap();
        prop_assert!(is_weighted_argmax(&goods, &result.weights, &result.allocation));
        let report = audit_goods(&goods, &result.allocation, AuditOptions::default()).unwrap();
        prop_assert_eq!(result.certified, report.all_satisfied(Axiom::Prop1));
        prop_assert!(result.rounds <= 200);
    }
}
