//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p fairdec-core --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fairdec_core::audit::{Alpha, AuditReport};
use fairdec_core::generators::{
    ef1_rrs_gap, example1, example2, mnw_rrs_gap, nash_pps_gap, random_goods_with, random_public_with,
    rrs_without_prop1, weighted_welfare_gap, RandomShape,
};
use fairdec_core::oracles::{enumerate_outcomes, exact_optimum, feasible_product_lower_bound, Objective};
use fairdec_core::popt::is_weighted_argmax;
use fairdec_core::rational::{int, rat};
use fairdec_core::{
    audit, audit_goods, leximin, max_nash_welfare, pps_po_allocate, round_robin, share_profile, Allocation,
    AuditOptions, Axiom, DecisionInstance, GoodsInstance, Outcome, Rational, WeightVector,
};

const SEED: u64 = 20_190_527;
const CAP: u64 = 10_000_000;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(criterion: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + criterion);
    rng.set_stream(trial as u64);
    rng
}

fn shape(players: usize, items: usize, max_alternatives: usize, low: u32, high: u32) -> RandomShape {
    RandomShape {
        players,
        items,
        max_alternatives,
        low,
        high,
    }
}

/// Random public instance with `2..=n` players and `1..=m` issues.
fn public(criterion: u64, trial: usize, n: usize, m: usize, k: usize) -> DecisionInstance {
    let mut rng = rng(criterion, trial);
    let players = rng.gen_range(2..=n);
    let issues = rng.gen_range(1..=m);
    random_public_with(&mut rng, &shape(players, issues, k, 0, 5)).unwrap()
}

fn goods(criterion: u64, trial: usize, n: usize, m: usize, low: u32, high: u32) -> GoodsInstance {
    let mut rng = rng(criterion, trial);
    let players = rng.gen_range(2..=n);
    let items = rng.gen_range(1..=m);
    random_goods_with(&mut rng, &shape(players, items, 1, low, high)).unwrap()
}

/// Runs `check` on every trial in parallel and reports the first failure.
fn all_trials(trials: usize, check: impl Fn(usize) -> Result<(), String> + Sync) -> Result<(), String> {
    let failures: Vec<String> = (0..trials)
        .into_par_iter()
        .filter_map(|t| check(t).err().map(|e| format!("trial {t}: {e}")))
        .collect();
    match failures.first() {
        Some(first) => Err(format!("{} failing trials; first: {first}", failures.len())),
        None => Ok(()),
    }
}

fn no_po() -> AuditOptions {
    AuditOptions::default()
}

fn with_po() -> AuditOptions {
    AuditOptions {
        po_cap: Some(CAP),
        mms_cap: None,
    }
}

fn alpha(report: &AuditReport, player: usize, axiom: Axiom) -> Alpha {
    report.players[player].alpha(axiom).cloned().expect("axiom audited")
}

fn ints(values: &[i64]) -> Vec<Rational> {
    values.iter().map(|&v| int(v)).collect()
}

fn golden_examples() -> Check {
    let e1 = example1();
    let profile = share_profile(&e1, Some(1000)).map_err(|e| e.to_string())?;
    for s in &profile.players {
        ensure!(
            [&s.prop, &s.rrs, &s.pps, s.mms.as_ref().unwrap()].iter().all(|v| **v == int(1)),
            "example 1 shares {:?}",
            s
        );
    }
    let all_first = audit(&e1, &Outcome(vec![0, 0]), no_po()).unwrap();
    ensure!(all_first.players[0].utility == int(2) && all_first.players[1].utility == int(0), "example 1 all-a1 utilities");
    for axiom in [Axiom::Prop, Axiom::Rrs, Axiom::Pps] {
        ensure!(!all_first.players[1].check(axiom).unwrap().satisfied, "example 1 all-a1 should violate {axiom}");
    }
    ensure!(all_first.all_satisfied(Axiom::Prop1), "example 1 all-a1 should satisfy Prop1");
    let fair = audit(&e1, &Outcome(vec![0, 1]), with_po()).unwrap();
    ensure!(fair.players.iter().all(|p| p.utility == int(1)), "example 1 fair outcome utilities");
    for axiom in [Axiom::Prop, Axiom::Prop1, Axiom::Rrs, Axiom::Pps] {
        ensure!(fair.all_satisfied(axiom), "example 1 fair outcome should satisfy {axiom}");
    }
    ensure!(fair.po.as_ref().unwrap().satisfied, "example 1 fair outcome should be PO");
    let rr = round_robin(&e1, &[0, 1]).unwrap();
    ensure!(rr.outcome == Outcome(vec![0, 1]) && rr.utilities == ints(&[1, 1]), "example 1 round robin");

    let e2 = example2();
    let profile = share_profile(&e2, Some(100_000)).unwrap();
    let p1 = &profile.players[0];
    let p2 = &profile.players[1];
    ensure!(
        (p1.prop.clone(), p1.rrs.clone(), p1.pps.clone()) == (int(4), int(4), int(4)),
        "example 2 player 1 shares {:?}",
        p1
    );
    ensure!(
        (p2.prop.clone(), p2.rrs.clone(), p2.pps.clone(), p2.mms.clone().unwrap()) == (int(2), int(2), int(0), int(2)),
        "example 2 player 2 shares {:?}",
        p2
    );
    let all_first = audit(&e2, &Outcome(vec![0; 8]), no_po()).unwrap();
    ensure!(all_first.players[0].utility == int(8) && all_first.players[1].utility == int(0), "example 2 all-a1 utilities");
    ensure!(all_first.all_satisfied(Axiom::Pps), "example 2 all-a1 should satisfy PPS");
    ensure!(alpha(&all_first, 1, Axiom::Pps) == Alpha::Unbounded, "player 2 PPS α should be unbounded");
    ensure!(alpha(&all_first, 1, Axiom::Rrs) == Alpha::Finite(int(0)), "player 2 RRS α should be 0");
    ensure!(alpha(&all_first, 1, Axiom::Prop1) == Alpha::Finite(rat(1, 2)), "player 2 Prop1 α should be 1/2");
    let fair = audit(&e2, &Outcome(vec![1, 1, 1, 1, 0, 0, 0, 0]), no_po()).unwrap();
    ensure!(fair.players.iter().all(|p| p.utility == int(4)), "example 2 fair outcome utilities");
    for axiom in [Axiom::Prop, Axiom::Prop1, Axiom::Rrs, Axiom::Pps] {
        ensure!(fair.all_satisfied(axiom), "example 2 fair outcome should satisfy {axiom}");
    }
    Ok("example 1 and 2 shares, all-a1 audits and Prop outcomes match".into())
}

fn round_robin_guarantees() -> Check {
    all_trials(1000, |t| {
        let instance = public(2, t, 4, 6, 3);
        let n = instance.players;
        for shift in 0..n {
            let order: Vec<usize> = (0..n).map(|k| (k + shift) % n).collect();
            let result = round_robin(&instance, &order).map_err(|e| e.to_string())?;
            let report = audit(&instance, &result.outcome, no_po()).map_err(|e| e.to_string())?;
            ensure!(report.all_satisfied(Axiom::Rrs), "RRS fails for order {order:?}");
            ensure!(report.all_satisfied(Axiom::Prop1), "Prop1 fails for order {order:?}");
        }
        Ok(())
    })?;
    Ok("1000 instances, every cyclic order".into())
}

fn leximin_guarantees() -> Check {
    let half = rat(1, 2);
    all_trials(500, |t| {
        let instance = public(3, t, 4, 6, 3);
        let result = leximin(&instance, CAP).map_err(|e| e.to_string())?;
        let report = audit(&instance, &result.outcome, with_po()).map_err(|e| e.to_string())?;
        ensure!(report.all_satisfied(Axiom::Rrs), "leximin RRS");
        ensure!(report.all_at_least(Axiom::Prop1, &half), "leximin 1/2-Prop1");
        ensure!(report.po.as_ref().unwrap().satisfied, "leximin PO");
        for outcome in enumerate_outcomes(&instance, CAP).map_err(|e| e.to_string())? {
            let report = audit(&instance, &outcome, no_po()).unwrap();
            for (i, p) in report.players.iter().enumerate() {
                if p.check(Axiom::Rrs).unwrap().satisfied {
                    ensure!(
                        p.alpha(Axiom::Prop1).unwrap().at_least(&half),
                        "outcome {:?} meets RRS but not 1/2-Prop1 for player {i}",
                        outcome.0
                    );
                }
            }
        }
        Ok(())
    })?;
    Ok("500 instances; every RRS outcome is 1/2-Prop1".into())
}

fn mnw_guarantees() -> Check {
    all_trials(500, |t| {
        let instance = public(3, t, 4, 6, 3);
        let level = rat(1, instance.players as i64);
        let result = max_nash_welfare(&instance, CAP).map_err(|e| e.to_string())?;
        let report = audit(&instance, &result.outcome, with_po()).map_err(|e| e.to_string())?;
        ensure!(report.all_satisfied(Axiom::Prop1), "MNW Prop1");
        ensure!(report.po.as_ref().unwrap().satisfied, "MNW PO");
        ensure!(report.all_at_least(Axiom::Rrs, &level), "MNW 1/n-RRS");
        ensure!(report.all_at_least(Axiom::Pps, &level), "MNW 1/n-PPS");
        let oracle = exact_optimum(&instance, Objective::Nash, CAP).map_err(|e| e.to_string())?;
        ensure!(oracle.utilities == result.utilities, "MNW utilities differ from enumeration");
        Ok(())
    })?;
    Ok("same 500 instances; utilities equal the enumerated optimum".into())
}

fn goods_mnw() -> Check {
    all_trials(500, |t| {
        let goods = goods(5, t, 3, 8, 0, 10);
        let n = goods.players as i64;
        let result = max_nash_welfare(&goods.to_public(), CAP).map_err(|e| e.to_string())?;
        let allocation = Allocation::from_outcome(goods.players, &result.outcome);
        let report = audit_goods(&goods, &allocation, no_po()).map_err(|e| e.to_string())?;
        for axiom in [Axiom::Ef1, Axiom::Pps, Axiom::Prop1] {
            ensure!(report.all_satisfied(axiom), "MNW fails {axiom}");
        }
        ensure!(report.all_at_least(Axiom::Rrs, &rat(n, 2 * n - 1)), "MNW below n/(2n-1)-RRS");
        Ok(())
    })?;

    let delta = rat(1, 100);
    let instance = mnw_rrs_gap(&delta).map_err(|e| e.to_string())?;
    let result = max_nash_welfare(&instance.to_public(), CAP).unwrap();
    let allocation = Allocation::from_outcome(2, &result.outcome);
    ensure!(
        allocation == Allocation::new(vec![vec![2, 3], vec![0, 1]]),
        "MNW allocation {:?}",
        allocation.bundles()
    );
    let report = audit_goods(&instance, &allocation, no_po()).unwrap();
    let expected = rat(2, 1) / (int(3) - int(2) * &delta);
    ensure!(expected == rat(100, 149), "closed form");
    ensure!(alpha(&report, 0, Axiom::Rrs) == Alpha::Finite(expected), "player 1 RRS α {}", alpha(&report, 0, Axiom::Rrs));

    let witness = ef1_rrs_gap(4).map_err(|e| e.to_string())?;
    let report = audit_goods(&witness.goods, &witness.allocation, no_po()).unwrap();
    ensure!(report.all_satisfied(Axiom::Ef1), "gap witness should be EF1");
    ensure!(alpha(&report, 0, Axiom::Rrs) == Alpha::Finite(rat(2, 3)), "gap witness RRS α {}", alpha(&report, 0, Axiom::Rrs));
    Ok("500 goods instances; gap families give 100/149 and 2/3".into())
}

fn nash_pps_upper_bound() -> Check {
    let gap = nash_pps_gap(8).map_err(|e| e.to_string())?;
    ensure!(gap.bounds_hold(), "defining inequalities fail");
    ensure!(gap.certify(CAP).map_err(|e| e.to_string())?, "Nash optimum is not all second alternatives");
    let optimum = exact_optimum(&gap.instance, Objective::Nash, CAP).unwrap();
    let report = audit(&gap.instance, &optimum.outcome, no_po()).unwrap();
    let nd = gap.pps_fraction();
    ensure!(alpha(&report, 0, Axiom::Pps) == Alpha::Finite(nd.clone()), "player 1 PPS α differs from n·d");
    ensure!(nd < rat(1, 2), "n·d = {} is not below 1/2", nd);
    Ok(format!("n = 8, n·d = {} ≈ {:.4}", nd, to_f64(&nd)))
}

fn to_f64(value: &Rational) -> f64 {
    use num::ToPrimitive;
    value.to_f64().unwrap_or(f64::NAN)
}

fn pps_po() -> Check {
    const SMALL: usize = 300;
    let small = std::sync::atomic::AtomicUsize::new(0);
    all_trials(1000, |t| {
        let goods = if t < SMALL { goods(7, t, 3, 8, 1, 10) } else { goods(7, t, 6, 30, 1, 10) };
        let n = goods.players;
        let p = goods.goods / n;
        let result = pps_po_allocate(&goods).map_err(|e| e.to_string())?;
        ensure!(result.allocation.bundles().iter().all(|b| b.len() >= p), "a player has fewer than {p} goods");
        ensure!(is_weighted_argmax(&goods, &result.weights, &result.allocation), "weighted argmax witness fails");
        let po = n <= 3 && goods.goods <= 8;
        let options = if po { with_po() } else { no_po() };
        let report = audit_goods(&goods, &result.allocation, options).map_err(|e| e.to_string())?;
        ensure!(report.all_satisfied(Axiom::Pps), "PPS fails");
        if po {
            small.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            ensure!(report.po.as_ref().unwrap().satisfied, "PO fails");
        }
        ensure!(result.trace.rounds.len() <= goods.goods, "more than m rounds");
        for round in &result.trace.rounds {
            ensure!(round.metric_after < round.metric_before, "metric did not decrease");
            ensure!(round.dec.len() <= n, "DEC grew more than n times");
            ensure!(round.transfers.len() <= n, "more than n transfers");
        }
        Ok(())
    })?;
    Ok(format!("1000 instances, {} checked for PO", small.into_inner()))
}

fn weighted_welfare_gap_check() -> Check {
    let gap = weighted_welfare_gap();
    let goods = &gap.goods;
    let rrs = rat(5, 1);
    let public = goods.to_public();
    ensure!(
        (0..2).all(|i| fairdec_core::rrs_share(&public, i).unwrap() == rrs),
        "RRS shares are not 5"
    );
    let mut ratios: Vec<Rational> = (1..=200).map(|k| rat(k, 40)).collect();
    if !ratios.contains(&gap.critical_ratio) {
        ratios.push(gap.critical_ratio.clone());
    }
    let allocations: Vec<Allocation> = (0..16usize)
        .map(|code| {
            let owners: Vec<usize> = (0..4).map(|g| (code >> (3 - g)) & 1).collect();
            Allocation::from_owners(2, &owners)
        })
        .collect();
    let mut maximizers = 0;
    let mut at_tie = 0;
    for ratio in &ratios {
        let weights = WeightVector::new(vec![ratio.clone(), int(1)]).map_err(|e| e.to_string())?;
        for allocation in &allocations {
            if !is_weighted_argmax(goods, &weights, allocation) {
                continue;
            }
            maximizers += 1;
            if *ratio == gap.critical_ratio {
                at_tie += 1;
            }
            let u = goods.utilities_of(allocation);
            ensure!(u[0] < rrs || u[1] < rrs, "ratio {ratio} gives both players RRS with {:?}", allocation.bundles());
        }
    }
    ensure!(at_tie == 4, "expected 4 tie-breakings at the critical ratio, found {at_tie}");
    Ok(format!("{} ratios, {maximizers} maximizers, {at_tie} at the tie", ratios.len()))
}

fn rrs_versus_prop1() -> Check {
    let per_size = 200;
    all_trials(6 * per_size, |t| {
        let m = t / per_size + 1;
        let mut rng = rng(9, t);
        let goods = random_goods_with(&mut rng, &shape(2, m, 1, 0, 6)).unwrap();
        for code in 0..1usize << m {
            let owners: Vec<usize> = (0..m).map(|g| (code >> g) & 1).collect();
            let allocation = Allocation::from_owners(2, &owners);
            let report = audit_goods(&goods, &allocation, no_po()).unwrap();
            for p in &report.players {
                if p.check(Axiom::Rrs).unwrap().satisfied {
                    ensure!(p.check(Axiom::Prop1).unwrap().satisfied, "RRS without Prop1 at m = {m}: {owners:?}");
                }
            }
        }
        Ok(())
    })?;
    let witness = rrs_without_prop1(2, 7).map_err(|e| e.to_string())?;
    let report = audit_goods(&witness.goods, &witness.allocation, no_po()).unwrap();
    ensure!(report.all_satisfied(Axiom::Rrs), "witness should satisfy RRS");
    ensure!(!report.all_satisfied(Axiom::Prop1), "witness should violate Prop1");
    Ok(format!("{} instances with m <= 6 exhausted; m = 7 witness certified (k = {})", 6 * per_size, witness.k))
}

fn product_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    for trial in 0..10_000 {
        let n = rng.gen_range(1..=8);
        let delta = rat(rng.gen_range(1..1000), 1000);
        // Split δ into n random deficits, then lift some entries above 1.
        let cuts: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=100)).collect();
        let total: i64 = cuts.iter().sum::<i64>().max(1);
        let xs: Vec<Rational> = cuts
            .iter()
            .map(|&c| {
                if rng.gen_bool(0.25) {
                    int(1) + rat(rng.gen_range(0..100), 10)
                } else {
                    int(1) - &delta * rat(c, total)
                }
            })
            .collect();
        let bound = feasible_product_lower_bound(&xs, &delta);
        ensure!(bound.feasible, "trial {trial}: generated set is infeasible");
        ensure!(bound.product_ok, "trial {trial}: product below 1 - δ");
    }
    Ok("10000 feasible sets".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("C1 golden examples", golden_examples),
        ("C2 round robin RRS and Prop1", round_robin_guarantees),
        ("C3 leximin RRS, 1/2-Prop1, PO", leximin_guarantees),
        ("C4 MNW Prop1, PO, 1/n-RRS", mnw_guarantees),
        ("C5 MNW on private goods", goods_mnw),
        ("C6 MNW PPS gap", nash_pps_upper_bound),
        ("C7 PPS + PO allocation", pps_po),
        ("C8 weighted welfare gap", weighted_welfare_gap_check),
        ("C9 RRS versus Prop1 on goods", rrs_versus_prop1),
        ("C10 product lower bound", product_bound),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
