//! Named instance families and seeded random instances.

use std::fmt;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::{audit_goods, Axiom, AuditOptions};
use crate::error::{FairError, Result};
use crate::model::{Allocation, DecisionInstance, GoodsInstance, Outcome};
use crate::oracles::{exact_optimum, Objective};
use crate::rational::{approximate, int, rat, Rational};

fn table(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|row| row.iter().map(|&v| int(v)).collect())
        .collect()
}

/// Two players, two issues; on each issue alternative 0 pleases player 1
/// and alternative 1 pleases player 2.
pub fn example1() -> DecisionInstance {
    DecisionInstance::from_tables(2, vec![table(&[&[1, 0], &[0, 1]]); 2])
}

/// Two players, eight issues. On the first four the players are opposed;
/// on the last four only player 1 cares.
pub fn example2() -> DecisionInstance {
    let mut tables = vec![table(&[&[1, 0], &[0, 1]]); 4];
    tables.extend(vec![table(&[&[1, 0], &[0, 0]]); 4]);
    DecisionInstance::from_tables(2, tables)
}

/// Two players, two issues. Alternative 0 of issue `t` gives 1 to player
/// `t` only; alternative 1 is a compromise worth 2/3 to both.
pub fn compromise() -> DecisionInstance {
    let tables = (0..2)
        .map(|t| {
            (0..2)
                .map(|i| vec![if i == t { int(1) } else { int(0) }, rat(2, 3)])
                .collect()
        })
        .collect();
    DecisionInstance::from_tables(2, tables)
}

/// An instance where the Nash-optimal outcome gives player 1 only an
/// `n·d` fraction of her PPS, with `n·d` of order `log n / n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NashPpsGap {
    pub instance: DecisionInstance,
    /// Rational stand-in for `(ln n − ln ln n)/n`.
    pub x: Rational,
    /// Player 1's utility for the second alternative of every issue.
    pub d: Rational,
    /// `n·d` must exceed this so that all-second-alternatives beats
    /// handing player 1 the first issue.
    pub first_issue_bound: Rational,
    /// `n·d` must exceed this so that it beats switching one of the other
    /// issues to player 1.
    pub switch_bound: Rational,
}

impl NashPpsGap {
    pub fn players(&self) -> usize {
        self.instance.players
    }

    /// `n·d`: player 1's PPS fraction under the all-second-alternatives outcome.
    pub fn pps_fraction(&self) -> Rational {
        Rational::from_integer(self.players().into()) * &self.d
    }

    pub fn target_outcome(&self) -> Outcome {
        Outcome(vec![1; self.players()])
    }

    pub fn bounds_hold(&self) -> bool {
        let nd = self.pps_fraction();
        nd > self.first_issue_bound && nd > self.switch_bound && self.d < Rational::one()
    }

    /// Confirms by enumeration that the Nash optimum is the
    /// all-second-alternatives outcome.
    pub fn certify(&self, cap: u64) -> Result<bool> {
        let optimum = exact_optimum(&self.instance, Objective::Nash, cap)?;
        Ok(self.bounds_hold() && optimum.outcome == self.target_outcome())
    }
}

/// Margin by which `n·d` exceeds the larger of the two bounds.
const NASH_PPS_MARGIN: (i64, i64) = (101, 100);

/// `n` players and `n` issues with two alternatives each. Issue 1 gives
/// player 1 `(1, d)` and everyone else `(0, x)`; issue `t ≥ 2` gives player
/// 1 `(1, d)`, player `t` `(0, 1)` and everyone else nothing.
pub fn nash_pps_gap(n: usize) -> Result<NashPpsGap> {
    if n < 2 {
        return Err(FairError::InvalidParameter(format!(
            "nash-pps-gap needs at least 2 players, got {n}"
        )));
    }
    let nf = n as f64;
    let x = approximate((nf.ln() - nf.ln().ln()) / nf, 10_000_000);
    let n_rat = Rational::from_integer(n.into());
    let growth = num::pow(Rational::one() + &x, n - 1);
    let first_issue_bound = (growth - Rational::one() + n_rat.recip()).recip();
    let switch_bound = &n_rat * &x / (&n_rat + &x);
    let nd = Rational::new(NASH_PPS_MARGIN.0.into(), NASH_PPS_MARGIN.1.into())
        * first_issue_bound.clone().max(switch_bound.clone());
    let d = nd / &n_rat;
    if d >= Rational::one() {
        return Err(FairError::InvalidParameter(format!(
            "nash-pps-gap with {n} players needs d < 1"
        )));
    }
    let tables = (0..n)
        .map(|t| {
            (0..n)
                .map(|i| match (t, i) {
                    (_, 0) => vec![int(1), d.clone()],
                    (0, _) => vec![int(0), x.clone()],
                    _ if i == t => vec![int(0), int(1)],
                    _ => vec![int(0), int(0)],
                })
                .collect()
        })
        .collect();
    Ok(NashPpsGap {
        instance: DecisionInstance::from_tables(n, tables),
        x,
        d,
        first_issue_bound,
        switch_bound,
    })
}

/// A goods instance with an allocation of interest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodsWitness {
    pub goods: GoodsInstance,
    pub allocation: Allocation,
}

/// An EF1 allocation giving player 1 only `n/(2n−2)` of her RRS: `n²`
/// goods, player 1 values the first `n` at 1 and the rest at `1/(n−1)`;
/// every other player values exactly the goods she receives, at 1.
pub fn ef1_rrs_gap(n: usize) -> Result<GoodsWitness> {
    if n < 2 {
        return Err(FairError::InvalidParameter(format!(
            "ef1-rrs-gap needs at least 2 players, got {n}"
        )));
    }
    let m = n * n;
    let mut bundles = vec![Vec::new(); n];
    bundles[0] = (n..2 * n).collect();
    bundles[1] = vec![0, 1];
    for (i, bundle) in bundles.iter_mut().enumerate().skip(2) {
        bundle.push(i);
        bundle.extend(i * n..(i + 1) * n);
    }
    let mut utilities = vec![vec![Rational::zero(); m]; n];
    for (g, u) in utilities[0].iter_mut().enumerate() {
        *u = if g < n { int(1) } else { rat(1, n as i64 - 1) };
    }
    for (i, bundle) in bundles.iter().enumerate().skip(1) {
        for &g in bundle {
            utilities[i][g] = int(1);
        }
    }
    Ok(GoodsWitness {
        goods: GoodsInstance::new(utilities),
        allocation: Allocation::new(bundles),
    })
}

/// Two players, four goods: `(1−δ, 1−δ, 1/2, 1/2)` and `(1, 1, 0, 0)`.
/// MNW gives player 1 only `2/(3−2δ)` of her RRS.
pub fn mnw_rrs_gap(delta: &Rational) -> Result<GoodsInstance> {
    if !(delta > &Rational::zero() && delta < &Rational::one()) {
        return Err(FairError::InvalidParameter(
            "mnw-rrs-gap needs 0 < delta < 1".into(),
        ));
    }
    let high = Rational::one() - delta;
    Ok(GoodsInstance::new(vec![
        vec![high.clone(), high, rat(1, 2), rat(1, 2)],
        vec![int(1), int(1), int(0), int(0)],
    ]))
}

/// RRS-but-not-Prop1 witness for goods with `m > 4n − 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrsWithoutProp1 {
    pub goods: GoodsInstance,
    pub allocation: Allocation,
    /// Schedule parameter that produced a certified witness.
    pub k: usize,
}

/// Player 1's values in descending order: `(k−1)n + 1`, then `n` up to
/// position `kn − 1`, then 1. She receives only her top good; the rest go
/// round robin to the other players, who value exactly what they get.
/// Certified by audit; fails if no schedule parameter works.
pub fn rrs_without_prop1(n: usize, m: usize) -> Result<RrsWithoutProp1> {
    if n < 2 || m <= 4 * n - 2 {
        return Err(FairError::InvalidParameter(format!(
            "rrs-without-prop1 needs n >= 2 and m > 4n - 2, got n = {n}, m = {m}"
        )));
    }
    let first = m / n;
    let candidates = std::iter::once(first).chain((2..=first + 1).filter(|&k| k != first));
    for k in candidates {
        if k == 0 || k * n > m + 1 {
            continue;
        }
        let witness = rrs_without_prop1_schedule(n, m, k);
        let report = audit_goods(&witness.goods, &witness.allocation, AuditOptions::default())?;
        let player = &report.players[0];
        let rrs_ok = player.check(Axiom::Rrs).is_some_and(|c| c.satisfied);
        let prop1_ok = player.check(Axiom::Prop1).is_some_and(|c| c.satisfied);
        if rrs_ok && !prop1_ok {
            return Ok(witness);
        }
    }
    Err(FairError::InvalidParameter(format!(
        "no certified rrs-without-prop1 witness for n = {n}, m = {m}"
    )))
}

fn rrs_without_prop1_schedule(n: usize, m: usize, k: usize) -> RrsWithoutProp1 {
    let mut utilities = vec![vec![Rational::zero(); m]; n];
    for (j, u) in utilities[0].iter_mut().enumerate() {
        let position = j + 1;
        *u = if position == 1 {
            Rational::from_integer(((k - 1) * n + 1).into())
        } else if position < k * n {
            Rational::from_integer(n.into())
        } else {
            int(1)
        };
    }
    let mut bundles = vec![Vec::new(); n];
    bundles[0].push(0);
    #[allow(clippy::needless_range_loop)]
    for g in 1..m {
        let owner = 1 + (g - 1) % (n - 1);
        bundles[owner].push(g);
        utilities[owner][g] = int(1);
    }
    RrsWithoutProp1 {
        goods: GoodsInstance::new(utilities),
        allocation: Allocation::new(bundles),
        k,
    }
}

/// Goods instance on which no weighted-welfare maximizer meets both RRS
/// shares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedWelfareGap {
    pub goods: GoodsInstance,
    /// `w1/w2` at which the two top goods are tied.
    pub critical_ratio: Rational,
}

/// `(4, 4, 1, 1)` and `(3, 3, 2, 2)`; both RRS shares are 5.
pub fn weighted_welfare_gap() -> WeightedWelfareGap {
    WeightedWelfareGap {
        goods: GoodsInstance::new(table(&[&[4, 4, 1, 1], &[3, 3, 2, 2]])),
        critical_ratio: rat(3, 4),
    }
}

/// Shape of a random instance. Utilities are uniform integers in
/// `low..=high`; for public instances each issue has a uniform number of
/// alternatives in `1..=max_alternatives`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomShape {
    pub players: usize,
    pub items: usize,
    pub max_alternatives: usize,
    pub low: u32,
    pub high: u32,
}

impl RandomShape {
    fn check(&self) -> Result<()> {
        if self.players == 0 || self.items == 0 || self.max_alternatives == 0 {
            return Err(FairError::InvalidParameter(
                "players, items and alternatives must be positive".into(),
            ));
        }
        if self.low > self.high {
            return Err(FairError::InvalidParameter(format!(
                "utility range {}..={} is empty",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

fn draw(rng: &mut impl Rng, shape: &RandomShape) -> Rational {
    Rational::from_integer(rng.gen_range(shape.low..=shape.high).into())
}

pub fn random_public_with(rng: &mut impl Rng, shape: &RandomShape) -> Result<DecisionInstance> {
    shape.check()?;
    let tables = (0..shape.items)
        .map(|_| {
            let k = rng.gen_range(1..=shape.max_alternatives);
            (0..shape.players)
                .map(|_| (0..k).map(|_| draw(rng, shape)).collect())
                .collect()
        })
        .collect();
    Ok(DecisionInstance::from_tables(shape.players, tables))
}

pub fn random_goods_with(rng: &mut impl Rng, shape: &RandomShape) -> Result<GoodsInstance> {
    shape.check()?;
    let utilities = (0..shape.players)
        .map(|_| (0..shape.items).map(|_| draw(rng, shape)).collect())
        .collect();
    Ok(GoodsInstance::new(utilities))
}

pub fn random_public(shape: &RandomShape, seed: u64) -> Result<DecisionInstance> {
    random_public_with(&mut ChaCha8Rng::seed_from_u64(seed), shape)
}

pub fn random_goods(shape: &RandomShape, seed: u64) -> Result<GoodsInstance> {
    random_goods_with(&mut ChaCha8Rng::seed_from_u64(seed), shape)
}

/// Every named family with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Example1,
    Example2,
    Compromise,
    NashPpsGap { n: usize },
    Ef1RrsGap { n: usize },
    MnwRrsGap { delta: Rational },
    RrsWithoutProp1 { n: usize, m: usize },
    WeightedWelfareGap,
    RandomPublic { shape: RandomShape, seed: u64 },
    RandomGoods { shape: RandomShape, seed: u64 },
}

pub const FAMILY_NAMES: [&str; 10] = [
    "example1",
    "example2",
    "compromise",
    "nash-pps-gap",
    "ef1-rrs-gap",
    "mnw-rrs-gap",
    "rrs-without-prop1",
    "weighted-welfare-gap",
    "random-public",
    "random-goods",
];

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Example1 => FAMILY_NAMES[0],
            Family::Example2 => FAMILY_NAMES[1],
            Family::Compromise => FAMILY_NAMES[2],
            Family::NashPpsGap { .. } => FAMILY_NAMES[3],
            Family::Ef1RrsGap { .. } => FAMILY_NAMES[4],
            Family::MnwRrsGap { .. } => FAMILY_NAMES[5],
            Family::RrsWithoutProp1 { .. } => FAMILY_NAMES[6],
            Family::WeightedWelfareGap => FAMILY_NAMES[7],
            Family::RandomPublic { .. } => FAMILY_NAMES[8],
            Family::RandomGoods { .. } => FAMILY_NAMES[9],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a family produces, with any attached allocation or ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Public(DecisionInstance),
    Goods {
        goods: GoodsInstance,
        allocation: Option<Allocation>,
        critical_ratio: Option<Rational>,
    },
}

impl Generated {
    fn goods(goods: GoodsInstance) -> Self {
        Generated::Goods {
            goods,
            allocation: None,
            critical_ratio: None,
        }
    }
}

pub fn generate(family: &Family) -> Result<Generated> {
    Ok(match family {
        Family::Example1 => Generated::Public(example1()),
        Family::Example2 => Generated::Public(example2()),
        Family::Compromise => Generated::Public(compromise()),
        Family::NashPpsGap { n } => Generated::Public(nash_pps_gap(*n)?.instance),
        Family::Ef1RrsGap { n } => {
            let w = ef1_rrs_gap(*n)?;
            Generated::Goods {
                goods: w.goods,
                allocation: Some(w.allocation),
                critical_ratio: None,
            }
        }
        Family::MnwRrsGap { delta } => Generated::goods(mnw_rrs_gap(delta)?),
        Family::RrsWithoutProp1 { n, m } => {
            let w = rrs_without_prop1(*n, *m)?;
            Generated::Goods {
                goods: w.goods,
                allocation: Some(w.allocation),
                critical_ratio: None,
            }
        }
        Family::WeightedWelfareGap => {
            let gap = weighted_welfare_gap();
            Generated::Goods {
                goods: gap.goods,
                allocation: None,
                critical_ratio: Some(gap.critical_ratio),
            }
        }
        Family::RandomPublic { shape, seed } => Generated::Public(random_public(shape, *seed)?),
        Family::RandomGoods { shape, seed } => Generated::goods(random_goods(shape, *seed)?),
    })
}
