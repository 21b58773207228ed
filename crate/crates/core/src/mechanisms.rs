//! Round robin, leximin and Maximum Nash Welfare.
//!
//! All three are deterministic: ties are broken toward the lowest index
//! (issues, alternatives) or the lexicographically smallest choice vector
//! (whole outcomes).

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use num::{BigInt, One, Signed, Zero};

use crate::error::{FairError, Result};
use crate::model::{DecisionInstance, Outcome};
use crate::rational::Rational;
use crate::search::{check_cap, walk, IntTable, Visitor};
use crate::shares::{prop_from_sorted, rrs_from_sorted};

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    RoundRobin,
    Leximin,
    MaxNashWelfare,
    Utilitarian,
    PpsPo,
    Prop1Po,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::RoundRobin => "round-robin",
            Mechanism::Leximin => "leximin",
            Mechanism::MaxNashWelfare => "mnw",
            Mechanism::Utilitarian => "utilitarian",
            Mechanism::PpsPo => "pps-po",
            Mechanism::Prop1Po => "prop1-po",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Mechanism::RoundRobin,
            Mechanism::Leximin,
            Mechanism::MaxNashWelfare,
            Mechanism::Utilitarian,
            Mechanism::PpsPo,
            Mechanism::Prop1Po,
        ]
        .into_iter()
        .find(|m| m.name() == name)
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pick {
    pub player: usize,
    pub issue: usize,
    pub alternative: usize,
}

/// How a player's utilities enter the leximin objective.
///
/// Players with a positive round robin share are divided by it and form the
/// primary tier. Players whose RRS is zero but whose proportional share is
/// positive are divided by Prop and only break ties within the primary
/// tier's optimum. Identically-zero players are left out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalization {
    Rrs(Rational),
    Prop(Rational),
    Excluded,
}

impl Normalization {
    pub fn divisor(&self) -> Option<&Rational> {
        match self {
            Normalization::Rrs(d) | Normalization::Prop(d) => Some(d),
            Normalization::Excluded => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trace {
    RoundRobin {
        order: Vec<usize>,
        picks: Vec<Pick>,
    },
    Leximin {
        normalization: Vec<Normalization>,
    },
    Nash {
        /// Largest set of players that can simultaneously get positive utility.
        support: Vec<usize>,
        /// `Π_{i ∈ support} u_i(c)`.
        product: Rational,
    },
    Utilitarian {
        welfare: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismResult {
    pub mechanism: Mechanism,
    pub outcome: Outcome,
    pub utilities: Vec<Rational>,
    pub trace: Trace,
}

impl MechanismResult {
    pub(crate) fn new(
        instance: &DecisionInstance,
        mechanism: Mechanism,
        outcome: Outcome,
        trace: Trace,
    ) -> Self {
        let utilities = instance.utilities(&outcome);
        MechanismResult {
            mechanism,
            outcome,
            utilities,
            trace,
        }
    }
}

/// Players take turns in `order`; on her turn a player fixes the undecided
/// issue she values most (lowest index on ties) to her favourite
/// alternative (lowest index on ties).
pub fn round_robin(instance: &DecisionInstance, order: &[usize]) -> Result<MechanismResult> {
    instance.check()?;
    let n = instance.players;
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(FairError::InvalidParameter(format!(
            "order {order:?} is not a permutation of 0..{n}"
        )));
    }
    let maxima: Vec<_> = (0..n).map(|i| instance.max_utilities(i)).collect();
    let m = instance.issue_count();
    let mut choices: Vec<Option<usize>> = vec![None; m];
    let mut picks = Vec::with_capacity(m);
    for &player in order.iter().cycle().take(m) {
        let max = &maxima[player];
        let issue = (0..m)
            .filter(|&t| choices[t].is_none())
            .reduce(|best, t| {
                if max.per_issue[t] > max.per_issue[best] {
                    t
                } else {
                    best
                }
            })
            .expect("an undecided issue remains");
        let alternative = max.argmax[issue];
        choices[issue] = Some(alternative);
        picks.push(Pick {
            player,
            issue,
            alternative,
        });
    }
    let outcome = Outcome(choices.into_iter().map(|c| c.expect("decided")).collect());
    Ok(MechanismResult::new(
        instance,
        Mechanism::RoundRobin,
        outcome,
        Trace::RoundRobin {
            order: order.to_vec(),
            picks,
        },
    ))
}

pub fn identity_order(players: usize) -> Vec<usize> {
    (0..players).collect()
}

pub fn leximin_normalization(instance: &DecisionInstance) -> Vec<Normalization> {
    (0..instance.players)
        .map(|i| {
            let sorted = instance.max_utilities(i).sorted;
            let rrs = rrs_from_sorted(&sorted, instance.players);
            let prop = prop_from_sorted(&sorted, instance.players);
            if rrs.is_positive() {
                Normalization::Rrs(rrs)
            } else if prop.is_positive() {
                Normalization::Prop(prop)
            } else {
                Normalization::Excluded
            }
        })
        .collect()
}

/// Leximin over normalized utilities (see [`Normalization`]), by exact
/// branch-and-bound enumeration. Among optimal outcomes the
/// lexicographically smallest choice vector wins.
pub fn leximin(instance: &DecisionInstance, cap: u64) -> Result<MechanismResult> {
    instance.check()?;
    check_cap(instance, cap)?;
    let normalization = leximin_normalization(instance);
    let factors: Vec<Option<Rational>> = normalization
        .iter()
        .map(|norm| norm.divisor().map(|d| d.recip()))
        .collect();
    let table = IntTable::new(instance, &factors);
    let tiers = Tiers::new(&table, &normalization);

    let mut search = LeximinSearch {
        table: &table,
        tiers,
        bound: vec![BigInt::zero(); table.width()],
        best: None,
        choices: vec![0; instance.issue_count()],
    };
    walk(&table, &mut search);
    let best_choices = search.choices;
    Ok(MechanismResult::new(
        instance,
        Mechanism::Leximin,
        Outcome(best_choices),
        Trace::Leximin { normalization },
    ))
}

type LeximinKey = (Vec<BigInt>, Vec<BigInt>);

struct LeximinSearch<'a> {
    table: &'a IntTable,
    tiers: Tiers,
    bound: Vec<BigInt>,
    best: Option<LeximinKey>,
    choices: Vec<usize>,
}

impl Visitor for LeximinSearch<'_> {
    fn enter(&mut self, depth: usize, sums: &[BigInt]) -> bool {
        let Some(best) = &self.best else { return true };
        for (c, b) in self.bound.iter_mut().enumerate() {
            *b = &sums[c] + &self.table.suffix_max[depth][c];
        }
        // Sorting is monotone, so the sorted bound dominates every completion.
        self.tiers.key(&self.bound) > *best
    }

    fn leaf(&mut self, choices: &[usize], sums: &[BigInt]) -> bool {
        let key = self.tiers.key(sums);
        if self.best.as_ref().is_none_or(|best| key > *best) {
            self.best = Some(key);
            self.choices.copy_from_slice(choices);
        }
        true
    }
}

struct Tiers {
    primary: Vec<usize>,
    secondary: Vec<usize>,
}

impl Tiers {
    fn new(table: &IntTable, normalization: &[Normalization]) -> Self {
        let mut primary = Vec::new();
        let mut secondary = Vec::new();
        for (c, &i) in table.players.iter().enumerate() {
            match normalization[i] {
                Normalization::Rrs(_) => primary.push(c),
                Normalization::Prop(_) => secondary.push(c),
                Normalization::Excluded => {}
            }
        }
        Tiers { primary, secondary }
    }

    fn key(&self, values: &[BigInt]) -> LeximinKey {
        let sorted = |cols: &[usize]| {
            let mut v: Vec<BigInt> = cols.iter().map(|&c| values[c].clone()).collect();
            v.sort();
            v
        };
        (sorted(&self.primary), sorted(&self.secondary))
    }
}

/// Maximum Nash Welfare by exact enumeration.
///
/// Phase one finds the largest set `S` of players that can simultaneously
/// receive positive utility (lexicographically smallest set on ties).
/// Phase two maximizes `Π_{i∈S} u_i` over outcomes positive on all of `S`,
/// keeping the lexicographically smallest choice vector among optima.
pub fn max_nash_welfare(instance: &DecisionInstance, cap: u64) -> Result<MechanismResult> {
    instance.check()?;
    check_cap(instance, cap)?;
    let support = max_support(instance);
    let mut factors = vec![None; instance.players];
    for &i in &support {
        factors[i] = Some(Rational::one());
    }
    let table = IntTable::new(instance, &factors);

    let mut search = NashSearch {
        table: &table,
        best: None,
        choices: vec![0; instance.issue_count()],
    };
    walk(&table, &mut search);
    let best_choices = search.choices;
    let outcome = Outcome(best_choices);
    let utilities = instance.utilities(&outcome);
    let product = support
        .iter()
        .fold(Rational::one(), |acc, &i| acc * &utilities[i]);
    Ok(MechanismResult {
        mechanism: Mechanism::MaxNashWelfare,
        outcome,
        utilities,
        trace: Trace::Nash { support, product },
    })
}

struct NashSearch<'a> {
    table: &'a IntTable,
    best: Option<BigInt>,
    choices: Vec<usize>,
}

impl Visitor for NashSearch<'_> {
    fn enter(&mut self, depth: usize, sums: &[BigInt]) -> bool {
        let mut bound = BigInt::one();
        for (c, s) in sums.iter().enumerate() {
            let ub = s + &self.table.suffix_max[depth][c];
            if ub.is_zero() {
                return false;
            }
            bound *= ub;
        }
        self.best.as_ref().is_none_or(|best| bound > *best)
    }

    fn leaf(&mut self, choices: &[usize], sums: &[BigInt]) -> bool {
        let product: BigInt = sums.iter().product();
        if self.best.as_ref().is_none_or(|best| product > *best) {
            self.best = Some(product);
            self.choices.copy_from_slice(choices);
        }
        true
    }
}

/// Largest player set that some outcome makes simultaneously positive.
fn max_support(instance: &DecisionInstance) -> Vec<usize> {
    let n = instance.players;
    let words = n.div_ceil(64).max(1);
    // positive[t][a] = players with positive utility for alternative a.
    let positive: Vec<Vec<Vec<u64>>> = instance
        .issues
        .iter()
        .map(|issue| {
            (0..issue.alternatives())
                .map(|a| {
                    let mut mask = vec![0u64; words];
                    for i in 0..n {
                        if issue.utilities[i][a].is_positive() {
                            mask[i / 64] |= 1 << (i % 64);
                        }
                    }
                    mask
                })
                .collect()
        })
        .collect();
    let mut visited: HashSet<(usize, Vec<u64>)> = HashSet::new();
    let mut finals: Vec<Vec<u64>> = Vec::new();
    let mut stack = vec![(0usize, vec![0u64; words])];
    while let Some((t, mask)) = stack.pop() {
        if !visited.insert((t, mask.clone())) {
            continue;
        }
        if t == positive.len() {
            finals.push(mask);
            continue;
        }
        for alt in &positive[t] {
            let next: Vec<u64> = mask.iter().zip(alt).map(|(x, y)| x | y).collect();
            stack.push((t + 1, next));
        }
    }
    finals
        .into_iter()
        .map(|mask| {
            (0..n)
                .filter(|&i| mask[i / 64] & (1 << (i % 64)) != 0)
                .collect::<Vec<usize>>()
        })
        .max_by(|a, b| match a.len().cmp(&b.len()) {
            Ordering::Equal => b.cmp(a),
            other => other,
        })
        .unwrap_or_default()
}
