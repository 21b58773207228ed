//! Per-player fairness audits (Prop, Prop1, RRS, PPS, MMS, EF, EF1) with
//! exact α-levels, and exhaustive Pareto-optimality checks.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, Zero};

use crate::error::Result;
use crate::model::{Allocation, DecisionInstance, GoodsInstance, Outcome};
use crate::rational::{format_rational, Rational};
use crate::search::{check_cap, walk, IntTable, Visitor};
use crate::shares::{mms_of_values, pps_from_sorted, prop_from_sorted, rrs_from_sorted, PlayerShares};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    Prop,
    Prop1,
    Rrs,
    Pps,
    Mms,
    Ef,
    Ef1,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Prop => "Prop",
            Axiom::Prop1 => "Prop1",
            Axiom::Rrs => "RRS",
            Axiom::Pps => "PPS",
            Axiom::Mms => "MMS",
            Axiom::Ef => "EF",
            Axiom::Ef1 => "EF1",
        }
    }

    pub const ALL: [Axiom; 7] = [
        Axiom::Prop,
        Axiom::Prop1,
        Axiom::Rrs,
        Axiom::Pps,
        Axiom::Mms,
        Axiom::Ef,
        Axiom::Ef1,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How far a player is from a share: `utility / share`, or `Unbounded`
/// when the share is zero. `Unbounded` compares above every rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alpha {
    Finite(Rational),
    Unbounded,
}

impl Alpha {
    pub fn ratio(value: &Rational, share: &Rational) -> Alpha {
        if share.is_zero() {
            Alpha::Unbounded
        } else {
            Alpha::Finite(value / share)
        }
    }

    pub fn at_least(&self, threshold: &Rational) -> bool {
        match self {
            Alpha::Finite(a) => a >= threshold,
            Alpha::Unbounded => true,
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Alpha::Finite(a) => Some(a),
            Alpha::Unbounded => None,
        }
    }
}

impl PartialOrd for Alpha {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Alpha {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Alpha::Finite(a), Alpha::Finite(b)) => a.cmp(b),
            (Alpha::Finite(_), Alpha::Unbounded) => Ordering::Less,
            (Alpha::Unbounded, Alpha::Finite(_)) => Ordering::Greater,
            (Alpha::Unbounded, Alpha::Unbounded) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => f.write_str(&format_rational(a)),
            Alpha::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub satisfied: bool,
    pub alpha: Alpha,
}

impl AxiomCheck {
    fn new(alpha: Alpha) -> Self {
        AxiomCheck {
            satisfied: alpha.at_least(&Rational::from_integer(1.into())),
            alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerAudit {
    pub utility: Rational,
    pub shares: PlayerShares,
    pub axioms: BTreeMap<Axiom, AxiomCheck>,
}

impl PlayerAudit {
    pub fn check(&self, axiom: Axiom) -> Option<&AxiomCheck> {
        self.axioms.get(&axiom)
    }

    pub fn alpha(&self, axiom: Axiom) -> Option<&Alpha> {
        self.axioms.get(&axiom).map(|c| &c.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Outcome(Outcome),
    Allocation(Allocation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoVerdict {
    pub satisfied: bool,
    /// Lexicographically first Pareto improvement, if any.
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub players: Vec<PlayerAudit>,
    pub po: Option<PoVerdict>,
}

impl AuditReport {
    /// Whether every player reaches `threshold` on `axiom` (false if the
    /// axiom was not audited).
    pub fn all_at_least(&self, axiom: Axiom, threshold: &Rational) -> bool {
        self.players
            .iter()
            .all(|p| p.alpha(axiom).is_some_and(|a| a.at_least(threshold)))
    }

    pub fn all_satisfied(&self, axiom: Axiom) -> bool {
        self.players
            .iter()
            .all(|p| p.check(axiom).is_some_and(|c| c.satisfied))
    }

    pub fn min_alpha(&self, axiom: Axiom) -> Option<Alpha> {
        self.players
            .iter()
            .filter_map(|p| p.alpha(axiom).cloned())
            .min()
    }

    /// Implications every report must respect: Prop ⇒ Prop1,
    /// Prop ⇒ MMS ⇒ RRS ⇒ PPS, EF ⇒ EF1, EF ⇒ Prop. Returns the broken ones.
    pub fn implication_violations(&self) -> Vec<String> {
        const CHAINS: [(Axiom, Axiom); 7] = [
            (Axiom::Prop, Axiom::Prop1),
            (Axiom::Prop, Axiom::Mms),
            (Axiom::Mms, Axiom::Rrs),
            (Axiom::Prop, Axiom::Rrs),
            (Axiom::Rrs, Axiom::Pps),
            (Axiom::Ef, Axiom::Ef1),
            (Axiom::Ef, Axiom::Prop),
        ];
        let mut out = Vec::new();
        for (i, player) in self.players.iter().enumerate() {
            for (from, to) in CHAINS {
                if let (Some(a), Some(b)) = (player.check(from), player.check(to)) {
                    if a.satisfied && !b.satisfied {
                        out.push(format!("player {i}: {from} holds but {to} fails"));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AuditOptions {
    /// Run the exhaustive PO check with this outcome cap.
    pub po_cap: Option<u64>,
    /// Compute MMS with this partition cap.
    pub mms_cap: Option<u64>,
}

struct Base {
    utility: Rational,
    shares: PlayerShares,
    maxima: crate::model::MaxUtilities,
}

fn base(instance: &DecisionInstance, outcome: &Outcome, player: usize, mms_cap: Option<u64>) -> Result<Base> {
    let n = instance.players;
    let maxima = instance.max_utilities(player);
    let mms = match mms_cap {
        Some(cap) => Some(mms_of_values(&maxima.per_issue, n, cap)?),
        None => None,
    };
    Ok(Base {
        utility: instance.utility_unchecked(outcome, player),
        shares: PlayerShares {
            prop: prop_from_sorted(&maxima.sorted, n),
            rrs: rrs_from_sorted(&maxima.sorted, n),
            pps: pps_from_sorted(&maxima.sorted, n),
            mms,
        },
        maxima,
    })
}

fn share_axioms(base: &Base, prop1_best: &Rational) -> BTreeMap<Axiom, AxiomCheck> {
    let mut axioms = BTreeMap::new();
    let u = &base.utility;
    let s = &base.shares;
    axioms.insert(Axiom::Prop, AxiomCheck::new(Alpha::ratio(u, &s.prop)));
    axioms.insert(Axiom::Prop1, AxiomCheck::new(Alpha::ratio(prop1_best, &s.prop)));
    axioms.insert(Axiom::Rrs, AxiomCheck::new(Alpha::ratio(u, &s.rrs)));
    axioms.insert(Axiom::Pps, AxiomCheck::new(Alpha::ratio(u, &s.pps)));
    if let Some(mms) = &s.mms {
        axioms.insert(Axiom::Mms, AxiomCheck::new(Alpha::ratio(u, mms)));
    }
    axioms
}

/// Audits an outcome of a public decision instance. Prop1 switches a single
/// issue to the player's favourite alternative.
pub fn audit(instance: &DecisionInstance, outcome: &Outcome, options: AuditOptions) -> Result<AuditReport> {
    instance.check()?;
    instance.check_outcome(outcome)?;
    let players = (0..instance.players)
        .map(|i| {
            let base = base(instance, outcome, i, options.mms_cap)?;
            let prop1_best = outcome
                .0
                .iter()
                .enumerate()
                .map(|(t, &c)| &base.utility - instance.utility(i, t, c) + &base.maxima.per_issue[t])
                .max()
                .unwrap_or_else(|| base.utility.clone());
            let axioms = share_axioms(&base, &prop1_best);
            Ok(PlayerAudit {
                utility: base.utility,
                shares: base.shares,
                axioms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let po = match options.po_cap {
        Some(cap) => Some(check_pareto_optimal(instance, outcome, cap)?),
        None => None,
    };
    Ok(AuditReport { players, po })
}

/// Audits an allocation of private goods. Shares come from the reduced
/// public instance; Prop1 adds one good the player does not own; EF and EF1
/// are folded over all other players (α is the worst ratio).
pub fn audit_goods(goods: &GoodsInstance, allocation: &Allocation, options: AuditOptions) -> Result<AuditReport> {
    goods.check()?;
    goods.check_allocation(allocation)?;
    let public = goods.to_public();
    let outcome = allocation.to_outcome(goods.goods);
    let owners = &outcome.0;
    let bundle_values: Vec<Vec<Rational>> = (0..goods.players)
        .map(|i| {
            (0..goods.players)
                .map(|j| goods.bundle_utility(i, allocation.bundle(j)))
                .collect()
        })
        .collect();
    let players = (0..goods.players)
        .map(|i| {
            let base = base(&public, &outcome, i, options.mms_cap)?;
            let u = &base.utility;
            let prop1_best = (0..goods.goods)
                .filter(|&g| owners[g] != i)
                .map(|g| u + &goods.utilities[i][g])
                .max()
                .map_or_else(|| u.clone(), |best| best.max(u.clone()));
            let mut axioms = share_axioms(&base, &prop1_best);
            let others = (0..goods.players).filter(|&j| j != i);
            let ef = others
                .clone()
                .map(|j| Alpha::ratio(u, &bundle_values[i][j]))
                .min()
                .unwrap_or(Alpha::Unbounded);
            let ef1 = others
                .map(|j| {
                    let best_good = allocation
                        .bundle(j)
                        .iter()
                        .map(|&g| &goods.utilities[i][g])
                        .max()
                        .cloned()
                        .unwrap_or_else(Rational::zero);
                    Alpha::ratio(u, &(&bundle_values[i][j] - best_good))
                })
                .min()
                .unwrap_or(Alpha::Unbounded);
            axioms.insert(Axiom::Ef, AxiomCheck::new(ef));
            axioms.insert(Axiom::Ef1, AxiomCheck::new(ef1));
            Ok(PlayerAudit {
                utility: base.utility,
                shares: base.shares,
                axioms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let po = match options.po_cap {
        Some(cap) => Some(check_pareto_optimal_goods(goods, allocation, cap)?),
        None => None,
    };
    Ok(AuditReport { players, po })
}

struct DominanceSearch<'a> {
    table: &'a IntTable,
    target: Vec<BigInt>,
    witness: Option<Vec<usize>>,
}

impl Visitor for DominanceSearch<'_> {
    fn enter(&mut self, depth: usize, sums: &[BigInt]) -> bool {
        // Subtrees where someone cannot reach her current utility hold no
        // Pareto improvement.
        sums.iter()
            .zip(&self.table.suffix_max[depth])
            .zip(&self.target)
            .all(|((s, rest), goal)| s + rest >= *goal)
    }

    fn leaf(&mut self, choices: &[usize], sums: &[BigInt]) -> bool {
        let strictly_better = sums.iter().zip(&self.target).any(|(s, goal)| s > goal);
        if strictly_better {
            self.witness = Some(choices.to_vec());
            return false;
        }
        true
    }
}

/// Exhaustive Pareto-optimality check; the witness is the first dominating
/// outcome in lexicographic order.
pub fn check_pareto_optimal(instance: &DecisionInstance, outcome: &Outcome, cap: u64) -> Result<PoVerdict> {
    instance.check()?;
    instance.check_outcome(outcome)?;
    check_cap(instance, cap)?;
    let table = IntTable::unit(instance);
    let target: Vec<BigInt> = (0..table.width())
        .map(|c| {
            outcome
                .0
                .iter()
                .enumerate()
                .map(|(t, &a)| &table.values[t][a][c])
                .sum()
        })
        .collect();
    let mut search = DominanceSearch {
        table: &table,
        target,
        witness: None,
    };
    walk(&table, &mut search);
    Ok(PoVerdict {
        satisfied: search.witness.is_none(),
        witness: search.witness.map(|w| Witness::Outcome(Outcome(w))),
    })
}

pub fn check_pareto_optimal_goods(goods: &GoodsInstance, allocation: &Allocation, cap: u64) -> Result<PoVerdict> {
    goods.check()?;
    goods.check_allocation(allocation)?;
    let verdict = check_pareto_optimal(&goods.to_public(), &allocation.to_outcome(goods.goods), cap)?;
    Ok(PoVerdict {
        satisfied: verdict.satisfied,
        witness: verdict.witness.map(|w| match w {
            Witness::Outcome(o) => Witness::Allocation(Allocation::from_outcome(goods.players, &o)),
            other => other,
        }),
    })
}
