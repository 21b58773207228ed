//! Pareto-optimal allocations of private goods through weighted welfare
//! maximization: a polynomial-time PPS + PO algorithm and an experimental
//! Prop1 + PO search built on the same weight-reduction step.
//!
//! Both keep a weight vector and an allocation in which every good belongs
//! to a player maximizing `w_i · u_i(g)`. Lowering the weights of a set DEC
//! of players by the smallest ratio `(w_i·u_i(g)) / (w_j·u_j(g))` over
//! `i ∈ DEC`, `j ∉ DEC`, `g ∈ A_i` creates a tie that lets `g` move from
//! `i` to `j` without leaving the weighted argmax.

use std::fmt;

use num::{One, Signed, Zero};

use crate::error::{FairError, Result};
use crate::model::{Allocation, GoodsInstance};
use crate::rational::Rational;
use crate::shares::{pps_from_sorted, prop_from_sorted};

/// Positive per-player weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector(Vec<Rational>);

impl WeightVector {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(FairError::InvalidParameter(format!(
                "weight of player {i} must be positive"
            )));
        }
        Ok(WeightVector(weights))
    }

    /// `(1/n, …, 1/n)`.
    pub fn uniform(players: usize) -> Self {
        WeightVector(vec![Rational::new(One::one(), players.into()); players])
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Each good to the lowest-index player maximizing `w_i · u_i(g)`.
pub fn weighted_welfare_allocation(goods: &GoodsInstance, weights: &WeightVector) -> Result<Allocation> {
    goods.check()?;
    if weights.len() != goods.players {
        return Err(FairError::DimensionMismatch(format!(
            "{} weights for {} players",
            weights.len(),
            goods.players
        )));
    }
    let owners: Vec<usize> = (0..goods.goods).map(|g| weighted_owner(goods, weights, g)).collect();
    Ok(Allocation::from_owners(goods.players, &owners))
}

fn weighted_owner(goods: &GoodsInstance, weights: &WeightVector, g: usize) -> usize {
    let mut best = 0;
    let mut best_value = &weights.0[0] * &goods.utilities[0][g];
    for i in 1..goods.players {
        let value = &weights.0[i] * &goods.utilities[i][g];
        if value > best_value {
            best = i;
            best_value = value;
        }
    }
    best
}

/// Whether `owner` maximizes `w_i · u_i(g)` for every good it owns.
pub fn is_weighted_argmax(goods: &GoodsInstance, weights: &WeightVector, allocation: &Allocation) -> bool {
    allocation.bundles().iter().enumerate().all(|(owner, bundle)| {
        bundle.iter().all(|&g| {
            let own = &weights.0[owner] * &goods.utilities[owner][g];
            (0..goods.players).all(|j| own >= &weights.0[j] * &goods.utilities[j][g])
        })
    })
}

/// One weight reduction: DEC weights were divided by `factor`, tying
/// `good` between its owner `from` and the newcomer `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub from: usize,
    pub to: usize,
    pub good: usize,
    pub factor: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub good: usize,
}

/// A convention for degenerate utilities that a run actually relied on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// A player with zero PPS was short of `p` goods and left alone.
    ExemptPlayer { player: usize },
    /// A good worth nothing to both `from` and `to` counted as tied.
    ZeroTie { from: usize, to: usize, good: usize },
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::ExemptPlayer { player } => write!(f, "player {player} exempt (zero PPS)"),
            Convention::ZeroTie { from, to, good } => {
                write!(f, "good {good} worth 0 to players {from} and {to} treated as a tie")
            }
        }
    }
}

/// One pass of the outer loop.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Round {
    /// Players above, at, and below their target before the round.
    pub above: Vec<usize>,
    pub at: Vec<usize>,
    pub below: Vec<usize>,
    /// DEC after each growth step, starting with the seed.
    pub dec: Vec<Vec<usize>>,
    pub reductions: Vec<Reduction>,
    pub transfers: Vec<Transfer>,
    /// Total shortfall `Σ_{i below} (p − |A_i|)` before and after.
    pub metric_before: usize,
    pub metric_after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransferTrace {
    pub rounds: Vec<Round>,
    pub conventions: Vec<Convention>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpsPoResult {
    pub allocation: Allocation,
    pub weights: WeightVector,
    pub trace: TransferTrace,
}

enum Ratio {
    Finite(Rational),
    Infinite,
}

fn tie_ratio(goods: &GoodsInstance, w: &[Rational], i: usize, j: usize, g: usize) -> (Ratio, bool) {
    let numer = &w[i] * &goods.utilities[i][g];
    let denom = &w[j] * &goods.utilities[j][g];
    if denom.is_zero() {
        if numer.is_zero() {
            (Ratio::Finite(Rational::one()), true)
        } else {
            (Ratio::Infinite, false)
        }
    } else {
        (Ratio::Finite(numer / denom), false)
    }
}

/// Shared state of a run.
struct State<'a> {
    goods: &'a GoodsInstance,
    weights: Vec<Rational>,
    allocation: Allocation,
    conventions: Vec<Convention>,
}

/// For each grown player, the DEC member and good it was reached through.
type Donors = Vec<Option<(usize, usize)>>;

impl State<'_> {
    /// Grows DEC one player at a time until `stop` accepts the newcomer.
    /// Returns the newcomer and the donor map, or `None` when every
    /// candidate ratio is infinite.
    fn grow(
        &mut self,
        dec: &mut [bool],
        round: &mut Round,
        stop: impl Fn(usize) -> bool,
    ) -> Option<(usize, Donors)> {
        let n = self.goods.players;
        let mut donor = vec![None; n];
        loop {
            let mut best: Option<(Rational, usize, usize, usize, bool)> = None;
            for i in (0..n).filter(|&i| dec[i]) {
                for j in (0..n).filter(|&j| !dec[j]) {
                    for &g in self.allocation.bundle(i) {
                        let (ratio, zero_tie) = tie_ratio(self.goods, &self.weights, i, j, g);
                        let Ratio::Finite(r) = ratio else { continue };
                        if best.as_ref().is_none_or(|b| r < b.0) {
                            best = Some((r, i, j, g, zero_tie));
                        }
                    }
                }
            }
            let (r, i, j, g, zero_tie) = best?;
            if zero_tie {
                self.conventions.push(Convention::ZeroTie { from: i, to: j, good: g });
            }
            for k in (0..n).filter(|&k| dec[k]) {
                self.weights[k] = &self.weights[k] / &r;
            }
            dec[j] = true;
            donor[j] = Some((i, g));
            round.reductions.push(Reduction {
                from: i,
                to: j,
                good: g,
                factor: r,
            });
            round.dec.push(members(dec));
            if stop(j) {
                return Some((j, donor));
            }
        }
    }

    /// Walks donor links from `start` back to a seed player, moving one
    /// good per link.
    fn follow(&mut self, start: usize, seed: &[bool], donor: &[Option<(usize, usize)>], round: &mut Round) {
        let mut to = start;
        while !seed[to] {
            let (from, good) = donor[to].expect("every grown player has a donor");
            self.allocation.transfer(good, from, to);
            round.transfers.push(Transfer { from, to, good });
            to = from;
        }
    }
}

fn members(flags: &[bool]) -> Vec<usize> {
    flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect()
}

/// Allocation giving every player with positive PPS at least `⌊m/n⌋`
/// goods while maximizing weighted welfare for the returned weights, hence
/// PPS and PO. Fails with `Degenerate` if a short player cannot be reached
/// through finite ratios.
pub fn pps_po_allocate(goods: &GoodsInstance) -> Result<PpsPoResult> {
    goods.check()?;
    let n = goods.players;
    let p = goods.goods / n;
    let public = goods.to_public();
    let exempt: Vec<bool> = (0..n)
        .map(|i| pps_from_sorted(&public.max_utilities(i).sorted, n).is_zero())
        .collect();
    let weights = WeightVector::uniform(n);
    let mut state = State {
        goods,
        allocation: weighted_welfare_allocation(goods, &weights)?,
        weights: weights.0,
        conventions: Vec::new(),
    };
    let mut rounds = Vec::new();
    let mut flagged = vec![false; n];
    loop {
        let sizes: Vec<usize> = state.allocation.bundles().iter().map(Vec::len).collect();
        for i in 0..n {
            if exempt[i] && sizes[i] < p && !flagged[i] {
                flagged[i] = true;
                state.conventions.push(Convention::ExemptPlayer { player: i });
            }
        }
        let short = |i: usize| !exempt[i] && sizes[i] < p;
        if !(0..n).any(short) {
            break;
        }
        let mut round = Round {
            above: (0..n).filter(|&i| sizes[i] > p).collect(),
            at: (0..n).filter(|&i| sizes[i] <= p && !short(i)).collect(),
            below: (0..n).filter(|&i| short(i)).collect(),
            metric_before: (0..n).filter(|&i| short(i)).map(|i| p - sizes[i]).sum(),
            ..Round::default()
        };
        let seed: Vec<bool> = sizes.iter().map(|&s| s > p).collect();
        let mut dec = seed.clone();
        round.dec.push(members(&dec));
        let Some((newcomer, donor)) = state.grow(&mut dec, &mut round, short) else {
            return Err(FairError::Degenerate(format!(
                "no finite weight reduction reaches players {:?}",
                round.below
            )));
        };
        state.follow(newcomer, &seed, &donor, &mut round);
        round.metric_after = (0..n)
            .filter(|&i| !exempt[i])
            .map(|i| p.saturating_sub(state.allocation.bundle(i).len()))
            .sum();
        let progressed = round.metric_after < round.metric_before;
        rounds.push(round);
        if !progressed {
            return Err(FairError::Degenerate("transfer did not reduce the shortfall".into()));
        }
    }
    Ok(PpsPoResult {
        allocation: state.allocation,
        weights: WeightVector(state.weights),
        trace: TransferTrace {
            rounds,
            conventions: state.conventions,
        },
    })
}

/// A player who satisfied Prop1 before a round and not after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prop1Loss {
    pub round: usize,
    pub player: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop1PoResult {
    pub allocation: Allocation,
    pub weights: WeightVector,
    /// Whether the returned allocation passes the goods Prop1 audit.
    pub certified: bool,
    pub rounds: usize,
    pub losses: Vec<Prop1Loss>,
    pub trace: TransferTrace,
}

/// Experimental Prop1 + PO search. Each round seeds DEC with the players at
/// or above their proportional share, grows it until a Prop1 violator
/// joins, and moves goods back along the donor chain. Gives up after
/// `max_iterations` rounds or when no finite reduction exists; the result
/// is weighted-welfare maximizing, hence PO, either way.
pub fn prop1_po_search(goods: &GoodsInstance, max_iterations: usize) -> Result<Prop1PoResult> {
    goods.check()?;
    let n = goods.players;
    let public = goods.to_public();
    let props: Vec<Rational> = (0..n)
        .map(|i| prop_from_sorted(&public.max_utilities(i).sorted, n))
        .collect();
    let weights = WeightVector::uniform(n);
    let mut state = State {
        goods,
        allocation: weighted_welfare_allocation(goods, &weights)?,
        weights: weights.0,
        conventions: Vec::new(),
    };
    let mut rounds = Vec::new();
    let mut losses = Vec::new();
    let mut certified = false;
    loop {
        let status = prop_status(goods, &state.allocation, &props);
        if status.iter().all(|s| s.prop1) {
            certified = true;
            break;
        }
        if rounds.len() >= max_iterations {
            break;
        }
        let seed: Vec<bool> = status.iter().map(|s| s.prop).collect();
        if !seed.iter().any(|&s| s) {
            break;
        }
        let mut round = Round {
            above: members(&seed),
            at: (0..n).filter(|&i| !status[i].prop && status[i].prop1).collect(),
            below: (0..n).filter(|&i| !status[i].prop1).collect(),
            ..Round::default()
        };
        round.metric_before = round.below.len();
        let mut dec = seed.clone();
        round.dec.push(members(&dec));
        let Some((newcomer, donor)) = state.grow(&mut dec, &mut round, |j| !status[j].prop1) else {
            rounds.push(round);
            break;
        };
        state.follow(newcomer, &seed, &donor, &mut round);
        let after = prop_status(goods, &state.allocation, &props);
        round.metric_after = after.iter().filter(|s| !s.prop1).count();
        for i in 0..n {
            if status[i].prop1 && !after[i].prop1 {
                losses.push(Prop1Loss {
                    round: rounds.len(),
                    player: i,
                });
            }
        }
        rounds.push(round);
    }
    Ok(Prop1PoResult {
        allocation: state.allocation,
        weights: WeightVector(state.weights),
        certified,
        rounds: rounds.len(),
        losses,
        trace: TransferTrace {
            rounds,
            conventions: state.conventions,
        },
    })
}

struct PropStatus {
    prop: bool,
    prop1: bool,
}

fn prop_status(goods: &GoodsInstance, allocation: &Allocation, props: &[Rational]) -> Vec<PropStatus> {
    let owners = allocation.owners(goods.goods);
    (0..goods.players)
        .map(|i| {
            let u = goods.bundle_utility(i, allocation.bundle(i));
            let best_extra = (0..goods.goods)
                .filter(|&g| owners[g] != i)
                .map(|g| &goods.utilities[i][g])
                .max()
                .cloned()
                .unwrap_or_else(Rational::zero);
            PropStatus {
                prop: u >= props[i],
                prop1: u + best_extra >= props[i],
            }
        })
        .collect()
}
