//! Integer-scaled utility tables for the enumeration searches.
//!
//! Every utility of the selected players is multiplied by a per-player
//! positive factor and then by one common denominator so the search runs
//! on big integers. A common positive scale preserves every comparison the
//! searches make (per-player orderings, cross-player orderings, products
//! over a fixed player set).

use num::{BigInt, BigUint, Integer, One, Zero};

use crate::error::{FairError, Result};
use crate::model::DecisionInstance;
use crate::rational::Rational;

pub(crate) struct IntTable {
    /// Instance player index for each column.
    pub players: Vec<usize>,
    /// `values[t][a][c]` for column `c`.
    pub values: Vec<Vec<Vec<BigInt>>>,
    /// `suffix_max[t][c] = Σ_{t' ≥ t} max_a values[t'][a][c]`, length `m + 1`.
    pub suffix_max: Vec<Vec<BigInt>>,
}

impl IntTable {
    /// `factors[i] = None` drops player `i` from the table.
    pub fn new(instance: &DecisionInstance, factors: &[Option<Rational>]) -> Self {
        let players: Vec<usize> = (0..instance.players)
            .filter(|&i| factors[i].is_some())
            .collect();
        let scaled: Vec<Vec<Vec<Rational>>> = instance
            .issues
            .iter()
            .map(|issue| {
                (0..issue.alternatives())
                    .map(|a| {
                        players
                            .iter()
                            .map(|&i| {
                                &issue.utilities[i][a] * factors[i].as_ref().expect("selected")
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut lcm = BigInt::one();
        for value in scaled.iter().flatten().flatten() {
            lcm = lcm.lcm(value.denom());
        }
        let values: Vec<Vec<Vec<BigInt>>> = scaled
            .into_iter()
            .map(|alts| {
                alts.into_iter()
                    .map(|cols| {
                        cols.into_iter()
                            .map(|v| (v * Rational::from_integer(lcm.clone())).to_integer())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let width = players.len();
        let m = values.len();
        let mut suffix_max = vec![vec![BigInt::zero(); width]; m + 1];
        for t in (0..m).rev() {
            for c in 0..width {
                let best = values[t]
                    .iter()
                    .map(|alt| &alt[c])
                    .max()
                    .cloned()
                    .unwrap_or_else(BigInt::zero);
                suffix_max[t][c] = &suffix_max[t + 1][c] + best;
            }
        }
        IntTable {
            players,
            values,
            suffix_max,
        }
    }

    pub fn unit(instance: &DecisionInstance) -> Self {
        Self::new(instance, &vec![Some(Rational::one()); instance.players])
    }

    pub fn width(&self) -> usize {
        self.players.len()
    }

    pub fn issues(&self) -> usize {
        self.values.len()
    }
}

/// Fails unless `Π_t k_t ≤ cap`.
pub(crate) fn check_cap(instance: &DecisionInstance, cap: u64) -> Result<()> {
    let required = instance.outcome_space();
    if required > BigUint::from(cap) {
        return Err(FairError::CapExceeded { required, cap });
    }
    Ok(())
}

/// Callbacks for [`walk`].
pub(crate) trait Visitor {
    /// Called at every node with its depth and the running sums; returning
    /// `false` prunes the subtree.
    fn enter(&mut self, depth: usize, sums: &[BigInt]) -> bool;
    /// Called at every leaf; returning `false` stops the whole walk.
    fn leaf(&mut self, choices: &[usize], sums: &[BigInt]) -> bool;
}

/// Depth-first walk over outcomes in lexicographic order of choice vectors,
/// maintaining per-column running sums.
pub(crate) fn walk(table: &IntTable, visitor: &mut impl Visitor) {
    let mut sums = vec![BigInt::zero(); table.width()];
    let mut choices = Vec::with_capacity(table.issues());
    walk_rec(table, &mut sums, &mut choices, visitor);
}

fn walk_rec(
    table: &IntTable,
    sums: &mut [BigInt],
    choices: &mut Vec<usize>,
    visitor: &mut impl Visitor,
) -> bool {
    let depth = choices.len();
    if !visitor.enter(depth, sums) {
        return true;
    }
    if depth == table.issues() {
        return visitor.leaf(choices, sums);
    }
    for (a, alt) in table.values[depth].iter().enumerate() {
        for (s, v) in sums.iter_mut().zip(alt) {
            *s += v;
        }
        choices.push(a);
        let keep_going = walk_rec(table, sums, choices, visitor);
        choices.pop();
        for (s, v) in sums.iter_mut().zip(alt) {
            *s -= v;
        }
        if !keep_going {
            return false;
        }
    }
    true
}
