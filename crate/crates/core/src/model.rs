//! Public decision instances, private goods instances, outcomes and
//! allocations, plus the reduction from goods to public decisions.

use std::fmt;

use num::{BigUint, One, Signed, Zero};

use crate::error::{FairError, Result};
use crate::rational::Rational;

/// One issue: `utilities[player][alternative]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub name: Option<String>,
    pub alternative_names: Option<Vec<String>>,
    pub utilities: Vec<Vec<Rational>>,
}

impl Issue {
    pub fn new(utilities: Vec<Vec<Rational>>) -> Self {
        Issue {
            name: None,
            alternative_names: None,
            utilities,
        }
    }

    /// Number of alternatives, read off the first player's row.
    pub fn alternatives(&self) -> usize {
        self.utilities.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionInstance {
    pub players: usize,
    pub issues: Vec<Issue>,
    pub player_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodsInstance {
    pub players: usize,
    pub goods: usize,
    /// `utilities[player][good]`.
    pub utilities: Vec<Vec<Rational>>,
    pub player_names: Option<Vec<String>>,
    pub good_names: Option<Vec<String>>,
}

/// One alternative index per issue.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome(pub Vec<usize>);

/// Goods per player. Bundles are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

/// A broken invariant, addressed by an index path such as
/// `issues[2].utilities[1][0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Per-issue maxima of one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxUtilities {
    /// `per_issue[t]` is the best utility the player can get from issue `t`.
    pub per_issue: Vec<Rational>,
    /// Lowest-index alternative attaining `per_issue[t]`.
    pub argmax: Vec<usize>,
    /// `per_issue` sorted non-ascending.
    pub sorted: Vec<Rational>,
}

impl MaxUtilities {
    pub fn total(&self) -> Rational {
        crate::rational::sum(&self.per_issue)
    }
}

fn check_utility(path: String, value: &Rational, out: &mut Vec<Violation>) {
    if value.is_negative() {
        out.push(Violation::new(path, "utility must be non-negative"));
    }
}

impl DecisionInstance {
    pub fn new(players: usize, issues: Vec<Issue>) -> Self {
        DecisionInstance {
            players,
            issues,
            player_names: None,
        }
    }

    /// Builds an instance from `tables[issue][player][alternative]`.
    pub fn from_tables(players: usize, tables: Vec<Vec<Vec<Rational>>>) -> Self {
        Self::new(players, tables.into_iter().map(Issue::new).collect())
    }

    pub fn issue_count(&self) -> usize {
        self.issues.len()
    }

    pub fn alternative_counts(&self) -> Vec<usize> {
        self.issues.iter().map(Issue::alternatives).collect()
    }

    /// `u_player^issue(alternative)`; indices must be in range.
    pub fn utility(&self, player: usize, issue: usize, alternative: usize) -> &Rational {
        &self.issues[issue].utilities[player][alternative]
    }

    /// Every violated invariant; empty when the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.players == 0 {
            out.push(Violation::new("players", "instance must have at least one player"));
        }
        if self.issues.is_empty() {
            out.push(Violation::new("issues", "instance must have at least one issue"));
        }
        if let Some(names) = &self.player_names {
            if names.len() != self.players {
                out.push(Violation::new(
                    "players",
                    format!("expected {} player names, found {}", self.players, names.len()),
                ));
            }
        }
        for (t, issue) in self.issues.iter().enumerate() {
            if issue.utilities.len() != self.players {
                out.push(Violation::new(
                    format!("issues[{t}].utilities"),
                    format!("expected {} rows, found {}", self.players, issue.utilities.len()),
                ));
            }
            let k = issue.alternatives();
            if k == 0 {
                out.push(Violation::new(
                    format!("issues[{t}]"),
                    "issue must have at least one alternative",
                ));
            }
            if let Some(names) = &issue.alternative_names {
                if names.len() != k {
                    out.push(Violation::new(
                        format!("issues[{t}].alternatives"),
                        format!("expected {k} alternative names, found {}", names.len()),
                    ));
                }
            }
            for (i, row) in issue.utilities.iter().enumerate() {
                if row.len() != k {
                    out.push(Violation::new(
                        format!("issues[{t}].utilities[{i}]"),
                        format!("expected {k} entries, found {}", row.len()),
                    ));
                }
                for (a, u) in row.iter().enumerate() {
                    check_utility(format!("issues[{t}].utilities[{i}][{a}]"), u, &mut out);
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(FairError::Invalid(violations))
        }
    }

    /// Exact size of the outcome space, `Π_t k_t`.
    pub fn outcome_space(&self) -> BigUint {
        self.issues
            .iter()
            .fold(BigUint::one(), |acc, issue| acc * issue.alternatives())
    }

    pub fn check_outcome(&self, outcome: &Outcome) -> Result<()> {
        if outcome.0.len() != self.issues.len() {
            return Err(FairError::DimensionMismatch(format!(
                "outcome has {} choices for {} issues",
                outcome.0.len(),
                self.issues.len()
            )));
        }
        for (t, (&choice, issue)) in outcome.0.iter().zip(&self.issues).enumerate() {
            if choice >= issue.alternatives() {
                return Err(FairError::IndexOutOfRange(format!(
                    "issue {t} has {} alternatives, choice is {choice}",
                    issue.alternatives()
                )));
            }
        }
        Ok(())
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.players {
            return Err(FairError::IndexOutOfRange(format!(
                "player {player} of {}",
                self.players
            )));
        }
        Ok(())
    }

    /// `u_i(c) = Σ_t u_i^t(c_t)`.
    pub fn outcome_utility(&self, outcome: &Outcome, player: usize) -> Result<Rational> {
        self.check_player(player)?;
        self.check_outcome(outcome)?;
        Ok(self.utility_unchecked(outcome, player))
    }

    pub(crate) fn utility_unchecked(&self, outcome: &Outcome, player: usize) -> Rational {
        outcome
            .0
            .iter()
            .zip(&self.issues)
            .fold(Rational::zero(), |acc, (&c, issue)| {
                acc + &issue.utilities[player][c]
            })
    }

    /// Utility vector of an outcome. Panics on an out-of-range outcome; use
    /// [`check_outcome`](Self::check_outcome) first for untrusted input.
    pub fn utilities(&self, outcome: &Outcome) -> Vec<Rational> {
        (0..self.players)
            .map(|i| self.utility_unchecked(outcome, i))
            .collect()
    }

    /// Per-issue maxima of `player`, with lowest-index argmax and the
    /// non-ascending sorted sequence.
    pub fn max_utilities(&self, player: usize) -> MaxUtilities {
        let mut per_issue = Vec::with_capacity(self.issues.len());
        let mut argmax = Vec::with_capacity(self.issues.len());
        for issue in &self.issues {
            let row = &issue.utilities[player];
            let mut best = 0;
            for a in 1..row.len() {
                if row[a] > row[best] {
                    best = a;
                }
            }
            argmax.push(best);
            per_issue.push(row.get(best).cloned().unwrap_or_else(Rational::zero));
        }
        let mut sorted = per_issue.clone();
        sorted.sort_by(|a, b| b.cmp(a));
        MaxUtilities {
            per_issue,
            argmax,
            sorted,
        }
    }

    pub fn sorted_max_utilities(&self, player: usize) -> Result<MaxUtilities> {
        self.check_player(player)?;
        Ok(self.max_utilities(player))
    }
}

impl GoodsInstance {
    /// Builds an instance from `utilities[player][good]`.
    pub fn new(utilities: Vec<Vec<Rational>>) -> Self {
        let players = utilities.len();
        let goods = utilities.first().map_or(0, Vec::len);
        GoodsInstance {
            players,
            goods,
            utilities,
            player_names: None,
            good_names: None,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.players == 0 {
            out.push(Violation::new("players", "instance must have at least one player"));
        }
        if self.goods == 0 {
            out.push(Violation::new("goods", "instance must have at least one good"));
        }
        if self.utilities.len() != self.players {
            out.push(Violation::new(
                "utilities",
                format!("expected {} rows, found {}", self.players, self.utilities.len()),
            ));
        }
        if let Some(names) = &self.player_names {
            if names.len() != self.players {
                out.push(Violation::new(
                    "players",
                    format!("expected {} player names, found {}", self.players, names.len()),
                ));
            }
        }
        if let Some(names) = &self.good_names {
            if names.len() != self.goods {
                out.push(Violation::new(
                    "goods",
                    format!("expected {} good names, found {}", self.goods, names.len()),
                ));
            }
        }
        for (i, row) in self.utilities.iter().enumerate() {
            if row.len() != self.goods {
                out.push(Violation::new(
                    format!("utilities[{i}]"),
                    format!("expected {} entries, found {}", self.goods, row.len()),
                ));
            }
            for (g, u) in row.iter().enumerate() {
                check_utility(format!("utilities[{i}][{g}]"), u, &mut out);
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(FairError::Invalid(violations))
        }
    }

    pub fn check_allocation(&self, allocation: &Allocation) -> Result<()> {
        let violations = allocation.validate(self.players, self.goods);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(FairError::Invalid(violations))
        }
    }

    pub fn bundle_utility(&self, player: usize, bundle: &[usize]) -> Rational {
        bundle
            .iter()
            .fold(Rational::zero(), |acc, &g| acc + &self.utilities[player][g])
    }

    pub fn utilities_of(&self, allocation: &Allocation) -> Vec<Rational> {
        (0..self.players)
            .map(|i| self.bundle_utility(i, allocation.bundle(i)))
            .collect()
    }

    /// One issue per good, one alternative per player; alternative `i` of
    /// issue `g` gives `u_i(g)` to player `i` and nothing to anyone else.
    pub fn to_public(&self) -> DecisionInstance {
        let n = self.players;
        let issues = (0..self.goods)
            .map(|g| {
                let utilities = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|a| {
                                if a == i {
                                    self.utilities[i][g].clone()
                                } else {
                                    Rational::zero()
                                }
                            })
                            .collect()
                    })
                    .collect();
                Issue {
                    name: self.good_names.as_ref().map(|names| names[g].clone()),
                    alternative_names: self.player_names.clone(),
                    utilities,
                }
            })
            .collect();
        DecisionInstance {
            players: n,
            issues,
            player_names: self.player_names.clone(),
        }
    }
}

/// Reduction from private goods to public decisions.
pub fn goods_to_public(goods: &GoodsInstance) -> DecisionInstance {
    goods.to_public()
}

impl Outcome {
    pub fn choices(&self) -> &[usize] {
        &self.0
    }
}

impl Allocation {
    /// Sorts each bundle; does not validate (see [`Allocation::validate`]).
    pub fn new(mut bundles: Vec<Vec<usize>>) -> Self {
        for bundle in &mut bundles {
            bundle.sort_unstable();
        }
        Allocation { bundles }
    }

    /// `owners[g]` is the player receiving good `g`.
    pub fn from_owners(players: usize, owners: &[usize]) -> Self {
        let mut bundles = vec![Vec::new(); players];
        for (g, &owner) in owners.iter().enumerate() {
            bundles[owner].push(g);
        }
        Allocation { bundles }
    }

    /// Reads an outcome of the reduced public instance as an allocation.
    pub fn from_outcome(players: usize, outcome: &Outcome) -> Self {
        Self::from_owners(players, &outcome.0)
    }

    /// Outcome of the reduced public instance choosing each good's owner.
    /// Assumes a valid allocation.
    pub fn to_outcome(&self, goods: usize) -> Outcome {
        Outcome(self.owners(goods))
    }

    pub fn owners(&self, goods: usize) -> Vec<usize> {
        let mut owners = vec![usize::MAX; goods];
        for (i, bundle) in self.bundles.iter().enumerate() {
            for &g in bundle {
                if g < goods {
                    owners[g] = i;
                }
            }
        }
        owners
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, player: usize) -> &[usize] {
        &self.bundles[player]
    }

    /// Moves `good` from `from` to `to`, keeping bundles sorted.
    pub(crate) fn transfer(&mut self, good: usize, from: usize, to: usize) {
        self.bundles[from].retain(|&g| g != good);
        let pos = self.bundles[to].partition_point(|&g| g < good);
        self.bundles[to].insert(pos, good);
    }

    /// Bundles must be `players` long, pairwise disjoint and cover `0..goods`.
    pub fn validate(&self, players: usize, goods: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.bundles.len() != players {
            out.push(Violation::new(
                "bundles",
                format!("expected {players} bundles, found {}", self.bundles.len()),
            ));
        }
        let mut seen = vec![false; goods];
        for (i, bundle) in self.bundles.iter().enumerate() {
            for &g in bundle {
                if g >= goods {
                    out.push(Violation::new(
                        format!("bundles[{i}]"),
                        format!("good {g} out of range (m = {goods})"),
                    ));
                } else if std::mem::replace(&mut seen[g], true) {
                    out.push(Violation::new(
                        format!("bundles[{i}]"),
                        format!("good {g} allocated more than once"),
                    ));
                }
            }
        }
        for (g, seen) in seen.iter().enumerate() {
            if !seen {
                out.push(Violation::new("bundles", format!("good {g} is not allocated")));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{example1, example2};
    use crate::rational::{int, rat};

    #[test]
    fn example1_is_valid() {
        assert!(example1().validate().is_empty());
    }

    #[test]
    fn negative_utility_is_reported() {
        let mut instance = example1();
        instance.issues[1].utilities[0][1] = rat(-1, 2);
        let violations = instance.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].message, "utility must be non-negative");
        assert_eq!(violations[0].path, "issues[1].utilities[0][1]");
    }

    #[test]
    fn empty_issue_is_reported() {
        let instance = DecisionInstance::from_tables(2, vec![vec![vec![], vec![]]]);
        let violations = instance.validate();
        assert!(violations
            .iter()
            .any(|v| v.message == "issue must have at least one alternative"));
    }

    #[test]
    fn ragged_rows_are_reported() {
        let instance =
            DecisionInstance::from_tables(2, vec![vec![vec![int(1), int(0)], vec![int(1)]]]);
        let violations = instance.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].path, "issues[0].utilities[1]");
        let missing_row = DecisionInstance::from_tables(2, vec![vec![vec![int(1)]]]);
        assert!(!missing_row.validate().is_empty());
    }

    #[test]
    fn outcome_utility_example2() {
        let instance = example2();
        let all_first = Outcome(vec![0; 8]);
        assert_eq!(instance.outcome_utility(&all_first, 0).unwrap(), int(8));
        assert_eq!(instance.outcome_utility(&all_first, 1).unwrap(), int(0));
        assert!(instance.outcome_utility(&all_first, 2).is_err());
        assert!(instance.outcome_utility(&Outcome(vec![0; 7]), 0).is_err());
        assert!(instance.outcome_utility(&Outcome(vec![2; 8]), 0).is_err());
    }

    #[test]
    fn zero_row_has_zero_utility() {
        let instance = DecisionInstance::from_tables(
            2,
            vec![vec![vec![int(3), int(1)], vec![int(0), int(0)]]],
        );
        for c in 0..2 {
            assert_eq!(instance.outcome_utility(&Outcome(vec![c]), 1).unwrap(), int(0));
        }
    }

    #[test]
    fn sorted_maxima() {
        let ex2 = example2();
        let expected: Vec<_> = [1, 1, 1, 1, 0, 0, 0, 0].into_iter().map(int).collect();
        assert_eq!(ex2.sorted_max_utilities(1).unwrap().sorted, expected);
        assert_eq!(ex2.max_utilities(1).argmax, vec![1, 1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(example1().max_utilities(0).sorted, vec![int(1), int(1)]);

        let single = DecisionInstance::from_tables(1, vec![vec![vec![int(2), int(5), int(5)]]]);
        let maxima = single.max_utilities(0);
        assert_eq!(maxima.sorted, vec![int(5)]);
        assert_eq!(maxima.argmax, vec![1]);
    }

    #[test]
    fn reduction_single_player_single_good() {
        let goods = GoodsInstance::new(vec![vec![int(7)]]);
        let public = goods.to_public();
        assert_eq!(public.issue_count(), 1);
        assert_eq!(public.alternative_counts(), vec![1]);
        assert_eq!(public.utility(0, 0, 0), &int(7));
    }

    #[test]
    fn reduction_is_diagonal() {
        let goods = crate::generators::mnw_rrs_gap(&rat(1, 100)).unwrap();
        let public = goods.to_public();
        assert_eq!(public.alternative_counts(), vec![2; 4]);
        for g in 0..4 {
            for i in 0..2 {
                for a in 0..2 {
                    let expected = if a == i {
                        goods.utilities[i][g].clone()
                    } else {
                        int(0)
                    };
                    assert_eq!(public.utility(i, g, a), &expected);
                }
            }
        }
    }

    #[test]
    fn allocation_validation() {
        assert!(Allocation::new(vec![vec![1], vec![0, 2]]).validate(2, 3).is_empty());
        assert_eq!(Allocation::new(vec![vec![0], vec![0, 1]]).validate(2, 2).len(), 1);
        assert_eq!(Allocation::new(vec![vec![0], vec![]]).validate(2, 2).len(), 1);
        assert_eq!(Allocation::new(vec![vec![0, 5], vec![1]]).validate(2, 2).len(), 1);
        assert_eq!(Allocation::new(vec![vec![0, 1]]).validate(2, 2).len(), 1);
    }

    #[test]
    fn transfer_keeps_bundles_sorted() {
        let mut allocation = Allocation::new(vec![vec![0, 1, 3], vec![2]]);
        allocation.transfer(1, 0, 1);
        assert_eq!(allocation.bundles(), &[vec![0, 3], vec![1, 2]]);
    }
}
