//! Brute-force reference solvers. Nothing here prunes: every outcome is
//! visited in lexicographic order and compared in exact rationals, so these
//! serve as ground truth for the branch-and-bound mechanisms.

use std::fmt;

use num::{One, Signed, Zero};

use crate::error::Result;
use crate::mechanisms::{leximin_normalization, Mechanism, MechanismResult, Normalization, Trace};
use crate::model::{DecisionInstance, Outcome};
use crate::rational::{sum, Rational};
use crate::search::check_cap;

/// All outcomes in lexicographic order of choice vectors.
pub struct Outcomes {
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Outcomes {
    type Item = Outcome;

    fn next(&mut self) -> Option<Outcome> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut t = succ.len();
        loop {
            if t == 0 {
                break;
            }
            t -= 1;
            succ[t] += 1;
            if succ[t] < self.counts[t] {
                self.next = Some(succ);
                break;
            }
            succ[t] = 0;
        }
        Some(Outcome(current))
    }
}

pub fn enumerate_outcomes(instance: &DecisionInstance, cap: u64) -> Result<Outcomes> {
    instance.check()?;
    check_cap(instance, cap)?;
    Ok(Outcomes {
        counts: instance.alternative_counts(),
        next: Some(vec![0; instance.issue_count()]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Nash,
    Leximin,
    Utilitarian,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Nash => "nash",
            Objective::Leximin => "leximin",
            Objective::Utilitarian => "utilitarian",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Objective::Nash, Objective::Leximin, Objective::Utilitarian]
            .into_iter()
            .find(|o| o.name() == name)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keeps the first outcome whose key is strictly larger than everything
/// seen before.
fn first_argmax<K: Ord>(
    outcomes: impl Iterator<Item = Outcome>,
    mut key: impl FnMut(&Outcome) -> Option<K>,
) -> Option<(Outcome, K)> {
    let mut best: Option<(Outcome, K)> = None;
    for outcome in outcomes {
        let Some(k) = key(&outcome) else { continue };
        if best.as_ref().is_none_or(|(_, b)| k > *b) {
            best = Some((outcome, k));
        }
    }
    best
}

/// Optimum of `objective` by plain enumeration, with the same tie-breaking
/// as the mechanisms.
pub fn exact_optimum(instance: &DecisionInstance, objective: Objective, cap: u64) -> Result<MechanismResult> {
    let outcomes = enumerate_outcomes(instance, cap)?;
    let (outcome, mechanism, trace) = match objective {
        Objective::Utilitarian => {
            let (outcome, welfare) =
                first_argmax(outcomes, |c| Some(sum(&instance.utilities(c)))).expect("non-empty");
            (outcome, Mechanism::Utilitarian, Trace::Utilitarian { welfare })
        }
        Objective::Leximin => {
            let normalization = leximin_normalization(instance);
            let (outcome, _) = first_argmax(outcomes, |c| {
                let utilities = instance.utilities(c);
                let mut primary = Vec::new();
                let mut secondary = Vec::new();
                for (u, norm) in utilities.iter().zip(&normalization) {
                    match norm {
                        Normalization::Rrs(d) => primary.push(u / d),
                        Normalization::Prop(d) => secondary.push(u / d),
                        Normalization::Excluded => {}
                    }
                }
                primary.sort();
                secondary.sort();
                Some((primary, secondary))
            })
            .expect("non-empty");
            (outcome, Mechanism::Leximin, Trace::Leximin { normalization })
        }
        Objective::Nash => {
            let support = nash_support(instance, enumerate_outcomes(instance, cap)?);
            let (outcome, product) = first_argmax(outcomes, |c| {
                let utilities = instance.utilities(c);
                if support.iter().any(|&i| !utilities[i].is_positive()) {
                    return None;
                }
                Some(support.iter().fold(Rational::one(), |acc, &i| acc * &utilities[i]))
            })
            .expect("the support is attained by some outcome");
            (outcome, Mechanism::MaxNashWelfare, Trace::Nash { support, product })
        }
    };
    Ok(MechanismResult::new(instance, mechanism, outcome, trace))
}

/// Largest set of simultaneously positive players; the lexicographically
/// smallest one on ties.
fn nash_support(instance: &DecisionInstance, outcomes: Outcomes) -> Vec<usize> {
    let mut best: Option<Vec<usize>> = None;
    for outcome in outcomes {
        let set: Vec<usize> = instance
            .utilities(&outcome)
            .iter()
            .enumerate()
            .filter(|(_, u)| u.is_positive())
            .map(|(i, _)| i)
            .collect();
        let better = match &best {
            None => true,
            Some(b) => set.len() > b.len() || (set.len() == b.len() && set < *b),
        };
        if better {
            best = Some(set);
        }
    }
    best.unwrap_or_default()
}

fn dominates(a: &[Rational], b: &[Rational]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
}

/// Non-dominated utility vectors, each with its lexicographically first
/// outcome, in lexicographic order of those outcomes.
pub fn pareto_frontier(instance: &DecisionInstance, cap: u64) -> Result<Vec<(Outcome, Vec<Rational>)>> {
    let mut points: Vec<(Outcome, Vec<Rational>)> = Vec::new();
    for outcome in enumerate_outcomes(instance, cap)? {
        let utilities = instance.utilities(&outcome);
        if !points.iter().any(|(_, u)| *u == utilities) {
            points.push((outcome, utilities));
        }
    }
    let frontier = points
        .iter()
        .filter(|(_, u)| !points.iter().any(|(_, v)| dominates(v, u)))
        .cloned()
        .collect();
    Ok(frontier)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductBound {
    /// `Σ max(0, 1 − x_k) ≤ δ`.
    pub feasible: bool,
    /// `Π x_k ≥ 1 − δ`.
    pub product_ok: bool,
}

/// Numbers whose total shortfall below 1 is at most δ have product at
/// least `1 − δ`.
pub fn feasible_product_lower_bound(xs: &[Rational], delta: &Rational) -> ProductBound {
    let one = Rational::one();
    let deficit = xs
        .iter()
        .filter(|x| **x < one)
        .fold(Rational::zero(), |acc, x| acc + (&one - x));
    let product = xs.iter().fold(Rational::one(), |acc, x| acc * x);
    ProductBound {
        feasible: deficit <= *delta,
        product_ok: product >= &one - delta,
    }
}
