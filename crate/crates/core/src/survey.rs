//! Running any mechanism on any instance, and batch surveys that tally how
//! often each mechanism meets each axiom on random instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::audit::{audit, audit_goods, Alpha, AuditOptions, AuditReport, Axiom};
use crate::error::{FairError, Result};
use crate::generators::{random_goods_with, random_public_with, RandomShape};
use crate::io::Instance;
use crate::mechanisms::{identity_order, leximin, max_nash_welfare, round_robin, Mechanism, MechanismResult, DEFAULT_CAP};
use crate::model::{Allocation, Outcome};
use crate::oracles::{exact_optimum, Objective};
use crate::popt::{pps_po_allocate, prop1_po_search, PpsPoResult, Prop1PoResult};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Outcome cap for the enumeration mechanisms.
    pub cap: u64,
    /// Round robin order; defaults to `0..n`.
    pub order: Option<Vec<usize>>,
    /// Round budget for the Prop1 + PO search.
    pub max_iterations: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            cap: DEFAULT_CAP,
            order: None,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Run {
    /// A public-decision mechanism; on goods input it ran on the reduced
    /// instance.
    Mechanism(MechanismResult),
    PpsPo(PpsPoResult),
    Prop1Po(Prop1PoResult),
}

impl Run {
    pub fn outcome(&self, goods: usize) -> Outcome {
        match self {
            Run::Mechanism(r) => r.outcome.clone(),
            Run::PpsPo(r) => r.allocation.to_outcome(goods),
            Run::Prop1Po(r) => r.allocation.to_outcome(goods),
        }
    }

    pub fn allocation(&self, players: usize) -> Allocation {
        match self {
            Run::Mechanism(r) => Allocation::from_outcome(players, &r.outcome),
            Run::PpsPo(r) => r.allocation.clone(),
            Run::Prop1Po(r) => r.allocation.clone(),
        }
    }
}

pub fn run_mechanism(instance: &Instance, mechanism: Mechanism, options: &RunOptions) -> Result<Run> {
    let goods_only = |name: &str| {
        FairError::InvalidParameter(format!("{name} needs a goods instance"))
    };
    Ok(match mechanism {
        Mechanism::PpsPo => match instance {
            Instance::Goods(g) => Run::PpsPo(pps_po_allocate(g)?),
            Instance::Public(_) => return Err(goods_only(mechanism.name())),
        },
        Mechanism::Prop1Po => match instance {
            Instance::Goods(g) => Run::Prop1Po(prop1_po_search(g, options.max_iterations)?),
            Instance::Public(_) => return Err(goods_only(mechanism.name())),
        },
        _ => {
            let public = instance.to_public();
            Run::Mechanism(match mechanism {
                Mechanism::RoundRobin => {
                    let order = options.order.clone().unwrap_or_else(|| identity_order(public.players));
                    round_robin(&public, &order)?
                }
                Mechanism::Leximin => leximin(&public, options.cap)?,
                Mechanism::MaxNashWelfare => max_nash_welfare(&public, options.cap)?,
                Mechanism::Utilitarian => exact_optimum(&public, Objective::Utilitarian, options.cap)?,
                Mechanism::PpsPo | Mechanism::Prop1Po => unreachable!(),
            })
        }
    })
}

pub fn audit_run(instance: &Instance, run: &Run, options: AuditOptions) -> Result<AuditReport> {
    match instance {
        Instance::Public(p) => audit(p, &run.outcome(0), options),
        Instance::Goods(g) => audit_goods(g, &run.allocation(g.players), options),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyConfig {
    pub trials: usize,
    pub seed: u64,
    pub shape: RandomShape,
    /// Random goods instances instead of public ones.
    pub goods: bool,
    pub mechanisms: Vec<Mechanism>,
    /// Cap for the mechanisms and for the exhaustive PO check.
    pub cap: u64,
}

/// Tallies for one mechanism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub mechanism: String,
    pub trials: usize,
    pub po: usize,
    pub pps: usize,
    pub rrs: usize,
    pub prop1: usize,
    pub pps_min: Option<Alpha>,
    pub rrs_min: Option<Alpha>,
    pub prop1_min: Option<Alpha>,
}

impl BenchRow {
    fn new(mechanism: Mechanism) -> Self {
        BenchRow {
            mechanism: mechanism.name().into(),
            trials: 0,
            po: 0,
            pps: 0,
            rrs: 0,
            prop1: 0,
            pps_min: None,
            rrs_min: None,
            prop1_min: None,
        }
    }

    pub fn rate(&self, count: usize) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            count as f64 / self.trials as f64
        }
    }

    fn add(&mut self, report: &AuditReport) {
        self.trials += 1;
        self.po += usize::from(report.po.as_ref().is_some_and(|po| po.satisfied));
        for (axiom, count, min) in [
            (Axiom::Pps, &mut self.pps, &mut self.pps_min),
            (Axiom::Rrs, &mut self.rrs, &mut self.rrs_min),
            (Axiom::Prop1, &mut self.prop1, &mut self.prop1_min),
        ] {
            *count += usize::from(report.all_satisfied(axiom));
            if let Some(alpha) = report.min_alpha(axiom) {
                if min.as_ref().is_none_or(|m| alpha < *m) {
                    *min = Some(alpha);
                }
            }
        }
    }
}

/// Random instance number `trial` of a survey.
pub fn survey_instance(config: &SurveyConfig, trial: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial as u64);
    Ok(if config.goods {
        Instance::Goods(random_goods_with(&mut rng, &config.shape)?)
    } else {
        Instance::Public(random_public_with(&mut rng, &config.shape)?)
    })
}

/// Runs every mechanism on `config.trials` seeded instances (in parallel on
/// the current rayon pool) and tallies the audits in trial order.
pub fn run_survey(config: &SurveyConfig) -> Result<Vec<BenchRow>> {
    let options = RunOptions {
        cap: config.cap,
        ..RunOptions::default()
    };
    let audit_options = AuditOptions {
        po_cap: Some(config.cap),
        mms_cap: None,
    };
    let reports: Vec<Vec<AuditReport>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let instance = survey_instance(config, trial)?;
            config
                .mechanisms
                .iter()
                .map(|&m| audit_run(&instance, &run_mechanism(&instance, m, &options)?, audit_options))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<BenchRow> = config.mechanisms.iter().map(|&m| BenchRow::new(m)).collect();
    for trial in &reports {
        for (row, report) in rows.iter_mut().zip(trial) {
            row.add(report);
        }
    }
    Ok(rows)
}

/// Utility vector of a run on `instance`.
pub fn run_utilities(instance: &Instance, run: &Run) -> Vec<Rational> {
    match (instance, run) {
        (_, Run::Mechanism(r)) => r.utilities.clone(),
        (Instance::Goods(g), Run::PpsPo(r)) => g.utilities_of(&r.allocation),
        (Instance::Goods(g), Run::Prop1Po(r)) => g.utilities_of(&r.allocation),
        (Instance::Public(p), other) => p.utilities(&other.outcome(p.issue_count())),
    }
}
