//! Fair public decision making over exact rationals.
//!
//! A public decision instance has `n` players and `m` issues; each issue
//! needs one of its alternatives chosen and every player has an additive
//! utility for the result. Private goods division is the special case where
//! each alternative of an issue hands one good to one player.
//!
//! The crate computes fair shares (Prop, RRS, PPS, MMS), runs round robin,
//! leximin and Maximum Nash Welfare, allocates private goods with PPS and
//! PO in polynomial time, audits outcomes against every axiom with exact
//! α-levels, and ships brute-force oracles to check all of it.

pub mod audit;
pub mod error;
pub mod generators;
pub mod io;
pub mod mechanisms;
pub mod model;
pub mod oracles;
pub mod popt;
pub mod rational;
mod search;
pub mod shares;
pub mod survey;

pub use audit::{audit, audit_goods, check_pareto_optimal, check_pareto_optimal_goods, Alpha, AuditOptions, AuditReport, Axiom};
pub use error::{FairError, Result};
pub use mechanisms::{leximin, max_nash_welfare, round_robin, Mechanism, MechanismResult, DEFAULT_CAP};
pub use model::{goods_to_public, Allocation, DecisionInstance, GoodsInstance, Issue, Outcome, Violation};
pub use popt::{pps_po_allocate, prop1_po_search, weighted_welfare_allocation, WeightVector};
pub use rational::Rational;
pub use shares::{mms_share, pps_share, prop_share, rrs_share, share_profile, ShareProfile};
