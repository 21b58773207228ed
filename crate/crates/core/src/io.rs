//! JSON documents for instances, results and audit reports, plus text and
//! CSV renderings.
//!
//! Rationals are JSON integers when integral and `"p/q"` strings otherwise.
//! Floats are rejected unless [`ParseOptions::lossless_decimals`] is set, in
//! which case their decimal text is read exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Number, Value};

use crate::audit::{Alpha, AuditReport, Axiom, AxiomCheck, PlayerAudit, PoVerdict, Witness};
use crate::error::{FairError, Result};
use crate::mechanisms::{MechanismResult, Normalization, Trace};
use crate::model::{Allocation, DecisionInstance, GoodsInstance, Issue, Outcome};
use crate::popt::{Prop1PoResult, TransferTrace, WeightVector};
use crate::rational::{format_rational, parse_decimal, parse_rational, Rational};
use crate::shares::PlayerShares;
use crate::survey::BenchRow;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept JSON floats and read their decimal text exactly.
    pub lossless_decimals: bool,
}

/// A parsed value with the warnings raised while reading it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Public(DecisionInstance),
    Goods(GoodsInstance),
}

impl Instance {
    pub fn players(&self) -> usize {
        match self {
            Instance::Public(p) => p.players,
            Instance::Goods(g) => g.players,
        }
    }

    /// The public instance (goods are reduced).
    pub fn to_public(&self) -> DecisionInstance {
        match self {
            Instance::Public(p) => p.clone(),
            Instance::Goods(g) => g.to_public(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceDocument {
    Public {
        players: Vec<String>,
        issues: Vec<IssueDocument>,
    },
    Goods {
        players: Vec<String>,
        goods: Vec<String>,
        utilities: Vec<Vec<Value>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueDocument {
    pub name: String,
    pub alternatives: Vec<String>,
    pub utilities: Vec<Vec<Value>>,
}

/// Encodes a rational as a JSON integer or a `"p/q"` string.
pub fn rational_to_json(value: &Rational) -> Value {
    if value.is_integer() {
        Value::Number(
            value
                .numer()
                .to_string()
                .parse::<Number>()
                .expect("integers are valid JSON numbers"),
        )
    } else {
        Value::String(format_rational(value))
    }
}

struct Reader {
    options: ParseOptions,
    warnings: Vec<String>,
}

impl Reader {
    fn rational(&mut self, value: &Value, path: &str) -> Result<Rational> {
        match value {
            Value::Number(number) => {
                let text = number.to_string();
                if text.contains(['.', 'e', 'E']) {
                    if self.options.lossless_decimals {
                        parse_decimal(&text)
                    } else {
                        Err(FairError::Parse(format!(
                            "{path}: float {text} rejected; use an integer, a \"p/q\" string, or enable lossless decimals"
                        )))
                    }
                } else {
                    Ok(parse_rational(&text)?.value)
                }
            }
            Value::String(text) => {
                let parsed = parse_rational(text).map_err(|e| FairError::Parse(format!("{path}: {e}")))?;
                if !parsed.canonical {
                    self.warnings.push(format!(
                        "{path}: \"{text}\" is not canonical; read as {}",
                        format_rational(&parsed.value)
                    ));
                }
                Ok(parsed.value)
            }
            other => Err(FairError::Parse(format!("{path}: expected a rational, found {other}"))),
        }
    }

    fn matrix(&mut self, rows: &[Vec<Value>], path: &str) -> Result<Vec<Vec<Rational>>> {
        rows.iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| self.rational(v, &format!("{path}[{i}][{j}]")))
                    .collect()
            })
            .collect()
    }
}

fn json_error(e: serde_json::Error) -> FairError {
    FairError::Parse(e.to_string())
}

/// Decodes and validates an instance document.
pub fn parse_instance(bytes: &[u8], options: ParseOptions) -> Result<Parsed<Instance>> {
    let document: InstanceDocument = serde_json::from_slice(bytes).map_err(json_error)?;
    let mut reader = Reader {
        options,
        warnings: Vec::new(),
    };
    let instance = match document {
        InstanceDocument::Public { players, issues } => {
            let issues = issues
                .into_iter()
                .enumerate()
                .map(|(t, doc)| {
                    let utilities = reader.matrix(&doc.utilities, &format!("issues[{t}].utilities"))?;
                    let mut issue = Issue::new(utilities);
                    issue.name = Some(doc.name);
                    issue.alternative_names = Some(doc.alternatives);
                    Ok(issue)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut instance = DecisionInstance::new(players.len(), issues);
            instance.player_names = Some(players);
            instance.check()?;
            Instance::Public(instance)
        }
        InstanceDocument::Goods {
            players,
            goods,
            utilities,
        } => {
            let utilities = reader.matrix(&utilities, "utilities")?;
            let instance = GoodsInstance {
                players: players.len(),
                goods: goods.len(),
                utilities,
                player_names: Some(players),
                good_names: Some(goods),
            };
            instance.check()?;
            Instance::Goods(instance)
        }
    };
    Ok(Parsed {
        value: instance,
        warnings: reader.warnings,
    })
}

fn names(given: &Option<Vec<String>>, prefix: &str, count: usize) -> Vec<String> {
    given
        .clone()
        .unwrap_or_else(|| (1..=count).map(|k| format!("{prefix}{k}")).collect())
}

fn json_matrix(rows: &[Vec<Rational>]) -> Vec<Vec<Value>> {
    rows.iter()
        .map(|row| row.iter().map(rational_to_json).collect())
        .collect()
}

/// Document for an instance; missing names become `p1`, `t1`, `a1`, `g1`, ….
pub fn instance_document(instance: &Instance) -> InstanceDocument {
    match instance {
        Instance::Public(p) => InstanceDocument::Public {
            players: names(&p.player_names, "p", p.players),
            issues: p
                .issues
                .iter()
                .enumerate()
                .map(|(t, issue)| IssueDocument {
                    name: issue.name.clone().unwrap_or_else(|| format!("t{}", t + 1)),
                    alternatives: names(&issue.alternative_names, "a", issue.alternatives()),
                    utilities: json_matrix(&issue.utilities),
                })
                .collect(),
        },
        Instance::Goods(g) => InstanceDocument::Goods {
            players: names(&g.player_names, "p", g.players),
            goods: names(&g.good_names, "g", g.goods),
            utilities: json_matrix(&g.utilities),
        },
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents always serialize");
    text.push('\n');
    text
}

pub fn emit_instance(instance: &Instance) -> String {
    to_json(&instance_document(instance))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundles: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<ReportDocument>,
}

/// An outcome or an allocation read from a result document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Outcome(Outcome),
    Allocation(Allocation),
}

impl ResultDocument {
    pub fn public(outcome: &Outcome) -> Self {
        ResultDocument {
            kind: "public".into(),
            mechanism: None,
            choices: Some(outcome.0.clone()),
            bundles: None,
            utilities: None,
            trace: None,
            audit: None,
        }
    }

    pub fn goods(allocation: &Allocation) -> Self {
        ResultDocument {
            kind: "goods".into(),
            mechanism: None,
            choices: None,
            bundles: Some(allocation.bundles().to_vec()),
            utilities: None,
            trace: None,
            audit: None,
        }
    }

    pub fn with_utilities(mut self, utilities: &[Rational]) -> Self {
        self.utilities = Some(utilities.iter().map(rational_to_json).collect());
        self
    }

    pub fn solution(&self) -> Result<Solution> {
        match (self.kind.as_str(), &self.choices, &self.bundles) {
            ("public", Some(choices), _) => Ok(Solution::Outcome(Outcome(choices.clone()))),
            ("goods", _, Some(bundles)) => Ok(Solution::Allocation(Allocation::new(bundles.clone()))),
            (kind, _, _) => Err(FairError::Parse(format!(
                "result of kind {kind:?} needs {}",
                if kind == "goods" { "\"bundles\"" } else { "\"choices\"" }
            ))),
        }
    }
}

pub fn parse_result(bytes: &[u8]) -> Result<ResultDocument> {
    let document: ResultDocument = serde_json::from_slice(bytes).map_err(json_error)?;
    document.solution()?;
    Ok(document)
}

/// Result document for a mechanism run on a public instance, or on the
/// reduced image of a goods instance when `goods` is set.
pub fn mechanism_document(result: &MechanismResult, goods: Option<&GoodsInstance>) -> ResultDocument {
    let base = match goods {
        Some(g) => ResultDocument::goods(&Allocation::from_outcome(g.players, &result.outcome)),
        None => ResultDocument::public(&result.outcome),
    };
    ResultDocument {
        mechanism: Some(result.mechanism.name().into()),
        trace: Some(trace_json(&result.trace)),
        ..base.with_utilities(&result.utilities)
    }
}

pub fn trace_json(trace: &Trace) -> Value {
    match trace {
        Trace::RoundRobin { order, picks } => json!({
            "order": order,
            "picks": picks
                .iter()
                .map(|p| json!({"player": p.player, "issue": p.issue, "alternative": p.alternative}))
                .collect::<Vec<_>>(),
        }),
        Trace::Leximin { normalization } => json!({
            "normalization": normalization
                .iter()
                .map(|n| match n {
                    Normalization::Rrs(d) => json!({"by": "rrs", "divisor": rational_to_json(d)}),
                    Normalization::Prop(d) => json!({"by": "prop", "divisor": rational_to_json(d)}),
                    Normalization::Excluded => json!({"by": "excluded"}),
                })
                .collect::<Vec<_>>(),
        }),
        Trace::Nash { support, product } => json!({
            "support": support,
            "product": rational_to_json(product),
        }),
        Trace::Utilitarian { welfare } => json!({"welfare": rational_to_json(welfare)}),
    }
}

fn weights_json(weights: &WeightVector) -> Value {
    Value::Array(weights.as_slice().iter().map(rational_to_json).collect())
}

pub fn transfer_trace_json(weights: &WeightVector, trace: &TransferTrace) -> Value {
    json!({
        "weights": weights_json(weights),
        "rounds": trace.rounds.iter().map(|r| json!({
            "above": r.above,
            "at": r.at,
            "below": r.below,
            "dec": r.dec,
            "reductions": r.reductions.iter().map(|x| json!({
                "from": x.from,
                "to": x.to,
                "good": x.good,
                "factor": rational_to_json(&x.factor),
            })).collect::<Vec<_>>(),
            "transfers": r.transfers.iter().map(|x| json!({
                "from": x.from,
                "to": x.to,
                "good": x.good,
            })).collect::<Vec<_>>(),
            "metric_before": r.metric_before,
            "metric_after": r.metric_after,
        })).collect::<Vec<_>>(),
        "conventions": trace.conventions.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    })
}

pub fn prop1_search_json(result: &Prop1PoResult) -> Value {
    let mut value = transfer_trace_json(&result.weights, &result.trace);
    value["certified"] = json!(result.certified);
    value["losses"] = result
        .losses
        .iter()
        .map(|l| json!({"round": l.round, "player": l.player}))
        .collect();
    value
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub players: Vec<PlayerDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub po: Option<PoDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerDocument {
    pub utility: Value,
    pub shares: SharesDocument,
    pub axioms: BTreeMap<String, AxiomDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharesDocument {
    pub prop: Value,
    pub rrs: Value,
    pub pps: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mms: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomDocument {
    pub satisfied: bool,
    /// A rational, or the string `"unbounded"`.
    pub alpha: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoDocument {
    pub satisfied: bool,
    #[serde(default)]
    pub witness: Option<Value>,
}

const UNBOUNDED: &str = "unbounded";

fn alpha_json(alpha: &Alpha) -> Value {
    match alpha {
        Alpha::Finite(a) => rational_to_json(a),
        Alpha::Unbounded => Value::String(UNBOUNDED.into()),
    }
}

pub fn report_document(report: &AuditReport) -> ReportDocument {
    ReportDocument {
        players: report
            .players
            .iter()
            .map(|p| PlayerDocument {
                utility: rational_to_json(&p.utility),
                shares: SharesDocument {
                    prop: rational_to_json(&p.shares.prop),
                    rrs: rational_to_json(&p.shares.rrs),
                    pps: rational_to_json(&p.shares.pps),
                    mms: p.shares.mms.as_ref().map(rational_to_json),
                },
                axioms: p
                    .axioms
                    .iter()
                    .map(|(axiom, check)| {
                        (
                            axiom.name().to_string(),
                            AxiomDocument {
                                satisfied: check.satisfied,
                                alpha: alpha_json(&check.alpha),
                            },
                        )
                    })
                    .collect(),
            })
            .collect(),
        po: report.po.as_ref().map(|po| PoDocument {
            satisfied: po.satisfied,
            witness: po.witness.as_ref().map(|w| match w {
                Witness::Outcome(o) => json!({"choices": o.0}),
                Witness::Allocation(a) => json!({"bundles": a.bundles()}),
            }),
        }),
    }
}

/// Inverse of [`report_document`].
pub fn report_from_document(document: &ReportDocument) -> Result<AuditReport> {
    let mut reader = Reader {
        options: ParseOptions::default(),
        warnings: Vec::new(),
    };
    let players = document
        .players
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let path = format!("players[{i}]");
            let axioms = p
                .axioms
                .iter()
                .map(|(name, check)| {
                    let axiom = Axiom::from_name(name)
                        .ok_or_else(|| FairError::Parse(format!("{path}: unknown axiom {name:?}")))?;
                    let alpha = match &check.alpha {
                        Value::String(s) if s == UNBOUNDED => Alpha::Unbounded,
                        other => Alpha::Finite(reader.rational(other, &format!("{path}.axioms.{name}"))?),
                    };
                    Ok((
                        axiom,
                        AxiomCheck {
                            satisfied: check.satisfied,
                            alpha,
                        },
                    ))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok(PlayerAudit {
                utility: reader.rational(&p.utility, &format!("{path}.utility"))?,
                shares: PlayerShares {
                    prop: reader.rational(&p.shares.prop, &path)?,
                    rrs: reader.rational(&p.shares.rrs, &path)?,
                    pps: reader.rational(&p.shares.pps, &path)?,
                    mms: p.shares.mms.as_ref().map(|v| reader.rational(v, &path)).transpose()?,
                },
                axioms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let po = document
        .po
        .as_ref()
        .map(|po| {
            let witness = match &po.witness {
                None | Some(Value::Null) => None,
                Some(w) => Some(if let Some(choices) = w.get("choices") {
                    Witness::Outcome(Outcome(serde_json::from_value(choices.clone()).map_err(json_error)?))
                } else if let Some(bundles) = w.get("bundles") {
                    Witness::Allocation(Allocation::new(
                        serde_json::from_value(bundles.clone()).map_err(json_error)?,
                    ))
                } else {
                    return Err(FairError::Parse("po.witness needs choices or bundles".into()));
                }),
            };
            Ok(PoVerdict {
                satisfied: po.satisfied,
                witness,
            })
        })
        .transpose()?;
    Ok(AuditReport { players, po })
}

pub fn emit_report_json(report: &AuditReport) -> String {
    to_json(&report_document(report))
}

/// Human-readable report, one block per player.
pub fn emit_report_text(report: &AuditReport, player_names: Option<&[String]>) -> String {
    let mut out = String::new();
    for (i, player) in report.players.iter().enumerate() {
        let name = player_names
            .and_then(|names| names.get(i).cloned())
            .unwrap_or_else(|| format!("p{}", i + 1));
        let _ = write!(out, "player {} ({name}): utility {}", i + 1, format_rational(&player.utility));
        let _ = write!(
            out,
            ", Prop {}, RRS {}, PPS {}",
            format_rational(&player.shares.prop),
            format_rational(&player.shares.rrs),
            format_rational(&player.shares.pps)
        );
        if let Some(mms) = &player.shares.mms {
            let _ = write!(out, ", MMS {}", format_rational(mms));
        }
        out.push('\n');
        for (axiom, check) in &player.axioms {
            let verdict = if check.satisfied { "ok" } else { "VIOLATED" };
            let _ = writeln!(out, "  {axiom}: {verdict} (α = {})", check.alpha);
        }
    }
    if let Some(po) = &report.po {
        if po.satisfied {
            out.push_str("PO: ok\n");
        } else {
            let witness = match &po.witness {
                Some(Witness::Outcome(o)) => format!("{:?}", o.0),
                Some(Witness::Allocation(a)) => format!("{:?}", a.bundles()),
                None => String::new(),
            };
            let _ = writeln!(out, "PO: VIOLATED (dominated by {witness})");
        }
    }
    out
}

pub const BENCH_HEADER: &str =
    "mechanism,trials,po_rate,pps_rate,rrs_rate,prop1_rate,pps_min_alpha,rrs_min_alpha,prop1_min_alpha";

fn csv_alpha(alpha: &Option<Alpha>) -> String {
    match alpha {
        Some(Alpha::Finite(a)) => format_rational(a),
        Some(Alpha::Unbounded) => "inf".into(),
        None => String::new(),
    }
}

/// Mechanism × axiom table: satisfaction rates and worst α.
pub fn emit_bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{:?},{:?},{:?},{:?},{},{},{}",
            row.mechanism,
            row.trials,
            row.rate(row.po),
            row.rate(row.pps),
            row.rate(row.rrs),
            row.rate(row.prop1),
            csv_alpha(&row.pps_min),
            csv_alpha(&row.rrs_min),
            csv_alpha(&row.prop1_min),
        );
    }
    out
}

pub fn emit_bench_text(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    for row in rows {
        let _ = writeln!(
            out,
            "{:<12} trials {:>5}  PO {:.3}  PPS {:.3}  RRS {:.3}  Prop1 {:.3}  min α: PPS {} RRS {} Prop1 {}",
            row.mechanism,
            row.trials,
            row.rate(row.po),
            row.rate(row.pps),
            row.rate(row.rrs),
            row.rate(row.prop1),
            csv_alpha(&row.pps_min),
            csv_alpha(&row.rrs_min),
            csv_alpha(&row.prop1_min),
        );
    }
    out
}
