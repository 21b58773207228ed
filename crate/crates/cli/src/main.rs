use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fairdec_core::audit::AuditOptions;
use fairdec_core::error::FairError;
use fairdec_core::generators::{generate, Family, Generated, RandomShape, FAMILY_NAMES};
use fairdec_core::io::{
    emit_bench_csv, emit_bench_text, emit_instance, emit_report_json, emit_report_text, mechanism_document,
    parse_instance, parse_result, prop1_search_json, report_document, to_json, transfer_trace_json, Instance,
    ParseOptions, ResultDocument, Solution,
};
use fairdec_core::mechanisms::{Mechanism, DEFAULT_CAP};
use fairdec_core::oracles::{exact_optimum, Objective};
use fairdec_core::rational::{format_rational, parse_rational};
use fairdec_core::shares::DEFAULT_MMS_CAP;
use fairdec_core::survey::{audit_run, run_mechanism, run_survey, run_utilities, Run, RunOptions, SurveyConfig};
use fairdec_core::{audit, audit_goods, Allocation};

#[derive(Parser)]
#[command(name = "fairdec", version, about = "Fair public decisions and private goods over exact rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on an instance.
    Solve(SolveArgs),
    /// Audit an outcome or allocation against every axiom.
    Audit(AuditArgs),
    /// Generate a named or random instance.
    Gen(GenArgs),
    /// Brute-force optimum of an objective.
    Oracle(OracleArgs),
    /// Rewrite a goods instance as a public decision instance.
    Reduce(ReduceArgs),
    /// Tally axiom satisfaction over random instances.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Accept JSON floats, reading their decimal text exactly.
    #[arg(long)]
    lossless_decimals: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    mechanism: String,
    #[command(flatten)]
    input: InputArgs,
    /// Round robin order as comma-separated player indices.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Embed an audit of the result.
    #[arg(long)]
    audit: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    result: PathBuf,
    /// Run the exhaustive PO check with this outcome cap.
    #[arg(long)]
    po_cap: Option<u64>,
    #[arg(long)]
    with_mms: bool,
    #[arg(long, default_value_t = DEFAULT_MMS_CAP)]
    mms_cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(FAMILY_NAMES))]
    family: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Maximum alternatives per issue (random public instances).
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Rational in (0, 1), e.g. 1/100.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    umin: u32,
    #[arg(long, default_value_t = 5)]
    umax: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the family's witness allocation, if it has one.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_parser = ["nash", "leximin", "utilitarian"])]
    objective: String,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 6)]
    m: usize,
    /// Maximum alternatives per issue.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    umin: u32,
    #[arg(long, default_value_t = 5)]
    umax: u32,
    /// Random goods instances instead of public ones.
    #[arg(long)]
    goods: bool,
    #[arg(long, value_delimiter = ',', default_value = "round-robin,leximin,mnw")]
    mechanisms: Vec<String>,
    #[arg(long, default_value_t = 1_000_000)]
    cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

enum CliError {
    Fair(FairError),
    Usage(String),
}

impl From<FairError> for CliError {
    fn from(e: FairError) -> Self {
        CliError::Fair(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &InputArgs) -> CliResult<Instance> {
    let parsed = parse_instance(
        &read(&args.input)?,
        ParseOptions {
            lossless_decimals: args.lossless_decimals,
        },
    )?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(parsed.value)
}

fn player_names(instance: &Instance) -> Option<Vec<String>> {
    match instance {
        Instance::Public(p) => p.player_names.clone(),
        Instance::Goods(g) => g.player_names.clone(),
    }
}

fn run_document(instance: &Instance, run: &Run) -> ResultDocument {
    let utilities = run_utilities(instance, run);
    match (instance, run) {
        (Instance::Goods(g), Run::Mechanism(r)) => mechanism_document(r, Some(g)),
        (Instance::Public(_), Run::Mechanism(r)) => mechanism_document(r, None),
        (Instance::Goods(_), Run::PpsPo(r)) => ResultDocument {
            mechanism: Some(Mechanism::PpsPo.name().into()),
            trace: Some(transfer_trace_json(&r.weights, &r.trace)),
            ..ResultDocument::goods(&r.allocation).with_utilities(&utilities)
        },
        (Instance::Goods(_), Run::Prop1Po(r)) => ResultDocument {
            mechanism: Some(Mechanism::Prop1Po.name().into()),
            trace: Some(prop1_search_json(r)),
            ..ResultDocument::goods(&r.allocation).with_utilities(&utilities)
        },
        (Instance::Public(_), _) => unreachable!("goods mechanisms reject public input"),
    }
}

fn result_text(document: &ResultDocument) -> String {
    let mut out = String::new();
    if let Some(m) = &document.mechanism {
        out.push_str(&format!("mechanism: {m}\n"));
    }
    if let Some(choices) = &document.choices {
        let choices: Vec<String> = choices.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("choices: {}\n", choices.join(" ")));
    }
    if let Some(bundles) = &document.bundles {
        for (i, bundle) in bundles.iter().enumerate() {
            let goods: Vec<String> = bundle.iter().map(|g| g.to_string()).collect();
            out.push_str(&format!("player {}: {{{}}}\n", i + 1, goods.join(", ")));
        }
    }
    if let Some(utilities) = &document.utilities {
        let values: Vec<String> = utilities
            .iter()
            .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
            .collect();
        out.push_str(&format!("utilities: {}\n", values.join(" ")));
    }
    out
}

fn solve(args: SolveArgs) -> CliResult<()> {
    let mechanism = Mechanism::from_name(&args.mechanism)
        .ok_or_else(|| CliError::Usage(format!("unknown mechanism {:?}", args.mechanism)))?;
    let instance = load(&args.input)?;
    let options = RunOptions {
        cap: args.cap,
        order: args.order,
        max_iterations: args.max_iterations,
    };
    let run = run_mechanism(&instance, mechanism, &options)?;
    let mut document = run_document(&instance, &run);
    let report = if args.audit {
        let report = audit_run(
            &instance,
            &run,
            AuditOptions {
                po_cap: Some(args.cap),
                mms_cap: None,
            },
        )?;
        document.audit = Some(report_document(&report));
        Some(report)
    } else {
        None
    };
    let text = match args.format {
        Format::Json | Format::Csv => to_json(&document),
        Format::Text => {
            let mut text = result_text(&document);
            if let Some(report) = &report {
                text.push_str(&emit_report_text(report, player_names(&instance).as_deref()));
            }
            text
        }
    };
    write_output(args.out.as_deref(), &text)
}

fn audit_cmd(args: AuditArgs) -> CliResult<()> {
    let instance = load(&args.input)?;
    let result = parse_result(&read(&args.result)?)?;
    let options = AuditOptions {
        po_cap: args.po_cap,
        mms_cap: args.with_mms.then_some(args.mms_cap),
    };
    let report = match (&instance, result.solution()?) {
        (Instance::Public(p), Solution::Outcome(o)) => audit(p, &o, options)?,
        (Instance::Goods(g), Solution::Allocation(a)) => audit_goods(g, &a, options)?,
        (Instance::Goods(g), Solution::Outcome(o)) => {
            g.to_public().check_outcome(&o)?;
            audit_goods(g, &Allocation::from_outcome(g.players, &o), options)?
        }
        (Instance::Public(_), Solution::Allocation(_)) => {
            return Err(CliError::Usage("an allocation needs a goods instance".into()))
        }
    };
    let text = match args.format {
        Format::Json | Format::Csv => emit_report_json(&report),
        Format::Text => emit_report_text(&report, player_names(&instance).as_deref()),
    };
    write_output(args.out.as_deref(), &text)
}

fn required<T>(value: Option<T>, flag: &str, family: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for {family}")))
}

fn gen(args: GenArgs) -> CliResult<()> {
    let name = args.family.as_str();
    let shape = || -> CliResult<RandomShape> {
        Ok(RandomShape {
            players: required(args.n, "n", name)?,
            items: required(args.m, "m", name)?,
            max_alternatives: args.k,
            low: args.umin,
            high: args.umax,
        })
    };
    let family = match name {
        "example1" => Family::Example1,
        "example2" => Family::Example2,
        "compromise" => Family::Compromise,
        "nash-pps-gap" => Family::NashPpsGap {
            n: required(args.n, "n", name)?,
        },
        "ef1-rrs-gap" => Family::Ef1RrsGap {
            n: required(args.n, "n", name)?,
        },
        "mnw-rrs-gap" => {
            let text = required(args.delta.as_deref(), "delta", name)?;
            Family::MnwRrsGap {
                delta: parse_rational(text)?.value,
            }
        }
        "rrs-without-prop1" => Family::RrsWithoutProp1 {
            n: required(args.n, "n", name)?,
            m: required(args.m, "m", name)?,
        },
        "weighted-welfare-gap" => Family::WeightedWelfareGap,
        "random-public" => Family::RandomPublic {
            shape: shape()?,
            seed: args.seed,
        },
        "random-goods" => Family::RandomGoods {
            shape: shape()?,
            seed: args.seed,
        },
        other => return Err(CliError::Usage(format!("unknown family {other:?}"))),
    };
    let (instance, witness) = match generate(&family)? {
        Generated::Public(p) => (Instance::Public(p), None),
        Generated::Goods {
            goods,
            allocation,
            critical_ratio,
        } => {
            if let Some(ratio) = critical_ratio {
                eprintln!("critical weight ratio w1/w2 = {}", format_rational(&ratio));
            }
            (Instance::Goods(goods), allocation)
        }
    };
    write_output(args.out.as_deref(), &emit_instance(&instance))?;
    match (args.witness, witness) {
        (Some(path), Some(allocation)) => write_output(Some(&path), &to_json(&ResultDocument::goods(&allocation))),
        (Some(_), None) => Err(CliError::Usage(format!("{name} has no witness allocation"))),
        _ => Ok(()),
    }
}

fn oracle(args: OracleArgs) -> CliResult<()> {
    let objective = Objective::from_name(&args.objective).expect("checked by clap");
    let instance = load(&args.input)?;
    let result = exact_optimum(&instance.to_public(), objective, args.cap)?;
    let goods = match &instance {
        Instance::Goods(g) => Some(g),
        Instance::Public(_) => None,
    };
    write_output(args.out.as_deref(), &to_json(&mechanism_document(&result, goods)))
}

fn reduce(args: ReduceArgs) -> CliResult<()> {
    match load(&args.input)? {
        Instance::Goods(g) => write_output(args.out.as_deref(), &emit_instance(&Instance::Public(g.to_public()))),
        Instance::Public(_) => Err(CliError::Usage("reduce needs a goods instance".into())),
    }
}

fn bench(args: BenchArgs) -> CliResult<()> {
    let mechanisms = args
        .mechanisms
        .iter()
        .map(|m| Mechanism::from_name(m).ok_or_else(|| CliError::Usage(format!("unknown mechanism {m:?}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let config = SurveyConfig {
        trials: args.trials,
        seed: args.seed,
        shape: RandomShape {
            players: args.n,
            items: args.m,
            max_alternatives: args.k,
            low: args.umin,
            high: args.umax,
        },
        goods: args.goods,
        mechanisms,
        cap: args.cap,
    };
    let pool = thread_pool()?;
    let rows = pool.install(|| run_survey(&config))?;
    let text = match args.format {
        Format::Csv | Format::Json => emit_bench_csv(&rows),
        Format::Text => emit_bench_text(&rows),
    };
    write_output(None, &text)
}

/// Rayon pool sized by `FAIRDEC_THREADS`, defaulting to the machine.
fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("FAIRDEC_THREADS") {
        let threads: usize = value
            .parse()
            .map_err(|_| CliError::Usage(format!("FAIRDEC_THREADS must be a number, got {value:?}")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Audit(args) => audit_cmd(args),
        Command::Gen(args) => gen(args),
        Command::Oracle(args) => oracle(args),
        Command::Reduce(args) => reduce(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Fair(error)) => {
            eprintln!("error: {error}");
            ExitCode::from(match error {
                FairError::CapExceeded { .. } => 3,
                FairError::Degenerate(_) => 4,
                _ => 2,
            })
        }
    }
}
