//! `dauction`: batch front end over the `discrete-auction` solvers.
//!
//! Every subcommand runs one experiment (`tables` runs the whole existence grid)
//! and writes a JSON, CSV or Markdown report to stdout or `--output`.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use discrete_auction::bridge::{
    build_discrete_analogue, gaps_non_increasing, halving_steps, revenue_convergence,
    verify_continuum_match, ContinuousAuction, ConvergenceRow,
};
use discrete_auction::dominance::{
    reduce, round1_weak_dominance, strategy_count, unreduced_strategy_count, DeletionReason,
    ReducedGame, DEFAULT_EXACT_BUDGET,
};
use discrete_auction::enumerate::{bid_curve_csv, DEFAULT_NODE_BUDGET};
use discrete_auction::rational::{self, Rational};
use discrete_auction::symmetric::DEFAULT_TIES_CAP;
use discrete_auction::tables::{self, Table};
use discrete_auction::thresholds::{threshold_report, tied_top_win_probability};
use discrete_auction::{
    construct_asymmetric_fp3, enumerate_pure_equilibria, export_bid_curve, is_equilibrium,
    solve_symmetric, AuctionSpec, BiddingFunction, GameError, Scope, SearchStatus, SpecDocument,
    StrategyProfile, Structure, Verdict,
};

pub use config::FileConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{field}: {message}")]
    Field {
        field: &'static str,
        message: String,
    },
    #[error("missing `{0}`: pass it as a flag or set it in the config file")]
    Missing(&'static str),
    #[error("config file {path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn field(field: &'static str, message: impl ToString) -> Self {
        CliError::Field {
            field,
            message: message.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "dauction",
    version,
    about = "Exact equilibrium analysis for sealed-bid auctions on discrete grids"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Flat TOML file of settings; flags override it
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Report format (each subcommand has its own default)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, short, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the game: grids, value distribution and strategy count
    Describe(GameArgs),
    /// Run dominance reduction and print the surviving bids with a deletion trace
    Reduce(ReduceArgs),
    /// Find every symmetric pure equilibrium
    SolveSymmetric(SolveArgs),
    /// Find every pure equilibrium, symmetric or not
    Enumerate(EnumerateArgs),
    /// Check whether a profile is an equilibrium
    Verify(VerifyArgs),
    /// Recompute the existence grids for first-price and all-pay auctions
    Tables(TablesArgs),
    /// Build and verify the three-bidder first-price equilibrium tracking 2v/3
    AsymFp3(AsymArgs),
    /// Check that the continuous equilibrium survives a matched discretisation
    #[command(alias = "prop5")]
    ContinuumMatch(MatchArgs),
    /// Revenue of two-bidder first price without ties as the grid is refined
    Converge(ConvergeArgs),
    /// Closed-form existence thresholds for a bidder count and grid size
    Thresholds(ThresholdArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct GameArgs {
    /// Payment rule: fp, sp or ap
    #[arg(long)]
    pub structure: Option<String>,
    /// Tie rule: fair or none
    #[arg(long)]
    pub ties: Option<String>,
    /// Number of bidders
    #[arg(long)]
    pub n: Option<usize>,
    /// Top grid index; values and bids are 0, δ, ..., xδ
    #[arg(long)]
    pub x: Option<usize>,
    /// Grid step, e.g. "1/2"
    #[arg(long)]
    pub delta: Option<String>,
    /// Value probabilities, comma separated (default uniform)
    #[arg(long, value_delimiter = ',')]
    pub pmf: Option<Vec<String>>,
    /// JSON game document; replaces the other game flags
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Opponent profiles the exact dominance test may visit per sweep
    #[arg(long)]
    pub exact_budget: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Largest x the fair-ties search attempts
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// monotone (default) or full
    #[arg(long)]
    pub scope: Option<String>,
    /// Node budget
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub exact_budget: Option<u64>,
    /// Report one profile per relabelling of the bidders
    #[arg(long)]
    pub collapse: bool,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Bid indices, e.g. "0,0,1" (all bidders) or "0,0,1;0,1,1" (one per bidder)
    #[arg(long)]
    pub profile: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct TablesArgs {
    /// 1 (with ties), 2 (without ties) or all
    #[arg(long)]
    pub which: Option<String>,
    /// Also compute the cells that have no published answer
    #[arg(long)]
    pub untested: bool,
    /// Node budget per cell
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct AsymArgs {
    /// Top grid index; at least 4 and not a multiple of 3
    #[arg(long)]
    pub x: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct MatchArgs {
    /// fp or ap
    #[arg(long)]
    pub structure: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of steps of the value range
    #[arg(long)]
    pub grid_count: Option<usize>,
    /// Step between values (default n)
    #[arg(long)]
    pub delta: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ConvergeArgs {
    /// Top of the value range
    #[arg(long)]
    pub upper: Option<String>,
    /// Number of halvings, starting from a single step
    #[arg(long)]
    pub steps: Option<usize>,
    /// Explicit steps instead of halving, comma separated
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<String>>,
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub x: Option<usize>,
    /// Also evaluate the tie-sharing win probability at this tie probability
    #[arg(long)]
    pub p: Option<String>,
}

/// What a subcommand produced.
#[derive(Debug)]
pub struct Report {
    pub body: String,
    pub inconclusive: bool,
}

impl Report {
    fn done(body: String) -> Self {
        Report {
            body,
            inconclusive: false,
        }
    }
}

/// Parses `argv`, runs the command and writes its report. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) if report.inconclusive => EXIT_INCONCLUSIVE,
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

/// Runs a parsed command line and writes the report to its destination.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let cfg = match &cli.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let jobs = cli.common.jobs.or(cfg.jobs);
    let format = match cli.common.format {
        Some(f) => Some(f),
        None => cfg
            .format
            .as_deref()
            .map(|s| {
                s.parse::<Format>()
                    .map_err(|e| CliError::field("format", e))
            })
            .transpose()?,
    };
    let output = cli.common.output.clone().or_else(|| cfg.output.clone());

    let work = || dispatch(&cli.command, &cfg, format);
    let report = match jobs {
        Some(0) => return Err(CliError::field("jobs", "must be at least 1")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| CliError::field("jobs", e))?
            .install(work)?,
        None => work()?,
    };
    write_output(output.as_deref(), &report.body)?;
    if report.inconclusive {
        eprintln!("inconclusive: the search stopped before it could settle the question");
    }
    Ok(report)
}

fn write_output(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn dispatch(cmd: &Command, cfg: &FileConfig, format: Option<Format>) -> Result<Report, CliError> {
    match cmd {
        Command::Describe(a) => describe(a, cfg, format.unwrap_or(Format::Json)),
        Command::Reduce(a) => reduce_cmd(a, cfg, format.unwrap_or(Format::Json)),
        Command::SolveSymmetric(a) => solve_cmd(a, cfg, format.unwrap_or(Format::Json)),
        Command::Enumerate(a) => enumerate_cmd(a, cfg, format.unwrap_or(Format::Json)),
        Command::Verify(a) => verify_cmd(a, cfg, format.unwrap_or(Format::Json)),
        Command::Tables(a) => tables_cmd(a, cfg, format.unwrap_or(Format::Markdown)),
        Command::AsymFp3(a) => asym_cmd(a, cfg, format.unwrap_or(Format::Json)),
        Command::ContinuumMatch(a) => match_cmd(a, cfg, format.unwrap_or(Format::Json)),
        Command::Converge(a) => converge_cmd(a, cfg, format.unwrap_or(Format::Csv)),
        Command::Thresholds(a) => thresholds_cmd(a, cfg, format.unwrap_or(Format::Json)),
    }
}

fn parse_field<T: FromStr>(field: &'static str, text: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    text.parse::<T>().map_err(|e| CliError::field(field, e))
}

fn parse_rational(field: &'static str, text: &str) -> Result<Rational, CliError> {
    rational::parse(text).map_err(|e| CliError::field(field, e))
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialise");
    s.push('\n');
    s
}

fn decimal(r: &Rational) -> String {
    format!("{:.6}", rational::to_f64(r))
}

/// Builds the game from flags, falling back to the config file.
pub fn resolve_spec(a: &GameArgs, cfg: &FileConfig) -> Result<AuctionSpec, CliError> {
    if let Some(path) = a.spec.as_ref().or(cfg.spec.as_ref()) {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        return serde_json::from_str(&text).map_err(|e| CliError::field("spec", e));
    }
    let structure: Structure = parse_field(
        "structure",
        a.structure
            .as_deref()
            .or(cfg.structure.as_deref())
            .ok_or(CliError::Missing("structure"))?,
    )?;
    let tie_rule = parse_field(
        "ties",
        a.ties
            .as_deref()
            .or(cfg.ties.as_deref())
            .ok_or(CliError::Missing("ties"))?,
    )?;
    let n = a.n.or(cfg.n).ok_or(CliError::Missing("n"))?;
    let x = a.x.or(cfg.x).ok_or(CliError::Missing("x"))?;
    let delta = a.delta.clone().or_else(|| cfg.delta.clone());
    if let Some(d) = &delta {
        parse_rational("delta", d)?;
    }
    let pmf = a.pmf.clone().or_else(|| cfg.pmf.clone());
    if let Some(p) = &pmf {
        for m in p {
            parse_rational("pmf", m)?;
        }
    }
    let doc = SpecDocument {
        structure,
        tie_rule,
        n,
        delta,
        x: Some(x),
        pmf,
        value_points: None,
        bid_points: None,
    };
    Ok(AuctionSpec::try_from(doc)?)
}

fn describe(a: &GameArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let spec = resolve_spec(a, cfg)?;
    let body = match format {
        Format::Json => to_json(&json!({
            "spec": spec,
            "description": spec.describe(),
            "num_values": spec.num_values(),
            "num_bids": spec.num_bids(),
            "strategies_per_bidder": unreduced_strategy_count(&spec).to_string(),
        })),
        Format::Markdown => format!(
            "{}\n\n- values: {}\n- bids: {}\n- bidding functions per bidder: {}\n",
            spec.describe(),
            spec.num_values(),
            spec.num_bids(),
            unreduced_strategy_count(&spec)
        ),
        Format::Csv => {
            let mut out =
                String::from("value_index,value,value_decimal,probability,probability_decimal\n");
            for (i, (v, p)) in spec.value_points().iter().zip(spec.pmf()).enumerate() {
                let _ = writeln!(
                    out,
                    "{i},{},{},{},{}",
                    rational::format(v),
                    decimal(v),
                    rational::format(p),
                    decimal(p)
                );
            }
            out
        }
    };
    Ok(Report::done(body))
}

fn reason_text(r: &DeletionReason) -> String {
    match r {
        DeletionReason::WeaklyDominated => "weakly dominated".into(),
        DeletionReason::IntervalDominated { by } => {
            format!("beaten by bid {by} against the bracketing opponent distributions")
        }
        DeletionReason::ExactDominated { by } => {
            format!("beaten by bid {by} against every surviving opponent profile")
        }
        DeletionReason::NoMonotoneCompletion => "no monotone function passes through it".into(),
    }
}

/// Human-readable deletion trace.
pub fn trace_text(reduced: &ReducedGame) -> String {
    let mut out = String::new();
    for d in &reduced.trace {
        let _ = writeln!(
            out,
            "round {}: bidder {} value {} drops bid {} ({})",
            d.round,
            d.player + 1,
            d.value,
            d.bid,
            reason_text(&d.reason)
        );
    }
    for g in &reduced.downgrades {
        let _ = writeln!(
            out,
            "round {}: bidder {} exact test skipped, {} opponent profiles",
            g.round,
            g.player + 1,
            g.opponent_profiles
        );
    }
    out
}

fn allowed_text(bids: &[usize]) -> String {
    bids.iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn reduce_cmd(a: &ReduceArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let spec = resolve_spec(&a.game, cfg)?;
    let budget = a
        .exact_budget
        .or(cfg.exact_budget)
        .unwrap_or(DEFAULT_EXACT_BUDGET);
    let reduced = reduce(&spec, budget)?;
    let counts: Vec<String> = strategy_count(&reduced)
        .iter()
        .map(|c| c.to_string())
        .collect();
    let monotone: Vec<String> = (0..spec.n)
        .map(|p| reduced.monotone_count(p).to_string())
        .collect();
    let body = match format {
        Format::Json => {
            eprint!("{}", trace_text(&reduced));
            to_json(&json!({
                "spec": spec,
                "reduced": reduced,
                "strategy_counts": counts,
                "monotone_counts": monotone,
            }))
        }
        Format::Csv => {
            let mut out = String::from("bidder,value,allowed\n");
            for p in 0..spec.n {
                for v in 0..spec.num_values() {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        p + 1,
                        v,
                        allowed_text(reduced.allowed(p, v))
                    );
                }
            }
            out
        }
        Format::Markdown => {
            let mut out = format!("{}\n\n", spec.describe());
            let _ = writeln!(out, "Rounds of strict dominance: {}\n", reduced.rounds);
            let _ = writeln!(out, "| bidder | value | surviving bids |\n|---|---|---|");
            for p in 0..spec.n {
                for v in 0..spec.num_values() {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} |",
                        p + 1,
                        v,
                        allowed_text(reduced.allowed(p, v))
                    );
                }
            }
            let _ = writeln!(
                out,
                "\nBidding functions per bidder: {}; monotone: {}\n",
                counts.join(", "),
                monotone.join(", ")
            );
            out.push_str("```\n");
            out.push_str(&trace_text(&reduced));
            out.push_str("```\n");
            out
        }
    };
    Ok(Report::done(body))
}

fn function_points(spec: &AuctionSpec, f: &BiddingFunction) -> Vec<String> {
    f.bids()
        .iter()
        .map(|&b| rational::format(&spec.bid_points()[b]))
        .collect()
}

fn functions_csv(spec: &AuctionSpec, functions: &[BiddingFunction]) -> String {
    let mut out = String::from("value_index,value");
    for k in 0..functions.len() {
        let _ = write!(out, ",bid_{}", k + 1);
    }
    out.push('\n');
    for v in 0..spec.num_values() {
        let _ = write!(out, "{v},{}", rational::format(&spec.value_points()[v]));
        for f in functions {
            let _ = write!(out, ",{}", rational::format(&spec.bid_points()[f.bid(v)]));
        }
        out.push('\n');
    }
    out
}

fn solve_cmd(a: &SolveArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let spec = resolve_spec(&a.game, cfg)?;
    let cap = a.cap.or(cfg.cap).unwrap_or(DEFAULT_TIES_CAP);
    let report = solve_symmetric(&spec, cap)?;
    let body = match format {
        Format::Json => to_json(&json!({
            "spec": spec,
            "exists": !report.equilibria.is_empty(),
            "report": report,
        })),
        Format::Csv => functions_csv(&spec, &report.equilibria),
        Format::Markdown => {
            let mut out = format!("{}\n\n", spec.describe());
            if report.is_inconclusive() {
                out.push_str("Inconclusive: the grid is above the search cap.\n");
            } else if report.equilibria.is_empty() {
                out.push_str("No symmetric pure equilibrium.\n");
            } else {
                for f in &report.equilibria {
                    let _ = writeln!(out, "- {f}");
                }
            }
            for note in &report.notes {
                let _ = writeln!(out, "\nNote: {note}");
            }
            out
        }
    };
    Ok(Report {
        body,
        inconclusive: report.is_inconclusive(),
    })
}

fn parse_scope(text: &str) -> Result<Scope, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "monotone" | "monotone_undominated" => Ok(Scope::MonotoneUndominated),
        "full" | "fully_exhaustive" | "exhaustive" => Ok(Scope::FullyExhaustive),
        other => Err(CliError::field(
            "scope",
            format!("unknown scope {other:?} (expected monotone or full)"),
        )),
    }
}

fn enumerate_cmd(a: &EnumerateArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let spec = resolve_spec(&a.game, cfg)?;
    let scope = match a.scope.as_deref().or(cfg.scope.as_deref()) {
        Some(s) => parse_scope(s)?,
        None => Scope::MonotoneUndominated,
    };
    let budget = a.budget.or(cfg.budget).unwrap_or(DEFAULT_NODE_BUDGET);
    let reduced = match scope {
        Scope::MonotoneUndominated => reduce(
            &spec,
            a.exact_budget
                .or(cfg.exact_budget)
                .unwrap_or(DEFAULT_EXACT_BUDGET),
        )?,
        // Only the first round: the exhaustive mode exists to check the reduction.
        Scope::FullyExhaustive => round1_weak_dominance(&spec)?,
    };
    let mut result = enumerate_pure_equilibria(&spec, &reduced, scope, budget)?;
    if a.collapse || cfg.collapse.unwrap_or(false) {
        result.equilibria = result.up_to_relabelling();
    }
    let inconclusive = result.status == SearchStatus::BudgetExhausted;
    let body = match format {
        Format::Json => to_json(&json!({ "spec": spec, "result": result })),
        Format::Csv => {
            let mut out = String::from("profile,bidder,bids\n");
            for (k, p) in result.equilibria.iter().enumerate() {
                for (i, f) in p.players().iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        k + 1,
                        i + 1,
                        function_points(&spec, f).join(" ")
                    );
                }
            }
            out
        }
        Format::Markdown => {
            let mut out = format!("{}\n\n", spec.describe());
            let _ = writeln!(
                out,
                "Equilibria: {} ({}), {} nodes\n",
                result.equilibria.len(),
                if inconclusive {
                    "budget exhausted, list may be incomplete"
                } else {
                    "complete"
                },
                result.stats.nodes
            );
            for p in &result.equilibria {
                let _ = writeln!(out, "- {p}");
            }
            out
        }
    };
    Ok(Report { body, inconclusive })
}

/// Parses `"0,0,1"` (everyone) or `"0,0,1;0,1,1"` (one function per bidder).
pub fn parse_profile(text: &str, n: usize) -> Result<StrategyProfile, CliError> {
    let functions = text
        .split(';')
        .map(|f| {
            f.trim()
                .trim_matches(|c| c == '(' || c == ')')
                .split(',')
                .map(|b| b.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map(BiddingFunction::new)
                .map_err(|e| CliError::field("profile", format!("{f:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(if functions.len() == 1 {
        StrategyProfile::symmetric(functions.into_iter().next().expect("one"), n)
    } else {
        StrategyProfile::new(functions)
    })
}

fn verify_cmd(a: &VerifyArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let spec = resolve_spec(&a.game, cfg)?;
    let text = a
        .profile
        .as_deref()
        .or(cfg.profile.as_deref())
        .ok_or(CliError::Missing("profile"))?;
    let profile = parse_profile(text, spec.n)?;
    let verdict = is_equilibrium(&spec, &profile)?;
    let body = match format {
        Format::Json => to_json(&json!({
            "spec": spec,
            "profile": profile,
            "equilibrium": verdict.is_equilibrium(),
            "verdict": verdict,
        })),
        Format::Csv => match &verdict {
            Verdict::Equilibrium => "equilibrium,bidder,value,from_bid,to_bid,gain\ntrue,,,,,\n".into(),
            Verdict::NotEquilibrium { witness: w } => format!(
                "equilibrium,bidder,value,from_bid,to_bid,gain\nfalse,{},{},{},{},{}\n",
                w.player + 1,
                w.value,
                w.from_bid,
                w.to_bid,
                rational::format(&w.gain)
            ),
        },
        Format::Markdown => match &verdict {
            Verdict::Equilibrium => format!("{profile} is an equilibrium.\n"),
            Verdict::NotEquilibrium { witness: w } => format!(
                "{profile} is not an equilibrium: bidder {} with value {} gains {} by moving from bid {} to bid {}.\n",
                w.player + 1,
                w.value,
                rational::format(&w.gain),
                w.from_bid,
                w.to_bid
            ),
        },
    };
    Ok(Report::done(body))
}

fn parse_which(text: &str) -> Result<Vec<Table>, CliError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "all" | "both" => Ok(Table::ALL.to_vec()),
        other => other
            .parse::<usize>()
            .ok()
            .and_then(Table::from_number)
            .map(|t| vec![t])
            .ok_or_else(|| {
                CliError::field("which", format!("expected 1, 2 or all, got {other:?}"))
            }),
    }
}

fn tables_cmd(a: &TablesArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let which = match a.which.as_deref().or(cfg.which.as_deref()) {
        Some(w) => parse_which(w)?,
        None => Table::ALL.to_vec(),
    };
    let untested = a.untested || cfg.untested.unwrap_or(false);
    let budget = a.budget.or(cfg.budget).unwrap_or(DEFAULT_NODE_BUDGET);
    let cells = tables::reproduce_tables(&which, untested, budget)?;
    let inconclusive = cells.iter().any(|c| c.computed.is_none());
    let body = match format {
        Format::Json => to_json(&cells),
        Format::Csv => tables::render_csv(&cells),
        Format::Markdown => tables::render_markdown(&cells),
    };
    Ok(Report { body, inconclusive })
}

fn asym_cmd(a: &AsymArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let x = a.x.or(cfg.x).ok_or(CliError::Missing("x"))?;
    let profile = construct_asymmetric_fp3(x)?;
    let rows = export_bid_curve(&profile);
    let body = match format {
        Format::Json => to_json(&json!({
            "x": x,
            "profile": profile,
            "equilibrium": true,
            "rows": rows,
        })),
        Format::Csv => bid_curve_csv(&rows),
        Format::Markdown => {
            let mut out = String::from(
                "| value | bidder 1 | bidder 2 | bidder 3 | 2v/3 |\n|---|---|---|---|---|\n",
            );
            for r in &rows {
                let bids: Vec<String> = r.bids.iter().map(|b| b.to_string()).collect();
                let _ = writeln!(
                    out,
                    "| {} | {} | {} |",
                    r.value,
                    bids.join(" | "),
                    rational::format(&r.reference)
                );
            }
            out
        }
    };
    Ok(Report::done(body))
}

fn match_cmd(a: &MatchArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let structure: Structure = parse_field(
        "structure",
        a.structure
            .as_deref()
            .or(cfg.structure.as_deref())
            .unwrap_or("fp"),
    )?;
    let n = a.n.or(cfg.n).unwrap_or(2);
    let grid_count = a.grid_count.or(cfg.grid_count).unwrap_or(10);
    let delta = match a.delta.as_deref().or(cfg.delta.as_deref()) {
        Some(d) => parse_rational("delta", d)?,
        None => Rational::from_integer((n as i64).into()),
    };
    let upper = &delta * Rational::from_integer((grid_count as i64).into());
    let cont = match structure {
        Structure::FirstPrice => ContinuousAuction::uniform_first_price(n, upper)?,
        Structure::AllPay => ContinuousAuction::uniform_all_pay(n, upper)?,
        Structure::SecondPrice => {
            return Err(CliError::field("structure", "expected fp or ap"));
        }
    };
    let analogue = build_discrete_analogue(&cont, &delta, grid_count)?;
    let check = verify_continuum_match(&analogue.spec, &analogue.candidate)?;
    let body =
        match format {
            Format::Json => to_json(&json!({
                "spec": analogue.spec,
                "candidate": analogue.candidate,
                "holds": check.holds(),
                "check": check,
            })),
            Format::Csv => {
                let mut out = String::from("value,value_decimal,bid,bid_decimal\n");
                for (v, &b) in analogue
                    .spec
                    .value_points()
                    .iter()
                    .zip(analogue.candidate.bids())
                {
                    let bid = &analogue.spec.bid_points()[b];
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        rational::format(v),
                        decimal(v),
                        rational::format(bid),
                        decimal(bid)
                    );
                }
                out
            }
            Format::Markdown => format!(
            "{}\n\nCarried-over bidding is {}an equilibrium; {} of {} inserted bids break it.\n",
            analogue.spec.describe(),
            if check.verdict.is_equilibrium() { "" } else { "not " },
            check.probes.iter().filter(|p| !p.verdict.is_equilibrium()).count(),
            check.probes.len()
        ),
        };
    Ok(Report::done(body))
}

fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("delta,delta_decimal,x,revenue,revenue_decimal,gap,gap_decimal\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            rational::format(&r.delta),
            decimal(&r.delta),
            r.grid_x,
            rational::format(&r.revenue),
            decimal(&r.revenue),
            rational::format(&r.gap),
            decimal(&r.gap)
        );
    }
    out
}

fn converge_cmd(a: &ConvergeArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let upper = parse_rational(
        "upper",
        a.upper.as_deref().or(cfg.upper.as_deref()).unwrap_or("12"),
    )?;
    let deltas = match a.deltas.as_ref().or(cfg.deltas.as_ref()) {
        Some(list) => list
            .iter()
            .map(|d| parse_rational("deltas", d))
            .collect::<Result<Vec<_>, _>>()?,
        None => halving_steps(&upper, a.steps.or(cfg.steps).unwrap_or(6)),
    };
    let rows = revenue_convergence(&upper, &deltas)?;
    let monotone = gaps_non_increasing(&rows);
    let body = match format {
        Format::Json => to_json(&json!({
            "upper": rational::format(&upper),
            "benchmark": rational::format(&(&upper / Rational::from_integer(3.into()))),
            "gap_non_increasing": monotone,
            "rows": rows,
        })),
        Format::Csv => convergence_csv(&rows),
        Format::Markdown => {
            let mut out = String::from("| δ | revenue | gap |\n|---|---|---|\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "| {} | {} ({}) | {} |",
                    rational::format(&r.delta),
                    rational::format(&r.revenue),
                    decimal(&r.revenue),
                    decimal(&r.gap)
                );
            }
            let _ = writeln!(out, "\nGap never increases: {monotone}");
            out
        }
    };
    Ok(Report::done(body))
}

fn thresholds_cmd(a: &ThresholdArgs, cfg: &FileConfig, format: Format) -> Result<Report, CliError> {
    let n = a.n.or(cfg.n).ok_or(CliError::Missing("n"))?;
    let x = a.x.or(cfg.x).ok_or(CliError::Missing("x"))?;
    let report = threshold_report(n, x);
    let tie = match a.p.as_deref().or(cfg.p.as_deref()) {
        Some(p) => Some(tied_top_win_probability(n, &parse_rational("p", p)?)?),
        None => None,
    };
    let body = match format {
        Format::Json => {
            let mut v: Value = serde_json::to_value(&report).expect("report serialises");
            if let Some(t) = &tie {
                v["tied_top_win_probability"] = Value::String(rational::format(t));
            }
            to_json(&v)
        }
        Format::Csv => {
            let mut out = String::from("n,x,first_price_no_ties_excluded,all_pay_excluded,all_pay_bidders_exceed_ratio,ties_class\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:?}",
                n,
                x,
                report.first_price_no_ties_excluded,
                report.all_pay_excluded,
                report.all_pay_bidders_exceed_ratio,
                report.ties_class
            );
            out
        }
        Format::Markdown => {
            let mut out = format!("n = {n}, x = {x}\n\n");
            let _ = writeln!(
                out,
                "- first price without ties rules out symmetric equilibria: {} (grid bound ≈ {:.4})",
                report.first_price_no_ties_excluded, report.first_price_threshold
            );
            let _ = writeln!(
                out,
                "- all-pay rules out symmetric equilibria: {}",
                report.all_pay_excluded
            );
            let _ = writeln!(
                out,
                "- n - 1 exceeds the all-pay ratio (≈ {:.4}): {}",
                report.all_pay_ratio, report.all_pay_bidders_exceed_ratio
            );
            let _ = writeln!(out, "- first price with ties: {:?}", report.ties_class);
            if let Some(t) = &tie {
                let _ = writeln!(
                    out,
                    "- win probability at a shared top bid: {}",
                    rational::format(t)
                );
            }
            out
        }
    };
    Ok(Report::done(body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_forms() {
        let p = parse_profile("0,0,1", 3).unwrap();
        assert!(p.is_symmetric());
        assert_eq!(p.len(), 3);
        let p = parse_profile("(0,0,1);(0,1,1)", 2).unwrap();
        assert!(!p.is_symmetric());
        assert!(parse_profile("0,a", 2).is_err());
    }

    #[test]
    fn flags_override_config() {
        let cfg = FileConfig::parse("structure = \"ap\"\nties = \"fair\"\nn = 3\nx = 4\n").unwrap();
        let args = GameArgs {
            n: Some(2),
            ..GameArgs::default()
        };
        let spec = resolve_spec(&args, &cfg).unwrap();
        assert_eq!(spec.n, 2);
        assert_eq!(spec.x(), Some(4));
        assert_eq!(spec.structure, Structure::AllPay);
    }

    #[test]
    fn bad_value_names_field() {
        let args = GameArgs {
            structure: Some("dutch".into()),
            ties: Some("fair".into()),
            n: Some(2),
            x: Some(3),
            ..GameArgs::default()
        };
        let err = resolve_spec(&args, &FileConfig::default()).unwrap_err();
        assert!(err.to_string().starts_with("structure:"), "{err}");
    }
}
