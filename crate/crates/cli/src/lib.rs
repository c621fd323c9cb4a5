//! Command-line front end for `caching-core`.
//!
//! Every command returns a [`Report`] that renders as JSON or as a table.
//! Rationals are always written as `"p/q"` strings.

pub mod cache;
pub mod render;
pub mod sweep;

use std::fmt;
use std::path::PathBuf;

use caching_core::accumulation::{
    best_ruckle_distribution, count_winning_subsets, max_losing_subsets_exact, AccumulationSpec, GoldDistribution,
};
use caching_core::fractional::{
    fractional_step_distribution, p_lambda, per_step_discovery_check, FractionalSpec, StepBranch, Target, YoungState,
};
use caching_core::game::{upper_bound_combinatorial, upper_bound_first_query};
use caching_core::rational::{self, format, Rational};
use caching_core::solver::{solve_with, RevealRule, SolveOptions, SolveResult, DEFAULT_BUDGET};
use caching_core::strategies::{builtin, families, joint_verify_cooperative_detailed, lowest_box, verify_detailed, LeastTreasures, StrategyTree};
use caching_core::{Error, GameSpec, Variant};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use cache::ResultCache;
use render::{with_approx, KeyValue, Report, Style};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
            CliError::Core(Error::Internal(_) | Error::MalformedLp(_)) | CliError::Internal(_) => EXIT_INTERNAL,
            CliError::Core(_) | CliError::Input(_) => EXIT_INVALID,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(s) | CliError::Internal(s) => f.write_str(s),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "caching", version, about = "Exact values and strategy checks for the multiple caching game")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Maximum number of game-tree nodes to expand.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Solve the full game instead of the quotient by box relabeling.
    #[arg(long, global = true)]
    pub no_symmetry: bool,
    /// Allow queries with fewer than k boxes.
    #[arg(long, global = true)]
    pub relaxed_queries: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON file of previously solved values.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Recompute cache hits and fail if they differ.
    #[arg(long, global = true)]
    pub recheck: bool,
    /// Add decimal renderings next to exact values.
    #[arg(long, global = true)]
    pub approx: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AccumulationMode {
    Evaluate,
    Ruckle,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleName {
    /// Reveal from the queried box holding the fewest treasures.
    LeastTreasures,
    /// Reveal from the lowest-numbered queried box holding a treasure.
    LowestBox,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a game exactly.
    Solve {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "adversary", value_parser = parse_variant)]
        variant: Variant,
        /// Include both optimal plans (never served from the cache).
        #[arg(long)]
        plans: bool,
    },
    /// Value of a searcher strategy against its best-responding hider.
    Verify(VerifyArgs),
    /// Solve every small triplet and compare with the combinatorial bound.
    SweepAccuracy {
        #[arg(long)]
        max_n: usize,
        #[arg(long)]
        max_d: usize,
        #[arg(long)]
        max_k: usize,
    },
    /// One-turn accumulation game with divisible gold.
    Accumulation {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = parse_rational)]
        d: Rational,
        #[arg(long, value_enum)]
        mode: AccumulationMode,
        /// Comma-separated amounts, required by `evaluate`.
        #[arg(long)]
        dist: Option<String>,
    },
    /// Chance that the single-box strategy repeats its current box.
    Plambda {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Treasures found per box, comma-separated, current box last.
        #[arg(long)]
        lambda: String,
    },
    /// Mixed next query for a fractional query size, with its identities.
    FractionalCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_parser = parse_rational)]
        k: Rational,
        #[arg(long)]
        lambda: String,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Built-in strategy name.
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    pub family: Option<String>,
    /// Strategy tree in JSON.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value = "adversary", value_parser = parse_variant)]
    pub variant: Variant,
    /// Reveal rule for the cooperative variant.
    #[arg(long, value_enum)]
    pub rule: Option<RuleName>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| CliError::Input(format!("bad {what} entry {:?} in {s:?}", part.trim())))
        })
        .collect()
}

/// Execution context shared by the commands.
pub struct Context {
    pub config: RunConfig,
    pub cache: Option<ResultCache>,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        let cache = config.cache.as_deref().map(ResultCache::open).transpose().map_err(CliError::Input)?;
        Ok(Context { config, cache })
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            symmetry: !self.config.no_symmetry,
            relaxed: self.config.relaxed_queries,
            budget: self.config.budget,
        }
    }

    fn style(&self) -> Style {
        Style {
            approx: self.config.approx,
        }
    }

    /// Solves through the cache. Any recomputation that meets a stored
    /// entry must agree with it exactly.
    pub fn solve(&mut self, spec: &GameSpec, full: bool) -> Result<Solved, CliError> {
        let opts = self.options();
        let key = cache::key(spec.n, spec.d, spec.k, spec.variant, &cache::flags_hash(opts.symmetry, opts.relaxed));
        let stored = self.cache.as_ref().and_then(|c| c.get(&key)).cloned();
        if let (Some(entry), false) = (&stored, full) {
            let value = rational::parse(&entry.value)
                .map_err(|e| CliError::Input(format!("cache entry {key}: {e}")))?;
            if self.config.recheck {
                let fresh = solve_with(spec, opts)?;
                check_stored(&key, &entry.value, &fresh.value)?;
            }
            return Ok(Solved {
                value,
                stats: entry.stats.clone(),
                cached: true,
                result: None,
            });
        }
        let result = solve_with(spec, opts)?;
        let stats = serde_json::to_value(&result.stats).map_err(|e| CliError::Internal(e.to_string()))?;
        if let Some(entry) = &stored {
            check_stored(&key, &entry.value, &result.value)?;
        }
        if let Some(c) = self.cache.as_mut() {
            if stored.is_none() {
                c.insert(key, format(&result.value), stats.clone());
            }
        }
        Ok(Solved {
            value: result.value.clone(),
            stats,
            cached: false,
            result: full.then_some(result),
        })
    }

    pub fn save(&mut self) -> Result<(), CliError> {
        match self.cache.as_mut() {
            Some(c) => c.save().map_err(CliError::Internal),
            None => Ok(()),
        }
    }
}

fn check_stored(key: &str, stored: &str, fresh: &Rational) -> Result<(), CliError> {
    if stored != format(fresh) {
        return Err(CliError::Internal(format!(
            "cache entry {key} holds {stored} but recomputation gives {}",
            format(fresh)
        )));
    }
    Ok(())
}

pub struct Solved {
    pub value: Rational,
    pub stats: Value,
    pub cached: bool,
    pub result: Option<SolveResult>,
}

/// Runs one command. The cache, if any, is saved even when the command fails
/// part way through a sweep.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let mut ctx = Context::new(cli.config.clone())?;
    let out = dispatch(&mut ctx, &cli.command);
    ctx.save()?;
    out
}

fn dispatch(ctx: &mut Context, command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Solve { n, d, k, variant, plans } => cmd_solve(ctx, &GameSpec::new(*n, *d, *k, *variant)?, *plans),
        Command::Verify(args) => cmd_verify(ctx, args),
        Command::SweepAccuracy { max_n, max_d, max_k } => sweep::cmd_sweep_accuracy(ctx, *max_n, *max_d, *max_k),
        Command::Accumulation { n, k, d, mode, dist } => cmd_accumulation(ctx, *n, *k, d, *mode, dist.as_deref()),
        Command::Plambda { n, d, lambda } => cmd_plambda(ctx, *n, *d, lambda),
        Command::FractionalCheck { n, d, k, lambda } => cmd_fractional_check(ctx, *n, *d, k, lambda),
    }
}

fn cmd_solve(ctx: &mut Context, spec: &GameSpec, plans: bool) -> Result<Report, CliError> {
    let solved = ctx.solve(spec, plans)?;
    let bound = upper_bound_combinatorial(spec.n, spec.d, spec.k);
    let first = upper_bound_first_query(spec.n, spec.k);
    let opts = ctx.options();
    let mut json = json!({
        "n": spec.n,
        "d": spec.d,
        "k": spec.k,
        "variant": spec.variant,
        "value": format(&solved.value),
        "combinatorial_bound": format(&bound),
        "first_query_bound": format(&first),
        "symmetry": opts.symmetry,
        "relaxed": opts.relaxed,
        "cached": solved.cached,
        "stats": solved.stats,
    });
    if let Some(r) = &solved.result {
        json["result"] = serde_json::to_value(r).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let json = with_approx(json, ctx.style(), &[("value", &solved.value), ("combinatorial_bound", &bound)]);
    let table = KeyValue::new(ctx.style())
        .text("game", spec)
        .rational("value", &solved.value)
        .rational("combinatorial bound", &bound)
        .rational("first query bound", &first)
        .text("cached", solved.cached)
        .finish();
    Ok(Report { json, table })
}

fn load_strategy(args: &VerifyArgs) -> Result<(String, StrategyTree), CliError> {
    if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let tree = StrategyTree::from_json(&text)?;
        return Ok((path.display().to_string(), tree));
    }
    let name = args.family.as_deref().expect("clap requires --family or --file");
    if !families().iter().any(|f| f.name == name) {
        let known: Vec<&str> = families().iter().map(|f| f.name).collect();
        return Err(CliError::Input(format!("unknown family {name:?}; known: {}", known.join(", "))));
    }
    Ok((name.to_string(), builtin(name, args.n, args.d, args.k)?))
}

fn cmd_verify(ctx: &mut Context, args: &VerifyArgs) -> Result<Report, CliError> {
    let (name, tree) = load_strategy(args)?;
    let spec = GameSpec::new(tree.n, tree.d, tree.k, args.variant)?;
    let best = if args.variant == Variant::Cooperative {
        let rule = match (args.rule, name.as_str()) {
            (Some(r), _) => r,
            (None, "cooperative332") => RuleName::LeastTreasures,
            (None, _) => return Err(CliError::Input("the cooperative variant needs --rule".into())),
        };
        let rule: &dyn RevealRule = match rule {
            RuleName::LeastTreasures => &LeastTreasures,
            RuleName::LowestBox => &lowest_box,
        };
        joint_verify_cooperative_detailed(&spec, &tree, rule)?
    } else {
        verify_detailed(&spec, &tree)?
    };
    let bound = upper_bound_combinatorial(spec.n, spec.d, spec.k);
    let json = json!({
        "strategy": name,
        "n": spec.n,
        "d": spec.d,
        "k": spec.k,
        "variant": spec.variant,
        "value": format(&best.value),
        "combinatorial_bound": format(&bound),
        "nodes": tree.size(),
        "witness": {
            "allocation": best.allocation,
            "reveals": best.reveals,
        },
    });
    let json = with_approx(json, ctx.style(), &[("value", &best.value)]);
    let table = KeyValue::new(ctx.style())
        .text("strategy", &name)
        .text("game", spec)
        .rational("value", &best.value)
        .rational("combinatorial bound", &bound)
        .text("worst allocation", &best.allocation)
        .text("adversary reveals", best.reveals.len())
        .finish();
    Ok(Report { json, table })
}

/// Machine-readable result of the `accumulation` command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccumulationReport {
    pub n: usize,
    pub k: usize,
    #[serde(with = "rational::serde_pq")]
    pub d: Rational,
    pub winning: u64,
    pub losing: u64,
    pub total: u64,
    /// Searcher win probability, `winning / total`.
    #[serde(with = "rational::serde_pq")]
    pub probability: Rational,
    pub witness: GoldDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

pub fn accumulation_report(
    n: usize,
    k: usize,
    d: &Rational,
    mode: AccumulationMode,
    dist: Option<&str>,
) -> Result<AccumulationReport, CliError> {
    let spec = AccumulationSpec::new(n, k, d.clone())?;
    let total = spec.subsets();
    let (winning, witness, r) = match mode {
        AccumulationMode::Evaluate => {
            let text = dist.ok_or_else(|| CliError::Input("evaluate needs --dist".into()))?;
            let amounts = text
                .split(',')
                .map(|a| rational::parse(a).map_err(|e| CliError::Input(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let g = GoldDistribution::new(amounts)?;
            g.check(&spec)?;
            (count_winning_subsets(&g, k), g, None)
        }
        AccumulationMode::Ruckle => {
            let r = best_ruckle_distribution(&spec);
            (r.winning, r.distribution, Some(r.r))
        }
        AccumulationMode::Exact => {
            let e = max_losing_subsets_exact(&spec)?;
            (total - e.losing, e.witness, None)
        }
    };
    Ok(AccumulationReport {
        n,
        k,
        d: d.clone(),
        winning,
        losing: total - winning,
        total,
        probability: Rational::new((winning as i64).into(), (total as i64).into()),
        witness,
        r,
    })
}

fn cmd_accumulation(
    ctx: &mut Context,
    n: usize,
    k: usize,
    d: &Rational,
    mode: AccumulationMode,
    dist: Option<&str>,
) -> Result<Report, CliError> {
    let rep = accumulation_report(n, k, d, mode, dist)?;
    let json = serde_json::to_value(&rep).map_err(|e| CliError::Internal(e.to_string()))?;
    let json = with_approx(json, ctx.style(), &[("probability", &rep.probability)]);
    let witness: Vec<String> = rep.witness.amounts.iter().map(format).collect();
    let mut kv = KeyValue::new(ctx.style());
    kv.text("winning", rep.winning)
        .text("losing", rep.losing)
        .text("total", rep.total)
        .rational("searcher probability", &rep.probability)
        .text("witness", witness.join(","));
    if let Some(r) = rep.r {
        kv.text("r", r);
    }
    Ok(Report { json, table: kv.finish() })
}

fn cmd_plambda(ctx: &mut Context, n: usize, d: usize, lambda: &str) -> Result<Report, CliError> {
    let state = YoungState::new(n, d, parse_list(lambda, "lambda")?)?;
    let p = p_lambda(&state)?;
    let json = with_approx(
        json!({ "n": n, "d": d, "lambda": state.lambda, "p_lambda": format(&p) }),
        ctx.style(),
        &[("p_lambda", &p)],
    );
    let table = KeyValue::new(ctx.style()).rational("p_lambda", &p).finish();
    Ok(Report { json, table })
}

fn cmd_fractional_check(ctx: &mut Context, n: usize, d: usize, k: &Rational, lambda: &str) -> Result<Report, CliError> {
    let spec = FractionalSpec::new(n, d, k.clone())?;
    let state = YoungState::new(n, d, parse_list(lambda, "lambda")?)?;
    let branches: Vec<StepBranch> = fractional_step_distribution(&spec, &state)?;
    let p = p_lambda(&state)?;
    let mut kv = KeyValue::new(ctx.style());
    kv.rational("p_lambda", &p).rational("floor weight", &spec.p);
    for b in &branches {
        let label = format!("{} + {} fresh", if b.repeat { "current" } else { "no current" }, b.fresh);
        kv.rational(&label, &b.weight);
    }
    let mut checks = Vec::new();
    for (target, name) in [(Target::CurrentBox, "current_box"), (Target::FreshBox, "fresh_box")] {
        let (lhs, rhs) = per_step_discovery_check(&spec, &state, target)?;
        if lhs != rhs {
            return Err(CliError::Internal(format!(
                "{name} identity fails: {} != {}",
                format(&lhs),
                format(&rhs)
            )));
        }
        kv.rational(&format!("{name} reach"), &lhs);
        checks.push(json!({ "target": name, "lhs": format(&lhs), "rhs": format(&rhs), "holds": true }));
    }
    let json = json!({
        "n": n,
        "d": d,
        "k": format(k),
        "p": format(&spec.p),
        "lambda": state.lambda,
        "p_lambda": format(&p),
        "branches": branches,
        "checks": checks,
    });
    Ok(Report { json, table: kv.finish() })
}

/// Renders a report in the configured format.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Table => report.table.render(),
    }
}
