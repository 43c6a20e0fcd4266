//! Command-line entry point: simulation runs, reward computation, trace
//! analytics, pareto extraction, and fixture inspection.
//!
//! Exit codes: 0 success, 1 data/validation error, 2 usage error. All
//! outputs are deterministic given `--seed`.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytics::{
    count_steps, length_stats_binned, pareto_front, read_pareto_csv, repeat_rate, repeat_verdicts,
    think_solution_ratio, write_pareto_csv, LengthStats, DEFAULT_BIN_WIDTH,
    DEFAULT_MIN_BLOCK_TOKENS, DEFAULT_REPEAT_K,
};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::logits::EosTemperature;
use crate::policy::PolicyConfig;
use crate::reward::{score_traces, LengthBasis, PenaltyConfig};
use crate::sim::{run_many, LoopInject, SimConfig, FIRST_BODY_TOKEN};
use crate::trace::{load_traces, write_traces, Level, SCHEMA_VERSION};

#[derive(Parser)]
#[command(
    name = "lenctl",
    version,
    about = "Token-efficiency toolkit: stopping-policy simulation, \
             length-penalized rewards, and response-trace analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded simulator under a stopping policy and write a trace file
    Simulate(SimulateArgs),
    /// Score a trace file with the multi-level length penalty
    Reward(RewardArgs),
    /// Compute length, repetition, ratio, and step statistics for a trace file
    Analyze(AnalyzeArgs),
    /// Extract the accuracy/length pareto front from a points CSV
    Pareto(ParetoArgs),
    /// List or dump the embedded reference tables
    Fixtures(FixturesArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PolicyArg {
    /// Budget forcing: cap thinking, force the delimiter at the cap
    Bf,
    /// Exact control: suppress early delimiters, force one at the target
    Ec,
    /// Prompt control: soft constraint in the prompt only
    Pc,
    /// No control
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Short,
    Moderate,
    Long,
}

impl From<LevelArg> for Level {
    fn from(level: LevelArg) -> Self {
        match level {
            LevelArg::Short => Level::Short,
            LevelArg::Moderate => Level::Moderate,
            LevelArg::Long => Level::Long,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Total,
    Thinking,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// `START:BLOCK_LEN:CYCLES` with `inf` for an unbounded loop.
#[derive(Clone, Copy, Debug)]
struct LoopSpec {
    start: u64,
    block_len: usize,
    cycles: Option<u64>,
}

fn parse_loop(s: &str) -> std::result::Result<LoopSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected START:BLOCK_LEN:CYCLES (tokens:tokens:count|inf)".into());
    }
    let start: u64 = parts[0].parse().map_err(|_| "bad START".to_string())?;
    let block_len: usize = parts[1].parse().map_err(|_| "bad BLOCK_LEN".to_string())?;
    if block_len == 0 {
        return Err("BLOCK_LEN must be positive".into());
    }
    let cycles = if parts[2] == "inf" {
        None
    } else {
        Some(parts[2].parse::<u64>().map_err(|_| "bad CYCLES".to_string())?)
    };
    Ok(LoopSpec {
        start,
        block_len,
        cycles,
    })
}

#[derive(Args)]
struct SimulateArgs {
    /// Stopping policy
    #[arg(long, value_enum)]
    policy: PolicyArg,
    /// Thinking budget for bf (tokens)
    #[arg(long, required_if_eq("policy", "bf"))]
    budget: Option<u64>,
    /// Exact thinking length for ec (tokens)
    #[arg(long, required_if_eq("policy", "ec"))]
    target: Option<u64>,
    /// Token count quoted in the prompt for pc (tokens)
    #[arg(long, default_value_t = 1000)]
    prompt_hint: u64,
    /// Hard cap on emitted tokens per run (tokens)
    #[arg(long, default_value_t = 4096)]
    max_total: u64,
    /// Minimum thinking length enforced by wait appends (tokens)
    #[arg(long)]
    min_thinking: Option<u64>,
    /// RNG seed; run k of a batch uses stream k (64-bit integer)
    #[arg(long, default_value_t = 0, env = "LENCTL_SEED")]
    seed: u64,
    /// Number of runs to generate (count)
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// EOS temperature; < 1 raises the stopping hazard (positive real)
    #[arg(long, allow_negative_numbers = true)]
    eos_temp: Option<f64>,
    /// EOS logit (real)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    eos_logit: f64,
    /// End-of-thinking logit; omitted = never proposed naturally (real)
    #[arg(long, allow_negative_numbers = true)]
    end_think_logit: Option<f64>,
    /// Shared logit of every body token (real)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    body_logit: f64,
    /// Wait-token logit; omitted = never proposed naturally (real)
    #[arg(long, allow_negative_numbers = true)]
    wait_logit: Option<f64>,
    /// Vocabulary size, at least 4 (count)
    #[arg(long, default_value_t = 16)]
    vocab_size: usize,
    /// Simulator cap on generated tokens per run (tokens)
    #[arg(long, default_value_t = 4096)]
    max_steps: u64,
    /// Inject a verbatim repetition loop: START:BLOCK_LEN:CYCLES
    /// (tokens:tokens:count|inf); the block cycles the first body tokens
    #[arg(long, value_parser = parse_loop)]
    r#loop: Option<LoopSpec>,
    /// Output trace file; `-` writes to stdout
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct RewardArgs {
    /// Input trace file (one JSON record per line after the header)
    traces: String,
    /// TOML file mirroring the penalty config (keys: alpha, beta, l_max,
    /// length_basis); explicit flags override it
    #[arg(long)]
    config: Option<String>,
    /// Wrong-answer penalty strength (real >= 0) [default: 0.1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Over-threshold penalty for correct answers (real >= 0) [default: 0.3]
    #[arg(long)]
    beta: Option<f64>,
    /// Maximum response length (tokens) [default: 4096]
    #[arg(long)]
    lmax: Option<u64>,
    /// Level override; required when traces carry no level
    #[arg(long, value_enum)]
    level: Option<LevelArg>,
    /// Which length the penalty is computed over [default: total]
    #[arg(long, value_enum)]
    length_basis: Option<BasisArg>,
    /// Output encoding
    #[arg(long, value_enum, default_value = "csv", env = "LENCTL_FORMAT")]
    format: FormatArg,
    /// Expected trace-file schema version
    #[arg(long, default_value = SCHEMA_VERSION)]
    schema_version: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input trace file
    traces: String,
    /// Minimum repeated-block size (whitespace tokens)
    #[arg(long, default_value_t = DEFAULT_MIN_BLOCK_TOKENS)]
    repeat_min: usize,
    /// Occurrences that make a block a repetition loop (count)
    #[arg(long, default_value_t = DEFAULT_REPEAT_K)]
    repeat_k: usize,
    /// Histogram bin width (tokens)
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    bin_width: u64,
    /// Also write per-trace rows to this CSV file
    #[arg(long)]
    csv: Option<String>,
    /// Expected trace-file schema version
    #[arg(long, default_value = SCHEMA_VERSION)]
    schema_version: String,
}

#[derive(Args)]
struct ParetoArgs {
    /// Points CSV with a label,accuracy,mean_length header
    points: String,
    /// Output CSV; `-` writes to stdout
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct FixturesArgs {
    #[command(subcommand)]
    action: FixturesAction,
}

#[derive(Subcommand)]
enum FixturesAction {
    /// List embedded fixtures with descriptions
    List,
    /// Dump one fixture as CSV
    Dump {
        /// Fixture name (see `fixtures list`)
        name: String,
    },
}

/// Parses and executes `argv`. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Reward(args) => reward(args),
        Command::Analyze(args) => analyze(args),
        Command::Pareto(args) => pareto(args),
        Command::Fixtures(args) => match args.action {
            FixturesAction::List => fixtures_list(),
            FixturesAction::Dump { name } => fixtures_dump(&name),
        },
    }
}

fn open_output(path: &str) -> Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        Ok(Box::new(File::create(path)?))
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let policy = match args.policy {
        PolicyArg::Bf => PolicyConfig::budget_forcing(args.budget.expect("clap"), args.max_total),
        PolicyArg::Ec => PolicyConfig::exact_control(args.target.expect("clap"), args.max_total),
        PolicyArg::Pc => PolicyConfig::prompt_control(args.prompt_hint, args.max_total),
        PolicyArg::Auto => PolicyConfig::auto(args.max_total),
    };
    let policy = match args.min_thinking {
        Some(min) => policy.with_min_thinking(min),
        None => policy,
    };
    let loop_inject = args.r#loop.map(|spec| {
        let body_count = args.vocab_size.saturating_sub(FIRST_BODY_TOKEN).max(1);
        LoopInject {
            start: spec.start,
            block: (0..spec.block_len)
                .map(|i| FIRST_BODY_TOKEN + (i % body_count))
                .collect(),
            cycles: spec.cycles,
        }
    });
    let cfg = SimConfig {
        vocab_size: args.vocab_size,
        eos_logit: args.eos_logit,
        end_think_logit: args.end_think_logit,
        body_logit: args.body_logit,
        wait_logit: args.wait_logit,
        loop_inject,
        seed: args.seed,
        max_steps: args.max_steps,
    };
    let temp = args.eos_temp.map(EosTemperature::new).transpose()?;
    let set = run_many(&cfg, &policy, temp, args.runs)?;
    let mut out = open_output(&args.out)?;
    write_traces(&set, &mut out)?;
    Ok(())
}

fn resolve_level(arg: Option<LevelArg>) -> Option<Level> {
    arg.map(Level::from)
}

fn reward(args: RewardArgs) -> Result<()> {
    let set = load_traces(&args.traces, &args.schema_version)?;
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str::<PenaltyConfig>(&text)
                .map_err(|e| Error::Config(format!("{path}: {e}")))?
        }
        None => PenaltyConfig::default(),
    };
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if let Some(beta) = args.beta {
        cfg.beta = beta;
    }
    if let Some(l_max) = args.lmax {
        cfg.l_max = l_max;
    }
    if let Some(basis) = args.length_basis {
        cfg.length_basis = match basis {
            BasisArg::Total => LengthBasis::Total,
            BasisArg::Thinking => LengthBasis::ThinkingOnly,
        };
    }
    cfg.validate()?;
    let records = score_traces(&set, &cfg, resolve_level(args.level))?;
    let stdout = std::io::stdout().lock();
    match args.format {
        FormatArg::Json => {
            serde_json::to_writer_pretty(stdout, &records)
                .map_err(|e| Error::Validation(format!("json write: {e}")))?;
            println!();
        }
        FormatArg::Csv => {
            let mut writer = csv::Writer::from_writer(stdout);
            for record in &records {
                writer
                    .serialize(record)
                    .map_err(|e| Error::Validation(format!("csv write: {e}")))?;
            }
            writer
                .flush()
                .map_err(|e| Error::Validation(format!("csv flush: {e}")))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RepeatReport {
    min_block_tokens: usize,
    k: usize,
    /// Absent when the set has no wrong answers.
    rate: Option<f64>,
    note: Option<String>,
    flagged: Vec<String>,
}

#[derive(Serialize)]
struct RatioReport {
    mean_ratio: f64,
    zero_solution_traces: u64,
}

#[derive(Serialize)]
struct StepReport {
    total: u64,
    mean_per_trace: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    n_traces: usize,
    length: LengthStats,
    repeat: RepeatReport,
    think_solution: RatioReport,
    steps: StepReport,
}

#[derive(Serialize)]
struct TraceRow<'a> {
    id: &'a str,
    total_len: u64,
    thinking_len: u64,
    solution_len: u64,
    correct: bool,
    truncated: bool,
    repetitive: bool,
    steps: u64,
    think_solution_ratio: f64,
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let set = load_traces(&args.traces, &args.schema_version)?;
    let length = length_stats_binned(&set, args.bin_width)?;
    let verdicts = repeat_verdicts(&set, args.repeat_min, args.repeat_k);
    let (rate, note) = match repeat_rate(&set, args.repeat_min, args.repeat_k) {
        Ok(rate) => (Some(rate), None),
        Err(Error::UndefinedRate(message)) => (None, Some(message)),
        Err(other) => return Err(other),
    };
    let flagged: Vec<String> = verdicts
        .iter()
        .filter(|v| v.repetitive)
        .map(|v| v.trace_id.clone())
        .collect();

    let n = set.len() as f64;
    let ratios: Vec<_> = set.traces.iter().map(think_solution_ratio).collect();
    let mean_ratio = ratios.iter().map(|r| r.ratio).sum::<f64>() / n;
    let zero_solution_traces = ratios.iter().filter(|r| r.zero_solution).count() as u64;

    let step_counts: Vec<u64> = set
        .traces
        .iter()
        .map(|t| count_steps(&t.thinking_text) + count_steps(&t.solution_text))
        .collect();
    let total_steps: u64 = step_counts.iter().sum();

    let report = AnalyzeReport {
        n_traces: set.len(),
        length,
        repeat: RepeatReport {
            min_block_tokens: args.repeat_min,
            k: args.repeat_k,
            rate,
            note,
            flagged,
        },
        think_solution: RatioReport {
            mean_ratio,
            zero_solution_traces,
        },
        steps: StepReport {
            total: total_steps,
            mean_per_trace: total_steps as f64 / n,
        },
    };
    let stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(stdout, &report)
        .map_err(|e| Error::Validation(format!("json write: {e}")))?;
    println!();

    if let Some(path) = args.csv {
        let file = File::create(path)?;
        let mut writer = csv::Writer::from_writer(file);
        for ((trace, verdict), steps) in set.traces.iter().zip(&verdicts).zip(&step_counts) {
            let row = TraceRow {
                id: &trace.id,
                total_len: trace.total_len,
                thinking_len: trace.thinking_len,
                solution_len: trace.solution_len,
                correct: trace.correct,
                truncated: trace.truncated,
                repetitive: verdict.repetitive,
                steps: *steps,
                think_solution_ratio: think_solution_ratio(trace).ratio,
            };
            writer
                .serialize(row)
                .map_err(|e| Error::Validation(format!("csv write: {e}")))?;
        }
        writer
            .flush()
            .map_err(|e| Error::Validation(format!("csv flush: {e}")))?;
    }
    Ok(())
}

fn pareto(args: ParetoArgs) -> Result<()> {
    let file = File::open(&args.points)?;
    let points = read_pareto_csv(file)?;
    if points.is_empty() {
        return Err(Error::Validation("points file contains no rows".into()));
    }
    let front = pareto_front(&points);
    let out = open_output(&args.out)?;
    write_pareto_csv(&front, out)
}

fn fixtures_list() -> Result<()> {
    for fixture in fixtures::all() {
        println!(
            "{}\t{} points\t{}",
            fixture.name,
            fixture.points.len(),
            fixture.description
        );
    }
    Ok(())
}

fn fixtures_dump(name: &str) -> Result<()> {
    match fixtures::by_name(name) {
        Some(fixture) => {
            print!("{}", fixture.to_csv());
            Ok(())
        }
        None => Err(Error::Validation(format!(
            "unknown fixture `{name}`; available: {}",
            fixtures::names().join(", ")
        ))),
    }
}

/// Convenience for tests: run with string args.
pub fn run_args(args: &[&str]) -> i32 {
    run(args.iter().map(|s| s.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_spec_parsing() {
        let spec = parse_loop("10:30:180").unwrap();
        assert_eq!((spec.start, spec.block_len, spec.cycles), (10, 30, Some(180)));
        let spec = parse_loop("0:8:inf").unwrap();
        assert_eq!(spec.cycles, None);
        assert!(parse_loop("1:2").is_err());
        assert!(parse_loop("a:2:3").is_err());
        assert!(parse_loop("1:0:3").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["lenctl", "simulate"]), 2); // missing --policy
        assert_eq!(run_args(&["lenctl", "nope"]), 2);
        // bf without --budget is a usage error, caught before any work
        assert_eq!(run_args(&["lenctl", "simulate", "--policy", "bf"]), 2);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run_args(&["lenctl", "--help"]), 0);
        assert_eq!(run_args(&["lenctl", "simulate", "--help"]), 0);
    }

    #[test]
    fn data_errors_exit_1() {
        assert_eq!(run_args(&["lenctl", "analyze", "/nonexistent/file.jsonl"]), 1);
        assert_eq!(run_args(&["lenctl", "fixtures", "dump", "nope"]), 1);
    }
}
