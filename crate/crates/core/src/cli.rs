//! The `papr-pts` command line.
//!
//! Exit codes: 0 success, 1 oracle check failed, 2 usage error, 3 I/O error,
//! 4 optimizer refusal (exhaustive cap or too few samples for the target).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::harness::{
    run_ccdf, run_compare, run_convergence, CcdfCurve, CompareRow, ConvergenceStat,
    ExperimentConfig, OracleReport,
};
use crate::optimizers::{AbcConfig, GdConfig, MoveRule, OptimizerConfig, DEFAULT_EXHAUSTIVE_CAP};
use crate::pts::PartitionScheme;
use crate::signal::Modulation;

pub const FORMAT_LINE: &str = "# papr-pts v1";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_REFUSED: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "papr-pts", version, about = "PTS phase-factor search for OFDM PAPR reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CCDF of the best PAPR per symbol.
    Ccdf(Flags),
    /// Mean best PAPR per iteration over repeated runs on one symbol.
    Convergence(Flags),
    /// PAPR at a target CCDF level and evaluations per symbol, per optimizer.
    Compare(Flags),
    /// Exhaustive search and heuristics against a direct-summation brute force.
    OracleCheck(Flags),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModArg {
    Qpsk,
    #[value(name = "16qam")]
    Qam16,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    Random,
    Adjacent,
    Interleaved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MoveArg {
    Single,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OptimizerId {
    None,
    Abc,
    Ipts,
    Rs,
    Gd,
    Opts,
}

impl OptimizerId {
    fn name(self) -> &'static str {
        match self {
            OptimizerId::None => "none",
            OptimizerId::Abc => "abc",
            OptimizerId::Ipts => "ipts",
            OptimizerId::Rs => "rs",
            OptimizerId::Gd => "gd",
            OptimizerId::Opts => "opts",
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// Subcarriers.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Constellation.
    #[arg(long = "mod", value_enum, default_value_t = ModArg::Qam16)]
    modulation: ModArg,
    /// Oversampling factor.
    #[arg(long, default_value_t = 4)]
    l: usize,
    /// Sub-blocks.
    #[arg(long, default_value_t = 16)]
    m: usize,
    /// Allowed phase factors.
    #[arg(long, default_value_t = 2)]
    w: usize,
    #[arg(long, value_enum, default_value_t = PartitionArg::Random)]
    partition: PartitionArg,
    /// Draw a fresh partition per symbol.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    per_symbol_partition: bool,
    /// Optimizer; a comma-separated list for `compare`. Defaults: ccdf none,
    /// convergence abc, compare none,ipts,rs,gd,abc, oracle-check (ignored).
    #[arg(long, value_enum, value_delimiter = ',')]
    optimizer: Vec<OptimizerId>,
    /// ABC food sources.
    #[arg(long, default_value_t = 30)]
    s: usize,
    /// ABC abandonment limit.
    #[arg(long, default_value_t = 5)]
    limit: usize,
    /// ABC iterations.
    #[arg(long, default_value_t = 30)]
    k: usize,
    /// ABC neighbour move: one free coordinate, or all of them.
    #[arg(long, value_enum, default_value_t = MoveArg::All)]
    abc_move: MoveArg,
    /// Random-search trials.
    #[arg(long, default_value_t = 900)]
    trials: usize,
    /// Gradient-descent neighbourhood radius.
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Gradient-descent iterations.
    #[arg(long, default_value_t = 3)]
    iters: usize,
    /// Exhaustive-search cap on W^(M-1).
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: u64,
    /// OFDM symbols.
    #[arg(long, default_value_t = 100_000)]
    symbols: usize,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fix the first phase factor to 1.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    fix_first: bool,
    /// CCDF level for `compare` and the `ccdf` summary.
    #[arg(long, default_value_t = 1e-3)]
    target_ccdf: f64,
    /// Runs for `convergence`.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Seeds 0..SEEDS for `oracle-check`.
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Does not affect results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Ccdf,
    Convergence,
    Compare,
    OracleCheck,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Ccdf => "ccdf",
            Action::Convergence => "convergence",
            Action::Compare => "compare",
            Action::OracleCheck => "oracle-check",
        }
    }
}

/// A parsed and validated command line.
#[derive(Clone, Debug, PartialEq)]
pub struct CliInvocation {
    pub action: Action,
    /// One config per optimizer (several only for `compare`).
    pub configs: Vec<ExperimentConfig>,
    pub target_ccdf: f64,
    pub runs: usize,
    pub seeds: u64,
    pub out: Option<PathBuf>,
    pub workers: usize,
    /// Every result-affecting flag, in a fixed order; parses back to the
    /// same run.
    pub canonical: String,
}

/// Usage failure, carrying clap's rendered message.
#[derive(Debug)]
pub struct UsageError {
    pub message: String,
    /// `--help` / `--version`: print and exit 0.
    pub informational: bool,
}

fn usage(message: impl Into<String>) -> UsageError {
    UsageError {
        message: format!("error: {}\n\nFor more information, try '--help'.", message.into()),
        informational: false,
    }
}

fn optimizer_config(id: OptimizerId, f: &Flags) -> OptimizerConfig {
    match id {
        OptimizerId::None => OptimizerConfig::None,
        OptimizerId::Abc => OptimizerConfig::Abc(AbcConfig {
            population: f.s,
            limit: f.limit,
            max_iterations: f.k,
            fixed_first: f.fix_first,
            moves: match f.abc_move {
                MoveArg::Single => MoveRule::Single,
                MoveArg::All => MoveRule::All,
            },
        }),
        OptimizerId::Ipts => OptimizerConfig::Ipts {
            fixed_first: f.fix_first,
        },
        OptimizerId::Rs => OptimizerConfig::RandomSearch {
            trials: f.trials,
            fixed_first: f.fix_first,
        },
        OptimizerId::Gd => OptimizerConfig::Gd(GdConfig {
            radius: f.r,
            iterations: f.iters,
            fixed_first: f.fix_first,
        }),
        OptimizerId::Opts => OptimizerConfig::Exhaustive { cap: f.cap },
    }
}

fn canonical(action: Action, f: &Flags, optimizers: &[OptimizerId]) -> String {
    let ids: Vec<&str> = optimizers.iter().map(|o| o.name()).collect();
    let modulation = match f.modulation {
        ModArg::Qpsk => "qpsk",
        ModArg::Qam16 => "16qam",
    };
    let partition = match f.partition {
        PartitionArg::Random => "random",
        PartitionArg::Adjacent => "adjacent",
        PartitionArg::Interleaved => "interleaved",
    };
    let mut s = String::new();
    write!(
        s,
        "{} --n {} --mod {} --l {} --m {} --w {} --partition {} --per-symbol-partition {} \
         --optimizer {} --s {} --limit {} --k {} --abc-move {} --trials {} --r {} --iters {} --cap {} \
         --symbols {} --seed {} --fix-first {} --target-ccdf {} --runs {} --seeds {}",
        action.name(),
        f.n,
        modulation,
        f.l,
        f.m,
        f.w,
        partition,
        f.per_symbol_partition,
        ids.join(","),
        f.s,
        f.limit,
        f.k,
        match f.abc_move {
            MoveArg::Single => "single",
            MoveArg::All => "all",
        },
        f.trials,
        f.r,
        f.iters,
        f.cap,
        f.symbols,
        f.seed,
        f.fix_first,
        f.target_ccdf,
        f.runs,
        f.seeds
    )
    .expect("writing to a String");
    s
}

/// Parses `argv` (including the program name) into a validated invocation.
pub fn parse_args<I, T>(argv: I) -> Result<CliInvocation, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        informational: !e.use_stderr(),
        message: e.render().to_string(),
    })?;
    let (action, flags) = match cli.command {
        Command::Ccdf(f) => (Action::Ccdf, f),
        Command::Convergence(f) => (Action::Convergence, f),
        Command::Compare(f) => (Action::Compare, f),
        Command::OracleCheck(f) => (Action::OracleCheck, f),
    };
    let mut optimizers = flags.optimizer.clone();
    if optimizers.is_empty() {
        optimizers = match action {
            Action::Ccdf | Action::OracleCheck => vec![OptimizerId::None],
            Action::Convergence => vec![OptimizerId::Abc],
            Action::Compare => vec![
                OptimizerId::None,
                OptimizerId::Ipts,
                OptimizerId::Rs,
                OptimizerId::Gd,
                OptimizerId::Abc,
            ],
        };
    }
    if action != Action::Compare && optimizers.len() > 1 {
        return Err(usage(format!("`{}` takes a single --optimizer", action.name())));
    }
    if !(flags.target_ccdf > 0.0 && flags.target_ccdf < 1.0) {
        return Err(usage(format!("--target-ccdf {} must lie in (0, 1)", flags.target_ccdf)));
    }
    if action == Action::Convergence && flags.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    if action == Action::OracleCheck && flags.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }

    let configs: Vec<ExperimentConfig> = optimizers
        .iter()
        .map(|&id| ExperimentConfig {
            n: flags.n,
            m: flags.m,
            oversampling: flags.l,
            w: flags.w,
            modulation: match flags.modulation {
                ModArg::Qpsk => Modulation::Qpsk,
                ModArg::Qam16 => Modulation::Qam16,
            },
            partition: match flags.partition {
                PartitionArg::Random => PartitionScheme::Random,
                PartitionArg::Adjacent => PartitionScheme::Adjacent,
                PartitionArg::Interleaved => PartitionScheme::Interleaved,
            },
            per_symbol_partition: flags.per_symbol_partition,
            optimizer: optimizer_config(id, &flags),
            symbols: flags.symbols,
            master_seed: flags.seed,
            ..ExperimentConfig::default()
        })
        .collect();
    for config in &configs {
        config.validate().map_err(|e| usage(e.to_string()))?;
    }
    if action == Action::Convergence && !configs[0].optimizer.has_trajectory() {
        return Err(usage("convergence needs --optimizer abc or gd"));
    }

    Ok(CliInvocation {
        action,
        canonical: canonical(action, &flags, &optimizers),
        configs,
        target_ccdf: flags.target_ccdf,
        runs: flags.runs,
        seeds: flags.seeds,
        out: flags.out,
        workers: flags.workers,
    })
}

fn header(canonical: &str, columns: &str) -> String {
    format!("{FORMAT_LINE}\n# config: {canonical}\n{columns}\n")
}

pub fn ccdf_csv(curve: &CcdfCurve, canonical: &str) -> String {
    let mut s = header(canonical, "threshold_db,ccdf");
    for (t, p) in curve.thresholds_db.iter().zip(&curve.probabilities) {
        writeln!(s, "{t:.6},{p:.6}").expect("writing to a String");
    }
    s
}

pub fn compare_csv(rows: &[CompareRow], canonical: &str) -> String {
    let mut s = header(canonical, "optimizer,evaluations,papr_db");
    for row in rows {
        writeln!(s, "{},{:.6},{:.6}", row.optimizer, row.evaluations, row.papr_db)
            .expect("writing to a String");
    }
    s
}

pub fn convergence_csv(stat: &ConvergenceStat, canonical: &str) -> String {
    let mut s = header(canonical, "iteration,mean_best_papr_db");
    for (i, v) in stat.mean_best_db.iter().enumerate() {
        writeln!(s, "{},{v:.6}", i + 1).expect("writing to a String");
    }
    s
}

pub fn oracle_csv(report: &OracleReport, canonical: &str) -> String {
    let mut s = header(canonical, "seed,optimum_db,exhaustive_db,pass");
    for e in &report.entries {
        writeln!(s, "{},{:.6},{:.6},{}", e.seed, e.optimum_db, e.exhaustive_db, e.pass)
            .expect("writing to a String");
    }
    s
}

/// Writes `content` to `path`, or stdout when `path` is `None`.
pub fn emit_csv(content: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SearchCapExceeded { .. } | Error::InsufficientSamples { .. } => EXIT_REFUSED,
        Error::InvalidInput(_) | Error::InvalidConfig(_) => EXIT_USAGE,
        Error::DegenerateSignal => EXIT_CHECK_FAILED,
    }
}

/// Runs a parsed invocation, returning the CSV text and a one-line summary.
pub fn execute(inv: &CliInvocation) -> Result<(String, String, bool), Error> {
    let config = &inv.configs[0];
    match inv.action {
        Action::Ccdf => {
            let curve = run_ccdf(config)?;
            let summary = match curve.crossing_db(inv.target_ccdf) {
                Ok(db) => format!(
                    "ccdf: {} symbols, optimizer {}, PAPR at CCDF {} = {db:.3} dB",
                    curve.sample_count, config.optimizer, inv.target_ccdf
                ),
                Err(e) => format!("ccdf: {} symbols, optimizer {} ({e})", curve.sample_count, config.optimizer),
            };
            Ok((ccdf_csv(&curve, &inv.canonical), summary, true))
        }
        Action::Convergence => {
            let stat = run_convergence(config, inv.runs)?;
            let last = stat.mean_best_db.last().copied().unwrap_or(f64::NAN);
            let summary = format!(
                "convergence: {} runs, optimizer {}, final mean best {last:.3} dB",
                stat.run_count, config.optimizer
            );
            Ok((convergence_csv(&stat, &inv.canonical), summary, true))
        }
        Action::Compare => {
            let rows = run_compare(&inv.configs, inv.target_ccdf)?;
            let mut summary = format!("compare at CCDF {}:", inv.target_ccdf);
            for r in &rows {
                write!(summary, "\n  {:<5} {:>10.1} evals/symbol  {:.3} dB", r.optimizer, r.evaluations, r.papr_db)
                    .expect("writing to a String");
            }
            Ok((compare_csv(&rows, &inv.canonical), summary, true))
        }
        Action::OracleCheck => {
            let report = crate::harness::oracle_check(config.n, config.m, config.w, 0..inv.seeds)?;
            let mut summary = format!(
                "oracle-check N={} M={} W={}: {}/{} pass",
                report.n,
                report.m,
                report.w,
                report.passed(),
                report.entries.len()
            );
            for e in report.entries.iter().filter(|e| !e.pass) {
                write!(summary, "\n  seed {}: {}", e.seed, e.detail).expect("writing to a String");
            }
            Ok((oracle_csv(&report, &inv.canonical), summary, report.all_passed()))
        }
    }
}

/// Entry point shared by the binary and tests.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    ExitCode::from(run_code(argv))
}

pub fn run_code<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match parse_args(argv) {
        Ok(inv) => inv,
        Err(e) if e.informational => {
            print!("{}", e.message);
            return EXIT_OK;
        }
        Err(e) => {
            eprintln!("{}", e.message);
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(inv.workers).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_IO;
        }
    };
    let (csv, summary, ok) = match pool.install(|| execute(&inv)) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    if let Err(e) = emit_csv(&csv, inv.out.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_IO;
    }
    eprintln!("{summary}");
    if ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
