use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use olo_core::harness::adversary::AdversarySpec;
use olo_core::harness::bench::{format_table, run_suite};
use olo_core::harness::check::{check_trace, ComparatorSet, Theorem};
use olo_core::harness::trace::{RunTrace, TraceFormat};
use olo_core::harness::{run, ExperimentConfig};
use olo_core::recipe::Recipe;
use olo_core::{NormSpec, OloError};

const EXIT_FAILURE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;

#[derive(Parser)]
#[command(name = "olo", about = "Parameter-free online linear optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a learner against an adversary and write the trace.
    Run(RunArgs),
    /// Check a trace against a regret or wealth guarantee.
    Check(CheckArgs),
    /// Run a benchmark suite and print a summary table.
    Bench {
        #[arg(long, default_value = "default")]
        suite: String,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Preset name or path to a recipe JSON file.
    #[arg(long)]
    algo: String,
    /// `name[:key=value;...]`, e.g. `drifting:step=0.1;noise=0.3`.
    #[arg(long, default_value = "rademacher")]
    adversary: String,
    /// `euclidean`, `l1` or `p:<p>`.
    #[arg(long, default_value = "euclidean")]
    space: String,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long = "T", default_value_t = 1000)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(clap::Args)]
struct CheckArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    theorem: String,
    #[arg(long, default_value = "grid")]
    comparators: String,
}

fn parse_space(text: &str, dim: usize) -> Result<NormSpec, OloError> {
    match text {
        "euclidean" | "l2" => NormSpec::euclidean(dim),
        "l1" => NormSpec::l1(dim),
        other => match other.strip_prefix("p:") {
            Some(p) => {
                let p: f64 = p
                    .parse()
                    .map_err(|_| OloError::Config(format!("cannot parse p-norm exponent '{p}'")))?;
                NormSpec::p_norm(p, dim)
            }
            None => Err(OloError::Config(format!("unknown space '{other}'"))),
        },
    }
}

fn load_recipe(algo: &str, space: &NormSpec, adversary: &AdversarySpec) -> Result<Recipe, OloError> {
    let path = Path::new(algo);
    if algo.ends_with(".json") || path.is_file() {
        Recipe::from_json(&fs::read_to_string(path)?)
    } else {
        Recipe::preset(algo, space, adversary.scales())
    }
}

enum Outcome {
    Ok,
    Violation,
}

fn cmd_run(args: RunArgs) -> Result<Outcome, OloError> {
    let space = parse_space(&args.space, args.dim)?;
    let adversary: AdversarySpec = args.adversary.parse()?;
    let format: TraceFormat = args.format.parse()?;
    let recipe = load_recipe(&args.algo, &space, &adversary)?;
    let config = ExperimentConfig::new(recipe, adversary, space, args.rounds, args.seed)
        .with_eps(args.eps)
        .with_lipschitz(args.lipschitz);
    let trace = run(config)?;
    match &args.out {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            trace.write(&mut out, format)?;
            out.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            trace.write(&mut out, format)?;
            out.flush()?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_check(args: CheckArgs) -> Result<Outcome, OloError> {
    let theorem: Theorem = args.theorem.parse()?;
    let comparators: ComparatorSet = args.comparators.parse()?;
    let trace = RunTrace::read_any(&fs::read_to_string(&args.trace)?)?;
    let report = check_trace(&trace, theorem, comparators)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    let failures = report.violations().count();
    if failures > 0 {
        eprintln!("{failures} of {} inequalities violated", report.checks.len());
        Ok(Outcome::Violation)
    } else {
        Ok(Outcome::Ok)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
        Command::Bench { suite } => run_suite(&suite).map(|rows| {
            print!("{}", format_table(&rows));
            Outcome::Ok
        }),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_precondition() {
                ExitCode::from(EXIT_PRECONDITION)
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}
