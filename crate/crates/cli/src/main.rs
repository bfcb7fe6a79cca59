//! `htpc`: experiment harness for site percolation on Hamming tori.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 runtime failure.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use htpc_core::branching::{
    progeny_trials, Engine, OffspringKind, OffspringLaw, Progeny, StartType, SurvivalEstimate,
};
use htpc_core::sweep::{self, parse_config, ConfigMap, SweepPlan};
use htpc_core::theory::{self, GiantPrediction};
use htpc_core::{c_log_to_p, json, lambda_to_p, sample, Clustering, Error, SiteConfig, TorusSpec};

#[derive(Parser)]
#[command(
    name = "htpc",
    version,
    about = "Site percolation on d-dimensional Hamming tori"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "HTPC_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the theoretical predictions for (a, λ) as JSON.
    Theory {
        /// Aspect ratios, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<f64>,
        /// λ in p = λ/n (defaults to the critical value).
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Sample one configuration and report its component census.
    Simulate(SimulateArgs),
    /// Run a replicated parameter sweep.
    Sweep(SweepArgs),
    /// Simulate the multitype branching process.
    Branching(BranchingArgs),
    /// Census of a stored occupancy dump.
    Census {
        /// Dump file written by `simulate --dump`.
        #[arg(long)]
        input: PathBuf,
        /// Write the (size, count) CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the summary JSON here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    a: Vec<f64>,
    #[arg(long)]
    n: u64,
    /// λ in p = λ/n.
    #[arg(long, conflicts_with = "c", required_unless_present = "c")]
    lambda: Option<f64>,
    /// c in p = c ln(n)/n.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Store the occupancy in the binary dump format.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Write the component-size histogram CSV.
    #[arg(long)]
    census_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key = value plan file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    a: Option<String>,
    /// One or more scales, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// `lambda` or `log`.
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    replicates: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-row component-size histograms.
    #[arg(long)]
    histograms: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawKind {
    Poisson,
    Binomial,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Walk,
    Generation,
}

#[derive(Args)]
struct BranchingArgs {
    #[arg(long, value_enum, default_value_t = LawKind::Poisson)]
    law: LawKind,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    a: Vec<f64>,
    /// Scale for the binomial law.
    #[arg(long, required_if_eq("law", "binomial"))]
    n: Option<u64>,
    /// 1-based start type, or `special` for an ancestor bearing every type.
    #[arg(long, default_value = "special")]
    start: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 100_000)]
    cap: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = EngineArg::Generation)]
    engine: EngineArg,
    /// Write per-trial progeny sizes as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) | Error::NoConvergence { .. } | Error::DeadWalk => {
                Failure::Runtime(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn emit<T: Serialize>(value: &T) -> CliResult<()> {
    let text = json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(io::stdout(), "{text}")?;
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &PathBuf) -> CliResult<()> {
    let text = json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn run_theory(a: &[f64], lambda: Option<f64>) -> CliResult<()> {
    let lambda = match lambda {
        Some(l) => l,
        None => theory::critical_lambda(a)?,
    };
    emit(&theory::theory_report(a, lambda)?)
}

#[derive(Serialize)]
struct SimulateReport {
    sides: Vec<usize>,
    n: u64,
    p: f64,
    lambda: f64,
    seed: u64,
    #[serde(flatten)]
    census: htpc_core::components::CensusSummary,
    largest_over_ln_n: f64,
    normalized_largest: f64,
    lambda_c: f64,
    giant: Option<GiantPrediction>,
    conn_threshold: f64,
    iso_giant_threshold: f64,
    isolated_or_giant: bool,
}

fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let spec = TorusSpec::new(args.a.len(), &args.a, args.n)?;
    let p = match (args.lambda, args.c) {
        (Some(l), _) => lambda_to_p(&spec, l)?,
        (None, Some(c)) => c_log_to_p(&spec, c)?,
        (None, None) => return Err(Failure::Config("one of --lambda or --c is required".into())),
    };
    let config = sample(&spec, p, args.seed)?;
    if let Some(path) = &args.dump {
        config.write_dump(io::BufWriter::new(fs::File::create(path)?))?;
    }
    let stats = Clustering::new(&config).stats();
    if let Some(path) = &args.census_csv {
        stats.write_histogram_csv(io::BufWriter::new(fs::File::create(path)?))?;
    }
    let lambda = p * args.n as f64;
    let thresholds = theory::connectivity_thresholds(&args.a)?;
    let lambda_c = theory::critical_lambda(&args.a)?;
    let giant = if lambda > lambda_c {
        Some(theory::giant_size_prediction(&spec, lambda)?)
    } else {
        None
    };
    emit(&SimulateReport {
        sides: spec.sides().to_vec(),
        n: args.n,
        p,
        lambda,
        seed: args.seed,
        census: stats.summary(),
        largest_over_ln_n: stats.largest as f64 / (args.n as f64).ln(),
        normalized_largest: stats.largest as f64 / theory::occupied_normalizer(&spec, lambda),
        lambda_c,
        giant,
        conn_threshold: thresholds.c_conn,
        iso_giant_threshold: thresholds.c_iso_giant,
        isolated_or_giant: stats.isolated_or_giant(),
    })
}

fn run_sweep(args: &SweepArgs, threads: usize) -> CliResult<()> {
    let mut map: ConfigMap = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => ConfigMap::new(),
    };
    let mut set = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            map.insert(key.to_string(), v);
        }
    };
    set("d", args.d.map(|d| d.to_string()));
    set("a", args.a.clone());
    set("n", args.n.clone());
    set("regime", args.regime.clone());
    set("values", args.values.clone());
    set("replicates", args.replicates.map(|r| r.to_string()));
    set("seed", args.seed.map(|s| s.to_string()));
    set("out", args.out.as_ref().map(|p| p.display().to_string()));
    if args.histograms {
        set("histograms", Some("true".into()));
    }
    let plan = SweepPlan::from_config(&map)?;
    let output = sweep::run_sweep(&plan, threads)?;
    match &plan.out {
        Some(dir) => {
            sweep::write_outputs(&plan, &output, dir)?;
            emit(&sweep::compare_report(&output.rows))
        }
        None => {
            sweep::write_rows_csv(&output.rows, io::stdout().lock())?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct BranchingReport {
    law: OffspringKind,
    lambda: f64,
    a: Vec<f64>,
    start: StartType,
    cap: u64,
    seed: u64,
    survival: SurvivalEstimate,
    mean_extinct_size: f64,
    theory_survival: f64,
}

fn parse_start(raw: &str) -> CliResult<StartType> {
    if raw.eq_ignore_ascii_case("special") {
        return Ok(StartType::Special);
    }
    match raw.parse::<usize>() {
        Ok(i) if i >= 1 => Ok(StartType::Type(i - 1)),
        _ => Err(Failure::Config(format!(
            "--start must be a 1-based type or 'special', got '{raw}'"
        ))),
    }
}

fn run_branching(args: &BranchingArgs) -> CliResult<()> {
    let kind = match args.law {
        LawKind::Poisson => OffspringKind::Poisson,
        LawKind::Binomial => OffspringKind::Binomial {
            n: args
                .n
                .ok_or_else(|| Failure::Config("--n is required for the binomial law".into()))?,
        },
    };
    if args.trials == 0 {
        return Err(Failure::Config("--trials must be at least 1".into()));
    }
    let start = parse_start(&args.start)?;
    let (vector, special) = start.resolve(args.a.len())?;
    let law = OffspringLaw::new(kind, args.lambda, &args.a, special)?;
    let engine = match args.engine {
        EngineArg::Walk => Engine::Walk,
        EngineArg::Generation => Engine::Generation,
    };
    let outcomes = progeny_trials(&law, &vector, args.trials, args.cap, args.seed, engine)?;

    if let Some(path) = &args.csv {
        let mut w = io::BufWriter::new(fs::File::create(path)?);
        writeln!(w, "trial,size,exceeded_cap")?;
        for (k, o) in outcomes.iter().enumerate() {
            writeln!(w, "{k},{},{}", o.size(), o.exceeded())?;
        }
        w.flush()?;
    }

    let survived = outcomes.iter().filter(|o| o.exceeded()).count() as u64;
    let extinct: Vec<u64> = outcomes
        .iter()
        .filter_map(|o| match o {
            Progeny::Extinct(n) => Some(*n),
            Progeny::Exceeded(_) => None,
        })
        .collect();
    let ext = if args.a.len() >= 2 {
        Some(theory::extinction(args.lambda, &args.a)?)
    } else {
        None
    };
    let theory_survival = match (ext, start) {
        (Some(e), StartType::Type(i)) => 1.0 - e.q_vec[i],
        (Some(e), StartType::Special) => e.giant_fraction(),
        (None, _) => f64::NAN,
    };
    emit(&BranchingReport {
        law: kind,
        lambda: args.lambda,
        a: args.a.clone(),
        start,
        cap: args.cap,
        seed: args.seed,
        survival: SurvivalEstimate::from_counts(survived, args.trials),
        mean_extinct_size: extinct.iter().sum::<u64>() as f64 / extinct.len().max(1) as f64,
        theory_survival,
    })
}

fn run_census(input: &PathBuf, csv: Option<&PathBuf>, json_out: Option<&PathBuf>) -> CliResult<()> {
    let file =
        fs::File::open(input).map_err(|e| Failure::Runtime(format!("{}: {e}", input.display())))?;
    let config = SiteConfig::read_dump(io::BufReader::new(file))?;
    let stats = Clustering::new(&config).stats();
    match csv {
        Some(path) => stats.write_histogram_csv(io::BufWriter::new(fs::File::create(path)?))?,
        None => stats.write_histogram_csv(io::stdout().lock())?,
    }
    match json_out {
        Some(path) => write_json(&stats.summary(), path),
        None => emit(&stats.summary()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.threads > 0 {
        // Only fails if a global pool already exists, in which case it is kept.
        let _ = rayon_global(cli.threads);
    }
    match &cli.command {
        Command::Theory { a, lambda } => run_theory(a, *lambda),
        Command::Simulate(args) => run_simulate(args),
        Command::Sweep(args) => run_sweep(args, cli.threads),
        Command::Branching(args) => run_branching(args),
        Command::Census { input, csv, json } => run_census(input, csv.as_ref(), json.as_ref()),
    }
}

fn rayon_global(threads: usize) -> Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("htpc: invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("htpc: {msg}");
            ExitCode::from(3)
        }
    }
}
