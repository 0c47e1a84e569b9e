use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fdcmss::bench::{
    run_experiment, sizing_table, write_rows, write_sizing, Algorithm, DecayChoice, ExperimentConfig, SizingAxis,
    StreamSource, SweepVar,
};
use fdcmss::stream::{write_items, zipf_stream, ZipfSpec};
use fdcmss::{dataset_stats, read_items, Error, Sketch};

#[derive(Parser, Debug)]
#[command(name = "fdcmss", version, about = "Frequent items over time-faded streams: sketches, oracle and benchmarks")]
struct Cli {
    /// Master seed for stream generation and hashing.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Maximum number of runs executed in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded Zipf stream, one item per line.
    Gen {
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 1.1)]
        rho: f64,
        #[arg(long, default_value_t = 1_048_575)]
        universe: u32,
    },
    /// Print count, distinct, min, max, mean, median, stddev and skewness.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run an experiment and emit one CSV row per run.
    Run(RunArgs),
    /// Theoretical sketch sizes of both algorithms as CSV.
    Sizing {
        #[arg(long, default_value_t = 0.99)]
        lambda: f64,
        /// Number of distinct items M.
        #[arg(long, default_value_t = 1_048_575)]
        distinct: u64,
        #[arg(long, default_value_t = 0.96)]
        prob: f64,
        #[arg(long, default_value_t = 0.001)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Axis::Epsilon)]
        vary: Axis,
        #[arg(long, default_value_t = 0.001)]
        from: f64,
        #[arg(long, default_value_t = 0.01)]
        to: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Query a serialized sketch for its frequent items.
    Query {
        #[arg(long)]
        snapshot: PathBuf,
        /// Query time.
        #[arg(long)]
        t: f64,
        /// Overrides the support threshold stored in the snapshot.
        #[arg(long)]
        phi: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Algo::Fdcmss)]
    algo: Algo,
    /// Also run the given baseline on the same streams.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Replay items from a file instead of generating Zipf streams.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 1.1)]
    rho: f64,
    #[arg(long, default_value_t = 1_048_575)]
    universe: u32,
    #[arg(long, default_value_t = 0.01)]
    phi: f64,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.04)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Decay::Exp)]
    decay: Decay,
    #[arg(long, default_value_t = 0.99)]
    lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    landmark: f64,
    /// λ-HCount support threshold (defaults to phi).
    #[arg(long)]
    support: Option<f64>,
    /// λ-HCount success probability (defaults to 1 - delta).
    #[arg(long)]
    prob: Option<f64>,
    /// Byte budget shared by both sketches, in KiB.
    #[arg(long)]
    sketch_kb: Option<f64>,
    #[arg(long, value_enum)]
    sweep: Option<Sweep>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    values: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Write 0 for updates/ms so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Directory receiving one FDCMSS snapshot per run.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Algo {
    Fdcmss,
    Lhcount,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Baseline {
    Lhcount,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Decay {
    Exp,
    Poly,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Sweep {
    N,
    Phi,
    Rho,
    SketchKb,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Axis {
    Epsilon,
    Prob,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn experiment_config(cli: &Cli, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let algorithm = match (args.algo, args.baseline) {
        (Algo::Fdcmss, Some(Baseline::Lhcount)) | (Algo::Both, _) => Algorithm::Both,
        (Algo::Fdcmss, None) => Algorithm::Fdcmss,
        (Algo::Lhcount, _) => Algorithm::LambdaHCount,
    };
    let source = match &args.input {
        Some(path) => StreamSource::Items(Arc::new(read_items(path)?)),
        None => StreamSource::Zipf { universe: args.universe },
    };
    let n = match (&source, &args.input) {
        (StreamSource::Items(items), Some(_)) => items.len(),
        _ => args.n,
    };
    let sweep = args.sweep.map(|s| {
        let var = match s {
            Sweep::N => SweepVar::N,
            Sweep::Phi => SweepVar::Phi,
            Sweep::Rho => SweepVar::Rho,
            Sweep::SketchKb => SweepVar::SketchKb,
        };
        (var, args.values.clone())
    });
    Ok(ExperimentConfig {
        algorithm,
        source,
        sweep,
        runs: args.runs,
        n,
        rho: args.rho,
        phi: args.phi,
        epsilon: args.epsilon,
        delta: args.delta,
        lambda: args.lambda,
        decay: match args.decay {
            Decay::Exp => DecayChoice::Exponential,
            Decay::Poly => DecayChoice::Polynomial { beta: args.beta },
        },
        landmark: args.landmark,
        support: args.support,
        prob: args.prob,
        sketch_kb: args.sketch_kb,
        seed: cli.seed,
        jobs: cli.jobs,
        timing: !args.no_timing,
        snapshot_dir: args.snapshot_dir.clone(),
    })
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Gen { n, rho, universe } => {
            let items = zipf_stream(&ZipfSpec { n: *n, rho: *rho, universe: *universe, seed: cli.seed })?;
            write_items(output(&cli.out)?, &items)
        }
        Command::Stats { input } => {
            let s = dataset_stats(&read_items(input)?)?;
            let mut out = output(&cli.out)?;
            writeln!(out, "count\t{}", s.count)?;
            writeln!(out, "distinct\t{}", s.distinct)?;
            writeln!(out, "min\t{}", s.min)?;
            writeln!(out, "max\t{}", s.max)?;
            writeln!(out, "mean\t{:.1}", s.mean)?;
            writeln!(out, "median\t{}", s.median)?;
            writeln!(out, "stddev\t{:.1}", s.stddev)?;
            writeln!(out, "skewness\t{:.1}", s.skewness)?;
            Ok(())
        }
        Command::Run(args) => {
            let config = experiment_config(cli, args)?;
            if let Some(dir) = &config.snapshot_dir {
                std::fs::create_dir_all(dir)?;
            }
            let rows = run_experiment(&config)?;
            write_rows(output(&cli.out)?, &rows)
        }
        Command::Sizing { lambda, distinct, prob, epsilon, vary, from, to, steps } => {
            let axis = match vary {
                Axis::Epsilon => SizingAxis::Epsilon,
                Axis::Prob => SizingAxis::Prob,
            };
            let rows = sizing_table(*lambda, *distinct, *prob, *epsilon, axis, (*from, *to), *steps)?;
            write_sizing(output(&cli.out)?, &rows)
        }
        Command::Query { snapshot, t, phi } => {
            let mut sketch = Sketch::read_from(File::open(snapshot)?)?;
            if let Some(phi) = phi {
                sketch = sketch.with_phi(*phi)?;
            }
            let mut out = output(&cli.out)?;
            for f in sketch.query(*t)? {
                writeln!(out, "{}\t{}", f.item, f.estimate)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
