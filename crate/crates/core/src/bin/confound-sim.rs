use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use confound_sim::config::{self, Overrides};
use confound_sim::engine::{build_world, run_experiment_with_threads, Regime, SimulationConfig};
use confound_sim::output::write_outputs;
use confound_sim::world::write_world_dump;
use confound_sim::{validation, ExperimentResult, GroundTruthWorld, Result};

const THREADS_VAR: &str = "CONFOUND_SIM_THREADS";

#[derive(Parser)]
#[command(
    name = "confound-sim",
    version,
    about = "Recommender feedback loop simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation and write metrics.csv, per_user.csv and manifest.txt.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the latent world of every seed to world_seed<N>.txt.
        #[arg(long)]
        dump_worlds: bool,
    },
    /// Check the numerical kernels against independent oracles.
    Validate {
        #[arg(long, default_value_t = 20_250_101)]
        seed: u64,
    },
    /// Print the resolved configuration.
    Describe {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training regime: single or repeated.
    #[arg(long)]
    regime: Option<Regime>,
    /// Comma separated algorithm names.
    #[arg(long)]
    algorithms: Option<String>,
    /// Comma separated seeds or inclusive ranges such as `1..=10`.
    #[arg(long)]
    seeds: Option<String>,
    /// Total iterations; start-up length is kept.
    #[arg(long)]
    horizon_override: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SimulationConfig> {
        let overrides = Overrides {
            regime: self.regime,
            algorithms: self
                .algorithms
                .as_deref()
                .map(config::parse_algorithms)
                .transpose()?,
            seeds: self.seeds.as_deref().map(config::parse_seeds).transpose()?,
            horizon: self.horizon_override,
        };
        config::load(self.config.as_deref(), &overrides)
    }
}

fn threads() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(confound_sim::Error::config(
                THREADS_VAR,
                format!("expected a positive integer, got `{v}`"),
            )),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn dump_worlds(cfg: &SimulationConfig, dir: &std::path::Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for &seed in &cfg.seeds {
        let world: GroundTruthWorld = build_world(cfg, seed)?;
        let path = dir.join(format!("world_seed{seed}.txt"));
        let mut out = BufWriter::new(fs::File::create(&path)?);
        write_world_dump(&world, &[format!("seed {seed}")], &mut out)?;
        paths.push(path);
    }
    Ok(paths)
}

fn simulate(args: &ConfigArgs, out: &PathBuf, dump: bool) -> Result<()> {
    let cfg = args.resolve()?;
    let threads = threads()?;
    let start = Instant::now();
    let result: ExperimentResult = run_experiment_with_threads(&cfg, threads)?;
    fs::create_dir_all(out)?;
    let extra = if dump {
        dump_worlds(&cfg, out)?
    } else {
        Vec::new()
    };
    let manifest = write_outputs(&result, out, extra, start.elapsed(), threads)?;
    for path in &manifest.outputs {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate {
            config,
            out,
            dump_worlds,
        } => simulate(config, out, *dump_worlds),
        Command::Describe { config } => config
            .resolve()
            .map(|cfg| print!("{}", config::describe(&cfg))),
        Command::Validate { seed } => {
            let results = validation::run_all(*seed);
            for r in &results {
                println!("{r}");
            }
            if results.iter().all(|r| r.passed) {
                Ok(())
            } else {
                return ExitCode::FAILURE;
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
