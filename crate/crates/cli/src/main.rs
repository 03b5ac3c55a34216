use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use infodyn::harness::fieldfile::read_field;
use infodyn::harness::oracle::{format_table, run_oracle_suite};
use infodyn::harness::{run_with_workers, ExperimentConfig};
use infodyn::Error;

#[derive(Parser)]
#[command(
    name = "infodyn",
    version,
    about = "Ensemble information dynamics experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Resolve a config and run the static checks (including CFL) without running it.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the estimator and budget oracle suite and print a pass/fail table.
    Oracle {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Worker threads (results do not depend on it).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the header of a field file.
    Info { file: PathBuf },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    members: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
    /// Steps between diagnostic dumps.
    #[arg(long)]
    cadence: Option<usize>,
}

impl Overrides {
    fn apply(&self, path: &Path) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.members {
            cfg.members = Some(m);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(c) = self.cadence {
            cfg.cadence = Some(c);
        }
        cfg.resolve()
    }
}

fn workers(w: Option<usize>) -> usize {
    w.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn info(file: &Path) -> Result<(), Error> {
    let f = read_field(file)?;
    let h = &f.header;
    let finite: Vec<f64> = f.data.iter().copied().filter(|v| v.is_finite()).collect();
    let (lo, hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    println!("file: {}", file.display());
    println!("variable: {}", h.variable);
    println!("units: {}", h.units);
    println!("t_index: {}", h.t_index);
    println!("dims: {:?}", h.dims);
    println!("spacing: {:?}", h.spacing);
    println!("time: {}", h.time);
    println!("experiment: {}", h.experiment);
    println!("seed: {}", h.seed);
    println!(
        "values: {} ({} masked)",
        f.data.len(),
        f.data.len() - finite.len()
    );
    if !finite.is_empty() {
        println!("range: {lo} .. {hi}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, overrides } => overrides.apply(config).and_then(|cfg| {
            let report = run_with_workers(&cfg, workers(overrides.workers))?;
            println!(
                "{}: {} files written to {}",
                cfg.experiment.as_str(),
                report.manifest.entries.len(),
                report.out.display()
            );
            Ok(true)
        }),
        Command::Validate { config, overrides } => overrides.apply(config).map(|cfg| {
            print!("{}", cfg.to_toml());
            println!("# ok");
            true
        }),
        Command::Oracle { seed, workers: w } => rayon_pool(workers(*w)).and_then(|pool| {
            let checks = pool.install(|| run_oracle_suite(*seed))?;
            print!("{}", format_table(&checks));
            Ok(checks.iter().all(|c| c.pass))
        }),
        Command::Info { file } => info(file).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("infodyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn rayon_pool(n: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}
