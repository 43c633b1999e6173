use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sigmabench_core::bench::{prepare_data, run_benchmark, OutputFormat, RunConfig};
use sigmabench_core::data::{synth_dataset, to_csv};
use sigmabench_core::gradcheck::{self, REL_TOLERANCE};
use sigmabench_core::sigma_search::{compare_with_ssga, sweep, GridSpec};
use sigmabench_core::ssga::{default_folds, evolve_sigma_for, FitnessMetric, SigmaModel, SsgaConfig};
use sigmabench_core::{Error, SynthKind};

#[derive(Parser)]
#[command(
    name = "sigmabench",
    version,
    about = "Gaussian-width selection benchmarks for radial-basis classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Grnn,
    RbfSvm,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    F1,
    Accuracy,
}

impl From<MetricArg> for FitnessMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::F1 => FitnessMetric::F1,
            MetricArg::Accuracy => FitnessMetric::Accuracy,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Writes the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Trains and scores every model row of the config.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Cross-validated grid search for the best width per metric.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "grnn")]
        model: ModelArg,
        /// Box constraint for `--model rbf-svm`.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1e-2)]
        low: f64,
        #[arg(long, default_value_t = 10.0)]
        high: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Linear instead of logarithmic spacing.
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        folds: Option<usize>,
        /// Also runs the genetic search and prints a comparison table.
        #[arg(long)]
        compare_ssga: bool,
        #[arg(long, default_value_t = 200)]
        generations: usize,
        #[arg(long, default_value_t = 20)]
        population: usize,
    },
    /// Steady-state genetic search for the width.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "f1")]
        metric: MetricArg,
        #[arg(long, value_enum, default_value = "grnn")]
        model: ModelArg,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 200)]
        generations: usize,
        #[arg(long, default_value_t = 20)]
        population: usize,
    },
    /// Writes a synthetic dataset as CSV (target in the last column).
    Synth {
        #[arg(long, default_value = "two_gaussians")]
        kind: String,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compares analytic gradients with central finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", p.display()))),
    }
}

fn load_config(c: &Common) -> Result<RunConfig, Failure> {
    let cfg = RunConfig::from_file(&c.config).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(match c.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn sigma_model(m: ModelArg, c: f64) -> SigmaModel {
    match m {
        ModelArg::Grnn => SigmaModel::Grnn,
        ModelArg::RbfSvm => SigmaModel::RbfSvm { c },
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bench { common, format } => {
            let cfg = load_config(&common)?;
            let format = match format {
                Some(Format::Tsv) => OutputFormat::Tsv,
                Some(Format::Markdown) => OutputFormat::Markdown,
                None => cfg.format,
            };
            let out = run_benchmark(&cfg)?;
            emit(common.out.as_deref(), &out.table(format))?;
            if let Some(p) = &common.out {
                let mut m = p.clone().into_os_string();
                m.push(".manifest");
                emit(Some(Path::new(&m)), &out.manifest)?;
            }
        }
        Command::Sweep {
            common,
            model,
            c,
            low,
            high,
            points,
            linear,
            folds,
            compare_ssga,
            generations,
            population,
        } => {
            let cfg = load_config(&common)?;
            let (train, _) = prepare_data(&cfg)?;
            let grid = GridSpec {
                low,
                high,
                points,
                log_spaced: !linear,
            };
            let folds = match folds {
                Some(f) => f,
                None => default_folds(train.len())?,
            };
            let r = sweep(&train, sigma_model(model, c), &grid, folds, cfg.seed)?;
            print!("{}", r.summary());
            if common.out.is_some() {
                emit(common.out.as_deref(), &r.to_tsv())?;
            } else {
                print!("{}", r.to_tsv());
            }
            if compare_ssga {
                let ssga = SsgaConfig {
                    generations,
                    population_size: population,
                    seed: cfg.seed,
                    ..Default::default()
                };
                print!("{}", compare_with_ssga(&train, &ssga, &r)?);
            }
        }
        Command::Evolve {
            common,
            metric,
            model,
            c,
            generations,
            population,
        } => {
            let cfg = load_config(&common)?;
            let (train, _) = prepare_data(&cfg)?;
            let ssga = SsgaConfig {
                generations,
                population_size: population,
                seed: cfg.seed,
                ..Default::default()
            };
            let metric = FitnessMetric::from(metric);
            let r = evolve_sigma_for(&train, sigma_model(model, c), metric, &ssga)?;
            println!(
                "best_sigma = {:.6e}\nbest_{} = {:.4}",
                r.best_sigma,
                metric.name(),
                r.best_fitness
            );
            if common.out.is_some() {
                emit(common.out.as_deref(), &r.trace_tsv())?;
            }
        }
        Command::Synth { kind, n, seed, out } => {
            let kind: SynthKind = kind.parse()?;
            let d = synth_dataset(kind, n, seed).map_err(|e| Failure::Config(e.to_string()))?;
            emit(out.as_deref(), &to_csv(&d))?;
        }
        Command::Gradcheck { seeds, inject_fault } => {
            let reports = gradcheck::run_all(seeds, inject_fault);
            let mut ok = true;
            for r in &reports {
                println!(
                    "{}\t{}\tnetworks={}\tpartials={}\tmax_rel_error={:.3e}",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.networks,
                    r.partials,
                    r.max_rel_error
                );
                ok &= r.passed();
            }
            if !ok {
                return Err(Failure::Runtime(format!(
                    "gradient check exceeded relative error {REL_TOLERANCE:e}"
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
