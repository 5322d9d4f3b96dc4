use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use gdreg_cli::commands;
use gdreg_cli::config::ExperimentConfig;
use gdreg_cli::verify;

/// Batch gradient descent experiments: path behavior, γ/T grids,
/// excess-risk bound reports and Rademacher estimates, all seeded and
/// byte-reproducible.
#[derive(Parser)]
#[command(name = "gdreg", version, about)]
struct Cli {
    /// TOML configuration file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Re-run with the exact resolved configuration of a previous run.
    #[arg(long, global = true, conflicts_with = "config")]
    from_manifest: Option<PathBuf>,

    /// Output directory (default: $GDREG_OUTPUT_DIR, then ./out).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Master seed; repetition seeds derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Full-scale experiment parameters (n = 10⁴, 100 repetitions,
    /// a dense stopping-time grid).
    #[arg(long, global = true)]
    paper_scale: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonOverrides {
    /// Loss kind: squared | logistic_regression | logistic_classification
    /// | exponential.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Mean distance of the iterates to the population minimizer over t.
    PathExperiment {
        #[command(flatten)]
        common: CommonOverrides,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Mean excess risk of the averaged iterate over a (γ, T) grid.
    GridExperiment {
        #[command(flatten)]
        common: CommonOverrides,
        /// Comma-separated step sizes.
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        /// Comma-separated stopping times.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<usize>>,
    },
    /// Run at the γT schedule and report bounds next to measurements.
    Bounds {
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Rademacher-complexity estimates with closed-form bounds.
    Rademacher {
        #[command(flatten)]
        common: CommonOverrides,
        /// Monte-Carlo sign draws for the scalar class.
        #[arg(long)]
        draws: Option<usize>,
        /// Monte-Carlo sign draws for the gradient-composite class.
        #[arg(long)]
        gradient_draws: Option<usize>,
    },
    /// Run the full property suite; nonzero exit on any failure.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::PathExperiment { .. } => "path-experiment",
            Command::GridExperiment { .. } => "grid-experiment",
            Command::Bounds { .. } => "bounds",
            Command::Rademacher { .. } => "rademacher",
            Command::Verify => "verify",
        }
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        let common = match self {
            Command::PathExperiment { common, .. }
            | Command::GridExperiment { common, .. }
            | Command::Bounds { common }
            | Command::Rademacher { common, .. } => common,
            Command::Verify => return,
        };
        if let Some(loss) = &common.loss {
            cfg.loss = loss.clone();
        }
        if let Some(n) = common.n_train {
            cfg.n_train = n;
        }
        if let Some(r) = common.repetitions {
            cfg.repetitions = r;
        }
        if let Some(d) = common.delta {
            cfg.delta = d;
        }
        match self {
            Command::PathExperiment { gamma, iterations, .. } => {
                if let Some(g) = gamma {
                    cfg.gamma = *g;
                }
                if let Some(t) = iterations {
                    cfg.iterations = *t;
                }
            }
            Command::GridExperiment { gammas, t_grid, .. } => {
                if let Some(g) = gammas {
                    cfg.gammas = g.clone();
                }
                if let Some(t) = t_grid {
                    cfg.t_grid = t.clone();
                }
            }
            Command::Rademacher { draws, gradient_draws, .. } => {
                if let Some(k) = draws {
                    cfg.rademacher_draws = *k;
                }
                if let Some(k) = gradient_draws {
                    cfg.rademacher_gradient_draws = *k;
                }
            }
            _ => {}
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = if let Some(manifest_path) = &cli.from_manifest {
        gdreg_cli::manifest::RunManifest::read(manifest_path)?.config
    } else if let Some(path) = &cli.config {
        ExperimentConfig::from_toml_file(path)?
    } else {
        ExperimentConfig::default()
    };
    if cli.paper_scale {
        cfg.apply_paper_scale();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cli.command.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cli: &Cli) -> PathBuf {
    cli.output_dir
        .clone()
        .or_else(|| std::env::var_os("GDREG_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Ignore the error if a pool already exists (repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }

    if matches!(cli.command, Command::Verify) {
        return if verify::run_all() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        };
    }

    let run = || -> Result<()> {
        let cfg = resolve_config(&cli)?;
        let out = output_dir(&cli);
        let manifest = commands::dispatch(cli.command.name(), &cfg, &out)?;
        println!(
            "{}: wrote {} file(s) to {}",
            manifest.command,
            manifest.files.len(),
            out.display()
        );
        Ok(())
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
