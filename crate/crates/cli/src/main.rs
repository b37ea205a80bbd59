//! Experiment runner. One subcommand per experiment; flags override config
//! file values, which override defaults.
//!
//! Exit codes: 0 all verdicts pass, 2 verdict failure, 3 config error,
//! 4 IO error.

mod artifacts;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{parse_config, Experiment, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(
    name = "itolab",
    version,
    about = "Run decomposition, smoothing and perturbation experiments with deterministic artifacts"
)]
struct Cli {
    /// Which experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,

    /// TOML config file; omitted fields fall back to defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (overrides the config file).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Ensemble size (overrides the config file).
    #[arg(long)]
    paths: Option<usize>,

    /// Grid steps (overrides the config file).
    #[arg(long)]
    steps: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(3);
        }
    };

    let mut cfg = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_config(&text) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(3);
                }
            },
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return ExitCode::from(4);
            }
        },
        None => ExperimentConfig::default(),
    };

    // flags > file > defaults
    cfg.experiment = Some(cli.experiment);
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = Some(out);
    }
    if let Some(paths) = cli.paths {
        cfg.n_paths = paths;
    }
    if let Some(steps) = cli.steps {
        cfg.n_steps = steps;
    }

    match run::run(cli.experiment, &cfg) {
        Ok(manifest) => {
            for v in &manifest.verdicts {
                let tag = if v.pass { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", v.name, v.details);
            }
            println!(
                "{}: {} in {:.1}s -> {}",
                manifest.experiment,
                if manifest.pass { "all verdicts pass" } else { "verdict failure" },
                manifest.wall_time_secs,
                cfg.effective_out_dir(cli.experiment).display()
            );
            if manifest.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(u8::try_from(e.exit_code()).expect("small codes"))
        }
    }
}
