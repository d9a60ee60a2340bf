//! Command line front end: resolve a config (file or preset), run the
//! experiment, write the result bundle.
//!
//! Exit codes: 0 success, 2 run failure (model build or experiment error),
//! 3 config error (bad flags, unreadable or invalid config).

mod config;
mod error;
mod experiments;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::exit;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::{CliResult, Failure};

#[derive(Parser)]
#[command(
    name = "qamem",
    version,
    about = "Config-driven experiments on quantum associative memories"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment from a TOML config file or a named preset
    Run {
        /// Path to a TOML config, or a preset name (see list-presets)
        config: String,
        /// Where to write results.json and CSV series
        /// [default: $QAMEM_OUTPUT_DIR or ./qamem-output]
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Replace the seed given in the config
        #[arg(long)]
        seed_override: Option<u64>,
        /// Worker thread cap, recorded in the result provenance
        /// (the numeric kernels are sequential)
        #[arg(long)]
        threads: Option<usize>,
        /// Override the experiment's convergence tolerance
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// List the built-in presets
    ListPresets,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                exit(0);
            }
            eprint!("{err}");
            exit(3);
        }
    };

    let outcome = match cli.cmd {
        Cmd::Run {
            config,
            output_dir,
            seed_override,
            threads,
            tolerance,
        } => cmd_run(&config, output_dir, seed_override, threads, tolerance),
        Cmd::ListPresets => {
            let width = presets::PRESETS
                .iter()
                .map(|p| p.name.len())
                .max()
                .unwrap_or(0);
            for p in presets::PRESETS {
                println!("{:width$}  {}", p.name, p.description);
            }
            Ok(0)
        }
    };

    match outcome {
        Ok(code) => exit(code),
        Err(f) => {
            eprintln!("{f}");
            exit(f.exit_code());
        }
    }
}

fn cmd_run(
    name: &str,
    output_dir: Option<PathBuf>,
    seed_override: Option<u64>,
    threads: Option<usize>,
    tolerance: Option<f64>,
) -> CliResult<i32> {
    let started = Instant::now();

    let text = match presets::find(name) {
        Some(p) => p.toml.to_string(),
        None => std::fs::read_to_string(name)
            .map_err(|e| Failure::Config(format!("cannot read config '{name}': {e}")))?,
    };
    let mut cfg = config::parse_config(&text)?;
    if let Some(seed) = seed_override {
        cfg.seed = Some(seed);
    }
    cfg.check()?;

    let over = experiments::Overrides { threads, tolerance };
    let outcome = experiments::run(&cfg, &over)?;

    let dir = output_dir
        .or_else(|| {
            cfg.output
                .as_ref()
                .and_then(|o| o.dir.as_deref())
                .map(PathBuf::from)
        })
        .or_else(|| std::env::var_os("QAMEM_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("qamem-output"));
    let written = outcome.bundle.write(&dir)?;

    for (key, value) in &outcome.bundle.metrics {
        println!("{key} = {value}");
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    eprintln!("elapsed: {} ms", started.elapsed().as_millis());

    match outcome.failure {
        Some(f) => {
            eprintln!("{f}");
            Ok(f.exit_code())
        }
        None => Ok(0),
    }
}
