//! Command-line driver.
//!
//! ```text
//! fbl-gausac <mode> --config <path> [--out <path>] [--seed N] [--workers N]
//! ```
//!
//! Modes: `rates-mac`, `rates-rac`, `simulate-mac`, `simulate-rac`,
//! `verify`. Exit codes: 0 success, 1 configuration error or grid-point
//! failure, 2 verify suites failed, 3 I/O failure.

use clap::Parser;
use fbl_gausac::harness::{self, Mode};
use fbl_gausac::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "fbl-gausac",
    version,
    about = "Finite-blocklength rates and coding-scheme simulation for the Gaussian MAC"
)]
struct Cli {
    /// rates-mac | rates-rac | simulate-mac | simulate-rac | verify
    mode: String,

    /// TOML experiment configuration
    #[arg(long)]
    config: PathBuf,

    /// Result path: `.json` writes a JSON array, anything else CSV;
    /// stdout when neither this nor the config's `out` is set
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master seed, overriding the configured one
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: $FBL_GAUSAC_WORKERS, else all cores)
    #[arg(long)]
    workers: Option<usize>,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_IO: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match drive(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fbl-gausac: {e}");
            ExitCode::from(match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_CONFIG,
            })
        }
    }
}

fn drive(cli: Cli) -> Result<u8, Error> {
    let mode = Mode::from_str(&cli.mode)?;
    let text = std::fs::read_to_string(&cli.config)?;
    let mut cfg = harness::parse_config(&text)?;
    if cfg.mode != mode {
        return Err(Error::config(
            "mode",
            format!(
                "command line says {mode} but the configuration says {}",
                cfg.mode
            ),
        ));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.display().to_string());
    }
    let workers = cli
        .workers
        .or_else(|| {
            std::env::var("FBL_GAUSAC_WORKERS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(0);

    if mode == Mode::Verify {
        let report = harness::run_verify(cfg.seed, workers)?;
        emit(cfg.out.as_deref(), &report.render())?;
        return Ok(if report.all_passed() { 0 } else { EXIT_VERIFY });
    }

    let output = harness::run(&cfg, workers)?;
    let rendered = if cfg
        .out
        .as_deref()
        .is_some_and(|p| Path::new(p).extension().is_some_and(|e| e == "json"))
    {
        harness::render_json(&output.rows)?
    } else {
        harness::render_csv(&output.rows)?
    };
    emit(cfg.out.as_deref(), &rendered)?;
    for f in &output.failures {
        eprintln!("fbl-gausac: grid point {} failed: {}", f.point, f.message);
    }
    Ok(if output.failures.is_empty() {
        0
    } else {
        EXIT_CONFIG
    })
}

/// Write to the given path, or stdout when there is none.
fn emit(out: Option<&str>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
