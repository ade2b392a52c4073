//! `kahan`: discretize polynomial ODEs, iterate the maps and write reports.
//!
//! Exit codes: 0 on success (a singular orbit still counts), 2 for a bad
//! configuration, 3 for a numeric or I/O failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kahan_cli::config::{parse_config_with, ConfigError, Preset, RunConfig};
use kahan_cli::run::{self, Artifacts, CliError};

#[derive(Parser)]
#[command(name = "kahan", version, about = "Higher-order Kahan-type discretizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in system: lv, quartic, weierstrass, beam-sym, beam-lag.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Directory for the written files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Print the scheme and the solved map.
    Discretize,
    /// Iterate the map and write the orbit as CSV and SVG.
    Orbit,
    /// Search for Darboux polynomials of the bound map.
    Darboux,
    /// Measure, symplecticity and fixed-point checks for the beam maps.
    AnalyzeBeam,
    /// Everything that applies, in one deterministic report.
    Report,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let preset = match &cli.preset {
        Some(name) => Some(
            Preset::from_name(name)
                .ok_or_else(|| ConfigError::Validation(format!("unknown preset '{name}'")))?,
        ),
        None => None,
    };
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Validation(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    Ok(parse_config_with(&text, preset)?)
}

fn write_all(dir: &PathBuf, files: &Artifacts) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let (files, summary) = match cli.command {
        Command::Discretize => {
            let f = run::discretize_cmd(&cfg)?;
            let text = f.values().next().cloned().unwrap_or_default();
            (f, text)
        }
        Command::Orbit => run::orbit_cmd(&cfg)?,
        Command::Darboux => {
            let f = run::darboux_cmd(&cfg)?;
            let text = f.values().next().cloned().unwrap_or_default();
            (f, text)
        }
        Command::AnalyzeBeam => {
            let f = run::analyze_beam_cmd(&cfg)?;
            let text = f.values().next().cloned().unwrap_or_default();
            (f, text)
        }
        Command::Report => run::report_cmd(&cfg)?,
    };
    write_all(&cli.out, &files)?;
    // a closed stdout is not a failure of the run
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", summary.trim_end());
    for name in files.keys() {
        let _ = writeln!(stdout, "wrote {}", cli.out.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kahan: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
