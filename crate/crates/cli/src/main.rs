//! `cornerflow run <scenario.json>`: solve, analyse, write a summary.

mod config;
mod export;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "cornerflow", version, about = "Steady 2D irrotational flow around bodies with corners")]
struct Cli {
    /// Log level: error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    verbosity: log::LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Replace a config value, e.g. `tolerances.a1_tolerance=1e-4`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check scenario files against the schema without solving.
    Validate { configs: Vec<PathBuf> },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.verbosity).init();
    let result = match cli.command {
        Command::Run { config, out, overrides } => run_command(&config, &out, &overrides),
        Command::Validate { configs } => validate_command(&configs),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn validate_command(paths: &[PathBuf]) -> Result<u8> {
    let mut code = 0;
    for path in paths {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        match config::parse(&text, &[]) {
            Ok(_) => println!("{}: ok", path.display()),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                code = 2;
            }
        }
    }
    Ok(code)
}

fn run_command(path: &Path, out: &Path, overrides: &[String]) -> Result<u8> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut summary = Map::new();
    summary.insert("schema_version".into(), json!(config::SCHEMA_VERSION));
    let scenario = match config::parse(&text, overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            summary.insert("status".into(), json!("config_error"));
            summary.insert(
                "error".into(),
                json!({ "kind": "config", "message": e.message, "line": e.line, "column": e.column }),
            );
            run::write_summary(&out.join("summary.json"), &summary)?;
            return Ok(2);
        }
    };
    summary.insert("name".into(), json!(scenario.name));
    summary.insert("label".into(), json!(run::LABEL));
    summary.insert(
        "units".into(),
        json!("nondimensional: lengths as given in the scenario, density scaled by the free-stream density"),
    );
    summary.insert("scenario".into(), serde_json::to_value(&scenario)?);
    let outcome = run::run(&scenario, out, &mut summary);
    let code = match &outcome {
        Ok(()) => {
            summary.insert("status".into(), json!("ok"));
            summary.insert("error".into(), Value::Null);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            summary.insert("status".into(), json!("solver_error"));
            summary.insert("error".into(), run::error_value(e));
            1
        }
    };
    let summary_path = out.join(&scenario.outputs.summary);
    run::write_summary(&summary_path, &summary)?;
    log::info!("wrote {}", summary_path.display());
    Ok(code)
}
