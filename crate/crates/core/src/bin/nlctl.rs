//! `nlctl <command> --config <path> [--out <dir>] [--seed <n>]`
//!
//! Exit codes: 0 pass, 1 assertion failure, 2 config error, 3 non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::json;

use nonlocal_control::config::{parse_config_for, Command};
use nonlocal_control::run::{exit, run, Manifest, VERSION};
use nonlocal_control::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    SolveState,
    SolveLocal,
    SolveControl,
    SweepState,
    SweepControl,
    Gconv,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::SolveState => Command::SolveState,
            Cmd::SolveLocal => Command::SolveLocal,
            Cmd::SolveControl => Command::SolveControl,
            Cmd::SweepState => Command::SweepState,
            Cmd::SweepControl => Command::SweepControl,
            Cmd::Gconv => Command::Gconv,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nlctl", version = VERSION, about = "Nonlocal p-Laplacian state, control and horizon-limit experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the config (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for all random draws; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn report_config_error(cli: &Cli, command: Command, error: &Error) -> ExitCode {
    let report = json!({ "status": "config_error", "command": command.name(), "error": error.to_string() });
    eprintln!("{report}");
    if let Some(dir) = &cli.out {
        if let Err(e) = Manifest::config_error(command.name(), cli.seed.unwrap_or(0), error).write(dir) {
            eprintln!("{}", json!({ "status": "io_error", "error": e.to_string() }));
        }
    }
    ExitCode::from(exit::CONFIG_ERROR as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = Command::from(cli.command);
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            let err = Error::Config(format!("cannot read {}: {e}", cli.config.display()));
            return report_config_error(&cli, command, &err);
        }
    };
    let mut config = match parse_config_for(&text, Some(command)) {
        Ok(c) => c,
        Err(e) => return report_config_error(&cli, command, &e),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = cli.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    config.out_dir = Some(out.clone());
    match run(&config, &out) {
        Ok(manifest) => {
            let failed: Vec<_> = manifest.assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect();
            let summary = json!({
                "status": manifest.status,
                "command": manifest.command,
                "out_dir": out.display().to_string(),
                "artifacts": manifest.artifacts,
                "failed_assertions": failed,
                "error": manifest.error,
            });
            if manifest.exit_code == exit::PASS {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            ExitCode::from(manifest.exit_code as u8)
        }
        Err(e) => report_config_error(
            &cli,
            command,
            &Error::Config(format!("cannot write manifest to {}: {e}", out.display())),
        ),
    }
}
