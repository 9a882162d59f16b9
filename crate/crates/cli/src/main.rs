use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qflow_cli::{parse_config, run, write_outputs, CliError, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "qflow", version, about = "Prescribed Q-curvature solver on R^3")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in a TOML config (solve by default).
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use a single worker thread.
        #[arg(long)]
        serial: bool,
    },
    /// Run a verification suite with default settings.
    Verify {
        #[arg(value_enum)]
        suite: Mode,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write report.json and timings.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        serial: bool,
    },
}

fn serial_pool(serial: bool) -> Result<(), CliError> {
    if serial {
        rayon::ThreadPoolBuilder::new().num_threads(1).build_global().map_err(|e| CliError::Config {
            key: "--serial".into(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let (cfg, out, serial): (RunConfig, Option<PathBuf>, bool) = match cli.command {
        Command::Solve { config, out, serial } => {
            let text = std::fs::read_to_string(&config).map_err(|source| CliError::Io {
                path: config.clone(),
                source,
            })?;
            let cfg = parse_config(&text, config.parent())?;
            let out = out.or_else(|| cfg.out_dir.clone()).or_else(|| Some(PathBuf::from("qflow-out")));
            (cfg, out, serial)
        }
        Command::Verify { suite, seed, out, serial } => {
            if suite == Mode::Solve {
                return Err(CliError::Config {
                    key: "suite".into(),
                    message: "solve is not a suite; use `qflow solve --config`".into(),
                });
            }
            (RunConfig::suite(suite, seed.unwrap_or(7)), out, serial)
        }
    };
    serial_pool(serial)?;
    let outcome = run(&cfg)?;
    print!("{}", outcome.report.summary());
    if let Some(dir) = out {
        write_outputs(&outcome, &dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(outcome.report.passed)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qflow: {e}");
            ExitCode::from(2)
        }
    }
}
