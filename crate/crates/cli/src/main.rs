use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use supsob_cli::output::error_document;
use supsob_cli::{parse_config, run, CliError, Command, Overrides};

/// Supercritical Sobolev inequalities on radial functions of the unit ball.
#[derive(Debug, Parser)]
#[command(name = "supsob", version)]
struct Cli {
    /// TOML configuration file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SUPSOB_THREADS") else {
        return Ok(());
    };
    let k: usize = v.trim().parse().ok().filter(|k| *k > 0).ok_or_else(|| {
        CliError::Config(format!(
            "SUPSOB_THREADS must be a positive integer (got {v:?})"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let label = cli.command.label();
    let outcome = init_threads()
        .and_then(|_| parse_config(cli.config.as_deref(), cli.overrides))
        .and_then(|cfg| {
            let art = run(&cli.command, &cfg)?;
            let doc = art.write(&cfg.output_dir, &label, &cfg)?;
            Ok((art.pass, doc))
        });
    match outcome {
        Ok((pass, doc)) => {
            print!("{doc}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            print!("{}", error_document(&e));
            ExitCode::from(2)
        }
    }
}
