use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xplain_rl_cli::commands::{self, ExplainRequest};
use xplain_rl_cli::CliError;

/// Train tabular agents and explain their behaviour through success
/// probabilities.
#[derive(Parser)]
#[command(name = "xplain-rl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train agents from a key=value config and write run artifacts.
    Train {
        config: PathBuf,
        out_dir: PathBuf,
    },
    /// Pool one or more runs and write MSE, correlation and chart files.
    Analyze {
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
        /// Output directory (defaults to the first run directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// State to analyse, e.g. s0 (defaults to the initial state).
        #[arg(long)]
        state: Option<String>,
    },
    /// Answer why / why_not / compare questions from final estimates.
    Explain {
        run_dir: PathBuf,
        /// why, why_not or compare
        kind: String,
        /// State name such as s1
        state: String,
        /// Action name such as a_R or grab (not used by compare)
        action: Option<String>,
        /// Use one agent's estimates instead of the mean over agents.
        #[arg(long)]
        agent: Option<usize>,
        /// Comma list of methods to cite.
        #[arg(long)]
        methods: Option<String>,
        /// Print the explanation as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print a summary of a finished run.
    Report { run_dir: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { config, out_dir } => {
            let manifest = commands::train(&config, &out_dir)?;
            println!(
                "trained {} agents x {} episodes in {:.2}s; wrote {} to {}",
                manifest.config.agents,
                manifest.config.episodes,
                manifest.duration_seconds,
                manifest.artifacts.join(", "),
                out_dir.display()
            );
        }
        Command::Analyze { run_dirs, out, state } => {
            let output = commands::analyze(&run_dirs, out.as_deref(), state.as_deref())?;
            print!("{}", output.report);
            println!("\nwrote {} to {}", output.files.join(", "), output.out_dir.display());
        }
        Command::Explain { run_dir, kind, state, action, agent, methods, json } => {
            let request = ExplainRequest {
                run_dir: &run_dir,
                kind: &kind,
                state: &state,
                action: action.as_deref(),
                agent,
                methods: methods.as_deref(),
            };
            let explanation = commands::explain(&request)?;
            if json {
                let text = serde_json::to_string_pretty(&explanation)
                    .map_err(|e| CliError::Mismatch(e.to_string()))?;
                println!("{text}");
            } else {
                println!("{}", explanation.text);
            }
        }
        Command::Report { run_dir } => print!("{}", commands::report(&run_dir)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
