use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qgraph_cli::{builtins, run, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "qgraph", version, about = "Spectral experiments on quantum graphs")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized sample placement.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write CSV tables and report.txt.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write gnuplot scripts next to each CSV.
        #[arg(long)]
        plot_scripts: bool,
        /// Sample the first K eigenfunctions of operator A into a CSV.
        #[arg(long, value_name = "K", default_value_t = 0)]
        eigenfunctions: usize,
    },
    /// List builtin graphs and the condition and potential shorthands.
    ListBuiltins {
        /// Emit TOML instead of the plain listing.
        #[arg(long)]
        machine: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match cli.command {
        Command::ListBuiltins { machine } => {
            print!("{}", if machine { builtins::machine_listing() } else { builtins::listing() });
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            output,
            plot_scripts,
            eigenfunctions,
        } => {
            let scenario = match Scenario::from_file(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions {
                plot_scripts,
                eigenfunctions,
                seed: cli.seed,
            };
            match run(&scenario, &output, &opts) {
                Ok(status) => {
                    if let Ok(report) = std::fs::read_to_string(output.join("report.txt")) {
                        print!("{report}");
                    }
                    ExitCode::from(status.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
