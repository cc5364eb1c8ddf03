use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qrecover::sweep::{self, SweepConfig};
use qrecover::verify::{verify_inequalities, VerifyConfig};
use qrecover::{demo, HarnessError};

/// Noisy-channel simulation with approximate error-correction recovery:
/// coherent-information loss, distance-measure verification, and fidelity
/// bounds checked by direct simulation.
#[derive(Parser)]
#[command(name = "qrecover", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one channel on one input and print every report.
    Demo {
        /// Channel spec, e.g. `phaseflip:p=0.1`, `ampdamp:g=0.3`,
        /// `random:d=2,e=4,seed=7`.
        #[arg(long)]
        channel: String,
        /// Input state, e.g. `bell`, `uniform-3`, `lambda:0.7,0.2,0.1`.
        #[arg(long)]
        input: String,
    },
    /// Sweep a channel family over a parameter grid and write a report.
    Sweep {
        /// Path to a key=value or JSON sweep configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Verify the distance-measure inequality suite on a random corpus.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long = "max-dim", default_value_t = 8)]
        max_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the summary as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Demo { channel, input } => {
            let report = demo::run_demo(&channel, &input)?;
            println!("{report}");
            Ok(!report.bound_violated())
        }
        Command::Sweep { config } => {
            let cfg = SweepConfig::load(&config)?;
            let (rows, violations) = sweep::run_and_write(&cfg)?;
            let vacuous = rows.iter().filter(|r| r.bound_is_vacuous()).count();
            println!(
                "wrote {} rows to {} ({} bound violations, {} vacuous bounds)",
                rows.len(),
                cfg.output_path.display(),
                violations,
                vacuous
            );
            Ok(violations == 0)
        }
        Command::Verify {
            trials,
            max_dim,
            seed,
            json,
        } => {
            let summary = verify_inequalities(VerifyConfig {
                trials,
                max_dim,
                seed,
            })?;
            if json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                println!("{summary}");
            }
            Ok(summary.total_violations() == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
