use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use peer_lab::harness::{parse_config, plot, run_experiment, PlotOptions};

#[derive(Parser)]
#[command(
    name = "peer-lab",
    version,
    about = "Train and inspect PEER-regularised RL agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set beta=0.001`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Plot one column of one or more metric CSVs as an SVG line chart.
    Plot {
        #[arg(long)]
        column: String,
        #[arg(long)]
        out: PathBuf,
        /// Moving-average window.
        #[arg(long, default_value_t = 10)]
        window: usize,
        /// Band half-width in standard deviations.
        #[arg(long, default_value_t = 1.0)]
        band: f64,
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides } => parse_config(&config, &overrides).and_then(|cfg| {
            let summary = run_experiment(&cfg)?;
            for s in &summary.seeds {
                match (&s.failure, s.final_score) {
                    (Some(msg), _) => println!("seed {}: FAILED ({msg})", s.seed),
                    (None, Some(score)) => println!("seed {}: final score {score:.3}", s.seed),
                    (None, None) => println!("seed {}: no evaluations", s.seed),
                }
            }
            if let (Some(mean), Some(std)) = (summary.mean, summary.std) {
                println!("mean {mean:.3} ± {std:.3}");
            }
            println!("summary written to {}", summary.summary_path.display());
            Ok(())
        }),
        Command::Plot {
            column,
            out,
            window,
            band,
            csv,
        } => plot(&csv, &column, &out, &PlotOptions { window, band }).map(|series| {
            println!("wrote {} ({} series)", out.display(), series.len());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
