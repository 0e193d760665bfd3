use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;

use vexpred::cli::{self, EXIT_CONFIG};
use vexpred::config::RunConfig;
use vexpred::Error;

/// Voltage-excursion event prediction.
#[derive(Parser, Debug)]
#[command(name = "vexpred", version)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, short = 'c', global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set h=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Dataset CSV (overrides `data`).
    #[arg(long, global = true)]
    data: Option<PathBuf>,

    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the bus x model grid.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Partition used to choose beta*: train or test.
    #[arg(long = "calibrate-on", global = true)]
    calibrate_on: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset and print per-bus positive ratios.
    Synth {
        /// Output CSV path (default `<out_dir>/dataset.csv`).
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// Train and calibrate every (bound, bus, model) task.
    Train,
    /// Score the test partition and write results, tables and rankings.
    Evaluate,
    /// Predict labels at t+h from the trailing samples of a CSV.
    Predict {
        /// CSV in dataset format; its last rows form the input window.
        #[arg(long, short = 'w')]
        window: PathBuf,
        /// Emit JSON lines instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Re-render tables and rankings from a results file.
    Report {
        /// Results file (default `<out_dir>/results.jsonl`).
        #[arg(long)]
        results: Option<PathBuf>,
    },
}

fn build_config(common: &Common) -> Result<RunConfig, Error> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_file(path).map_err(|e| match e {
            Error::Io { .. } => Error::Config(e.to_string()),
            other => other,
        })?,
        None => RunConfig::default(),
    };
    for pair in &common.overrides {
        config.apply_override(pair)?;
    }
    if let Some(data) = &common.data {
        config.data = Some(data.clone());
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if let Some(threads) = common.threads {
        config.threads = threads;
    }
    if let Some(on) = &common.calibrate_on {
        config.set("calibrate_on", on)?;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<i32, Error> {
    let config = build_config(&cli.common)?;
    match cli.command {
        Command::Synth { output } => {
            let (path, ratios) = cli::cmd_synth(&config, output.as_deref())?;
            println!("wrote {}", path.display());
            cli::print(&ratios);
            Ok(0)
        }
        Command::Train => {
            let summary = cli::cmd_train(&config)?;
            for w in &summary.warnings {
                warn!("{w}");
            }
            for f in &summary.failures {
                eprintln!("failed: {f}");
            }
            println!(
                "trained {} models into {} ({} failed)",
                summary.trained,
                config.out_dir.display(),
                summary.failures.len()
            );
            Ok(summary.exit_code())
        }
        Command::Evaluate => {
            let summary = cli::cmd_evaluate(&config)?;
            for f in &summary.failures {
                eprintln!("failed: {f}");
            }
            cli::print(&summary.tables);
            cli::print(&summary.ranking);
            Ok(summary.exit_code())
        }
        Command::Predict { window, json } => {
            let predictions = cli::cmd_predict(&config, &window)?;
            if json {
                for p in &predictions {
                    println!("{}", serde_json::to_string(p)?);
                }
            } else {
                cli::print(&cli::render_predictions(&predictions));
            }
            Ok(0)
        }
        Command::Report { results } => {
            let path = results.unwrap_or_else(|| config.out_dir.join(cli::RESULTS_FILE));
            let (tables, ranking) = cli::cmd_report(&path)?;
            cli::print(&tables);
            cli::print(&ranking);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
