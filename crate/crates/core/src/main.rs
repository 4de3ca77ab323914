use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use nhqm::cli::{
    emit_plot, run_expectation_sweep, run_transport_report, ExperimentConfig, PlotKind, SweepTable,
};

#[derive(Parser)]
#[command(
    name = "nhqm",
    version,
    about = "Expectation-value sweeps and transport reports for non-Hermitian operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment.
    Run {
        #[command(subcommand)]
        experiment: Experiment,
    },
    /// Plot an expectation-sweep CSV as SVG or PNG (chosen by extension).
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// abs, re or im
        #[arg(long, default_value = "abs")]
        kind: PlotKind,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Expectation value of H across the γ grid and gauges; writes a CSV into output_dir.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Map, norm-matching and overlap report between two models; written next to config A's output.
    Transport {
        #[arg(long = "config-a")]
        config_a: PathBuf,
        #[arg(long = "config-b")]
        config_b: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            experiment: Experiment::Sweep { config },
        } => {
            let cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let table = run_expectation_sweep(&cfg)?;
            fs::create_dir_all(&cfg.output_dir)
                .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
            let path = cfg
                .output_dir
                .join(format!("expectation_{}.csv", cfg.inner_product.label()));
            table.write_csv(&path)?;
            let failed = table.rows.iter().filter(|r| r.value.is_none()).count();
            println!("{}", path.display());
            if failed > 0 {
                eprintln!("{failed} of {} rows failed", table.rows.len());
            }
        }
        Command::Run {
            experiment: Experiment::Transport { config_a, config_b },
        } => {
            let a = ExperimentConfig::load(&config_a)
                .with_context(|| format!("loading {}", config_a.display()))?;
            let b = ExperimentConfig::load(&config_b)
                .with_context(|| format!("loading {}", config_b.display()))?;
            let report = run_transport_report(&a, &b)?;
            fs::create_dir_all(&a.output_dir)
                .with_context(|| format!("creating {}", a.output_dir.display()))?;
            let path = a.output_dir.join("transport_report.json");
            report.write(&path)?;
            println!("{}", path.display());
        }
        Command::Plot {
            input,
            output,
            kind,
        } => {
            let table = SweepTable::read_csv(&input)?;
            emit_plot(&table, kind, &output)?;
            println!("{}", output.display());
        }
    }
    Ok(())
}
