//! `stockgrid` command-line tool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stockgrid::pipeline::{self, Overrides};
use stockgrid::{Error, ErrorKind};

/// Building-stock electricity demand and grid shortfall analysis.
///
/// Scenario CSV columns: timestamp, mean_temp_c, residential_mw,
/// commercial_mw, industrial_mw, total_mw, heating_mw, cooling_mw, other_mw,
/// gas_mw_th, unmet_mw_th. Timestamps are local standard time.
///
/// Exit codes: 0 success, 2 configuration error, 3 data error,
/// 4 internal invariant violation.
#[derive(Parser, Debug)]
#[command(name = "stockgrid", version, about)]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Random seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate every scenario and write scenario_<name>.csv, bias factors,
    /// summary.json and, when shed occurred, the shortfall report.
    Simulate,
    /// Recompute shortfall_report.json, shortfall_hourly.csv and
    /// shortfall.svg from existing scenario CSVs.
    Shortfall,
    /// Write end-use, hourly demand, temperature scatter, savings and daily
    /// peak data (CSV) with SVG charts.
    Report,
    /// Fit the commercial hour-of-week regressions on the transfer year.
    FitTransfer,
    /// Mean annual per-building electricity of the residential stock for
    /// each sample size.
    Convergence {
        #[arg(long, value_delimiter = ',', default_values_t = vec![500, 1000, 2000, 5000, 10000])]
        sizes: Vec<usize>,
    },
    /// Check the config and every file it references.
    ValidateConfig,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Internal => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let config = cli
        .config
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let overrides = Overrides {
        out_dir: cli.out_dir,
        seed: cli.seed,
    };
    match cli.command {
        Command::Simulate => {
            let (out, manifest) = pipeline::cmd_simulate(&config, &overrides)?;
            for s in &out.summary.scenarios {
                println!(
                    "{:<28} {:>10.1} GWh  {:>+6.2}% vs baseline  coldest hour {:>9.1} MW",
                    s.scenario.as_str(),
                    s.annual_gwh.total,
                    -s.reduction_vs_baseline_pct,
                    s.coldest_hour_total_mw
                );
            }
            println!("wrote {} files", manifest.files.len());
        }
        Command::Shortfall => {
            let (out, _) = pipeline::cmd_shortfall(&config, &overrides)?;
            match out {
                None => println!("no load shed in the grid series; nothing to report"),
                Some(out) => {
                    for r in std::iter::once(&out.reference).chain(&out.scenarios) {
                        println!(
                            "{:<28} {:>3} h  peak {:>7.1} GW ({:>5.1}%)  {:>8.1} GWh",
                            r.scenario,
                            r.shortfall_hours,
                            r.peak_mw / 1000.0,
                            100.0 * r.peak_pct_of_demand,
                            r.total_gwh
                        );
                    }
                }
            }
        }
        Command::Report => {
            let (index, _) = pipeline::cmd_report(&config, &overrides)?;
            for c in &index.crossover {
                match c.temperature_c {
                    Some(t) => println!("{} exceeds baseline from {t:.1} °C", c.scenario.as_str()),
                    None => println!("{} never exceeds baseline", c.scenario.as_str()),
                }
            }
            println!("wrote {} report files", index.files.len());
        }
        Command::FitTransfer => {
            pipeline::cmd_fit_transfer(&config, &overrides)?;
            println!("wrote transfer_regressions.json");
        }
        Command::Convergence { sizes } => {
            let (out, _) = pipeline::cmd_convergence(&config, &overrides, &sizes)?;
            for (n, v) in &out.mean_annual_kwh {
                let change = out
                    .relative_change
                    .get(n)
                    .map(|c| format!("{:.3}%", 100.0 * c))
                    .unwrap_or_default();
                println!("{n:>7} {v:>12.1} kWh {change}");
            }
        }
        Command::ValidateConfig => {
            let session = pipeline::cmd_validate_config(&config, &overrides)?;
            println!("config ok; output directory {}", session.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(4);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
