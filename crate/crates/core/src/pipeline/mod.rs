//! Config-driven orchestration behind the command-line tool.
//!
//! Every command writes into the output directory and records the files it
//! wrote, with content hashes, in `manifest.json`.

mod analysis;
mod config;
mod manifest;
mod simulate;
pub mod svg;
mod table;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use analysis::{
    crossover, report_stage, shortfall_hourly, shortfall_stage, Crossover, PeakSummary,
    ReportFiles, ReportIndex, ShortfallOutput,
};
pub use config::{
    month_window, CommercialConfig, RunConfig, SectorConfig, TransferConfig, WeatherConfig,
    SCHEMA_VERSION,
};
pub use manifest::{sha256_file, Manifest, MANIFEST_FILE};
pub use simulate::{
    fit_commercial_transfer, load_inputs, load_stocks, load_transfer, load_weather, run_simulation,
    system_degree_days, write_json, AnnualGwh, RunInputs, RunSummary, ScenarioSummary,
    SimulationOutput, TransferStage,
};
pub use table::{ScenarioTable, SCENARIO_COLUMNS};

use crate::error::{Error, Result};
use crate::grid::{shed_window, GridSeries, Window};
use crate::stock::{convergence_scan, ArchetypeDistribution};

pub const SUMMARY_FILE: &str = "summary.json";
pub const SHORTFALL_FILE: &str = "shortfall_report.json";
pub const REPORT_FILE: &str = "report.json";

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// A loaded config with overrides applied.
pub struct Session {
    pub config: RunConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Session {
    pub fn open(config_path: &Path, overrides: &Overrides) -> Result<Self> {
        let (config, config_sha256) = RunConfig::load(config_path)?;
        config.validate()?;
        let seed = overrides.seed.unwrap_or(config.seed);
        let out_dir = overrides
            .out_dir
            .clone()
            .unwrap_or_else(|| config.output_dir.clone());
        Ok(Session {
            config,
            config_sha256,
            seed,
            out_dir,
        })
    }

    fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))
    }

    fn write(&self, name: &str, text: &str, written: &mut Vec<String>) -> Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(
        &self,
        name: &str,
        value: &T,
        written: &mut Vec<String>,
    ) -> Result<()> {
        write_json(value, &self.out_dir.join(name))?;
        written.push(name.to_string());
        Ok(())
    }

    fn record(&self, command: &str, written: &[String]) -> Result<Manifest> {
        Manifest::record(
            &self.out_dir,
            command,
            self.seed,
            &self.config_sha256,
            written,
        )
    }

    fn window(&self, grid: &GridSeries) -> Option<Window> {
        self.config.event_window_or(shed_window(grid))
    }

    /// Scenario tables previously written by `simulate`.
    pub fn read_tables(&self) -> Result<Vec<ScenarioTable>> {
        self.config
            .scenarios
            .iter()
            .map(|s| {
                let path = self.out_dir.join(ScenarioTable::file_name(*s));
                if !path.is_file() {
                    return Err(Error::missing(format!(
                        "demand table for scenario {s} ({}); run simulate first",
                        path.display()
                    )));
                }
                ScenarioTable::from_csv(&path, *s)
            })
            .collect()
    }

    fn write_shortfall(
        &self,
        tables: &[ScenarioTable],
        grid: &GridSeries,
        written: &mut Vec<String>,
    ) -> Result<Option<ShortfallOutput>> {
        let Some(window) = self.window(grid) else {
            log::info!("no requested shed and no event window; skipping shortfall");
            return Ok(None);
        };
        let out = shortfall_stage(tables, grid, window)?;
        let (csv, svg) = shortfall_hourly(tables, grid, window)?;
        self.write_json(SHORTFALL_FILE, &out, written)?;
        self.write("shortfall_hourly.csv", &csv, written)?;
        self.write("shortfall.svg", &svg, written)?;
        Ok(Some(out))
    }
}

/// Samples, retrofits, simulates, calibrates and composes every scenario.
pub fn cmd_simulate(
    config_path: &Path,
    overrides: &Overrides,
) -> Result<(SimulationOutput, Manifest)> {
    let session = Session::open(config_path, overrides)?;
    session.ensure_out_dir()?;
    let out = run_simulation(&session.config, session.seed)?;
    let mut written = Vec::new();
    for t in &out.tables {
        session.write(
            &ScenarioTable::file_name(t.scenario),
            &t.to_csv_string(),
            &mut written,
        )?;
    }
    session.write_json(
        "bias_factors_residential.json",
        &out.factors[0],
        &mut written,
    )?;
    session.write_json(
        "bias_factors_commercial.json",
        &out.factors[1],
        &mut written,
    )?;
    if let Some(reg) = &out.transfer {
        session.write_json("transfer_regressions.json", reg, &mut written)?;
    }
    session.write_json(SUMMARY_FILE, &out.summary, &mut written)?;
    session.write_shortfall(&out.tables, &out.inputs.grid, &mut written)?;
    let manifest = session.record("simulate", &written)?;
    Ok((out, manifest))
}

pub fn cmd_shortfall(
    config_path: &Path,
    overrides: &Overrides,
) -> Result<(Option<ShortfallOutput>, Manifest)> {
    let session = Session::open(config_path, overrides)?;
    let tables = session.read_tables()?;
    let grid = GridSeries::from_csv(&session.config.grid_csv)?;
    let mut written = Vec::new();
    let out = session.write_shortfall(&tables, &grid, &mut written)?;
    let manifest = session.record("shortfall", &written)?;
    Ok((out, manifest))
}

pub fn cmd_report(config_path: &Path, overrides: &Overrides) -> Result<(ReportIndex, Manifest)> {
    let session = Session::open(config_path, overrides)?;
    let tables = session.read_tables()?;
    let cfg = &session.config;
    let report = report_stage(
        &tables,
        cfg.year,
        cfg.analysis_month,
        cfg.base_temperature_c,
    )?;
    let mut written = Vec::new();
    for (name, text) in &report.files {
        session.write(name, text, &mut written)?;
    }
    session.write_json(REPORT_FILE, &report.index, &mut written)?;
    let manifest = session.record("report", &written)?;
    Ok((report.index, manifest))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOutput {
    pub schema_version: u32,
    pub sector: crate::stock::Sector,
    pub seed: u64,
    /// Mean annual electricity per sampled building, kWh.
    pub mean_annual_kwh: BTreeMap<usize, f64>,
    /// Relative change between consecutive sizes.
    pub relative_change: BTreeMap<usize, f64>,
}

/// Mean annual per-building consumption of the residential stock at each size.
pub fn cmd_convergence(
    config_path: &Path,
    overrides: &Overrides,
    sizes: &[usize],
) -> Result<(ConvergenceOutput, Manifest)> {
    let session = Session::open(config_path, overrides)?;
    session.ensure_out_dir()?;
    let cfg = &session.config;
    let weather = load_weather(&cfg.weather, cfg.year)?;
    let dist = ArchetypeDistribution::from_json_file(&cfg.residential.distribution)?;
    let means = convergence_scan(&dist, sizes, session.seed, &weather, &cfg.engine)?;
    let mut relative_change = BTreeMap::new();
    let ordered: Vec<(usize, f64)> = means.iter().map(|(k, v)| (*k, *v)).collect();
    for w in ordered.windows(2) {
        relative_change.insert(w[1].0, (w[1].1 - w[0].1).abs() / w[1].1);
    }
    let out = ConvergenceOutput {
        schema_version: SCHEMA_VERSION,
        sector: dist.sector,
        seed: session.seed,
        mean_annual_kwh: means,
        relative_change,
    };
    let mut csv = String::from("sample_size,mean_annual_kwh\n");
    for (n, v) in &out.mean_annual_kwh {
        csv.push_str(&format!("{n},{v:.6}\n"));
    }
    let mut written = Vec::new();
    session.write_json("convergence.json", &out, &mut written)?;
    session.write("convergence.csv", &csv, &mut written)?;
    let points = out
        .mean_annual_kwh
        .iter()
        .map(|(n, v)| (*n as f64, *v))
        .collect();
    let svg = svg::chart(
        "Mean annual electricity per sampled building",
        "sample size",
        "kWh",
        &[svg::Series {
            label: "residential",
            points,
        }],
        svg::Style::Line,
    );
    session.write("convergence.svg", &svg, &mut written)?;
    let manifest = session.record("convergence", &written)?;
    Ok((out, manifest))
}

/// Fits the commercial baseline regressions on the transfer year and
/// writes them without running the rest of the pipeline.
pub fn cmd_fit_transfer(config_path: &Path, overrides: &Overrides) -> Result<Manifest> {
    let session = Session::open(config_path, overrides)?;
    session.ensure_out_dir()?;
    let cfg = &session.config;
    let weights = crate::weather::PopulationWeightSet::from_csv(&cfg.population_csv)?;
    let stage = load_transfer(cfg, &weights)?
        .ok_or_else(|| Error::Config("config has no commercial.transfer section".into()))?;
    let (_, commercial) = load_stocks(cfg, session.seed)?;
    let reg = fit_commercial_transfer(&commercial, &stage, cfg)?;
    let mut written = Vec::new();
    session.write_json("transfer_regressions.json", &reg, &mut written)?;
    session.record("fit-transfer", &written)
}

/// Loads and validates a config and the files it points at.
pub fn cmd_validate_config(config_path: &Path, overrides: &Overrides) -> Result<Session> {
    let session = Session::open(config_path, overrides)?;
    let cfg = &session.config;
    ArchetypeDistribution::from_json_file(&cfg.residential.distribution)?.validate()?;
    ArchetypeDistribution::from_json_file(&cfg.commercial.distribution)?.validate()?;
    let packages = crate::retrofit::PackageSet::from_dir(&cfg.packages_dir)?;
    for p in [
        &packages.efficiency,
        &packages.electrification,
        &packages.efficiency_electrification,
    ] {
        p.validate()?;
    }
    Ok(session)
}
