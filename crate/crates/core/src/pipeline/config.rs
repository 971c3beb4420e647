use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calendar::Timestamp;
use crate::error::{Error, Result};
use crate::grid::Window;
use crate::retrofit::Scenario;
use crate::sim::EngineParams;
use crate::weather::{WeatherFormat, ZoneId, DEFAULT_BASE_TEMPERATURE_C};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherConfig {
    pub format: WeatherFormat,
    pub zones: BTreeMap<ZoneId, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    pub distribution: PathBuf,
    pub sample_size: usize,
}

/// Simulate commercial buildings under another year's weather and carry the
/// result over through hour-of-week degree-day regressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    pub year: i32,
    pub weather: WeatherConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommercialConfig {
    pub distribution: PathBuf,
    pub sample_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub year: i32,
    #[serde(default = "default_base")]
    pub base_temperature_c: f64,
    pub seed: u64,
    pub weather: WeatherConfig,
    pub population_csv: PathBuf,
    pub grid_csv: PathBuf,
    pub fractions_csv: PathBuf,
    /// Per-sector served load; when absent the grid series is split by the
    /// customer-class fractions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub served_load_csv: Option<PathBuf>,
    pub residential: SectorConfig,
    pub commercial: CommercialConfig,
    pub packages_dir: PathBuf,
    pub scenarios: Vec<Scenario>,
    /// Shortfall window; defaults to the span of requested shed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_window: Option<Window>,
    #[serde(default = "default_analysis_month")]
    pub analysis_month: u32,
    #[serde(default)]
    pub engine: EngineParams,
    pub output_dir: PathBuf,
}

fn default_base() -> f64 {
    DEFAULT_BASE_TEMPERATURE_C
}

fn default_analysis_month() -> u32 {
    2
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    /// Reads a config; relative paths are taken from the config's directory.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        Ok((cfg, hash))
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in self.weather.zones.values_mut() {
            resolve(base, p);
        }
        if let Some(t) = &mut self.commercial.transfer {
            for p in t.weather.zones.values_mut() {
                resolve(base, p);
            }
        }
        for p in [
            &mut self.population_csv,
            &mut self.grid_csv,
            &mut self.fractions_csv,
            &mut self.residential.distribution,
            &mut self.commercial.distribution,
            &mut self.packages_dir,
            &mut self.output_dir,
        ] {
            resolve(base, p);
        }
        if let Some(p) = &mut self.served_load_csv {
            resolve(base, p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.residential.sample_size == 0 || self.commercial.sample_size == 0 {
            return Err(Error::Config("sample_size must be at least 1".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("at least one scenario is required".into()));
        }
        let unique: BTreeSet<_> = self.scenarios.iter().map(|s| s.as_str()).collect();
        if unique.len() != self.scenarios.len() {
            return Err(Error::Config("scenarios are listed more than once".into()));
        }
        if !(1..=12).contains(&self.analysis_month) {
            return Err(Error::Config(format!(
                "analysis_month {} outside 1..=12",
                self.analysis_month
            )));
        }
        if !self.base_temperature_c.is_finite() {
            return Err(Error::Config("base_temperature_c must be finite".into()));
        }
        if let Some(w) = &self.event_window {
            if w.end <= w.start {
                return Err(Error::Config("event_window end must follow start".into()));
            }
        }
        self.engine.validate()?;
        for zone in self.weather.zones.keys() {
            self.engine.design_for(zone).map_err(|_| {
                Error::Config(format!("engine has no design temperatures for zone {zone}"))
            })?;
        }
        let mut files: Vec<&Path> = vec![
            &self.population_csv,
            &self.grid_csv,
            &self.fractions_csv,
            &self.residential.distribution,
            &self.commercial.distribution,
        ];
        files.extend(self.weather.zones.values().map(PathBuf::as_path));
        if let Some(t) = &self.commercial.transfer {
            if t.weather.zones.keys().ne(self.weather.zones.keys()) {
                return Err(Error::Config(
                    "transfer weather must cover the same zones".into(),
                ));
            }
            files.extend(t.weather.zones.values().map(PathBuf::as_path));
        }
        if let Some(p) = &self.served_load_csv {
            files.push(p);
        }
        if let Some(missing) = files.into_iter().find(|p| !p.is_file()) {
            return Err(Error::Config(format!(
                "{} does not exist",
                missing.display()
            )));
        }
        if !self.packages_dir.is_dir() {
            return Err(Error::Config(format!(
                "{} is not a directory",
                self.packages_dir.display()
            )));
        }
        Ok(())
    }

    pub fn event_window_or(&self, fallback: Option<Window>) -> Option<Window> {
        self.event_window.or(fallback)
    }
}

/// First hour of `month` in `year` and the first hour after it.
pub fn month_window(year: i32, month: u32) -> Option<(Timestamp, Timestamp)> {
    let start = chrono::NaiveDate::from_ymd_opt(year, month, 1)?.and_hms_opt(0, 0, 0)?;
    let (ny, nm) = if month == 12 {
        (year + 1, 1)
    } else {
        (year, month + 1)
    };
    let end = chrono::NaiveDate::from_ymd_opt(ny, nm, 1)?.and_hms_opt(0, 0, 0)?;
    Some((start, end))
}
