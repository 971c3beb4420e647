//! Weather ingestion and degree-day metrics.
//!
//! Degree days here are *hourly*: each hour contributes
//! `max(0, base - T) / 24` heating degree days, so a full day at a constant
//! temperature sums to the familiar daily value. The system mean-temperature
//! metric inverts that convention (`base - 24 * hdd`).

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::calendar::{self, Timestamp};
use crate::error::{Error, Result};

/// Thermostat-like reference temperature used when none is configured, °C.
pub const DEFAULT_BASE_TEMPERATURE_C: f64 = 18.5;

const MIN_PLAUSIBLE_C: f64 = -60.0;
const MAX_PLAUSIBLE_C: f64 = 60.0;
const EPW_HEADER_ROWS: usize = 8;
const EPW_DRY_BULB_FIELD: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(pub String);

impl ZoneId {
    pub fn new(id: impl Into<String>) -> Self {
        ZoneId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ZoneId {
    fn from(s: &str) -> Self {
        ZoneId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeatherFormat {
    Epw,
    SimpleCsv,
}

/// One weather zone's hourly dry-bulb record for a calendar year.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneWeatherSeries {
    pub zone_id: ZoneId,
    pub station_id: String,
    pub year: i32,
    pub timestamps: Vec<Timestamp>,
    pub dry_bulb: Vec<f64>,
}

impl ZoneWeatherSeries {
    pub fn new(
        zone_id: ZoneId,
        station_id: impl Into<String>,
        year: i32,
        timestamps: Vec<Timestamp>,
        dry_bulb: Vec<f64>,
    ) -> Result<Self> {
        if timestamps.len() != dry_bulb.len() {
            return Err(Error::Alignment {
                expected: timestamps.len(),
                found: dry_bulb.len(),
            });
        }
        calendar::validate_full_year(&timestamps, year)?;
        if let Some((i, t)) = dry_bulb
            .iter()
            .enumerate()
            .find(|(_, t)| !(MIN_PLAUSIBLE_C..=MAX_PLAUSIBLE_C).contains(*t))
        {
            return Err(Error::Validation(format!(
                "zone {zone_id}: dry-bulb {t} °C at {} outside [{MIN_PLAUSIBLE_C}, {MAX_PLAUSIBLE_C}]",
                timestamps[i]
            )));
        }
        Ok(ZoneWeatherSeries {
            zone_id,
            station_id: station_id.into(),
            year,
            timestamps,
            dry_bulb,
        })
    }

    /// Builds a series from bare values starting at Jan 1 00:00 of `year`.
    pub fn from_values(
        zone_id: ZoneId,
        station_id: impl Into<String>,
        year: i32,
        dry_bulb: Vec<f64>,
    ) -> Result<Self> {
        let timestamps = calendar::year_timestamps(year)?;
        Self::new(zone_id, station_id, year, timestamps, dry_bulb)
    }

    pub fn len(&self) -> usize {
        self.dry_bulb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dry_bulb.is_empty()
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: line as u64,
        message: message.into(),
    }
}

fn parse_f64(path: &Path, line: usize, field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("invalid {what} `{field}`")))
}

/// Reads one zone's weather file. EPW dry-bulb comes from the seventh data
/// field; EPW hour `k` (1-24) is stamped at `k - 1` o'clock.
pub fn parse_weather_file(
    path: &Path,
    format: WeatherFormat,
    zone_id: &ZoneId,
) -> Result<ZoneWeatherSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        WeatherFormat::Epw => parse_epw(path, reader, zone_id),
        WeatherFormat::SimpleCsv => parse_simple_csv(path, reader, zone_id),
    }
}

fn parse_epw(path: &Path, reader: impl BufRead, zone_id: &ZoneId) -> Result<ZoneWeatherSeries> {
    let mut station_id = String::new();
    let mut year = None;
    let mut timestamps = Vec::with_capacity(8784);
    let mut dry_bulb = Vec::with_capacity(8784);
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if idx < EPW_HEADER_ROWS {
            if idx == 0 {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.first().map(|f| f.trim()) != Some("LOCATION") {
                    return Err(parse_err(
                        path,
                        lineno,
                        "EPW must start with a LOCATION record",
                    ));
                }
                station_id = fields
                    .get(5)
                    .map(|s| s.trim().to_string())
                    .unwrap_or_default();
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() <= EPW_DRY_BULB_FIELD {
            return Err(parse_err(
                path,
                lineno,
                format!(
                    "expected at least {} fields, found {}",
                    EPW_DRY_BULB_FIELD + 1,
                    fields.len()
                ),
            ));
        }
        let field_int = |i: usize, what: &str| -> Result<i64> {
            fields[i]
                .trim()
                .parse::<i64>()
                .map_err(|_| parse_err(path, lineno, format!("invalid {what} `{}`", fields[i])))
        };
        let y = field_int(0, "year")? as i32;
        let m = field_int(1, "month")? as u32;
        let d = field_int(2, "day")? as u32;
        let h = field_int(3, "hour")?;
        if !(1..=24).contains(&h) {
            return Err(parse_err(path, lineno, format!("hour {h} outside 1..=24")));
        }
        let year = *year.get_or_insert(y);
        if y != year {
            return Err(parse_err(
                path,
                lineno,
                format!("year {y} differs from file year {year}"),
            ));
        }
        let ts = NaiveDate::from_ymd_opt(y, m, d)
            .and_then(|date| date.and_hms_opt((h - 1) as u32, 0, 0))
            .ok_or_else(|| parse_err(path, lineno, format!("invalid date {y}-{m}-{d}")))?;
        timestamps.push(ts);
        dry_bulb.push(parse_f64(
            path,
            lineno,
            fields[EPW_DRY_BULB_FIELD],
            "dry-bulb temperature",
        )?);
    }
    let year = year.ok_or_else(|| Error::Structure(format!("{}: no data rows", path.display())))?;
    if station_id.is_empty() {
        station_id = file_stem(path);
    }
    ZoneWeatherSeries::new(zone_id.clone(), station_id, year, timestamps, dry_bulb)
}

fn parse_simple_csv(
    path: &Path,
    reader: impl BufRead,
    zone_id: &ZoneId,
) -> Result<ZoneWeatherSeries> {
    let mut timestamps = Vec::with_capacity(8784);
    let mut dry_bulb = Vec::with_capacity(8784);
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if idx == 0 {
            let header: Vec<&str> = line.split(',').map(str::trim).collect();
            if header != ["timestamp", "dry_bulb_c"] {
                return Err(parse_err(
                    path,
                    lineno,
                    "expected header `timestamp,dry_bulb_c`",
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (ts, t) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, lineno, "expected two fields"))?;
        let ts = calendar::parse_timestamp(ts)
            .ok_or_else(|| parse_err(path, lineno, format!("invalid timestamp `{ts}`")))?;
        timestamps.push(ts);
        dry_bulb.push(parse_f64(path, lineno, t, "dry-bulb temperature")?);
    }
    let year = timestamps
        .first()
        .map(|t| t.year())
        .ok_or_else(|| Error::Structure(format!("{}: no data rows", path.display())))?;
    ZoneWeatherSeries::new(zone_id.clone(), file_stem(path), year, timestamps, dry_bulb)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Writes a series in the `timestamp,dry_bulb_c` layout.
pub fn write_simple_csv(series: &ZoneWeatherSeries, path: &Path) -> Result<()> {
    use std::io::Write;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "timestamp,dry_bulb_c")?;
        for (ts, t) in series.timestamps.iter().zip(&series.dry_bulb) {
            writeln!(out, "{},{:.2}", calendar::format_timestamp(ts), t)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Normalized population shares per zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationWeightSet {
    weights: BTreeMap<ZoneId, f64>,
}

impl PopulationWeightSet {
    pub fn new(weights: BTreeMap<ZoneId, f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Validation("population weight set is empty".into()));
        }
        if let Some((z, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Validation(format!("weight for zone {z} is {w}")));
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "population weights sum to {sum}, not 1"
            )));
        }
        Ok(PopulationWeightSet { weights })
    }

    /// Normalizes raw populations (zone or metro) into shares.
    pub fn from_populations(populations: BTreeMap<ZoneId, f64>) -> Result<Self> {
        let total: f64 = populations.values().sum();
        if !(total > 0.0) || populations.values().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Validation(
                "populations must be nonnegative with a positive total".into(),
            ));
        }
        Self::new(
            populations
                .into_iter()
                .map(|(z, p)| (z, p / total))
                .collect(),
        )
    }

    /// Reads a `zone_id,population` CSV. Duplicate zones are rejected.
    pub fn from_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            zone_id: String,
            population: f64,
        }
        let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut populations = BTreeMap::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| csv_error(path, e))?;
            if populations
                .insert(ZoneId(row.zone_id.clone()), row.population)
                .is_some()
            {
                return Err(Error::Validation(format!(
                    "zone {} listed twice in {}",
                    row.zone_id,
                    path.display()
                )));
            }
        }
        Self::from_populations(populations)
    }

    pub fn get(&self, zone: &ZoneId) -> Option<f64> {
        self.weights.get(zone).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ZoneId, f64)> {
        self.weights.iter().map(|(z, w)| (z, *w))
    }

    pub fn zones(&self) -> impl Iterator<Item = &ZoneId> {
        self.weights.keys()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Hourly heating and cooling degree days against one base temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDaySeries {
    pub base_temperature: f64,
    pub timestamps: Vec<Timestamp>,
    pub hdd: Vec<f64>,
    pub cdd: Vec<f64>,
}

impl DegreeDaySeries {
    pub fn len(&self) -> usize {
        self.hdd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hdd.is_empty()
    }
}

pub fn hourly_degree_days(series: &ZoneWeatherSeries, base: f64) -> DegreeDaySeries {
    let (hdd, cdd) = series
        .dry_bulb
        .iter()
        .map(|&t| ((base - t).max(0.0) / 24.0, (t - base).max(0.0) / 24.0))
        .unzip();
    DegreeDaySeries {
        base_temperature: base,
        timestamps: series.timestamps.clone(),
        hdd,
        cdd,
    }
}

/// Population-weighted system degree days. Zones are summed in sorted order.
pub fn population_weighted_dd(
    per_zone: &BTreeMap<ZoneId, DegreeDaySeries>,
    weights: &PopulationWeightSet,
) -> Result<DegreeDaySeries> {
    let series_keys: Vec<&ZoneId> = per_zone.keys().collect();
    let weight_keys: Vec<&ZoneId> = weights.zones().collect();
    if series_keys != weight_keys {
        return Err(Error::KeyMismatch(format!(
            "degree-day zones {series_keys:?} vs weight zones {weight_keys:?}"
        )));
    }
    let first = per_zone
        .values()
        .next()
        .ok_or_else(|| Error::missing("degree-day series"))?;
    for (zone, dd) in per_zone {
        if dd.base_temperature != first.base_temperature {
            return Err(Error::KeyMismatch(format!(
                "zone {zone} uses base {} but expected {}",
                dd.base_temperature, first.base_temperature
            )));
        }
        if dd.timestamps != first.timestamps {
            return Err(Error::KeyMismatch(format!(
                "zone {zone} covers a different set of hours"
            )));
        }
    }
    // Weights sum to one, so the weighted mean is accumulated as offsets from
    // the first zone. Identical zones then reproduce that zone bit for bit.
    let n = first.len();
    let mut hdd = vec![0.0; n];
    let mut cdd = vec![0.0; n];
    for (zone, dd) in per_zone {
        let w = weights.get(zone).unwrap_or_default();
        for h in 0..n {
            hdd[h] += w * (dd.hdd[h] - first.hdd[h]);
            cdd[h] += w * (dd.cdd[h] - first.cdd[h]);
        }
    }
    for h in 0..n {
        hdd[h] = (first.hdd[h] + hdd[h]).max(0.0);
        cdd[h] = (first.cdd[h] + cdd[h]).max(0.0);
    }
    Ok(DegreeDaySeries {
        base_temperature: first.base_temperature,
        timestamps: first.timestamps.clone(),
        hdd,
        cdd,
    })
}

/// System mean temperature recovered from weighted HDD.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTemperatureSeries {
    pub values: Vec<f64>,
    /// Set where system HDD is zero: the metric reads as the base
    /// temperature and says nothing about cooling load in that hour.
    pub cooling_not_captured: Vec<bool>,
}

pub fn mean_temperature(system_hdd: &DegreeDaySeries) -> MeanTemperatureSeries {
    let base = system_hdd.base_temperature;
    let values = system_hdd.hdd.iter().map(|&h| base - 24.0 * h).collect();
    let cooling_not_captured = system_hdd.hdd.iter().map(|&h| h == 0.0).collect();
    MeanTemperatureSeries {
        values,
        cooling_not_captured,
    }
}

/// Average hourly HDD or CDD over the hours whose month is in `months`.
pub fn seasonal_average(dd: &[f64], timestamps: &[Timestamp], months: &[u32]) -> f64 {
    let (sum, n) = dd
        .iter()
        .zip(timestamps)
        .filter(|(_, t)| months.contains(&t.month()))
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
