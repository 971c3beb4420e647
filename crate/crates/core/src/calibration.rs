//! Monthly multiplicative bias factors between modeled and served load.
//!
//! February takes January's factor because served load in February is
//! depressed by load shed and does not measure demand.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::calendar::{parse_timestamp, Timestamp};
use crate::error::{Error, Result};
use crate::stock::Sector;
use crate::weather::csv_error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyBiasFactors {
    pub schema_version: u32,
    pub sector: Sector,
    pub factors: BTreeMap<u32, f64>,
    /// Month whose totals produced each factor.
    pub provenance: BTreeMap<u32, u32>,
}

impl MonthlyBiasFactors {
    pub fn factor(&self, month: u32) -> Result<f64> {
        self.factors
            .get(&month)
            .copied()
            .ok_or_else(|| Error::missing(format!("bias factor for month {month}")))
    }

    pub fn to_json_file(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

fn source_month(month: u32) -> u32 {
    if month == 2 {
        1
    } else {
        month
    }
}

fn monthly_totals(values: &[f64], timestamps: &[Timestamp]) -> BTreeMap<u32, f64> {
    let mut totals = BTreeMap::new();
    for (v, ts) in values.iter().zip(timestamps) {
        *totals.entry(ts.month()).or_insert(0.0) += v;
    }
    totals
}

/// `factor[m] = Σ served[m] / Σ modeled[m]`, with February using January.
pub fn compute_factors(
    sector: Sector,
    modeled: &[f64],
    served: &[f64],
    timestamps: &[Timestamp],
) -> Result<MonthlyBiasFactors> {
    for len in [modeled.len(), served.len()] {
        if len != timestamps.len() {
            return Err(Error::Alignment {
                expected: timestamps.len(),
                found: len,
            });
        }
    }
    let modeled_totals = monthly_totals(modeled, timestamps);
    let served_totals = monthly_totals(served, timestamps);
    let mut factors = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    for month in 1..=12 {
        let source = source_month(month);
        let (Some(&m), Some(&s)) = (modeled_totals.get(&source), served_totals.get(&source)) else {
            return Err(Error::Structure(format!("no hours in month {source}")));
        };
        if !(m > 0.0) {
            return Err(Error::UndefinedFactor { month: source });
        }
        factors.insert(month, s / m);
        provenance.insert(month, source);
    }
    Ok(MonthlyBiasFactors {
        schema_version: SCHEMA_VERSION,
        sector,
        factors,
        provenance,
    })
}

/// Multiplies each hour by its month's factor.
pub fn apply_factors(
    profile: &[f64],
    timestamps: &[Timestamp],
    factors: &MonthlyBiasFactors,
) -> Result<Vec<f64>> {
    if profile.len() != timestamps.len() {
        return Err(Error::Alignment {
            expected: timestamps.len(),
            found: profile.len(),
        });
    }
    profile
        .iter()
        .zip(timestamps)
        .map(|(v, ts)| factors.factor(ts.month()).map(|f| v * f))
        .collect()
}

/// Served load per sector, read from `timestamp,sector,served_mw` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ServedLoad {
    pub timestamps: Vec<Timestamp>,
    pub by_sector: BTreeMap<String, Vec<f64>>,
}

impl ServedLoad {
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut rows: BTreeMap<String, Vec<(Timestamp, f64)>> = BTreeMap::new();
        for (i, record) in reader.records().enumerate() {
            let line = i as u64 + 2;
            let record = record.map_err(|e| csv_error(path, e))?;
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            };
            if record.len() != 3 {
                return Err(parse_err(format!(
                    "expected 3 fields, found {}",
                    record.len()
                )));
            }
            let ts = parse_timestamp(&record[0])
                .ok_or_else(|| parse_err(format!("bad timestamp `{}`", &record[0])))?;
            let mw: f64 = record[2]
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad served_mw `{}`", &record[2])))?;
            if !(mw.is_finite() && mw >= 0.0) {
                return Err(parse_err(format!("served_mw {mw} must be nonnegative")));
            }
            rows.entry(record[1].trim().to_string())
                .or_default()
                .push((ts, mw));
        }
        let mut timestamps: Option<Vec<Timestamp>> = None;
        let mut by_sector = BTreeMap::new();
        for (sector, mut series) in rows {
            series.sort_by_key(|(t, _)| *t);
            let ts: Vec<Timestamp> = series.iter().map(|(t, _)| *t).collect();
            if ts.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Structure(format!(
                    "duplicate hours for sector {sector}"
                )));
            }
            match &timestamps {
                None => timestamps = Some(ts),
                Some(existing) if *existing != ts => {
                    return Err(Error::KeyMismatch(format!(
                        "sector {sector} covers different hours"
                    )))
                }
                Some(_) => {}
            }
            by_sector.insert(sector, series.into_iter().map(|(_, v)| v).collect());
        }
        Ok(ServedLoad {
            timestamps: timestamps
                .ok_or_else(|| Error::Structure(format!("{} has no rows", path.display())))?,
            by_sector,
        })
    }

    pub fn sector(&self, name: &str) -> Result<&[f64]> {
        self.by_sector
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::missing(format!("served load for sector {name}")))
    }
}
