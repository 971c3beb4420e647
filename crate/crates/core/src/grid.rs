//! System-level analytics: sector decomposition, scenario composition,
//! operator-estimated demand and electricity shortfall during load shed.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::calendar::{parse_timestamp, Timestamp};
use crate::error::{Error, Result};
use crate::weather::csv_error;

/// Hourly operator data for the study year.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSeries {
    pub timestamps: Vec<Timestamp>,
    pub served_load_mw: Vec<f64>,
    pub available_generation_mw: Vec<f64>,
    pub requested_shed_mw: Vec<f64>,
    /// Back-cast load had no shed occurred; present at least on shed hours.
    pub estimated_load_without_shed_mw: Vec<Option<f64>>,
}

fn parse_err(path: &Path, line: u64, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn parse_mw(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} `{field}`")))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(parse_err(
            path,
            line,
            format!("{what} {v} must be nonnegative"),
        ));
    }
    Ok(v)
}

impl GridSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for len in [
            self.served_load_mw.len(),
            self.available_generation_mw.len(),
            self.requested_shed_mw.len(),
            self.estimated_load_without_shed_mw.len(),
        ] {
            if len != n {
                return Err(Error::Alignment {
                    expected: n,
                    found: len,
                });
            }
        }
        let all = self
            .served_load_mw
            .iter()
            .chain(&self.available_generation_mw)
            .chain(&self.requested_shed_mw)
            .chain(self.estimated_load_without_shed_mw.iter().flatten());
        if let Some(v) = all.into_iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!(
                "grid value {v} must be nonnegative"
            )));
        }
        if self.timestamps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Structure(
                "grid timestamps must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Reads `timestamp,served_mw,available_generation_mw,requested_shed_mw,X`
    /// where `X` is `estimated_unserved_mw` (load lost to shed; the estimate
    /// is served + unserved) or `estimated_load_without_shed_mw`. Blank
    /// cells in the last column mean no estimate for that hour.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        let lead = [
            "timestamp",
            "served_mw",
            "available_generation_mw",
            "requested_shed_mw",
        ];
        let additive = match names.as_slice() {
            [a, b, c, d, e] if [*a, *b, *c, *d] == lead && *e == "estimated_unserved_mw" => true,
            [a, b, c, d, e] if [*a, *b, *c, *d] == lead && *e == "estimated_load_without_shed_mw" => false,
            _ => {
                return Err(parse_err(
                    path,
                    1,
                    "expected header `timestamp,served_mw,available_generation_mw,requested_shed_mw,estimated_unserved_mw`"
                        .into(),
                ))
            }
        };
        let mut grid = GridSeries {
            timestamps: Vec::new(),
            served_load_mw: Vec::new(),
            available_generation_mw: Vec::new(),
            requested_shed_mw: Vec::new(),
            estimated_load_without_shed_mw: Vec::new(),
        };
        for (i, record) in reader.records().enumerate() {
            let line = i as u64 + 2;
            let r = record.map_err(|e| csv_error(path, e))?;
            let ts = parse_timestamp(&r[0])
                .ok_or_else(|| parse_err(path, line, format!("bad timestamp `{}`", &r[0])))?;
            let served = parse_mw(path, line, &r[1], "served_mw")?;
            grid.timestamps.push(ts);
            grid.served_load_mw.push(served);
            grid.available_generation_mw.push(parse_mw(
                path,
                line,
                &r[2],
                "available_generation_mw",
            )?);
            grid.requested_shed_mw
                .push(parse_mw(path, line, &r[3], "requested_shed_mw")?);
            let est = if r[4].trim().is_empty() {
                None
            } else {
                let v = parse_mw(path, line, &r[4], names[4])?;
                Some(if additive { served + v } else { v })
            };
            grid.estimated_load_without_shed_mw.push(est);
        }
        grid.validate()?;
        Ok(grid)
    }
}

/// Hourly customer-class shares of served load.
#[derive(Debug, Clone, PartialEq)]
pub struct SectoralFractions {
    pub timestamps: Vec<Timestamp>,
    pub residential: Vec<f64>,
    pub commercial: Vec<f64>,
    pub industrial: Vec<f64>,
}

impl SectoralFractions {
    pub fn validate(&self) -> Result<()> {
        let n = self.timestamps.len();
        for len in [
            self.residential.len(),
            self.commercial.len(),
            self.industrial.len(),
        ] {
            if len != n {
                return Err(Error::Alignment {
                    expected: n,
                    found: len,
                });
            }
        }
        for h in 0..n {
            let f = [self.residential[h], self.commercial[h], self.industrial[h]];
            if f.iter().any(|v| !(0.0..=1.0).contains(v))
                || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(Error::Validation(format!(
                    "sector fractions {f:?} at {} do not form a partition",
                    self.timestamps[h]
                )));
            }
        }
        Ok(())
    }

    /// Reads `timestamp,res_frac,com_frac,ind_frac`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            timestamp: String,
            res_frac: f64,
            com_frac: f64,
            ind_frac: f64,
        }
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut out = SectoralFractions {
            timestamps: Vec::new(),
            residential: Vec::new(),
            commercial: Vec::new(),
            industrial: Vec::new(),
        };
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| csv_error(path, e))?;
            let ts = parse_timestamp(&row.timestamp).ok_or_else(|| {
                parse_err(
                    path,
                    i as u64 + 2,
                    format!("bad timestamp `{}`", row.timestamp),
                )
            })?;
            out.timestamps.push(ts);
            out.residential.push(row.res_frac);
            out.commercial.push(row.com_frac);
            out.industrial.push(row.ind_frac);
        }
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorLoads {
    pub residential: Vec<f64>,
    pub commercial: Vec<f64>,
    pub industrial: Vec<f64>,
}

/// Splits served load by the hourly fractions. Industrial takes the
/// remainder so `(residential + commercial) + industrial` reproduces served
/// load.
pub fn decompose_sectors(grid: &GridSeries, fractions: &SectoralFractions) -> Result<SectorLoads> {
    fractions.validate()?;
    if fractions.timestamps != grid.timestamps {
        return Err(Error::KeyMismatch(
            "sector fractions and grid series cover different hours".into(),
        ));
    }
    let n = grid.len();
    let mut loads = SectorLoads {
        residential: Vec::with_capacity(n),
        commercial: Vec::with_capacity(n),
        industrial: Vec::with_capacity(n),
    };
    for h in 0..n {
        let served = grid.served_load_mw[h];
        let res = fractions.residential[h] * served;
        let (com, ind) = close_partition(served, res, fractions.commercial[h] * served);
        loads.residential.push(res);
        loads.commercial.push(com);
        loads.industrial.push(ind);
    }
    Ok(loads)
}

/// Nonnegative `r` with `part + r == total` exactly, if one lies within a
/// few ulps of the plain difference.
fn remainder(total: f64, part: f64) -> Option<f64> {
    let r = (total - part).max(0.0);
    let (mut down, mut up) = (r, r);
    for _ in 0..4 {
        if part + up == total {
            return Some(up);
        }
        if part + down == total {
            return Some(down);
        }
        up = up.next_up();
        down = down.next_down().max(0.0);
    }
    None
}

/// Commercial and industrial loads such that `(res + com) + ind` reproduces
/// `served` bit for bit. Commercial absorbs rounding of a few ulps: the
/// residential + commercial sum is snapped to a multiple of `ulp(served)`,
/// which makes the industrial remainder exactly representable.
fn close_partition(served: f64, res: f64, com: f64) -> (f64, f64) {
    if let Some(ind) = remainder(served, res + com) {
        return (com, ind);
    }
    let u = served.next_up() - served;
    let snapped = ((res + com) / u).round() * u;
    for k in [0.0, -1.0, 1.0, -2.0, 2.0] {
        let target = snapped + k * u;
        if target < res || target > served {
            continue;
        }
        let c0 = (target - res).max(0.0);
        let (mut down, mut up) = (c0, c0);
        for _ in 0..8 {
            for c in [down, up] {
                if res + c == target {
                    if let Some(ind) = remainder(served, target) {
                        return (c, ind);
                    }
                }
            }
            down = down.next_down().max(0.0);
            up = up.next_up();
        }
    }
    (com, (served - (res + com)).max(0.0))
}

pub fn compose_demand(
    residential: &[f64],
    commercial: &[f64],
    industrial: &[f64],
) -> Result<Vec<f64>> {
    let n = industrial.len();
    for len in [residential.len(), commercial.len()] {
        if len != n {
            return Err(Error::Alignment {
                expected: n,
                found: len,
            });
        }
    }
    Ok((0..n)
        .map(|h| residential[h] + commercial[h] + industrial[h])
        .collect())
}

/// Operator estimate on shed hours, served load elsewhere.
pub fn ercot_estimated_demand(grid: &GridSeries) -> Result<Vec<f64>> {
    (0..grid.len())
        .map(|h| {
            if grid.requested_shed_mw[h] > 0.0 {
                grid.estimated_load_without_shed_mw[h].ok_or_else(|| {
                    Error::missing(format!(
                        "estimated load without shed at {}",
                        grid.timestamps[h]
                    ))
                })
            } else {
                Ok(grid.served_load_mw[h])
            }
        })
        .collect()
}

/// Half-open hour range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Window {
    fn indices(&self, timestamps: &[Timestamp]) -> Result<std::ops::Range<usize>> {
        if self.end <= self.start {
            return Err(Error::Validation(format!(
                "empty window {} .. {}",
                self.start, self.end
            )));
        }
        let (Some(first), Some(last)) = (timestamps.first(), timestamps.last()) else {
            return Err(Error::Validation("window over an empty series".into()));
        };
        if self.start < *first || self.end > *last + chrono::Duration::hours(1) {
            return Err(Error::Validation(format!(
                "window {} .. {} outside data {} .. {}",
                self.start, self.end, first, last
            )));
        }
        let lo = timestamps.partition_point(|t| *t < self.start);
        let hi = timestamps.partition_point(|t| *t < self.end);
        Ok(lo..hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortfallReport {
    pub scenario: String,
    pub shortfall_hours: usize,
    pub peak_mw: f64,
    /// Shortfall over demand at the peak shortfall hour.
    pub peak_pct_of_demand: f64,
    pub total_gwh: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_timestamp: Option<Timestamp>,
}

/// `max(0, demand − available)` where shed was requested, zero elsewhere.
pub fn hourly_shortfall(demand: &[f64], grid: &GridSeries) -> Result<Vec<f64>> {
    if demand.len() != grid.len() {
        return Err(Error::Alignment {
            expected: grid.len(),
            found: demand.len(),
        });
    }
    Ok((0..grid.len())
        .map(|h| {
            if grid.requested_shed_mw[h] > 0.0 {
                (demand[h] - grid.available_generation_mw[h]).max(0.0)
            } else {
                0.0
            }
        })
        .collect())
}

fn summarize(
    scenario: &str,
    gap: &[f64],
    denominator: &[f64],
    timestamps: &[Timestamp],
) -> ShortfallReport {
    let mut report = ShortfallReport {
        scenario: scenario.to_string(),
        shortfall_hours: 0,
        peak_mw: 0.0,
        peak_pct_of_demand: 0.0,
        total_gwh: 0.0,
        peak_timestamp: None,
    };
    let mut total_mwh = 0.0;
    for (h, &g) in gap.iter().enumerate() {
        if g > 0.0 {
            report.shortfall_hours += 1;
            total_mwh += g;
            if g > report.peak_mw {
                report.peak_mw = g;
                report.peak_pct_of_demand = if denominator[h] > 0.0 {
                    g / denominator[h]
                } else {
                    0.0
                };
                report.peak_timestamp = Some(timestamps[h]);
            }
        }
    }
    report.total_gwh = total_mwh / 1000.0;
    report
}

pub fn shortfall(
    scenario: &str,
    demand: &[f64],
    grid: &GridSeries,
    window: Window,
) -> Result<ShortfallReport> {
    let gap = hourly_shortfall(demand, grid)?;
    let r = window.indices(&grid.timestamps)?;
    Ok(summarize(
        scenario,
        &gap[r.clone()],
        &demand[r.clone()],
        &grid.timestamps[r],
    ))
}

/// The operator's own requested shed as a report row; the percentage is
/// relative to operator-estimated demand.
pub fn requested_shed_report(grid: &GridSeries, window: Window) -> Result<ShortfallReport> {
    let estimated = ercot_estimated_demand(grid)?;
    let r = window.indices(&grid.timestamps)?;
    Ok(summarize(
        "ercot_requested_load_shed",
        &grid.requested_shed_mw[r.clone()],
        &estimated[r.clone()],
        &grid.timestamps[r],
    ))
}

/// The smallest window covering every hour with requested shed.
pub fn shed_window(grid: &GridSeries) -> Option<Window> {
    let first = grid.requested_shed_mw.iter().position(|v| *v > 0.0)?;
    let last = grid.requested_shed_mw.iter().rposition(|v| *v > 0.0)?;
    Some(Window {
        start: grid.timestamps[first],
        end: grid.timestamps[last] + chrono::Duration::hours(1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonSummary {
    pub min_mw: f64,
    pub max_mw: f64,
    pub range_mw: f64,
    pub mean_mw: f64,
    pub days: usize,
}

impl SeasonSummary {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.collect();
        if v.is_empty() {
            return None;
        }
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(SeasonSummary {
            min_mw: min,
            max_mw: max,
            range_mw: max - min,
            mean_mw: v.iter().sum::<f64>() / v.len() as f64,
            days: v.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyPeaks {
    pub days: Vec<(NaiveDate, f64)>,
    /// June to August.
    pub summer: Option<SeasonSummary>,
    /// January, February and December.
    pub winter: Option<SeasonSummary>,
    /// March to May and September to November.
    pub shoulder: Option<SeasonSummary>,
    pub warnings: Vec<String>,
}

/// Daily maxima. Days with fewer than 24 hours are left out.
pub fn daily_peaks(timestamps: &[Timestamp], demand: &[f64]) -> Result<DailyPeaks> {
    if demand.len() != timestamps.len() {
        return Err(Error::Alignment {
            expected: timestamps.len(),
            found: demand.len(),
        });
    }
    let mut by_day: BTreeMap<NaiveDate, (usize, f64)> = BTreeMap::new();
    for (ts, &v) in timestamps.iter().zip(demand) {
        let e = by_day.entry(ts.date()).or_insert((0, f64::NEG_INFINITY));
        e.0 += 1;
        e.1 = e.1.max(v);
    }
    let mut warnings = Vec::new();
    let mut days = Vec::new();
    for (date, (hours, peak)) in by_day {
        if hours < 24 {
            let msg = format!("{date} has {hours} hours and was left out of daily peaks");
            log::warn!("{msg}");
            warnings.push(msg);
        } else {
            days.push((date, peak));
        }
    }
    let season = |months: &[u32]| {
        SeasonSummary::of(
            days.iter()
                .filter(|(d, _)| months.contains(&d.month()))
                .map(|(_, p)| *p),
        )
    };
    Ok(DailyPeaks {
        summer: season(&[6, 7, 8]),
        winter: season(&[1, 2, 12]),
        shoulder: season(&[3, 4, 5, 9, 10, 11]),
        days,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsPoint {
    pub timestamp: Timestamp,
    pub mean_temp_c: f64,
    /// `(baseline − scenario) / baseline`; negative when the scenario uses more.
    pub savings_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingsScatter {
    pub points: Vec<SavingsPoint>,
    pub skipped_hours: usize,
}

pub fn savings_scatter(
    timestamps: &[Timestamp],
    scenario: &[f64],
    baseline: &[f64],
    mean_temp: &[f64],
) -> Result<SavingsScatter> {
    let n = timestamps.len();
    for len in [scenario.len(), baseline.len(), mean_temp.len()] {
        if len != n {
            return Err(Error::Alignment {
                expected: n,
                found: len,
            });
        }
    }
    let mut points = Vec::with_capacity(n);
    let mut skipped_hours = 0;
    for h in 0..n {
        if baseline[h] == 0.0 {
            skipped_hours += 1;
            continue;
        }
        points.push(SavingsPoint {
            timestamp: timestamps[h],
            mean_temp_c: mean_temp[h],
            savings_fraction: (baseline[h] - scenario[h]) / baseline[h],
        });
    }
    if skipped_hours > 0 {
        log::warn!(
            "{skipped_hours} hours with zero baseline demand left out of the savings scatter"
        );
    }
    Ok(SavingsScatter {
        points,
        skipped_hours,
    })
}
