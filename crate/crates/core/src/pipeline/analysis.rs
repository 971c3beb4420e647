use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::config::SCHEMA_VERSION;
use super::svg::{chart, Series, Style};
use super::table::ScenarioTable;
use crate::calendar::{format_timestamp, Timestamp};
use crate::error::{Error, Result};
use crate::grid::{
    daily_peaks, hourly_shortfall, requested_shed_report, savings_scatter, shortfall, GridSeries,
    SeasonSummary, ShortfallReport, Window,
};
use crate::retrofit::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortfallOutput {
    pub schema_version: u32,
    pub window: Window,
    /// The operator's requested shed over the same window.
    pub reference: ShortfallReport,
    pub scenarios: Vec<ShortfallReport>,
}

impl ShortfallOutput {
    pub fn get(&self, scenario: Scenario) -> Option<&ShortfallReport> {
        self.scenarios
            .iter()
            .find(|r| r.scenario == scenario.as_str())
    }
}

pub fn shortfall_stage(
    tables: &[ScenarioTable],
    grid: &GridSeries,
    window: Window,
) -> Result<ShortfallOutput> {
    let reference = requested_shed_report(grid, window)?;
    let scenarios = tables
        .iter()
        .map(|t| {
            if t.timestamps != grid.timestamps {
                return Err(Error::KeyMismatch(format!(
                    "{} demand and grid cover different hours",
                    t.scenario
                )));
            }
            shortfall(t.scenario.as_str(), &t.total_mw, grid, window)
        })
        .collect::<Result<_>>()?;
    Ok(ShortfallOutput {
        schema_version: SCHEMA_VERSION,
        window,
        reference,
        scenarios,
    })
}

fn window_range(
    timestamps: &[Timestamp],
    start: Timestamp,
    end: Timestamp,
) -> std::ops::Range<usize> {
    timestamps.partition_point(|t| *t < start)..timestamps.partition_point(|t| *t < end)
}

/// Hourly demand, generation and shortfall over the window, plus a chart.
pub fn shortfall_hourly(
    tables: &[ScenarioTable],
    grid: &GridSeries,
    window: Window,
) -> Result<(String, String)> {
    let gaps: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| hourly_shortfall(&t.total_mw, grid))
        .collect::<Result<_>>()?;
    let range = window_range(&grid.timestamps, window.start, window.end);
    let mut csv = String::from("timestamp,available_generation_mw,requested_shed_mw");
    for t in tables {
        let _ = write!(csv, ",{0}_demand_mw,{0}_shortfall_mw", t.scenario);
    }
    csv.push('\n');
    for h in range.clone() {
        let _ = write!(
            csv,
            "{},{:.3},{:.3}",
            format_timestamp(&grid.timestamps[h]),
            grid.available_generation_mw[h],
            grid.requested_shed_mw[h]
        );
        for (t, g) in tables.iter().zip(&gaps) {
            let _ = write!(csv, ",{:.3},{:.3}", t.total_mw[h], g[h]);
        }
        csv.push('\n');
    }
    let mut series: Vec<Series> = tables
        .iter()
        .zip(&gaps)
        .map(|(t, g)| Series {
            label: t.scenario.as_str(),
            points: range
                .clone()
                .map(|h| ((h - range.start) as f64, g[h] / 1000.0))
                .collect(),
        })
        .collect();
    series.push(Series {
        label: "requested shed",
        points: range
            .clone()
            .map(|h| ((h - range.start) as f64, grid.requested_shed_mw[h] / 1000.0))
            .collect(),
    });
    let svg = chart(
        "Electricity shortfall during the event window",
        "hours from window start",
        "GW",
        &series,
        Style::Line,
    );
    Ok((csv, svg))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub scenario: Scenario,
    /// Warmest heating hour of the analysis month at which the scenario's
    /// building demand exceeds baseline.
    pub temperature_c: Option<f64>,
    pub timestamp: Option<Timestamp>,
    /// Analysis-month heating hours with scenario demand above baseline.
    pub hours_above_baseline: usize,
    pub heating_hours: usize,
}

/// Compares building (residential plus commercial) demand against baseline
/// over analysis-month hours colder than `base_temperature`.
pub fn crossover(
    scenario: &ScenarioTable,
    baseline: &ScenarioTable,
    range: std::ops::Range<usize>,
    base_temperature: f64,
) -> Crossover {
    let s = scenario.buildings_mw();
    let b = baseline.buildings_mw();
    let mut out = Crossover {
        scenario: scenario.scenario,
        temperature_c: None,
        timestamp: None,
        hours_above_baseline: 0,
        heating_hours: 0,
    };
    for h in range {
        let t = scenario.mean_temp_c[h];
        if t >= base_temperature {
            continue;
        }
        out.heating_hours += 1;
        if s[h] > b[h] {
            out.hours_above_baseline += 1;
            if out.temperature_c.is_none_or(|best| t > best) {
                out.temperature_c = Some(t);
                out.timestamp = Some(scenario.timestamps[h]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSummary {
    pub scenario: Scenario,
    pub summer: Option<SeasonSummary>,
    pub winter: Option<SeasonSummary>,
    pub shoulder: Option<SeasonSummary>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportIndex {
    pub schema_version: u32,
    pub analysis_month: u32,
    pub scenarios: Vec<Scenario>,
    pub analysis_hours: usize,
    pub crossover: Vec<Crossover>,
    pub daily_peaks: Vec<PeakSummary>,
    pub files: Vec<String>,
}

/// All report files as (name, contents).
pub struct ReportFiles {
    pub files: Vec<(String, String)>,
    pub index: ReportIndex,
}

fn csv_header(first: &[&str], tables: &[&ScenarioTable], suffix: &str) -> String {
    let mut s = first.join(",");
    for t in tables {
        let _ = write!(s, ",{}{}", t.scenario, suffix);
    }
    s.push('\n');
    s
}

pub fn report_stage(
    tables: &[ScenarioTable],
    year: i32,
    analysis_month: u32,
    base_temperature: f64,
) -> Result<ReportFiles> {
    let first = tables
        .first()
        .ok_or_else(|| Error::missing("scenario demand tables"))?;
    if let Some(t) = tables.iter().find(|t| t.timestamps != first.timestamps) {
        return Err(Error::KeyMismatch(format!(
            "{} covers different hours",
            t.scenario
        )));
    }
    let ts = &first.timestamps;
    let (start, end) = super::config::month_window(year, analysis_month)
        .ok_or_else(|| Error::Config(format!("no month {analysis_month} in {year}")))?;
    let month = window_range(ts, start, end);
    if month.is_empty() {
        return Err(Error::Validation(format!(
            "no hours of month {analysis_month} in the demand tables"
        )));
    }
    let baseline = tables.iter().find(|t| t.scenario == Scenario::Baseline);
    let all: Vec<&ScenarioTable> = tables.iter().collect();
    let mut files: Vec<(String, String)> = Vec::new();

    // End-use stack for every scenario, long format.
    let mut stack =
        String::from("timestamp,scenario,heating_mw,cooling_mw,other_mw,industrial_mw\n");
    for t in tables {
        for h in 0..t.len() {
            let _ = writeln!(
                stack,
                "{},{},{:.3},{:.3},{:.3},{:.3}",
                format_timestamp(&ts[h]),
                t.scenario,
                t.heating_mw[h],
                t.cooling_mw[h],
                t.other_mw[h],
                t.industrial_mw[h]
            );
        }
    }
    files.push(("end_use_stack.csv".into(), stack));
    let stack_source = baseline.unwrap_or(first);
    let end_use_series = |label: &'static str, v: &Vec<f64>| Series {
        label,
        points: month
            .clone()
            .map(|h| ((h - month.start) as f64, v[h] / 1000.0))
            .collect(),
    };
    files.push((
        "end_use_stack.svg".into(),
        chart(
            &format!("{} building electricity by end use", stack_source.scenario),
            "hour of analysis month",
            "GW",
            &[
                end_use_series("heating", &stack_source.heating_mw),
                end_use_series("cooling", &stack_source.cooling_mw),
                end_use_series("other", &stack_source.other_mw),
            ],
            Style::Line,
        ),
    ));

    // Hourly system demand with mean temperature.
    let mut hourly = csv_header(&["timestamp", "mean_temp_c"], &all, "_total_mw");
    for h in 0..ts.len() {
        let _ = write!(
            hourly,
            "{},{:.3}",
            format_timestamp(&ts[h]),
            first.mean_temp_c[h]
        );
        for t in tables {
            let _ = write!(hourly, ",{:.3}", t.total_mw[h]);
        }
        hourly.push('\n');
    }
    files.push(("hourly_demand.csv".into(), hourly));
    let hourly_series: Vec<Series> = tables
        .iter()
        .map(|t| Series {
            label: t.scenario.as_str(),
            points: month
                .clone()
                .map(|h| ((h - month.start) as f64, t.total_mw[h] / 1000.0))
                .collect(),
        })
        .collect();
    files.push((
        "hourly_demand.svg".into(),
        chart(
            "System demand by scenario",
            "hour of analysis month",
            "GW",
            &hourly_series,
            Style::Line,
        ),
    ));

    // Temperature against building demand over the analysis month.
    let buildings: Vec<Vec<f64>> = tables.iter().map(|t| t.buildings_mw()).collect();
    let mut tvd = csv_header(&["timestamp", "mean_temp_c"], &all, "_buildings_mw");
    for h in month.clone() {
        let _ = write!(
            tvd,
            "{},{:.3}",
            format_timestamp(&ts[h]),
            first.mean_temp_c[h]
        );
        for b in &buildings {
            let _ = write!(tvd, ",{:.3}", b[h]);
        }
        tvd.push('\n');
    }
    files.push(("temperature_vs_demand.csv".into(), tvd));
    let tvd_series: Vec<Series> = tables
        .iter()
        .zip(&buildings)
        .map(|(t, b)| Series {
            label: t.scenario.as_str(),
            points: month
                .clone()
                .map(|h| (first.mean_temp_c[h], b[h] / 1000.0))
                .collect(),
        })
        .collect();
    files.push((
        "temperature_vs_demand.svg".into(),
        chart(
            "Residential and commercial demand against mean temperature",
            "population-weighted mean temperature (°C)",
            "GW",
            &tvd_series,
            Style::Scatter,
        ),
    ));

    // Savings relative to baseline.
    let mut crossovers = Vec::new();
    if let Some(base) = baseline {
        let others: Vec<&ScenarioTable> = tables
            .iter()
            .filter(|t| t.scenario != Scenario::Baseline)
            .collect();
        let base_b = base.buildings_mw();
        let m_ts = &ts[month.clone()];
        let m_temp = &first.mean_temp_c[month.clone()];
        let mut columns: Vec<BTreeMap<Timestamp, f64>> = Vec::new();
        let mut savings_series = Vec::new();
        for t in &others {
            let scatter = savings_scatter(
                m_ts,
                &t.buildings_mw()[month.clone()],
                &base_b[month.clone()],
                m_temp,
            )?;
            columns.push(
                scatter
                    .points
                    .iter()
                    .map(|p| (p.timestamp, p.savings_fraction))
                    .collect(),
            );
            savings_series.push(Series {
                label: t.scenario.as_str(),
                points: scatter
                    .points
                    .iter()
                    .map(|p| (p.mean_temp_c, 100.0 * p.savings_fraction))
                    .collect(),
            });
            crossovers.push(crossover(t, base, month.clone(), base_temperature));
        }
        let mut tvs = csv_header(&["timestamp", "mean_temp_c"], &others, "_savings_pct");
        for h in month.clone() {
            let _ = write!(
                tvs,
                "{},{:.3}",
                format_timestamp(&ts[h]),
                first.mean_temp_c[h]
            );
            for c in &columns {
                match c.get(&ts[h]) {
                    Some(v) => {
                        let _ = write!(tvs, ",{:.4}", 100.0 * v);
                    }
                    None => tvs.push(','),
                }
            }
            tvs.push('\n');
        }
        files.push(("temperature_vs_savings.csv".into(), tvs));
        files.push((
            "temperature_vs_savings.svg".into(),
            chart(
                "Building electricity savings against mean temperature",
                "population-weighted mean temperature (°C)",
                "savings (%)",
                &savings_series,
                Style::Scatter,
            ),
        ));
    }

    // Daily peaks.
    let peaks: Vec<_> = tables
        .iter()
        .map(|t| daily_peaks(ts, &t.total_mw))
        .collect::<Result<_>>()?;
    let days: Vec<NaiveDate> = peaks[0].days.iter().map(|(d, _)| *d).collect();
    let mut dp = csv_header(&["date"], &all, "_peak_mw");
    for (i, d) in days.iter().enumerate() {
        let _ = write!(dp, "{d}");
        for p in &peaks {
            let _ = write!(dp, ",{:.3}", p.days[i].1);
        }
        dp.push('\n');
    }
    files.push(("daily_peaks.csv".into(), dp));
    let dp_series: Vec<Series> = tables
        .iter()
        .zip(&peaks)
        .map(|(t, p)| Series {
            label: t.scenario.as_str(),
            points: p
                .days
                .iter()
                .map(|(d, v)| (d.ordinal() as f64, v / 1000.0))
                .collect(),
        })
        .collect();
    files.push((
        "daily_peaks.svg".into(),
        chart(
            "Daily peak demand",
            "day of year",
            "GW",
            &dp_series,
            Style::Line,
        ),
    ));
    let peak_summaries: Vec<PeakSummary> = tables
        .iter()
        .zip(peaks)
        .map(|(t, p)| PeakSummary {
            scenario: t.scenario,
            summer: p.summer,
            winter: p.winter,
            shoulder: p.shoulder,
            warnings: p.warnings,
        })
        .collect();

    let mut names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    names.push("report.json".into());
    names.sort();
    let index = ReportIndex {
        schema_version: SCHEMA_VERSION,
        analysis_month,
        scenarios: tables.iter().map(|t| t.scenario).collect(),
        analysis_hours: month.len(),
        crossover: crossovers,
        daily_peaks: peak_summaries,
        files: names,
    };
    Ok(ReportFiles { files, index })
}
