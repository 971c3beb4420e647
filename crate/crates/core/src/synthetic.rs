//! Deterministic generator for the shipped Texas-like fixture set.
//!
//! Weather for eight zones is a seasonal cycle plus a diurnal cycle plus
//! correlated AR(1) noise. Each zone's mean and seasonal amplitude are solved
//! so its summer CDD and winter HDD hit published station averages. The 2021
//! year carries a mid-February arctic outbreak scaled so the coldest
//! population-weighted mean temperature is −14.2 °C. Grid data is an
//! ERCOT-like degree-day load model with a 71-hour load-shed window.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Timelike};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calendar::{format_timestamp, year_timestamps, Timestamp};
use crate::error::{Error, Result};
use crate::grid::{GridSeries, SectoralFractions};
use crate::weather::{
    hourly_degree_days, mean_temperature, population_weighted_dd, DegreeDaySeries,
    PopulationWeightSet, ZoneId, ZoneWeatherSeries, DEFAULT_BASE_TEMPERATURE_C,
};

/// Coldest population-weighted mean temperature of the 2021 fixture, °C.
pub const URI_COLDEST_MEAN_C: f64 = -14.2;
/// Operator-estimated peak demand during the shed window, MW.
pub const URI_ESTIMATED_PEAK_MW: f64 = 76_819.0;
pub const SHED_PEAK_MW: f64 = 20_000.0;
pub const SHED_BASE_MW: f64 = 14_000.0;
/// Estimated demand in the hour of peak shed.
pub const SHED_PEAK_ESTIMATE_MW: f64 = 68_000.0;

pub struct ZoneClimate {
    pub zone: &'static str,
    pub station: &'static str,
    pub population: f64,
    /// June–August average hourly CDD target.
    pub summer_cdd: f64,
    /// December–February average hourly HDD target.
    pub winter_hdd: f64,
    pub diurnal_amplitude_c: f64,
    /// Relative depth of the February outbreak.
    pub outbreak_depth: f64,
}

pub const ZONES: [ZoneClimate; 8] = [
    ZoneClimate {
        zone: "coast",
        station: "KIAH",
        population: 7_100_000.0,
        summer_cdd: 0.42,
        winter_hdd: 0.23,
        diurnal_amplitude_c: 4.0,
        outbreak_depth: 0.80,
    },
    ZoneClimate {
        zone: "east",
        station: "KTYR",
        population: 1_300_000.0,
        summer_cdd: 0.38,
        winter_hdd: 0.36,
        diurnal_amplitude_c: 5.0,
        outbreak_depth: 0.95,
    },
    ZoneClimate {
        zone: "far_west",
        station: "KMAF",
        population: 550_000.0,
        summer_cdd: 0.32,
        winter_hdd: 0.45,
        diurnal_amplitude_c: 7.0,
        outbreak_depth: 0.95,
    },
    ZoneClimate {
        zone: "north",
        station: "KSPS",
        population: 520_000.0,
        summer_cdd: 0.36,
        winter_hdd: 0.49,
        diurnal_amplitude_c: 6.0,
        outbreak_depth: 1.10,
    },
    ZoneClimate {
        zone: "north_central",
        station: "KDFW",
        population: 8_700_000.0,
        summer_cdd: 0.42,
        winter_hdd: 0.38,
        diurnal_amplitude_c: 5.0,
        outbreak_depth: 1.05,
    },
    ZoneClimate {
        zone: "south",
        station: "KCRP",
        population: 2_600_000.0,
        summer_cdd: 0.41,
        winter_hdd: 0.19,
        diurnal_amplitude_c: 4.0,
        outbreak_depth: 0.70,
    },
    ZoneClimate {
        zone: "south_central",
        station: "KAUS",
        population: 4_200_000.0,
        summer_cdd: 0.36,
        winter_hdd: 0.29,
        diurnal_amplitude_c: 5.5,
        outbreak_depth: 0.90,
    },
    ZoneClimate {
        zone: "west",
        station: "KABI",
        population: 1_300_000.0,
        summer_cdd: 0.38,
        winter_hdd: 0.41,
        diurnal_amplitude_c: 6.0,
        outbreak_depth: 1.05,
    },
];

const SUMMER: [u32; 3] = [6, 7, 8];
const WINTER: [u32; 3] = [12, 1, 2];
const NOISE_SD_C: f64 = 3.0;
const NOISE_HOURS: f64 = 60.0;

pub fn population_weights() -> PopulationWeightSet {
    PopulationWeightSet::from_populations(
        ZONES
            .iter()
            .map(|z| (ZoneId::from(z.zone), z.population))
            .collect(),
    )
    .expect("fixture populations are positive")
}

fn hours_since(ts: &Timestamp, date: (i32, u32, u32), hour: u32) -> f64 {
    let anchor = NaiveDate::from_ymd_opt(date.0, date.1, date.2)
        .and_then(|d| d.and_hms_opt(hour, 0, 0))
        .expect("valid anchor date");
    (*ts - anchor).num_minutes() as f64 / 60.0
}

/// Cold-outbreak envelope in [0, 1]: a skewed bell with a slow onset and a
/// faster recovery.
fn outbreak_envelope(
    ts: &Timestamp,
    peak: (i32, u32, u32),
    peak_hour: u32,
    onset_h: f64,
    recovery_h: f64,
) -> f64 {
    let dt = hours_since(ts, peak, peak_hour);
    let width = if dt < 0.0 { onset_h } else { recovery_h };
    let e = (-(dt / width).powi(2)).exp();
    if e < 1e-4 {
        0.0
    } else {
        e
    }
}

struct YearShape {
    timestamps: Vec<Timestamp>,
    /// Seasonal cycle with unit amplitude, peaking in late July.
    seasonal: Vec<f64>,
    /// Diurnal cycle with unit amplitude, warmest at 15:00.
    diurnal: Vec<f64>,
    /// Per-zone correlated noise, °C.
    noise: Vec<Vec<f64>>,
    /// Outbreak envelope in [0, 1].
    outbreak: Vec<f64>,
}

fn ar1(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let rho = (-1.0 / NOISE_HOURS).exp();
    let innovation = (1.0 - rho * rho).sqrt();
    let mut x: f64 = StandardNormal.sample(rng);
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(rng);
            x = rho * x + innovation * e;
            x
        })
        .collect()
}

fn year_shape(year: i32, seed: u64) -> Result<YearShape> {
    let timestamps = year_timestamps(year)?;
    let n = timestamps.len();
    let seasonal = timestamps
        .iter()
        .map(|t| (2.0 * PI * (t.ordinal0() as f64 + t.hour() as f64 / 24.0 - 200.0) / 365.25).cos())
        .collect();
    let diurnal = timestamps
        .iter()
        .map(|t| (2.0 * PI * (t.hour() as f64 - 15.0) / 24.0).cos())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let common = ar1(&mut rng, n);
    let noise = ZONES
        .iter()
        .map(|_| {
            let local = ar1(&mut rng, n);
            (0..n)
                .map(|h| NOISE_SD_C * (0.8 * common[h] + 0.6 * local[h]))
                .collect()
        })
        .collect();
    let outbreak = timestamps
        .iter()
        .map(|t| match year {
            2021 => outbreak_envelope(t, (2021, 2, 16), 6, 80.0, 55.0),
            2018 => 0.55 * outbreak_envelope(t, (2018, 1, 17), 6, 30.0, 30.0),
            _ => 0.0,
        })
        .collect();
    Ok(YearShape {
        timestamps,
        seasonal,
        diurnal,
        noise,
        outbreak,
    })
}

/// Depth of the outbreak at full envelope for a zone with depth factor 1, °C.
const DEFAULT_OUTBREAK_C: f64 = 24.0;

fn zone_temperatures(
    shape: &YearShape,
    z: usize,
    mean: f64,
    amplitude: f64,
    outbreak_c: f64,
) -> Vec<f64> {
    (0..shape.timestamps.len())
        .map(|h| zone_temperature_at(shape, z, h, mean, amplitude, outbreak_c))
        .collect()
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f is increasing in its argument; finds the root.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    0.5 * (lo + hi)
}

struct SeasonHours {
    summer: Vec<usize>,
    winter: Vec<usize>,
}

impl SeasonHours {
    fn of(shape: &YearShape) -> Self {
        let pick = |months: &[u32]| {
            (0..shape.timestamps.len())
                .filter(|&h| months.contains(&shape.timestamps[h].month()))
                .collect()
        };
        SeasonHours {
            summer: pick(&SUMMER),
            winter: pick(&WINTER),
        }
    }
}

fn zone_temperature_at(
    shape: &YearShape,
    z: usize,
    h: usize,
    mean: f64,
    amplitude: f64,
    outbreak_c: f64,
) -> f64 {
    let c = &ZONES[z];
    let e = shape.outbreak[h];
    mean + amplitude * shape.seasonal[h]
        + c.diurnal_amplitude_c * (1.0 - 0.6 * e) * shape.diurnal[h]
        + (1.0 - e) * shape.noise[z][h]
        - e * outbreak_c * c.outbreak_depth
}

/// Summer CDD and winter HDD averages for one zone's parameters.
fn seasonal_dd(
    shape: &YearShape,
    hours: &SeasonHours,
    z: usize,
    mean: f64,
    amplitude: f64,
    outbreak_c: f64,
) -> (f64, f64) {
    let base = DEFAULT_BASE_TEMPERATURE_C;
    let avg = |idx: &[usize], f: &dyn Fn(f64) -> f64| {
        idx.iter()
            .map(|&h| {
                f(zone_temperature_at(
                    shape, z, h, mean, amplitude, outbreak_c,
                ))
            })
            .sum::<f64>()
            / idx.len() as f64
    };
    (
        avg(&hours.summer, &|t| (t - base).max(0.0) / 24.0),
        avg(&hours.winter, &|t| (base - t).max(0.0) / 24.0),
    )
}

/// Mean and amplitude reproducing a zone's summer CDD and winter HDD.
fn solve_climate(shape: &YearShape, hours: &SeasonHours, z: usize, outbreak_c: f64) -> (f64, f64) {
    let c = &ZONES[z];
    let mean_for = |amplitude: f64| {
        bisect(0.0, 40.0, |mean| {
            seasonal_dd(shape, hours, z, mean, amplitude, outbreak_c).0 - c.summer_cdd
        })
    };
    let amplitude = bisect(0.0, 25.0, |amplitude| {
        let mean = mean_for(amplitude);
        seasonal_dd(shape, hours, z, mean, amplitude, outbreak_c).1 - c.winter_hdd
    });
    (mean_for(amplitude), amplitude)
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

fn weighted_mean_temperature(
    series: &BTreeMap<ZoneId, ZoneWeatherSeries>,
) -> Result<(DegreeDaySeries, Vec<f64>)> {
    let per_zone = series
        .iter()
        .map(|(z, s)| (z.clone(), hourly_degree_days(s, DEFAULT_BASE_TEMPERATURE_C)))
        .collect();
    let dd = population_weighted_dd(&per_zone, &population_weights())?;
    let mean = mean_temperature(&dd).values;
    Ok((dd, mean))
}

/// Weather for every fixture zone. 2021 includes the February outbreak.
pub fn weather_year(year: i32) -> Result<BTreeMap<ZoneId, ZoneWeatherSeries>> {
    let climate_shape = year_shape(2021, 2021)?;
    let shape = year_shape(year, year as u64)?;
    let weights = population_weights();

    // Climate parameters come from 2021 so other years share the climatology.
    let mut outbreak_c = DEFAULT_OUTBREAK_C;
    let mut params = vec![(0.0, 0.0); ZONES.len()];
    let hours = SeasonHours::of(&climate_shape);
    for _ in 0..3 {
        for (z, p) in params.iter_mut().enumerate() {
            *p = solve_climate(&climate_shape, &hours, z, outbreak_c);
        }
        let coldest = |depth: f64| {
            let temps: Vec<Vec<f64>> = (0..ZONES.len())
                .map(|z| zone_temperatures(&climate_shape, z, params[z].0, params[z].1, depth))
                .collect();
            (0..climate_shape.timestamps.len())
                .map(|h| {
                    ZONES
                        .iter()
                        .enumerate()
                        .map(|(z, c)| {
                            weights.get(&ZoneId::from(c.zone)).unwrap_or(0.0) * temps[z][h]
                        })
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        };
        outbreak_c = bisect(0.0, 60.0, |d| URI_COLDEST_MEAN_C - coldest(d));
    }

    let mut series: BTreeMap<ZoneId, ZoneWeatherSeries> = BTreeMap::new();
    for (z, c) in ZONES.iter().enumerate() {
        let temps = zone_temperatures(&shape, z, params[z].0, params[z].1, outbreak_c)
            .into_iter()
            .map(|t| round_to(t, 2))
            .collect();
        let zone = ZoneId::from(c.zone);
        series.insert(
            zone.clone(),
            ZoneWeatherSeries::new(zone, c.station, year, shape.timestamps.clone(), temps)?,
        );
    }

    if year == 2021 {
        // Pin the coldest hour exactly after rounding by solving for the
        // largest zone's temperature.
        let (_, mean) = weighted_mean_temperature(&series)?;
        let (h, _) =
            mean.iter().enumerate().fold(
                (0, f64::INFINITY),
                |acc, (h, &m)| if m < acc.1 { (h, m) } else { acc },
            );
        let anchor = ZoneId::from("north_central");
        let others: f64 = series
            .iter()
            .filter(|(z, _)| **z != anchor)
            .map(|(z, s)| weights.get(z).unwrap_or(0.0) * s.dry_bulb[h])
            .sum();
        let w = weights.get(&anchor).unwrap_or(1.0);
        if let Some(s) = series.get_mut(&anchor) {
            s.dry_bulb[h] = (URI_COLDEST_MEAN_C - others) / w;
        }
    }
    Ok(series)
}

fn residential_shape(ts: &Timestamp) -> f64 {
    const SHAPE: [f64; 24] = [
        0.82, 0.78, 0.76, 0.76, 0.78, 0.85, 0.97, 1.03, 0.99, 0.95, 0.95, 0.97, 1.00, 1.03, 1.07,
        1.11, 1.16, 1.21, 1.22, 1.20, 1.15, 1.08, 0.98, 0.89,
    ];
    SHAPE[ts.hour() as usize]
}

fn commercial_shape(ts: &Timestamp) -> f64 {
    const WEEKDAY: [f64; 24] = [
        0.80, 0.78, 0.77, 0.77, 0.79, 0.85, 0.95, 1.06, 1.13, 1.17, 1.19, 1.20, 1.20, 1.20, 1.19,
        1.17, 1.13, 1.06, 0.98, 0.93, 0.89, 0.86, 0.83, 0.81,
    ];
    let weekend = ts.weekday().number_from_monday() >= 6;
    let f = WEEKDAY[ts.hour() as usize];
    if weekend {
        0.85 * f.min(1.0)
    } else {
        f
    }
}

/// Hourly customer-class demand before scaling, MW.
fn sector_demand_model(ts: &Timestamp, hdd: f64, cdd: f64) -> (f64, f64, f64) {
    let res =
        (9_000.0 + 25_000.0 * cdd + 9_000.0 * hdd + 14_000.0 * hdd * hdd) * residential_shape(ts);
    let com =
        (11_000.0 + 11_000.0 * cdd + 3_500.0 * hdd + 4_000.0 * hdd * hdd) * commercial_shape(ts);
    let season = (2.0 * PI * (ts.ordinal0() as f64 - 15.0) / 365.25).cos();
    let ind = 16_500.0 - 700.0 * season + 300.0 * (2.0 * PI * ts.hour() as f64 / 24.0).sin();
    (res, com, ind)
}

fn in_shed_window(ts: &Timestamp) -> bool {
    let start = NaiveDate::from_ymd_opt(2021, 2, 15).and_then(|d| d.and_hms_opt(1, 0, 0));
    let end = NaiveDate::from_ymd_opt(2021, 2, 17).and_then(|d| d.and_hms_opt(23, 0, 0));
    matches!((start, end), (Some(s), Some(e)) if *ts >= s && *ts <= e)
}

/// Grid series and customer-class fractions for the 2021 fixture. Shed runs
/// from 15 Feb 01:00 to 17 Feb 23:00: one hour at 20 GW and seventy at
/// 14 GW, 1000 GWh in all.
pub fn grid_year(
    weather: &BTreeMap<ZoneId, ZoneWeatherSeries>,
) -> Result<(GridSeries, SectoralFractions)> {
    let (dd, _) = weighted_mean_temperature(weather)?;
    let ts = &dd.timestamps;
    let n = ts.len();
    let parts: Vec<(f64, f64, f64)> = (0..n)
        .map(|h| sector_demand_model(&ts[h], dd.hdd[h], dd.cdd[h]))
        .collect();
    let totals: Vec<f64> = parts.iter().map(|(r, c, i)| r + c + i).collect();

    let window: Vec<usize> = (0..n).filter(|&h| in_shed_window(&ts[h])).collect();
    if window.len() != 71 {
        return Err(Error::Invariant(format!(
            "shed window has {} hours",
            window.len()
        )));
    }
    let window_peak = window
        .iter()
        .map(|&h| totals[h])
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = URI_ESTIMATED_PEAK_MW / window_peak;
    let mut estimate: Vec<f64> = totals.iter().map(|t| round_to(t * scale, 1)).collect();
    let peak_hour =
        window.iter().copied().fold(
            window[0],
            |best, h| if totals[h] > totals[best] { h } else { best },
        );
    estimate[peak_hour] = URI_ESTIMATED_PEAK_MW;
    // The largest shed lands on the in-window hour whose estimate is
    // closest to the pinned value.
    let big_shed_hour = window
        .iter()
        .copied()
        .filter(|&h| h != peak_hour)
        .min_by(|&a, &b| {
            (estimate[a] - SHED_PEAK_ESTIMATE_MW)
                .abs()
                .total_cmp(&(estimate[b] - SHED_PEAK_ESTIMATE_MW).abs())
        })
        .ok_or_else(|| Error::Invariant("empty shed window".into()))?;
    estimate[big_shed_hour] = SHED_PEAK_ESTIMATE_MW;

    let mut grid = GridSeries {
        timestamps: ts.clone(),
        served_load_mw: Vec::with_capacity(n),
        available_generation_mw: Vec::with_capacity(n),
        requested_shed_mw: Vec::with_capacity(n),
        estimated_load_without_shed_mw: Vec::with_capacity(n),
    };
    let mut fractions = SectoralFractions {
        timestamps: ts.clone(),
        residential: Vec::with_capacity(n),
        commercial: Vec::with_capacity(n),
        industrial: Vec::with_capacity(n),
    };
    for h in 0..n {
        let (res, com, ind) = parts[h];
        let shed = if h == big_shed_hour {
            SHED_PEAK_MW
        } else if in_shed_window(&ts[h]) {
            SHED_BASE_MW
        } else {
            0.0
        };
        let served = estimate[h] - shed;
        // Industrial customers take a larger proportional cut while shed is on.
        let ind_share = ind / (res + com + ind);
        let ind_served = if shed > 0.0 {
            0.8 * ind_share * served
        } else {
            ind_share * served
        };
        let rc = served - ind_served;
        let r = round_to(rc * res / (res + com) / served, 6);
        let c = round_to(rc * com / (res + com) / served, 6);
        fractions.residential.push(r);
        fractions.commercial.push(c);
        fractions.industrial.push(1.0 - r - c);

        grid.served_load_mw.push(served);
        grid.requested_shed_mw.push(shed);
        grid.estimated_load_without_shed_mw
            .push((shed > 0.0).then_some(estimate[h]));
        grid.available_generation_mw.push(if shed > 0.0 {
            served
        } else {
            round_to(served * 1.15, 1)
        });
    }
    grid.validate()?;
    fractions.validate()?;
    Ok((grid, fractions))
}

/// Writes `timestamp,dry_bulb_c` with the shortest exact representation.
fn weather_csv(series: &ZoneWeatherSeries) -> String {
    let mut s = String::from("timestamp,dry_bulb_c\n");
    for (t, v) in series.timestamps.iter().zip(&series.dry_bulb) {
        let _ = writeln!(s, "{},{}", format_timestamp(t), v);
    }
    s
}

/// Minimal EPW: eight header rows and data rows whose seventh field is the
/// dry-bulb temperature.
pub fn epw_text(series: &ZoneWeatherSeries) -> String {
    let mut s = format!(
        "LOCATION,{},TX,USA,SYNTHETIC,{},30.0,-97.0,-6.0,100.0\n",
        series.zone_id, series.station_id
    );
    for header in [
        "DESIGN CONDITIONS,0",
        "TYPICAL/EXTREME PERIODS,0",
        "GROUND TEMPERATURES,0",
        "HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0",
        "COMMENTS 1,synthetic fixture",
        "COMMENTS 2,",
        "DATA PERIODS,1,1,Data,Friday,1/1,12/31",
    ] {
        s.push_str(header);
        s.push('\n');
    }
    for (t, v) in series.timestamps.iter().zip(&series.dry_bulb) {
        let _ = writeln!(
            s,
            "{},{},{},{},60,?9?9?9?9E0?9?9?9?9?9?9?9?9?9?9?9?9?9?9?9*9*9?9*9*9,{},0.0,80,101325",
            t.year(),
            t.month(),
            t.day(),
            t.hour() + 1,
            v
        );
    }
    s
}

fn grid_csv(grid: &GridSeries) -> String {
    let mut s = String::from(
        "timestamp,served_mw,available_generation_mw,requested_shed_mw,estimated_unserved_mw\n",
    );
    for h in 0..grid.len() {
        let unserved = grid.estimated_load_without_shed_mw[h]
            .map(|e| format!("{:.1}", e - grid.served_load_mw[h]))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:.1},{:.1},{:.1},{}",
            format_timestamp(&grid.timestamps[h]),
            grid.served_load_mw[h],
            grid.available_generation_mw[h],
            grid.requested_shed_mw[h],
            unserved
        );
    }
    s
}

fn fractions_csv(f: &SectoralFractions) -> String {
    let mut s = String::from("timestamp,res_frac,com_frac,ind_frac\n");
    for h in 0..f.timestamps.len() {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{}",
            format_timestamp(&f.timestamps[h]),
            f.residential[h],
            f.commercial[h],
            f.industrial[h]
        );
    }
    s
}

fn population_csv() -> String {
    let mut s = String::from("zone_id,population\n");
    for z in &ZONES {
        let _ = writeln!(s, "{},{}", z.zone, z.population);
    }
    s
}

/// Every generated fixture file as (relative path, contents).
pub fn fixture_files() -> Result<Vec<(String, String)>> {
    let mut files = vec![("population.csv".to_string(), population_csv())];
    let w2021 = weather_year(2021)?;
    for year in [2018, 2021] {
        let series = if year == 2021 {
            w2021.clone()
        } else {
            weather_year(year)?
        };
        for (zone, s) in &series {
            files.push((format!("weather/{year}/{zone}.csv"), weather_csv(s)));
        }
    }
    let (grid, fractions) = grid_year(&w2021)?;
    files.push(("grid_2021.csv".to_string(), grid_csv(&grid)));
    files.push((
        "sector_fractions_2021.csv".to_string(),
        fractions_csv(&fractions),
    ));
    Ok(files)
}

pub fn write_fixture_set(dir: &Path) -> Result<()> {
    for (rel, text) in fixture_files()? {
        let path = dir.join(&rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
