use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{RunConfig, WeatherConfig};
use super::table::ScenarioTable;
use crate::calendar::{validate_full_year, Timestamp};
use crate::calibration::{apply_factors, compute_factors, MonthlyBiasFactors, ServedLoad};
use crate::error::{Error, Result};
use crate::grid::{decompose_sectors, GridSeries, SectorLoads, SectoralFractions};
use crate::retrofit::{scenario_stock, PackageSet, Scenario};
use crate::sim::{simulate_sector, SectorDemand};
use crate::stock::{weighted_stock, ArchetypeDistribution, BuildingSample, Sector};
use crate::transfer::{apply_transfer, fit_transfer, HourOfWeekRegressionSet};
use crate::weather::{
    hourly_degree_days, mean_temperature, parse_weather_file, population_weighted_dd,
    DegreeDaySeries, PopulationWeightSet, ZoneId, ZoneWeatherSeries,
};

/// Inputs shared by every scenario of a run.
pub struct RunInputs {
    pub weather: BTreeMap<ZoneId, ZoneWeatherSeries>,
    pub weights: PopulationWeightSet,
    pub system_dd: DegreeDaySeries,
    pub mean_temp_c: Vec<f64>,
    pub grid: GridSeries,
    pub sectors: SectorLoads,
    pub served_residential: Vec<f64>,
    pub served_commercial: Vec<f64>,
}

pub fn load_weather(cfg: &WeatherConfig, year: i32) -> Result<BTreeMap<ZoneId, ZoneWeatherSeries>> {
    cfg.zones
        .iter()
        .map(|(zone, path)| {
            let series = parse_weather_file(path, cfg.format, zone)?;
            validate_full_year(&series.timestamps, year)?;
            Ok((zone.clone(), series))
        })
        .collect()
}

pub fn system_degree_days(
    weather: &BTreeMap<ZoneId, ZoneWeatherSeries>,
    weights: &PopulationWeightSet,
    base: f64,
) -> Result<DegreeDaySeries> {
    let per_zone = weather
        .iter()
        .map(|(z, s)| (z.clone(), hourly_degree_days(s, base)))
        .collect();
    population_weighted_dd(&per_zone, weights)
}

pub fn load_inputs(cfg: &RunConfig) -> Result<RunInputs> {
    let weather = load_weather(&cfg.weather, cfg.year)?;
    let weights = PopulationWeightSet::from_csv(&cfg.population_csv)?;
    let system_dd = system_degree_days(&weather, &weights, cfg.base_temperature_c)?;
    let mean_temp_c = mean_temperature(&system_dd).values;
    let grid = GridSeries::from_csv(&cfg.grid_csv)?;
    if grid.timestamps != system_dd.timestamps {
        return Err(Error::KeyMismatch(
            "grid series and weather cover different hours".into(),
        ));
    }
    let fractions = SectoralFractions::from_csv(&cfg.fractions_csv)?;
    let sectors = decompose_sectors(&grid, &fractions)?;
    let (served_residential, served_commercial) = match &cfg.served_load_csv {
        Some(path) => {
            let served = ServedLoad::from_csv(path)?;
            if served.timestamps != grid.timestamps {
                return Err(Error::KeyMismatch(
                    "served load and grid series cover different hours".into(),
                ));
            }
            (
                served.sector(Sector::Residential.as_str())?.to_vec(),
                served.sector(Sector::Commercial.as_str())?.to_vec(),
            )
        }
        None => (sectors.residential.clone(), sectors.commercial.clone()),
    };
    Ok(RunInputs {
        weather,
        weights,
        system_dd,
        mean_temp_c,
        grid,
        sectors,
        served_residential,
        served_commercial,
    })
}

/// Weighted residential and commercial samples for a run.
pub fn load_stocks(
    cfg: &RunConfig,
    seed: u64,
) -> Result<(Vec<BuildingSample>, Vec<BuildingSample>)> {
    let res = ArchetypeDistribution::from_json_file(&cfg.residential.distribution)?;
    let com = ArchetypeDistribution::from_json_file(&cfg.commercial.distribution)?;
    if res.sector != Sector::Residential || com.sector != Sector::Commercial {
        return Err(Error::Config(
            "distribution files are assigned to the wrong sectors".into(),
        ));
    }
    Ok((
        weighted_stock(&res, cfg.residential.sample_size, seed)?,
        weighted_stock(&com, cfg.commercial.sample_size, seed)?,
    ))
}

/// Commercial demand under the transfer year's weather, regressed on degree
/// days and re-evaluated on the run year.
pub struct TransferStage {
    pub weather: BTreeMap<ZoneId, ZoneWeatherSeries>,
    pub system_dd: DegreeDaySeries,
}

pub fn load_transfer(
    cfg: &RunConfig,
    weights: &PopulationWeightSet,
) -> Result<Option<TransferStage>> {
    let Some(t) = &cfg.commercial.transfer else {
        return Ok(None);
    };
    let weather = load_weather(&t.weather, t.year)?;
    let system_dd = system_degree_days(&weather, weights, cfg.base_temperature_c)?;
    Ok(Some(TransferStage { weather, system_dd }))
}

pub fn fit_commercial_transfer(
    stock: &[BuildingSample],
    stage: &TransferStage,
    cfg: &RunConfig,
) -> Result<HourOfWeekRegressionSet> {
    let demand = simulate_sector(stock, &stage.weather, &cfg.engine)?;
    fit_transfer(&demand, &stage.system_dd)
}

/// Uncalibrated sector demand for one scenario.
pub struct ModeledScenario {
    pub scenario: Scenario,
    pub residential: SectorDemand,
    pub commercial: SectorDemand,
    pub transfer: Option<HourOfWeekRegressionSet>,
    pub extrapolated_hours: usize,
}

fn scale_demand(d: &SectorDemand, factors: &MonthlyBiasFactors) -> Result<SectorDemand> {
    Ok(SectorDemand {
        timestamps: d.timestamps.clone(),
        heating_mw: apply_factors(&d.heating_mw, &d.timestamps, factors)?,
        cooling_mw: apply_factors(&d.cooling_mw, &d.timestamps, factors)?,
        other_mw: apply_factors(&d.other_mw, &d.timestamps, factors)?,
        gas_mw_th: d.gas_mw_th.clone(),
        unmet_mw_th: d.unmet_mw_th.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualGwh {
    pub residential: f64,
    pub commercial: f64,
    pub industrial: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: Scenario,
    pub annual_gwh: AnnualGwh,
    /// Annual system consumption saved relative to baseline, percent.
    pub reduction_vs_baseline_pct: f64,
    pub coldest_hour_total_mw: f64,
    pub coldest_hour_residential_commercial_mw: f64,
    pub peak_total_mw: f64,
    pub peak_timestamp: Timestamp,
    /// Commercial hours evaluated outside the fitted degree-day range.
    pub transfer_extrapolated_hours: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub year: i32,
    pub seed: u64,
    pub residential_sample_size: usize,
    pub commercial_sample_size: usize,
    pub coldest_hour: Timestamp,
    pub coldest_mean_temp_c: f64,
    pub scenarios: Vec<ScenarioSummary>,
}

pub struct SimulationOutput {
    pub inputs: RunInputs,
    pub tables: Vec<ScenarioTable>,
    pub factors: [MonthlyBiasFactors; 2],
    pub transfer: Option<HourOfWeekRegressionSet>,
    pub summary: RunSummary,
}

fn model_scenario(
    scenario: Scenario,
    stocks: &(Vec<BuildingSample>, Vec<BuildingSample>),
    packages: &PackageSet,
    inputs: &RunInputs,
    transfer: Option<&TransferStage>,
    cfg: &RunConfig,
) -> Result<ModeledScenario> {
    let stage = |name: &str, e: Error| {
        log::error!("{scenario}: {name} stage failed");
        e
    };
    let res_stock =
        scenario_stock(&stocks.0, scenario, packages).map_err(|e| stage("retrofit", e))?;
    let com_stock =
        scenario_stock(&stocks.1, scenario, packages).map_err(|e| stage("retrofit", e))?;
    log::info!(
        "{scenario}: simulating {} residential buildings",
        res_stock.len()
    );
    let residential = simulate_sector(&res_stock, &inputs.weather, &cfg.engine)
        .map_err(|e| stage("simulate", e))?;
    log::info!(
        "{scenario}: simulating {} commercial buildings",
        com_stock.len()
    );
    let (commercial, reg, extrapolated_hours) = match transfer {
        None => (
            simulate_sector(&com_stock, &inputs.weather, &cfg.engine)
                .map_err(|e| stage("simulate", e))?,
            None,
            0,
        ),
        Some(t) => {
            let reg =
                fit_commercial_transfer(&com_stock, t, cfg).map_err(|e| stage("transfer", e))?;
            let out = apply_transfer(&reg, &inputs.system_dd).map_err(|e| stage("transfer", e))?;
            let n = out.extrapolated.iter().filter(|x| **x).count();
            (out.demand, Some(reg), n)
        }
    };
    Ok(ModeledScenario {
        scenario,
        residential,
        commercial,
        transfer: reg,
        extrapolated_hours,
    })
}

/// Runs every configured scenario. Baseline is always modeled because its
/// calibration factors are applied to the other scenarios.
pub fn run_simulation(cfg: &RunConfig, seed: u64) -> Result<SimulationOutput> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let stocks = load_stocks(cfg, seed)?;
    let packages = PackageSet::from_dir(&cfg.packages_dir)?;
    let transfer = load_transfer(cfg, &inputs.weights)?;
    let ts = inputs.system_dd.timestamps.clone();

    let mut order = vec![Scenario::Baseline];
    order.extend(
        cfg.scenarios
            .iter()
            .copied()
            .filter(|s| *s != Scenario::Baseline),
    );
    let mut modeled: Vec<ModeledScenario> = Vec::with_capacity(order.len());
    for scenario in order {
        modeled.push(model_scenario(
            scenario,
            &stocks,
            &packages,
            &inputs,
            transfer.as_ref(),
            cfg,
        )?);
    }
    let baseline = &modeled[0];
    let res_factors = compute_factors(
        Sector::Residential,
        &baseline.residential.total_mw(),
        &inputs.served_residential,
        &ts,
    )?;
    let com_factors = compute_factors(
        Sector::Commercial,
        &baseline.commercial.total_mw(),
        &inputs.served_commercial,
        &ts,
    )?;
    let baseline_transfer = baseline.transfer.clone();

    let mut tables = Vec::new();
    for m in &modeled {
        let res = scale_demand(&m.residential, &res_factors)?;
        let com = scale_demand(&m.commercial, &com_factors)?;
        tables.push((
            ScenarioTable::compose(
                m.scenario,
                &inputs.mean_temp_c,
                &res,
                &com,
                &inputs.sectors.industrial,
            )?,
            m.extrapolated_hours,
        ));
    }

    let coldest = inputs
        .mean_temp_c
        .iter()
        .enumerate()
        .fold(0, |best, (h, &t)| {
            if t < inputs.mean_temp_c[best] {
                h
            } else {
                best
            }
        });
    let baseline_total: f64 = tables[0].0.total_mw.iter().sum();
    let mut scenarios = Vec::new();
    for (table, extrapolated) in &tables {
        if !cfg.scenarios.contains(&table.scenario) {
            continue;
        }
        let gwh = |v: &[f64]| v.iter().sum::<f64>() / 1000.0;
        let total = gwh(&table.total_mw);
        let (peak_h, peak) =
            table
                .total_mw
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (h, &v)| if v > acc.1 { (h, v) } else { acc },
                );
        scenarios.push(ScenarioSummary {
            scenario: table.scenario,
            annual_gwh: AnnualGwh {
                residential: gwh(&table.residential_mw),
                commercial: gwh(&table.commercial_mw),
                industrial: gwh(&table.industrial_mw),
                total,
            },
            reduction_vs_baseline_pct: 100.0 * (baseline_total / 1000.0 - total)
                / (baseline_total / 1000.0),
            coldest_hour_total_mw: table.total_mw[coldest],
            coldest_hour_residential_commercial_mw: table.residential_mw[coldest]
                + table.commercial_mw[coldest],
            peak_total_mw: peak,
            peak_timestamp: ts[peak_h],
            transfer_extrapolated_hours: *extrapolated,
        });
    }
    let summary = RunSummary {
        schema_version: super::config::SCHEMA_VERSION,
        year: cfg.year,
        seed,
        residential_sample_size: cfg.residential.sample_size,
        commercial_sample_size: cfg.commercial.sample_size,
        coldest_hour: ts[coldest],
        coldest_mean_temp_c: inputs.mean_temp_c[coldest],
        scenarios,
    };
    let tables = tables
        .into_iter()
        .map(|(t, _)| t)
        .filter(|t| cfg.scenarios.contains(&t.scenario))
        .collect();
    Ok(SimulationOutput {
        inputs,
        tables,
        factors: [res_factors, com_factors],
        transfer: baseline_transfer,
        summary,
    })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
