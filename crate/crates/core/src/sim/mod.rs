//! Steady-state single-zone hourly building model.
//!
//! Each hour the zone is held at its heating or cooling setpoint; the load is
//! the conduction plus infiltration balance, offset by internal gains and
//! divided by duct distribution efficiency. There is no thermal mass and
//! unmet load does not feed back into indoor temperature.

mod envelope;
mod hvac;
mod params;
pub mod schedule;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

pub use envelope::EnvelopeSpec;
pub use hvac::{
    design_loads, heat_pump_cop, hvac_electricity, size_system, DesignLoads, HeatPumpCurve,
    HeatPumpOperation, HeatingRating, HvacSystem,
};
pub use params::{
    texas_design_temperatures, CopAnchors, DesignTemperatures, EngineParams, Geometry,
    HeatPumpParams,
};

use crate::calendar::{hour_of_week, Timestamp};
use crate::error::{Error, Result};
use crate::stock::BuildingSample;
use crate::weather::{ZoneId, ZoneWeatherSeries};

/// Buildings per partial sum in sector aggregation. Fixed so the floating
/// point reduction tree never depends on thread count.
pub const AGGREGATION_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalLoads {
    pub heating_kwh_th: Vec<f64>,
    pub cooling_kwh_th: Vec<f64>,
}

impl ThermalLoads {
    pub fn zeros(n: usize) -> Self {
        ThermalLoads {
            heating_kwh_th: vec![0.0; n],
            cooling_kwh_th: vec![0.0; n],
        }
    }
}

/// One building's hourly energy by end use.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyEndUseDemand {
    pub heating_kwh_e: Vec<f64>,
    pub cooling_kwh_e: Vec<f64>,
    pub other_kwh_e: Vec<f64>,
    pub gas_kwh_th: Vec<f64>,
    pub unmet_kwh_th: Vec<f64>,
    /// Heating plus cooling actually delivered to the zone.
    pub delivered_kwh_th: Vec<f64>,
}

impl HourlyEndUseDemand {
    pub fn zeros(n: usize) -> Self {
        HourlyEndUseDemand {
            heating_kwh_e: vec![0.0; n],
            cooling_kwh_e: vec![0.0; n],
            other_kwh_e: vec![0.0; n],
            gas_kwh_th: vec![0.0; n],
            unmet_kwh_th: vec![0.0; n],
            delivered_kwh_th: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.heating_kwh_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heating_kwh_e.is_empty()
    }

    pub fn total_electricity_kwh(&self) -> f64 {
        (0..self.len())
            .map(|h| self.heating_kwh_e[h] + self.cooling_kwh_e[h] + self.other_kwh_e[h])
            .sum()
    }

    /// Debug dump: `hour,heating_kwh_e,cooling_kwh_e,other_kwh_e,gas_kwh_th,unmet_kwh_th`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            writeln!(
                out,
                "hour,heating_kwh_e,cooling_kwh_e,other_kwh_e,gas_kwh_th,unmet_kwh_th"
            )?;
            for h in 0..self.len() {
                writeln!(
                    out,
                    "{h},{},{},{},{},{}",
                    self.heating_kwh_e[h],
                    self.cooling_kwh_e[h],
                    self.other_kwh_e[h],
                    self.gas_kwh_th[h],
                    self.unmet_kwh_th[h]
                )?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }
}

fn check_zone(building: &BuildingSample, weather: &ZoneWeatherSeries) -> Result<()> {
    if building.zone_id != weather.zone_id {
        return Err(Error::KeyMismatch(format!(
            "building {} is in zone {} but weather is for {}",
            building.building_id, building.zone_id, weather.zone_id
        )));
    }
    Ok(())
}

/// Peak internal gains (people, plugs, lighting), W.
fn peak_gains_w(building: &BuildingSample) -> f64 {
    building.floor_area_m2
        * (building.internal_gains_w_per_m2 + building.lighting_power_density_w_per_m2)
}

fn gains_w(building: &BuildingSample, ts: &Timestamp) -> f64 {
    peak_gains_w(building)
        * schedule::occupancy_fraction(building.sector, building.building_type, hour_of_week(ts))
}

/// Hourly heating and cooling thermal loads (kWh_th) at the supply side.
pub fn thermal_load(
    building: &BuildingSample,
    weather: &ZoneWeatherSeries,
    params: &EngineParams,
) -> Result<ThermalLoads> {
    check_zone(building, weather)?;
    let env = EnvelopeSpec::of(building, params);
    Ok(thermal_load_with(building, &env, weather))
}

pub(crate) fn thermal_load_with(
    building: &BuildingSample,
    env: &EnvelopeSpec,
    weather: &ZoneWeatherSeries,
) -> ThermalLoads {
    let ua = env.ua_total();
    let eta = env.duct_distribution_efficiency;
    let n = weather.len();
    let mut loads = ThermalLoads::zeros(n);
    for h in 0..n {
        let t = weather.dry_bulb[h];
        let gains = gains_w(building, &weather.timestamps[h]);
        loads.heating_kwh_th[h] =
            (ua * (building.heat_setpoint_c - t) - gains).max(0.0) / 1000.0 / eta;
        loads.cooling_kwh_th[h] =
            (ua * (t - building.cool_setpoint_c) + gains).max(0.0) / 1000.0 / eta;
    }
    loads
}

/// Sizes heating and cooling equipment against the zone's design temperatures.
pub fn autosize(building: &BuildingSample, params: &EngineParams) -> Result<HvacSystem> {
    let env = EnvelopeSpec::of(building, params);
    autosize_with(building, &env, params)
}

pub(crate) fn autosize_with(
    building: &BuildingSample,
    env: &EnvelopeSpec,
    params: &EngineParams,
) -> Result<HvacSystem> {
    let design = params.design_for(&building.zone_id)?;
    let loads = design_loads(
        env.ua_total(),
        env.duct_distribution_efficiency,
        building.heat_setpoint_c,
        building.cool_setpoint_c,
        peak_gains_w(building),
        design,
    );
    Ok(size_system(
        &building.heating,
        building.cooling,
        loads,
        params,
    ))
}

/// Full-year simulation of one building.
pub fn simulate_building(
    building: &BuildingSample,
    weather: &ZoneWeatherSeries,
    params: &EngineParams,
) -> Result<HourlyEndUseDemand> {
    check_zone(building, weather)?;
    let env = EnvelopeSpec::of(building, params);
    let loads = thermal_load_with(building, &env, weather);
    let system = autosize_with(building, &env, params)?;
    let mut demand = hvac_electricity(&loads, &system, weather, params)?;
    let peak = peak_gains_w(building);
    for (h, ts) in weather.timestamps.iter().enumerate() {
        let frac =
            schedule::occupancy_fraction(building.sector, building.building_type, hour_of_week(ts));
        demand.other_kwh_e[h] = peak * frac / 1000.0;
    }
    Ok(demand)
}

/// Weighted sector demand in MW (MWh per hour).
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDemand {
    pub timestamps: Vec<Timestamp>,
    pub heating_mw: Vec<f64>,
    pub cooling_mw: Vec<f64>,
    pub other_mw: Vec<f64>,
    pub gas_mw_th: Vec<f64>,
    pub unmet_mw_th: Vec<f64>,
}

impl SectorDemand {
    pub fn zeros(timestamps: Vec<Timestamp>) -> Self {
        let n = timestamps.len();
        SectorDemand {
            timestamps,
            heating_mw: vec![0.0; n],
            cooling_mw: vec![0.0; n],
            other_mw: vec![0.0; n],
            gas_mw_th: vec![0.0; n],
            unmet_mw_th: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Heating + cooling + other electricity per hour.
    pub fn total_mw(&self) -> Vec<f64> {
        (0..self.len())
            .map(|h| self.heating_mw[h] + self.cooling_mw[h] + self.other_mw[h])
            .collect()
    }

    fn add_building(&mut self, weight: f64, d: &HourlyEndUseDemand) -> Result<()> {
        if d.len() != self.len() {
            return Err(Error::Alignment {
                expected: self.len(),
                found: d.len(),
            });
        }
        let scale = weight / 1000.0;
        for h in 0..self.len() {
            self.heating_mw[h] += scale * d.heating_kwh_e[h];
            self.cooling_mw[h] += scale * d.cooling_kwh_e[h];
            self.other_mw[h] += scale * d.other_kwh_e[h];
            self.gas_mw_th[h] += scale * d.gas_kwh_th[h];
            self.unmet_mw_th[h] += scale * d.unmet_kwh_th[h];
        }
        Ok(())
    }

    fn add_partial(&mut self, other: &SectorDemand) {
        for h in 0..self.len() {
            self.heating_mw[h] += other.heating_mw[h];
            self.cooling_mw[h] += other.cooling_mw[h];
            self.other_mw[h] += other.other_mw[h];
            self.gas_mw_th[h] += other.gas_mw_th[h];
            self.unmet_mw_th[h] += other.unmet_mw_th[h];
        }
    }
}

fn sorted_by_id<T>(items: &mut [T], id: impl Fn(&T) -> u64) -> Result<()> {
    items.sort_by_key(&id);
    if let Some(w) = items.windows(2).find(|w| id(&w[0]) == id(&w[1])) {
        return Err(Error::Validation(format!(
            "duplicate building id {}",
            id(&w[0])
        )));
    }
    Ok(())
}

/// Weighted sum of precomputed building demands. Buildings are reduced in
/// `building_id` order in fixed-size chunks, so any permutation of the input
/// yields bit-identical output.
pub fn aggregate_sector(
    items: &[(&BuildingSample, &HourlyEndUseDemand)],
    timestamps: &[Timestamp],
) -> Result<SectorDemand> {
    let mut items: Vec<_> = items.to_vec();
    sorted_by_id(&mut items, |(b, _)| b.building_id)?;
    let mut total = SectorDemand::zeros(timestamps.to_vec());
    for chunk in items.chunks(AGGREGATION_CHUNK) {
        let mut partial = SectorDemand::zeros(timestamps.to_vec());
        for (b, d) in chunk {
            partial.add_building(b.weight, d)?;
        }
        total.add_partial(&partial);
    }
    Ok(total)
}

/// Simulates and aggregates a whole sector in parallel. Produces the same
/// bits as [`aggregate_sector`] over individually simulated buildings.
pub fn simulate_sector(
    samples: &[BuildingSample],
    weather: &BTreeMap<ZoneId, ZoneWeatherSeries>,
    params: &EngineParams,
) -> Result<SectorDemand> {
    let timestamps = weather
        .values()
        .next()
        .map(|w| w.timestamps.clone())
        .ok_or_else(|| Error::missing("weather series"))?;
    if let Some(w) = weather.values().find(|w| w.timestamps != timestamps) {
        return Err(Error::KeyMismatch(format!(
            "weather for zone {} covers different hours",
            w.zone_id
        )));
    }
    let mut order: Vec<&BuildingSample> = samples.iter().collect();
    sorted_by_id(&mut order, |b| b.building_id)?;
    let partials: Vec<SectorDemand> = order
        .par_chunks(AGGREGATION_CHUNK)
        .map(|chunk| {
            let mut partial = SectorDemand::zeros(timestamps.clone());
            for b in chunk {
                let w = weather
                    .get(&b.zone_id)
                    .ok_or_else(|| Error::missing(format!("weather for zone {}", b.zone_id)))?;
                let d = simulate_building(b, w, params)?;
                partial.add_building(b.weight, &d)?;
            }
            Ok(partial)
        })
        .collect::<Result<_>>()?;
    let mut total = SectorDemand::zeros(timestamps);
    for p in &partials {
        total.add_partial(p);
    }
    Ok(total)
}
