#![allow(dead_code)]

use std::path::PathBuf;

use stockgrid::sim::EngineParams;
use stockgrid::stock::{BuildingSample, CoolingRating, HeatingSpec, Sector};
use stockgrid::weather::{ZoneId, ZoneWeatherSeries};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn config(name: &str) -> PathBuf {
    data_dir().join("configs").join(name)
}

/// A mid-size single-story house in the coast zone.
pub fn house(heating: HeatingSpec) -> BuildingSample {
    BuildingSample {
        building_id: 0,
        sector: Sector::Residential,
        zone_id: ZoneId::from("coast"),
        building_type: None,
        floor_area_m2: 160.0,
        ceiling_r: 19.0 * 0.1761,
        wall_r: 11.0 * 0.1761,
        window_u: 3.4,
        ach50: 12.0,
        duct_leakage_fraction: 0.2,
        duct_r: 6.0 * 0.1761,
        heating,
        cooling: CoolingRating::Seer(13.0),
        heat_setpoint_c: 20.0,
        cool_setpoint_c: 24.0,
        internal_gains_w_per_m2: 6.0,
        lighting_power_density_w_per_m2: 2.0,
        led_lighting: false,
        weight: 1.0,
    }
}

pub fn constant_weather(zone: &str, year: i32, t: f64) -> ZoneWeatherSeries {
    let n = stockgrid::calendar::hours_in_year(year);
    ZoneWeatherSeries::from_values(ZoneId::from(zone), "TEST", year, vec![t; n]).unwrap()
}

pub fn params() -> EngineParams {
    EngineParams::default()
}
