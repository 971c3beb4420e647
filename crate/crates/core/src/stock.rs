//! Synthetic building-stock sampling.
//!
//! Every parameter is drawn independently from its own marginal. Each
//! parameter owns a ChaCha8 stream (stream id = rank of the parameter name in
//! sorted order, offset by sector), and buildings consume that stream in index
//! order. Samples of size `n` are therefore prefixes of larger samples drawn
//! with the same seed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{self, EngineParams};
use crate::units::r_ip_to_si;
use crate::weather::{ZoneId, ZoneWeatherSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Residential,
    Commercial,
}

impl Sector {
    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Residential => "residential",
            Sector::Commercial => "commercial",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommercialType {
    Office,
    Retail,
    School,
    Warehouse,
    Hospital,
    Restaurant,
    Lodging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatingKind {
    ElectricResistance,
    GasFurnace,
    Ashp,
    CommercialHpRtu,
    HpBoiler,
    GasBoiler,
}

impl HeatingKind {
    pub fn is_heat_pump(self) -> bool {
        matches!(
            self,
            HeatingKind::Ashp | HeatingKind::CommercialHpRtu | HeatingKind::HpBoiler
        )
    }

    pub fn burns_fuel(self) -> bool {
        matches!(self, HeatingKind::GasFurnace | HeatingKind::GasBoiler)
    }

    pub fn allowed_in(self, sector: Sector) -> bool {
        match sector {
            Sector::Residential => matches!(
                self,
                HeatingKind::ElectricResistance | HeatingKind::GasFurnace | HeatingKind::Ashp
            ),
            Sector::Commercial => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HeatingKind::ElectricResistance => "electric_resistance",
            HeatingKind::GasFurnace => "gas_furnace",
            HeatingKind::Ashp => "ashp",
            HeatingKind::CommercialHpRtu => "commercial_hp_rtu",
            HeatingKind::HpBoiler => "hp_boiler",
            HeatingKind::GasBoiler => "gas_boiler",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Supplemental {
    ElectricResistance,
    Gas,
    None,
}

/// Primary heating equipment with its rated efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HeatingSpec {
    ElectricResistance,
    GasFurnace {
        afue: f64,
    },
    GasBoiler {
        afue: f64,
    },
    Ashp {
        hspf: f64,
        supplemental: Supplemental,
    },
    CommercialHpRtu {
        ieer: f64,
        supplemental: Supplemental,
    },
    HpBoiler {
        supplemental: Supplemental,
    },
}

impl HeatingSpec {
    pub fn kind(&self) -> HeatingKind {
        match self {
            HeatingSpec::ElectricResistance => HeatingKind::ElectricResistance,
            HeatingSpec::GasFurnace { .. } => HeatingKind::GasFurnace,
            HeatingSpec::GasBoiler { .. } => HeatingKind::GasBoiler,
            HeatingSpec::Ashp { .. } => HeatingKind::Ashp,
            HeatingSpec::CommercialHpRtu { .. } => HeatingKind::CommercialHpRtu,
            HeatingSpec::HpBoiler { .. } => HeatingKind::HpBoiler,
        }
    }

    pub fn supplemental(&self) -> Supplemental {
        match self {
            HeatingSpec::Ashp { supplemental, .. }
            | HeatingSpec::CommercialHpRtu { supplemental, .. }
            | HeatingSpec::HpBoiler { supplemental } => *supplemental,
            _ => Supplemental::None,
        }
    }

    /// True when any part of the heating chain burns fuel.
    pub fn is_fossil(&self) -> bool {
        self.kind().burns_fuel() || self.supplemental() == Supplemental::Gas
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            HeatingSpec::GasFurnace { afue } | HeatingSpec::GasBoiler { afue }
                if !(afue > 0.0 && afue <= 1.0) =>
            {
                Err(format!("AFUE {afue} outside (0, 1]"))
            }
            HeatingSpec::Ashp { hspf, .. } if !(hspf > 0.0) => {
                Err(format!("HSPF {hspf} must be positive"))
            }
            HeatingSpec::CommercialHpRtu { ieer, .. } if !(ieer > 0.0) => {
                Err(format!("IEER {ieer} must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Cooling efficiency rating in Btu/Wh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoolingRating {
    Seer(f64),
    Ieer(f64),
}

impl CoolingRating {
    pub fn value(&self) -> f64 {
        match *self {
            CoolingRating::Seer(v) | CoolingRating::Ieer(v) => v,
        }
    }
}

/// Discrete marginal: `values[i]` occurs with `probabilities[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discrete<T> {
    pub values: Vec<T>,
    pub probabilities: Vec<f64>,
}

impl<T: Clone> Discrete<T> {
    pub fn point(value: T) -> Self {
        Discrete {
            values: vec![value],
            probabilities: vec![1.0],
        }
    }

    fn validate(&self, parameter: &str) -> Result<()> {
        let err = |message: String| Error::Distribution {
            parameter: parameter.to_string(),
            message,
        };
        if self.values.is_empty() {
            return Err(err("empty marginal".into()));
        }
        if self.values.len() != self.probabilities.len() {
            return Err(err(format!(
                "{} values but {} probabilities",
                self.values.len(),
                self.probabilities.len()
            )));
        }
        if let Some(p) = self
            .probabilities
            .iter()
            .find(|p| !(p.is_finite() && **p >= 0.0))
        {
            return Err(err(format!("invalid probability {p}")));
        }
        let sum: f64 = self.probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(err(format!("probabilities sum to {sum}")));
        }
        Ok(())
    }

    /// Inverse-CDF lookup for `u` in [0, 1).
    fn pick(&self, u: f64) -> &T {
        let mut cumulative = 0.0;
        for (v, p) in self.values.iter().zip(&self.probabilities) {
            cumulative += p;
            if u < cumulative {
                return v;
            }
        }
        // Rounding can leave the final cumulative a hair under 1.
        self.values
            .iter()
            .zip(&self.probabilities)
            .rev()
            .find(|(_, p)| **p > 0.0)
            .map(|(v, _)| v)
            .unwrap_or(&self.values[0])
    }
}

/// Independent marginals for every sampled building parameter. R-values are
/// given in ft²·°F·h/Btu and converted to SI at sampling time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Marginals {
    pub ach50: Discrete<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub building_type: Option<Discrete<CommercialType>>,
    pub ceiling_r_ip: Discrete<f64>,
    pub cool_setpoint_c: Discrete<f64>,
    pub cooling_seer: Discrete<f64>,
    pub duct_leakage_fraction: Discrete<f64>,
    pub duct_r_ip: Discrete<f64>,
    pub floor_area_m2: Discrete<f64>,
    pub heat_setpoint_c: Discrete<f64>,
    pub heating_system: Discrete<HeatingSpec>,
    pub internal_gains_w_per_m2: Discrete<f64>,
    pub lighting_power_density_w_per_m2: Discrete<f64>,
    pub wall_r_ip: Discrete<f64>,
    pub window_u_si: Discrete<f64>,
    pub zone: Discrete<ZoneId>,
}

/// Parameter names in draw order; the index is the RNG stream id.
pub const PARAMETER_NAMES: [&str; 15] = [
    "ach50",
    "building_type",
    "ceiling_r_ip",
    "cool_setpoint_c",
    "cooling_seer",
    "duct_leakage_fraction",
    "duct_r_ip",
    "floor_area_m2",
    "heat_setpoint_c",
    "heating_system",
    "internal_gains_w_per_m2",
    "lighting_power_density_w_per_m2",
    "wall_r_ip",
    "window_u_si",
    "zone",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchetypeDistribution {
    pub sector: Sector,
    /// Buildings (residential) or m² of floorspace (commercial) in the
    /// modeled segment.
    pub totals: f64,
    pub coverage_fraction: f64,
    pub marginals: Marginals,
}

impl ArchetypeDistribution {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dist: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.marginals;
        let positive = |name: &str, d: &Discrete<f64>| -> Result<()> {
            d.validate(name)?;
            match d.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                Some(v) => Err(Error::Distribution {
                    parameter: name.into(),
                    message: format!("value {v} must be strictly positive"),
                }),
                None => Ok(()),
            }
        };
        let nonnegative = |name: &str, d: &Discrete<f64>| -> Result<()> {
            d.validate(name)?;
            match d.values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                Some(v) => Err(Error::Distribution {
                    parameter: name.into(),
                    message: format!("value {v} must be nonnegative"),
                }),
                None => Ok(()),
            }
        };
        positive("ach50", &m.ach50)?;
        positive("ceiling_r_ip", &m.ceiling_r_ip)?;
        positive("cooling_seer", &m.cooling_seer)?;
        positive("duct_r_ip", &m.duct_r_ip)?;
        positive("floor_area_m2", &m.floor_area_m2)?;
        positive("wall_r_ip", &m.wall_r_ip)?;
        positive("window_u_si", &m.window_u_si)?;
        nonnegative("internal_gains_w_per_m2", &m.internal_gains_w_per_m2)?;
        nonnegative(
            "lighting_power_density_w_per_m2",
            &m.lighting_power_density_w_per_m2,
        )?;
        nonnegative("duct_leakage_fraction", &m.duct_leakage_fraction)?;
        if let Some(v) = m.duct_leakage_fraction.values.iter().find(|v| **v >= 1.0) {
            return Err(Error::Distribution {
                parameter: "duct_leakage_fraction".into(),
                message: format!("leakage {v} must be below 1"),
            });
        }
        m.heat_setpoint_c.validate("heat_setpoint_c")?;
        m.cool_setpoint_c.validate("cool_setpoint_c")?;
        let max_heat = m
            .heat_setpoint_c
            .values
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max);
        let min_cool = m
            .cool_setpoint_c
            .values
            .iter()
            .cloned()
            .fold(f64::MAX, f64::min);
        if max_heat >= min_cool {
            return Err(Error::Distribution {
                parameter: "heat_setpoint_c".into(),
                message: format!(
                    "heating setpoint {max_heat} not below cooling setpoint {min_cool}"
                ),
            });
        }
        m.zone.validate("zone")?;
        m.heating_system.validate("heating_system")?;
        for spec in &m.heating_system.values {
            spec.validate().map_err(|message| Error::Distribution {
                parameter: "heating_system".into(),
                message,
            })?;
            if !spec.kind().allowed_in(self.sector) {
                return Err(Error::Distribution {
                    parameter: "heating_system".into(),
                    message: format!(
                        "{} not available to the {} sector",
                        spec.kind().as_str(),
                        self.sector
                    ),
                });
            }
        }
        match (self.sector, &m.building_type) {
            (Sector::Commercial, Some(bt)) => bt.validate("building_type")?,
            (Sector::Commercial, None) => {
                return Err(Error::Distribution {
                    parameter: "building_type".into(),
                    message: "required for the commercial sector".into(),
                })
            }
            (Sector::Residential, Some(_)) => {
                return Err(Error::Distribution {
                    parameter: "building_type".into(),
                    message: "not part of the residential schema".into(),
                })
            }
            (Sector::Residential, None) => {}
        }
        if !(self.totals > 0.0) {
            return Err(Error::Config(format!(
                "sector total {} must be positive",
                self.totals
            )));
        }
        if !(self.coverage_fraction > 0.0 && self.coverage_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "coverage fraction {} outside (0, 1]",
                self.coverage_fraction
            )));
        }
        Ok(())
    }
}

/// One synthetic building. Envelope R-values are SI (m²·K/W).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingSample {
    pub building_id: u64,
    pub sector: Sector,
    pub zone_id: ZoneId,
    pub building_type: Option<CommercialType>,
    pub floor_area_m2: f64,
    pub ceiling_r: f64,
    pub wall_r: f64,
    pub window_u: f64,
    pub ach50: f64,
    pub duct_leakage_fraction: f64,
    pub duct_r: f64,
    pub heating: HeatingSpec,
    pub cooling: CoolingRating,
    pub heat_setpoint_c: f64,
    pub cool_setpoint_c: f64,
    pub internal_gains_w_per_m2: f64,
    pub lighting_power_density_w_per_m2: f64,
    pub led_lighting: bool,
    pub weight: f64,
}

fn unit_interval(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn stream(seed: u64, sector: Sector, parameter: &str) -> ChaCha8Rng {
    let rank = PARAMETER_NAMES
        .iter()
        .position(|p| *p == parameter)
        .expect("parameter listed in PARAMETER_NAMES") as u64;
    let sector_offset = match sector {
        Sector::Residential => 0,
        Sector::Commercial => 1 << 32,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sector_offset + rank);
    rng
}

fn draw<T: Clone>(d: &Discrete<T>, n: usize, seed: u64, sector: Sector, parameter: &str) -> Vec<T> {
    let mut rng = stream(seed, sector, parameter);
    (0..n)
        .map(|_| d.pick(unit_interval(&mut rng)).clone())
        .collect()
}

/// Draws `n` buildings. Weights are left at 1; see [`assign_weights`].
pub fn sample_stock(
    dist: &ArchetypeDistribution,
    n: usize,
    seed: u64,
) -> Result<Vec<BuildingSample>> {
    if n == 0 {
        return Err(Error::Validation("sample size must be at least 1".into()));
    }
    dist.validate()?;
    let m = &dist.marginals;
    let s = dist.sector;
    let ach50 = draw(&m.ach50, n, seed, s, "ach50");
    let building_type = m
        .building_type
        .as_ref()
        .map(|d| draw(d, n, seed, s, "building_type"));
    let ceiling = draw(&m.ceiling_r_ip, n, seed, s, "ceiling_r_ip");
    let cool_sp = draw(&m.cool_setpoint_c, n, seed, s, "cool_setpoint_c");
    let seer = draw(&m.cooling_seer, n, seed, s, "cooling_seer");
    let leakage = draw(
        &m.duct_leakage_fraction,
        n,
        seed,
        s,
        "duct_leakage_fraction",
    );
    let duct_r = draw(&m.duct_r_ip, n, seed, s, "duct_r_ip");
    let area = draw(&m.floor_area_m2, n, seed, s, "floor_area_m2");
    let heat_sp = draw(&m.heat_setpoint_c, n, seed, s, "heat_setpoint_c");
    let heating = draw(&m.heating_system, n, seed, s, "heating_system");
    let gains = draw(
        &m.internal_gains_w_per_m2,
        n,
        seed,
        s,
        "internal_gains_w_per_m2",
    );
    let lpd = draw(
        &m.lighting_power_density_w_per_m2,
        n,
        seed,
        s,
        "lighting_power_density_w_per_m2",
    );
    let wall = draw(&m.wall_r_ip, n, seed, s, "wall_r_ip");
    let window = draw(&m.window_u_si, n, seed, s, "window_u_si");
    let zone = draw(&m.zone, n, seed, s, "zone");

    Ok((0..n)
        .map(|i| BuildingSample {
            building_id: i as u64,
            sector: s,
            zone_id: zone[i].clone(),
            building_type: building_type.as_ref().map(|b| b[i]),
            floor_area_m2: area[i],
            ceiling_r: r_ip_to_si(ceiling[i]),
            wall_r: r_ip_to_si(wall[i]),
            window_u: window[i],
            ach50: ach50[i],
            duct_leakage_fraction: leakage[i],
            duct_r: r_ip_to_si(duct_r[i]),
            heating: heating[i],
            cooling: CoolingRating::Seer(seer[i]),
            heat_setpoint_c: heat_sp[i],
            cool_setpoint_c: cool_sp[i],
            internal_gains_w_per_m2: gains[i],
            lighting_power_density_w_per_m2: lpd[i],
            led_lighting: false,
            weight: 1.0,
        })
        .collect())
}

/// Scales the sample to the sector. Residential buildings each represent
/// `total / (n * coverage)` buildings; commercial buildings share one
/// multiplier `total / (coverage * modeled floorspace)`, so the covered
/// floorspace stands in for the whole sector.
pub fn assign_weights(
    mut samples: Vec<BuildingSample>,
    sector_total: f64,
    coverage_fraction: f64,
) -> Result<Vec<BuildingSample>> {
    if samples.is_empty() {
        return Err(Error::Validation("cannot weight an empty sample".into()));
    }
    if !(sector_total > 0.0) {
        return Err(Error::Validation(format!(
            "sector total {sector_total} must be positive"
        )));
    }
    if !(coverage_fraction > 0.0 && coverage_fraction <= 1.0) {
        return Err(Error::Validation(format!(
            "coverage fraction {coverage_fraction} outside (0, 1]"
        )));
    }
    let sector = samples[0].sector;
    if samples.iter().any(|b| b.sector != sector) {
        return Err(Error::Validation("samples mix sectors".into()));
    }
    let weight = match sector {
        Sector::Residential => sector_total / (samples.len() as f64 * coverage_fraction),
        Sector::Commercial => {
            let floorspace: f64 = samples.iter().map(|b| b.floor_area_m2).sum();
            sector_total / (coverage_fraction * floorspace)
        }
    };
    for b in &mut samples {
        b.weight = weight;
    }
    Ok(samples)
}

/// Samples and weights a sector in one step.
pub fn weighted_stock(
    dist: &ArchetypeDistribution,
    n: usize,
    seed: u64,
) -> Result<Vec<BuildingSample>> {
    assign_weights(
        sample_stock(dist, n, seed)?,
        dist.totals,
        dist.coverage_fraction,
    )
}

/// Mean annual electricity per sampled building (kWh) for each sample size.
pub fn convergence_scan(
    dist: &ArchetypeDistribution,
    sizes: &[usize],
    seed: u64,
    weather: &BTreeMap<ZoneId, ZoneWeatherSeries>,
    params: &EngineParams,
) -> Result<BTreeMap<usize, f64>> {
    if sizes.is_empty() {
        return Err(Error::Validation(
            "convergence scan needs at least one size".into(),
        ));
    }
    if sizes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation(
            "convergence sizes must be ascending".into(),
        ));
    }
    let mut out = BTreeMap::new();
    for &n in sizes {
        let samples = sample_stock(dist, n, seed)?;
        let annual: Vec<f64> = samples
            .par_iter()
            .map(|b| {
                let w = weather
                    .get(&b.zone_id)
                    .ok_or_else(|| Error::missing(format!("weather for zone {}", b.zone_id)))?;
                let d = sim::simulate_building(b, w, params)?;
                Ok(d.total_electricity_kwh())
            })
            .collect::<Result<_>>()?;
        let mean = annual.iter().sum::<f64>() / n as f64;
        out.insert(n, mean);
    }
    Ok(out)
}

/// Writes one CSV row per building with every parameter and its weight.
pub fn write_sample_csv(samples: &[BuildingSample], path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        building_id: u64,
        sector: &'a str,
        zone_id: &'a str,
        building_type: String,
        floor_area_m2: f64,
        ceiling_r_si: f64,
        wall_r_si: f64,
        window_u_si: f64,
        ach50: f64,
        duct_leakage_fraction: f64,
        duct_r_si: f64,
        heating_kind: &'a str,
        heating_rating: String,
        supplemental: String,
        cooling_rating: f64,
        heat_setpoint_c: f64,
        cool_setpoint_c: f64,
        internal_gains_w_per_m2: f64,
        lighting_power_density_w_per_m2: f64,
        led_lighting: bool,
        weight: f64,
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| crate::weather::csv_error(path, e))?;
    for b in samples {
        let rating = match b.heating {
            HeatingSpec::GasFurnace { afue } | HeatingSpec::GasBoiler { afue } => {
                format!("afue={afue}")
            }
            HeatingSpec::Ashp { hspf, .. } => format!("hspf={hspf}"),
            HeatingSpec::CommercialHpRtu { ieer, .. } => format!("ieer={ieer}"),
            _ => String::new(),
        };
        w.serialize(Row {
            building_id: b.building_id,
            sector: b.sector.as_str(),
            zone_id: b.zone_id.as_str(),
            building_type: b
                .building_type
                .map(|t| {
                    serde_json::to_value(t)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default()
                })
                .unwrap_or_default(),
            floor_area_m2: b.floor_area_m2,
            ceiling_r_si: b.ceiling_r,
            wall_r_si: b.wall_r,
            window_u_si: b.window_u,
            ach50: b.ach50,
            duct_leakage_fraction: b.duct_leakage_fraction,
            duct_r_si: b.duct_r,
            heating_kind: b.heating.kind().as_str(),
            heating_rating: rating,
            supplemental: format!("{:?}", b.heating.supplemental()).to_lowercase(),
            cooling_rating: b.cooling.value(),
            heat_setpoint_c: b.heat_setpoint_c,
            cool_setpoint_c: b.cool_setpoint_c,
            internal_gains_w_per_m2: b.internal_gains_w_per_m2,
            lighting_power_density_w_per_m2: b.lighting_power_density_w_per_m2,
            led_lighting: b.led_lighting,
            weight: b.weight,
        })
        .map_err(|e| crate::weather::csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
