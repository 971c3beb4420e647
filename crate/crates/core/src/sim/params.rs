use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stock::Sector;
use crate::weather::ZoneId;

/// Simple box geometry used to turn floor area into surface areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub story_height_m: f64,
    /// Buildings above this footprint get another story.
    pub max_footprint_m2: f64,
    pub window_to_wall_ratio: f64,
    /// Slab-edge loss per metre of perimeter, W/(m·K).
    pub slab_edge_w_per_mk: f64,
    /// Air films and framing added to the insulation R-value, m²·K/W.
    pub ceiling_extra_r_si: f64,
    pub wall_extra_r_si: f64,
}

impl Geometry {
    pub fn residential() -> Self {
        Geometry {
            story_height_m: 2.7,
            max_footprint_m2: 250.0,
            window_to_wall_ratio: 0.15,
            slab_edge_w_per_mk: 1.0,
            ceiling_extra_r_si: 0.5,
            wall_extra_r_si: 0.5,
        }
    }

    pub fn commercial() -> Self {
        Geometry {
            story_height_m: 4.0,
            max_footprint_m2: 5000.0,
            window_to_wall_ratio: 0.3,
            slab_edge_w_per_mk: 1.2,
            ceiling_extra_r_si: 0.4,
            wall_extra_r_si: 0.4,
        }
    }
}

/// Anchor points of a heat-pump heating COP curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopAnchors {
    /// COP at the 8.3 °C (47 °F) rating point.
    pub cop_47: f64,
    /// COP at −8.3 °C (17 °F).
    pub cop_17: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatPumpParams {
    /// Residential ASHP anchors at `reference_hspf`; other HSPFs scale linearly.
    pub ashp: CopAnchors,
    pub reference_hspf: f64,
    pub hp_rtu: CopAnchors,
    pub hp_boiler: CopAnchors,
    pub rating_temperature_c: f64,
    pub low_temperature_c: f64,
    /// Compressor lockout; below this the heat pump delivers nothing.
    pub cutoff_c: f64,
    /// Capacity fraction reached at `cutoff_c` (1.0 at the rating point).
    pub capacity_fraction_at_cutoff: f64,
    pub capacity_fraction_min: f64,
    pub capacity_fraction_max: f64,
    pub min_cop: f64,
}

impl Default for HeatPumpParams {
    fn default() -> Self {
        HeatPumpParams {
            ashp: CopAnchors {
                cop_47: 3.8,
                cop_17: 2.2,
            },
            reference_hspf: 9.3,
            hp_rtu: CopAnchors {
                cop_47: 3.6,
                cop_17: 2.3,
            },
            hp_boiler: CopAnchors {
                cop_47: 3.0,
                cop_17: 2.0,
            },
            rating_temperature_c: 8.3,
            low_temperature_c: -8.3,
            cutoff_c: -17.8,
            capacity_fraction_at_cutoff: 0.55,
            capacity_fraction_min: 0.55,
            capacity_fraction_max: 1.15,
            min_cop: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignTemperatures {
    pub heating_c: f64,
    pub cooling_c: f64,
}

/// Physical constants and defaults for the single-zone engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineParams {
    pub residential_geometry: Geometry,
    pub commercial_geometry: Geometry,
    /// Natural ACH = ACH50 / divisor.
    pub ach50_divisor: f64,
    /// Duct conduction loss fraction = coefficient / duct R (SI).
    pub duct_conduction_coefficient: f64,
    pub sizing_factor: f64,
    pub min_capacity_kw: f64,
    pub heat_pump: HeatPumpParams,
    /// Fan/pump electricity of fuel-fired systems as a share of heat delivered.
    pub air_handler_fraction: f64,
    /// Seasonal efficiency of gas supplemental heat.
    pub supplemental_gas_efficiency: f64,
    pub design_temperatures: BTreeMap<ZoneId, DesignTemperatures>,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            residential_geometry: Geometry::residential(),
            commercial_geometry: Geometry::commercial(),
            ach50_divisor: 20.0,
            duct_conduction_coefficient: 0.062,
            sizing_factor: 1.25,
            min_capacity_kw: 1.0,
            heat_pump: HeatPumpParams::default(),
            air_handler_fraction: 0.03,
            supplemental_gas_efficiency: 0.8,
            design_temperatures: texas_design_temperatures(),
        }
    }
}

impl EngineParams {
    pub fn geometry(&self, sector: Sector) -> &Geometry {
        match sector {
            Sector::Residential => &self.residential_geometry,
            Sector::Commercial => &self.commercial_geometry,
        }
    }

    pub fn design_for(&self, zone: &ZoneId) -> Result<DesignTemperatures> {
        self.design_temperatures
            .get(zone)
            .copied()
            .ok_or_else(|| Error::missing(format!("design temperatures for zone {zone}")))
    }

    pub fn validate(&self) -> Result<()> {
        let hp = &self.heat_pump;
        let checks = [
            (self.ach50_divisor > 0.0, "ach50_divisor must be positive"),
            (self.sizing_factor > 0.0, "sizing_factor must be positive"),
            (
                self.min_capacity_kw > 0.0,
                "min_capacity_kw must be positive",
            ),
            (
                hp.ashp.cop_47 >= hp.ashp.cop_17,
                "ASHP COP must not rise as it gets colder",
            ),
            (
                hp.rating_temperature_c > hp.low_temperature_c,
                "rating point must be warmer than the low point",
            ),
            (
                hp.rating_temperature_c > hp.cutoff_c,
                "cutoff must be below the rating point",
            ),
            (
                hp.capacity_fraction_min <= hp.capacity_fraction_max,
                "capacity clamp is inverted",
            ),
            (
                self.supplemental_gas_efficiency > 0.0 && self.supplemental_gas_efficiency <= 1.0,
                "supplemental_gas_efficiency outside (0, 1]",
            ),
            (
                (0.0..1.0).contains(&self.air_handler_fraction),
                "air_handler_fraction outside [0, 1)",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::Config((*msg).to_string())),
            None => Ok(()),
        }
    }
}

/// Approximate 99.6 % heating and 0.4 % cooling design temperatures for the
/// largest city in each ERCOT weather zone.
pub fn texas_design_temperatures() -> BTreeMap<ZoneId, DesignTemperatures> {
    [
        ("coast", -2.3, 36.0),
        ("east", -4.6, 36.3),
        ("far_west", -7.5, 37.8),
        ("north", -8.5, 39.2),
        ("north_central", -5.6, 37.8),
        ("south", 0.6, 35.6),
        ("south_central", -3.1, 37.2),
        ("west", -7.2, 37.8),
    ]
    .into_iter()
    .map(|(z, h, c)| {
        (
            ZoneId::from(z),
            DesignTemperatures {
                heating_c: h,
                cooling_c: c,
            },
        )
    })
    .collect()
}
