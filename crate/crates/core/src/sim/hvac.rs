//! Equipment sizing, heat-pump performance, and hourly HVAC energy.

use serde::{Deserialize, Serialize};

use super::params::{CopAnchors, DesignTemperatures, EngineParams, HeatPumpParams};
use super::{HourlyEndUseDemand, ThermalLoads};
use crate::error::{Error, Result};
use crate::stock::{CoolingRating, HeatingKind, HeatingSpec, Supplemental};
use crate::units::btu_per_wh_to_cop;
use crate::weather::ZoneWeatherSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatingRating {
    Hspf(f64),
    Afue(f64),
    Ieer(f64),
    Resistance,
    /// Performance taken entirely from the configured curve.
    Curve,
}

/// Piecewise-linear heat-pump heating performance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatPumpCurve {
    pub anchors: CopAnchors,
    pub rating_temperature_c: f64,
    pub low_temperature_c: f64,
    pub capacity_fraction_at_cutoff: f64,
    pub capacity_fraction_min: f64,
    pub capacity_fraction_max: f64,
    pub min_cop: f64,
}

impl HeatPumpCurve {
    fn from_params(anchors: CopAnchors, hp: &HeatPumpParams) -> Self {
        HeatPumpCurve {
            anchors,
            rating_temperature_c: hp.rating_temperature_c,
            low_temperature_c: hp.low_temperature_c,
            capacity_fraction_at_cutoff: hp.capacity_fraction_at_cutoff,
            capacity_fraction_min: hp.capacity_fraction_min,
            capacity_fraction_max: hp.capacity_fraction_max,
            min_cop: hp.min_cop,
        }
    }

    /// Curve for a heating spec, or `None` when the equipment is not a heat pump.
    pub fn for_spec(spec: &HeatingSpec, hp: &HeatPumpParams) -> Option<Self> {
        let anchors = match *spec {
            HeatingSpec::Ashp { hspf, .. } => {
                let scale = hspf / hp.reference_hspf;
                CopAnchors {
                    cop_47: hp.ashp.cop_47 * scale,
                    cop_17: hp.ashp.cop_17 * scale,
                }
            }
            HeatingSpec::CommercialHpRtu { .. } => hp.hp_rtu,
            HeatingSpec::HpBoiler { .. } => hp.hp_boiler,
            _ => return None,
        };
        Some(Self::from_params(anchors, hp))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvacSystem {
    pub kind: HeatingKind,
    pub heating_capacity_kw: f64,
    pub cooling_capacity_kw: f64,
    pub cooling_rating: CoolingRating,
    pub heating_rating: HeatingRating,
    pub ashp_cutoff_c: f64,
    pub supplemental: Supplemental,
    pub supplemental_capacity_kw: f64,
    pub curve: Option<HeatPumpCurve>,
}

impl HvacSystem {
    pub fn cooling_cop(&self) -> f64 {
        btu_per_wh_to_cop(self.cooling_rating.value())
    }
}

/// Design-point loads of one building, W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignLoads {
    pub heating_w: f64,
    pub cooling_w: f64,
}

/// Heating sized without internal gains; cooling with peak gains.
pub fn design_loads(
    ua_total: f64,
    duct_efficiency: f64,
    heat_setpoint_c: f64,
    cool_setpoint_c: f64,
    peak_gains_w: f64,
    design: DesignTemperatures,
) -> DesignLoads {
    DesignLoads {
        heating_w: (ua_total * (heat_setpoint_c - design.heating_c)).max(0.0) / duct_efficiency,
        cooling_w: (ua_total * (design.cooling_c - cool_setpoint_c) + peak_gains_w).max(0.0)
            / duct_efficiency,
    }
}

/// Capacities are `sizing_factor` times the design loads with a floor of
/// `min_capacity_kw`. Heat-pump capacity is the nominal value at the 8.3 °C
/// rating point; [`heat_pump_cop`] derates it at colder temperatures.
pub fn size_system(
    heating: &HeatingSpec,
    cooling: CoolingRating,
    loads: DesignLoads,
    params: &EngineParams,
) -> HvacSystem {
    let size = |w: f64| (params.sizing_factor * w / 1000.0).max(params.min_capacity_kw);
    let heating_capacity_kw = size(loads.heating_w);
    let heating_rating = match *heating {
        HeatingSpec::ElectricResistance => HeatingRating::Resistance,
        HeatingSpec::GasFurnace { afue } | HeatingSpec::GasBoiler { afue } => {
            HeatingRating::Afue(afue)
        }
        HeatingSpec::Ashp { hspf, .. } => HeatingRating::Hspf(hspf),
        HeatingSpec::CommercialHpRtu { ieer, .. } => HeatingRating::Ieer(ieer),
        HeatingSpec::HpBoiler { .. } => HeatingRating::Curve,
    };
    let supplemental = heating.supplemental();
    HvacSystem {
        kind: heating.kind(),
        heating_capacity_kw,
        cooling_capacity_kw: size(loads.cooling_w),
        cooling_rating: cooling,
        heating_rating,
        ashp_cutoff_c: params.heat_pump.cutoff_c,
        supplemental,
        supplemental_capacity_kw: if supplemental == Supplemental::None {
            0.0
        } else {
            heating_capacity_kw
        },
        curve: HeatPumpCurve::for_spec(heating, &params.heat_pump),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatPumpOperation {
    /// Zero when the compressor is locked out.
    pub cop: f64,
    /// Available capacity as a fraction of nominal.
    pub capacity_fraction: f64,
}

impl HeatPumpOperation {
    pub fn is_running(&self) -> bool {
        self.capacity_fraction > 0.0
    }
}

/// COP follows the line through (8.3 °C, COP₄₇) and (−8.3 °C, COP₁₇),
/// extrapolated and floored at 1. Capacity falls linearly from 1.0 at the
/// rating point to the cutoff fraction at the cutoff temperature. Strictly
/// below the cutoff the unit is off.
pub fn heat_pump_cop(system: &HvacSystem, t_out: f64) -> Result<HeatPumpOperation> {
    let curve = match (&system.curve, system.kind.is_heat_pump()) {
        (Some(c), true) => c,
        _ => {
            return Err(Error::Validation(format!(
                "{} is not a heat pump",
                system.kind.as_str()
            )))
        }
    };
    if t_out < system.ashp_cutoff_c {
        return Ok(HeatPumpOperation {
            cop: 0.0,
            capacity_fraction: 0.0,
        });
    }
    let a = curve.anchors;
    let slope = (a.cop_47 - a.cop_17) / (curve.rating_temperature_c - curve.low_temperature_c);
    let cop = (a.cop_17 + slope * (t_out - curve.low_temperature_c)).max(curve.min_cop);
    let cap_slope = (1.0 - curve.capacity_fraction_at_cutoff)
        / (curve.rating_temperature_c - system.ashp_cutoff_c);
    let capacity_fraction = (1.0 + cap_slope * (t_out - curve.rating_temperature_c))
        .clamp(curve.capacity_fraction_min, curve.capacity_fraction_max);
    Ok(HeatPumpOperation {
        cop,
        capacity_fraction,
    })
}

/// Electricity and fuel needed to meet hourly thermal loads.
///
/// Heat pumps serve what their derated capacity allows; supplemental heat
/// tops the delivery up to the supplemental capacity; anything left is unmet.
pub fn hvac_electricity(
    loads: &ThermalLoads,
    system: &HvacSystem,
    weather: &ZoneWeatherSeries,
    params: &EngineParams,
) -> Result<HourlyEndUseDemand> {
    let n = weather.len();
    for len in [loads.heating_kwh_th.len(), loads.cooling_kwh_th.len()] {
        if len != n {
            return Err(Error::Alignment {
                expected: n,
                found: len,
            });
        }
    }
    let mut out = HourlyEndUseDemand::zeros(n);
    let cooling_cop = system.cooling_cop();
    for h in 0..n {
        let heat = loads.heating_kwh_th[h];
        let cool = loads.cooling_kwh_th[h];
        if heat > 0.0 {
            let (elec, gas, delivered) = serve_heating(heat, system, weather.dry_bulb[h], params)?;
            out.heating_kwh_e[h] = elec;
            out.gas_kwh_th[h] = gas;
            out.delivered_kwh_th[h] += delivered;
            out.unmet_kwh_th[h] += heat - delivered;
        }
        if cool > 0.0 {
            let served = cool.min(system.cooling_capacity_kw);
            out.cooling_kwh_e[h] = served / cooling_cop;
            out.delivered_kwh_th[h] += served;
            out.unmet_kwh_th[h] += cool - served;
        }
    }
    Ok(out)
}

/// Returns (electricity, fuel, heat delivered) for one hour of heating load.
fn serve_heating(
    load: f64,
    system: &HvacSystem,
    t_out: f64,
    params: &EngineParams,
) -> Result<(f64, f64, f64)> {
    let cap = system.heating_capacity_kw;
    match system.heating_rating {
        HeatingRating::Resistance => {
            let served = load.min(cap);
            Ok((served, 0.0, served))
        }
        HeatingRating::Afue(afue) => {
            let served = load.min(cap);
            Ok((params.air_handler_fraction * served, served / afue, served))
        }
        HeatingRating::Hspf(_) | HeatingRating::Ieer(_) | HeatingRating::Curve => {
            let op = heat_pump_cop(system, t_out)?;
            let hp_served = load.min(cap * op.capacity_fraction);
            let mut elec = if hp_served > 0.0 {
                hp_served / op.cop
            } else {
                0.0
            };
            let mut gas = 0.0;
            // The supplemental coil shares the air handler with the heat pump,
            // so together they deliver at most the supplemental capacity.
            let room = (system.supplemental_capacity_kw - hp_served).max(0.0);
            let supp_served = (load - hp_served).min(room);
            match system.supplemental {
                Supplemental::ElectricResistance => elec += supp_served,
                Supplemental::Gas => gas += supp_served / params.supplemental_gas_efficiency,
                Supplemental::None => {}
            }
            Ok((elec, gas, hp_served + supp_served))
        }
    }
}
