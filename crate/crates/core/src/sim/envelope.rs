use serde::{Deserialize, Serialize};

use super::params::EngineParams;
use crate::stock::BuildingSample;
use crate::units::AIR_HEAT_CAPACITY_W_PER_M3K_ACH;

/// Lumped conductances of a single-zone building.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    /// Conduction through ceiling, walls, windows and slab edge, W/K.
    pub ua_envelope: f64,
    /// Air leakage at natural conditions, W/K.
    pub infiltration_ua: f64,
    /// Fraction of equipment output that reaches the conditioned space.
    pub duct_distribution_efficiency: f64,
    pub floor_area: f64,
}

impl EnvelopeSpec {
    pub fn ua_total(&self) -> f64 {
        self.ua_envelope + self.infiltration_ua
    }

    pub fn of(building: &BuildingSample, params: &EngineParams) -> Self {
        let g = params.geometry(building.sector);
        let area = building.floor_area_m2;
        let stories = (area / g.max_footprint_m2).ceil().max(1.0);
        let footprint = area / stories;
        let perimeter = 4.0 * footprint.sqrt();
        let gross_wall = perimeter * g.story_height_m * stories;
        let window = g.window_to_wall_ratio * gross_wall;
        let opaque_wall = gross_wall - window;

        let ua_envelope = footprint / (building.ceiling_r + g.ceiling_extra_r_si)
            + opaque_wall / (building.wall_r + g.wall_extra_r_si)
            + window * building.window_u
            + g.slab_edge_w_per_mk * perimeter;

        let volume = area * g.story_height_m;
        let natural_ach = building.ach50 / params.ach50_divisor;
        let infiltration_ua = AIR_HEAT_CAPACITY_W_PER_M3K_ACH * volume * natural_ach;

        let conduction_loss = (params.duct_conduction_coefficient / building.duct_r).min(0.5);
        let duct_distribution_efficiency =
            ((1.0 - building.duct_leakage_fraction) * (1.0 - conduction_loss)).clamp(0.05, 1.0);

        EnvelopeSpec {
            ua_envelope,
            infiltration_ua,
            duct_distribution_efficiency,
            floor_area: area,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stock::tests::point_distribution;
    use crate::stock::{sample_stock, Sector};

    #[test]
    fn better_insulation_lowers_ua() {
        let params = EngineParams::default();
        let b = sample_stock(&point_distribution(Sector::Residential), 1, 0)
            .unwrap()
            .remove(0);
        let base = EnvelopeSpec::of(&b, &params);
        let mut better = b.clone();
        better.ceiling_r *= 2.0;
        better.ach50 = 7.0;
        better.duct_leakage_fraction = 0.075;
        let upgraded = EnvelopeSpec::of(&better, &params);
        assert!(upgraded.ua_envelope < base.ua_envelope);
        assert!(upgraded.infiltration_ua < base.infiltration_ua);
        assert!(upgraded.duct_distribution_efficiency > base.duct_distribution_efficiency);
        assert!(
            base.duct_distribution_efficiency > 0.0 && base.duct_distribution_efficiency <= 1.0
        );
    }

    #[test]
    fn infiltration_follows_ach50_rule() {
        let params = EngineParams::default();
        let b = sample_stock(&point_distribution(Sector::Residential), 1, 0)
            .unwrap()
            .remove(0);
        let env = EnvelopeSpec::of(&b, &params);
        let expected = 1.2 * 1005.0 / 3600.0 * 150.0 * 2.7 * (10.0 / 20.0);
        assert!((env.infiltration_ua - expected).abs() < 1e-9);
    }
}
