//! Unit conversions shared across the engine.

/// ft²·°F·h/Btu to m²·K/W.
pub const R_IP_TO_SI: f64 = 0.1761;

/// Wh of heat per Btu; turns SEER/IEER/HSPF (Btu/Wh) into a COP.
pub const WH_PER_BTU: f64 = 0.293;

/// Volumetric heat capacity of air divided by 3600 s, W/(m³·K) per air change per hour.
pub const AIR_HEAT_CAPACITY_W_PER_M3K_ACH: f64 = 1.2 * 1005.0 / 3600.0;

pub fn r_ip_to_si(r_ip: f64) -> f64 {
    r_ip * R_IP_TO_SI
}

pub fn btu_per_wh_to_cop(rating: f64) -> f64 {
    rating * WH_PER_BTU
}

pub fn celsius_to_fahrenheit(c: f64) -> f64 {
    c * 9.0 / 5.0 + 32.0
}
