//! Fixed hour-of-week occupancy profiles (fraction of peak internal load).

use crate::stock::{CommercialType, Sector};

const RESIDENTIAL_WEEKDAY: [f64; 24] = [
    0.45, 0.40, 0.38, 0.37, 0.38, 0.45, 0.65, 0.80, 0.70, 0.55, 0.50, 0.50, 0.50, 0.50, 0.52, 0.58,
    0.70, 0.88, 1.00, 0.98, 0.92, 0.82, 0.68, 0.55,
];
const RESIDENTIAL_WEEKEND: [f64; 24] = [
    0.50, 0.44, 0.40, 0.38, 0.38, 0.40, 0.48, 0.62, 0.75, 0.78, 0.74, 0.70, 0.68, 0.66, 0.66, 0.70,
    0.78, 0.90, 1.00, 0.98, 0.92, 0.84, 0.72, 0.60,
];

const OFFICE_WEEKDAY: [f64; 24] = [
    0.30, 0.30, 0.30, 0.30, 0.30, 0.35, 0.50, 0.80, 0.95, 1.00, 1.00, 1.00, 0.95, 1.00, 1.00, 1.00,
    0.95, 0.80, 0.55, 0.40, 0.35, 0.30, 0.30, 0.30,
];
const RETAIL_DAY: [f64; 24] = [
    0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.35, 0.50, 0.75, 0.95, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00,
    1.00, 1.00, 0.95, 0.90, 0.75, 0.45, 0.30, 0.25,
];
const SCHOOL_WEEKDAY: [f64; 24] = [
    0.20, 0.20, 0.20, 0.20, 0.20, 0.25, 0.50, 0.90, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 0.95, 0.70,
    0.50, 0.35, 0.30, 0.25, 0.20, 0.20, 0.20, 0.20,
];
const WAREHOUSE_WEEKDAY: [f64; 24] = [
    0.35, 0.35, 0.35, 0.35, 0.35, 0.50, 0.80, 0.95, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 0.95,
    0.85, 0.60, 0.45, 0.40, 0.35, 0.35, 0.35, 0.35,
];
const HOSPITAL_DAY: [f64; 24] = [
    0.75, 0.72, 0.72, 0.72, 0.74, 0.78, 0.85, 0.95, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00,
    0.98, 0.95, 0.92, 0.88, 0.85, 0.82, 0.80, 0.78,
];
const RESTAURANT_DAY: [f64; 24] = [
    0.20, 0.20, 0.20, 0.20, 0.20, 0.25, 0.45, 0.60, 0.65, 0.65, 0.80, 1.00, 1.00, 0.85, 0.65, 0.65,
    0.80, 1.00, 1.00, 0.95, 0.80, 0.55, 0.35, 0.25,
];
const LODGING_DAY: [f64; 24] = [
    0.55, 0.50, 0.48, 0.48, 0.50, 0.60, 0.80, 0.90, 0.80, 0.65, 0.60, 0.58, 0.58, 0.58, 0.60, 0.65,
    0.75, 0.90, 1.00, 1.00, 0.95, 0.85, 0.72, 0.62,
];
const COMMERCIAL_CLOSED: f64 = 0.30;

/// Fraction of peak internal gains and "other" electricity at `hour_of_week`
/// (Monday 00:00 = 0).
pub fn occupancy_fraction(
    sector: Sector,
    building_type: Option<CommercialType>,
    hour_of_week: usize,
) -> f64 {
    let day = (hour_of_week / 24) % 7;
    let hour = hour_of_week % 24;
    let weekend = day >= 5;
    match sector {
        Sector::Residential => {
            if weekend {
                RESIDENTIAL_WEEKEND[hour]
            } else {
                RESIDENTIAL_WEEKDAY[hour]
            }
        }
        Sector::Commercial => match building_type.unwrap_or(CommercialType::Office) {
            CommercialType::Office => weekday_only(&OFFICE_WEEKDAY, weekend, hour),
            CommercialType::School => weekday_only(&SCHOOL_WEEKDAY, weekend, hour),
            CommercialType::Warehouse => weekday_only(&WAREHOUSE_WEEKDAY, weekend, hour),
            CommercialType::Retail => RETAIL_DAY[hour],
            CommercialType::Hospital => HOSPITAL_DAY[hour],
            CommercialType::Restaurant => RESTAURANT_DAY[hour],
            CommercialType::Lodging => LODGING_DAY[hour],
        },
    }
}

fn weekday_only(profile: &[f64; 24], weekend: bool, hour: usize) -> f64 {
    if weekend {
        COMMERCIAL_CLOSED.min(profile[hour])
    } else {
        profile[hour]
    }
}
