mod common;

use std::collections::BTreeMap;

use chrono::Datelike;
use common::{constant_weather, house, params};
use stockgrid::sim::{
    aggregate_sector, autosize, design_loads, heat_pump_cop, hvac_electricity, simulate_building,
    simulate_sector, size_system, thermal_load, CopAnchors, DesignLoads, DesignTemperatures,
    EnvelopeSpec, HourlyEndUseDemand, ThermalLoads,
};
use stockgrid::stock::{BuildingSample, CoolingRating, HeatingSpec, Supplemental};
use stockgrid::synthetic;
use stockgrid::weather::ZoneId;

const ASHP: HeatingSpec = HeatingSpec::Ashp {
    hspf: 9.3,
    supplemental: Supplemental::ElectricResistance,
};

fn no_gains(mut b: BuildingSample) -> BuildingSample {
    b.internal_gains_w_per_m2 = 0.0;
    b.lighting_power_density_w_per_m2 = 0.0;
    b
}

#[test]
fn heating_load_is_zero_at_setpoint() {
    let b = no_gains(house(HeatingSpec::ElectricResistance));
    let loads = thermal_load(
        &b,
        &constant_weather("coast", 2021, b.heat_setpoint_c),
        &params(),
    )
    .unwrap();
    assert!(loads.heating_kwh_th.iter().all(|v| *v == 0.0));
}

#[test]
fn heating_load_is_conductance_times_delta_t() {
    let b = no_gains(house(HeatingSpec::ElectricResistance));
    let env = EnvelopeSpec::of(&b, &params());
    let t = b.heat_setpoint_c - 20.0;
    let loads = thermal_load(&b, &constant_weather("coast", 2021, t), &params()).unwrap();
    let expected = env.ua_total() * 20.0 / 1000.0 / env.duct_distribution_efficiency;
    assert!((loads.heating_kwh_th[0] - expected).abs() < 1e-12);
    assert!(env.duct_distribution_efficiency > 0.0 && env.duct_distribution_efficiency <= 1.0);
    assert!(env.ua_envelope >= 0.0 && env.infiltration_ua >= 0.0);
}

#[test]
fn gains_offset_mild_heating() {
    let mut b = house(HeatingSpec::ElectricResistance);
    b.internal_gains_w_per_m2 = 40.0;
    let loads = thermal_load(
        &b,
        &constant_weather("coast", 2021, b.heat_setpoint_c - 0.5),
        &params(),
    )
    .unwrap();
    assert!(loads.heating_kwh_th.iter().all(|v| *v == 0.0));
    assert!(loads.cooling_kwh_th.iter().any(|v| *v > 0.0));
}

#[test]
fn sizing_examples() {
    let p = params();
    let design = DesignTemperatures {
        heating_c: -10.0,
        cooling_c: 35.0,
    };
    let loads = design_loads(300.0, 1.0, 20.0, 24.0, 0.0, design);
    let s = size_system(
        &HeatingSpec::ElectricResistance,
        CoolingRating::Seer(13.0),
        loads,
        &p,
    );
    assert!((s.heating_capacity_kw - 11.25).abs() < 1e-12);

    let doubled = design_loads(600.0, 1.0, 20.0, 24.0, 0.0, design);
    let s2 = size_system(
        &HeatingSpec::ElectricResistance,
        CoolingRating::Seer(13.0),
        doubled,
        &p,
    );
    assert!((s2.heating_capacity_kw - 2.0 * s.heating_capacity_kw).abs() < 1e-12);
    assert!((s2.cooling_capacity_kw - 2.0 * s.cooling_capacity_kw).abs() < 1e-12);

    let zero = design_loads(0.0, 1.0, 20.0, 24.0, 0.0, design);
    let s0 = size_system(
        &HeatingSpec::ElectricResistance,
        CoolingRating::Seer(13.0),
        zero,
        &p,
    );
    assert_eq!((s0.heating_capacity_kw, s0.cooling_capacity_kw), (1.0, 1.0));
}

#[test]
fn autosized_capacities_positive() {
    for spec in [
        HeatingSpec::ElectricResistance,
        HeatingSpec::GasFurnace { afue: 0.8 },
        ASHP,
    ] {
        let s = autosize(&house(spec), &params()).unwrap();
        assert!(s.heating_capacity_kw >= 1.0 && s.cooling_capacity_kw >= 1.0);
    }
    let mut b = house(ASHP);
    b.zone_id = ZoneId::from("atlantis");
    assert!(autosize(&b, &params()).is_err());
}

#[test]
fn heat_pump_curve_examples() {
    let s = autosize(&house(ASHP), &params()).unwrap();
    let rated = heat_pump_cop(&s, 8.3).unwrap();
    assert!((rated.cop - 3.8).abs() < 1e-12);
    assert!((rated.capacity_fraction - 1.0).abs() < 1e-12);

    let off = heat_pump_cop(&s, -17.9).unwrap();
    assert_eq!(off.capacity_fraction, 0.0);
    assert!(!off.is_running());
    let at_cutoff = heat_pump_cop(&s, -17.8).unwrap();
    assert!((at_cutoff.capacity_fraction - 0.55).abs() < 1e-12);

    let zero = heat_pump_cop(&s, 0.0).unwrap();
    assert!(zero.cop > 2.2 && zero.cop < 3.8);
    let colder = heat_pump_cop(&s, -1.0).unwrap();
    assert!(colder.cop < zero.cop);

    let resistance = autosize(&house(HeatingSpec::ElectricResistance), &params()).unwrap();
    assert!(heat_pump_cop(&resistance, 0.0).is_err());
}

#[test]
fn dispatch_examples() {
    let p = params();
    let w = constant_weather("coast", 2021, 8.3);
    let mut loads = ThermalLoads::zeros(8760);
    loads.heating_kwh_th[0] = 6.0;
    let big = DesignLoads {
        heating_w: 16000.0,
        cooling_w: 1000.0,
    };

    let resistance = size_system(
        &HeatingSpec::ElectricResistance,
        CoolingRating::Seer(13.0),
        big,
        &p,
    );
    let d = hvac_electricity(&loads, &resistance, &w, &p).unwrap();
    assert_eq!(d.heating_kwh_e[0], 6.0);

    let mut hp = size_system(&ASHP, CoolingRating::Seer(18.0), big, &p);
    hp.curve.as_mut().unwrap().anchors = CopAnchors {
        cop_47: 3.0,
        cop_17: 3.0,
    };
    let d = hvac_electricity(&loads, &hp, &w, &p).unwrap();
    assert!((d.heating_kwh_e[0] - 2.0).abs() < 1e-12);

    hp.curve.as_mut().unwrap().anchors = CopAnchors {
        cop_47: 2.0,
        cop_17: 2.0,
    };
    hp.heating_capacity_kw = 6.0;
    loads.heating_kwh_th[0] = 10.0;
    let d = hvac_electricity(&loads, &hp, &w, &p).unwrap();
    assert!((d.heating_kwh_e[0] - 7.0).abs() < 1e-12);
    assert_eq!(d.unmet_kwh_th[0], 0.0);
}

#[test]
fn cooling_uses_seer_conversion() {
    let p = params();
    let w = constant_weather("coast", 2021, 35.0);
    let mut loads = ThermalLoads::zeros(8760);
    loads.cooling_kwh_th[0] = 3.0;
    let s = size_system(
        &HeatingSpec::ElectricResistance,
        CoolingRating::Seer(13.0),
        DesignLoads {
            heating_w: 1000.0,
            cooling_w: 8000.0,
        },
        &p,
    );
    let d = hvac_electricity(&loads, &s, &w, &p).unwrap();
    assert!((d.cooling_kwh_e[0] - 3.0 / (13.0 * 0.293)).abs() < 1e-12);
}

#[test]
fn setpoint_weather_needs_no_conditioning() {
    let mut b = house(ASHP);
    b.internal_gains_w_per_m2 = 0.5;
    b.lighting_power_density_w_per_m2 = 0.5;
    let d = simulate_building(
        &b,
        &constant_weather("coast", 2021, b.heat_setpoint_c),
        &params(),
    )
    .unwrap();
    assert!(d.heating_kwh_e.iter().all(|v| *v == 0.0));
    assert!(d.cooling_kwh_e.iter().all(|v| *v == 0.0));
    assert!(d.other_kwh_e.iter().all(|v| *v > 0.0));
}

#[test]
fn identical_buildings_identical_output() {
    let w = synthetic::weather_year(2021).unwrap();
    let b = house(ASHP);
    let mut c = b.clone();
    c.building_id = 7;
    let coast = &w[&ZoneId::from("coast")];
    assert_eq!(
        simulate_building(&b, coast, &params()).unwrap(),
        simulate_building(&c, coast, &params()).unwrap()
    );
}

#[test]
fn outbreak_week_has_most_heating_electricity() {
    let weather = synthetic::weather_year(2021).unwrap();
    for spec in [HeatingSpec::ElectricResistance, ASHP] {
        let mut b = house(spec);
        b.zone_id = ZoneId::from("north_central");
        let w = &weather[&b.zone_id];
        let d = simulate_building(&b, w, &params()).unwrap();
        let mut weekly: BTreeMap<usize, f64> = BTreeMap::new();
        for (h, ts) in w.timestamps.iter().enumerate() {
            *weekly.entry(ts.ordinal0() as usize / 7).or_default() += d.heating_kwh_e[h];
        }
        let uri_week = chrono::NaiveDate::from_ymd_opt(2021, 2, 16)
            .unwrap()
            .ordinal0() as usize
            / 7;
        let uri = weekly[&uri_week];
        for (week, v) in &weekly {
            if *week != uri_week {
                assert!(uri > *v, "{spec:?}: week {week} {v} vs {uri}");
            }
        }
    }
}

fn demand_for(b: &BuildingSample) -> HourlyEndUseDemand {
    let weather = constant_weather(b.zone_id.as_str(), 2021, 2.0);
    simulate_building(b, &weather, &params()).unwrap()
}

#[test]
fn aggregation_examples() {
    let ts = stockgrid::calendar::year_timestamps(2021).unwrap();
    let mut b = house(HeatingSpec::ElectricResistance);
    b.weight = 1860.0;
    let d = demand_for(&b);
    let agg = aggregate_sector(&[(&b, &d)], &ts).unwrap();
    for h in [0, 100, 5000] {
        assert!((agg.heating_mw[h] - 1.86 * d.heating_kwh_e[h]).abs() < 1e-9);
        assert!((agg.other_mw[h] - 1.86 * d.other_kwh_e[h]).abs() < 1e-9);
    }

    let (mut b1, mut b2) = (b.clone(), b.clone());
    b1.weight = 700.0;
    b2.weight = 1160.0;
    b2.building_id = 1;
    let pair = aggregate_sector(&[(&b1, &d), (&b2, &d)], &ts).unwrap();
    let total_pair = pair.total_mw();
    let total_single = agg.total_mw();
    for h in 0..ts.len() {
        assert!((total_pair[h] - total_single[h]).abs() <= 1e-12 * total_single[h].max(1.0));
    }
}

#[test]
fn duplicate_building_ids_rejected() {
    let ts = stockgrid::calendar::year_timestamps(2021).unwrap();
    let b = house(HeatingSpec::ElectricResistance);
    let d = demand_for(&b);
    assert!(aggregate_sector(&[(&b, &d), (&b, &d)], &ts).is_err());
}

#[test]
fn parallel_sector_matches_sequential_aggregation() {
    let weather = synthetic::weather_year(2021).unwrap();
    let dist = stockgrid::stock::ArchetypeDistribution::from_json_file(
        &common::data_dir().join("distributions/texas_like_residential.json"),
    )
    .unwrap();
    let stock = stockgrid::stock::weighted_stock(&dist, 150, 11).unwrap();
    let p = params();
    let demands: Vec<HourlyEndUseDemand> = stock
        .iter()
        .map(|b| simulate_building(b, &weather[&b.zone_id], &p).unwrap())
        .collect();
    let mut items: Vec<_> = stock.iter().zip(&demands).collect();
    items.reverse();
    let ts = weather.values().next().unwrap().timestamps.clone();
    let sequential = aggregate_sector(&items, &ts).unwrap();
    let parallel = simulate_sector(&stock, &weather, &p).unwrap();
    assert_eq!(sequential, parallel);
}
