use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stockgrid::calendar::{year_timestamps, HourBucket};
use stockgrid::sim::SectorDemand;
use stockgrid::transfer::{apply_transfer, fit_polynomial, fit_transfer, HourOfWeekRegressionSet};
use stockgrid::weather::DegreeDaySeries;

fn bucket_index(b: &HourBucket) -> usize {
    HourBucket::all().position(|x| x == *b).unwrap()
}

fn heating_truth(i: usize) -> [f64; 3] {
    [
        50.0 + 3.0 * i as f64,
        400.0 + 10.0 * i as f64,
        120.0 - i as f64,
    ]
}

fn cooling_truth(i: usize) -> [f64; 3] {
    [
        20.0 + i as f64,
        300.0 - 2.0 * i as f64,
        80.0 + 0.5 * i as f64,
    ]
}

fn eval(c: [f64; 3], x: f64) -> f64 {
    c[0] + c[1] * x + c[2] * x * x
}

fn random_dd(seed: u64) -> DegreeDaySeries {
    let ts = year_timestamps(2018).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hdd = ts.iter().map(|_| rng.random_range(0.0..1.5)).collect();
    let cdd = ts.iter().map(|_| rng.random_range(0.0..0.8)).collect();
    DegreeDaySeries {
        base_temperature: 18.5,
        timestamps: ts,
        hdd,
        cdd,
    }
}

fn quadratic_demand(dd: &DegreeDaySeries) -> SectorDemand {
    let mut d = SectorDemand::zeros(dd.timestamps.clone());
    for (h, ts) in dd.timestamps.iter().enumerate() {
        let i = bucket_index(&HourBucket::of(ts));
        d.heating_mw[h] = eval(heating_truth(i), dd.hdd[h]);
        d.cooling_mw[h] = eval(cooling_truth(i), dd.cdd[h]);
        d.other_mw[h] = 1000.0 + i as f64;
    }
    d
}

/// Least squares through the 3×3 normal equations solved by Cramer's rule.
fn normal_equations(x: &[f64], y: &[f64]) -> [f64; 3] {
    let mut s = [0.0; 5];
    let mut t = [0.0; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let mut p = 1.0;
        for k in 0..5 {
            s[k] += p;
            if k < 3 {
                t[k] += p * yi;
            }
            p *= xi;
        }
    }
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = t[row];
        }
        *o = det(m) / d;
    }
    out
}

fn rss(x: &[f64], y: &[f64], c: [f64; 3]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(xi, yi)| (yi - eval(c, *xi)).powi(2))
        .sum()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn all_buckets_recover_known_quadratics() {
    let start = Instant::now();
    let dd = random_dd(1);
    let reg = fit_transfer(&quadratic_demand(&dd), &dd).unwrap();
    assert_eq!(reg.heating.len(), 48);
    assert_eq!(reg.cooling.len(), 48);
    assert_eq!(reg.other.len(), 48);
    assert!(reg.warnings.is_empty());
    for b in HourBucket::all() {
        let i = bucket_index(&b);
        let h = &reg.heating[&b.key()];
        let c = &reg.cooling[&b.key()];
        assert_eq!((h.degree, c.degree), (2, 2));
        for k in 0..3 {
            assert!(
                rel_close(h.coefficients[k], heating_truth(i)[k], 1e-6),
                "{} {:?}",
                b.key(),
                h.coefficients
            );
            assert!(
                rel_close(c.coefficients[k], cooling_truth(i)[k], 1e-6),
                "{} {:?}",
                b.key(),
                c.coefficients
            );
        }
        assert!(rel_close(reg.other[&b.key()], 1000.0 + i as f64, 1e-12));
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn quadratic_and_constant_examples() {
    let x: Vec<f64> = (0..60).map(|i| i as f64 / 20.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v + 0.5 * v * v).collect();
    let (c, degree) = fit_polynomial(&x, &y, 2);
    assert_eq!(degree, 2);
    for (got, want) in c.iter().zip([2.0, 3.0, 0.5]) {
        assert!(rel_close(*got, want, 1e-6));
    }
    let (c, _) = fit_polynomial(&x, &vec![42.0; x.len()], 2);
    assert!(
        rel_close(c[0], 42.0, 1e-6) && c[1].abs() < 1e-6 && c[2].abs() < 1e-6,
        "{c:?}"
    );
}

#[test]
fn degenerate_regressor_falls_back() {
    let (c, degree) = fit_polynomial(&[0.0; 10], &[3.0; 10], 2);
    assert_eq!(degree, 0);
    assert!(
        (c[0] - 3.0).abs() < 1e-12 && c[1] == 0.0 && c[2] == 0.0,
        "{c:?}"
    );
    let (_, degree) = fit_polynomial(&[0.0, 1.0, 0.0, 1.0], &[1.0, 2.0, 1.0, 2.0], 2);
    assert_eq!(degree, 1);
}

#[test]
fn fits_match_normal_equations_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let n = rng.random_range(8..300);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| 100.0 * v + rng.random_range(-50.0..50.0))
            .collect();
        let (c, degree) = fit_polynomial(&x, &y, 2);
        assert_eq!(degree, 2);
        let oracle = normal_equations(&x, &y);
        for k in 0..3 {
            assert!(rel_close(c[k], oracle[k], 1e-6), "{c:?} vs {oracle:?}");
        }
        let mean = y.iter().sum::<f64>() / n as f64;
        assert!(rss(&x, &y, c) <= rss(&x, &y, [mean, 0.0, 0.0]) * (1.0 + 1e-12));
    }
}

#[test]
fn bucket_rss_beats_constant_fit() {
    let dd = random_dd(5);
    let mut demand = quadratic_demand(&dd);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for v in demand.heating_mw.iter_mut() {
        *v += rng.random_range(-200.0..200.0);
    }
    let reg = fit_transfer(&demand, &dd).unwrap();
    for b in HourBucket::all() {
        let hours: Vec<usize> = (0..dd.len())
            .filter(|h| HourBucket::of(&dd.timestamps[*h]) == b)
            .collect();
        let x: Vec<f64> = hours.iter().map(|h| dd.hdd[*h]).collect();
        let y: Vec<f64> = hours.iter().map(|h| demand.heating_mw[*h]).collect();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let fit = reg.heating[&b.key()].coefficients;
        assert!(rss(&x, &y, fit) <= rss(&x, &y, [mean, 0.0, 0.0]));
        let oracle = normal_equations(&x, &y);
        for k in 0..3 {
            assert!(rel_close(fit[k], oracle[k], 1e-6));
        }
    }
}

#[test]
fn zero_hdd_gives_clamped_intercepts() {
    let dd = random_dd(2);
    let mut demand = quadratic_demand(&dd);
    // Make some intercepts negative.
    for (h, ts) in dd.timestamps.iter().enumerate() {
        if bucket_index(&HourBucket::of(ts)).is_multiple_of(2) {
            demand.heating_mw[h] -= 500.0;
        }
    }
    let reg = fit_transfer(&demand, &dd).unwrap();
    let mut zero = dd.clone();
    zero.hdd.iter_mut().for_each(|v| *v = 0.0);
    let out = apply_transfer(&reg, &zero).unwrap();
    for (h, ts) in zero.timestamps.iter().enumerate() {
        let c0 = reg.heating[&HourBucket::of(ts).key()].coefficients[0];
        assert_eq!(out.demand.heating_mw[h], c0.max(0.0));
    }
    assert!(out.demand.heating_mw.iter().all(|v| *v >= 0.0));
}

#[test]
fn same_year_reproduces_fitted_values() {
    let dd = random_dd(3);
    let mut demand = quadratic_demand(&dd);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for v in demand.cooling_mw.iter_mut() {
        *v += rng.random_range(-30.0..30.0);
    }
    let reg = fit_transfer(&demand, &dd).unwrap();
    let out = apply_transfer(&reg, &dd).unwrap();
    for (h, ts) in dd.timestamps.iter().enumerate() {
        let fit = &reg.cooling[&HourBucket::of(ts).key()];
        let fitted = fit.predict(dd.cdd[h]).max(0.0);
        let residual_fit = demand.cooling_mw[h] - fitted;
        let residual_out = demand.cooling_mw[h] - out.demand.cooling_mw[h];
        assert!((residual_fit - residual_out).abs() < 1e-9);
    }
    assert!(out.extrapolated.iter().all(|e| !e));
    assert_eq!(apply_transfer(&reg, &dd).unwrap(), out);
}

#[test]
fn outbreak_hdd_flagged_as_extrapolated() {
    let dd = random_dd(7);
    let reg = fit_transfer(&quadratic_demand(&dd), &dd).unwrap();
    let mut uri = dd.clone();
    uri.hdd[1000] = 1.4;
    uri.hdd[1001] = 1.35;
    uri.hdd[1002] = 2.4;
    let out = apply_transfer(&reg, &uri).unwrap();
    assert!(out.extrapolated[1002]);
    assert_eq!(out.extrapolated.iter().filter(|e| **e).count(), 1);
}

#[test]
fn regressions_round_trip_through_json() {
    let dd = random_dd(8);
    let reg = fit_transfer(&quadratic_demand(&dd), &dd).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reg.json");
    reg.to_json_file(&path).unwrap();
    let back = HourOfWeekRegressionSet::from_json_file(&path).unwrap();
    assert_eq!(back, reg);
}
