//! Weather-year transfer of sector demand through hour-of-week regressions.
//!
//! Heating and cooling demand in each of the 48 weekday/weekend hour buckets
//! is regressed on system HDD or CDD with a quadratic. Non-weather "other"
//! demand is carried over as the bucket mean.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calendar::{HourBucket, Timestamp};
use crate::error::{Error, Result};
use crate::sim::SectorDemand;
use crate::weather::DegreeDaySeries;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndUse {
    Heating,
    Cooling,
}

/// Quadratic `c0 + c1 x + c2 x²` fitted to one bucket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketFit {
    pub coefficients: [f64; 3],
    /// Polynomial degree actually fitted (2, or lower after a fallback).
    pub degree: u8,
    /// Smallest and largest regressor value seen in the fit.
    pub fit_range: [f64; 2],
    pub observations: usize,
}

impl BucketFit {
    pub fn predict(&self, x: f64) -> f64 {
        let [c0, c1, c2] = self.coefficients;
        c0 + c1 * x + c2 * x * x
    }

    pub fn in_range(&self, x: f64) -> bool {
        x >= self.fit_range[0] && x <= self.fit_range[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitWarning {
    pub end_use: EndUse,
    pub bucket: String,
    pub degree: u8,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourOfWeekRegressionSet {
    pub schema_version: u32,
    pub heating: BTreeMap<String, BucketFit>,
    pub cooling: BTreeMap<String, BucketFit>,
    /// Mean non-weather demand per bucket, MW.
    pub other: BTreeMap<String, f64>,
    pub warnings: Vec<FitWarning>,
}

impl HourOfWeekRegressionSet {
    pub fn to_json_file(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    fn fits(&self, end_use: EndUse) -> &BTreeMap<String, BucketFit> {
        match end_use {
            EndUse::Heating => &self.heating,
            EndUse::Cooling => &self.cooling,
        }
    }
}

/// Ordinary least squares of `y` on `1, x, …, x^max_degree` (degree ≤ 2).
/// Drops to a lower degree when there are too few distinct `x` values or the
/// design is numerically rank deficient. Returns the coefficients and the
/// degree used.
pub fn fit_polynomial(x: &[f64], y: &[f64], max_degree: u8) -> ([f64; 3], u8) {
    let mut distinct: Vec<f64> = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut degree = (max_degree.min(2) as usize).min(distinct.len().saturating_sub(1)) as u8;
    loop {
        if let Some(c) = least_squares(x, y, degree) {
            return (c, degree);
        }
        degree -= 1;
    }
}

/// Householder QR on the centred and scaled design. `None` when a pivot
/// vanishes relative to the column norm.
fn least_squares(x: &[f64], y: &[f64], degree: u8) -> Option<[f64; 3]> {
    let n = x.len();
    if n == 0 {
        return Some([0.0; 3]);
    }
    let cols = degree as usize + 1;
    let mean = x.iter().sum::<f64>() / n as f64;
    let spread = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let scale = if spread > 0.0 { spread } else { 1.0 };

    let mut a: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            x.iter()
                .map(|v| ((v - mean) / scale).powi(j as i32))
                .collect()
        })
        .collect();
    let mut b = y.to_vec();
    let norms: Vec<f64> = a
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    for k in 0..cols {
        let tail: f64 = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if tail <= 1e-10 * norms[k].max(f64::MIN_POSITIVE) {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -tail } else { tail };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|e| e * e).sum();
        for col in a.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            col[k..].iter_mut().zip(&v).for_each(|(c, vi)| *c -= f * vi);
        }
        let dot: f64 = v.iter().zip(&b[k..]).map(|(p, q)| p * q).sum();
        let f = 2.0 * dot / vnorm2;
        b[k..].iter_mut().zip(&v).for_each(|(c, vi)| *c -= f * vi);
    }

    let mut z = [0.0; 3];
    for i in (0..cols).rev() {
        let s: f64 = (i + 1..cols).map(|j| a[j][i] * z[j]).sum();
        z[i] = (b[i] - s) / a[i][i];
    }

    // Undo the change of variable u = (x - mean) / scale.
    let (m, s) = (mean, scale);
    Some([
        z[0] - z[1] * m / s + z[2] * m * m / (s * s),
        z[1] / s - 2.0 * z[2] * m / (s * s),
        z[2] / (s * s),
    ])
}

fn check_aligned(timestamps: &[Timestamp], dd: &DegreeDaySeries) -> Result<()> {
    if timestamps.len() != dd.len() {
        return Err(Error::Alignment {
            expected: timestamps.len(),
            found: dd.len(),
        });
    }
    if timestamps != dd.timestamps.as_slice() {
        return Err(Error::KeyMismatch(
            "demand and degree days cover different hours".into(),
        ));
    }
    Ok(())
}

/// Fits the 48 heating, 48 cooling and 48 "other" buckets on one year.
pub fn fit_transfer(
    demand: &SectorDemand,
    dd: &DegreeDaySeries,
) -> Result<HourOfWeekRegressionSet> {
    check_aligned(&demand.timestamps, dd)?;
    let mut members: BTreeMap<HourBucket, Vec<usize>> =
        HourBucket::all().map(|b| (b, Vec::new())).collect();
    for (h, ts) in demand.timestamps.iter().enumerate() {
        members.entry(HourBucket::of(ts)).or_default().push(h);
    }
    if let Some((b, _)) = members.iter().find(|(_, hs)| hs.is_empty()) {
        return Err(Error::Structure(format!(
            "no hours fall in bucket {}",
            b.key()
        )));
    }

    let jobs: Vec<(EndUse, HourBucket)> = [EndUse::Heating, EndUse::Cooling]
        .into_iter()
        .flat_map(|e| members.keys().map(move |b| (e, *b)))
        .collect();
    let fitted: Vec<(EndUse, String, BucketFit, Option<FitWarning>)> = jobs
        .par_iter()
        .map(|&(end_use, bucket)| {
            let hours = &members[&bucket];
            let (xs, ys) = match end_use {
                EndUse::Heating => (&dd.hdd, &demand.heating_mw),
                EndUse::Cooling => (&dd.cdd, &demand.cooling_mw),
            };
            let x: Vec<f64> = hours.iter().map(|&h| xs[h]).collect();
            let y: Vec<f64> = hours.iter().map(|&h| ys[h]).collect();
            let (coefficients, degree) = fit_polynomial(&x, &y, 2);
            let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let warning = (degree < 2).then(|| FitWarning {
                end_use,
                bucket: bucket.key(),
                degree,
                reason: "too few distinct regressor values for a quadratic".into(),
            });
            let fit = BucketFit {
                coefficients,
                degree,
                fit_range: [lo, hi],
                observations: x.len(),
            };
            (end_use, bucket.key(), fit, warning)
        })
        .collect();

    let mut heating = BTreeMap::new();
    let mut cooling = BTreeMap::new();
    let mut warnings = Vec::new();
    for (end_use, key, fit, warning) in fitted {
        match end_use {
            EndUse::Heating => heating.insert(key, fit),
            EndUse::Cooling => cooling.insert(key, fit),
        };
        warnings.extend(warning);
    }
    for w in &warnings {
        log::warn!(
            "{:?} bucket {} fitted with degree {}: {}",
            w.end_use,
            w.bucket,
            w.degree,
            w.reason
        );
    }
    let other = members
        .iter()
        .map(|(b, hs)| {
            let mean = hs.iter().map(|&h| demand.other_mw[h]).sum::<f64>() / hs.len() as f64;
            (b.key(), mean.max(0.0))
        })
        .collect();

    Ok(HourOfWeekRegressionSet {
        schema_version: SCHEMA_VERSION,
        heating,
        cooling,
        other,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferredDemand {
    pub demand: SectorDemand,
    /// Hours where HDD or CDD fell outside the bucket's fitted range.
    pub extrapolated: Vec<bool>,
}

/// Evaluates the regressions on another year's degree days. Negative
/// predictions are clamped to zero.
pub fn apply_transfer(
    reg: &HourOfWeekRegressionSet,
    dd: &DegreeDaySeries,
) -> Result<TransferredDemand> {
    let mut demand = SectorDemand::zeros(dd.timestamps.clone());
    let mut extrapolated = vec![false; dd.len()];
    for (h, ts) in dd.timestamps.iter().enumerate() {
        let key = HourBucket::of(ts).key();
        let lookup = |end_use: EndUse| {
            reg.fits(end_use)
                .get(&key)
                .ok_or_else(|| Error::missing(format!("{end_use:?} regression for bucket {key}")))
        };
        let heat = lookup(EndUse::Heating)?;
        let cool = lookup(EndUse::Cooling)?;
        let other = reg
            .other
            .get(&key)
            .ok_or_else(|| Error::missing(format!("other-load average for bucket {key}")))?;
        demand.heating_mw[h] = heat.predict(dd.hdd[h]).max(0.0);
        demand.cooling_mw[h] = cool.predict(dd.cdd[h]).max(0.0);
        demand.other_mw[h] = other.max(0.0);
        extrapolated[h] = !heat.in_range(dd.hdd[h]) || !cool.in_range(dd.cdd[h]);
    }
    Ok(TransferredDemand {
        demand,
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_recovered() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v + 0.5 * v * v).collect();
        let (c, d) = fit_polynomial(&x, &y, 2);
        assert_eq!(d, 2);
        for (got, want) in c.iter().zip([2.0, 3.0, 0.5]) {
            assert!((got - want).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn constant_demand_gives_flat_fit() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let y = vec![7.5; 30];
        let (c, _) = fit_polynomial(&x, &y, 2);
        assert!((c[0] - 7.5).abs() < 1e-9 && c[1].abs() < 1e-9 && c[2].abs() < 1e-9);
    }

    #[test]
    fn degenerate_regressors_fall_back() {
        let (c, d) = fit_polynomial(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], 2);
        assert_eq!(d, 0);
        assert!((c[0] - 2.0).abs() < 1e-12);
        let (c, d) = fit_polynomial(&[0.0, 1.0, 0.0, 1.0], &[1.0, 3.0, 1.0, 3.0], 2);
        assert_eq!(d, 1);
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12 && c[2] == 0.0);
    }
}
