//! Upgrade packages with only-if-worse semantics.
//!
//! A package holds one ordered measure list per sector. Each measure touches a
//! building only when the existing condition is strictly less efficient than
//! the measure's target, which makes every package idempotent.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stock::{BuildingSample, CoolingRating, HeatingKind, HeatingSpec, Sector, Supplemental};
use crate::units::r_ip_to_si;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackageName {
    Efficiency,
    Electrification,
    EfficiencyElectrification,
}

impl PackageName {
    pub fn as_str(self) -> &'static str {
        match self {
            PackageName::Efficiency => "efficiency",
            PackageName::Electrification => "electrification",
            PackageName::EfficiencyElectrification => "efficiency_electrification",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Baseline,
    Efficiency,
    Electrification,
    EfficiencyElectrification,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Baseline,
        Scenario::Efficiency,
        Scenario::Electrification,
        Scenario::EfficiencyElectrification,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Baseline => "baseline",
            Scenario::Efficiency => "efficiency",
            Scenario::Electrification => "electrification",
            Scenario::EfficiencyElectrification => "efficiency_electrification",
        }
    }

    pub fn package(self) -> Option<PackageName> {
        match self {
            Scenario::Baseline => None,
            Scenario::Efficiency => Some(PackageName::Efficiency),
            Scenario::Electrification => Some(PackageName::Electrification),
            Scenario::EfficiencyElectrification => Some(PackageName::EfficiencyElectrification),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

/// Envelope and equipment parameters a measure may target. R-value targets
/// are in ft²·°F·h/Btu, matching the distribution files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    CeilingRIp,
    WallRIp,
    WindowUSi,
    Ach50,
    DuctLeakageFraction,
    DuctRIp,
    CoolingEfficiency,
}

impl Parameter {
    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::CeilingRIp => "ceiling_r_ip",
            Parameter::WallRIp => "wall_r_ip",
            Parameter::WindowUSi => "window_u_si",
            Parameter::Ach50 => "ach50",
            Parameter::DuctLeakageFraction => "duct_leakage_fraction",
            Parameter::DuctRIp => "duct_r_ip",
            Parameter::CoolingEfficiency => "cooling_efficiency",
        }
    }

    /// Commercial buildings are modeled without distribution ducts.
    pub fn in_schema(self, sector: Sector) -> bool {
        match sector {
            Sector::Residential => true,
            Sector::Commercial => {
                !matches!(self, Parameter::DuctLeakageFraction | Parameter::DuctRIp)
            }
        }
    }

    fn get(self, b: &BuildingSample) -> f64 {
        match self {
            Parameter::CeilingRIp => b.ceiling_r,
            Parameter::WallRIp => b.wall_r,
            Parameter::WindowUSi => b.window_u,
            Parameter::Ach50 => b.ach50,
            Parameter::DuctLeakageFraction => b.duct_leakage_fraction,
            Parameter::DuctRIp => b.duct_r,
            Parameter::CoolingEfficiency => b.cooling.value(),
        }
    }

    fn set(self, b: &mut BuildingSample, value: f64) {
        match self {
            Parameter::CeilingRIp => b.ceiling_r = value,
            Parameter::WallRIp => b.wall_r = value,
            Parameter::WindowUSi => b.window_u = value,
            Parameter::Ach50 => b.ach50 = value,
            Parameter::DuctLeakageFraction => b.duct_leakage_fraction = value,
            Parameter::DuctRIp => b.duct_r = value,
            Parameter::CoolingEfficiency => {
                b.cooling = match b.cooling {
                    CoolingRating::Seer(_) => CoolingRating::Seer(value),
                    CoolingRating::Ieer(_) => CoolingRating::Ieer(value),
                }
            }
        }
    }

    /// Target in the units stored on [`BuildingSample`].
    fn internal_target(self, target: f64) -> f64 {
        match self {
            Parameter::CeilingRIp | Parameter::WallRIp | Parameter::DuctRIp => r_ip_to_si(target),
            _ => target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Better {
    Higher,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case", deny_unknown_fields)]
pub enum Measure {
    /// Raise or lower one parameter to `target` when it is worse.
    Upgrade {
        parameter: Parameter,
        target: f64,
        better: Better,
    },
    /// Scale lighting power density once.
    Led {
        #[serde(default = "default_led_multiplier")]
        lpd_multiplier: f64,
    },
    /// Swap heating (and optionally cooling) equipment for buildings whose
    /// system is one of `replaces` and is fossil-fired or less efficient.
    ReplaceHeating {
        replaces: Vec<HeatingKind>,
        heating: HeatingSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cooling: Option<CoolingRating>,
    },
}

fn default_led_multiplier() -> f64 {
    0.5
}

impl Measure {
    fn validate(&self, sector: Sector) -> Result<()> {
        let schema = |message: String| Error::Schema {
            sector: sector.to_string(),
            message,
        };
        match self {
            Measure::Upgrade {
                parameter, target, ..
            } => {
                if !parameter.in_schema(sector) {
                    return Err(schema(format!(
                        "parameter `{}` is not modeled",
                        parameter.as_str()
                    )));
                }
                if !(target.is_finite() && *target >= 0.0) {
                    return Err(schema(format!(
                        "target {target} for `{}` is invalid",
                        parameter.as_str()
                    )));
                }
            }
            Measure::Led { lpd_multiplier } => {
                if !(*lpd_multiplier > 0.0 && *lpd_multiplier <= 1.0) {
                    return Err(schema(format!(
                        "LED multiplier {lpd_multiplier} outside (0, 1]"
                    )));
                }
            }
            Measure::ReplaceHeating {
                replaces, heating, ..
            } => {
                if let Some(k) = replaces
                    .iter()
                    .chain([&heating.kind()])
                    .find(|k| !k.allowed_in(sector))
                {
                    return Err(schema(format!(
                        "heating kind `{}` is not modeled",
                        k.as_str()
                    )));
                }
                if heating.is_fossil() {
                    return Err(schema("replacement heating must not burn fuel".into()));
                }
            }
        }
        Ok(())
    }

    fn apply(&self, b: &mut BuildingSample) {
        match self {
            Measure::Upgrade {
                parameter,
                target,
                better,
            } => {
                let target = parameter.internal_target(*target);
                let current = parameter.get(b);
                let worse = match better {
                    Better::Higher => current < target,
                    Better::Lower => current > target,
                };
                if worse {
                    parameter.set(b, target);
                }
            }
            Measure::Led { lpd_multiplier } => {
                if !b.led_lighting {
                    b.lighting_power_density_w_per_m2 *= lpd_multiplier;
                    b.led_lighting = true;
                }
            }
            Measure::ReplaceHeating {
                replaces,
                heating,
                cooling,
            } => {
                if replaces.contains(&b.heating.kind()) && heating_is_worse(&b.heating, heating) {
                    b.heating = *heating;
                    if let Some(c) = cooling {
                        if b.cooling.value() < c.value() {
                            b.cooling = *c;
                        }
                    }
                }
            }
        }
    }
}

/// Fuel-fired equipment is always worse; electric equipment is worse only
/// when its rating is below the replacement's.
fn heating_is_worse(existing: &HeatingSpec, replacement: &HeatingSpec) -> bool {
    if existing.is_fossil() {
        return true;
    }
    match (existing, replacement) {
        (HeatingSpec::ElectricResistance, r) => r.kind().is_heat_pump(),
        (HeatingSpec::Ashp { hspf, .. }, HeatingSpec::Ashp { hspf: target, .. }) => hspf < target,
        (
            HeatingSpec::CommercialHpRtu { ieer, .. },
            HeatingSpec::CommercialHpRtu { ieer: target, .. },
        ) => ieer < target,
        _ => false,
    }
}

/// Ordered measures for each sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrofitPackage {
    pub schema_version: u32,
    pub name: PackageName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub residential: Vec<Measure>,
    pub commercial: Vec<Measure>,
}

impl RetrofitPackage {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let package: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        package.validate()?;
        Ok(package)
    }

    pub fn measures(&self, sector: Sector) -> &[Measure] {
        match sector {
            Sector::Residential => &self.residential,
            Sector::Commercial => &self.commercial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for sector in [Sector::Residential, Sector::Commercial] {
            for m in self.measures(sector) {
                m.validate(sector)?;
            }
        }
        Ok(())
    }

    /// Measures of `self` followed by those of `other` not already present.
    pub fn union(&self, other: &RetrofitPackage, name: PackageName) -> RetrofitPackage {
        let merge = |a: &[Measure], b: &[Measure]| {
            let mut out = a.to_vec();
            out.extend(b.iter().filter(|m| !a.contains(m)).cloned());
            out
        };
        RetrofitPackage {
            schema_version: self.schema_version,
            name,
            note: None,
            residential: merge(&self.residential, &other.residential),
            commercial: merge(&self.commercial, &other.commercial),
        }
    }

    /// True when both packages hold the same measures per sector, in any order.
    pub fn same_measures(&self, other: &RetrofitPackage) -> bool {
        let same = |a: &[Measure], b: &[Measure]| {
            a.len() == b.len() && a.iter().all(|m| b.contains(m)) && b.iter().all(|m| a.contains(m))
        };
        same(&self.residential, &other.residential) && same(&self.commercial, &other.commercial)
    }
}

pub fn apply_package(sample: &BuildingSample, package: &RetrofitPackage) -> Result<BuildingSample> {
    let mut b = sample.clone();
    for m in package.measures(sample.sector) {
        m.validate(sample.sector)?;
        m.apply(&mut b);
    }
    Ok(b)
}

/// The three canonical packages.
#[derive(Debug, Clone, PartialEq)]
pub struct PackageSet {
    pub efficiency: RetrofitPackage,
    pub electrification: RetrofitPackage,
    pub efficiency_electrification: RetrofitPackage,
}

impl PackageSet {
    /// Loads `efficiency.json`, `electrification.json` and
    /// `efficiency_electrification.json` from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let load = |name: PackageName| -> Result<RetrofitPackage> {
            let path = dir.join(format!("{}.json", name.as_str()));
            let p = RetrofitPackage::from_json_file(&path)?;
            if p.name != name {
                return Err(Error::Config(format!(
                    "{} declares package `{}`",
                    path.display(),
                    p.name.as_str()
                )));
            }
            Ok(p)
        };
        Ok(PackageSet {
            efficiency: load(PackageName::Efficiency)?,
            electrification: load(PackageName::Electrification)?,
            efficiency_electrification: load(PackageName::EfficiencyElectrification)?,
        })
    }

    pub fn get(&self, name: PackageName) -> &RetrofitPackage {
        match name {
            PackageName::Efficiency => &self.efficiency,
            PackageName::Electrification => &self.electrification,
            PackageName::EfficiencyElectrification => &self.efficiency_electrification,
        }
    }
}

/// The stock as it would look under `scenario`. Weights are carried over.
pub fn scenario_stock(
    samples: &[BuildingSample],
    scenario: Scenario,
    packages: &PackageSet,
) -> Result<Vec<BuildingSample>> {
    match scenario.package() {
        None => Ok(samples.to_vec()),
        Some(name) => {
            let package = packages.get(name);
            samples.iter().map(|b| apply_package(b, package)).collect()
        }
    }
}

/// Residential ASHP target used by the shipped electrification package.
pub fn residential_ashp() -> HeatingSpec {
    HeatingSpec::Ashp {
        hspf: 9.3,
        supplemental: Supplemental::ElectricResistance,
    }
}
