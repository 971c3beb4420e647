use std::fmt::Write as _;
use std::path::Path;

use crate::calendar::{format_timestamp, parse_timestamp, Timestamp};
use crate::error::{Error, Result};
use crate::grid::compose_demand;
use crate::retrofit::Scenario;
use crate::sim::SectorDemand;
use crate::weather::csv_error;

/// Column header of a scenario demand CSV.
pub const SCENARIO_COLUMNS: [&str; 11] = [
    "timestamp",
    "mean_temp_c",
    "residential_mw",
    "commercial_mw",
    "industrial_mw",
    "total_mw",
    "heating_mw",
    "cooling_mw",
    "other_mw",
    "gas_mw_th",
    "unmet_mw_th",
];

/// Hourly system demand of one scenario. Values are held at the three
/// decimals written to disk so tables read back compare exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTable {
    pub scenario: Scenario,
    pub timestamps: Vec<Timestamp>,
    pub mean_temp_c: Vec<f64>,
    pub residential_mw: Vec<f64>,
    pub commercial_mw: Vec<f64>,
    pub industrial_mw: Vec<f64>,
    pub total_mw: Vec<f64>,
    /// Residential plus commercial end uses.
    pub heating_mw: Vec<f64>,
    pub cooling_mw: Vec<f64>,
    pub other_mw: Vec<f64>,
    pub gas_mw_th: Vec<f64>,
    pub unmet_mw_th: Vec<f64>,
}

fn round3(v: f64) -> f64 {
    let r = (v * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn rounded(v: impl IntoIterator<Item = f64>) -> Vec<f64> {
    v.into_iter().map(round3).collect()
}

impl ScenarioTable {
    pub fn file_name(scenario: Scenario) -> String {
        format!("scenario_{}.csv", scenario.as_str())
    }

    pub fn compose(
        scenario: Scenario,
        mean_temp_c: &[f64],
        residential: &SectorDemand,
        commercial: &SectorDemand,
        industrial: &[f64],
    ) -> Result<Self> {
        let n = residential.len();
        if commercial.timestamps != residential.timestamps {
            return Err(Error::KeyMismatch(
                "sector demands cover different hours".into(),
            ));
        }
        if mean_temp_c.len() != n {
            return Err(Error::Alignment {
                expected: n,
                found: mean_temp_c.len(),
            });
        }
        let res = residential.total_mw();
        let com = commercial.total_mw();
        let total = compose_demand(&res, &com, industrial)?;
        let sum = |a: &[f64], b: &[f64]| rounded(a.iter().zip(b).map(|(x, y)| x + y));
        Ok(ScenarioTable {
            scenario,
            timestamps: residential.timestamps.clone(),
            mean_temp_c: rounded(mean_temp_c.iter().copied()),
            residential_mw: rounded(res),
            commercial_mw: rounded(com),
            industrial_mw: rounded(industrial.iter().copied()),
            total_mw: rounded(total),
            heating_mw: sum(&residential.heating_mw, &commercial.heating_mw),
            cooling_mw: sum(&residential.cooling_mw, &commercial.cooling_mw),
            other_mw: sum(&residential.other_mw, &commercial.other_mw),
            gas_mw_th: sum(&residential.gas_mw_th, &commercial.gas_mw_th),
            unmet_mw_th: sum(&residential.unmet_mw_th, &commercial.unmet_mw_th),
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Residential plus commercial demand.
    pub fn buildings_mw(&self) -> Vec<f64> {
        self.residential_mw
            .iter()
            .zip(&self.commercial_mw)
            .map(|(r, c)| r + c)
            .collect()
    }

    fn columns(&self) -> [&Vec<f64>; 10] {
        [
            &self.mean_temp_c,
            &self.residential_mw,
            &self.commercial_mw,
            &self.industrial_mw,
            &self.total_mw,
            &self.heating_mw,
            &self.cooling_mw,
            &self.other_mw,
            &self.gas_mw_th,
            &self.unmet_mw_th,
        ]
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = SCENARIO_COLUMNS.join(",");
        s.push('\n');
        let cols = self.columns();
        for h in 0..self.len() {
            s.push_str(&format_timestamp(&self.timestamps[h]));
            for c in &cols {
                let _ = write!(s, ",{:.3}", c[h]);
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv(path: &Path, scenario: Scenario) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        if header.iter().ne(SCENARIO_COLUMNS.iter().copied()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header `{}`", SCENARIO_COLUMNS.join(",")),
            });
        }
        let mut timestamps = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); SCENARIO_COLUMNS.len() - 1];
        for (i, record) in reader.records().enumerate() {
            let line = i as u64 + 2;
            let record = record.map_err(|e| csv_error(path, e))?;
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            };
            timestamps.push(
                parse_timestamp(&record[0])
                    .ok_or_else(|| parse_err(format!("bad timestamp `{}`", &record[0])))?,
            );
            for (c, col) in cols.iter_mut().enumerate() {
                let field = &record[c + 1];
                col.push(
                    field
                        .parse()
                        .map_err(|_| parse_err(format!("bad number `{field}`")))?,
                );
            }
        }
        let mut it = cols.into_iter();
        let mut next = || it.next().unwrap_or_default();
        Ok(ScenarioTable {
            scenario,
            timestamps,
            mean_temp_c: next(),
            residential_mw: next(),
            commercial_mw: next(),
            industrial_mw: next(),
            total_mw: next(),
            heating_mw: next(),
            cooling_mw: next(),
            other_mw: next(),
            gas_mw_th: next(),
            unmet_mw_th: next(),
        })
    }
}
