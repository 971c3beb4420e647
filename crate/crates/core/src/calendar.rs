//! Hourly calendar helpers. All timestamps are local standard time with no
//! daylight-saving shift; each one labels the start of its hour.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Timestamp = NaiveDateTime;

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn hours_in_year(year: i32) -> usize {
    if is_leap_year(year) {
        8784
    } else {
        8760
    }
}

pub fn year_start(year: i32) -> Result<Timestamp> {
    NaiveDate::from_ymd_opt(year, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .ok_or_else(|| Error::Validation(format!("year {year} out of range")))
}

/// Every hour of a calendar year, Feb 29 included in leap years.
pub fn year_timestamps(year: i32) -> Result<Vec<Timestamp>> {
    let start = year_start(year)?;
    Ok((0..hours_in_year(year))
        .map(|h| start + Duration::hours(h as i64))
        .collect())
}

/// Checks that `timestamps` covers `year` hour by hour without gaps.
pub fn validate_full_year(timestamps: &[Timestamp], year: i32) -> Result<()> {
    let expected = hours_in_year(year);
    if timestamps.len() != expected {
        return Err(Error::Structure(format!(
            "expected {expected} hourly values for {year}, found {}",
            timestamps.len()
        )));
    }
    let start = year_start(year)?;
    if timestamps[0] != start {
        return Err(Error::Structure(format!(
            "series starts at {} instead of {start}",
            timestamps[0]
        )));
    }
    for pair in timestamps.windows(2) {
        if pair[1] - pair[0] != Duration::hours(1) {
            return Err(Error::Structure(format!(
                "timestamps not hourly between {} and {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayClass {
    Weekday,
    Weekend,
}

impl DayClass {
    pub fn of(ts: &Timestamp) -> Self {
        match ts.weekday() {
            Weekday::Sat | Weekday::Sun => DayClass::Weekend,
            _ => DayClass::Weekday,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DayClass::Weekday => "weekday",
            DayClass::Weekend => "weekend",
        }
    }
}

/// Position within the 48 weekday/weekend hour buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HourBucket {
    pub day_class: DayClass,
    pub hour: u32,
}

impl HourBucket {
    pub fn of(ts: &Timestamp) -> Self {
        HourBucket {
            day_class: DayClass::of(ts),
            hour: ts.hour(),
        }
    }

    pub fn all() -> impl Iterator<Item = HourBucket> {
        [DayClass::Weekday, DayClass::Weekend]
            .into_iter()
            .flat_map(|day_class| (0..24).map(move |hour| HourBucket { day_class, hour }))
    }

    /// Serialized key, e.g. `weekday-07`.
    pub fn key(&self) -> String {
        format!("{}-{:02}", self.day_class.as_str(), self.hour)
    }

    pub fn parse_key(key: &str) -> Option<Self> {
        let (class, hour) = key.split_once('-')?;
        let day_class = match class {
            "weekday" => DayClass::Weekday,
            "weekend" => DayClass::Weekend,
            _ => return None,
        };
        if hour.len() != 2 {
            return None;
        }
        let hour: u32 = hour.parse().ok()?;
        (hour < 24).then_some(HourBucket { day_class, hour })
    }
}

/// Hour of the week with Monday 00:00 as 0.
pub fn hour_of_week(ts: &Timestamp) -> usize {
    ts.weekday().num_days_from_monday() as usize * 24 + ts.hour() as usize
}

pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%d %H:%M",
    ]
    .iter()
    .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
}

pub fn format_timestamp(ts: &Timestamp) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}
