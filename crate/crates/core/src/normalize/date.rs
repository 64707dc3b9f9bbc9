use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A calendar-valid Gregorian date, totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DateValue(NaiveDate);

impl DateValue {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(Self)
    }

    pub fn year(&self) -> i32 {
        self.0.year()
    }

    pub fn month(&self) -> u32 {
        self.0.month()
    }

    pub fn day(&self) -> u32 {
        self.0.day()
    }

    pub fn naive(&self) -> NaiveDate {
        self.0
    }

    /// Signed day difference `self - other`.
    pub fn days_since(&self, other: &DateValue) -> i64 {
        (self.0 - other.0).num_days()
    }

    pub fn add_days(&self, days: i64) -> Option<Self> {
        self.0
            .checked_add_signed(chrono::TimeDelta::try_days(days)?)
            .map(Self)
    }
}

impl From<NaiveDate> for DateValue {
    fn from(d: NaiveDate) -> Self {
        Self(d)
    }
}

impl fmt::Display for DateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year(), self.month(), self.day())
    }
}

impl Serialize for DateValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DateValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_date(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DateParseError {
    #[error("unrecognised date format {0:?}")]
    Format(String),
    #[error("two-digit year in {0:?}")]
    TwoDigitYear(String),
    #[error("not a calendar date: {0:?}")]
    InvalidCalendarDate(String),
}

/// Accepts `dd/mm/yyyy`, `dd-mm-yyyy` and `yyyy-mm-dd`.
pub fn parse_date(text: &str) -> Result<DateValue, DateParseError> {
    let s = text.trim();
    let sep = if s.contains('/') { '/' } else { '-' };
    let parts: Vec<&str> = s.split(sep).collect();
    if parts.len() != 3
        || parts
            .iter()
            .any(|p| p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(DateParseError::Format(text.to_string()));
    }
    let (y, m, d) = if parts[0].len() == 4 && sep == '-' {
        (parts[0], parts[1], parts[2])
    } else if parts[0].len() <= 2 && parts[1].len() <= 2 {
        (parts[2], parts[1], parts[0])
    } else {
        return Err(DateParseError::Format(text.to_string()));
    };
    if m.len() > 2 || d.len() > 2 {
        return Err(DateParseError::Format(text.to_string()));
    }
    if y.len() != 4 {
        return if y.len() == 2 {
            Err(DateParseError::TwoDigitYear(text.to_string()))
        } else {
            Err(DateParseError::Format(text.to_string()))
        };
    }
    let (y, m, d) = (
        y.parse::<i32>().expect("digits"),
        m.parse::<u32>().expect("digits"),
        d.parse::<u32>().expect("digits"),
    );
    DateValue::from_ymd(y, m, d).ok_or_else(|| DateParseError::InvalidCalendarDate(text.to_string()))
}
