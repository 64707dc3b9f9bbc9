use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Electrical power, canonically in whole watts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PowerValue {
    pub watts: u64,
}

impl fmt::Display for PowerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} W", self.watts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseWarning {
    /// No unit was given; the number was read as watts.
    UnitAssumed,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseWarning::UnitAssumed => f.write_str("unit missing, watts assumed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PowerParseError {
    #[error("non-numeric power {0:?}")]
    NonNumeric(String),
    #[error("negative power {0:?}")]
    Negative(String),
    #[error("unknown power unit in {0:?}")]
    UnknownUnit(String),
    #[error("power {0:?} is not a whole number of watts")]
    Fractional(String),
}

/// Parses `3.68 kW`, `3680 W`, `3,68kW` (and `Wp`/`kWp`). A bare number is
/// read as whole watts and carries [`ParseWarning::UnitAssumed`]; magnitudes
/// are never guessed, so `"3.68"` is 3 W plus the warning.
pub fn parse_power(text: &str) -> Result<(PowerValue, Option<ParseWarning>), PowerParseError> {
    let s = text.trim();
    if s.starts_with('-') {
        return Err(PowerParseError::Negative(text.to_string()));
    }
    let split = s
        .find(|c: char| c.is_alphabetic())
        .unwrap_or(s.len());
    let (number, unit) = s.split_at(split);
    let number = number.trim();
    let unit = unit.trim().to_ascii_lowercase();
    if number.is_empty() {
        return Err(PowerParseError::NonNumeric(text.to_string()));
    }
    let (multiplier, warning) = match unit.as_str() {
        "" => (1u64, Some(ParseWarning::UnitAssumed)),
        "w" | "wp" => (1, None),
        "kw" | "kwp" => (1000, None),
        _ => return Err(PowerParseError::UnknownUnit(text.to_string())),
    };

    let (mantissa, scale) = decimal_parts(number).ok_or_else(|| PowerParseError::NonNumeric(text.to_string()))?;
    let scaled = mantissa
        .checked_mul(multiplier)
        .ok_or_else(|| PowerParseError::NonNumeric(text.to_string()))?;
    let divisor = 10u64.pow(scale);
    if warning.is_some() {
        // Unitless input already carries a warning; keep the whole-watt part.
        return Ok((PowerValue { watts: scaled / divisor }, warning));
    }
    if scaled % divisor != 0 {
        return Err(PowerParseError::Fractional(text.to_string()));
    }
    Ok((PowerValue { watts: scaled / divisor }, warning))
}

/// `"3,68"` → `(368, 2)`. One decimal separator at most, either `.` or `,`.
fn decimal_parts(s: &str) -> Option<(u64, u32)> {
    if s.is_empty() {
        return None;
    }
    let mut parts = s.splitn(2, ['.', ',']);
    let int = parts.next()?;
    let frac = parts.next().unwrap_or("");
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 9 {
        return None;
    }
    if s.contains(['.', ',']) && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    Some((digits.parse().ok()?, frac.len() as u32))
}
