//! Canonical forms for values read from forms and documents: money, dates,
//! power ratings, tax identifiers, plain numbers and names.
//!
//! Every parser is total. Bad input comes back as a typed error, never as a
//! silent default.

mod date;
mod money;
mod name;
mod power;
mod taxid;

pub use date::{parse_date, DateParseError, DateValue};
pub use money::{format_money, parse_money, Money, MoneyParseError};
pub use name::{fuzzy_score, normalize_name, CanonicalName};
pub use power::{parse_power, ParseWarning, PowerParseError, PowerValue};
pub use taxid::{check_digit, complete_tax_id, validate_tax_id, TaxId, TaxIdError};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a number: {0:?}")]
pub struct NumberParseError(pub String);

/// Plain decimal number; a single `.` or `,` is the decimal mark.
pub fn parse_number(text: &str) -> Result<f64, NumberParseError> {
    let s = text.trim();
    let err = || NumberParseError(text.to_string());
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s),
    };
    let seps = body.matches(['.', ',']).count();
    if body.is_empty()
        || seps > 1
        || !body.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
        || !body.starts_with(|c: char| c.is_ascii_digit())
        || !body.ends_with(|c: char| c.is_ascii_digit())
    {
        return Err(err());
    }
    body.replace(',', ".").parse::<f64>().map(|v| sign * v).map_err(|_| err())
}

/// Shortest text that `parse_number` reads back to the same value.
pub fn format_number(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}
