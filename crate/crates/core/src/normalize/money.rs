use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A non-negative monetary amount held as integer cents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Money {
    pub amount_cents: i64,
    pub currency: String,
}

impl Money {
    pub fn eur(amount_cents: i64) -> Self {
        Self {
            amount_cents,
            currency: "EUR".to_string(),
        }
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_money(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoneyParseError {
    #[error("empty amount")]
    Empty,
    #[error("non-numeric amount {0:?}")]
    NonNumeric(String),
    #[error("negative amount {0:?}")]
    Negative(String),
    #[error("ambiguous separators in {0:?}")]
    Ambiguous(String),
    #[error("amount {0:?} out of range")]
    Overflow(String),
}

/// Parses European and Anglo amount notations into cents.
///
/// Accepted shapes include `1.234,56 €`, `1234,56`, `1 234.56 EUR` and
/// `1,234.56`. The last separator is a decimal mark only when exactly two
/// digits follow it; a last separator followed by three digits is grouping.
/// Anything else is rejected rather than guessed.
pub fn parse_money(text: &str) -> Result<Money, MoneyParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(MoneyParseError::Empty);
    }

    let mut currency: Option<String> = None;
    let mut numeric = String::with_capacity(trimmed.len());
    let mut letters = String::new();
    for ch in trimmed.chars() {
        match ch {
            '€' => currency = Some("EUR".to_string()),
            c if c.is_alphabetic() => letters.push(c),
            c if c.is_whitespace() => {
                flush_code(&mut letters, &mut currency, trimmed)?;
            }
            c => {
                flush_code(&mut letters, &mut currency, trimmed)?;
                numeric.push(c);
            }
        }
    }
    flush_code(&mut letters, &mut currency, trimmed)?;

    if numeric.starts_with('-') {
        return Err(MoneyParseError::Negative(text.to_string()));
    }
    if numeric.is_empty()
        || !numeric.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
        || !numeric.starts_with(|c: char| c.is_ascii_digit())
        || !numeric.ends_with(|c: char| c.is_ascii_digit())
    {
        return Err(MoneyParseError::NonNumeric(text.to_string()));
    }

    let cents = cents_from_numeric(&numeric).ok_or_else(|| {
        if numeric.len() > 18 {
            MoneyParseError::Overflow(text.to_string())
        } else {
            MoneyParseError::Ambiguous(text.to_string())
        }
    })?;
    Ok(Money {
        amount_cents: cents,
        currency: currency.unwrap_or_else(|| "EUR".to_string()),
    })
}

fn flush_code(
    letters: &mut String,
    currency: &mut Option<String>,
    original: &str,
) -> Result<(), MoneyParseError> {
    if letters.is_empty() {
        return Ok(());
    }
    if letters.chars().count() == 3 && letters.chars().all(|c| c.is_ascii_alphabetic()) {
        *currency = Some(letters.to_ascii_uppercase());
        letters.clear();
        Ok(())
    } else {
        Err(MoneyParseError::NonNumeric(original.to_string()))
    }
}

fn cents_from_numeric(numeric: &str) -> Option<i64> {
    let last_sep = numeric.rfind(['.', ',']);
    let Some(pos) = last_sep else {
        return numeric.parse::<i64>().ok()?.checked_mul(100);
    };
    let sep = numeric.as_bytes()[pos] as char;
    let tail = &numeric[pos + 1..];
    match tail.len() {
        2 => {
            let head = &numeric[..pos];
            if head.contains(sep) {
                return None;
            }
            let other = if sep == '.' { ',' } else { '.' };
            let units = grouped_integer(head, other)?;
            let fraction: i64 = tail.parse().ok()?;
            units.checked_mul(100)?.checked_add(fraction)
        }
        3 => {
            let other = if sep == '.' { ',' } else { '.' };
            if numeric.contains(other) {
                return None;
            }
            grouped_integer(numeric, sep)?.checked_mul(100)
        }
        _ => None,
    }
}

/// Integer with optional grouping by `sep`: first group 1-3 digits, the rest exactly 3.
fn grouped_integer(s: &str, sep: char) -> Option<i64> {
    if !s.contains(sep) {
        return s.parse().ok();
    }
    let groups: Vec<&str> = s.split(sep).collect();
    let first = groups[0];
    if first.is_empty() || first.len() > 3 {
        return None;
    }
    if groups[1..].iter().any(|g| g.len() != 3) {
        return None;
    }
    groups.concat().parse().ok()
}

/// Renders `1.234,56 €` style text; `parse_money` reads it back exactly.
pub fn format_money(money: &Money) -> String {
    let units = money.amount_cents / 100;
    let cents = money.amount_cents % 100;
    let digits = units.to_string();
    let mut grouped = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            grouped.push('.');
        }
        grouped.push(ch);
    }
    let symbol = if money.currency == "EUR" {
        "€".to_string()
    } else {
        money.currency.clone()
    };
    format!("{grouped},{cents:02} {symbol}")
}
