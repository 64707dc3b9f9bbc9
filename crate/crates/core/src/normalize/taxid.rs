use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A nine-digit NIF/NIPC with its mod-11 checksum status.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaxId {
    pub digits: String,
    pub valid: bool,
}

impl fmt::Display for TaxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxIdError {
    #[error("tax id must have 9 digits, found {found}")]
    WrongLength { found: usize },
    #[error("tax id contains non-digit characters: {0:?}")]
    NonDigit(String),
}

const WEIGHTS: [u32; 8] = [9, 8, 7, 6, 5, 4, 3, 2];

/// Check digit for an eight-digit prefix: `11 - (Σ dᵢ·wᵢ mod 11)`, with 10 and 11 mapped to 0.
pub fn check_digit(prefix: &[u8; 8]) -> u8 {
    let sum: u32 = prefix
        .iter()
        .zip(WEIGHTS)
        .map(|(d, w)| u32::from(*d) * w)
        .sum();
    let check = 11 - (sum % 11);
    if check >= 10 {
        0
    } else {
        check as u8
    }
}

/// Strips spaces and punctuation (and a leading `PT` country prefix), then
/// verifies length and checksum. A bad checksum is reported through
/// [`TaxId::valid`], not as an error.
pub fn validate_tax_id(text: &str) -> Result<TaxId, TaxIdError> {
    let mut cleaned: String = text
        .chars()
        .filter(|c| c.is_alphanumeric())
        .collect();
    if cleaned.len() > 2 && cleaned[..2].eq_ignore_ascii_case("pt") {
        cleaned.drain(..2);
    }
    if !cleaned.chars().all(|c| c.is_ascii_digit()) {
        return Err(TaxIdError::NonDigit(text.to_string()));
    }
    if cleaned.len() != 9 {
        return Err(TaxIdError::WrongLength { found: cleaned.len() });
    }
    let digits: Vec<u8> = cleaned.bytes().map(|b| b - b'0').collect();
    let prefix: [u8; 8] = digits[..8].try_into().expect("nine digits");
    let valid = check_digit(&prefix) == digits[8];
    Ok(TaxId {
        digits: cleaned,
        valid,
    })
}

/// Completes an eight-digit prefix into a valid tax id.
pub fn complete_tax_id(prefix: &[u8; 8]) -> TaxId {
    let mut digits: String = prefix.iter().map(|d| char::from(b'0' + d)).collect();
    digits.push(char::from(b'0' + check_digit(prefix)));
    TaxId { digits, valid: true }
}
