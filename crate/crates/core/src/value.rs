use std::fmt;

use serde::{Deserialize, Serialize};

use crate::normalize::{format_money, format_number, DateValue, Money, PowerValue, TaxId};

/// A parsed value from either the declared form or an extracted document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum TypedValue {
    Text(String),
    Money(Money),
    Date(DateValue),
    Number(f64),
    TaxId(TaxId),
    Power(PowerValue),
    Enum(String),
}

impl TypedValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            TypedValue::Text(_) => "text",
            TypedValue::Money(_) => "money",
            TypedValue::Date(_) => "date",
            TypedValue::Number(_) => "number",
            TypedValue::TaxId(_) => "tax_id",
            TypedValue::Power(_) => "power",
            TypedValue::Enum(_) => "enum",
        }
    }
}

impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Text(s) | TypedValue::Enum(s) => f.write_str(s),
            TypedValue::Money(m) => f.write_str(&format_money(m)),
            TypedValue::Date(d) => write!(f, "{d}"),
            TypedValue::Number(n) => f.write_str(&format_number(*n)),
            TypedValue::TaxId(t) => f.write_str(&t.digits),
            TypedValue::Power(p) => write!(f, "{p}"),
        }
    }
}
