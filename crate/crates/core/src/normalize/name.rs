use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// A person or company name reduced to a comparable form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalName {
    pub canonical: String,
    pub original: String,
}

fn strip_marks(s: &str) -> String {
    s.nfd().filter(|c| !is_combining_mark(*c)).collect()
}

/// Uppercases, strips diacritics, turns punctuation into spaces and
/// collapses whitespace. Idempotent on its own output.
pub fn normalize_name(text: &str) -> CanonicalName {
    let upper = strip_marks(&strip_marks(text).to_uppercase());
    let spaced: String = upper
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    let canonical = spaced.split_whitespace().collect::<Vec<_>>().join(" ");
    CanonicalName {
        canonical,
        original: text.to_string(),
    }
}

/// `1 - levenshtein(a, b) / max(len)`, over chars. Two empty names score 1.
pub fn fuzzy_score(a: &CanonicalName, b: &CanonicalName) -> f64 {
    let la = a.canonical.chars().count();
    let lb = b.canonical.chars().count();
    let longest = la.max(lb);
    if longest == 0 {
        return 1.0;
    }
    let distance = strsim::levenshtein(&a.canonical, &b.canonical);
    1.0 - distance as f64 / longest as f64
}
