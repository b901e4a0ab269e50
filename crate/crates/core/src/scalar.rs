//! Cell and field values shared by figures, tables and tuples.

use std::fmt;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// A single field value.
///
/// `Num` never holds NaN or an infinity; constructors that receive one
/// produce `Null` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Scalar {
    Num(f64),
    Str(String),
    /// ISO-8601 text, already normalized.
    Date(String),
    Null,
}

impl Scalar {
    pub fn num(v: f64) -> Self {
        if v.is_finite() {
            Scalar::Num(v)
        } else {
            Scalar::Null
        }
    }

    pub fn str(s: impl Into<String>) -> Self {
        Scalar::Str(s.into())
    }

    /// Classify free text: ISO dates become `Date`, everything else stays `Str`.
    ///
    /// Numeric-looking strings are left alone; figure documents carry
    /// numbers as JSON numbers and coercion happens at comparison time.
    pub fn from_text(s: &str) -> Self {
        match normalize_iso_date(s) {
            Some(d) => Scalar::Date(d),
            None => Scalar::Str(s.to_string()),
        }
    }

    /// Parse a table cell: numbers (after separator/currency/percent
    /// stripping), then ISO dates, then plain text. Empty cells are the
    /// empty string.
    pub fn from_cell(s: &str) -> Self {
        let t = s.trim();
        if let Some(v) = coerce_number(t) {
            return Scalar::Num(v);
        }
        match normalize_iso_date(t) {
            Some(d) => Scalar::Date(d),
            None => Scalar::Str(t.to_string()),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Scalar::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// Text view for string-like values (`Str` and `Date`).
    pub fn as_text(&self) -> Option<&str> {
        match self {
            Scalar::Str(s) | Scalar::Date(s) => Some(s),
            _ => None,
        }
    }

    /// Numeric value, coercing numeric-looking text.
    pub fn to_number(&self) -> Option<f64> {
        match self {
            Scalar::Num(v) => Some(*v),
            Scalar::Str(s) => coerce_number(s),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Num(v) => write!(f, "{v}"),
            Scalar::Str(s) | Scalar::Date(s) => f.write_str(s),
            Scalar::Null => Ok(()),
        }
    }
}

const CURRENCY: &[char] = &['$', '€', '£', '¥', '₹', '₩'];

/// Parse numeric text, tolerating thousands separators, a leading
/// currency symbol and a trailing percent sign. Returns `None` for
/// anything else, including non-finite results.
pub fn coerce_number(text: &str) -> Option<f64> {
    let mut s = text.trim();
    if s.is_empty() {
        return None;
    }
    let mut negative = false;
    if let Some(rest) = s.strip_prefix('-') {
        negative = true;
        s = rest.trim_start();
    } else if let Some(rest) = s.strip_prefix('+') {
        s = rest.trim_start();
    }
    s = s.trim_start_matches(CURRENCY).trim_start();
    if !negative {
        if let Some(rest) = s.strip_prefix('-') {
            negative = true;
            s = rest.trim_start();
        }
    }
    s = s.strip_suffix('%').unwrap_or(s).trim_end();
    if s.is_empty() || !s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let cleaned: String = s.chars().filter(|&c| c != ',').collect();
    if !cleaned
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
    {
        return None;
    }
    let v: f64 = cleaned.parse().ok()?;
    let v = if negative { -v } else { v };
    v.is_finite().then_some(v)
}

/// Normalize an ISO-8601 date or datetime. Dates stay `YYYY-MM-DD`;
/// datetimes become `YYYY-MM-DDTHH:MM:SS[.fff]`, with offsets converted
/// to UTC and marked `Z`.
pub fn normalize_iso_date(text: &str) -> Option<String> {
    let s = text.trim();
    // Cheap shape check before handing to chrono.
    let b = s.as_bytes();
    if b.len() < 10 || b[4] != b'-' || b[7] != b'-' || !b[..4].iter().all(u8::is_ascii_digit) {
        return None;
    }
    if b.len() == 10 {
        return NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .ok()
            .map(|d| d.format("%Y-%m-%d").to_string());
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(
            dt.with_timezone(&Utc)
                .to_rfc3339_opts(SecondsFormat::AutoSi, true),
        );
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.format("%Y-%m-%dT%H:%M:%S%.f").to_string());
        }
    }
    None
}

/// Shortest round-trip decimal with at least one fractional digit.
pub fn format_decimal(v: f64) -> String {
    let s = format!("{v}");
    if s.contains(['.', 'e', 'E']) || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}
