//! Typed cell values shared by the generator, the query engine and result
//! verification.
//!
//! Monetary amounts are held as integer cents (`Value::Dec`) so that
//! generation, aggregation and comparison stay exact; nothing in the crate
//! does float arithmetic on money.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A single attribute or aggregate value.
///
/// The derived ordering (variant first, payload second) is total, which keeps
/// result sorting deterministic even for mixed columns; within a query a
/// column always holds a single variant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    /// Integer attribute or integer aggregate (keys, quantities, counts).
    Int(i64),
    /// Fixed-point decimal with two implied fraction digits, stored in cents.
    Dec(i64),
    /// Text attribute.
    Str(String),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    /// Renders the value the way it appears in documents and CSV cells.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Dec(c) => write!(f, "{}", fmt_cents(*c)),
            Value::Str(s) => write!(f, "{s}"),
        }
    }
}

/// Formats integer cents as a plain decimal with exactly two fraction digits.
pub fn fmt_cents(cents: i64) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    let abs = cents.unsigned_abs();
    format!("{sign}{}.{:02}", abs / 100, abs % 100)
}

/// Parses a decimal literal with at most two fraction digits into cents.
///
/// Accepts an optional leading sign and an optional fraction part; one
/// fraction digit is read as tenths. Anything else (including more than two
/// fraction digits) is rejected.
pub fn parse_cents(text: &str) -> Option<i64> {
    let text = text.trim();
    let (sign, rest) = match text.strip_prefix('-') {
        Some(r) => (-1i64, r),
        None => (1i64, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() || frac_part.len() > 2 {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let units: i64 = int_part.parse().ok()?;
    let frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
    let frac = if frac_part.len() == 1 { frac * 10 } else { frac };
    units
        .checked_mul(100)?
        .checked_add(frac)
        .map(|c| sign * c)
}

/// Integer division rounded half-up (ties go toward positive infinity).
///
/// The denominator must be positive; averages in this crate always divide by
/// a count.
pub fn div_round_half_up(num: i64, den: i64) -> i64 {
    assert!(den > 0, "div_round_half_up requires a positive denominator");
    let num = num as i128;
    let den = den as i128;
    ((2 * num + den).div_euclid(2 * den)) as i64
}
