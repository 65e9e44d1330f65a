//! Calendar month values used throughout the corpus, extraction and timeline code.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid year-month `{0}` (expected YYYY-MM)")]
pub struct MonthParseError(pub String);

/// A calendar month, ordered chronologically. Serialized as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Option<Self> {
        if (1..=12).contains(&month) && (0..=9999).contains(&year) {
            Some(YearMonth { year, month })
        } else {
            None
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(ordinal: i64) -> Self {
        YearMonth {
            year: ordinal.div_euclid(12) as i32,
            month: (ordinal.rem_euclid(12) + 1) as u8,
        }
    }

    /// Shift by a signed number of months.
    pub fn offset(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn succ(self) -> Self {
        self.offset(1)
    }

    pub fn pred(self) -> Self {
        self.offset(-1)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: YearMonth) -> i64 {
        other.ordinal() - self.ordinal()
    }

    /// Truncate an ISO-8601 date or timestamp (`YYYY-MM-DD...`) to its month.
    pub fn from_iso_date(date: &str) -> Result<Self, MonthParseError> {
        let err = || MonthParseError(date.to_string());
        let date = date.trim();
        if date.len() < 7 {
            return Err(err());
        }
        let ym: YearMonth = date[..7].parse().map_err(|_| err())?;
        let rest = &date[7..];
        if rest.is_empty() {
            return Ok(ym);
        }
        let day = rest.strip_prefix('-').ok_or_else(err)?;
        let digits: String = day.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.len() != 2 {
            return Err(err());
        }
        let d: u8 = digits.parse().map_err(|_| err())?;
        if !(1..=31).contains(&d) {
            return Err(err());
        }
        Ok(ym)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = MonthParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || MonthParseError(s.to_string());
        let (y, m) = s.split_once('-').ok_or_else(err)?;
        if y.len() != 4 || m.len() != 2 || !y.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let year: i32 = y.parse().map_err(|_| err())?;
        let month: u8 = m.parse().map_err(|_| err())?;
        YearMonth::new(year, month).ok_or_else(err)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive month range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub from: YearMonth,
    pub to: YearMonth,
}

impl MonthRange {
    pub fn new(from: YearMonth, to: YearMonth) -> Self {
        MonthRange { from, to }
    }

    pub fn contains(&self, m: YearMonth) -> bool {
        self.from <= m && m <= self.to
    }

    /// Months in the range in chronological order; empty when `from > to`.
    pub fn months(&self) -> Vec<YearMonth> {
        let n = self.from.months_until(self.to);
        (0..=n).map(|i| self.from.offset(i)).collect()
    }
}

impl Default for MonthRange {
    /// January through May 2020.
    fn default() -> Self {
        MonthRange {
            from: YearMonth { year: 2020, month: 1 },
            to: YearMonth { year: 2020, month: 5 },
        }
    }
}
