//! Calendar months as a compact, ordered index.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, StxError};

/// A calendar month encoded as `year * 12 + (month - 1)` in a signed 32-bit
/// integer, so that integer ordering equals calendar ordering and consecutive
/// months differ by exactly 1.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MonthIndex(i32);

impl MonthIndex {
    /// Builds a month index from a calendar year and a 1-based month.
    pub fn from_ym(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(StxError::domain(format!(
                "month must be in 1..=12, got {month}"
            )));
        }
        Ok(MonthIndex(year * 12 + (month as i32 - 1)))
    }

    /// Reinterprets a raw encoded value as a month index.
    pub fn from_raw(raw: i32) -> Self {
        MonthIndex(raw)
    }

    /// The raw encoded value (`year * 12 + month - 1`).
    pub fn raw(self) -> i32 {
        self.0
    }

    /// Calendar year.
    pub fn year(self) -> i32 {
        self.0.div_euclid(12)
    }

    /// Calendar month, 1-based.
    pub fn month(self) -> u32 {
        (self.0.rem_euclid(12) + 1) as u32
    }

    /// The following month.
    pub fn next(self) -> Self {
        MonthIndex(self.0 + 1)
    }

    /// Number of days in this Gregorian month.
    pub fn days(self) -> u32 {
        let first = chrono::NaiveDate::from_ymd_opt(self.year(), self.month(), 1)
            .expect("valid year/month by construction");
        let next = self.next();
        let next_first = chrono::NaiveDate::from_ymd_opt(next.year(), next.month(), 1)
            .expect("valid year/month by construction");
        (next_first - first).num_days() as u32
    }

    /// Duration of this month in seconds (86 400 × days in month).
    pub fn seconds(self) -> f64 {
        86_400.0 * f64::from(self.days())
    }
}

/// Duration of a month in seconds. Convenience alias for
/// [`MonthIndex::seconds`].
pub fn month_seconds(m: MonthIndex) -> f64 {
    m.seconds()
}

impl fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for MonthIndex {
    type Err = StxError;

    /// Parses `"YYYY-MM"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || StxError::domain(format!("expected YYYY-MM, got {s:?}"));
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        MonthIndex::from_ym(year, month)
    }
}
