//! Working calendars and the workday time axis.
//!
//! Scheduling arithmetic runs in working time: decimal workdays from the
//! project start with non-working exception dates removed. A [`CalendarAxis`]
//! maps working time back to elapsed workweek days so that an exception day
//! (a rain-out, a holiday) shows up as a later finish.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalendarError {
    #[error("calendar {0:?} has an empty workweek")]
    EmptyWorkweek(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calendar {
    pub name: String,
    pub workweek: Vec<Weekday>,
    /// Non-working dates.
    #[serde(default)]
    pub exceptions: BTreeSet<NaiveDate>,
}

impl Calendar {
    pub fn new(name: impl Into<String>, workweek: &[Weekday]) -> Result<Self, CalendarError> {
        let name = name.into();
        let mut days: Vec<Weekday> = workweek.to_vec();
        days.sort_by_key(|d| d.num_days_from_monday());
        days.dedup();
        if days.is_empty() {
            return Err(CalendarError::EmptyWorkweek(name));
        }
        Ok(Calendar { name, workweek: days, exceptions: BTreeSet::new() })
    }

    /// Monday through Friday, no exceptions.
    pub fn standard() -> Self {
        use Weekday::*;
        Calendar {
            name: String::from("Standard 5-day"),
            workweek: alloc::vec![Mon, Tue, Wed, Thu, Fri],
            exceptions: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<(), CalendarError> {
        if self.workweek.is_empty() {
            return Err(CalendarError::EmptyWorkweek(self.name.clone()));
        }
        Ok(())
    }

    pub fn with_exceptions(mut self, dates: impl IntoIterator<Item = NaiveDate>) -> Self {
        self.exceptions.extend(dates);
        self
    }

    fn in_workweek(&self, date: NaiveDate) -> bool {
        self.workweek.contains(&date.weekday())
    }

    pub fn is_workday(&self, date: NaiveDate) -> bool {
        self.in_workweek(date) && !self.exceptions.contains(&date)
    }

    /// Advances `days` working days from `start`.
    ///
    /// The fractional part of `days` is a partial day that ends on the day it
    /// starts, so only whole days move the date. Non-positive `days` returns
    /// `start` unchanged.
    pub fn workday_add(&self, start: NaiveDate, days: f64) -> NaiveDate {
        if self.workweek.is_empty() || !(days >= 1.0) {
            return start;
        }
        let mut remaining = libm::floor(days) as u64;
        let mut date = start;
        while remaining > 0 {
            match date.succ_opt() {
                Some(next) => date = next,
                None => return date,
            }
            if self.is_workday(date) {
                remaining -= 1;
            }
        }
        date
    }

    /// Builds the time axis for a project starting on `start`.
    pub fn axis(&self, start: NaiveDate) -> CalendarAxis {
        let mut slots = Vec::new();
        if !self.workweek.is_empty() {
            for &ex in self.exceptions.range(start..) {
                if self.in_workweek(ex) {
                    slots.push(self.workweek_days_between(start, ex));
                }
            }
        }
        CalendarAxis { start: Some(start), workweek: self.workweek.clone(), slots }
    }

    /// Number of workweek days in `[from, to)`, ignoring exceptions.
    fn workweek_days_between(&self, from: NaiveDate, to: NaiveDate) -> u64 {
        let span = (to - from).num_days().max(0) as u64;
        let full_weeks = span / 7;
        let mut count = full_weeks * self.workweek.len() as u64;
        let mut d = from + chrono::Days::new(full_weeks * 7);
        while d < to {
            if self.in_workweek(d) {
                count += 1;
            }
            d = d + chrono::Days::new(1);
        }
        count
    }
}

/// Working time to elapsed time for one calendar anchored at a start date.
///
/// Elapsed time counts workweek days from the start; exception days occupy a
/// whole slot on that axis during which no work progresses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CalendarAxis {
    start: Option<NaiveDate>,
    workweek: Vec<Weekday>,
    /// Elapsed-day index of each blocked slot, ascending.
    slots: Vec<u64>,
}

impl CalendarAxis {
    /// An axis with no exceptions and no date anchor.
    pub fn plain() -> Self {
        CalendarAxis::default()
    }

    pub fn blocked_slots(&self) -> &[u64] {
        &self.slots
    }

    /// Elapsed workweek days needed to accumulate `working` days of work.
    ///
    /// A slot at elapsed index `k` preceded by `j` other slots starts after
    /// `k - j` working days; it delays any instant strictly later than that.
    pub fn elapsed(&self, working: f64) -> f64 {
        let blocked = self
            .slots
            .iter()
            .enumerate()
            .take_while(|&(j, &k)| ((k - j as u64) as f64) < working)
            .count();
        working + blocked as f64
    }

    /// Calendar date of an elapsed offset, when the axis is anchored.
    pub fn date_of(&self, elapsed: f64) -> Option<NaiveDate> {
        let start = self.start?;
        if self.workweek.is_empty() {
            return Some(start);
        }
        let mut remaining = libm::floor(elapsed.max(0.0)) as u64;
        let mut date = start;
        while !self.workweek.contains(&date.weekday()) {
            date = date.succ_opt()?;
        }
        while remaining > 0 {
            date = date.succ_opt()?;
            if self.workweek.contains(&date.weekday()) {
                remaining -= 1;
            }
        }
        Some(date)
    }
}
