//! Feeding and project buffer consumption.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::StochasticError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferEntry {
    pub week: u32,
    pub feeding_delta: f64,
    pub project_delta: f64,
    pub cum_feeding: f64,
    pub cum_project: f64,
    /// Percent of the project buffer used, capped at 100.
    pub project_pct: f64,
    pub feeding_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BufferKind {
    Feeding,
    Project,
}

/// Cumulative consumption passed the buffer size. Recorded, not fatal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferOverrun {
    pub week: u32,
    pub kind: BufferKind,
    pub cumulative: f64,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferLedger {
    pub feeding_size: f64,
    pub project_size: f64,
    pub entries: Vec<BufferEntry>,
    #[serde(default)]
    pub overruns: Vec<BufferOverrun>,
}

fn pct(cum: f64, size: f64) -> f64 {
    if size > 0.0 {
        (100.0 * cum / size).clamp(0.0, 100.0)
    } else {
        0.0
    }
}

impl BufferLedger {
    pub fn new(feeding_size: f64, project_size: f64) -> Result<Self, StochasticError> {
        if !(feeding_size > 0.0 && project_size > 0.0) {
            return Err(StochasticError::InvalidBufferSize);
        }
        Ok(BufferLedger { feeding_size, project_size, entries: Vec::new(), overruns: Vec::new() })
    }

    pub fn cum_feeding(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.cum_feeding)
    }

    pub fn cum_project(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.cum_project)
    }

    pub fn project_pct(&self) -> f64 {
        pct(self.cum_project(), self.project_size)
    }

    pub fn feeding_pct(&self) -> f64 {
        pct(self.cum_feeding(), self.feeding_size)
    }

    pub fn entry(&self, week: u32) -> Option<&BufferEntry> {
        self.entries.iter().find(|e| e.week == week)
    }

    /// Appends one week of consumption.
    pub fn update(&mut self, week: u32, feeding_delta: f64, project_delta: f64) -> Result<&BufferEntry, StochasticError> {
        if !(feeding_delta >= 0.0 && project_delta >= 0.0) {
            return Err(StochasticError::NegativeBufferDelta(week));
        }
        if let Some(last) = self.entries.last() {
            if week <= last.week {
                return Err(StochasticError::WeekOutOfOrder(week));
            }
        }
        let cum_feeding = self.cum_feeding() + feeding_delta;
        let cum_project = self.cum_project() + project_delta;
        for (kind, cum, size) in [
            (BufferKind::Feeding, cum_feeding, self.feeding_size),
            (BufferKind::Project, cum_project, self.project_size),
        ] {
            if cum > size {
                self.overruns.push(BufferOverrun { week, kind, cumulative: cum, size });
            }
        }
        self.entries.push(BufferEntry {
            week,
            feeding_delta,
            project_delta,
            cum_feeding,
            cum_project,
            project_pct: pct(cum_project, self.project_size),
            feeding_pct: pct(cum_feeding, self.feeding_size),
        });
        Ok(self.entries.last().unwrap())
    }

    /// Consumption implied by a forecast slip: the P50 increase, clipped to
    /// what remains of a buffer of `size` after `used`.
    pub fn derived_delta(previous_p50: f64, current_p50: f64, used: f64, size: f64) -> f64 {
        (current_p50 - previous_p50).max(0.0).min((size - used).max(0.0))
    }
}

/// Replays a list of `(week, feeding_delta, project_delta)` rows.
pub fn replay_buffers(feeding_size: f64, project_size: f64, rows: &[(u32, f64, f64)]) -> Result<BufferLedger, StochasticError> {
    let mut ledger = BufferLedger::new(feeding_size, project_size)?;
    for &(w, f, p) in rows {
        ledger.update(w, f, p)?;
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DELTAS: [(f64, f64); 16] = [
        (0.0, 0.0), (0.0, 0.0), (0.5, 0.0), (0.5, 0.0), (1.0, 0.5), (0.5, 0.5), (0.5, 0.5), (0.5, 0.5),
        (0.5, 0.5), (0.5, 0.5), (1.0, 0.5), (0.5, 0.5), (0.5, 0.5), (0.5, 0.5), (0.5, 0.5), (0.5, 0.5),
    ];

    fn site() -> BufferLedger {
        let rows: alloc::vec::Vec<(u32, f64, f64)> =
            DELTAS.iter().enumerate().map(|(i, &(f, p))| (i as u32 + 1, f, p)).collect();
        replay_buffers(15.0, 20.0, &rows).unwrap()
    }

    #[test]
    fn sixteen_week_totals() {
        let l = site();
        assert_eq!(l.cum_feeding(), 8.0);
        assert_eq!(l.cum_project(), 6.0);
        assert_eq!(l.project_pct(), 30.0);
        assert!((l.feeding_pct() - 53.333).abs() < 1e-3);
        assert_eq!(l.entry(11).unwrap().cum_feeding, 5.5);
        assert_eq!(l.entry(5).unwrap().project_pct, 2.5);
        assert!(l.overruns.is_empty());
    }

    #[test]
    fn zero_deltas_leave_totals() {
        let mut l = site();
        l.update(17, 0.0, 0.0).unwrap();
        assert_eq!((l.cum_feeding(), l.cum_project()), (8.0, 6.0));
    }

    #[test]
    fn overrun_is_recorded() {
        let mut l = BufferLedger::new(1.0, 2.0).unwrap();
        l.update(1, 1.5, 3.0).unwrap();
        assert_eq!(l.overruns.len(), 2);
        assert_eq!(l.project_pct(), 100.0);
        assert!(l.update(2, -0.5, 0.0).is_err());
        assert!(l.update(1, 0.0, 0.0).is_err());
    }

    #[test]
    fn derived_mode_clips() {
        assert_eq!(BufferLedger::derived_delta(127.0, 128.0, 5.0, 20.0), 1.0);
        assert_eq!(BufferLedger::derived_delta(128.0, 127.0, 5.0, 20.0), 0.0);
        assert_eq!(BufferLedger::derived_delta(120.0, 130.0, 15.0, 20.0), 5.0);
    }

    proptest! {
        #[test]
        fn cumulative_is_prefix_sum(deltas in prop::collection::vec((0u32..4, 0u32..4), 0..30)) {
            let rows: alloc::vec::Vec<(u32, f64, f64)> = deltas
                .iter()
                .enumerate()
                .map(|(i, &(f, p))| (i as u32, f as f64 * 0.5, p as f64 * 0.5))
                .collect();
            let l = replay_buffers(15.0, 20.0, &rows).unwrap();
            let mut f = 0.0;
            let mut p = 0.0;
            for (e, r) in l.entries.iter().zip(&rows) {
                f += r.1;
                p += r.2;
                prop_assert_eq!(e.cum_feeding, f);
                prop_assert_eq!(e.cum_project, p);
                prop_assert!((0.0..=100.0).contains(&e.project_pct));
            }
        }
    }
}
