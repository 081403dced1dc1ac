//! Activity network, calendars, and deterministic CPM.

pub mod calendar;
pub mod cpm;
pub mod network;

pub use calendar::{Calendar, CalendarAxis, CalendarError};
pub use cpm::{
    cpm_baseline, cpm_indexed, cpm_pass, ActivityTimes, ClampWarning, CpmError, CpmKernel, ScheduleResult,
    FLOAT_EPSILON,
};
pub use network::{build_network, Activity, ActivityNetwork, Link, NetworkError, PrecedenceRelation, RelationKind};
