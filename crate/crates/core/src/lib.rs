//! Surveillance scheduling for rotating multifunction radars.
//!
//! The azimuth is split into sectors; each surveillance beam position is
//! assigned to a sector inside its field of view so that every sector is
//! loaded in proportion to the resources it has left for surveillance.
//! Balanced sectors give every direction roughly the same revisit time.
//!
//! * [`model`]: sectors, directions, tasks and scenarios
//! * [`load`]: fractional targets, partitions, load reports, broadside baseline
//! * [`greedy`]: the greedy equalizer
//! * [`exact`]: branch-and-bound reference solver for small instances
//! * [`sim`]: rotation simulator, revisit statistics, resource estimator
//! * [`check`]: independent constraint checker for pass-level schedules
//! * [`io`]: random scenario generator and file formats
//! * [`cli`]: command-line front end

// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod cli;
pub mod error;
pub mod exact;
pub mod greedy;
pub mod io;
pub mod load;
pub mod model;
pub mod sim;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use greedy::{equalize, maximal_subset, GreedyPolicy};
pub use load::{broadside_baseline, load_report, sector_targets, LoadReport, SchedulePartition};
pub use model::{Direction, Scenario, SectorIndex, SurveillanceTask, TaskId};
