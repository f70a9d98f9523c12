//! Constraint checker for pass-level schedules.
//!
//! Works from raw `(task, pass, cycle)` triples and recomputes sectors from
//! pass indices itself, so it shares no bookkeeping with the solvers or the
//! simulator it is used to audit.

use std::collections::HashMap;
use std::fmt;

use crate::model::{Scenario, TaskId};

/// Slack on per-pass capacity, in seconds.
pub const CAPACITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Execution {
    pub task: TaskId,
    /// Global pass index; the boresight is on sector `pass mod N`.
    pub pass: usize,
    /// Update cycle the execution belongs to.
    pub cycle: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    UnknownTask { task: TaskId },
    Capacity { pass: usize, sector: usize, used: f64, capacity: f64 },
    OutsideFov { task: TaskId, pass: usize, sector: usize, home: usize },
    Coverage { cycle: usize, task: TaskId, executions: usize },
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintViolation::UnknownTask { task } => write!(f, "unknown task {task}"),
            ConstraintViolation::Capacity { pass, sector, used, capacity } => write!(
                f,
                "pass {pass} (sector {sector}) uses {used} s of {capacity} s"
            ),
            ConstraintViolation::OutsideFov { task, pass, sector, home } => write!(
                f,
                "task {task} (home {home}) executed from sector {sector} at pass {pass}"
            ),
            ConstraintViolation::Coverage { cycle, task, executions } => write!(
                f,
                "task {task} executed {executions} time(s) in cycle {cycle}"
            ),
        }
    }
}

/// Audits `executions` over `cycles` complete update cycles: per-pass capacity,
/// field of view at execution time, and exactly one execution per task per cycle.
pub fn check_executions(s: &Scenario, executions: &[Execution], cycles: usize) -> Vec<ConstraintViolation> {
    let n = s.n_sectors;
    let fov = s.fov_half_width.min(n / 2);
    let tasks: HashMap<TaskId, (usize, f64)> =
        s.tasks.iter().map(|t| (t.id, (t.home_sector, t.duration))).collect();

    let mut out = Vec::new();
    let mut per_pass: HashMap<usize, f64> = HashMap::new();
    let mut counts: HashMap<(usize, TaskId), usize> = HashMap::new();

    for e in executions {
        let Some(&(home, duration)) = tasks.get(&e.task) else {
            out.push(ConstraintViolation::UnknownTask { task: e.task });
            continue;
        };
        let sector = e.pass % n;
        let offset = (sector + n - home) % n;
        if offset.min(n - offset) > fov {
            out.push(ConstraintViolation::OutsideFov { task: e.task, pass: e.pass, sector, home });
        }
        *per_pass.entry(e.pass).or_default() += duration;
        *counts.entry((e.cycle, e.task)).or_default() += 1;
    }

    let mut passes: Vec<_> = per_pass.into_iter().collect();
    passes.sort_by_key(|(p, _)| *p);
    for (pass, used) in passes {
        let sector = pass % n;
        let capacity = s.resources[sector];
        if used > capacity + CAPACITY_SLACK {
            out.push(ConstraintViolation::Capacity { pass, sector, used, capacity });
        }
    }

    for cycle in 0..cycles {
        for t in &s.tasks {
            let executions = counts.get(&(cycle, t.id)).copied().unwrap_or(0);
            if executions != 1 {
                out.push(ConstraintViolation::Coverage { cycle, task: t.id, executions });
            }
        }
    }
    out
}
