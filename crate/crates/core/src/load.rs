//! Continuous load targets, schedule partitions and per-sector load reports.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sector_distance, Scenario, TaskId};

/// Fractional optimum: every sector loaded in proportion to its resources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorTargets {
    /// Total demand over total per-rotation resources.
    pub r_opt: f64,
    /// `r_opt * R_i` for every sector, in seconds.
    pub targets: Vec<f64>,
}

pub fn sector_targets(s: &Scenario) -> Result<SectorTargets> {
    let demand = s.total_duration();
    let supply = s.total_resources();
    if s.tasks.is_empty() || demand == 0.0 {
        return Ok(SectorTargets {
            r_opt: 0.0,
            targets: vec![0.0; s.resources.len()],
        });
    }
    if !(supply > 0.0) {
        return Err(Error::Infeasible(format!(
            "{} task(s) need {demand} s but no sector has resources",
            s.tasks.len()
        )));
    }
    let r_opt = demand / supply;
    Ok(SectorTargets {
        r_opt,
        targets: s.resources.iter().map(|&r| r_opt * r).collect(),
    })
}

/// Which step of the scheduler placed a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    OwnSector,
    FovEqualized,
    Leftover,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::OwnSector => "own-sector",
            Phase::FovEqualized => "fov-equalized",
            Phase::Leftover => "leftover",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub task: TaskId,
    pub phase: Phase,
}

/// Mapping from each sector to the tasks it executes, in placement order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulePartition {
    pub sectors: Vec<Vec<Placement>>,
}

impl SchedulePartition {
    pub fn empty(n_sectors: usize) -> Self {
        SchedulePartition {
            sectors: vec![Vec::new(); n_sectors],
        }
    }

    pub fn n_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn push(&mut self, sector: usize, task: TaskId, phase: Phase) {
        self.sectors[sector].push(Placement { task, phase });
    }

    pub fn task_ids(&self, sector: usize) -> impl Iterator<Item = TaskId> + '_ {
        self.sectors[sector].iter().map(|p| p.task)
    }

    /// Executing sector of every task.
    pub fn sector_of(&self) -> HashMap<TaskId, usize> {
        self.sectors
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |p| (p.task, i)))
            .collect()
    }

    pub fn placements(&self) -> impl Iterator<Item = (usize, &Placement)> {
        self.sectors
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |p| (i, p)))
    }

    /// Checks the partition against a scenario: every task placed exactly
    /// once, no unknown ids, every placement inside the task's field of view.
    pub fn check(&self, s: &Scenario) -> Result<()> {
        if self.sectors.len() != s.n_sectors {
            return Err(Error::invalid(format!(
                "partition has {} sectors, scenario has {}",
                self.sectors.len(),
                s.n_sectors
            )));
        }
        let homes: HashMap<TaskId, usize> = s.tasks.iter().map(|t| (t.id, t.home_sector)).collect();
        let mut seen: HashMap<TaskId, usize> = HashMap::with_capacity(homes.len());
        for (sector, p) in self.placements() {
            let Some(&home) = homes.get(&p.task) else {
                return Err(Error::invalid(format!("partition references unknown task {}", p.task)));
            };
            if let Some(prev) = seen.insert(p.task, sector) {
                return Err(Error::invalid(format!(
                    "task {} placed in sectors {prev} and {sector}",
                    p.task
                )));
            }
            let dist = sector_distance(sector, home, s.n_sectors);
            if dist > s.fov() {
                return Err(Error::invalid(format!(
                    "task {} placed in sector {sector}, {dist} sectors from its home {home}",
                    p.task
                )));
            }
        }
        if seen.len() != homes.len() {
            let missing = s.tasks.iter().find(|t| !seen.contains_key(&t.id)).map(|t| t.id);
            return Err(Error::invalid(format!(
                "partition leaves task {} unassigned",
                missing.unwrap_or_default()
            )));
        }
        Ok(())
    }
}

/// Executes every task in its home sector.
pub fn broadside_baseline(s: &Scenario) -> SchedulePartition {
    let mut p = SchedulePartition::empty(s.n_sectors);
    for t in &s.tasks {
        p.push(t.home_sector, t.id, Phase::OwnSector);
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorLoad {
    pub sector: usize,
    pub absolute_load: f64,
    pub target: f64,
    /// `absolute_load / target`; infinite when a zero-target sector carries load.
    pub relative_load: f64,
}

impl SectorLoad {
    pub fn is_overloaded_zero_target(&self) -> bool {
        self.relative_load.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub sectors: Vec<SectorLoad>,
    pub r_opt: f64,
    pub max_relative_load: f64,
    /// Largest `absolute_load / R_i`: a lower bound on rotations per update cycle.
    pub rotations_to_complete_bound: f64,
}

impl LoadReport {
    pub fn total_load(&self) -> f64 {
        self.sectors.iter().map(|s| s.absolute_load).sum()
    }

    pub fn has_infinite_load(&self) -> bool {
        self.max_relative_load.is_infinite()
    }
}

pub fn load_report(s: &Scenario, p: &SchedulePartition) -> Result<LoadReport> {
    if p.n_sectors() != s.n_sectors {
        return Err(Error::invalid(format!(
            "partition has {} sectors, scenario has {}",
            p.n_sectors(),
            s.n_sectors
        )));
    }
    let durations: HashMap<TaskId, f64> = s.tasks.iter().map(|t| (t.id, t.duration)).collect();
    let targets = sector_targets(s)?;

    let mut sectors = Vec::with_capacity(s.n_sectors);
    let mut max_rel: f64 = 0.0;
    let mut rot_bound: f64 = 0.0;
    for (i, placed) in p.sectors.iter().enumerate() {
        let mut load = 0.0;
        for pl in placed {
            load += durations
                .get(&pl.task)
                .ok_or_else(|| Error::invalid(format!("partition references unknown task {}", pl.task)))?;
        }
        let target = targets.targets[i];
        let relative_load = ratio(load, target);
        max_rel = max_rel.max(relative_load);
        rot_bound = rot_bound.max(ratio(load, s.resources[i]));
        sectors.push(SectorLoad {
            sector: i,
            absolute_load: load,
            target,
            relative_load,
        });
    }
    Ok(LoadReport {
        sectors,
        r_opt: targets.r_opt,
        max_relative_load: max_rel,
        rotations_to_complete_bound: rot_bound,
    })
}

fn ratio(load: f64, capacity: f64) -> f64 {
    if capacity > 0.0 {
        load / capacity
    } else if load > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::scenario;

    #[test]
    fn targets_from_direct_arithmetic() {
        let s = scenario(&[(0, 2.0), (0, 3.0), (0, 5.0)], &[4.0, 8.0, 8.0], 1);
        let t = sector_targets(&s).unwrap();
        assert_eq!(t.r_opt, 0.5);
        assert_eq!(t.targets, vec![2.0, 4.0, 4.0]);
    }

    #[test]
    fn targets_for_empty_task_set() {
        let s = scenario(&[], &[4.0, 8.0], 1);
        let t = sector_targets(&s).unwrap();
        assert_eq!(t.r_opt, 0.0);
        assert_eq!(t.targets, vec![0.0, 0.0]);
    }

    #[test]
    fn targets_without_resources_are_infeasible() {
        let s = scenario(&[(0, 1.0)], &[0.0, 0.0], 1);
        assert!(matches!(sector_targets(&s), Err(Error::Infeasible(_))));
    }

    #[test]
    fn broadside_report_matches_hand_values() {
        let s = scenario(&[(0, 2.0), (0, 3.0), (0, 5.0)], &[4.0, 8.0, 8.0], 1);
        let p = broadside_baseline(&s);
        let r = load_report(&s, &p).unwrap();
        let rel: Vec<f64> = r.sectors.iter().map(|x| x.relative_load).collect();
        assert_eq!(rel, vec![5.0, 0.0, 0.0]);
        assert_eq!(r.max_relative_load, 5.0);
        assert_eq!(r.rotations_to_complete_bound, 2.5);
    }

    #[test]
    fn equalized_partition_has_unit_relative_loads() {
        let s = scenario(&[(0, 2.0), (1, 4.0), (2, 4.0)], &[4.0, 8.0, 8.0], 1);
        let r = load_report(&s, &broadside_baseline(&s)).unwrap();
        assert!(r.sectors.iter().all(|x| x.relative_load == 1.0));
        assert_eq!(r.max_relative_load, 1.0);
    }

    #[test]
    fn load_on_zero_resource_sector_is_infinite() {
        let s = scenario(&[(0, 1.0), (1, 1.0)], &[2.0, 0.0], 1);
        let r = load_report(&s, &broadside_baseline(&s)).unwrap();
        assert!(r.sectors[1].is_overloaded_zero_target());
        assert!(r.has_infinite_load());

        let mut p = SchedulePartition::empty(2);
        p.push(0, 0, Phase::OwnSector);
        p.push(0, 1, Phase::FovEqualized);
        let r = load_report(&s, &p).unwrap();
        assert_eq!(r.sectors[1].relative_load, 0.0);
        assert!(!r.has_infinite_load());
    }

    #[test]
    fn broadside_puts_every_task_home() {
        let s = scenario(&[(2, 1.0), (0, 1.0), (2, 0.5)], &[1.0; 3], 1);
        let p = broadside_baseline(&s);
        assert_eq!(p.task_ids(0).collect::<Vec<_>>(), vec![1]);
        assert!(p.sectors[1].is_empty());
        assert_eq!(p.task_ids(2).collect::<Vec<_>>(), vec![0, 2]);
        assert!(p.placements().all(|(_, pl)| pl.phase == Phase::OwnSector));
        assert!(p.check(&s).is_ok());

        let empty = scenario(&[], &[1.0; 3], 1);
        assert!(broadside_baseline(&empty).sectors.iter().all(Vec::is_empty));
    }

    #[test]
    fn unknown_task_is_rejected() {
        let s = scenario(&[(0, 1.0)], &[1.0, 1.0], 0);
        let mut p = broadside_baseline(&s);
        p.push(1, 99, Phase::Leftover);
        assert!(matches!(load_report(&s, &p), Err(Error::InvalidInput(_))));
        assert!(p.check(&s).is_err());
    }

    #[test]
    fn check_catches_fov_and_duplicates() {
        let s = scenario(&[(0, 1.0), (1, 1.0)], &[1.0; 5], 1);
        let mut p = SchedulePartition::empty(5);
        p.push(2, 0, Phase::Leftover);
        p.push(1, 1, Phase::OwnSector);
        assert!(p.check(&s).unwrap_err().to_string().contains("sectors from its home"));

        let mut p = broadside_baseline(&s);
        p.push(4, 0, Phase::Leftover);
        assert!(p.check(&s).unwrap_err().to_string().contains("placed in sectors"));

        let mut p = SchedulePartition::empty(5);
        p.push(0, 0, Phase::OwnSector);
        assert!(p.check(&s).unwrap_err().to_string().contains("unassigned"));
    }
}
