//! Pass-by-pass simulation of a rotating antenna executing surveillance tasks.
//!
//! The boresight visits sector `k mod N` during pass `k`, which starts at
//! `k * dt`. During a pass the scheduler may spend up to `R_j` seconds on
//! surveillance. An update cycle ends once every task has been executed
//! exactly once; the next cycle starts with the next full rotation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::check::{check_executions, ConstraintViolation, Execution};
use crate::error::{Error, Result};
use crate::exact::ExactAssignment;
use crate::load::{broadside_baseline, Phase, SchedulePartition};
use crate::model::{sector_distance, Scenario, SurveillanceTask, TaskId};

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SimPolicy {
    /// Sector `j` executes only tasks of `B_j`, least recently illuminated first.
    Partition(SchedulePartition),
    /// Partition-driven with every task in its home sector.
    Broadside,
    /// Any pending task whose field of view covers the current sector,
    /// least recently illuminated first.
    Edf,
    /// Replays a fixed pass-level plan every cycle; rotations are relative
    /// to the cycle start.
    Planned(Vec<ExactAssignment>),
}

impl SimPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SimPolicy::Partition(_) => "greedy",
            SimPolicy::Broadside => "broadside",
            SimPolicy::Edf => "edf",
            SimPolicy::Planned(_) => "planned",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub pass: usize,
    pub rotation: usize,
    pub sector: usize,
    pub task_id: TaskId,
    /// Seconds since the start of the pass.
    pub start_offset: f64,
    pub duration: f64,
    /// `pass * dt + start_offset`.
    pub timestamp: f64,
    pub cycle: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSpan {
    pub start_pass: usize,
    pub completion_pass: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub n_sectors: usize,
    pub dt: f64,
    pub records: Vec<ExecutionRecord>,
    /// Illumination timestamps per task, ascending.
    pub illuminations: BTreeMap<TaskId, Vec<f64>>,
    pub cycles: Vec<CycleSpan>,
    pub warnings: Vec<String>,
}

impl SimulationTrace {
    /// Last pass of the first update cycle.
    pub fn completion_pass(&self) -> Option<usize> {
        self.cycles.first().map(|c| c.completion_pass)
    }

    pub fn executions(&self) -> Vec<Execution> {
        self.records
            .iter()
            .map(|r| Execution { task: r.task_id, pass: r.pass, cycle: r.cycle })
            .collect()
    }

    /// Audits the trace with the independent constraint checker.
    pub fn violations(&self, s: &Scenario) -> Vec<ConstraintViolation> {
        check_executions(s, &self.executions(), self.cycles.len())
    }

    /// Rotations spanned by each cycle, counting partial rotations as whole.
    pub fn cycle_rotations(&self) -> Vec<usize> {
        self.cycles
            .iter()
            .map(|c| c.completion_pass / self.n_sectors - c.start_pass / self.n_sectors + 1)
            .collect()
    }

    /// Distinct passes each sector used during `cycle`.
    pub fn passes_per_sector(&self, cycle: usize) -> Vec<usize> {
        let mut passes: Vec<Vec<usize>> = vec![Vec::new(); self.n_sectors];
        for r in self.records.iter().filter(|r| r.cycle == cycle) {
            if passes[r.sector].last() != Some(&r.pass) {
                passes[r.sector].push(r.pass);
            }
        }
        passes.iter().map(Vec::len).collect()
    }

    /// Sector each task ran in during `cycle`, as a partition.
    pub fn cycle_partition(&self, s: &Scenario, cycle: usize) -> SchedulePartition {
        let homes: HashMap<TaskId, usize> = s.tasks.iter().map(|t| (t.id, t.home_sector)).collect();
        let mut p = SchedulePartition::empty(self.n_sectors);
        for r in self.records.iter().filter(|r| r.cycle == cycle) {
            let phase = if homes.get(&r.task_id) == Some(&r.sector) {
                Phase::OwnSector
            } else {
                Phase::FovEqualized
            };
            p.push(r.sector, r.task_id, phase);
        }
        p
    }
}

enum Selector {
    BySector(Vec<Vec<TaskId>>),
    Edf,
    /// Task ids keyed by pass offset within a cycle, and the cycle length in rotations.
    Planned(HashMap<usize, Vec<TaskId>>, usize),
}

/// Runs `cycles` complete update cycles.
pub fn simulate(s: &Scenario, policy: &SimPolicy, cycles: usize) -> Result<SimulationTrace> {
    s.ensure_valid()?;
    if cycles == 0 {
        return Err(Error::invalid("at least one cycle is required"));
    }
    let n = s.n_sectors;
    let fov = s.fov();

    let selector = match policy {
        SimPolicy::Partition(p) => {
            p.check(s)?;
            Selector::BySector(p.sectors.iter().map(|b| b.iter().map(|pl| pl.task).collect()).collect())
        }
        SimPolicy::Broadside => {
            let p = broadside_baseline(s);
            Selector::BySector(p.sectors.iter().map(|b| b.iter().map(|pl| pl.task).collect()).collect())
        }
        SimPolicy::Edf => Selector::Edf,
        SimPolicy::Planned(plan) => planned_selector(s, plan)?,
    };

    let mut warnings = Vec::new();
    for (j, &r) in s.resources.iter().enumerate() {
        if r > s.dt {
            warnings.push(format!("sector {j}: resources {r} s exceed the pass duration {} s", s.dt));
        }
    }

    let mut trace = SimulationTrace {
        n_sectors: n,
        dt: s.dt,
        records: Vec::new(),
        illuminations: s.tasks.iter().map(|t| (t.id, Vec::new())).collect(),
        cycles: Vec::new(),
        warnings,
    };
    if s.tasks.is_empty() {
        return Ok(trace);
    }

    let by_id: HashMap<TaskId, &SurveillanceTask> = s.tasks.iter().map(|t| (t.id, t)).collect();
    let mut last_seen: HashMap<TaskId, f64> = HashMap::new();
    let stall_limit = (s.tasks.len() + 1) * n;
    let mut start = 0;

    for cycle in 0..cycles {
        let mut pending: BTreeSet<TaskId> = s.tasks.iter().map(|t| t.id).collect();
        let mut pass = start;
        loop {
            if pass - start > stall_limit {
                return Err(Error::Infeasible(format!(
                    "cycle {cycle} made no progress after {stall_limit} passes"
                )));
            }
            let sector = pass % n;
            let capacity = s.resources[sector];

            let mut candidates: Vec<&SurveillanceTask> = match &selector {
                Selector::BySector(b) => b[sector].iter().filter(|id| pending.contains(id)).map(|id| by_id[id]).collect(),
                Selector::Edf => s
                    .tasks
                    .iter()
                    .filter(|t| pending.contains(&t.id) && sector_distance(sector, t.home_sector, n) <= fov)
                    .collect(),
                Selector::Planned(plan, span) => plan
                    .get(&((pass - start) % (span * n)))
                    .map(|ids| ids.iter().filter(|id| pending.contains(id)).map(|id| by_id[id]).collect())
                    .unwrap_or_default(),
            };
            candidates.sort_by(|a, b| {
                let la = last_seen.get(&a.id).copied().unwrap_or(f64::NEG_INFINITY);
                let lb = last_seen.get(&b.id).copied().unwrap_or(f64::NEG_INFINITY);
                la.total_cmp(&lb).then(a.id.cmp(&b.id))
            });

            let mut chosen: Vec<&SurveillanceTask> = Vec::new();
            let mut used = 0.0;
            if let Some(first) = candidates.first() {
                let forced = first.duration > capacity + SLACK
                    && match &selector {
                        Selector::Edf => !s.resources.iter().enumerate().any(|(j, &r)| {
                            sector_distance(j, first.home_sector, n) <= fov && r + SLACK >= first.duration
                        }),
                        Selector::Planned(..) => false,
                        _ => true,
                    };
                if forced {
                    trace.warnings.push(format!(
                        "pass {pass}: task {} ({} s) exceeds sector {sector} resources {capacity} s, executed alone",
                        first.id, first.duration
                    ));
                    chosen.push(first);
                } else {
                    let planned = matches!(selector, Selector::Planned(..));
                    for t in candidates {
                        if planned || used + t.duration <= capacity + SLACK {
                            used += t.duration;
                            chosen.push(t);
                        }
                    }
                }
            }

            let mut offset = 0.0;
            for t in chosen {
                let timestamp = pass as f64 * s.dt + offset;
                trace.records.push(ExecutionRecord {
                    pass,
                    rotation: pass / n,
                    sector,
                    task_id: t.id,
                    start_offset: offset,
                    duration: t.duration,
                    timestamp,
                    cycle,
                });
                if let Some(h) = trace.illuminations.get_mut(&t.id) {
                    h.push(timestamp);
                }
                last_seen.insert(t.id, timestamp);
                pending.remove(&t.id);
                offset += t.duration;
            }

            if pending.is_empty() {
                trace.cycles.push(CycleSpan { start_pass: start, completion_pass: pass });
                start = (pass / n + 1) * n;
                break;
            }
            pass += 1;
        }
    }
    Ok(trace)
}

fn planned_selector(s: &Scenario, plan: &[ExactAssignment]) -> Result<Selector> {
    let n = s.n_sectors;
    let mut by_offset: HashMap<usize, Vec<TaskId>> = HashMap::new();
    let mut seen = HashSet::new();
    let mut span = 1;
    for a in plan {
        if a.sector >= n || s.task(a.task).is_none() || !seen.insert(a.task) {
            return Err(Error::invalid(format!("plan entry for task {} does not match the scenario", a.task)));
        }
        span = span.max(a.rotation + 1);
        by_offset.entry(a.rotation * n + a.sector).or_default().push(a.task);
    }
    if seen.len() != s.tasks.len() {
        return Err(Error::invalid("plan does not cover every task"));
    }
    Ok(Selector::Planned(by_offset, span))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisitInterval {
    pub task_id: TaskId,
    pub home_sector: usize,
    /// Sector of the later of the two illuminations.
    pub exec_sector: usize,
    pub interval_s: f64,
    pub interval_rot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevisitStats {
    pub intervals: Vec<RevisitInterval>,
    pub max_rotations: f64,
    pub mean_rotations: f64,
    /// Worst interval per home sector, in rotations.
    pub per_sector_max_rotations: Vec<f64>,
    /// Worst interval that ends after the first two cycles; equal to
    /// `max_rotations` when only two cycles were simulated.
    pub steady_state_max_rotations: f64,
}

pub fn revisit_stats(trace: &SimulationTrace, s: &Scenario) -> Result<RevisitStats> {
    if trace.n_sectors != s.n_sectors {
        return Err(Error::invalid("trace and scenario disagree on the sector count"));
    }
    if !s.tasks.is_empty() && trace.cycles.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "revisit intervals need at least 2 cycles, trace has {}",
            trace.cycles.len()
        )));
    }
    let rotation = s.n_sectors as f64 * s.dt;
    let homes: HashMap<TaskId, usize> = s.tasks.iter().map(|t| (t.id, t.home_sector)).collect();

    let mut history: BTreeMap<TaskId, Vec<&ExecutionRecord>> = BTreeMap::new();
    for r in &trace.records {
        history.entry(r.task_id).or_default().push(r);
    }

    let mut intervals = Vec::new();
    let mut per_sector = vec![0.0f64; s.n_sectors];
    let mut steady: f64 = 0.0;
    let steady_from = if trace.cycles.len() > 2 { 2 } else { 1 };
    for (id, recs) in &history {
        let home = *homes
            .get(id)
            .ok_or_else(|| Error::invalid(format!("trace references unknown task {id}")))?;
        for pair in recs.windows(2) {
            let interval_s = pair[1].timestamp - pair[0].timestamp;
            let interval_rot = interval_s / rotation;
            per_sector[home] = per_sector[home].max(interval_rot);
            if pair[1].cycle >= steady_from {
                steady = steady.max(interval_rot);
            }
            intervals.push(RevisitInterval {
                task_id: *id,
                home_sector: home,
                exec_sector: pair[1].sector,
                interval_s,
                interval_rot,
            });
        }
    }
    let max_rotations = intervals.iter().map(|i| i.interval_rot).fold(0.0, f64::max);
    let mean_rotations = if intervals.is_empty() {
        0.0
    } else {
        intervals.iter().map(|i| i.interval_rot).sum::<f64>() / intervals.len() as f64
    };
    Ok(RevisitStats {
        intervals,
        max_rotations,
        mean_rotations,
        per_sector_max_rotations: per_sector,
        steady_state_max_rotations: steady,
    })
}

/// Exponentially smoothed estimate of the surveillance time left per sector
/// after other radar functions have taken their share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub alpha: f64,
    pub dt: f64,
    /// `None` until the sector has been observed once.
    pub available: Vec<Option<f64>>,
}

impl ResourceEstimate {
    pub fn new(n_sectors: usize, dt: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("smoothing factor {alpha} outside (0, 1]")));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("pass duration {dt} must be positive")));
        }
        Ok(ResourceEstimate { alpha, dt, available: vec![None; n_sectors] })
    }

    /// Folds one pass worth of foreign load into the sector's estimate.
    pub fn observe(&mut self, sector: usize, used: f64) -> Result<f64> {
        if !(used >= 0.0) {
            return Err(Error::invalid(format!("used time {used} must be non-negative")));
        }
        let slot = self
            .available
            .get_mut(sector)
            .ok_or_else(|| Error::invalid(format!("sector {sector} out of range")))?;
        let sample = (self.dt - used).max(0.0);
        let next = match *slot {
            None => sample,
            Some(prev) => ((1.0 - self.alpha) * prev + self.alpha * sample).max(0.0),
        };
        *slot = Some(next);
        Ok(next)
    }

    /// Estimates as a resource vector, with `fallback` for unobserved sectors.
    pub fn resources(&self, fallback: f64) -> Vec<f64> {
        self.available.iter().map(|a| a.unwrap_or(fallback)).collect()
    }
}

/// Smooths a per-pass log of time used by other functions; pass `k` belongs
/// to sector `k mod N`.
pub fn measure_resources(used_per_pass: &[f64], n_sectors: usize, dt: f64, alpha: f64) -> Result<ResourceEstimate> {
    if n_sectors == 0 {
        return Err(Error::invalid("sector count must be positive"));
    }
    let mut est = ResourceEstimate::new(n_sectors, dt, alpha)?;
    for (k, &used) in used_per_pass.iter().enumerate() {
        est.observe(k % n_sectors, used)?;
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::{equalize, GreedyPolicy};
    use crate::testutil::scenario;

    fn three_sector() -> Scenario {
        scenario(&[(0, 2.0), (0, 2.0), (1, 2.0)], &[2.0, 2.0, 2.0], 1)
    }

    #[test]
    fn equalized_example_runs_one_rotation_per_cycle() {
        let s = three_sector();
        let p = equalize(&s, &GreedyPolicy::default()).unwrap();
        let trace = simulate(&s, &SimPolicy::Partition(p), 3).unwrap();
        assert_eq!(trace.completion_pass(), Some(2));
        assert!(trace.violations(&s).is_empty());
        let stats = revisit_stats(&trace, &s).unwrap();
        assert!(stats.intervals.iter().all(|i| (i.interval_s - 3.0).abs() < 1e-12));
        assert_eq!(stats.max_rotations, 1.0);
    }

    #[test]
    fn broadside_example_needs_two_rotations() {
        let s = three_sector();
        let trace = simulate(&s, &SimPolicy::Broadside, 3).unwrap();
        assert_eq!(trace.completion_pass(), Some(3));
        assert_eq!(trace.cycle_rotations(), vec![2, 2, 2]);
        assert!(trace.violations(&s).is_empty());
        let stats = revisit_stats(&trace, &s).unwrap();
        assert_eq!(stats.max_rotations, 2.0);
        assert_eq!(stats.per_sector_max_rotations[0], 2.0);
    }

    #[test]
    fn empty_scenario_gives_empty_trace() {
        let s = scenario(&[], &[1.0, 1.0], 0);
        let trace = simulate(&s, &SimPolicy::Edf, 2).unwrap();
        assert!(trace.records.is_empty());
        assert_eq!(trace.completion_pass(), None);
    }

    #[test]
    fn single_task_revisits_every_rotation() {
        let s = scenario(&[(0, 0.5)], &[1.0], 0);
        let trace = simulate(&s, &SimPolicy::Broadside, 4).unwrap();
        let stats = revisit_stats(&trace, &s).unwrap();
        assert_eq!(stats.intervals.len(), 3);
        assert!(stats.intervals.iter().all(|i| i.interval_s == 1.0 && i.interval_rot == 1.0));
    }

    #[test]
    fn least_recently_illuminated_goes_first() {
        // three tasks, room for one per pass: round robin
        let s = scenario(&[(0, 1.0), (0, 1.0), (0, 1.0)], &[1.0], 0);
        let trace = simulate(&s, &SimPolicy::Broadside, 2).unwrap();
        let order: Vec<TaskId> = trace.records.iter().map(|r| r.task_id).collect();
        assert_eq!(order, vec![0, 1, 2, 0, 1, 2]);
        assert_eq!(trace.cycles[1].start_pass, 3);
    }

    #[test]
    fn edf_uses_any_sector_in_view() {
        let s = three_sector();
        let trace = simulate(&s, &SimPolicy::Edf, 2).unwrap();
        assert!(trace.violations(&s).is_empty());
        assert_eq!(trace.completion_pass(), Some(2));
    }

    #[test]
    fn planned_replay_matches_plan() {
        let s = three_sector();
        let plan = vec![
            ExactAssignment { task: 0, sector: 0, rotation: 0 },
            ExactAssignment { task: 1, sector: 2, rotation: 0 },
            ExactAssignment { task: 2, sector: 1, rotation: 0 },
        ];
        let trace = simulate(&s, &SimPolicy::Planned(plan), 2).unwrap();
        assert_eq!(trace.completion_pass(), Some(2));
        assert!(trace.violations(&s).is_empty());
        let bad = vec![ExactAssignment { task: 0, sector: 0, rotation: 0 }];
        assert!(simulate(&s, &SimPolicy::Planned(bad), 1).is_err());
    }

    #[test]
    fn oversized_task_runs_alone_with_warning() {
        let s = scenario(&[(0, 3.0), (0, 1.0)], &[2.0], 0);
        let trace = simulate(&s, &SimPolicy::Broadside, 1).unwrap();
        assert!(trace.warnings.iter().any(|w| w.contains("executed alone")));
        assert_eq!(trace.records[0].task_id, 0);
        assert_eq!(trace.records[1].pass, 1);
        assert!(!trace.violations(&s).is_empty());
    }

    #[test]
    fn resources_above_pass_duration_warn() {
        let s = scenario(&[(0, 1.0)], &[2.0], 0);
        let trace = simulate(&s, &SimPolicy::Broadside, 1).unwrap();
        assert!(trace.warnings[0].contains("exceed the pass duration"));
    }

    #[test]
    fn mismatched_partition_is_rejected() {
        let s = three_sector();
        let wrong = SchedulePartition::empty(3);
        assert!(matches!(simulate(&s, &SimPolicy::Partition(wrong), 1), Err(Error::InvalidInput(_))));
        assert!(simulate(&s, &SimPolicy::Broadside, 0).is_err());
    }

    #[test]
    fn revisit_needs_two_cycles() {
        let s = three_sector();
        let trace = simulate(&s, &SimPolicy::Broadside, 1).unwrap();
        assert!(matches!(revisit_stats(&trace, &s), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn timestamps_accumulate_within_a_pass() {
        let s = scenario(&[(0, 0.25), (0, 0.5)], &[1.0, 1.0], 0);
        let trace = simulate(&s, &SimPolicy::Broadside, 2).unwrap();
        let r = &trace.records;
        assert_eq!((r[0].start_offset, r[0].timestamp), (0.0, 0.0));
        assert_eq!((r[1].start_offset, r[1].timestamp), (0.25, 0.25));
        assert_eq!(r[2].pass, 2);
        assert_eq!(r[2].timestamp, 2.0);
    }

    #[test]
    fn estimator_fixed_point_and_passthrough() {
        let est = measure_resources(&[0.3; 200], 1, 1.0, 0.3).unwrap();
        assert!((est.available[0].unwrap() - 0.7).abs() < 1e-12);

        let log = [0.1, 0.9, 0.4, 0.25];
        let est = measure_resources(&log, 1, 1.0, 1.0).unwrap();
        assert!((est.available[0].unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn estimator_alternating_load() {
        // x_{k+1} = 0.5 x_k + 0.5 (1 - u_k), independent iteration
        let used: Vec<f64> = (0..60).map(|k| if k % 2 == 0 { 0.2 } else { 0.4 }).collect();
        let mut expected = Vec::new();
        let mut x = 1.0 - used[0];
        expected.push(x);
        for &u in &used[1..] {
            x = 0.5 * x + 0.5 * (1.0 - u);
            expected.push(x);
        }
        let mut est = ResourceEstimate::new(1, 1.0, 0.5).unwrap();
        let got: Vec<f64> = used.iter().map(|&u| est.observe(0, u).unwrap()).collect();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12);
        }
        assert!((got[0] - 0.8).abs() < 1e-12);
        assert!((got[1] - 0.7).abs() < 1e-12);
        assert!((got[2] - 0.75).abs() < 1e-12);
        // two-cycle limit {2/3, 11/15}
        assert!((got[59] - 2.0 / 3.0).abs() < 1e-9);
        assert!((got[58] - 11.0 / 15.0).abs() < 1e-9);
    }

    #[test]
    fn estimator_rejects_bad_input() {
        assert!(ResourceEstimate::new(2, 1.0, 0.0).is_err());
        assert!(ResourceEstimate::new(2, 1.0, 1.5).is_err());
        let mut est = ResourceEstimate::new(2, 1.0, 0.5).unwrap();
        assert!(est.observe(0, -0.1).is_err());
        assert!(est.observe(5, 0.1).is_err());
        assert_eq!(est.observe(1, 3.0).unwrap(), 0.0);
        assert_eq!(est.resources(9.0), vec![9.0, 0.0]);
    }
}
