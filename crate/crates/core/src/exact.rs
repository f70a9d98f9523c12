//! Exact minimum-completion solver for small scenarios.
//!
//! Time is quantized into sector passes: pass `p` visits sector `p mod N`
//! and offers `R_{p mod N}` seconds. The solver assigns every task to one pass
//! inside its field of view without overfilling any pass, minimizing the
//! index of the last pass used. Depth-first branch and bound: tasks in
//! descending duration, passes in ascending index, so the first leaf is the
//! first-fit-decreasing schedule and every later leaf must beat it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::check::Execution;
use crate::error::{Error, Result};
use crate::model::{active_sectors, Direction, Scenario, SectorIndex, SurveillanceTask, TaskId};

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_tasks: usize,
    pub max_sectors: usize,
    pub max_rotations: usize,
    pub node_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_tasks: 12,
            max_sectors: 8,
            max_rotations: 5,
            node_budget: 10_000_000,
        }
    }
}

impl SearchLimits {
    pub fn admits(&self, s: &Scenario) -> bool {
        s.tasks.len() <= self.max_tasks && s.n_sectors <= self.max_sectors
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactAssignment {
    pub task: TaskId,
    pub sector: usize,
    pub rotation: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSolution {
    /// One entry per task, ordered by task id.
    pub assignments: Vec<ExactAssignment>,
    /// Index of the last pass used; `None` when there is nothing to schedule.
    pub objective: Option<usize>,
    /// False when the node budget ran out before optimality was proved.
    pub optimal: bool,
    pub nodes: u64,
}

impl ExactSolution {
    pub fn executions(&self, n_sectors: usize) -> Vec<Execution> {
        self.assignments
            .iter()
            .map(|a| Execution {
                task: a.task,
                pass: a.rotation * n_sectors + a.sector,
                cycle: 0,
            })
            .collect()
    }

    /// Rotations spanned by the schedule.
    pub fn rotations(&self, n_sectors: usize) -> usize {
        self.objective.map_or(0, |p| p / n_sectors + 1)
    }
}

struct Search {
    durations: Vec<f64>,
    /// Eligible sector mask per task, indexed by sector.
    eligible: Vec<Vec<bool>>,
    /// Task k repeats task k-1 (same duration and eligibility).
    same_as_prev: Vec<bool>,
    suffix_demand: Vec<f64>,
    n_sectors: usize,
    remaining: Vec<f64>,
    chosen: Vec<usize>,
    best: Option<(usize, Vec<usize>)>,
    lower_bound: usize,
    nodes: u64,
    node_budget: u64,
    aborted: bool,
}

impl Search {
    fn run(&mut self, k: usize, cur_max: Option<usize>) {
        if self.aborted || self.proved() {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.node_budget {
            self.aborted = true;
            return;
        }
        if k == self.durations.len() {
            let obj = cur_max.unwrap_or(0);
            if self.best.as_ref().is_none_or(|(b, _)| obj < *b) {
                self.best = Some((obj, self.chosen.clone()));
            }
            return;
        }
        let limit = match &self.best {
            Some((b, _)) if *b == 0 => return,
            Some((b, _)) => b - 1,
            None => self.remaining.len() - 1,
        };
        let capacity: f64 = self.remaining[..=limit].iter().sum();
        if self.suffix_demand[k] > capacity + SLACK {
            return;
        }
        let start = if self.same_as_prev[k] { self.chosen[k - 1] } else { 0 };
        let d = self.durations[k];
        for p in start..=limit {
            // a better incumbent found below shrinks the window
            if matches!(&self.best, Some((b, _)) if p >= *b) {
                return;
            }
            if !self.eligible[k][p % self.n_sectors] || self.remaining[p] + SLACK < d {
                continue;
            }
            self.remaining[p] -= d;
            self.chosen[k] = p;
            self.run(k + 1, Some(cur_max.map_or(p, |m| m.max(p))));
            self.remaining[p] += d;
            if self.aborted || self.proved() {
                return;
            }
        }
    }

    fn proved(&self) -> bool {
        matches!(&self.best, Some((b, _)) if *b <= self.lower_bound)
    }
}

/// Smallest pass index `K` such that passes `0..=K` restricted to `mask`
/// offer at least `demand` seconds.
fn passes_needed(demand: f64, resources: &[f64], mask: &[bool], max_pass: usize) -> Option<usize> {
    let mut acc = 0.0;
    for p in 0..=max_pass {
        let j = p % resources.len();
        if mask[j] {
            acc += resources[j];
        }
        if acc + SLACK >= demand {
            return Some(p);
        }
    }
    None
}

pub fn exact_min_passes(s: &Scenario, limits: &SearchLimits) -> Result<ExactSolution> {
    s.ensure_valid()?;
    if limits.max_rotations == 0 || limits.node_budget == 0 {
        return Err(Error::invalid("search limits must be positive"));
    }
    if s.tasks.len() > limits.max_tasks {
        return Err(Error::LimitsExceeded(format!(
            "{} tasks exceeds the limit of {}",
            s.tasks.len(),
            limits.max_tasks
        )));
    }
    if s.n_sectors > limits.max_sectors {
        return Err(Error::LimitsExceeded(format!(
            "{} sectors exceeds the limit of {}",
            s.n_sectors, limits.max_sectors
        )));
    }
    if s.tasks.is_empty() {
        return Ok(ExactSolution {
            assignments: Vec::new(),
            objective: None,
            optimal: true,
            nodes: 0,
        });
    }

    let n = s.n_sectors;
    let fov = s.fov();
    let max_pass = limits.max_rotations * n - 1;

    let mut order: Vec<&SurveillanceTask> = s.tasks.iter().collect();
    order.sort_by(|a, b| b.duration.total_cmp(&a.duration).then(a.id.cmp(&b.id)));

    let mut eligible = Vec::with_capacity(order.len());
    for t in &order {
        let mut mask = vec![false; n];
        for j in active_sectors(SectorIndex::new(t.home_sector, n), fov, n) {
            mask[j.get()] = s.resources[j.get()] + SLACK >= t.duration;
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::InfeasibleTask {
                task: t.id,
                reason: format!(
                    "duration {} exceeds the resources of every sector within {fov} of home sector {}",
                    t.duration, t.home_sector
                ),
            });
        }
        eligible.push(mask);
    }

    // Lower bounds, in pass index: total demand against all passes, each
    // home sector's demand against the passes it can see, and each task's
    // earliest eligible pass.
    let all = vec![true; n];
    let mut lower_bound = passes_needed(s.total_duration(), &s.resources, &all, max_pass)
        .ok_or(Error::NoScheduleWithinRotations { max_rotations: limits.max_rotations })?;
    for (home, group) in s.tasks_by_home().iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let mut mask = vec![false; n];
        for j in active_sectors(SectorIndex::new(home, n), fov, n) {
            mask[j.get()] = true;
        }
        let demand: f64 = group.iter().map(|t| t.duration).sum();
        let lb = passes_needed(demand, &s.resources, &mask, max_pass)
            .ok_or(Error::NoScheduleWithinRotations { max_rotations: limits.max_rotations })?;
        lower_bound = lower_bound.max(lb);
    }
    for mask in &eligible {
        let earliest = mask.iter().position(|&m| m).unwrap_or(0);
        lower_bound = lower_bound.max(earliest);
    }

    let durations: Vec<f64> = order.iter().map(|t| t.duration).collect();
    let same_as_prev = (0..order.len())
        .map(|k| {
            k > 0
                && order[k].duration == order[k - 1].duration
                && eligible[k] == eligible[k - 1]
        })
        .collect();
    let mut suffix_demand = vec![0.0; durations.len() + 1];
    for k in (0..durations.len()).rev() {
        suffix_demand[k] = suffix_demand[k + 1] + durations[k];
    }

    let mut search = Search {
        durations,
        eligible,
        same_as_prev,
        suffix_demand,
        n_sectors: n,
        remaining: (0..=max_pass).map(|p| s.resources[p % n]).collect(),
        chosen: vec![0; order.len()],
        best: None,
        lower_bound,
        nodes: 0,
        node_budget: limits.node_budget,
        aborted: false,
    };
    search.run(0, None);

    let Some((objective, passes)) = search.best.take() else {
        return Err(if search.aborted {
            Error::LimitsExceeded(format!(
                "node budget of {} exhausted before any schedule was found",
                limits.node_budget
            ))
        } else {
            Error::NoScheduleWithinRotations { max_rotations: limits.max_rotations }
        });
    };
    let mut assignments: Vec<ExactAssignment> = order
        .iter()
        .zip(passes)
        .map(|(t, p)| ExactAssignment {
            task: t.id,
            sector: p % n,
            rotation: p / n,
        })
        .collect();
    assignments.sort_by_key(|a| a.task);
    Ok(ExactSolution {
        assignments,
        objective: Some(objective),
        optimal: !search.aborted,
        nodes: search.nodes,
    })
}

/// Encodes bin packing as a scenario: one sector per bin, full field of
/// view, every item homed in sector 0. Packing into the bins is possible iff
/// the scenario completes within one rotation.
pub fn bin_packing_reduce(item_sizes: &[f64], bin_capacities: &[f64]) -> Result<Scenario> {
    if item_sizes.is_empty() || bin_capacities.is_empty() {
        return Err(Error::invalid("bin packing needs at least one item and one bin"));
    }
    if let Some(x) = item_sizes.iter().chain(bin_capacities).find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::invalid(format!("sizes and capacities must be positive, got {x}")));
    }
    let n = bin_capacities.len();
    let phi = PI / n as f64;
    let tasks = item_sizes
        .iter()
        .enumerate()
        .map(|(i, &d)| SurveillanceTask::new(i as TaskId, Direction::new(phi, 0.0)?, d, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario {
        n_sectors: n,
        fov_half_width: n / 2,
        dt: bin_capacities.iter().copied().fold(0.0, f64::max),
        resources: bin_capacities.to_vec(),
        tasks,
    })
}

/// Decides bin packing feasibility through the exact solver restricted to one rotation.
pub fn fits_in_one_rotation(item_sizes: &[f64], bin_capacities: &[f64], limits: &SearchLimits) -> Result<bool> {
    let s = bin_packing_reduce(item_sizes, bin_capacities)?;
    let one = SearchLimits { max_rotations: 1, ..*limits };
    match exact_min_passes(&s, &one) {
        Ok(sol) => Ok(sol.objective.is_some_and(|p| p < s.n_sectors)),
        Err(Error::NoScheduleWithinRotations { .. }) | Err(Error::InfeasibleTask { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}
