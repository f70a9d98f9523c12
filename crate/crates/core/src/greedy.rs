//! Greedy sector equalization.
//!
//! Each sector is filled up to its fractional target `r_opt * R_i`, first from
//! its own tasks and then from tasks of sectors inside its field of view.
//! Whatever is left over goes to the reachable sector whose relative load
//! after the insertion is smallest.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::load::{sector_targets, Phase, SchedulePartition};
use crate::model::{active_sectors, sector_distance, Scenario, SectorIndex, SurveillanceTask, TaskId};

/// Absolute slack on every budget comparison, in seconds.
pub const CAP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskOrder {
    /// Descending duration, then ascending id.
    #[default]
    LongestFirst,
    /// Ascending duration, then ascending id.
    ShortestFirst,
    /// Ascending id only.
    ById,
}

/// How to pick among leftover sectors with equal relative load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorTieBreak {
    /// Closest to the task's home sector, then lowest index.
    #[default]
    NearestHome,
    LowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GreedyPolicy {
    pub ordering: TaskOrder,
    pub leftover_ordering: TaskOrder,
    pub tie_break: SectorTieBreak,
}

impl TaskOrder {
    /// Total order on tasks. With an anchor `(sector, N)`, tasks closer to the
    /// anchor sector win ties on the primary key.
    fn compare(
        self,
        a: &SurveillanceTask,
        b: &SurveillanceTask,
        anchor: Option<(usize, usize)>,
    ) -> Ordering {
        let primary = match self {
            TaskOrder::LongestFirst => b.duration.total_cmp(&a.duration),
            TaskOrder::ShortestFirst => a.duration.total_cmp(&b.duration),
            TaskOrder::ById => Ordering::Equal,
        };
        let near = |t: &SurveillanceTask| {
            anchor.map_or(0, |(sector, n)| sector_distance(sector, t.home_sector, n))
        };
        primary
            .then_with(|| near(a).cmp(&near(b)))
            .then_with(|| a.id.cmp(&b.id))
    }

    pub fn sort(self, tasks: &mut [&SurveillanceTask]) {
        tasks.sort_by(|a, b| self.compare(a, b, None));
    }
}

/// First-fit selection of a maximal subset under `budget`.
///
/// The returned set `P` satisfies `already_used + Σ_P d ≤ budget` and no
/// candidate outside `P` fits on top of it (both up to [`CAP_SLACK`]).
pub fn maximal_subset(
    candidates: &[&SurveillanceTask],
    budget: f64,
    already_used: f64,
    policy: &GreedyPolicy,
) -> Vec<TaskId> {
    fill(candidates, budget, already_used, policy.ordering, None).0
}

fn fill(
    candidates: &[&SurveillanceTask],
    budget: f64,
    already_used: f64,
    order: TaskOrder,
    anchor: Option<(usize, usize)>,
) -> (Vec<TaskId>, f64) {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| order.compare(a, b, anchor));
    let mut used = already_used;
    let mut picked = Vec::new();
    for t in sorted {
        if used + t.duration <= budget + CAP_SLACK {
            used += t.duration;
            picked.push(t.id);
        }
    }
    (picked, used)
}

/// Assigns every task to a sector inside its field of view.
pub fn equalize(s: &Scenario, policy: &GreedyPolicy) -> Result<SchedulePartition> {
    s.ensure_valid()?;
    let targets = sector_targets(s)?.targets;
    let n_sectors = s.n_sectors;
    let fov = s.fov();
    let by_home = s.tasks_by_home();

    let index_of: std::collections::HashMap<TaskId, usize> =
        s.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
    let mut placed = vec![false; s.tasks.len()];
    let mut loads = vec![0.0; n_sectors];
    let mut partition = SchedulePartition::empty(n_sectors);

    for i in 0..n_sectors {
        let budget = targets[i];
        let anchor = Some((i, n_sectors));

        let own: Vec<&SurveillanceTask> = by_home[i]
            .iter()
            .copied()
            .filter(|t| !placed[index_of[&t.id]])
            .collect();
        let (p1, used) = fill(&own, budget, 0.0, policy.ordering, anchor);
        for id in p1 {
            placed[index_of[&id]] = true;
            partition.push(i, id, Phase::OwnSector);
        }

        let reachable: Vec<&SurveillanceTask> = active_sectors(SectorIndex::new(i, n_sectors), fov, n_sectors)
            .into_iter()
            .flat_map(|j| by_home[j.get()].iter().copied())
            .filter(|t| !placed[index_of[&t.id]])
            .collect();
        let (p2, used) = fill(&reachable, budget, used, policy.ordering, anchor);
        for id in p2 {
            placed[index_of[&id]] = true;
            partition.push(i, id, Phase::FovEqualized);
        }
        loads[i] = used;
    }

    let mut leftovers: Vec<&SurveillanceTask> = s
        .tasks
        .iter()
        .zip(&placed)
        .filter(|(_, &p)| !p)
        .map(|(t, _)| t)
        .collect();
    policy.leftover_ordering.sort(&mut leftovers);

    for t in leftovers {
        let home = SectorIndex::new(t.home_sector, n_sectors);
        let best = active_sectors(home, fov, n_sectors)
            .into_iter()
            .map(SectorIndex::get)
            .filter(|&j| targets[j] > 0.0)
            .map(|j| (j, (t.duration + loads[j]) / targets[j]))
            .min_by(|(ja, sa), (jb, sb)| {
                sa.total_cmp(sb).then_with(|| match policy.tie_break {
                    SectorTieBreak::NearestHome => sector_distance(*ja, home.get(), n_sectors)
                        .cmp(&sector_distance(*jb, home.get(), n_sectors))
                        .then(ja.cmp(jb)),
                    SectorTieBreak::LowestIndex => ja.cmp(jb),
                })
            });
        let Some((j, _)) = best else {
            return Err(Error::InfeasibleTask {
                task: t.id,
                reason: format!("no sector within {fov} of home sector {home} has resources"),
            });
        };
        loads[j] += t.duration;
        partition.push(j, t.id, Phase::Leftover);
    }

    Ok(partition)
}
