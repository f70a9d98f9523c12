use std::f64::consts::TAU;

use crate::model::{Direction, Scenario, SurveillanceTask, TaskId};

/// Task `id` in the middle of sector `home`.
pub fn task_in(id: TaskId, home: usize, duration: f64, n: usize) -> SurveillanceTask {
    let phi = (home as f64 + 0.5) * TAU / n as f64;
    SurveillanceTask::new(id, Direction::new(phi, 0.0).unwrap(), duration, n).unwrap()
}

/// Scenario with `dt = 1` and tasks given as `(home, duration)`, ids in order.
pub fn scenario(tasks: &[(usize, f64)], resources: &[f64], fov: usize) -> Scenario {
    let n = resources.len();
    Scenario {
        n_sectors: n,
        fov_half_width: fov,
        dt: 1.0,
        resources: resources.to_vec(),
        tasks: tasks
            .iter()
            .enumerate()
            .map(|(i, &(h, d))| task_in(i as TaskId, h, d, n))
            .collect(),
    }
}
