//! Random scenario generation and on-disk formats.
//!
//! Scenarios and partitions are JSON; load reports, traces, revisit
//! statistics and comparisons are CSV with a header row. Floats are written
//! in shortest round-trip form, so `read(write(x)) == x` bit for bit.
//!
//! # Generator
//!
//! The generator is portable by construction. The state is xoshiro256++
//! seeded with four consecutive outputs of SplitMix64 started at `seed`
//! (SplitMix64: increment `0x9E3779B97F4A7C15`, mixers `0xBF58476D1CE4E5B9`
//! and `0x94D049BB133111EB`, shifts 30/27/31; xoshiro256++: output
//! `rotl(s0 + s3, 23) + s0`, update shift 17 and rotation 45). A uniform
//! real in `[0, 1)` is `(x >> 11) * 2^-53`, and an integer in `[lo, hi]` is
//! `lo + floor(u * (hi - lo + 1))`.
//!
//! Draw order, for each sector `i = 0..N`: resources, task count, then per
//! task its azimuth fraction within the sector, elevation and duration.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::load::{LoadReport, SchedulePartition, SectorLoad};
use crate::model::{sector_of_direction, Direction, Scenario, SurveillanceTask, TaskId};
use crate::sim::{RevisitStats, SimulationTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hotspot {
    pub sector: usize,
    /// Scales the sector's resources; 0 produces a zero-resource sector.
    pub resource_multiplier: f64,
    /// Scales the sector's task count, rounded to the nearest integer.
    pub task_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_sectors: usize,
    pub fov_half_width: usize,
    pub dt: f64,
    /// Inclusive range of tasks per sector.
    pub tasks_per_sector: (usize, usize),
    pub duration: (f64, f64),
    pub resources: (f64, f64),
    pub hotspots: Vec<Hotspot>,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_sectors: 30,
            fov_half_width: 5,
            dt: 20.0,
            tasks_per_sector: (5, 15),
            duration: (0.5, 3.0),
            resources: (5.0, 20.0),
            hotspots: Vec::new(),
            seed: 0,
        }
    }
}

impl GenParams {
    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.n_sectors == 0 {
            return bad("sector count must be positive".into());
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("pass duration {} must be positive", self.dt));
        }
        let (lo, hi) = self.tasks_per_sector;
        if lo > hi {
            return bad(format!("empty task count range {lo}..={hi}"));
        }
        let (lo, hi) = self.duration;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("duration range [{lo}, {hi}] must be positive and non-empty"));
        }
        let (lo, hi) = self.resources;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("resource range [{lo}, {hi}] must be non-negative and non-empty"));
        }
        for h in &self.hotspots {
            if h.sector >= self.n_sectors {
                return bad(format!("hotspot sector {} out of range", h.sector));
            }
            for m in [h.resource_multiplier, h.task_multiplier] {
                if !(m >= 0.0) || !m.is_finite() {
                    return bad(format!("hotspot multiplier {m} must be non-negative"));
                }
            }
        }
        Ok(())
    }
}

struct Draws(Xoshiro256PlusPlus);

impl Draws {
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, (lo, hi): (f64, f64)) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn int(&mut self, (lo, hi): (usize, usize)) -> usize {
        let span = (hi - lo + 1) as f64;
        lo + ((self.unit() * span) as usize).min(hi - lo)
    }
}

/// Azimuth at fraction `u` of sector `i`, nudged so it maps back to `i`.
fn azimuth_in(i: usize, u: f64, n: usize) -> f64 {
    let mut phi = (i as f64 + u) / n as f64 * TAU;
    if phi >= TAU {
        phi = TAU.next_down();
    }
    while sector_of_direction(phi, n).map(|s| s.get()).unwrap_or(i) < i {
        phi = phi.next_up();
    }
    while sector_of_direction(phi, n).map(|s| s.get()).unwrap_or(i) > i {
        phi = phi.next_down();
    }
    phi
}

pub fn generate(p: &GenParams) -> Result<Scenario> {
    p.check()?;
    let n = p.n_sectors;
    let mut rng = Draws(Xoshiro256PlusPlus::seed_from_u64(p.seed));
    let mut resources = Vec::with_capacity(n);
    let mut tasks = Vec::new();
    let mut next_id: TaskId = 0;

    for i in 0..n {
        let mut r = rng.range(p.resources);
        let mut count = rng.int(p.tasks_per_sector) as f64;
        for h in p.hotspots.iter().filter(|h| h.sector == i) {
            r *= h.resource_multiplier;
            count = (count * h.task_multiplier).round();
        }
        resources.push(r);
        for _ in 0..count as usize {
            let phi = azimuth_in(i, rng.unit(), n);
            let theta = -PI + TAU * rng.unit();
            let duration = rng.range(p.duration);
            tasks.push(SurveillanceTask {
                id: next_id,
                direction: Direction { phi, theta },
                duration,
                home_sector: i,
            });
            next_id += 1;
        }
    }

    let s = Scenario {
        n_sectors: n,
        fov_half_width: p.fov_half_width,
        dt: p.dt,
        resources,
        tasks,
    };
    s.ensure_valid()?;
    Ok(s)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskEntry {
    id: TaskId,
    phi: f64,
    theta: f64,
    duration: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    n_sectors: usize,
    fov_half_width: usize,
    dt: f64,
    resources: Vec<f64>,
    tasks: Vec<TaskEntry>,
}

pub fn scenario_to_json(s: &Scenario) -> String {
    let file = ScenarioFile {
        n_sectors: s.n_sectors,
        fov_half_width: s.fov_half_width,
        dt: s.dt,
        resources: s.resources.clone(),
        tasks: s
            .tasks
            .iter()
            .map(|t| TaskEntry {
                id: t.id,
                phi: t.direction.phi,
                theta: t.direction.theta,
                duration: t.duration,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("scenario serializes");
    out.push('\n');
    out
}

/// Parses a scenario. `origin` names the source in diagnostics.
pub fn scenario_from_json(text: &str, origin: &Path) -> Result<Scenario> {
    let parse_err = |message: String| Error::Parse { path: origin.to_path_buf(), message };
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    if file.n_sectors == 0 {
        return Err(parse_err("n_sectors: must be at least 1".into()));
    }
    let mut tasks = Vec::with_capacity(file.tasks.len());
    for (k, t) in file.tasks.iter().enumerate() {
        if !(0.0..TAU).contains(&t.phi) {
            return Err(parse_err(format!("tasks[{k}] (id {}): phi = {} outside [0, 2π)", t.id, t.phi)));
        }
        if !(-PI..=PI).contains(&t.theta) {
            return Err(parse_err(format!("tasks[{k}] (id {}): theta = {} outside [-π, π]", t.id, t.theta)));
        }
        let home = sector_of_direction(t.phi, file.n_sectors)?.get();
        tasks.push(SurveillanceTask {
            id: t.id,
            direction: Direction { phi: t.phi, theta: t.theta },
            duration: t.duration,
            home_sector: home,
        });
    }
    let s = Scenario {
        n_sectors: file.n_sectors,
        fov_half_width: file.fov_half_width,
        dt: file.dt,
        resources: file.resources,
        tasks,
    };
    s.ensure_valid()?;
    Ok(s)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    scenario_from_json(&read_text(path)?, path)
}

pub fn write_scenario(s: &Scenario, path: &Path) -> Result<()> {
    write_text(path, &scenario_to_json(s))
}

pub fn partition_to_json(p: &SchedulePartition) -> String {
    let mut out = serde_json::to_string_pretty(p).expect("partition serializes");
    out.push('\n');
    out
}

pub fn write_partition(p: &SchedulePartition, path: &Path) -> Result<()> {
    write_text(path, &partition_to_json(p))
}

pub fn read_partition(path: &Path) -> Result<SchedulePartition> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub pass: usize,
    pub rotation: usize,
    pub sector: usize,
    pub task_id: TaskId,
    pub start_offset: f64,
    pub duration: f64,
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub policy: String,
    pub max_relative_load: f64,
    pub worst_revisit_rotations: f64,
    /// -1 when nothing was scheduled.
    pub completion_pass: i64,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    write_text(path, &to_csv(rows)?)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    from_csv(&read_text(path)?, path)
}

pub fn load_report_rows(r: &LoadReport) -> &[SectorLoad] {
    &r.sectors
}

pub fn trace_rows(t: &SimulationTrace) -> Vec<TraceRow> {
    t.records
        .iter()
        .map(|r| TraceRow {
            pass: r.pass,
            rotation: r.rotation,
            sector: r.sector,
            task_id: r.task_id,
            start_offset: r.start_offset,
            duration: r.duration,
            timestamp: r.timestamp,
        })
        .collect()
}

pub fn write_load_report(r: &LoadReport, path: &Path) -> Result<()> {
    write_csv(load_report_rows(r), path)
}

pub fn write_trace(t: &SimulationTrace, path: &Path) -> Result<()> {
    write_csv(&trace_rows(t), path)
}

pub fn write_revisit_stats(stats: &RevisitStats, path: &Path) -> Result<()> {
    write_csv(&stats.intervals, path)
}
