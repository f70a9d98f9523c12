//! Domain types and the geometric primitives of a rotating-antenna radar.
//!
//! The azimuth circle is cut into `N` equal sectors. A mechanically rotating
//! antenna spends `dt` seconds pointing its boresight at each sector in turn
//! (one *pass*), and an electronically steered beam may look up to `n`
//! sectors to either side of the boresight. Elevation is carried on every
//! direction but plays no part in sectoring.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TaskId = u64;

/// A sector index, always reduced modulo the sector count it was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SectorIndex(usize);

impl SectorIndex {
    /// Reduces `value` modulo `n_sectors`.
    pub fn new(value: usize, n_sectors: usize) -> Self {
        assert!(n_sectors > 0, "sector count must be positive");
        SectorIndex(value % n_sectors)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for SectorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<SectorIndex> for usize {
    fn from(s: SectorIndex) -> usize {
        s.0
    }
}

/// A beam pointing direction in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    /// Azimuth in `[0, 2π)`.
    pub phi: f64,
    /// Elevation in `[-π, π]`.
    pub theta: f64,
}

impl Direction {
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::invalid(format!("azimuth {phi} outside [0, 2π)")));
        }
        if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::invalid(format!("elevation {theta} outside [-π, π]")));
        }
        Ok(Direction { phi, theta })
    }
}

/// One surveillance beam position and its dwell time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveillanceTask {
    pub id: TaskId,
    pub direction: Direction,
    /// Dwell time in seconds.
    pub duration: f64,
    pub home_sector: usize,
}

impl SurveillanceTask {
    /// Builds a task and derives its home sector from the azimuth.
    pub fn new(id: TaskId, direction: Direction, duration: f64, n_sectors: usize) -> Result<Self> {
        let home = sector_of_direction(direction.phi, n_sectors)?;
        Ok(SurveillanceTask {
            id,
            direction,
            duration,
            home_sector: home.get(),
        })
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_sectors: usize,
    /// Requested field-of-view half-width in sectors. Values above `N/2` are
    /// clamped on use, see [`Scenario::fov`].
    pub fov_half_width: usize,
    /// Seconds the boresight spends on one sector.
    pub dt: f64,
    /// Surveillance seconds available during one pass of each sector.
    pub resources: Vec<f64>,
    pub tasks: Vec<SurveillanceTask>,
}

impl Scenario {
    /// Effective field-of-view half-width, clamped to `floor(N/2)`.
    pub fn fov(&self) -> usize {
        clamp_fov(self.fov_half_width, self.n_sectors)
    }

    pub fn total_duration(&self) -> f64 {
        self.tasks.iter().map(|t| t.duration).sum()
    }

    pub fn total_resources(&self) -> f64 {
        self.resources.iter().sum()
    }

    pub fn task(&self, id: TaskId) -> Option<&SurveillanceTask> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Tasks grouped by home sector, each group in scenario order.
    pub fn tasks_by_home(&self) -> Vec<Vec<&SurveillanceTask>> {
        let mut groups = vec![Vec::new(); self.n_sectors];
        for t in &self.tasks {
            if let Some(g) = groups.get_mut(t.home_sector) {
                g.push(t);
            }
        }
        groups
    }

    pub fn with_fov(mut self, fov_half_width: usize) -> Self {
        self.fov_half_width = fov_half_width;
        self
    }

    /// Returns `Ok(())` or a [`Error::Validation`] listing every violation.
    pub fn ensure_valid(&self) -> Result<()> {
        match validate_scenario(self) {
            v if v.is_empty() => Ok(()),
            v => Err(Error::Validation(v)),
        }
    }
}

pub(crate) fn clamp_fov(n: usize, n_sectors: usize) -> usize {
    n.min(n_sectors / 2)
}

/// `floor(phi / 2π · N)`.
pub fn sector_of_direction(phi: f64, n_sectors: usize) -> Result<SectorIndex> {
    if n_sectors == 0 {
        return Err(Error::invalid("sector count must be positive"));
    }
    if !(0.0..TAU).contains(&phi) {
        return Err(Error::invalid(format!("azimuth {phi} outside [0, 2π)")));
    }
    // phi just below 2π can round up to N
    let raw = (phi / TAU * n_sectors as f64).floor() as usize;
    Ok(SectorIndex(raw.min(n_sectors - 1)))
}

/// Sector under the boresight at time `t`, counting from sector 0 at `t = 0`.
pub fn main_sector(t: f64, n_sectors: usize, dt: f64) -> Result<SectorIndex> {
    if n_sectors == 0 {
        return Err(Error::invalid("sector count must be positive"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("pass duration {dt} must be positive")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time {t} must be non-negative")));
    }
    let pass = (t / dt).floor() as usize;
    Ok(SectorIndex::new(pass, n_sectors))
}

/// Sectors reachable while the boresight is on `m`, ordered by offset from
/// `-n` to `+n`. `n` is clamped to `N/2`; duplicates are dropped.
pub fn active_sectors(m: SectorIndex, n: usize, n_sectors: usize) -> Vec<SectorIndex> {
    let n = clamp_fov(n, n_sectors);
    let mut out = Vec::with_capacity(2 * n + 1);
    for k in 0..=2 * n {
        // (m + c) mod N with c = k - n
        let s = SectorIndex::new(m.get() + n_sectors + k - n, n_sectors);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Cyclic distance between two sectors.
pub fn angular_sector_distance(a: SectorIndex, b: SectorIndex, n_sectors: usize) -> usize {
    let (a, b) = (a.get() % n_sectors, b.get() % n_sectors);
    let fwd = (a + n_sectors - b) % n_sectors;
    let back = (b + n_sectors - a) % n_sectors;
    fwd.min(back)
}

pub(crate) fn sector_distance(a: usize, b: usize, n_sectors: usize) -> usize {
    angular_sector_distance(SectorIndex(a), SectorIndex(b), n_sectors)
}

/// A single scenario invariant that does not hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoSectors,
    NonPositiveDt(f64),
    ResourceCount { expected: usize, found: usize },
    InvalidResource { sector: usize, value: f64 },
    AzimuthOutOfRange { task: TaskId, phi: f64 },
    ElevationOutOfRange { task: TaskId, theta: f64 },
    NonPositiveDuration { task: TaskId, duration: f64 },
    InconsistentHomeSector { task: TaskId, stored: usize, expected: usize },
    DuplicateId(TaskId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoSectors => write!(f, "sector count must be at least 1"),
            Violation::NonPositiveDt(v) => write!(f, "non-positive pass duration {v}"),
            Violation::ResourceCount { expected, found } => {
                write!(f, "expected {expected} resource entries, found {found}")
            }
            Violation::InvalidResource { sector, value } => {
                write!(f, "invalid resource {value} for sector {sector}")
            }
            Violation::AzimuthOutOfRange { task, phi } => {
                write!(f, "azimuth {phi} outside [0, 2π), task id {task}")
            }
            Violation::ElevationOutOfRange { task, theta } => {
                write!(f, "elevation {theta} outside [-π, π], task id {task}")
            }
            Violation::NonPositiveDuration { task, duration } => {
                write!(f, "non-positive duration {duration}, task id {task}")
            }
            Violation::InconsistentHomeSector { task, stored, expected } => write!(
                f,
                "inconsistent home sector {stored} (azimuth gives {expected}), task id {task}"
            ),
            Violation::DuplicateId(id) => write!(f, "duplicate task id {id}"),
        }
    }
}

/// Checks every scenario invariant. An empty result means the scenario is valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    if s.n_sectors == 0 {
        out.push(Violation::NoSectors);
    }
    if !(s.dt > 0.0) || !s.dt.is_finite() {
        out.push(Violation::NonPositiveDt(s.dt));
    }
    if s.resources.len() != s.n_sectors {
        out.push(Violation::ResourceCount {
            expected: s.n_sectors,
            found: s.resources.len(),
        });
    }
    for (sector, &value) in s.resources.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            out.push(Violation::InvalidResource { sector, value });
        }
    }

    let mut seen = HashSet::new();
    for t in &s.tasks {
        if !seen.insert(t.id) {
            out.push(Violation::DuplicateId(t.id));
        }
        let Direction { phi, theta } = t.direction;
        if !(0.0..TAU).contains(&phi) {
            out.push(Violation::AzimuthOutOfRange { task: t.id, phi });
        } else if s.n_sectors > 0 {
            let expected = sector_of_direction(phi, s.n_sectors).map(SectorIndex::get);
            if let Ok(expected) = expected {
                if expected != t.home_sector {
                    out.push(Violation::InconsistentHomeSector {
                        task: t.id,
                        stored: t.home_sector,
                        expected,
                    });
                }
            }
        }
        if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&theta) {
            out.push(Violation::ElevationOutOfRange { task: t.id, theta });
        }
        if !(t.duration > 0.0) || !t.duration.is_finite() {
            out.push(Violation::NonPositiveDuration {
                task: t.id,
                duration: t.duration,
            });
        }
    }
    out
}
