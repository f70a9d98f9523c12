//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on invalid input or validation failure,
//! 2 when the scenario is infeasible.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{exact_min_passes, SearchLimits};
use crate::greedy::{equalize, GreedyPolicy};
use crate::io::{self, ComparisonRow, GenParams, Hotspot};
use crate::load::{broadside_baseline, load_report, LoadReport, SchedulePartition};
use crate::model::Scenario;
use crate::sim::{revisit_stats, simulate, SimPolicy, SimulationTrace};

#[derive(Debug, Parser)]
#[command(name = "sectorsched", version, about = "Sector-equalizing surveillance scheduler for rotating radars")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random scenario.
    Gen(GenArgs),
    /// Assign tasks to sectors and write the partition and its load report.
    Schedule(ScheduleArgs),
    /// Simulate rotations and write the execution trace and revisit intervals.
    Simulate(SimulateArgs),
    /// Compare greedy, broadside and EDF (and optionally the exact solver).
    Compare(CompareArgs),
    /// Aggregate policy statistics over a batch of seeds.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Greedy,
    Broadside,
    Edf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub sectors: usize,
    /// Field-of-view half-width in sectors.
    #[arg(long, default_value_t = 5)]
    pub fov: usize,
    #[arg(long, default_value_t = 20.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 5)]
    pub min_tasks: usize,
    #[arg(long, default_value_t = 15)]
    pub max_tasks: usize,
    #[arg(long, default_value_t = 0.5)]
    pub min_duration: f64,
    #[arg(long, default_value_t = 3.0)]
    pub max_duration: f64,
    #[arg(long, default_value_t = 5.0)]
    pub min_resource: f64,
    #[arg(long, default_value_t = 20.0)]
    pub max_resource: f64,
    /// `SECTOR:RESOURCE_MULT:TASK_MULT`, repeatable.
    #[arg(long, value_parser = parse_hotspot)]
    pub hotspot: Vec<Hotspot>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Partition output (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Load report output; defaults to the partition path with `.load.csv`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
    pub policy: PolicyArg,
    /// Override the scenario's field-of-view half-width.
    #[arg(long)]
    pub fov: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Trace output (CSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Revisit statistics output; defaults to the trace path with `.revisits.csv`.
    #[arg(long)]
    pub revisits: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
    pub policy: PolicyArg,
    /// Partition to execute with the greedy policy; computed when absent.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub cycles: usize,
    #[arg(long)]
    pub fov: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Comparison output (CSV); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub cycles: usize,
    /// Also run the exact solver when the scenario is small enough.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub fov: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// First seed of the batch.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub count: u64,
    #[arg(long, default_value_t = 30)]
    pub sectors: usize,
    /// Field-of-view half-widths to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    pub fovs: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub cycles: usize,
    /// Summary output (CSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-seed output (CSV).
    #[arg(long)]
    pub detail: Option<PathBuf>,
}

fn parse_hotspot(s: &str) -> std::result::Result<Hotspot, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [sector, res, tasks] = parts.as_slice() else {
        return Err(format!("expected SECTOR:RESOURCE_MULT:TASK_MULT, got {s:?}"));
    };
    Ok(Hotspot {
        sector: sector.parse().map_err(|e| format!("sector: {e}"))?,
        resource_multiplier: res.parse().map_err(|e| format!("resource multiplier: {e}"))?,
        task_multiplier: tasks.parse().map_err(|e| format!("task multiplier: {e}"))?,
    })
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_infeasibility() {
                2
            } else {
                1
            }
        }
    }
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn load_scenario(path: &Path, fov: Option<usize>) -> Result<Scenario> {
    let s = io::read_scenario(path)?;
    Ok(match fov {
        Some(n) => s.with_fov(n),
        None => s,
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let params = GenParams {
        n_sectors: a.sectors,
        fov_half_width: a.fov,
        dt: a.dt,
        tasks_per_sector: (a.min_tasks, a.max_tasks),
        duration: (a.min_duration, a.max_duration),
        resources: (a.min_resource, a.max_resource),
        hotspots: a.hotspot,
        seed: a.seed,
    };
    io::write_scenario(&io::generate(&params)?, &a.out)
}

fn partition_for(s: &Scenario, policy: PolicyArg) -> Result<SchedulePartition> {
    match policy {
        PolicyArg::Greedy => equalize(s, &GreedyPolicy::default()),
        PolicyArg::Broadside => Ok(broadside_baseline(s)),
        PolicyArg::Edf => Err(Error::invalid(
            "edf is an online policy and has no static partition; use `simulate` or `compare`",
        )),
    }
}

#[derive(Serialize)]
struct LoadReportJson<'a> {
    r_opt: f64,
    max_relative_load: Option<f64>,
    rotations_to_complete_bound: Option<f64>,
    sectors: Vec<SectorJson<'a>>,
}

#[derive(Serialize)]
struct SectorJson<'a> {
    #[serde(flatten)]
    load: &'a crate::load::SectorLoad,
    infinite: bool,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn write_report(r: &LoadReport, path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Csv => io::write_load_report(r, path),
        Format::Json => {
            // JSON has no infinity; infinite ratios become null plus a flag
            let doc = LoadReportJson {
                r_opt: r.r_opt,
                max_relative_load: finite(r.max_relative_load),
                rotations_to_complete_bound: finite(r.rotations_to_complete_bound),
                sectors: r
                    .sectors
                    .iter()
                    .map(|load| SectorJson { load, infinite: load.relative_load.is_infinite() })
                    .collect(),
            };
            let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
            text.push('\n');
            std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
        }
    }
}

fn cmd_schedule(a: ScheduleArgs) -> Result<()> {
    let s = load_scenario(&a.scenario, a.fov)?;
    let p = partition_for(&s, a.policy)?;
    let report = load_report(&s, &p)?;
    io::write_partition(&p, &a.out)?;
    let ext = match a.format {
        Format::Csv => ".load.csv",
        Format::Json => ".load.json",
    };
    let report_path = a.report.unwrap_or_else(|| sibling(&a.out, ext));
    write_report(&report, &report_path, a.format)
}

fn sim_policy(s: &Scenario, policy: PolicyArg, partition: Option<&Path>) -> Result<SimPolicy> {
    Ok(match policy {
        PolicyArg::Greedy => match partition {
            Some(path) => SimPolicy::Partition(io::read_partition(path)?),
            None => SimPolicy::Partition(equalize(s, &GreedyPolicy::default())?),
        },
        PolicyArg::Broadside => SimPolicy::Broadside,
        PolicyArg::Edf => SimPolicy::Edf,
    })
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let s = load_scenario(&a.scenario, a.fov)?;
    if a.partition.is_some() && a.policy != PolicyArg::Greedy {
        return Err(Error::invalid("--partition only applies to the greedy policy"));
    }
    let policy = sim_policy(&s, a.policy, a.partition.as_deref())?;
    let trace = simulate(&s, &policy, a.cycles)?;
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    io::write_trace(&trace, &a.out)?;
    let revisits = a.revisits.unwrap_or_else(|| sibling(&a.out, ".revisits.csv"));
    match revisit_stats(&trace, &s) {
        Ok(stats) => io::write_revisit_stats(&stats, &revisits),
        Err(Error::InsufficientData(msg)) => {
            eprintln!("note: revisit statistics skipped: {msg}");
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn completion(trace: &SimulationTrace) -> i64 {
    trace.completion_pass().map_or(-1, |p| p as i64)
}

fn worst_revisit(trace: &SimulationTrace, s: &Scenario) -> Result<f64> {
    if s.tasks.is_empty() {
        return Ok(0.0);
    }
    Ok(revisit_stats(trace, s)?.max_rotations)
}

/// Greedy, broadside and EDF rows, plus an exact row when requested and admissible.
pub fn comparison(s: &Scenario, cycles: usize, exact: bool) -> Result<Vec<ComparisonRow>> {
    let cycles = cycles.max(2);
    let mut rows = Vec::new();
    let greedy = equalize(s, &GreedyPolicy::default())?;
    for policy in [SimPolicy::Partition(greedy), SimPolicy::Broadside, SimPolicy::Edf] {
        let trace = simulate(s, &policy, cycles)?;
        let partition = match &policy {
            SimPolicy::Partition(p) => p.clone(),
            SimPolicy::Broadside => broadside_baseline(s),
            _ => trace.cycle_partition(s, 0),
        };
        rows.push(ComparisonRow {
            policy: policy.name().to_string(),
            max_relative_load: load_report(s, &partition)?.max_relative_load,
            worst_revisit_rotations: worst_revisit(&trace, s)?,
            completion_pass: completion(&trace),
        });
    }
    if exact {
        let limits = SearchLimits::default();
        if limits.admits(s) {
            let sol = exact_min_passes(s, &limits)?;
            let trace = simulate(s, &SimPolicy::Planned(sol.assignments.clone()), cycles)?;
            rows.push(ComparisonRow {
                policy: "exact".to_string(),
                max_relative_load: load_report(s, &trace.cycle_partition(s, 0))?.max_relative_load,
                worst_revisit_rotations: worst_revisit(&trace, s)?,
                completion_pass: sol.objective.map_or(-1, |p| p as i64),
            });
        } else {
            eprintln!(
                "note: exact solver skipped, scenario exceeds {} tasks or {} sectors",
                limits.max_tasks, limits.max_sectors
            );
        }
    }
    Ok(rows)
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let s = load_scenario(&a.scenario, a.fov)?;
    let rows = comparison(&s, a.cycles, a.exact)?;
    let text = match a.format {
        Format::Csv => io::to_csv(&rows)?,
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&rows).expect("rows serialize");
            t.push('\n');
            t
        }
    };
    match a.out {
        Some(path) => std::fs::write(&path, text).map_err(|source| Error::Io { path, source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRow {
    pub seed: u64,
    pub fov: usize,
    pub greedy_max_relative_load: f64,
    pub broadside_max_relative_load: f64,
    pub edf_max_relative_load: f64,
    pub greedy_worst_revisit_rotations: f64,
    pub broadside_worst_revisit_rotations: f64,
    pub edf_worst_revisit_rotations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub fov: usize,
    pub scenarios: usize,
    pub mean_greedy_max_relative_load: f64,
    pub mean_broadside_max_relative_load: f64,
    pub mean_edf_max_relative_load: f64,
    pub mean_greedy_worst_revisit_rotations: f64,
    pub mean_broadside_worst_revisit_rotations: f64,
    pub mean_edf_worst_revisit_rotations: f64,
}

fn seed_row(seed: u64, fov: usize, sectors: usize, cycles: usize) -> Result<SeedRow> {
    let s = io::generate(&GenParams { seed, n_sectors: sectors, fov_half_width: fov, ..Default::default() })?;
    let rows = comparison(&s, cycles, false)?;
    let get = |name: &str| rows.iter().find(|r| r.policy == name).expect("policy row present");
    let (g, b, e) = (get("greedy"), get("broadside"), get("edf"));
    Ok(SeedRow {
        seed,
        fov,
        greedy_max_relative_load: g.max_relative_load,
        broadside_max_relative_load: b.max_relative_load,
        edf_max_relative_load: e.max_relative_load,
        greedy_worst_revisit_rotations: g.worst_revisit_rotations,
        broadside_worst_revisit_rotations: b.worst_revisit_rotations,
        edf_worst_revisit_rotations: e.worst_revisit_rotations,
    })
}

/// Per-seed rows for every `(fov, seed)` pair, in fov-then-seed order.
/// Seeds are evaluated on worker threads; the merge order does not depend
/// on scheduling.
pub fn batch(base_seed: u64, count: u64, sectors: usize, fovs: &[usize], cycles: usize) -> Result<Vec<SeedRow>> {
    let jobs: Vec<(usize, u64)> = fovs
        .iter()
        .flat_map(|&f| (0..count).map(move |k| (f, base_seed.wrapping_add(k))))
        .collect();
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len().max(1));
    let chunk = jobs.len().div_ceil(workers).max(1);
    let results: Vec<Result<Vec<SeedRow>>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(fov, seed)| seed_row(seed, fov, sectors, cycles))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut rows = Vec::with_capacity(jobs.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn summarize(rows: &[SeedRow], fovs: &[usize]) -> Vec<SummaryRow> {
    fovs.iter()
        .map(|&fov| {
            let sel: Vec<&SeedRow> = rows.iter().filter(|r| r.fov == fov).collect();
            let mean = |f: fn(&SeedRow) -> f64| {
                if sel.is_empty() {
                    0.0
                } else {
                    sel.iter().map(|r| f(r)).sum::<f64>() / sel.len() as f64
                }
            };
            SummaryRow {
                fov,
                scenarios: sel.len(),
                mean_greedy_max_relative_load: mean(|r| r.greedy_max_relative_load),
                mean_broadside_max_relative_load: mean(|r| r.broadside_max_relative_load),
                mean_edf_max_relative_load: mean(|r| r.edf_max_relative_load),
                mean_greedy_worst_revisit_rotations: mean(|r| r.greedy_worst_revisit_rotations),
                mean_broadside_worst_revisit_rotations: mean(|r| r.broadside_worst_revisit_rotations),
                mean_edf_worst_revisit_rotations: mean(|r| r.edf_worst_revisit_rotations),
            }
        })
        .collect()
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    if a.count == 0 || a.fovs.is_empty() {
        return Err(Error::invalid("report needs at least one seed and one field of view"));
    }
    let rows = batch(a.seed, a.count, a.sectors, &a.fovs, a.cycles)?;
    if let Some(path) = &a.detail {
        io::write_csv(&rows, path)?;
    }
    io::write_csv(&summarize(&rows, &a.fovs), &a.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hotspot_flag_parses() {
        let h = parse_hotspot("3:0.5:2").unwrap();
        assert_eq!(h, Hotspot { sector: 3, resource_multiplier: 0.5, task_multiplier: 2.0 });
        assert!(parse_hotspot("3:0.5").is_err());
        assert!(parse_hotspot("x:1:1").is_err());
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/p.json"), ".load.csv"), PathBuf::from("out/p.load.csv"));
        assert_eq!(sibling(Path::new("t.csv"), ".revisits.csv"), PathBuf::from("t.revisits.csv"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["sectorsched", "schedule"]), 1);
        assert_eq!(run(["sectorsched", "bogus"]), 1);
        assert_eq!(run(["sectorsched", "--help"]), 0);
    }

    #[test]
    fn summary_means() {
        let row = |fov, g| SeedRow {
            seed: 0,
            fov,
            greedy_max_relative_load: g,
            broadside_max_relative_load: 2.0,
            edf_max_relative_load: 1.5,
            greedy_worst_revisit_rotations: 1.0,
            broadside_worst_revisit_rotations: 2.0,
            edf_worst_revisit_rotations: 3.0,
        };
        let s = summarize(&[row(1, 1.0), row(1, 2.0), row(5, 1.0)], &[1, 5]);
        assert_eq!(s[0].scenarios, 2);
        assert_eq!(s[0].mean_greedy_max_relative_load, 1.5);
        assert_eq!(s[1].mean_greedy_max_relative_load, 1.0);
    }
}
