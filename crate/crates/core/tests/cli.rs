use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, Output};

use sectorsched::io::{self, ComparisonRow};
use sectorsched::load::SectorLoad;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sectorsched")).args(args).output().unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// Three sectors, n = 1, R = 2 each; two tasks of 2 s in sector 0 and one in sector 1.
fn tiny(dir: &Path) -> String {
    let mid = |i: f64| (i + 0.5) / 3.0 * TAU;
    let text = format!(
        r#"{{"n_sectors": 3, "fov_half_width": 1, "dt": 2.0, "resources": [2.0, 2.0, 2.0],
            "tasks": [{{"id": 0, "phi": {a}, "theta": 0.0, "duration": 2.0}},
                      {{"id": 1, "phi": {a}, "theta": 0.0, "duration": 2.0}},
                      {{"id": 2, "phi": {b}, "theta": 0.0, "duration": 2.0}}]}}"#,
        a = mid(0.0),
        b = mid(1.0)
    );
    let path = p(dir, "tiny.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn compare_matches_exact_on_tiny_example() {
    let dir = tempfile::tempdir().unwrap();
    let scen = tiny(dir.path());
    let out = p(dir.path(), "cmp.csv");
    let o = run(&["compare", "--scenario", &scen, "--exact", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<ComparisonRow> = io::read_csv(Path::new(&out)).unwrap();
    let get = |name: &str| rows.iter().find(|r| r.policy == name).unwrap();
    assert_eq!(get("greedy").completion_pass, 2);
    assert_eq!(get("exact").completion_pass, 2);
    assert_eq!(get("greedy").max_relative_load, 1.0);
    assert!(get("broadside").completion_pass > 2);
}

#[test]
fn gen_schedule_simulate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(&["gen", "--seed", "3", "--sectors", "12", "--fov", "2", "--hotspot", "4:0.5:2", "--out", &p(d, "s.json")]);
    assert!(o.status.success());
    let s = io::read_scenario(&d.join("s.json")).unwrap();
    assert_eq!(s.n_sectors, 12);

    let o = run(&["schedule", "--scenario", &p(d, "s.json"), "--out", &p(d, "p.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let part = io::read_partition(&d.join("p.json")).unwrap();
    part.check(&s).unwrap();
    let loads: Vec<SectorLoad> = io::read_csv(&d.join("p.load.csv")).unwrap();
    assert_eq!(loads.len(), 12);
    assert!(loads.iter().map(|l| l.relative_load).fold(0.0, f64::max) >= 1.0 - 1e-9);

    let o = run(&["schedule", "--scenario", &p(d, "s.json"), "--out", &p(d, "b.json"), "--policy", "broadside", "--format", "json"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("b.load.json")).unwrap()).unwrap();
    assert_eq!(report["sectors"].as_array().unwrap().len(), 12);

    for policy in ["greedy", "broadside", "edf"] {
        let trace = p(d, &format!("{policy}.csv"));
        let o = run(&["simulate", "--scenario", &p(d, "s.json"), "--policy", policy, "--cycles", "3", "--out", &trace]);
        assert!(o.status.success(), "{policy}: {}", String::from_utf8_lossy(&o.stderr));
        let rows: Vec<io::TraceRow> = io::read_csv(Path::new(&trace)).unwrap();
        assert_eq!(rows.len(), 3 * s.tasks.len());
        assert!(d.join(format!("{policy}.revisits.csv")).exists());
    }
}

#[test]
fn report_writes_one_row_per_fov() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "summary.csv");
    let detail = p(dir.path(), "detail.csv");
    let o = run(&["report", "--seed", "10", "--count", "4", "--sectors", "10", "--fovs", "1,3", "--out", &out, "--detail", &detail]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(std::fs::read_to_string(&detail).unwrap().lines().count(), 9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    std::fs::write(d.join("bad.json"), "{ not json").unwrap();
    let o = run(&["schedule", "--scenario", &p(d, "bad.json"), "--out", &p(d, "p.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());

    let o = run(&["simulate", "--scenario", &p(d, "missing.json"), "--out", &p(d, "t.csv")]);
    assert_eq!(o.status.code(), Some(1));

    // demand with no resources anywhere
    let text = r#"{"n_sectors": 2, "fov_half_width": 1, "dt": 1.0, "resources": [0.0, 0.0],
                   "tasks": [{"id": 0, "phi": 1.0, "theta": 0.0, "duration": 1.0}]}"#;
    std::fs::write(d.join("dry.json"), text).unwrap();
    let o = run(&["schedule", "--scenario", &p(d, "dry.json"), "--out", &p(d, "p.json")]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(&["gen", "--out", &p(d, "x.json"), "--hotspot", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
}
