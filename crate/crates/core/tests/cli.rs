use std::path::Path;
use std::process::{Command, Output};

use sigevo::fixtures;
use sigevo::lights::{LightsProgramme, PhaseWindow};

fn sigevo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigevo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn crossing_programme(windows: [(u32, u32); 2]) -> String {
    LightsProgramme {
        params: fixtures::crossing_params(),
        windows: windows
            .iter()
            .enumerate()
            .map(|(i, &(start, green))| PhaseWindow {
                track: i + 1,
                start,
                green,
            })
            .collect(),
    }
    .to_json()
}

const CROSSING_ENCODING: [&str; 10] = [
    "--cycle-ticks",
    "16",
    "--t-min",
    "2",
    "--yellow",
    "1",
    "--red-yellow",
    "1",
    "--repair-gap",
    "1",
];

#[test]
fn validate_accepts_fixture_and_feasible_programme() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "crossing.xml", fixtures::CROSSING_XML);
    let out = sigevo(&["validate", &net]);
    assert_eq!(out.status.code(), Some(0));
    let prog = write(tmp.path(), "p.json", &crossing_programme([(0, 2), (8, 2)]));
    let out = sigevo(&["validate", &net, &prog]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(out.stdout, b"ok\n");
}

#[test]
fn validate_reports_overlap_with_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "crossing.xml", fixtures::CROSSING_XML);
    let prog = write(tmp.path(), "p.json", &crossing_programme([(0, 4), (2, 4)]));
    let out = sigevo(&["validate", &net, &prog]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("tracks 1 and 2 conflict"), "{text}");
}

#[test]
fn unparsable_inputs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.xml", "<network><road id=");
    assert_eq!(sigevo(&["validate", &bad]).status.code(), Some(2));
    let missing = tmp.path().join("nope.xml");
    assert_eq!(sigevo(&["validate", s(&missing)]).status.code(), Some(2));
    let net = write(tmp.path(), "crossing.xml", fixtures::CROSSING_XML);
    let junk = write(tmp.path(), "p.json", "{\"windows\": 3}");
    assert_eq!(sigevo(&["validate", &net, &junk]).status.code(), Some(2));
}

#[test]
fn simulate_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "crossing.xml", fixtures::CROSSING_XML);
    let prog = write(tmp.path(), "p.json", &crossing_programme([(0, 6), (8, 6)]));
    let out_dir = tmp.path().join("run");
    let out = sigevo(&[
        "simulate",
        &net,
        &prog,
        "--tau",
        "1000",
        "--ticks",
        "300",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stats = std::fs::read_to_string(out_dir.join("stats.csv")).unwrap();
    assert!(stats.starts_with("metric,value\nticks,300\n"), "{stats}");
    let vehicles = std::fs::read_to_string(out_dir.join("vehicles.csv")).unwrap();
    assert!(vehicles.lines().count() > 1);
    assert!(!out_dir.join("traces.jsonl").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["parameters"]["config"]["tick_ms"], 1000);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_rejects_infeasible_programme() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "crossing.xml", fixtures::CROSSING_XML);
    let prog = write(tmp.path(), "p.json", &crossing_programme([(0, 4), (2, 4)]));
    let out_dir = tmp.path().join("run");
    let out = sigevo(&["simulate", &net, &prog, "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}

#[test]
fn optimize_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "crossing.xml", fixtures::CROSSING_XML);
    let out_dir = tmp.path().join("opt");
    let mut args = vec![
        "optimize",
        &net,
        "--generations",
        "4",
        "--pop-size",
        "8",
        "--tau",
        "1000",
        "--ticks",
        "200",
    ];
    args.extend(CROSSING_ENCODING);
    args.extend(["--out-dir", s(&out_dir)]);
    let out = sigevo(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let prog = std::fs::read_to_string(out_dir.join("best_programme.json")).unwrap();
    let prog = LightsProgramme::from_json(&prog).unwrap();
    assert_eq!(prog.windows.len(), 2);
    let chrom = std::fs::read_to_string(out_dir.join("best_chromosome.txt")).unwrap();
    assert_eq!(chrom.trim().len(), 16);
    let gens = std::fs::read_to_string(out_dir.join("generations.csv")).unwrap();
    assert_eq!(gens.lines().count(), 6);
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.contains("baseline_fitness,"));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(!manifest.contains("jobs") && !manifest.contains("opt\""));
}

#[test]
fn infeasible_track_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "crossing.xml", fixtures::CROSSING_XML);
    let out_dir = tmp.path().join("opt");
    // t_max = 16 - 8 - 2 = 6 < 8.
    let out = sigevo(&[
        "optimize",
        &net,
        "--cycle-ticks",
        "16",
        "--t-min",
        "8",
        "--yellow",
        "1",
        "--red-yellow",
        "1",
        "--out-dir",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("track 1"));
}

#[test]
fn no_feasible_individual_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "triangle.xml", fixtures::TRIANGLE_XML);
    let out_dir = tmp.path().join("opt");
    let out = sigevo(&[
        "optimize",
        &net,
        "--cycle-ticks",
        "20",
        "--t-min",
        "4",
        "--yellow",
        "2",
        "--red-yellow",
        "2",
        "--repair-gap",
        "1",
        "--retry-limit",
        "5",
        "--out-dir",
        s(&out_dir),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("no feasible individual"));
}

#[test]
fn unwritable_output_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "crossing.xml", fixtures::CROSSING_XML);
    let blocker = write(tmp.path(), "file", "");
    let out = sigevo(&["baseline", &net, "--out", &format!("{blocker}/p.json")]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn baseline_is_feasible() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write(tmp.path(), "grid.xml", fixtures::GRID_XML);
    let prog = tmp.path().join("base.json");
    assert_eq!(
        sigevo(&["baseline", &net, "--out", s(&prog)]).status.code(),
        Some(0)
    );
    assert_eq!(sigevo(&["validate", &net, s(&prog)]).status.code(), Some(0));
}

#[test]
fn bad_flags_are_usage_errors() {
    let out = sigevo(&["optimize"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sigevo(&["simulate", "a.xml", "p.json", "--ticks", "many"]);
    assert_eq!(out.status.code(), Some(2));
}
