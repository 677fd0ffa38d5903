use std::fs;
use std::path::Path;

use jidas::cli::{run, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK};
use jidas::output::SWEEP_COLUMNS;

fn jidas(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("jidas").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FAST_SOLVER: [&str; 4] = ["--restarts", "4", "--ascent-steps", "300"];

#[test]
fn bounds_writes_the_default_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let svg = dir.path().join("sweep.svg");
    let mut args = vec!["bounds", "--csv", path(&csv), "--svg", path(&svg)];
    args.extend(FAST_SOLVER);
    let (code, _, err) = jidas(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SWEEP_COLUMNS.join(","));
    assert_eq!(lines.len(), 102);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 8));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn bounds_to_stdout() {
    let mut args = vec!["bounds", "--grid", "0.1,0.2,0.3"];
    args.extend(FAST_SOLVER);
    let (code, out, _) = jidas(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 4);
    assert!(out.lines().nth(2).unwrap().ends_with(",true"));
}

#[test]
fn infeasible_grid_exits_two() {
    let (code, out, _) = jidas(&["bounds", "--grid", "0:0.05:5"]);
    assert_eq!(code, EXIT_INFEASIBLE);
    assert!(out.contains("infeasible"), "{out}");
}

#[test]
fn non_stochastic_row_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    fs::write(
        &file,
        "x = 2\ns = 2\ny = 2\nz = 2\nprior = 0.5 0.5\nforward 0 0 = 1 0\nforward 0 1 = 0.5 0.4\n\
         forward 1 0 = 0 1\nforward 1 1 = 0.5 0.5\nfeedback 0 = 1 0\nfeedback 1 = 0 1\n",
    )
    .unwrap();
    let (code, _, err) = jidas(&["bounds", "--channel", path(&file), "--grid", "0.3"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("line 7") && err.contains("x=0,s=1"), "{err}");
}

#[test]
fn channel_file_and_binary_parameters_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ch.txt");
    let params = jidas::binary::BinaryExampleParams::new(0.2, 0.1).unwrap();
    let (ch, d) = jidas::binary::build_binary_channel(&params).unwrap();
    fs::write(&file, jidas::io::format_channel(&ch, &d)).unwrap();
    let (code, _, err) = jidas(&["bounds", "--channel", path(&file), "--p-s", "0.3"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("not both"), "{err}");
}

#[test]
fn missed_error_targets_fail() {
    let (code, out, _) = jidas(&["simulate", "--trials", "200", "--lambda1-target", "0", "--lambda2-target", "0"]);
    assert_ne!(code, EXIT_OK);
    assert!(out.contains("lambda1"), "{out}");
}

#[test]
fn simulate_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let csv = dir.path().join("d.csv");
    for r in [&a, &b] {
        let (code, _, err) = jidas(&["simulate", "-n", "8", "--trials", "300", "--seed", "11", "--report", path(r), "--csv", path(&csv)]);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    let ra = fs::read_to_string(&a).unwrap();
    let rb = fs::read_to_string(&b).unwrap();
    let strip = |s: &str| s.lines().filter(|l| !l.contains("a.json") && !l.contains("b.json")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&ra), strip(&rb));
    let v: serde_json::Value = serde_json::from_str(&ra).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["command"], "simulate");
    assert!(v["generator"].as_str().unwrap().eq_ignore_ascii_case("chacha8"));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("t,distortion,half_width,target"));
}

#[test]
fn long_blocks_refuse_enumeration() {
    let (code, _, err) = jidas(&["simulate", "-n", "40", "--trials", "10"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("enumeration bound"), "{err}");
}

#[test]
fn rif_scheme_runs() {
    let (code, out, err) = jidas(&["simulate", "--scheme", "rif", "--trials", "200"]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
}

#[test]
fn tiny_epsilon_reports_an_empty_typical_set() {
    let (code, _, err) = jidas(&["checks", "--epsilon", "1e-6", "--ns", "8"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("typical set is empty"), "{err}");
}

#[test]
fn identical_hash_maps_fail_the_collision_check() {
    let (code, out, _) = jidas(&["checks", "--identical-maps", "--ns", "8", "--samples", "200", "--hash-pairs", "200"]);
    assert_ne!(code, EXIT_OK);
    assert!(out.lines().any(|l| l.starts_with("hash") && l.ends_with("FAIL")), "{out}");
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let report = dir.path().join("r.json");
    fs::write(&cfg, "# overrides\ntrials = 123\nseed = 5\n").unwrap();
    let (code, _, err) = jidas(&["simulate", "-n", "8", "--trials", "50", "--config", path(&cfg), "--report", path(&report)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["config"]["protocol"]["trials"], 123);
    assert_eq!(v["seed"], 5);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "trails = 10\n").unwrap();
    let (code, _, err) = jidas(&["simulate", "--config", path(&cfg)]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("trails"), "{err}");
}

#[test]
fn example_prints_closed_forms() {
    let (code, out, err) = jidas(&["example", "--grid", "0.15,0.3", "--restarts", "4"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("0.1"), "{out}");
}
