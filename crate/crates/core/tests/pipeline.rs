use std::fs;
use std::process::Command;

use npgraph::bench::{parse_metrics_csv, run_benchmark, Algorithm};
use npgraph::io::{format_dataset, load_dataset, load_truth, parse_dataset, save_dataset, save_truth};
use npgraph::metrics::{object_errors, trajectory_errors};
use npgraph::sim::WorldObject;
use npgraph::{simulate, Error, Point2, Pose2, RunConfig, SimConfig};
use proptest::prelude::*;

#[test]
fn simulated_dataset_round_trips_through_files() {
    let (truth, data) = simulate(&SimConfig { seed: 12, false_positive_rate: 0.2, class_flip_prob: 0.05, ..SimConfig::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.txt");
    save_dataset(&data, &path).unwrap();
    save_truth(&truth, dir.path().join("d.truth")).unwrap();
    let back = load_dataset(&path).unwrap();
    assert_eq!(back, data);
    assert_eq!(format_dataset(&back).unwrap(), fs::read_to_string(&path).unwrap());
    assert_eq!(load_truth(dir.path().join("d.truth")).unwrap(), truth);
}

#[test]
fn malformed_files_name_the_line() {
    let text = "HEADER 2 0 0 0\nODOM 1 1 0 0 0.01 0.01 0.01\nDET 1 1 2 1.0\n";
    match parse_dataset(text, None) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn trajectory_error_examples() {
    let truth: Vec<Pose2> = (0..100).map(|t| Pose2::new(t as f64 * 0.1, 0.0, 0.0)).collect();
    let same = trajectory_errors(&truth, &truth).unwrap();
    assert_eq!((same.mean, same.cumulative), (0.0, 0.0));
    let shifted: Vec<Pose2> = truth.iter().map(|p| Pose2::new(p.x, p.y + 0.1, p.theta)).collect();
    let e = trajectory_errors(&shifted, &truth).unwrap();
    assert!((e.mean - 0.1).abs() < 1e-12);
    assert!((e.cumulative - 10.0).abs() < 1e-9);
}

#[test]
fn object_error_examples() {
    let truth = [WorldObject { position: Point2::new(1.0, 1.0), class: 2 }];
    let one = object_errors(&[(Point2::new(1.05, 1.0), 2)], &truth);
    assert!((one.mean_error - 0.05).abs() < 1e-12);
    let two = object_errors(&[(Point2::new(1.3, 1.0), 2), (Point2::new(1.0, 1.1), 2)], &truth);
    assert_eq!(two.count, 2);
    assert_eq!(two.matches.len(), 1);
    assert_eq!(two.matches[0].0, 1, "the nearer estimate is matched");
}

proptest! {
    #[test]
    fn object_errors_ignore_input_order(points in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, 1usize..4), 1..12), rot in 0usize..12) {
        let truth: Vec<WorldObject> = points.iter().take(6).map(|(x, y, c)| WorldObject { position: Point2::new(x + 0.1, y - 0.2), class: *c }).collect();
        let est: Vec<(Point2, usize)> = points.iter().map(|(x, y, c)| (Point2::new(*x, *y), *c)).collect();
        let mut rotated = est.clone();
        rotated.rotate_left(rot % est.len());
        let a = object_errors(&est, &truth);
        let b = object_errors(&rotated, &truth);
        prop_assert_eq!(a.matches.len(), b.matches.len());
        prop_assert!((a.mean_error - b.mean_error).abs() < 1e-9 || (a.mean_error.is_nan() && b.mean_error.is_nan()));
    }
}

#[test]
fn failed_runs_are_recorded_per_cell() {
    // Five objects cannot be 100 m apart inside a 10 m square.
    let sim = SimConfig { min_separation: 100.0, ..SimConfig::default() };
    let bench = run_benchmark(&sim, &RunConfig::default(), &[0, 1]);
    assert_eq!(bench.cells.len(), 2 * Algorithm::ALL.len());
    assert!(bench.cells.iter().all(|c| c.outcome.is_err()));
    let csv = npgraph::bench::format_metrics_csv(&bench.rows());
    assert_eq!(csv.matches("FAILED").count(), 8 * 10);
    assert!(parse_metrics_csv(&csv, None).unwrap().iter().all(|r| r.outcome.is_err()));
}

#[test]
fn solver_failures_map_to_exit_code_two() {
    assert_eq!(Error::Solver("singular".into()).exit_code(), 2);
    assert_eq!(Error::Validation("gap".into()).exit_code(), 1);
}

fn npgraph(args: &[&str], dir: &std::path::Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_npgraph")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn cli_simulate_run_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("cfg.toml"), "[sim]\nnum_objects = 6\nwaypoints = [[0, -2], [2, -2], [2, 2], [-2, 2], [-2, -2], [0, -2]]\nmin_views = 20\nworld_extent = 3.0\n").unwrap();
    let out = npgraph(&["simulate", "--config", "cfg.toml", "--seed", "3", "--out", "sim"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(d.join("sim/dataset.txt")).unwrap().starts_with("# seed 3\n"));

    let out = npgraph(&["run", "--dataset", "sim/dataset.txt", "--truth", "sim/dataset.truth", "--out", "run"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trajectory.csv", "landmarks.csv", "metrics.csv", "summary.txt", "plot_map.svg"] {
        assert!(d.join("run").join(f).exists(), "missing {f}");
    }
    let rows = parse_metrics_csv(&fs::read_to_string(d.join("run/metrics.csv")).unwrap(), None).unwrap();
    assert_eq!(rows[0].seed, Some(3));
    assert!(rows[0].outcome.as_ref().unwrap().mean_pose_error.is_some());

    let out = npgraph(&["run", "--dataset", "sim/dataset.txt", "--algorithm", "ol", "--out", "ol"], d);
    assert!(out.status.success());
    let rows = parse_metrics_csv(&fs::read_to_string(d.join("ol/metrics.csv")).unwrap(), None).unwrap();
    assert_eq!(rows[0].outcome.as_ref().unwrap().mean_pose_error, None, "no truth, no pose error");

    let out = npgraph(&["report", "--metrics", "run/metrics.csv"], d);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), fs::read_to_string(d.join("run/summary.txt")).unwrap());
}

#[test]
fn cli_rejects_bad_input_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.toml"), "[run]\nalpha = -2.0\n").unwrap();
    assert_eq!(npgraph(&["simulate", "--config", "bad.toml"], d).status.code(), Some(1));
    fs::write(d.join("gap.txt"), "HEADER 2 0 0 0\nODOM 1 1 0 0 0.01 0.01 0.01\nODOM 3 1 0 0 0.01 0.01 0.01\n").unwrap();
    let out = npgraph(&["run", "--dataset", "gap.txt"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t=2"));
    assert_eq!(npgraph(&["bench", "--seeds", "x"], d).status.code(), Some(1));
}
