//! Multi-seed comparison of NP-Graph against the baselines, plus the CSV,
//! text and SVG outputs shared with the command-line tool.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{run_fbf, run_ol, run_rslam};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, Evaluation};
use crate::models::Dataset;
use crate::sim::{simulate, GroundTruth, SimConfig};
use crate::slam::{run_np_slam, RunConfig, SlamResult};
use crate::svg::{line_plot, map_plot, Marker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    NpGraph,
    Ol,
    RSlam,
    Fbf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::NpGraph, Algorithm::Ol, Algorithm::RSlam, Algorithm::Fbf];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::NpGraph => "NP-Graph",
            Algorithm::Ol => "OL",
            Algorithm::RSlam => "R-SLAM",
            Algorithm::Fbf => "FbF",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "npgraph" | "np" | "npslam" => Ok(Algorithm::NpGraph),
            "ol" => Ok(Algorithm::Ol),
            "rslam" => Ok(Algorithm::RSlam),
            "fbf" => Ok(Algorithm::Fbf),
            _ => Err(Error::Config(format!("unknown algorithm `{s}` (expected np-graph, ol, r-slam or fbf)"))),
        }
    }
}

pub fn run_algorithm(alg: Algorithm, dataset: &Dataset, cfg: &RunConfig) -> Result<SlamResult> {
    match alg {
        Algorithm::NpGraph => run_np_slam(dataset, cfg),
        Algorithm::Ol => run_ol(dataset, cfg),
        Algorithm::RSlam => run_rslam(dataset, cfg),
        Algorithm::Fbf => run_fbf(dataset, cfg),
    }
}

/// Metric values of one successful run. Truth-dependent fields are `None`
/// when no ground truth was available.
#[derive(Debug, Clone, PartialEq)]
pub struct RowValues {
    pub mean_pose_error: Option<f64>,
    pub cumulative_trajectory_error: Option<f64>,
    pub percent_measurements_used: f64,
    /// Detections assigned to a reported (unpruned) landmark, percent.
    pub percent_inliers: f64,
    pub num_objects: usize,
    pub mean_object_error: Option<f64>,
    pub association_accuracy: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub object_count_history: Vec<usize>,
}

/// One line of `metrics.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub algorithm: String,
    pub seed: Option<u64>,
    pub outcome: std::result::Result<RowValues, String>,
}

impl RowValues {
    pub fn from_result(result: &SlamResult, evaluation: Option<&Evaluation>) -> Self {
        let inliers = result
            .assoc
            .iter()
            .filter(|(_, id)| result.landmarks.contains_key(id))
            .count();
        let percent_inliers = if result.total_detections == 0 {
            100.0
        } else {
            100.0 * inliers as f64 / result.total_detections as f64
        };
        Self {
            mean_pose_error: evaluation.map(|e| e.mean_pose_error),
            cumulative_trajectory_error: evaluation.map(|e| e.cumulative_pose_error),
            percent_measurements_used: 100.0 * result.fraction_used(),
            percent_inliers,
            num_objects: result.landmarks.len(),
            mean_object_error: evaluation.map(|e| e.mean_object_error).filter(|v| v.is_finite()),
            association_accuracy: evaluation.map(|e| 100.0 * e.association_accuracy),
            iterations: result.iterations_run,
            converged: result.converged,
            object_count_history: result.object_count_history.clone(),
        }
    }
}

/// One algorithm on one seed.
#[derive(Debug, Clone)]
pub struct Cell {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub outcome: std::result::Result<(SlamResult, Evaluation), String>,
}

impl Cell {
    pub fn row(&self) -> MetricsRow {
        MetricsRow {
            algorithm: self.algorithm.name().to_string(),
            seed: Some(self.seed),
            outcome: self
                .outcome
                .as_ref()
                .map(|(r, e)| RowValues::from_result(r, Some(e)))
                .map_err(Clone::clone),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub seeds: Vec<u64>,
    /// Ground truth per seed, or the simulation error.
    pub truths: Vec<std::result::Result<GroundTruth, String>>,
    /// Ordered by seed, then algorithm.
    pub cells: Vec<Cell>,
}

impl Benchmark {
    pub fn rows(&self) -> Vec<MetricsRow> {
        self.cells.iter().map(Cell::row).collect()
    }

    pub fn cell(&self, seed: u64, algorithm: Algorithm) -> Option<&Cell> {
        self.cells.iter().find(|c| c.seed == seed && c.algorithm == algorithm)
    }
}

/// Simulates every seed and runs all four algorithms on each, in parallel.
/// Failures are recorded per cell.
pub fn run_benchmark(sim: &SimConfig, run: &RunConfig, seeds: &[u64]) -> Benchmark {
    let data: Vec<std::result::Result<(GroundTruth, Dataset), String>> = seeds
        .par_iter()
        .map(|&seed| simulate(&SimConfig { seed, ..sim.clone() }).map_err(|e| e.to_string()))
        .collect();
    let jobs: Vec<(usize, Algorithm)> = (0..seeds.len())
        .flat_map(|i| Algorithm::ALL.into_iter().map(move |a| (i, a)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(i, algorithm)| {
            let outcome = match &data[i] {
                Err(e) => Err(format!("simulation failed: {e}")),
                Ok((truth, dataset)) => run_algorithm(algorithm, dataset, run)
                    .and_then(|r| evaluate(&r, truth).map(|e| (r, e)))
                    .map_err(|e| e.to_string()),
            };
            Cell { seed: seeds[i], algorithm, outcome }
        })
        .collect();
    Benchmark {
        seeds: seeds.to_vec(),
        truths: data.into_iter().map(|d| d.map(|(t, _)| t)).collect(),
        cells,
    }
}

const CSV_HEADER: &str = "algorithm,seed,status,mean_pose_error,cumulative_trajectory_error,percent_measurements_used,percent_inliers,num_objects,mean_object_error,association_accuracy,iterations,converged,object_count_history";
const FAILED: &str = "FAILED";
const MISSING: &str = "NA";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), |v| format!("{v:.6}"))
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

pub fn format_metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let seed = row.seed.map_or_else(|| MISSING.to_string(), |s| s.to_string());
        match &row.outcome {
            Ok(v) => {
                let history: Vec<String> = v.object_count_history.iter().map(ToString::to_string).collect();
                writeln!(
                    out,
                    "{},{seed},ok,{},{},{:.6},{:.6},{},{},{},{},{},{}",
                    csv_field(&row.algorithm),
                    opt(v.mean_pose_error),
                    opt(v.cumulative_trajectory_error),
                    v.percent_measurements_used,
                    v.percent_inliers,
                    v.num_objects,
                    opt(v.mean_object_error),
                    opt(v.association_accuracy),
                    v.iterations,
                    v.converged,
                    history.join(";")
                )
                .unwrap();
            }
            Err(message) => {
                writeln!(
                    out,
                    "{},{seed},failed: {},{FAILED},{FAILED},{FAILED},{FAILED},{FAILED},{FAILED},{FAILED},{FAILED},{FAILED},{FAILED}",
                    csv_field(&row.algorithm),
                    csv_field(message)
                )
                .unwrap();
            }
        }
    }
    out
}

pub fn parse_metrics_csv(text: &str, path: Option<&Path>) -> Result<Vec<MetricsRow>> {
    let err = |line: usize, message: String| Error::Parse { path: path.map(Path::to_path_buf), line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(err(1, "missing or unexpected metrics.csv header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(err(i + 1, format!("expected 13 fields, found {}", f.len())));
        }
        let seed = if f[1] == MISSING {
            None
        } else {
            Some(f[1].parse().map_err(|_| err(i + 1, format!("invalid seed `{}`", f[1])))?)
        };
        let num = |j: usize| -> Result<f64> { f[j].parse().map_err(|_| err(i + 1, format!("invalid number `{}`", f[j]))) };
        let opt_num = |j: usize| -> Result<Option<f64>> { if f[j] == MISSING { Ok(None) } else { num(j).map(Some) } };
        let outcome = if f[2] == "ok" {
            Ok(RowValues {
                mean_pose_error: opt_num(3)?,
                cumulative_trajectory_error: opt_num(4)?,
                percent_measurements_used: num(5)?,
                percent_inliers: num(6)?,
                num_objects: num(7)? as usize,
                mean_object_error: opt_num(8)?,
                association_accuracy: opt_num(9)?,
                iterations: num(10)? as usize,
                converged: f[11] == "true",
                object_count_history: if f[12].is_empty() {
                    Vec::new()
                } else {
                    f[12]
                        .split(';')
                        .map(|c| c.parse().map_err(|_| err(i + 1, format!("invalid count `{c}`"))))
                        .collect::<Result<_>>()?
                },
            })
        } else if let Some(message) = f[2].strip_prefix("failed: ") {
            Err(message.to_string())
        } else {
            return Err(err(i + 1, format!("invalid status `{}`", f[2])));
        };
        rows.push(MetricsRow { algorithm: f[0].to_string(), seed, outcome });
    }
    Ok(rows)
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}

/// Human-readable table: mean and sample standard deviation per algorithm.
pub fn summarize(rows: &[MetricsRow]) -> String {
    let mut algorithms: Vec<&str> = Vec::new();
    for r in rows {
        if !algorithms.contains(&r.algorithm.as_str()) {
            algorithms.push(&r.algorithm);
        }
    }
    let mut seeds: Vec<String> = rows.iter().filter_map(|r| r.seed).map(|s| s.to_string()).collect();
    seeds.dedup();
    let mut seen = Vec::new();
    seeds.retain(|s| {
        let fresh = !seen.contains(s);
        seen.push(s.clone());
        fresh
    });

    let mut out = String::new();
    writeln!(out, "seeds: {}", if seeds.is_empty() { "none".to_string() } else { seeds.join(" ") }).unwrap();
    writeln!(out, "values are mean ± sample standard deviation over successful runs").unwrap();
    writeln!(out).unwrap();
    let columns: [(&str, fn(&RowValues) -> Option<f64>); 7] = [
        ("mean pose error (m)", |v| v.mean_pose_error),
        ("cumulative trajectory error (m)", |v| v.cumulative_trajectory_error),
        ("measurements used (%)", |v| Some(v.percent_measurements_used)),
        ("number of objects", |v| Some(v.num_objects as f64)),
        ("mean object error (m)", |v| v.mean_object_error),
        ("association accuracy (%)", |v| v.association_accuracy),
        ("outer iterations", |v| Some(v.iterations as f64)),
    ];
    for alg in algorithms {
        let mine: Vec<&MetricsRow> = rows.iter().filter(|r| r.algorithm == alg).collect();
        let ok: Vec<&RowValues> = mine.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
        writeln!(out, "{alg}: {}/{} runs succeeded", ok.len(), mine.len()).unwrap();
        for (name, get) in columns {
            let values: Vec<f64> = ok.iter().filter_map(|v| get(v)).collect();
            let cell = match mean_std(&values) {
                Some((m, s)) => format!("{m:.3} ± {s:.3}"),
                None => MISSING.to_string(),
            };
            writeln!(out, "  {name:<32} {cell}").unwrap();
        }
        for r in mine.iter().filter(|r| r.outcome.is_err()) {
            let seed = r.seed.map_or_else(|| MISSING.to_string(), |s| s.to_string());
            writeln!(out, "  FAILED seed {seed}: {}", r.outcome.as_ref().unwrap_err()).unwrap();
        }
        writeln!(out).unwrap();
    }
    out
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn xy(poses: &[crate::se2::Pose2]) -> Vec<(f64, f64)> {
    poses.iter().map(|p| (p.x, p.y)).collect()
}

/// Writes `metrics.csv`, `summary.txt`, `object_counts.csv`,
/// `cumulative_error.csv` and `plot_*.svg` into `dir`.
pub fn write_benchmark(bench: &Benchmark, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = bench.rows();
    write(dir, "metrics.csv", &format_metrics_csv(&rows))?;
    write(dir, "summary.txt", &summarize(&rows))?;

    let mut counts = String::from("algorithm,seed,iteration,num_landmarks\n");
    let mut count_series = Vec::new();
    for cell in &bench.cells {
        if let Ok((r, _)) = &cell.outcome {
            for (i, c) in r.object_count_history.iter().enumerate() {
                writeln!(counts, "{},{},{},{c}", cell.algorithm, cell.seed, i + 1).unwrap();
            }
            if cell.algorithm == Algorithm::NpGraph {
                let pts = r.object_count_history.iter().enumerate().map(|(i, c)| ((i + 1) as f64, *c as f64)).collect();
                count_series.push((format!("seed {}", cell.seed), pts));
            }
        }
    }
    write(dir, "object_counts.csv", &counts)?;
    write(
        dir,
        "plot_object_counts.svg",
        &line_plot("NP-Graph landmarks per iteration", "iteration", "landmarks", &count_series),
    )?;

    let mut cumulative = String::from("algorithm,seed,t,cumulative_error\n");
    for cell in &bench.cells {
        if let Ok((_, e)) = &cell.outcome {
            let mut acc = 0.0;
            for (t, err) in e.per_pose_error.iter().enumerate() {
                acc += err;
                writeln!(cumulative, "{},{},{t},{acc:.6}", cell.algorithm, cell.seed).unwrap();
            }
        }
    }
    write(dir, "cumulative_error.csv", &cumulative)?;

    if let Some(&seed) = bench.seeds.first() {
        let mut series = Vec::new();
        for alg in Algorithm::ALL {
            if let Some(Cell { outcome: Ok((_, e)), .. }) = bench.cell(seed, alg) {
                let mut acc = 0.0;
                let pts = e
                    .per_pose_error
                    .iter()
                    .enumerate()
                    .map(|(t, err)| {
                        acc += err;
                        (t as f64, acc)
                    })
                    .collect();
                series.push((alg.name().to_string(), pts));
            }
        }
        write(
            dir,
            "plot_cumulative_error.svg",
            &line_plot(&format!("Cumulative pose error, seed {seed}"), "pose index", "cumulative error (m)", &series),
        )?;
        if let (Some(Ok(truth)), Some(Cell { outcome: Ok((r, _)), .. })) =
            (bench.truths.first(), bench.cell(seed, Algorithm::NpGraph))
        {
            write(dir, "plot_map.svg", &map_svg(&format!("NP-Graph map, seed {seed}"), r, Some(truth)))?;
        }
    }
    Ok(())
}

fn map_svg(title: &str, result: &SlamResult, truth: Option<&GroundTruth>) -> String {
    let mut trajectories = Vec::new();
    let mut markers: Vec<Marker> = result
        .landmarks
        .values()
        .map(|l| Marker { x: l.position.x, y: l.position.y, class: l.belief.most_likely_class(), hollow: false })
        .collect();
    if let Some(truth) = truth {
        trajectories.push(("ground truth".to_string(), xy(&truth.poses)));
        markers.extend(truth.objects.iter().map(|o| Marker { x: o.position.x, y: o.position.y, class: o.class, hollow: true }));
    }
    trajectories.push(("estimate".to_string(), xy(&result.poses)));
    map_plot(title, &trajectories, &markers)
}

pub fn format_trajectory_csv(poses: &[crate::se2::Pose2]) -> String {
    let mut out = String::from("t,x,y,theta\n");
    for (t, p) in poses.iter().enumerate() {
        writeln!(out, "{t},{:.6},{:.6},{:.6}", p.x, p.y, p.theta).unwrap();
    }
    out
}

pub fn format_landmarks_csv(result: &SlamResult) -> String {
    let mut out = String::from("id,x,y,class,detections,p_false_positive,status\n");
    let all = result
        .landmarks
        .values()
        .map(|l| (l, "kept"))
        .chain(result.pruned.values().map(|l| (l, "pruned")));
    for (l, status) in all {
        writeln!(
            out,
            "{},{:.6},{:.6},{},{},{:.6},{status}",
            l.id.0,
            l.position.x,
            l.position.y,
            l.belief.most_likely_class(),
            l.count,
            crate::association::ml_class(&l.belief)[0]
        )
        .unwrap();
    }
    out
}

/// Outputs of a single run: trajectory, landmarks, metrics, summary and a map.
pub fn write_run(
    dir: &Path,
    algorithm: Algorithm,
    result: &SlamResult,
    truth: Option<&GroundTruth>,
    seed: Option<u64>,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let evaluation = truth.map(|t| evaluate(result, t)).transpose()?;
    let row = MetricsRow {
        algorithm: algorithm.name().to_string(),
        seed,
        outcome: Ok(RowValues::from_result(result, evaluation.as_ref())),
    };
    write(dir, "trajectory.csv", &format_trajectory_csv(&result.poses))?;
    write(dir, "landmarks.csv", &format_landmarks_csv(result))?;
    write(dir, "metrics.csv", &format_metrics_csv(std::slice::from_ref(&row)))?;
    write(dir, "summary.txt", &summarize(std::slice::from_ref(&row)))?;
    write(dir, "plot_map.svg", &map_svg(&format!("{algorithm} map"), result, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values() -> RowValues {
        RowValues {
            mean_pose_error: Some(0.07),
            cumulative_trajectory_error: Some(55.1),
            percent_measurements_used: 100.0,
            percent_inliers: 99.5,
            num_objects: 15,
            mean_object_error: None,
            association_accuracy: Some(98.0),
            iterations: 4,
            converged: true,
            object_count_history: vec![40, 20, 15, 15],
        }
    }

    #[test]
    fn metrics_csv_round_trip() {
        let rows = vec![
            MetricsRow { algorithm: "NP-Graph".into(), seed: Some(3), outcome: Ok(values()) },
            MetricsRow { algorithm: "OL".into(), seed: Some(3), outcome: Err("solver error: boom, again".into()) },
        ];
        let text = format_metrics_csv(&rows);
        let back = parse_metrics_csv(&text, None).unwrap();
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[1].outcome, Err("solver error: boom; again".to_string()));
        assert!(text.lines().nth(2).unwrap().contains(FAILED));
        assert_eq!(format_metrics_csv(&back), text);
    }

    #[test]
    fn summary_statistics() {
        let mut a = values();
        a.mean_pose_error = Some(1.0);
        let mut b = values();
        b.mean_pose_error = Some(3.0);
        let rows = vec![
            MetricsRow { algorithm: "X".into(), seed: Some(0), outcome: Ok(a) },
            MetricsRow { algorithm: "X".into(), seed: Some(1), outcome: Ok(b) },
            MetricsRow { algorithm: "X".into(), seed: Some(2), outcome: Err("bad".into()) },
        ];
        let s = summarize(&rows);
        assert!(s.contains("seeds: 0 1 2"));
        assert!(s.contains("2/3 runs succeeded"));
        assert!(s.contains("2.000 ± 1.414"), "{s}");
        assert!(s.contains("FAILED seed 2: bad"));
    }

    #[test]
    fn algorithm_names_parse() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("gps".parse::<Algorithm>().is_err());
    }
}
