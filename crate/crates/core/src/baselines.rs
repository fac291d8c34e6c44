//! Reference methods: frame-by-frame, open-loop and a consistency-graph
//! robust SLAM that keeps one landmark per class.

use std::collections::BTreeMap;

use crate::association::update_class_beliefs;
use crate::error::Result;
use crate::graph::{build_graph, dead_reckon, Association, Landmark, LandmarkId};
use crate::models::Dataset;
use crate::se2::Point2;
use crate::slam::{singleton_landmarks, RunConfig, SlamResult};
use crate::solver::optimize;

fn open_loop_result(
    dataset: &Dataset,
    landmarks: BTreeMap<LandmarkId, Landmark>,
    assoc: Association,
) -> SlamResult {
    SlamResult {
        poses: dead_reckon(dataset),
        object_count_history: vec![landmarks.len()],
        landmarks,
        pruned: BTreeMap::new(),
        assoc,
        iterations_run: 1,
        objective_history: Vec::new(),
        solver_reports: Vec::new(),
        converged: true,
        total_detections: dataset.detections.len(),
    }
}

/// Frame-by-frame: dead reckoning, every detection its own landmark.
pub fn run_fbf(dataset: &Dataset, cfg: &RunConfig) -> Result<SlamResult> {
    cfg.validate()?;
    let model = cfg.dp.resolve(dataset)?;
    let poses = dead_reckon(dataset);
    let (landmarks, assoc) = singleton_landmarks(dataset, &poses, &model)?;
    Ok(open_loop_result(dataset, landmarks, assoc))
}

/// Open loop: dead reckoning, each detection joins the nearest landmark of its
/// class whose running mean lies within `tau_gate`, else starts a new one.
pub fn run_ol(dataset: &Dataset, cfg: &RunConfig) -> Result<SlamResult> {
    cfg.validate()?;
    let model = cfg.dp.resolve(dataset)?;
    let poses = dead_reckon(dataset);
    // (class, running mean, count)
    let mut clusters: Vec<(usize, Point2, usize)> = Vec::new();
    let mut pairs = Vec::with_capacity(dataset.detections.len());
    for d in &dataset.detections {
        let g = poses[d.t].to_global(&d.z);
        let mut best: Option<(usize, f64)> = None;
        for (i, (class, mean, _)) in clusters.iter().enumerate() {
            let dist = mean.distance(&g);
            if *class == d.class && dist < cfg.tau_gate && best.is_none_or(|(_, b)| dist < b) {
                best = Some((i, dist));
            }
        }
        let i = match best {
            Some((i, _)) => {
                let (_, mean, m) = &mut clusters[i];
                let n = *m as f64;
                *mean = Point2::new((mean.x * n + g.x) / (n + 1.0), (mean.y * n + g.y) / (n + 1.0));
                *m += 1;
                i
            }
            None => {
                clusters.push((d.class, g, 1));
                clusters.len() - 1
            }
        };
        pairs.push((d.key(), LandmarkId(i)));
    }
    let assoc = Association::from_pairs(pairs)?;
    let mut landmarks: BTreeMap<LandmarkId, Landmark> = clusters
        .iter()
        .enumerate()
        .map(|(i, (_, mean, _))| (LandmarkId(i), Landmark::new(LandmarkId(i), *mean, model.beta0.clone())))
        .collect();
    update_class_beliefs(&mut landmarks, &assoc, dataset, &model.beta0)?;
    Ok(open_loop_result(dataset, landmarks, assoc))
}

/// Greedy clique: repeatedly take the candidate with the most neighbours among
/// the remaining candidates (lowest index on ties) and keep only its neighbours.
pub fn greedy_max_clique(adjacency: &[Vec<bool>]) -> Vec<usize> {
    let mut candidates: Vec<usize> = (0..adjacency.len()).collect();
    let mut clique = Vec::new();
    while !candidates.is_empty() {
        let mut best = candidates[0];
        let mut best_degree = usize::MAX;
        for &v in &candidates {
            let degree = candidates.iter().filter(|&&w| w != v && adjacency[v][w]).count();
            if best_degree == usize::MAX || degree > best_degree {
                best = v;
                best_degree = degree;
            }
        }
        clique.push(best);
        candidates.retain(|&w| w != best && adjacency[best][w]);
    }
    clique.sort_unstable();
    clique
}

/// Consistency-graph robust SLAM assuming exactly one object per class.
///
/// Per class, detections whose dead-reckoned global positions lie within
/// `tau_gate` of each other are pairwise consistent; the largest mutually
/// consistent set found greedily is kept as that class's single landmark and
/// all other detections are discarded. Kept detections are then optimized
/// jointly with the odometry.
pub fn run_rslam(dataset: &Dataset, cfg: &RunConfig) -> Result<SlamResult> {
    cfg.validate()?;
    let model = cfg.dp.resolve(dataset)?;
    let poses = dead_reckon(dataset);
    let globals: Vec<Point2> = dataset
        .detections
        .iter()
        .map(|d| poses[d.t].to_global(&d.z))
        .collect();

    let mut keep = Vec::new();
    let mut landmarks = Vec::new();
    for class in 1..=dataset.num_classes {
        let members: Vec<usize> = (0..dataset.detections.len())
            .filter(|&i| dataset.detections[i].class == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        let adjacency: Vec<Vec<bool>> = members
            .iter()
            .map(|&a| members.iter().map(|&b| globals[a].distance(&globals[b]) < cfg.tau_gate).collect())
            .collect();
        let clique: Vec<usize> = greedy_max_clique(&adjacency).into_iter().map(|i| members[i]).collect();
        let id = LandmarkId(landmarks.len());
        let n = clique.len() as f64;
        let mean = clique.iter().fold(Point2::origin(), |acc, &i| {
            Point2::new(acc.x + globals[i].x / n, acc.y + globals[i].y / n)
        });
        landmarks.push(Landmark::new(id, mean, model.beta0.clone()));
        keep.extend(clique.into_iter().map(|i| (i, id)));
    }
    keep.sort_unstable();

    let mut used = dataset.clone();
    used.detections = keep.iter().map(|&(i, _)| dataset.detections[i].clone()).collect();
    let assoc = Association::from_pairs(keep.iter().map(|&(i, id)| (dataset.detections[i].key(), id)))?;
    let mut graph = build_graph(&used, assoc, poses, landmarks)?;
    let solution = optimize(&graph, &cfg.solver)?;
    graph.apply(solution.poses, &solution.landmarks);
    let (poses, mut landmarks, assoc) = graph.into_parts();
    update_class_beliefs(&mut landmarks, &assoc, &used, &model.beta0)?;
    Ok(SlamResult {
        poses,
        object_count_history: vec![landmarks.len()],
        landmarks,
        pruned: BTreeMap::new(),
        assoc,
        iterations_run: 1,
        objective_history: Vec::new(),
        solver_reports: vec![solution.report],
        converged: true,
        total_detections: dataset.detections.len(),
    })
}
