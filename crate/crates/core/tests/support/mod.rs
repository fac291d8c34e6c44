//! Shared helpers for integration tests: tiny random instances and a
//! brute-force association oracle.

#![allow(dead_code)]

use std::collections::BTreeMap;

use npgraph::association::{update_class_beliefs, DpModel};
use npgraph::slam::objective;
use npgraph::solver::optimize;
use npgraph::{
    build_graph, dead_reckon, Association, Dataset, DetKey, Detection, Landmark, LandmarkId, Odometry, Point2, Pose2,
    SolverSettings,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const MICRO_CLASSES: usize = 3;

/// A random instance with 2-3 poses, 1-3 objects and 2-6 detections.
pub fn micro_instance(rng: &mut ChaCha8Rng) -> Dataset {
    micro_instance_scaled(rng, 1.0)
}

/// As [`micro_instance`], with the injected noise scaled; declared covariances stay nominal.
pub fn micro_instance_scaled(rng: &mut ChaCha8Rng, noise_scale: f64) -> Dataset {
    let num_poses = rng.random_range(2..=3);
    let num_objects = rng.random_range(1..=3);
    let objects: Vec<(Point2, usize)> = (0..num_objects)
        .map(|_| {
            (
                Point2::new(rng.random_range(1.0..4.0), rng.random_range(-2.0..2.0)),
                rng.random_range(1..=MICRO_CLASSES),
            )
        })
        .collect();
    let odo_noise = Normal::new(0.0, 0.02 * noise_scale).unwrap();
    let meas_noise = Normal::new(0.0, 0.1 * noise_scale).unwrap();

    let mut truth = vec![Pose2::identity()];
    let mut odometry = Vec::new();
    for t in 1..num_poses {
        let step = Pose2::new(rng.random_range(0.2..0.6), rng.random_range(-0.1..0.1), rng.random_range(-0.2..0.2));
        truth.push(truth[t - 1].compose(&step));
        let noisy = Pose2::new(
            step.x + odo_noise.sample(rng),
            step.y + odo_noise.sample(rng),
            step.theta + odo_noise.sample(rng),
        );
        odometry.push(Odometry::with_sigmas(t, noisy, 0.02, 0.02));
    }

    let mut sightings: Vec<(usize, usize)> = Vec::new();
    for t in 0..num_poses {
        for j in 0..num_objects {
            if rng.random_bool(0.8) {
                sightings.push((t, j));
            }
        }
    }
    while sightings.len() > 6 {
        let i = rng.random_range(0..sightings.len());
        sightings.remove(i);
    }
    while sightings.len() < 2 {
        sightings.push((rng.random_range(0..num_poses), rng.random_range(0..num_objects)));
    }
    sightings.sort();
    let mut detections = Vec::new();
    let mut k = 0;
    for (i, &(t, j)) in sightings.iter().enumerate() {
        k = if i > 0 && sightings[i - 1].0 == t { k + 1 } else { 1 };
        let local = truth[t].to_local(&objects[j].0);
        let z = Point2::new(local.x + meas_noise.sample(rng), local.y + meas_noise.sample(rng));
        detections.push(Detection::with_sigma(t, k, z, objects[j].1, 0.1));
    }
    Dataset::new(MICRO_CLASSES, Pose2::identity(), odometry, detections).unwrap()
}

/// All set partitions of `n` items as restricted growth strings.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
    } else {
        grow(&mut Vec::with_capacity(n), n, &mut out);
    }
    out
}

/// Relabels a labeling so blocks are numbered by first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Labeling of the dataset's detections, in dataset order, under `assoc`.
pub fn labels_of(dataset: &Dataset, assoc: &Association) -> Vec<usize> {
    let raw: Vec<usize> = dataset.detections.iter().map(|d| assoc.get(d.key()).unwrap().0).collect();
    canonical(&raw)
}

/// Optimizes poses and landmarks for a fixed partition and returns the objective.
pub fn partition_objective(dataset: &Dataset, labels: &[usize], model: &DpModel, solver: &SolverSettings) -> f64 {
    let poses = dead_reckon(dataset);
    let num_blocks = labels.iter().max().map_or(0, |m| m + 1);
    let mut sums = vec![(0.0, 0.0, 0usize); num_blocks];
    for (d, &b) in dataset.detections.iter().zip(labels) {
        let g = poses[d.t].to_global(&d.z);
        sums[b].0 += g.x;
        sums[b].1 += g.y;
        sums[b].2 += 1;
    }
    let mut landmarks: BTreeMap<LandmarkId, Landmark> = sums
        .iter()
        .enumerate()
        .map(|(b, (x, y, n))| {
            let id = LandmarkId(b);
            (id, Landmark::new(id, Point2::new(x / *n as f64, y / *n as f64), model.beta0.clone()))
        })
        .collect();
    let keys: Vec<DetKey> = dataset.detections.iter().map(Detection::key).collect();
    let assoc = Association::from_pairs(keys.into_iter().zip(labels.iter().map(|b| LandmarkId(*b)))).unwrap();
    update_class_beliefs(&mut landmarks, &assoc, dataset, &model.beta0).unwrap();
    let mut graph = build_graph(dataset, assoc, poses, landmarks.into_values().collect()).unwrap();
    let solution = optimize(&graph, solver).unwrap();
    graph.apply(solution.poses, &solution.landmarks);
    objective(&graph, model).unwrap()
}

/// Exhaustive maximizer of the objective over all partitions.
pub fn brute_force(dataset: &Dataset, model: &DpModel, solver: &SolverSettings) -> (Vec<usize>, f64) {
    partitions(dataset.detections.len())
        .into_iter()
        .map(|p| {
            let v = partition_objective(dataset, &p, model, solver);
            (p, v)
        })
        .fold((Vec::new(), f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}
