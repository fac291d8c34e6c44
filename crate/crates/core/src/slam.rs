//! The alternating association / optimization loop.

use std::collections::BTreeMap;

use crate::association::{
    prune_false_positives, reassign_all, update_class_beliefs, DpModel, DpParams,
};
use crate::error::{Error, Result};
use crate::graph::{build_graph, dead_reckon, Association, Landmark, LandmarkId, PoseGraph, SolverSettings};
use crate::models::{joint_log_likelihood, Dataset, DetKey};
use crate::se2::Pose2;
use crate::solver::{optimize, SolveReport};

/// Settings shared by the main method and the baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dp: DpParams,
    pub solver: SolverSettings,
    pub max_outer_iterations: usize,
    /// Association gate (m) used by the open-loop and consistency-graph baselines.
    pub tau_gate: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dp: DpParams::default(),
            solver: SolverSettings::default(),
            max_outer_iterations: 10,
            tau_gate: 0.5,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.dp.validate()?;
        self.solver.validate()?;
        if self.max_outer_iterations == 0 {
            return Err(Error::Config("max_outer_iterations must be at least 1".into()));
        }
        if !(self.tau_gate > 0.0) {
            return Err(Error::Config(format!("tau_gate must be positive, got {}", self.tau_gate)));
        }
        Ok(())
    }
}

/// Output of any of the SLAM variants.
#[derive(Debug, Clone)]
pub struct SlamResult {
    pub poses: Vec<Pose2>,
    /// Landmarks reported as objects.
    pub landmarks: BTreeMap<LandmarkId, Landmark>,
    /// Landmarks removed as likely false positives.
    pub pruned: BTreeMap<LandmarkId, Landmark>,
    /// Association of every used detection, pruned landmarks included.
    pub assoc: Association,
    /// Association sweeps performed, including the final one that changed nothing.
    pub iterations_run: usize,
    /// Landmark count after each sweep, before pruning.
    pub object_count_history: Vec<usize>,
    /// [`objective`] after each outer iteration.
    pub objective_history: Vec<f64>,
    pub solver_reports: Vec<SolveReport>,
    /// Whether a sweep left the association unchanged before the iteration cap.
    pub converged: bool,
    pub total_detections: usize,
}

impl SlamResult {
    pub fn used_detections(&self) -> usize {
        self.assoc.len()
    }

    /// Share of detections that ended up in the estimate, in `[0, 1]`.
    pub fn fraction_used(&self) -> f64 {
        if self.total_detections == 0 {
            1.0
        } else {
            self.used_detections() as f64 / self.total_detections as f64
        }
    }

    /// Landmark `key` was assigned to, if it survived pruning.
    pub fn object_of(&self, key: DetKey) -> Option<LandmarkId> {
        self.assoc.get(key).filter(|id| self.landmarks.contains_key(id))
    }
}

/// Log of the Chinese-restaurant-process probability of a partition with the
/// given block sizes.
pub fn log_crp(counts: &[usize], alpha: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let mut v = counts.len() as f64 * alpha.ln();
    for &m in counts {
        v += (1..m).map(|j| (j as f64).ln()).sum::<f64>();
    }
    v - (0..n).map(|i| (alpha + i as f64).ln()).sum::<f64>()
}

/// Joint log-likelihood plus the DP partition prior and one `rho_new` per landmark.
pub fn objective(graph: &PoseGraph<'_>, model: &DpModel) -> Result<f64> {
    let counts: Vec<usize> = graph.landmarks().values().map(|l| l.count).collect();
    Ok(joint_log_likelihood(graph, graph.association())?
        + log_crp(&counts, model.alpha)
        + counts.len() as f64 * model.rho_new)
}

/// One landmark per detection, placed at its dead-reckoned global position.
pub(crate) fn singleton_landmarks(
    dataset: &Dataset,
    poses: &[Pose2],
    model: &DpModel,
) -> Result<(BTreeMap<LandmarkId, Landmark>, Association)> {
    let mut landmarks = BTreeMap::new();
    let assoc = Association::from_pairs(dataset.detections.iter().enumerate().map(|(i, d)| {
        let id = LandmarkId(i);
        landmarks.insert(id, Landmark::new(id, poses[d.t].to_global(&d.z), model.beta0.clone()));
        (d.key(), id)
    }))?;
    let mut landmarks = landmarks;
    update_class_beliefs(&mut landmarks, &assoc, dataset, &model.beta0)?;
    Ok((landmarks, assoc))
}

/// Nonparametric pose-graph SLAM.
///
/// Starts from dead reckoning with one landmark per detection, then repeats
/// association sweep, belief update and joint optimization until a sweep
/// changes nothing or `max_outer_iterations` sweeps have run. Landmarks whose
/// false-positive probability exceeds `epsilon_fp` are pruned at the end.
pub fn run_np_slam(dataset: &Dataset, cfg: &RunConfig) -> Result<SlamResult> {
    cfg.validate()?;
    dataset.validate()?;
    let model = cfg.dp.resolve(dataset)?;

    let mut poses = dead_reckon(dataset);
    let (mut landmarks, mut assoc) = singleton_landmarks(dataset, &poses, &model)?;
    let mut history = Vec::new();
    let mut objectives = Vec::new();
    let mut reports = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;

    while iterations_run < cfg.max_outer_iterations {
        let sweep = reassign_all(dataset, &poses, &landmarks, &assoc, &model)?;
        iterations_run += 1;
        landmarks = sweep.landmarks;
        assoc = sweep.assoc;
        history.push(landmarks.len());
        update_class_beliefs(&mut landmarks, &assoc, dataset, &model.beta0)?;
        let graph = build_graph(dataset, assoc.clone(), poses.clone(), landmarks.values().cloned().collect())?;
        if sweep.changed == 0 {
            objectives.push(objective(&graph, &model)?);
            converged = true;
            break;
        }
        let solution = optimize(&graph, &cfg.solver)?;
        let mut graph = graph;
        graph.apply(solution.poses, &solution.landmarks);
        objectives.push(objective(&graph, &model)?);
        reports.push(solution.report);
        let (p, l, _) = graph.into_parts();
        poses = p;
        landmarks = l;
    }

    let (kept, pruned) = prune_false_positives(&landmarks, model.epsilon_fp);
    Ok(SlamResult {
        poses,
        landmarks: kept,
        pruned,
        assoc,
        iterations_run,
        object_count_history: history,
        objective_history: objectives,
        solver_reports: reports,
        converged,
        total_detections: dataset.detections.len(),
    })
}
