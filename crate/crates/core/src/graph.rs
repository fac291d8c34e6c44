//! Pose graph: poses, object landmarks, and the detection-to-landmark association.

use std::collections::BTreeMap;
use std::fmt;

use crate::association::ClassBelief;
use crate::error::{Error, Result};
use crate::models::{measurement_log_factor, odometry_log_factor, Dataset, DetKey};
use crate::se2::{Point2, Pose2};

/// Stable identifier of a landmark hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LandmarkId(pub usize);

impl fmt::Display for LandmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

/// An object hypothesis: position, class belief and number of associated detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    pub id: LandmarkId,
    pub position: Point2,
    pub belief: ClassBelief,
    pub count: usize,
}

impl Landmark {
    pub fn new(id: LandmarkId, position: Point2, belief: ClassBelief) -> Self {
        Self {
            id,
            position,
            belief,
            count: 0,
        }
    }
}

/// Map from detection key to landmark id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Association {
    map: BTreeMap<DetKey, LandmarkId>,
}

impl Association {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from pairs, rejecting a key that appears twice.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (DetKey, LandmarkId)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (key, id) in pairs {
            if map.insert(key, id).is_some() {
                return Err(Error::Consistency(format!(
                    "detection {key} associated more than once"
                )));
            }
        }
        Ok(Self { map })
    }

    /// Sets the association for `key`, returning the previous target.
    pub fn assign(&mut self, key: DetKey, id: LandmarkId) -> Option<LandmarkId> {
        self.map.insert(key, id)
    }

    pub fn remove(&mut self, key: DetKey) -> Option<LandmarkId> {
        self.map.remove(&key)
    }

    pub fn get(&self, key: DetKey) -> Option<LandmarkId> {
        self.map.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DetKey, LandmarkId)> + '_ {
        self.map.iter().map(|(k, v)| (*k, *v))
    }

    /// Number of detections pointing at each landmark.
    pub fn counts(&self) -> BTreeMap<LandmarkId, usize> {
        let mut out = BTreeMap::new();
        for id in self.map.values() {
            *out.entry(*id).or_insert(0) += 1;
        }
        out
    }

    /// Keys associated with `id`, in `(t, k)` order.
    pub fn members(&self, id: LandmarkId) -> Vec<DetKey> {
        self.map
            .iter()
            .filter(|(_, v)| **v == id)
            .map(|(k, _)| *k)
            .collect()
    }
}

/// Settings for the Levenberg-Marquardt solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub rel_decrease_tol: f64,
    pub abs_gradient_tol: f64,
    pub initial_lm_damping: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            rel_decrease_tol: 1e-8,
            abs_gradient_tol: 1e-10,
            initial_lm_damping: 1e-4,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0
            || !(self.rel_decrease_tol > 0.0)
            || !(self.abs_gradient_tol > 0.0)
            || !(self.initial_lm_damping > 0.0)
        {
            return Err(Error::Config(format!("solver settings must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Poses `X_0..X_T`, landmarks, and the association tying detections to them.
///
/// `X_0` is held fixed at its initial value (the gauge).
#[derive(Debug, Clone)]
pub struct PoseGraph<'a> {
    dataset: &'a Dataset,
    poses: Vec<Pose2>,
    landmarks: BTreeMap<LandmarkId, Landmark>,
    assoc: Association,
    gauge: Pose2,
}

/// Open-loop trajectory: `X_0` is the initial pose, each step composes the odometry.
pub fn dead_reckon(dataset: &Dataset) -> Vec<Pose2> {
    let mut poses = Vec::with_capacity(dataset.num_poses());
    let mut x = dataset.initial_pose;
    poses.push(x);
    for o in &dataset.odometry {
        x = x.compose(&o.delta);
        poses.push(x);
    }
    poses
}

/// Assembles a graph, checking that the association is complete and only targets
/// known landmarks. Landmark counts are recomputed from the association.
pub fn build_graph<'a>(
    dataset: &'a Dataset,
    assoc: Association,
    init_poses: Vec<Pose2>,
    init_landmarks: Vec<Landmark>,
) -> Result<PoseGraph<'a>> {
    if init_poses.len() != dataset.num_poses() {
        return Err(Error::Consistency(format!(
            "expected {} poses, got {}",
            dataset.num_poses(),
            init_poses.len()
        )));
    }
    let mut landmarks = BTreeMap::new();
    for mut lm in init_landmarks {
        lm.count = 0;
        if landmarks.insert(lm.id, lm).is_some() {
            return Err(Error::Consistency("duplicate landmark id".into()));
        }
    }
    for d in &dataset.detections {
        if assoc.get(d.key()).is_none() {
            return Err(Error::Consistency(format!(
                "detection {} has no association",
                d.key()
            )));
        }
    }
    if assoc.len() != dataset.detections.len() {
        return Err(Error::Consistency(
            "association refers to detections not in the dataset".into(),
        ));
    }
    for (key, id) in assoc.iter() {
        let lm = landmarks.get_mut(&id).ok_or_else(|| {
            Error::Consistency(format!("detection {key} associated to missing landmark {id}"))
        })?;
        lm.count += 1;
    }
    let gauge = init_poses[0];
    Ok(PoseGraph {
        dataset,
        poses: init_poses,
        landmarks,
        assoc,
        gauge,
    })
}

impl<'a> PoseGraph<'a> {
    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn poses(&self) -> &[Pose2] {
        &self.poses
    }

    pub fn landmarks(&self) -> &BTreeMap<LandmarkId, Landmark> {
        &self.landmarks
    }

    pub fn landmark(&self, id: LandmarkId) -> Option<&Landmark> {
        self.landmarks.get(&id)
    }

    pub fn association(&self) -> &Association {
        &self.assoc
    }

    pub fn gauge(&self) -> Pose2 {
        self.gauge
    }

    pub fn num_odometry_factors(&self) -> usize {
        self.dataset.odometry.len()
    }

    pub fn num_measurement_factors(&self) -> usize {
        self.assoc.len()
    }

    /// Replaces poses and landmark positions with a solver result.
    pub fn apply(&mut self, poses: Vec<Pose2>, positions: &BTreeMap<LandmarkId, Point2>) {
        assert_eq!(poses.len(), self.poses.len());
        self.poses = poses;
        for (id, p) in positions {
            if let Some(lm) = self.landmarks.get_mut(id) {
                lm.position = *p;
            }
        }
    }

    pub fn into_parts(self) -> (Vec<Pose2>, BTreeMap<LandmarkId, Landmark>, Association) {
        (self.poses, self.landmarks, self.assoc)
    }

    /// Sum of squared whitened residuals, `-2 x` the quadratic log factors.
    pub fn chi2(&self) -> Result<f64> {
        let mut total = 0.0;
        for o in &self.dataset.odometry {
            total += odometry_log_factor(o, &self.poses[o.t - 1], &self.poses[o.t])?;
        }
        for d in &self.dataset.detections {
            let id = self.assoc.get(d.key()).expect("association checked at build");
            let lm = &self.landmarks[&id];
            total += measurement_log_factor(d, &self.poses[d.t], &lm.position)?;
        }
        Ok(-2.0 * total)
    }
}

/// Free-function form of [`PoseGraph::chi2`].
pub fn chi2(graph: &PoseGraph<'_>) -> Result<f64> {
    graph.chi2()
}
