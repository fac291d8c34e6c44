//! Dirichlet-process data association.
//!
//! Each landmark carries a Dirichlet belief over `N` classes plus a slot 0 for
//! "this landmark is a false positive". Detections are assigned one at a time
//! to the landmark maximizing
//!
//! ```text
//! log DP(i) + log pi_i(u) - 1/2 |to_local(X_t, L_i) - z|^2_R
//! ```
//!
//! or to a fresh landmark, whose position term is the constant log-density
//! floor `rho_new`. With small noise this is the hard-assignment (DP-means)
//! limit of Gibbs sampling for a DP mixture.

use std::collections::BTreeMap;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::graph::{dead_reckon, Association, Landmark, LandmarkId};
use crate::models::{
    class_log_likelihood, information2, measurement_log_factor, Dataset, Detection,
};
use crate::se2::{Point2, Pose2};

/// Dirichlet parameters over `[false positive, class 1, .., class N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBelief {
    beta: Vec<f64>,
}

impl ClassBelief {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() || beta.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(Error::Domain(format!(
                "Dirichlet parameters must be positive and finite: {beta:?}"
            )));
        }
        Ok(Self { beta })
    }

    /// All-ones parameters for `num_classes` classes.
    pub fn uniform(num_classes: usize) -> Self {
        Self {
            beta: vec![1.0; num_classes + 1],
        }
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn num_classes(&self) -> usize {
        self.beta.len() - 1
    }

    /// Posterior after observing `class` once.
    pub fn observe(&mut self, class: usize) {
        assert!(class >= 1 && class < self.beta.len(), "class {class} out of range");
        self.beta[class] += 1.0;
    }

    /// Class with the largest parameter, ignoring the false-positive slot.
    pub fn most_likely_class(&self) -> usize {
        let mut best = 1;
        for j in 2..self.beta.len() {
            if self.beta[j] > self.beta[best] {
                best = j;
            }
        }
        best
    }
}

/// Normalized belief `pi(j) = beta(j) / sum(beta)`.
pub fn ml_class(belief: &ClassBelief) -> Vec<f64> {
    let total: f64 = belief.beta.iter().sum();
    belief.beta.iter().map(|b| b / total).collect()
}

/// User-facing association parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DpParams {
    /// Concentration of the DP prior.
    pub alpha: f64,
    /// Prior class belief; all ones when unset.
    pub beta0: Option<ClassBelief>,
    /// Landmarks with `pi(0)` above this are pruned.
    pub epsilon_fp: f64,
    /// Explicit log-density floor for the new-landmark hypothesis.
    pub rho_new: Option<f64>,
    /// Area used for `rho_new = -ln(area)` when `rho_new` is unset. Defaults to
    /// the dead-reckoned detection bounding box, inflated by 1.5.
    pub workspace_area: Option<f64>,
}

impl Default for DpParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta0: None,
            epsilon_fp: 0.02,
            rho_new: None,
            workspace_area: None,
        }
    }
}

/// Smallest workspace area used for the default floor, in m².
const MIN_WORKSPACE_AREA: f64 = 1.0;

impl DpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.epsilon_fp > 0.0 && self.epsilon_fp <= 1.0) {
            return Err(Error::Config(format!(
                "epsilon_fp must lie in (0, 1], got {}",
                self.epsilon_fp
            )));
        }
        if let Some(a) = self.workspace_area {
            if !(a > 0.0) {
                return Err(Error::Config(format!("workspace_area must be positive, got {a}")));
            }
        }
        if let Some(r) = self.rho_new {
            if !r.is_finite() {
                return Err(Error::Config("rho_new must be finite".into()));
            }
        }
        Ok(())
    }

    /// Fixes defaults that depend on the data.
    pub fn resolve(&self, dataset: &Dataset) -> Result<DpModel> {
        self.validate()?;
        let beta0 = match &self.beta0 {
            Some(b) if b.num_classes() != dataset.num_classes => {
                return Err(Error::Config(format!(
                    "beta0 covers {} classes, dataset has {}",
                    b.num_classes(),
                    dataset.num_classes
                )))
            }
            Some(b) => b.clone(),
            None => ClassBelief::uniform(dataset.num_classes),
        };
        let rho_new = match (self.rho_new, self.workspace_area) {
            (Some(r), _) => r,
            (None, Some(area)) => -area.ln(),
            (None, None) => -default_workspace_area(dataset).ln(),
        };
        Ok(DpModel {
            alpha: self.alpha,
            beta0,
            epsilon_fp: self.epsilon_fp,
            rho_new,
        })
    }
}

/// Bounding box of the dead-reckoned detections, times 1.5.
pub fn default_workspace_area(dataset: &Dataset) -> f64 {
    let poses = dead_reckon(dataset);
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for d in &dataset.detections {
        let g = poses[d.t].to_global(&d.z);
        lo = Point2::new(lo.x.min(g.x), lo.y.min(g.y));
        hi = Point2::new(hi.x.max(g.x), hi.y.max(g.y));
    }
    let area = if dataset.detections.is_empty() {
        0.0
    } else {
        (hi.x - lo.x) * (hi.y - lo.y) * 1.5
    };
    area.max(MIN_WORKSPACE_AREA)
}

/// Association parameters with data-dependent defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct DpModel {
    pub alpha: f64,
    pub beta0: ClassBelief,
    pub epsilon_fp: f64,
    pub rho_new: f64,
}

/// DP prior over `M` existing objects plus one new object (last entry).
pub fn dp_prior(counts: &[usize], alpha: f64) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    let denom = total as f64 + alpha;
    counts
        .iter()
        .map(|&m| m as f64 / denom)
        .chain(std::iter::once(alpha / denom))
        .collect()
}

/// Log-scores for assigning `d` (seen from `pose`) to each landmark in order, then
/// to a new landmark (last entry). Landmarks with zero count score `-inf`.
pub fn posterior_over_objects(
    d: &Detection,
    pose: &Pose2,
    landmarks: &[Landmark],
    model: &DpModel,
) -> Result<Vec<f64>> {
    let counts: Vec<usize> = landmarks.iter().map(|l| l.count).collect();
    let prior = dp_prior(&counts, model.alpha);
    let mut scores = Vec::with_capacity(landmarks.len() + 1);
    for (lm, p) in landmarks.iter().zip(&prior) {
        if lm.count == 0 {
            scores.push(f64::NEG_INFINITY);
            continue;
        }
        let class = class_log_likelihood(d.class, &ml_class(&lm.belief))?;
        let pos = measurement_log_factor(d, pose, &lm.position)?;
        scores.push(p.ln() + class + pos);
    }
    let class_new = class_log_likelihood(d.class, &ml_class(&model.beta0))?;
    scores.push(prior[landmarks.len()].ln() + class_new + model.rho_new);
    Ok(scores)
}

/// Index of the largest score; the first wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Outcome of one association sweep.
#[derive(Debug, Clone)]
pub struct Reassignment {
    pub assoc: Association,
    /// Surviving landmarks with compacted ids `0..M`, positions at their running means.
    pub landmarks: BTreeMap<LandmarkId, Landmark>,
    /// Detections whose landmark differs from the input association.
    pub changed: usize,
}

struct Slot {
    id: LandmarkId,
    position: Point2,
    count: usize,
    belief: ClassBelief,
    log_pi: Vec<f64>,
}

impl Slot {
    fn remove(&mut self, g: &Point2) {
        let m = self.count as f64;
        if self.count > 1 {
            self.position = Point2::new(
                (self.position.x * m - g.x) / (m - 1.0),
                (self.position.y * m - g.y) / (m - 1.0),
            );
        }
        self.count -= 1;
    }

    fn add(&mut self, g: &Point2) {
        let m = self.count as f64;
        self.position = Point2::new(
            (self.position.x * m + g.x) / (m + 1.0),
            (self.position.y * m + g.y) / (m + 1.0),
        );
        self.count += 1;
    }
}

fn log_pi(belief: &ClassBelief) -> Vec<f64> {
    ml_class(belief).into_iter().map(f64::ln).collect()
}

fn mahalanobis_half(info: &Matrix2<f64>, pose: &Pose2, landmark: &Point2, z: &Point2) -> f64 {
    let p = pose.to_local(landmark);
    let r = nalgebra::Vector2::new(p.x - z.x, p.y - z.y);
    0.5 * r.dot(&(info * r))
}

/// One sequential maximum-likelihood association sweep with poses held fixed.
///
/// Detections are visited in `(t, k)` order. Each is removed from its current
/// landmark, scored against every landmark still holding detections and
/// against a new landmark, and moved to the best (lowest id on ties, existing
/// before new). Counts and running means update immediately; class beliefs do
/// not. Emptied landmarks are dropped and ids compacted at the end.
pub fn reassign_all(
    dataset: &Dataset,
    poses: &[Pose2],
    landmarks: &BTreeMap<LandmarkId, Landmark>,
    assoc: &Association,
    model: &DpModel,
) -> Result<Reassignment> {
    if poses.len() != dataset.num_poses() {
        return Err(Error::Consistency(format!(
            "expected {} poses, got {}",
            dataset.num_poses(),
            poses.len()
        )));
    }
    let mut slots: Vec<Slot> = landmarks
        .values()
        .map(|l| Slot {
            id: l.id,
            position: l.position,
            count: 0,
            belief: l.belief.clone(),
            log_pi: log_pi(&l.belief),
        })
        .collect();
    let slot_of: BTreeMap<LandmarkId, usize> =
        slots.iter().enumerate().map(|(i, s)| (s.id, i)).collect();

    let mut current = Vec::with_capacity(dataset.detections.len());
    for d in &dataset.detections {
        let id = assoc
            .get(d.key())
            .ok_or_else(|| Error::Consistency(format!("detection {} has no association", d.key())))?;
        let slot = *slot_of.get(&id).ok_or_else(|| {
            Error::Consistency(format!("detection {} associated to missing landmark {id}", d.key()))
        })?;
        slots[slot].count += 1;
        current.push(slot);
    }
    let infos = dataset
        .detections
        .iter()
        .map(|d| information2(&d.cov))
        .collect::<Result<Vec<_>>>()?;

    let beta0_log_pi = log_pi(&model.beta0);
    let total = dataset.detections.len();
    let mut next_id = landmarks.keys().next_back().map_or(0, |id| id.0 + 1);
    let mut changed = 0;

    for (n, d) in dataset.detections.iter().enumerate() {
        let pose = &poses[d.t];
        let g = pose.to_global(&d.z);
        let from = current[n];
        slots[from].remove(&g);

        // The DP normalizer sum(m) + alpha is shared by every option.
        let log_denom = ((total - 1) as f64 + model.alpha).ln();
        let mut best: Option<usize> = None;
        let mut best_score = f64::NEG_INFINITY;
        for (i, s) in slots.iter().enumerate() {
            if s.count == 0 {
                continue;
            }
            let score = (s.count as f64).ln() - log_denom + s.log_pi[d.class]
                - mahalanobis_half(&infos[n], pose, &s.position, &d.z);
            if score > best_score {
                best_score = score;
                best = Some(i);
            }
        }
        let new_score = model.alpha.ln() - log_denom + beta0_log_pi[d.class] + model.rho_new;
        let to = match best {
            Some(i) if new_score <= best_score => i,
            _ if slots[from].count == 0 => from,
            _ => {
                slots.push(Slot {
                    id: LandmarkId(next_id),
                    position: g,
                    count: 0,
                    belief: model.beta0.clone(),
                    log_pi: beta0_log_pi.clone(),
                });
                next_id += 1;
                slots.len() - 1
            }
        };
        if to == from && slots[from].count == 0 {
            slots[from].position = g;
        }
        slots[to].add(&g);
        if to != from {
            changed += 1;
        }
        current[n] = to;
    }

    let mut compact = vec![None; slots.len()];
    let mut out_landmarks = BTreeMap::new();
    for (i, s) in slots.iter().enumerate() {
        if s.count == 0 {
            continue;
        }
        let id = LandmarkId(out_landmarks.len());
        compact[i] = Some(id);
        out_landmarks.insert(
            id,
            Landmark {
                id,
                position: s.position,
                belief: s.belief.clone(),
                count: s.count,
            },
        );
    }
    let assoc = Association::from_pairs(
        dataset
            .detections
            .iter()
            .zip(&current)
            .map(|(d, &slot)| (d.key(), compact[slot].expect("assigned slot is non-empty"))),
    )?;
    Ok(Reassignment {
        assoc,
        landmarks: out_landmarks,
        changed,
    })
}

/// Recomputes every landmark's belief as `beta0` plus its associated class counts,
/// and its detection count. Slot 0 never receives observation mass.
pub fn update_class_beliefs(
    landmarks: &mut BTreeMap<LandmarkId, Landmark>,
    assoc: &Association,
    dataset: &Dataset,
    beta0: &ClassBelief,
) -> Result<()> {
    for lm in landmarks.values_mut() {
        lm.belief = beta0.clone();
        lm.count = 0;
    }
    for d in &dataset.detections {
        let key = d.key();
        let id = assoc
            .get(key)
            .ok_or_else(|| Error::Consistency(format!("detection {key} has no association")))?;
        let lm = landmarks.get_mut(&id).ok_or_else(|| {
            Error::Consistency(format!("detection {key} associated to missing landmark {id}"))
        })?;
        if d.class == 0 || d.class > lm.belief.num_classes() {
            return Err(Error::Domain(format!("detection {key} has class {}", d.class)));
        }
        lm.belief.observe(d.class);
        lm.count += 1;
    }
    Ok(())
}

/// Splits landmarks into (retained, pruned) by `pi(0) > epsilon_fp`.
pub fn prune_false_positives(
    landmarks: &BTreeMap<LandmarkId, Landmark>,
    epsilon_fp: f64,
) -> (BTreeMap<LandmarkId, Landmark>, BTreeMap<LandmarkId, Landmark>) {
    landmarks
        .iter()
        .map(|(id, l)| (*id, l.clone()))
        .partition(|(_, l)| ml_class(&l.belief)[0] <= epsilon_fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DetKey, Odometry};
    use approx::assert_abs_diff_eq;

    fn model(alpha: f64, n: usize, rho_new: f64) -> DpModel {
        DpModel {
            alpha,
            beta0: ClassBelief::uniform(n),
            epsilon_fp: 0.02,
            rho_new,
        }
    }

    fn lm(id: usize, x: f64, y: f64, beta: Vec<f64>, count: usize) -> Landmark {
        Landmark {
            id: LandmarkId(id),
            position: Point2::new(x, y),
            belief: ClassBelief::new(beta).unwrap(),
            count,
        }
    }

    #[test]
    fn dp_prior_examples() {
        assert_eq!(dp_prior(&[], 2.5), vec![1.0]);
        let p = dp_prior(&[3, 2], 1.0);
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 1.0 / 6.0, epsilon = 1e-15);
        let p = dp_prior(&[5, 0], 1.0);
        assert_abs_diff_eq!(p[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_eq!(p[1], 0.0);
        assert_abs_diff_eq!(p[2], 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn ml_class_examples() {
        let pi = ml_class(&ClassBelief::new(vec![1.0, 3.0, 1.0]).unwrap());
        assert_abs_diff_eq!(pi[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(pi[1], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(pi[2], 0.2, epsilon = 1e-15);
        let pi = ml_class(&ClassBelief::uniform(4));
        assert!(pi.iter().all(|p| (p - 0.2).abs() < 1e-15));
        let pi = ml_class(&ClassBelief::new(vec![1.0, 31.0, 1.0]).unwrap());
        assert_abs_diff_eq!(pi[0], 1.0 / 33.0, epsilon = 1e-15);
        assert!(pi[0] < 0.05);
    }

    #[test]
    fn belief_rejects_nonpositive() {
        assert!(ClassBelief::new(vec![1.0, 0.0]).is_err());
        assert!(ClassBelief::new(vec![]).is_err());
    }

    #[test]
    fn posterior_prefers_matching_landmark() {
        let d = Detection::with_sigma(0, 1, Point2::new(2.0, 0.0), 1, 0.1);
        let lms = [lm(0, 2.0, 0.0, vec![1.0, 50.0, 1.0], 49)];
        let s = posterior_over_objects(&d, &Pose2::identity(), &lms, &model(1.0, 2, -5.0)).unwrap();
        assert_eq!(argmax(&s), 0);

        let far = Detection::with_sigma(0, 1, Point2::new(102.0, 0.0), 1, 0.1);
        let s = posterior_over_objects(&far, &Pose2::identity(), &lms, &model(1.0, 2, -5.0)).unwrap();
        assert_eq!(argmax(&s), 1);
    }

    #[test]
    fn posterior_hand_computed_difference() {
        // Landmark 1 sits 0.1 m off along x (term -0.5), landmark 2 sits 0.2 m off (-2.0);
        // both have the detection's class with identical beliefs.
        let d = Detection::with_sigma(0, 1, Point2::new(2.0, 0.0), 1, 0.1);
        let belief = vec![1.0, 5.0, 1.0];
        let lms = [
            lm(0, 2.1, 0.0, belief.clone(), 3),
            lm(1, 2.0, 0.2, belief, 2),
        ];
        let s = posterior_over_objects(&d, &Pose2::identity(), &lms, &model(1.0, 2, -5.0)).unwrap();
        let expected = (0.5f64.ln() - 0.5) - ((1.0f64 / 3.0).ln() - 2.0);
        assert_abs_diff_eq!(s[0] - s[1], expected, epsilon = 1e-9);
        assert_eq!(argmax(&s), 0);
    }

    #[test]
    fn zero_count_landmark_is_impossible() {
        let d = Detection::with_sigma(0, 1, Point2::new(2.0, 0.0), 1, 0.1);
        let lms = [lm(0, 2.0, 0.0, vec![1.0, 1.0], 0)];
        let s = posterior_over_objects(&d, &Pose2::identity(), &lms, &model(1.0, 1, -5.0)).unwrap();
        assert_eq!(s[0], f64::NEG_INFINITY);
        assert_eq!(argmax(&s), 1);
    }

    fn tiny_dataset(dets: Vec<Detection>) -> Dataset {
        let odo = vec![Odometry::with_sigmas(1, Pose2::identity(), 0.02, 0.02)];
        Dataset::new(2, Pose2::identity(), odo, dets).unwrap()
    }

    fn singletons(ds: &Dataset, beta0: &ClassBelief) -> (BTreeMap<LandmarkId, Landmark>, Association) {
        let poses = dead_reckon(ds);
        let mut lms = BTreeMap::new();
        let mut assoc = Association::new();
        for (i, d) in ds.detections.iter().enumerate() {
            let id = LandmarkId(i);
            lms.insert(id, Landmark { id, position: poses[d.t].to_global(&d.z), belief: beta0.clone(), count: 1 });
            assoc.assign(d.key(), id);
        }
        (lms, assoc)
    }

    #[test]
    fn close_detections_merge() {
        // Two same-class detections 1 cm apart. Hand evaluation with alpha = 0.1, sigma 0.1,
        // rho_new = -5: the first detection (own singleton emptied) compares
        //   join:  ln(1) + ln(1/3) - 0.5 * (0.01 / 0.1)^2 = -1.1036
        //   new:   ln(0.1) + ln(1/3) - 5                 = -8.4012
        // and joins the second; the second then stays with the merged landmark.
        let ds = tiny_dataset(vec![
            Detection::with_sigma(0, 1, Point2::new(1.0, 0.0), 1, 0.1),
            Detection::with_sigma(1, 1, Point2::new(1.01, 0.0), 1, 0.1),
        ]);
        let m = model(0.1, 2, -5.0);
        let (lms, assoc) = singletons(&ds, &m.beta0);
        let out = reassign_all(&ds, &dead_reckon(&ds), &lms, &assoc, &m).unwrap();
        assert_eq!(out.landmarks.len(), 1);
        assert_eq!(out.changed, 1);
        let l = &out.landmarks[&LandmarkId(0)];
        assert_eq!(l.count, 2);
        assert_abs_diff_eq!(l.position.x, 1.005, epsilon = 1e-12);
    }

    #[test]
    fn far_detections_stay_apart_and_fixed_point_is_stable() {
        let ds = tiny_dataset(vec![
            Detection::with_sigma(0, 1, Point2::new(1.0, 0.0), 1, 0.1),
            Detection::with_sigma(0, 2, Point2::new(1.0, 3.0), 2, 0.1),
            Detection::with_sigma(1, 1, Point2::new(1.02, 0.0), 1, 0.1),
            Detection::with_sigma(1, 2, Point2::new(1.0, 3.03), 2, 0.1),
        ]);
        let m = model(1.0, 2, -5.0);
        let (lms, assoc) = singletons(&ds, &m.beta0);
        let first = reassign_all(&ds, &dead_reckon(&ds), &lms, &assoc, &m).unwrap();
        assert_eq!(first.landmarks.len(), 2);
        let again = reassign_all(&ds, &dead_reckon(&ds), &first.landmarks, &first.assoc, &m).unwrap();
        assert_eq!(again.changed, 0);
        assert_eq!(again.assoc, first.assoc);
        assert_eq!(again.landmarks.len(), 2);
        assert!(again.landmarks.values().all(|l| l.count > 0));
    }

    #[test]
    fn lone_singleton_keeps_its_landmark() {
        let ds = tiny_dataset(vec![Detection::with_sigma(0, 1, Point2::new(1.0, 0.0), 1, 0.1)]);
        let m = model(1.0, 2, -5.0);
        let (lms, assoc) = singletons(&ds, &m.beta0);
        let out = reassign_all(&ds, &dead_reckon(&ds), &lms, &assoc, &m).unwrap();
        assert_eq!(out.changed, 0);
        assert_eq!(out.landmarks.len(), 1);
    }

    #[test]
    fn class_belief_update() {
        let dets = vec![
            Detection::with_sigma(0, 1, Point2::new(1.0, 0.0), 2, 0.1),
            Detection::with_sigma(0, 2, Point2::new(1.0, 0.0), 2, 0.1),
            Detection::with_sigma(1, 1, Point2::new(1.0, 0.0), 2, 0.1),
            Detection::with_sigma(1, 2, Point2::new(1.0, 0.0), 3, 0.1),
        ];
        let odo = vec![Odometry::with_sigmas(1, Pose2::identity(), 0.02, 0.02)];
        let ds = Dataset::new(3, Pose2::identity(), odo, dets).unwrap();
        let beta0 = ClassBelief::uniform(3);
        let mut lms = BTreeMap::new();
        for id in [LandmarkId(0), LandmarkId(1)] {
            lms.insert(id, Landmark::new(id, Point2::origin(), beta0.clone()));
        }
        let assoc = Association::from_pairs(ds.detections.iter().map(|d| (d.key(), LandmarkId(0)))).unwrap();
        update_class_beliefs(&mut lms, &assoc, &ds, &beta0).unwrap();
        assert_eq!(lms[&LandmarkId(0)].belief.beta(), &[1.0, 1.0, 4.0, 2.0]);
        assert_eq!(lms[&LandmarkId(0)].count, 4);
        assert_eq!(lms[&LandmarkId(1)].belief, beta0);
        let snapshot = lms.clone();
        update_class_beliefs(&mut lms, &assoc, &ds, &beta0).unwrap();
        assert_eq!(lms, snapshot);

        let dangling = Association::from_pairs([(DetKey::new(0, 1), LandmarkId(7))]).unwrap();
        assert!(update_class_beliefs(&mut lms, &dangling, &ds, &beta0).is_err());
    }

    #[test]
    fn pruning_thresholds() {
        let beta0 = ClassBelief::uniform(5);
        let mut single = beta0.clone();
        single.observe(3);
        let mut many = beta0.clone();
        for _ in 0..60 {
            many.observe(1);
        }
        assert_abs_diff_eq!(ml_class(&single)[0], 1.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ml_class(&many)[0], 1.0 / 66.0, epsilon = 1e-15);
        let mut lms = BTreeMap::new();
        lms.insert(LandmarkId(3), Landmark { id: LandmarkId(3), position: Point2::origin(), belief: single, count: 1 });
        lms.insert(LandmarkId(8), Landmark { id: LandmarkId(8), position: Point2::origin(), belief: many, count: 60 });
        let (kept, pruned) = prune_false_positives(&lms, 0.02);
        assert_eq!(kept.keys().copied().collect::<Vec<_>>(), vec![LandmarkId(8)]);
        assert_eq!(pruned.keys().copied().collect::<Vec<_>>(), vec![LandmarkId(3)]);
        let (kept, pruned) = prune_false_positives(&lms, 1.0);
        assert_eq!(kept.len(), 2);
        assert!(pruned.is_empty());
    }

    #[test]
    fn params_resolution() {
        let odo = vec![Odometry::with_sigmas(1, Pose2::identity(), 0.02, 0.02)];
        let dets = vec![
            Detection::with_sigma(0, 1, Point2::new(0.0, 0.0), 1, 0.1),
            Detection::with_sigma(0, 2, Point2::new(4.0, 2.0), 1, 0.1),
        ];
        let ds = Dataset::new(1, Pose2::identity(), odo, dets).unwrap();
        let m = DpParams::default().resolve(&ds).unwrap();
        assert_abs_diff_eq!(m.rho_new, -(4.0f64 * 2.0 * 1.5).ln(), epsilon = 1e-12);
        assert_eq!(m.beta0, ClassBelief::uniform(1));
        let m = DpParams { workspace_area: Some(100.0), ..Default::default() }.resolve(&ds).unwrap();
        assert_abs_diff_eq!(m.rho_new, -(100.0f64).ln(), epsilon = 1e-12);
        assert!(DpParams { alpha: 0.0, ..Default::default() }.validate().is_err());
        assert!(DpParams { epsilon_fp: 0.0, ..Default::default() }.validate().is_err());
    }
}
