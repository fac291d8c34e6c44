//! Measurement types and Gaussian / categorical log-likelihoods.
//!
//! Factor values are `-1/2 r^T S^-1 r` with the Gaussian normalization constant
//! dropped. All existing-landmark comparisons share the same covariance so the
//! constant cancels; the new-landmark hypothesis carries its own explicit floor
//! (see [`crate::association::DpParams`]).

use std::fmt;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::association::ml_class;
use crate::error::{Error, Result};
use crate::graph::{Association, PoseGraph};
use crate::se2::{normalize_angle, Point2, Pose2};

/// Identifies a detection: frame `t` and 1-based index `k` within the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetKey {
    pub t: usize,
    pub k: usize,
}

impl DetKey {
    pub const fn new(t: usize, k: usize) -> Self {
        Self { t, k }
    }
}

impl fmt::Display for DetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}, k={})", self.t, self.k)
    }
}

/// Relative motion measured between `X_{t-1}` and `X_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Odometry {
    pub t: usize,
    pub delta: Pose2,
    pub cov: Matrix3<f64>,
}

impl Odometry {
    pub fn new(t: usize, delta: Pose2, cov: Matrix3<f64>) -> Self {
        Self { t, delta, cov }
    }

    /// Diagonal covariance from per-component standard deviations.
    pub fn with_sigmas(t: usize, delta: Pose2, sigma_xy: f64, sigma_theta: f64) -> Self {
        let cov = Matrix3::from_diagonal(&Vector3::new(
            sigma_xy * sigma_xy,
            sigma_xy * sigma_xy,
            sigma_theta * sigma_theta,
        ));
        Self::new(t, delta, cov)
    }
}

/// One object detection: a position in the robot frame plus an observed class.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub t: usize,
    pub k: usize,
    pub z: Point2,
    /// Observed class, `1..=N`.
    pub class: usize,
    pub cov: Matrix2<f64>,
}

impl Detection {
    pub fn new(t: usize, k: usize, z: Point2, class: usize, cov: Matrix2<f64>) -> Self {
        Self { t, k, z, class, cov }
    }

    pub fn with_sigma(t: usize, k: usize, z: Point2, class: usize, sigma: f64) -> Self {
        Self::new(t, k, z, class, Matrix2::identity() * (sigma * sigma))
    }

    pub fn key(&self) -> DetKey {
        DetKey::new(self.t, self.k)
    }
}

/// Odometry chain plus detections, ready for any of the estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub num_classes: usize,
    pub initial_pose: Pose2,
    /// Ordered by `t`, covering `1..=T` exactly once.
    pub odometry: Vec<Odometry>,
    /// Ordered by `(t, k)`.
    pub detections: Vec<Detection>,
}

impl Default for Dataset {
    fn default() -> Self {
        Self {
            num_classes: 0,
            initial_pose: Pose2::identity(),
            odometry: Vec::new(),
            detections: Vec::new(),
        }
    }
}

impl Dataset {
    /// Builds a dataset, sorting detections by key and validating every invariant.
    pub fn new(
        num_classes: usize,
        initial_pose: Pose2,
        odometry: Vec<Odometry>,
        mut detections: Vec<Detection>,
    ) -> Result<Self> {
        detections.sort_by_key(|d| d.key());
        let ds = Self {
            num_classes,
            initial_pose,
            odometry,
            detections,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Number of odometry steps `T`; poses are `X_0..=X_T`.
    pub fn num_steps(&self) -> usize {
        self.odometry.len()
    }

    pub fn num_poses(&self) -> usize {
        self.odometry.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        for (i, o) in self.odometry.iter().enumerate() {
            if o.t != i + 1 {
                return Err(Error::Validation(format!(
                    "odometry not contiguous: expected t={}, found t={}",
                    i + 1,
                    o.t
                )));
            }
            information3(&o.cov)
                .map_err(|e| Error::Validation(format!("odometry t={}: {e}", o.t)))?;
        }
        let t_max = self.num_steps();
        let mut prev: Option<DetKey> = None;
        for d in &self.detections {
            let key = d.key();
            if d.t > t_max {
                return Err(Error::Validation(format!(
                    "detection {key} refers to a frame beyond T={t_max}"
                )));
            }
            if d.k == 0 {
                return Err(Error::Validation(format!("detection {key}: k is 1-based")));
            }
            if d.class == 0 || d.class > self.num_classes {
                return Err(Error::Validation(format!(
                    "detection {key}: class {} outside 1..={}",
                    d.class, self.num_classes
                )));
            }
            if !d.z.is_finite() {
                return Err(Error::Validation(format!("detection {key}: non-finite position")));
            }
            information2(&d.cov).map_err(|e| Error::Validation(format!("detection {key}: {e}")))?;
            match prev {
                Some(p) if p == key => {
                    return Err(Error::Validation(format!("duplicate detection key {key}")))
                }
                Some(p) if p > key => {
                    return Err(Error::Validation(format!(
                        "detections out of order at {key}"
                    )))
                }
                _ => {}
            }
            prev = Some(key);
        }
        Ok(())
    }

    /// Index of the detection with the given key.
    pub fn detection_index(&self, key: DetKey) -> Option<usize> {
        self.detections.binary_search_by_key(&key, |d| d.key()).ok()
    }
}

fn check_symmetric<const D: usize>(m: &nalgebra::SMatrix<f64, D, D>) -> Result<()> {
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-12 * scale || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model("covariance is not symmetric".into()));
    }
    Ok(())
}

/// Inverse of a 2x2 covariance, rejecting anything not symmetric positive definite.
pub fn information2(cov: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    check_symmetric(cov)?;
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Model("covariance is not positive definite".into()))?;
    Ok(chol.inverse())
}

pub fn information3(cov: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    check_symmetric(cov)?;
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Model("covariance is not positive definite".into()))?;
    Ok(chol.inverse())
}

/// Odometry residual `between(xa, xb) - delta` with the heading wrapped.
pub fn odometry_residual(o: &Odometry, xa: &Pose2, xb: &Pose2) -> Vector3<f64> {
    let pred = xa.between(xb);
    Vector3::new(
        pred.x - o.delta.x,
        pred.y - o.delta.y,
        normalize_angle(pred.theta - o.delta.theta),
    )
}

pub fn measurement_residual(d: &Detection, x: &Pose2, landmark: &Point2) -> Vector2<f64> {
    let pred = x.to_local(landmark);
    Vector2::new(pred.x - d.z.x, pred.y - d.z.y)
}

pub fn odometry_log_factor(o: &Odometry, xa: &Pose2, xb: &Pose2) -> Result<f64> {
    let info = information3(&o.cov)?;
    let r = odometry_residual(o, xa, xb);
    Ok(-0.5 * r.dot(&(info * r)))
}

pub fn measurement_log_factor(d: &Detection, x: &Pose2, landmark: &Point2) -> Result<f64> {
    let info = information2(&d.cov)?;
    let r = measurement_residual(d, x, landmark);
    Ok(-0.5 * r.dot(&(info * r)))
}

/// `log pi(u)` for an observed class `u`; slot 0 (false positive) is never observable.
pub fn class_log_likelihood(u: usize, pi: &[f64]) -> Result<f64> {
    let n = pi.len().saturating_sub(1);
    if u == 0 || u > n {
        return Err(Error::Domain(format!(
            "observed class {u} outside 1..={n}; slot 0 cannot be observed"
        )));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-9 || pi.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Domain(format!(
            "class distribution is not normalized (sum {total})"
        )));
    }
    // ln(0) is -inf, which is the intended sentinel for an impossible observation.
    Ok(pi[u].ln())
}

/// Odometry factors + measurement factors + class log-likelihoods under `assoc`.
///
/// Class terms use the normalized belief of each associated landmark.
pub fn joint_log_likelihood(graph: &PoseGraph<'_>, assoc: &Association) -> Result<f64> {
    let ds = graph.dataset();
    let poses = graph.poses();
    let mut total = 0.0;
    for o in &ds.odometry {
        total += odometry_log_factor(o, &poses[o.t - 1], &poses[o.t])?;
    }
    for d in &ds.detections {
        let key = d.key();
        let id = assoc
            .get(key)
            .ok_or_else(|| Error::Consistency(format!("detection {key} has no association")))?;
        let lm = graph.landmark(id).ok_or_else(|| {
            Error::Consistency(format!("detection {key} associated to missing landmark {id}"))
        })?;
        total += measurement_log_factor(d, &poses[d.t], &lm.position)?;
        total += class_log_likelihood(d.class, &ml_class(&lm.belief))?;
    }
    Ok(total)
}
