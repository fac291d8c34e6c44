//! Evaluation against ground truth.
//!
//! Trajectories are compared pose by pose without alignment; every estimator
//! fixes `X_0` at the true start pose. Estimated landmarks are matched to true
//! objects by a minimum-distance assignment that forbids class mismatches.

use crate::error::{Error, Result};
use crate::graph::LandmarkId;
use crate::se2::{Point2, Pose2};
use crate::sim::{GroundTruth, WorldObject};
use crate::slam::SlamResult;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryErrors {
    /// Euclidean position error of each pose.
    pub per_pose: Vec<f64>,
    pub mean: f64,
    pub cumulative: f64,
}

pub fn trajectory_errors(estimate: &[Pose2], truth: &[Pose2]) -> Result<TrajectoryErrors> {
    if estimate.len() != truth.len() || truth.is_empty() {
        return Err(Error::Consistency(format!(
            "trajectory lengths differ or are empty: {} vs {}",
            estimate.len(),
            truth.len()
        )));
    }
    let per_pose: Vec<f64> = estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| e.position().distance(&t.position()))
        .collect();
    let cumulative: f64 = per_pose.iter().sum();
    Ok(TrajectoryErrors {
        mean: cumulative / per_pose.len() as f64,
        cumulative,
        per_pose,
    })
}

/// Minimum-cost assignment on a rectangular cost matrix. Infinite entries are
/// forbidden. Returns, for each row, its column if assigned.
///
/// Shortest augmenting paths with row/column potentials, `O(n^2 m)`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    if rows > cols {
        let transposed: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| cost[i][j]).collect()).collect();
        let by_col = min_cost_assignment(&transposed);
        let mut out = vec![None; rows];
        for (j, i) in by_col.into_iter().enumerate() {
            if let Some(i) = i {
                out[i] = Some(j);
            }
        }
        return out;
    }
    // Forbidden pairs get a cost larger than any feasible total.
    let finite_max = cost.iter().flatten().filter(|c| c.is_finite()).fold(0.0f64, |a, c| a.max(c.abs()));
    let big = (finite_max + 1.0) * (rows as f64 + 1.0) * 4.0;
    let c = |i: usize, j: usize| if cost[i][j].is_finite() { cost[i][j] } else { big };

    // 1-based arrays; column 0 is a virtual start.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; rows];
    for j in 1..=cols {
        if owner[j] != 0 && cost[owner[j] - 1][j - 1].is_finite() {
            out[owner[j] - 1] = Some(j - 1);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectErrors {
    /// Number of estimated objects.
    pub count: usize,
    /// `(estimate index, true object index, distance)`.
    pub matches: Vec<(usize, usize, f64)>,
    /// Mean distance over matched pairs; NaN when nothing matched.
    pub mean_error: f64,
}

/// Matches estimated `(position, class)` pairs to true objects of the same class.
pub fn object_errors(estimates: &[(Point2, usize)], truth: &[WorldObject]) -> ObjectErrors {
    let cost: Vec<Vec<f64>> = estimates
        .iter()
        .map(|(p, class)| {
            truth
                .iter()
                .map(|o| if o.class == *class { p.distance(&o.position) } else { f64::INFINITY })
                .collect()
        })
        .collect();
    let matches: Vec<(usize, usize, f64)> = min_cost_assignment(&cost)
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j, cost[i][j])))
        .collect();
    let mean_error = if matches.is_empty() {
        f64::NAN
    } else {
        matches.iter().map(|m| m.2).sum::<f64>() / matches.len() as f64
    };
    ObjectErrors { count: estimates.len(), matches, mean_error }
}

/// Summary of one estimate against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub num_objects: usize,
    pub mean_object_error: f64,
    pub mean_pose_error: f64,
    pub cumulative_pose_error: f64,
    pub fraction_used: f64,
    /// Share of real detections assigned to the reported object matched to their source.
    pub association_accuracy: f64,
    pub per_pose_error: Vec<f64>,
    /// Matched true object index per reported landmark.
    pub landmark_matches: Vec<(LandmarkId, Option<usize>)>,
}

pub fn evaluate(result: &SlamResult, truth: &GroundTruth) -> Result<Evaluation> {
    let traj = trajectory_errors(&result.poses, &truth.poses)?;
    let ids: Vec<LandmarkId> = result.landmarks.keys().copied().collect();
    let estimates: Vec<(Point2, usize)> = result
        .landmarks
        .values()
        .map(|l| (l.position, l.belief.most_likely_class()))
        .collect();
    let objects = object_errors(&estimates, &truth.objects);
    let mut matched = vec![None; ids.len()];
    for &(i, j, _) in &objects.matches {
        matched[i] = Some(j);
    }
    let landmark_matches: Vec<(LandmarkId, Option<usize>)> = ids.iter().copied().zip(matched).collect();

    let mut real = 0usize;
    let mut correct = 0usize;
    for (key, source) in &truth.sources {
        let Some(source) = source else { continue };
        real += 1;
        let hit = result
            .object_of(*key)
            .and_then(|id| landmark_matches.iter().find(|(l, _)| *l == id))
            .and_then(|(_, j)| *j);
        if hit == Some(*source) {
            correct += 1;
        }
    }
    Ok(Evaluation {
        num_objects: estimates.len(),
        mean_object_error: objects.mean_error,
        mean_pose_error: traj.mean,
        cumulative_pose_error: traj.cumulative,
        fraction_used: result.fraction_used(),
        association_accuracy: if real == 0 { 1.0 } else { correct as f64 / real as f64 },
        per_pose_error: traj.per_pose,
        landmark_matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trajectory_error_example() {
        let truth = [Pose2::new(0.0, 0.0, 0.0), Pose2::new(1.0, 0.0, 0.0)];
        let est = [Pose2::new(0.0, 0.0, 0.0), Pose2::new(1.0, 0.3, 0.5)];
        let e = trajectory_errors(&est, &truth).unwrap();
        assert_abs_diff_eq!(e.mean, 0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(e.cumulative, 0.3, epsilon = 1e-12);
        assert!(trajectory_errors(&est[..1], &truth).is_err());
    }

    #[test]
    fn assignment_square() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        assert_eq!(min_cost_assignment(&cost), vec![Some(1), Some(0), Some(2)]);
    }

    #[test]
    fn assignment_rectangular_and_forbidden() {
        let inf = f64::INFINITY;
        let cost = vec![vec![1.0, inf], vec![0.5, inf], vec![inf, 2.0]];
        let a = min_cost_assignment(&cost);
        assert_eq!(a, vec![None, Some(0), Some(1)]);
        assert_eq!(min_cost_assignment(&[vec![inf, inf]]), vec![None]);
        assert!(min_cost_assignment(&[]).is_empty());
    }

    #[test]
    fn class_mismatch_is_never_matched() {
        let truth = [
            WorldObject { position: Point2::new(0.0, 0.0), class: 1 },
            WorldObject { position: Point2::new(5.0, 0.0), class: 2 },
        ];
        let est = [(Point2::new(0.1, 0.0), 2), (Point2::new(5.0, 0.2), 2)];
        let e = object_errors(&est, &truth);
        assert_eq!(e.matches.len(), 1);
        assert_eq!((e.matches[0].0, e.matches[0].1), (1, 1));
        assert_abs_diff_eq!(e.mean_error, 0.2, epsilon = 1e-12);
    }
}
