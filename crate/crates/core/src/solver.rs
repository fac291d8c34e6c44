//! Levenberg-Marquardt over the pose graph with a sparse normal-equation solve.
//!
//! State layout is fixed: poses `X_1..X_T` (three entries each, `X_0` is the
//! gauge and not a variable), then landmarks in ascending id order (two entries
//! each).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3};

use crate::error::{Error, Result};
use crate::graph::{LandmarkId, PoseGraph, SolverSettings};
use crate::models::{information2, information3, measurement_residual, odometry_residual};
use crate::se2::{jacobians_between, jacobians_to_local, Point2, Pose2};
use crate::sparse::{SymbolicCholesky, UpperCsc};

/// A block of the state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StateBlock {
    Pose(usize),
    Landmark(LandmarkId),
}

/// Mapping between graph variables and state-vector offsets.
#[derive(Debug, Clone)]
pub struct StateLayout {
    num_poses: usize,
    landmark_ids: Vec<LandmarkId>,
    landmark_slot: BTreeMap<LandmarkId, usize>,
}

impl StateLayout {
    fn new(graph: &PoseGraph<'_>) -> Self {
        let landmark_ids: Vec<LandmarkId> = graph.landmarks().keys().copied().collect();
        let landmark_slot = landmark_ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        Self {
            num_poses: graph.poses().len(),
            landmark_ids,
            landmark_slot,
        }
    }

    pub fn dim(&self) -> usize {
        3 * (self.num_poses - 1) + 2 * self.landmark_ids.len()
    }

    /// Offset of pose `t`, `None` for the fixed gauge pose.
    pub fn pose_offset(&self, t: usize) -> Option<usize> {
        (t > 0).then(|| 3 * (t - 1))
    }

    pub fn landmark_offset(&self, id: LandmarkId) -> Option<usize> {
        self.landmark_slot.get(&id).map(|slot| self.slot_offset(*slot))
    }

    fn slot_offset(&self, slot: usize) -> usize {
        3 * (self.num_poses - 1) + 2 * slot
    }

    /// Which block a state index belongs to.
    pub fn block_of(&self, index: usize) -> StateBlock {
        let pose_dim = 3 * (self.num_poses - 1);
        if index < pose_dim {
            StateBlock::Pose(index / 3 + 1)
        } else {
            StateBlock::Landmark(self.landmark_ids[(index - pose_dim) / 2])
        }
    }
}

/// `H = J^T W J`, `g = J^T W r` and `chi2 = r^T W r` at the current state.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    pub hessian: UpperCsc,
    pub gradient: Vec<f64>,
    pub chi2: f64,
    pub layout: StateLayout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient infinity norm below `abs_gradient_tol * (1 + chi2)`.
    Gradient,
    /// Accepted step decreased chi2 by a relative amount below tolerance.
    RelativeDecrease,
    MaxIterations,
    /// Damping grew without finding a decreasing step.
    Stalled,
}

/// Per-solve instrumentation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// chi2 at the start, then after every accepted step.
    pub chi2_history: Vec<f64>,
    pub rejected_steps: usize,
    pub termination: Termination,
    pub final_gradient_norm: f64,
}

impl SolveReport {
    pub fn is_monotone(&self) -> bool {
        self.chi2_history.windows(2).all(|w| w[1] <= w[0])
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub poses: Vec<Pose2>,
    pub landmarks: BTreeMap<LandmarkId, Point2>,
    pub final_chi2: f64,
    pub report: SolveReport,
}

struct Problem<'g, 'a> {
    graph: &'g PoseGraph<'a>,
    layout: StateLayout,
    odo_info: Vec<Matrix3<f64>>,
    meas: Vec<MeasFactor>,
}

struct MeasFactor {
    t: usize,
    det: usize,
    landmark: usize,
    info: Matrix2<f64>,
}

#[derive(Clone)]
struct State {
    poses: Vec<Pose2>,
    landmarks: Vec<Point2>,
}

impl<'g, 'a> Problem<'g, 'a> {
    fn new(graph: &'g PoseGraph<'a>) -> Result<Self> {
        let layout = StateLayout::new(graph);
        let ds = graph.dataset();
        let odo_info = ds
            .odometry
            .iter()
            .map(|o| information3(&o.cov))
            .collect::<Result<Vec<_>>>()?;
        let mut meas = Vec::with_capacity(ds.detections.len());
        for (i, d) in ds.detections.iter().enumerate() {
            let id = graph
                .association()
                .get(d.key())
                .ok_or_else(|| Error::Consistency(format!("detection {} unassociated", d.key())))?;
            let landmark = layout.landmark_slot[&id];
            meas.push(MeasFactor {
                t: d.t,
                det: i,
                landmark,
                info: information2(&d.cov)?,
            });
        }
        for lm in graph.landmarks().values() {
            if lm.count == 0 {
                return Err(Error::Consistency(format!(
                    "landmark {} has no associated detection",
                    lm.id
                )));
            }
        }
        Ok(Self {
            graph,
            layout,
            odo_info,
            meas,
        })
    }

    fn initial_state(&self) -> State {
        State {
            poses: self.graph.poses().to_vec(),
            landmarks: self.graph.landmarks().values().map(|l| l.position).collect(),
        }
    }

    fn chi2(&self, s: &State) -> f64 {
        let ds = self.graph.dataset();
        let mut total = 0.0;
        for (o, info) in ds.odometry.iter().zip(&self.odo_info) {
            let r = odometry_residual(o, &s.poses[o.t - 1], &s.poses[o.t]);
            total += r.dot(&(info * r));
        }
        for m in &self.meas {
            let d = &ds.detections[m.det];
            let r = measurement_residual(d, &s.poses[m.t], &s.landmarks[m.landmark]);
            total += r.dot(&(m.info * r));
        }
        total
    }

    fn linearize(&self, s: &State) -> NormalEquations {
        let ds = self.graph.dataset();
        let n = self.layout.dim();
        let mut triplets = Vec::with_capacity(21 * ds.odometry.len() + 15 * self.meas.len());
        let mut g = vec![0.0; n];
        let mut chi2 = 0.0;

        for (o, info) in ds.odometry.iter().zip(&self.odo_info) {
            let (xa, xb) = (&s.poses[o.t - 1], &s.poses[o.t]);
            let r = odometry_residual(o, xa, xb);
            chi2 += r.dot(&(info * r));
            let (ja, jb) = jacobians_between(xa, xb);
            let blocks = [
                (self.layout.pose_offset(o.t - 1), DMatrix::from_column_slice(3, 3, ja.as_slice())),
                (self.layout.pose_offset(o.t), DMatrix::from_column_slice(3, 3, jb.as_slice())),
            ];
            accumulate(&blocks, info.as_slice(), r.as_slice(), &mut triplets, &mut g);
        }
        for m in &self.meas {
            let d = &ds.detections[m.det];
            let (x, l) = (&s.poses[m.t], &s.landmarks[m.landmark]);
            let r = measurement_residual(d, x, l);
            chi2 += r.dot(&(m.info * r));
            let (jx, jl) = jacobians_to_local(x, l);
            let loff = self.layout.slot_offset(m.landmark);
            let blocks = [
                (self.layout.pose_offset(m.t), DMatrix::from_column_slice(2, 3, jx.as_slice())),
                (Some(loff), DMatrix::from_column_slice(2, 2, jl.as_slice())),
            ];
            accumulate(&blocks, m.info.as_slice(), r.as_slice(), &mut triplets, &mut g);
        }
        NormalEquations {
            hessian: UpperCsc::from_triplets(n, &triplets),
            gradient: g,
            chi2,
            layout: self.layout.clone(),
        }
    }

    fn retract(&self, s: &State, delta: &[f64]) -> State {
        let mut out = s.clone();
        for t in 1..out.poses.len() {
            let o = 3 * (t - 1);
            let p = out.poses[t];
            out.poses[t] = Pose2::new(p.x + delta[o], p.y + delta[o + 1], p.theta + delta[o + 2]);
        }
        let base = 3 * (out.poses.len() - 1);
        for (j, l) in out.landmarks.iter_mut().enumerate() {
            l.x += delta[base + 2 * j];
            l.y += delta[base + 2 * j + 1];
        }
        out
    }
}

/// Adds `J_i^T W J_j` blocks (upper triangle) and `J_i^T W r` for one factor.
fn accumulate(
    blocks: &[(Option<usize>, DMatrix<f64>)],
    info: &[f64],
    r: &[f64],
    triplets: &mut Vec<(usize, usize, f64)>,
    g: &mut [f64],
) {
    let m = r.len();
    let w = DMatrix::from_column_slice(m, m, info);
    let wr = &w * DVector::from_column_slice(r);
    for (oi, ji) in blocks {
        let Some(oi) = *oi else { continue };
        let jtw = ji.transpose() * &w;
        let gi = ji.transpose() * &wr;
        for (a, v) in gi.iter().enumerate() {
            g[oi + a] += v;
        }
        for (oj, jj) in blocks {
            let Some(oj) = *oj else { continue };
            if oj < oi {
                continue;
            }
            let h = &jtw * jj;
            for a in 0..h.nrows() {
                for b in 0..h.ncols() {
                    let (row, col) = (oi + a, oj + b);
                    if row <= col {
                        triplets.push((row, col, h[(a, b)]));
                    }
                }
            }
        }
    }
}

/// Gauss-Newton normal equations of the graph at its current estimate.
pub fn normal_equations(graph: &PoseGraph<'_>) -> Result<NormalEquations> {
    let problem = Problem::new(graph)?;
    Ok(problem.linearize(&problem.initial_state()))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

const MAX_DAMPING: f64 = 1e16;

/// Maximizes the Gaussian log-likelihood of poses and landmark positions under
/// the graph's fixed association.
///
/// The graph is not modified; apply the returned [`Solution`] with
/// [`PoseGraph::apply`].
pub fn optimize(graph: &PoseGraph<'_>, settings: &SolverSettings) -> Result<Solution> {
    settings.validate()?;
    let problem = Problem::new(graph)?;
    let mut state = problem.initial_state();
    let mut ne = problem.linearize(&state);
    let mut history = vec![ne.chi2];
    let mut grad = 2.0 * inf_norm(&ne.gradient);

    let finish = |state: State, report: SolveReport, chi2: f64| -> Solution {
        let landmarks = problem
            .layout
            .landmark_ids
            .iter()
            .copied()
            .zip(state.landmarks.iter().copied())
            .collect();
        Solution {
            poses: state.poses,
            landmarks,
            final_chi2: chi2,
            report,
        }
    };

    let n = problem.layout.dim();
    if n == 0 || grad <= settings.abs_gradient_tol * (1.0 + ne.chi2) {
        let chi2 = ne.chi2;
        let report = SolveReport {
            iterations: 0,
            chi2_history: history,
            rejected_steps: 0,
            termination: Termination::Gradient,
            final_gradient_norm: grad,
        };
        return Ok(finish(state, report, chi2));
    }

    let symbolic = SymbolicCholesky::analyze(&ne.hessian);
    let mut lambda = settings.initial_lm_damping;
    let mut rejected = 0;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        iterations += 1;
        let diag = ne.hessian.diagonal();
        if let Some(i) = diag.iter().position(|d| !(*d > 0.0)) {
            return Err(Error::Solver(format!(
                "normal equations singular: no information on {:?} (state index {i})",
                ne.layout.block_of(i)
            )));
        }
        let rhs: Vec<f64> = ne.gradient.iter().map(|v| -v).collect();
        let accepted = loop {
            let mut damped = ne.hessian.clone();
            damped.add_diagonal(&diag.iter().map(|d| lambda * d).collect::<Vec<_>>());
            match symbolic.factor(&damped) {
                Ok(chol) => {
                    let delta = chol.solve(&rhs);
                    let candidate = problem.retract(&state, &delta);
                    let chi2 = problem.chi2(&candidate);
                    if chi2.is_finite() && chi2 <= ne.chi2 {
                        break Some((candidate, chi2));
                    }
                    rejected += 1;
                }
                Err(e) => {
                    if lambda >= MAX_DAMPING {
                        return Err(Error::Solver(format!(
                            "normal equations singular after damping: {e} ({:?})",
                            ne.layout.block_of(e.column)
                        )));
                    }
                }
            }
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                break None;
            }
        };
        let Some((candidate, new_chi2)) = accepted else {
            termination = Termination::Stalled;
            break;
        };
        let old_chi2 = ne.chi2;
        state = candidate;
        lambda = (lambda / 10.0).max(1e-12);
        ne = problem.linearize(&state);
        debug_assert!((ne.chi2 - new_chi2).abs() <= 1e-9 * (1.0 + new_chi2));
        history.push(ne.chi2);
        let old_grad = grad;
        grad = 2.0 * inf_norm(&ne.gradient);
        if grad <= settings.abs_gradient_tol * (1.0 + ne.chi2) {
            termination = Termination::Gradient;
            break;
        }
        // Near the optimum chi2 stops resolving progress before the gradient
        // does; keep stepping while steps still halve the gradient.
        if old_chi2 - ne.chi2 <= settings.rel_decrease_tol * old_chi2 && grad > 0.5 * old_grad {
            termination = Termination::RelativeDecrease;
            break;
        }
    }

    let chi2 = ne.chi2;
    let report = SolveReport {
        iterations,
        chi2_history: history,
        rejected_steps: rejected,
        termination,
        final_gradient_norm: grad,
    };
    Ok(finish(state, report, chi2))
}
