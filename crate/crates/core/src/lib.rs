//! Pose-graph SLAM with nonparametric (Dirichlet-process) data association.
//!
//! A robot moves through a planar world and detects objects of a few
//! semantic classes. Which detections belong to the same object is unknown.
//! [`slam::run_np_slam`] alternates between reassigning detections to
//! landmarks under a DP prior ([`association`]) and refining poses and
//! landmark positions by sparse Levenberg-Marquardt ([`solver`]).
//!
//! The crate also ships three reference baselines ([`baselines`]), a seeded
//! simulator ([`sim`]), a text dataset format ([`io`]), evaluation metrics
//! ([`metrics`]) and a multi-seed benchmark harness ([`bench`]).

pub mod association;
pub mod baselines;
pub mod bench;
pub mod config;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod models;
pub mod se2;
pub mod sim;
pub mod slam;
pub mod solver;
pub mod sparse;
mod svg;

pub use association::{ClassBelief, DpModel, DpParams};
pub use error::{Error, Result};
pub use graph::{build_graph, dead_reckon, Association, Landmark, LandmarkId, PoseGraph, SolverSettings};
pub use models::{Dataset, DetKey, Detection, Odometry};
pub use se2::{Point2, Pose2};
pub use sim::{simulate, GroundTruth, SimConfig};
pub use slam::{run_np_slam, RunConfig, SlamResult};
