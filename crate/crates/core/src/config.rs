//! TOML configuration for the simulator, the estimators and the benchmark.
//!
//! Every key is optional; missing keys keep their defaults.
//!
//! ```toml
//! seeds = [0, 1, 2]
//!
//! [sim]
//! num_objects = 15
//! odom_sigma_theta = 0.0003
//! waypoints_file = "route.txt"   # relative to the config file
//!
//! [run]
//! alpha = 1.0
//! epsilon_fp = 0.02
//! max_outer_iterations = 10
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::association::ClassBelief;
use crate::error::{Error, Result};
use crate::se2::Point2;
use crate::sim::{parse_waypoints, SimConfig};
use crate::slam::RunConfig;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    seed: Option<u64>,
    num_objects: Option<usize>,
    num_classes: Option<usize>,
    world_extent: Option<f64>,
    min_separation: Option<f64>,
    min_views: Option<usize>,
    fov_range: Option<f64>,
    fov_half_angle_deg: Option<f64>,
    odom_sigma_xy: Option<f64>,
    odom_sigma_theta: Option<f64>,
    meas_sigma: Option<f64>,
    class_flip_prob: Option<f64>,
    false_positive_rate: Option<f64>,
    noise_scale: Option<f64>,
    step_length: Option<f64>,
    waypoints: Option<Vec<[f64; 2]>>,
    waypoints_file: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    alpha: Option<f64>,
    beta0: Option<Vec<f64>>,
    epsilon_fp: Option<f64>,
    rho_new: Option<f64>,
    workspace_area: Option<f64>,
    max_outer_iterations: Option<usize>,
    tau_gate: Option<f64>,
    max_solver_iterations: Option<usize>,
    rel_decrease_tol: Option<f64>,
    abs_gradient_tol: Option<f64>,
    initial_lm_damping: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub sim: SimConfig,
    pub run: RunConfig,
    /// Seeds for the benchmark; `0..10` by default.
    pub seeds: Vec<u64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            run: RunConfig::default(),
            seeds: (0..10).collect(),
        }
    }
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

impl Config {
    /// Parses TOML text. Relative `waypoints_file` paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = Config::default();
        set(&mut cfg.seeds, raw.seeds);

        let s = raw.sim;
        let sim = &mut cfg.sim;
        set(&mut sim.seed, s.seed);
        set(&mut sim.num_objects, s.num_objects);
        set(&mut sim.num_classes, s.num_classes);
        set(&mut sim.world_extent, s.world_extent);
        set(&mut sim.min_separation, s.min_separation);
        set(&mut sim.min_views, s.min_views);
        set(&mut sim.fov_range, s.fov_range);
        set(&mut sim.fov_half_angle, s.fov_half_angle_deg.map(f64::to_radians));
        set(&mut sim.odom_sigma_xy, s.odom_sigma_xy);
        set(&mut sim.odom_sigma_theta, s.odom_sigma_theta);
        set(&mut sim.meas_sigma, s.meas_sigma);
        set(&mut sim.class_flip_prob, s.class_flip_prob);
        set(&mut sim.false_positive_rate, s.false_positive_rate);
        set(&mut sim.noise_scale, s.noise_scale);
        set(&mut sim.step_length, s.step_length);
        match (s.waypoints, s.waypoints_file) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either waypoints or waypoints_file, not both".into()))
            }
            (Some(w), None) => sim.waypoints = w.into_iter().map(|[x, y]| Point2::new(x, y)).collect(),
            (None, Some(file)) => {
                let path = base_dir.map_or_else(|| Path::new(&file).to_path_buf(), |d| d.join(&file));
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                sim.waypoints = parse_waypoints(&text).map_err(|e| match e {
                    Error::Parse { line, message, .. } => Error::Parse { path: Some(path.clone()), line, message },
                    other => other,
                })?;
            }
            (None, None) => {}
        }

        let r = raw.run;
        let run = &mut cfg.run;
        set(&mut run.dp.alpha, r.alpha);
        if let Some(beta) = r.beta0 {
            run.dp.beta0 = Some(ClassBelief::new(beta).map_err(|e| Error::Config(e.to_string()))?);
        }
        set(&mut run.dp.epsilon_fp, r.epsilon_fp);
        run.dp.rho_new = r.rho_new.or(run.dp.rho_new);
        run.dp.workspace_area = r.workspace_area.or(run.dp.workspace_area);
        set(&mut run.max_outer_iterations, r.max_outer_iterations);
        set(&mut run.tau_gate, r.tau_gate);
        set(&mut run.solver.max_iterations, r.max_solver_iterations);
        set(&mut run.solver.rel_decrease_tol, r.rel_decrease_tol);
        set(&mut run.solver.abs_gradient_tol, r.abs_gradient_tol);
        set(&mut run.solver.initial_lm_damping, r.initial_lm_damping);

        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.run.validate()
    }
}
