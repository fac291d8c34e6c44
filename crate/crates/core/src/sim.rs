//! Seeded simulator for planar object-SLAM datasets.
//!
//! The robot follows a waypoint route at a fixed step length, heading along
//! its direction of travel. Objects of `num_classes` classes are scattered in
//! a square world with a minimum separation and must be seen often enough
//! along the true route. Every object inside the field of view produces a
//! noisy relative-position detection.
//!
//! Two independent ChaCha8 streams are derived from the seed: one for the
//! world, one for sensor noise. The same seed always gives the same world and
//! the same dataset.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::models::{Dataset, DetKey, Detection, Odometry};
use crate::se2::{Point2, Pose2};

const DEFAULT_ROUTE: &str = include_str!("../data/default_trajectory.txt");

/// Maximum object placement draws before giving up.
pub const MAX_PLACEMENT_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub num_objects: usize,
    pub num_classes: usize,
    /// Objects are placed uniformly in `[-world_extent, world_extent]^2`.
    pub world_extent: f64,
    pub min_separation: f64,
    /// Each object must fall in the field of view of at least this many true poses.
    pub min_views: usize,
    pub fov_range: f64,
    /// Half of the field-of-view opening angle, radians.
    pub fov_half_angle: f64,
    /// Odometry translation noise per step (m).
    pub odom_sigma_xy: f64,
    /// Odometry heading noise per step (rad).
    pub odom_sigma_theta: f64,
    /// Relative-position measurement noise (m).
    pub meas_sigma: f64,
    pub class_flip_prob: f64,
    /// Mean number of spurious detections per frame.
    pub false_positive_rate: f64,
    /// Multiplies the noise actually injected. The covariances written to the
    /// dataset always use the nominal sigmas, so 0 gives exact data with a
    /// well-posed model.
    pub noise_scale: f64,
    pub waypoints: Vec<Point2>,
    pub step_length: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_objects: 15,
            num_classes: 5,
            world_extent: 5.0,
            min_separation: 0.8,
            min_views: 60,
            fov_range: 4.0,
            fov_half_angle: 60f64.to_radians(),
            odom_sigma_xy: 0.02,
            odom_sigma_theta: 0.02f64.to_radians(),
            meas_sigma: 0.1,
            class_flip_prob: 0.0,
            false_positive_rate: 0.0,
            noise_scale: 1.0,
            waypoints: default_waypoints(),
            step_length: 0.095,
        }
    }
}

/// The built-in survey route.
pub fn default_waypoints() -> Vec<Point2> {
    parse_waypoints(DEFAULT_ROUTE).expect("built-in route parses")
}

/// Parses `x y` lines, skipping blanks and `#` comments.
pub fn parse_waypoints(text: &str) -> Result<Vec<Point2>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { path: None, line: i + 1, message: format!("{e}") })?;
        if nums.len() != 2 {
            return Err(Error::Parse {
                path: None,
                line: i + 1,
                message: format!("expected `x y`, got {} fields", nums.len()),
            });
        }
        out.push(Point2::new(nums[0], nums[1]));
    }
    Ok(out)
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("world_extent", self.world_extent),
            ("fov_range", self.fov_range),
            ("fov_half_angle", self.fov_half_angle),
            ("odom_sigma_xy", self.odom_sigma_xy),
            ("odom_sigma_theta", self.odom_sigma_theta),
            ("meas_sigma", self.meas_sigma),
            ("step_length", self.step_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.num_classes == 0 {
            return Err(Error::Config("num_classes must be at least 1".into()));
        }
        if !(self.min_separation >= 0.0) {
            return Err(Error::Config("min_separation must be non-negative".into()));
        }
        if self.fov_half_angle > PI {
            return Err(Error::Config("fov_half_angle must not exceed pi".into()));
        }
        if !(0.0..=1.0).contains(&self.class_flip_prob) {
            return Err(Error::Config("class_flip_prob must lie in [0, 1]".into()));
        }
        if !(self.false_positive_rate >= 0.0) || !(self.noise_scale >= 0.0) {
            return Err(Error::Config("false_positive_rate and noise_scale must be non-negative".into()));
        }
        if self.waypoints.len() < 2 {
            return Err(Error::Config("route needs at least two waypoints".into()));
        }
        Ok(())
    }

    fn in_view(&self, pose: &Pose2, p: &Point2) -> bool {
        let local = pose.to_local(p);
        let range = local.x.hypot(local.y);
        range <= self.fov_range && local.y.atan2(local.x).abs() <= self.fov_half_angle
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldObject {
    pub position: Point2,
    /// Class in `1..=num_classes`.
    pub class: usize,
}

/// Everything the estimator does not get to see.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub poses: Vec<Pose2>,
    pub objects: Vec<WorldObject>,
    /// Index of the object behind each detection; `None` for spurious ones.
    pub sources: BTreeMap<DetKey, Option<usize>>,
}

/// True poses along the route, spaced `step_length` apart by arc length. The
/// final waypoint is always the last pose.
pub fn generate_trajectory(cfg: &SimConfig) -> Result<Vec<Pose2>> {
    cfg.validate()?;
    let segments: Vec<(Point2, Point2)> = cfg
        .waypoints
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, b)| a.distance(b) > 0.0)
        .collect();
    if segments.is_empty() {
        return Err(Error::Config("route has zero length".into()));
    }
    let heading = |(a, b): &(Point2, Point2)| (b.y - a.y).atan2(b.x - a.x);
    let mut poses = vec![Pose2::new(segments[0].0.x, segments[0].0.y, heading(&segments[0]))];
    // Distance still to travel before the next sample.
    let mut pending = cfg.step_length;
    for seg in &segments {
        let (a, b) = *seg;
        let len = a.distance(&b);
        let mut s = pending;
        while s <= len + 1e-12 {
            let f = s / len;
            poses.push(Pose2::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), heading(seg)));
            s += cfg.step_length;
        }
        pending = s - len;
    }
    let last_seg = segments.last().unwrap();
    let end = last_seg.1;
    if poses.last().unwrap().position().distance(&end) > 1e-9 {
        poses.push(Pose2::new(end.x, end.y, heading(last_seg)));
    }
    Ok(poses)
}

/// Places objects by rejection sampling.
pub fn generate_world(cfg: &SimConfig) -> Result<Vec<WorldObject>> {
    let route = generate_trajectory(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut classes: Vec<usize> = (0..cfg.num_objects).map(|i| i % cfg.num_classes + 1).collect();
    classes.shuffle(&mut rng);

    let mut placed: Vec<Point2> = Vec::with_capacity(cfg.num_objects);
    let mut draws = 0;
    while placed.len() < cfg.num_objects {
        if draws == MAX_PLACEMENT_DRAWS {
            return Err(Error::Config(format!(
                "placed only {} of {} objects in {MAX_PLACEMENT_DRAWS} draws; relax min_separation or min_views",
                placed.len(),
                cfg.num_objects
            )));
        }
        draws += 1;
        let e = cfg.world_extent;
        let p = Point2::new(rng.random_range(-e..=e), rng.random_range(-e..=e));
        if placed.iter().any(|q| q.distance(&p) < cfg.min_separation) {
            continue;
        }
        if route.iter().filter(|x| cfg.in_view(x, &p)).count() < cfg.min_views {
            continue;
        }
        placed.push(p);
    }
    Ok(placed
        .into_iter()
        .zip(classes)
        .map(|(position, class)| WorldObject { position, class })
        .collect())
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    n * sigma
}

/// Generates a world and a noisy dataset observing it.
pub fn simulate(cfg: &SimConfig) -> Result<(GroundTruth, Dataset)> {
    let poses = generate_trajectory(cfg)?;
    let objects = generate_world(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let scale = cfg.noise_scale;

    let odometry = poses
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let d = w[0].between(&w[1]);
            let noisy = Pose2::new(
                d.x + gaussian(&mut rng, cfg.odom_sigma_xy * scale),
                d.y + gaussian(&mut rng, cfg.odom_sigma_xy * scale),
                d.theta + gaussian(&mut rng, cfg.odom_sigma_theta * scale),
            );
            Odometry::with_sigmas(i + 1, noisy, cfg.odom_sigma_xy, cfg.odom_sigma_theta)
        })
        .collect();

    let fp = if cfg.false_positive_rate > 0.0 {
        Some(Poisson::new(cfg.false_positive_rate).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let mut detections = Vec::new();
    let mut sources = BTreeMap::new();
    for (t, x) in poses.iter().enumerate() {
        // (local position, class, source)
        let mut frame: Vec<(Point2, usize, Option<usize>)> = Vec::new();
        for (j, o) in objects.iter().enumerate() {
            if !cfg.in_view(x, &o.position) {
                continue;
            }
            let local = x.to_local(&o.position);
            let z = Point2::new(
                local.x + gaussian(&mut rng, cfg.meas_sigma * scale),
                local.y + gaussian(&mut rng, cfg.meas_sigma * scale),
            );
            let mut class = o.class;
            if cfg.num_classes > 1 && rng.random::<f64>() < cfg.class_flip_prob {
                let other = rng.random_range(1..cfg.num_classes);
                class = if other >= class { other + 1 } else { other };
            }
            frame.push((z, class, Some(j)));
        }
        if let Some(fp) = &fp {
            let n = fp.sample(&mut rng) as usize;
            for _ in 0..n {
                let r = rng.random_range(0.0..=cfg.fov_range);
                let b = rng.random_range(-cfg.fov_half_angle..=cfg.fov_half_angle);
                let class = rng.random_range(1..=cfg.num_classes);
                frame.push((Point2::new(r * b.cos(), r * b.sin()), class, None));
            }
        }
        frame.shuffle(&mut rng);
        for (i, (z, class, source)) in frame.into_iter().enumerate() {
            let d = Detection::with_sigma(t, i + 1, z, class, cfg.meas_sigma);
            sources.insert(d.key(), source);
            detections.push(d);
        }
    }
    let dataset = Dataset::new(cfg.num_classes, poses[0], odometry, detections)?;
    Ok((GroundTruth { poses, objects, sources }, dataset))
}
