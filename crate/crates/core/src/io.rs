//! Line-oriented text formats for datasets and ground truth.
//!
//! Dataset files:
//!
//! ```text
//! # comment
//! HEADER <num_classes> <x0> <y0> <theta0>
//! ODOM <t> <dx> <dy> <dtheta> <qxx> <qyy> <qtt>
//! DET <t> <k> <class> <zx> <zy> <rxx> <ryy>
//! ```
//!
//! Covariances are diagonal. Numbers are written with Rust's shortest
//! round-trip formatting, so `load(save(d)) == d` bit for bit. A file without a
//! `HEADER` line describes a dataset with zero classes starting at the origin.
//!
//! Ground truth lives in a separate file that no estimator reads:
//!
//! ```text
//! POSE <t> <x> <y> <theta>
//! OBJECT <index> <class> <x> <y>
//! SOURCE <t> <k> <index | ->
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::models::{Dataset, DetKey, Detection, Odometry};
use crate::se2::{Point2, Pose2};
use crate::sim::{GroundTruth, WorldObject};

struct Line<'a> {
    path: Option<&'a Path>,
    number: usize,
    fields: Vec<&'a str>,
}

impl Line<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.map(Path::to_path_buf),
            line: self.number,
            message: message.into(),
        }
    }

    fn expect_len(&self, n: usize) -> Result<()> {
        if self.fields.len() != n {
            return Err(self.error(format!(
                "{} expects {} fields, found {}",
                self.fields[0],
                n - 1,
                self.fields.len() - 1
            )));
        }
        Ok(())
    }

    fn get<T: FromStr>(&self, i: usize, what: &str) -> Result<T> {
        self.fields[i]
            .parse()
            .map_err(|_| self.error(format!("invalid {what} `{}`", self.fields[i])))
    }
}

fn records<'a>(text: &'a str, path: Option<&'a Path>) -> impl Iterator<Item = Line<'a>> {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            return None;
        }
        Some(Line {
            path,
            number: i + 1,
            fields: content.split_whitespace().collect(),
        })
    })
}

fn is_diagonal2(m: &Matrix2<f64>) -> bool {
    m[(0, 1)] == 0.0 && m[(1, 0)] == 0.0
}

fn is_diagonal3(m: &Matrix3<f64>) -> bool {
    (0..3).all(|i| (0..3).all(|j| i == j || m[(i, j)] == 0.0))
}

pub fn format_dataset(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    let p = dataset.initial_pose;
    writeln!(out, "HEADER {} {} {} {}", dataset.num_classes, p.x, p.y, p.theta).unwrap();
    for o in &dataset.odometry {
        if !is_diagonal3(&o.cov) {
            return Err(Error::Validation(format!("odometry t={} has a non-diagonal covariance", o.t)));
        }
        let d = o.delta;
        writeln!(
            out,
            "ODOM {} {} {} {} {} {} {}",
            o.t,
            d.x,
            d.y,
            d.theta,
            o.cov[(0, 0)],
            o.cov[(1, 1)],
            o.cov[(2, 2)]
        )
        .unwrap();
    }
    for d in &dataset.detections {
        if !is_diagonal2(&d.cov) {
            return Err(Error::Validation(format!("detection {} has a non-diagonal covariance", d.key())));
        }
        writeln!(
            out,
            "DET {} {} {} {} {} {} {}",
            d.t,
            d.k,
            d.class,
            d.z.x,
            d.z.y,
            d.cov[(0, 0)],
            d.cov[(1, 1)]
        )
        .unwrap();
    }
    Ok(out)
}

pub fn parse_dataset(text: &str, path: Option<&Path>) -> Result<Dataset> {
    let mut header: Option<(usize, Pose2)> = None;
    let mut odometry = Vec::new();
    let mut detections = Vec::new();
    for line in records(text, path) {
        match line.fields[0] {
            "HEADER" => {
                line.expect_len(5)?;
                if header.is_some() {
                    return Err(line.error("duplicate HEADER"));
                }
                header = Some((
                    line.get(1, "class count")?,
                    Pose2::new(line.get(2, "x")?, line.get(3, "y")?, line.get(4, "theta")?),
                ));
            }
            "ODOM" => {
                line.expect_len(8)?;
                let delta = Pose2::new(line.get(2, "dx")?, line.get(3, "dy")?, line.get(4, "dtheta")?);
                let cov = Matrix3::from_diagonal(&Vector3::new(
                    line.get(5, "qxx")?,
                    line.get(6, "qyy")?,
                    line.get(7, "qtt")?,
                ));
                odometry.push(Odometry::new(line.get(1, "t")?, delta, cov));
            }
            "DET" => {
                line.expect_len(8)?;
                let z = Point2::new(line.get(4, "zx")?, line.get(5, "zy")?);
                let cov = Matrix2::from_diagonal(&Vector2::new(line.get(6, "rxx")?, line.get(7, "ryy")?));
                detections.push(Detection::new(
                    line.get(1, "t")?,
                    line.get(2, "k")?,
                    z,
                    line.get(3, "class")?,
                    cov,
                ));
            }
            other => return Err(line.error(format!("unknown record type `{other}`"))),
        }
    }
    odometry.sort_by_key(|o: &Odometry| o.t);
    let (num_classes, initial_pose) = header.unwrap_or((0, Pose2::identity()));
    Dataset::new(num_classes, initial_pose, odometry, detections)
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_dataset(dataset)?).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, Some(path))
}

pub fn format_truth(truth: &GroundTruth) -> String {
    let mut out = String::new();
    for (t, p) in truth.poses.iter().enumerate() {
        writeln!(out, "POSE {t} {} {} {}", p.x, p.y, p.theta).unwrap();
    }
    for (i, o) in truth.objects.iter().enumerate() {
        writeln!(out, "OBJECT {i} {} {} {}", o.class, o.position.x, o.position.y).unwrap();
    }
    for (key, source) in &truth.sources {
        match source {
            Some(j) => writeln!(out, "SOURCE {} {} {j}", key.t, key.k).unwrap(),
            None => writeln!(out, "SOURCE {} {} -", key.t, key.k).unwrap(),
        }
    }
    out
}

pub fn parse_truth(text: &str, path: Option<&Path>) -> Result<GroundTruth> {
    let mut poses = Vec::new();
    let mut objects = Vec::new();
    let mut sources = BTreeMap::new();
    for line in records(text, path) {
        match line.fields[0] {
            "POSE" => {
                line.expect_len(5)?;
                let t: usize = line.get(1, "t")?;
                if t != poses.len() {
                    return Err(line.error(format!("expected POSE {}, found {t}", poses.len())));
                }
                poses.push(Pose2::new(line.get(2, "x")?, line.get(3, "y")?, line.get(4, "theta")?));
            }
            "OBJECT" => {
                line.expect_len(5)?;
                let i: usize = line.get(1, "index")?;
                if i != objects.len() {
                    return Err(line.error(format!("expected OBJECT {}, found {i}", objects.len())));
                }
                objects.push(WorldObject {
                    class: line.get(2, "class")?,
                    position: Point2::new(line.get(3, "x")?, line.get(4, "y")?),
                });
            }
            "SOURCE" => {
                line.expect_len(4)?;
                let key = DetKey::new(line.get(1, "t")?, line.get(2, "k")?);
                let source = match line.fields[3] {
                    "-" => None,
                    _ => Some(line.get(3, "object index")?),
                };
                if sources.insert(key, source).is_some() {
                    return Err(line.error(format!("duplicate SOURCE for {key}")));
                }
            }
            other => return Err(line.error(format!("unknown record type `{other}`"))),
        }
    }
    if let Some(j) = sources.values().flatten().find(|j| **j >= objects.len()) {
        return Err(Error::Validation(format!("SOURCE refers to missing object {j}")));
    }
    Ok(GroundTruth { poses, objects, sources })
}

pub fn save_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_truth(truth)).map_err(|e| Error::io(path, e))
}

pub fn load_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_truth(&text, Some(path))
}
