//! Planar rigid-body algebra.
//!
//! Poses are `(x, y, theta)` with theta counter-clockwise positive and kept in
//! `(-pi, pi]`. Jacobians are taken with respect to the additive `(x, y, theta)`
//! parameterization used by the solver, not a tangent-space retraction.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Vector2, Vector3};

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::default()
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    pub fn from_vector(v: Vector2<f64>) -> Self {
        Self::new(v.x, v.y)
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A robot pose in SE(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Default for Pose2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose2 {
    /// Builds a pose, normalizing the heading.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub const fn identity() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.theta)
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    fn rotation(&self) -> Matrix2<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    /// `self ⊕ other`: `other` expressed in this frame, mapped to the global frame.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let t = self.rotation() * Vector2::new(other.x, other.y);
        Pose2::new(self.x + t.x, self.y + t.y, self.theta + other.theta)
    }

    /// Relative pose of `other` seen from `self`, i.e. `other ⊖ self`.
    pub fn between(&self, other: &Pose2) -> Pose2 {
        let d = Vector2::new(other.x - self.x, other.y - self.y);
        let t = self.rotation().transpose() * d;
        Pose2::new(t.x, t.y, other.theta - self.theta)
    }

    pub fn inverse(&self) -> Pose2 {
        let t = -(self.rotation().transpose() * Vector2::new(self.x, self.y));
        Pose2::new(t.x, t.y, -self.theta)
    }

    /// Expresses the global point `p` in this pose's frame.
    pub fn to_local(&self, p: &Point2) -> Point2 {
        let d = Vector2::new(p.x - self.x, p.y - self.y);
        Point2::from_vector(self.rotation().transpose() * d)
    }

    /// Maps a point from this pose's frame into the global frame.
    pub fn to_global(&self, p: &Point2) -> Point2 {
        let g = self.rotation() * p.to_vector();
        Point2::new(self.x + g.x, self.y + g.y)
    }
}

pub fn compose(a: &Pose2, b: &Pose2) -> Pose2 {
    a.compose(b)
}

pub fn between(a: &Pose2, b: &Pose2) -> Pose2 {
    a.between(b)
}

pub fn to_local(pose: &Pose2, p: &Point2) -> Point2 {
    pose.to_local(p)
}

pub fn to_global(pose: &Pose2, p: &Point2) -> Point2 {
    pose.to_global(p)
}

/// Jacobians of `between(a, b)` with respect to `a` and `b`.
pub fn jacobians_between(a: &Pose2, b: &Pose2) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = a.theta.sin_cos();
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    // d(R^T d)/dtheta_a
    let dt_x = -s * dx + c * dy;
    let dt_y = -c * dx - s * dy;
    #[rustfmt::skip]
    let ja = Matrix3::new(
        -c, -s, dt_x,
         s, -c, dt_y,
        0.0, 0.0, -1.0,
    );
    #[rustfmt::skip]
    let jb = Matrix3::new(
         c,   s, 0.0,
        -s,   c, 0.0,
        0.0, 0.0, 1.0,
    );
    (ja, jb)
}

/// Jacobians of `to_local(pose, p)` with respect to the pose and the point.
pub fn jacobians_to_local(pose: &Pose2, p: &Point2) -> (Matrix2x3<f64>, Matrix2<f64>) {
    let (s, c) = pose.theta.sin_cos();
    let dx = p.x - pose.x;
    let dy = p.y - pose.y;
    #[rustfmt::skip]
    let jpose = Matrix2x3::new(
        -c, -s, -s * dx + c * dy,
         s, -c, -c * dx - s * dy,
    );
    #[rustfmt::skip]
    let jpoint = Matrix2::new(
         c, s,
        -s, c,
    );
    (jpose, jpoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: &Pose2, b: &Pose2, tol: f64) -> bool {
        (a.x - b.x).abs() < tol
            && (a.y - b.y).abs() < tol
            && normalize_angle(a.theta - b.theta).abs() < tol
    }

    // Rotation-matrix oracle kept independent of the Pose2 methods.
    fn rot(theta: f64) -> [[f64; 2]; 2] {
        [[theta.cos(), -theta.sin()], [theta.sin(), theta.cos()]]
    }

    #[test]
    fn compose_examples() {
        let p = Pose2::new(1.0, 2.0, 0.3);
        assert!(close(&compose(&Pose2::identity(), &p), &p, 1e-15));
        assert!(close(
            &compose(&Pose2::new(1.0, 0.0, 0.0), &Pose2::new(1.0, 0.0, 0.0)),
            &Pose2::new(2.0, 0.0, 0.0),
            1e-15
        ));
        let r = rot(FRAC_PI_2);
        let expected = Pose2::new(r[0][0] * 1.0, r[1][0] * 1.0, FRAC_PI_2);
        let got = compose(&Pose2::new(0.0, 0.0, FRAC_PI_2), &Pose2::new(1.0, 0.0, 0.0));
        assert!(close(&got, &expected, 1e-15));
        assert!(close(&got, &Pose2::new(0.0, 1.0, FRAC_PI_2), 1e-15));
    }

    #[test]
    fn between_examples() {
        let p = Pose2::new(0.4, -2.0, 2.9);
        assert!(close(&between(&p, &p), &Pose2::identity(), 1e-15));
        let q = Pose2::new(1.0, 2.0, 0.3);
        assert!(close(&between(&Pose2::identity(), &q), &q, 1e-15));
        let got = between(&Pose2::new(1.0, 1.0, FRAC_PI_2), &Pose2::new(1.0, 2.0, FRAC_PI_2));
        assert!(close(&got, &Pose2::new(1.0, 0.0, 0.0), 1e-15));
    }

    #[test]
    fn local_global_examples() {
        let id = Pose2::identity();
        assert_eq!(to_local(&id, &Point2::new(3.0, 4.0)), Point2::new(3.0, 4.0));
        let p = Pose2::new(-2.0, 0.5, 1.1);
        let o = to_local(&p, &p.position());
        assert_abs_diff_eq!(o.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o.y, 0.0, epsilon = 1e-15);

        let pose = Pose2::new(1.0, 1.0, FRAC_PI_2);
        let l = to_local(&pose, &Point2::new(1.0, 2.0));
        assert_abs_diff_eq!(l.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.y, 0.0, epsilon = 1e-15);

        assert_eq!(to_global(&id, &Point2::new(3.0, 4.0)), Point2::new(3.0, 4.0));
        let g = to_global(&pose, &Point2::new(1.0, 0.0));
        assert_abs_diff_eq!(g.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.y, 2.0, epsilon = 1e-15);
        assert_eq!(to_global(&p, &Point2::origin()), p.position());
    }

    #[test]
    fn angle_normalization_edges() {
        assert_eq!(normalize_angle(-PI), PI);
        assert_eq!(normalize_angle(PI), PI);
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-3.0 * PI), PI, epsilon = 1e-12);
        assert_eq!(normalize_angle(0.0), 0.0);
        assert_eq!(Pose2::new(0.0, 0.0, -PI).theta, PI);
    }

    #[test]
    fn identity_jacobians() {
        let (_, jb) = jacobians_between(&Pose2::identity(), &Pose2::identity());
        assert_eq!(jb, Matrix3::identity());
        let (_, jp) = jacobians_to_local(&Pose2::new(3.0, -1.0, 0.0), &Point2::new(0.2, 0.1));
        assert_eq!(jp, Matrix2::identity());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = Pose2::new(1.5, -0.3, 2.2);
        assert!(close(&p.compose(&p.inverse()), &Pose2::identity(), 1e-12));
    }

    fn pose_strategy() -> impl Strategy<Value = Pose2> {
        (-50.0..50.0f64, -50.0..50.0f64, -10.0..10.0f64).prop_map(|(x, y, t)| Pose2::new(x, y, t))
    }

    fn point_strategy() -> impl Strategy<Value = Point2> {
        (-50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #[test]
        fn compose_between_roundtrip(a in pose_strategy(), b in pose_strategy()) {
            let back = compose(&a, &between(&a, &b));
            prop_assert!(close(&back, &b, 1e-12));
        }

        #[test]
        fn local_global_roundtrip(p in pose_strategy(), q in point_strategy()) {
            let back = to_local(&p, &to_global(&p, &q));
            prop_assert!((back.x - q.x).abs() < 1e-12 && (back.y - q.y).abs() < 1e-12);
        }

        #[test]
        fn headings_stay_normalized(a in pose_strategy(), b in pose_strategy(), t in -20.0..20.0f64) {
            for p in [compose(&a, &b), between(&a, &b), Pose2::new(0.0, 0.0, t), a.inverse()] {
                prop_assert!(p.theta > -PI && p.theta <= PI);
            }
        }

        #[test]
        fn compose_is_associative(a in pose_strategy(), b in pose_strategy(), c in pose_strategy()) {
            let l = compose(&compose(&a, &b), &c);
            let r = compose(&a, &compose(&b, &c));
            prop_assert!(close(&l, &r, 1e-9));
        }
    }
}
