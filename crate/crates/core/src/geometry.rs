//! Planar rigid transforms, obstacle primitives and analytic Lidar ray casting.
//!
//! Everything here is a pure function of its inputs. Angles are kept in
//! `(-pi, pi]`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::Error;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let wrapped = theta.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// A point or free vector in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn dot(&self, other: &Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn sub(&self, other: &Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    #[inline]
    pub fn distance(&self, other: &Point2) -> f64 {
        self.sub(other).norm()
    }
}

/// Robot configuration in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    #[inline]
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// The pose viewed as the transform from the robot frame to the world frame.
    pub fn as_transform(&self) -> Transform {
        Transform::new(self.x, self.y, self.theta)
    }

    /// Moves the pose by `motion`, expressed in the robot's own frame.
    pub fn then(&self, motion: &Transform) -> Pose {
        let t = self.as_transform().compose(motion);
        Pose::new(t.dx, t.dy, t.dtheta)
    }

    /// Expresses a world point in this pose's robot frame.
    pub fn to_local(&self, world: Point2) -> Point2 {
        self.as_transform().inverse().apply(world)
    }

    /// Range and bearing (robot frame) from this pose to a world point.
    pub fn range_bearing(&self, target: Point2) -> (f64, f64) {
        let local = self.to_local(target);
        (local.norm(), normalize_angle(local.angle()))
    }
}

/// A rigid motion in SE(2): rotate by `dtheta`, then translate by `(dx, dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Transform {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        dx: 0.0,
        dy: 0.0,
        dtheta: 0.0,
    };

    pub fn new(dx: f64, dy: f64, dtheta: f64) -> Self {
        Self {
            dx,
            dy,
            dtheta: normalize_angle(dtheta),
        }
    }

    /// `self * other`: applying the result equals applying `other` first, then `self`.
    pub fn compose(&self, other: &Transform) -> Transform {
        let (s, c) = self.dtheta.sin_cos();
        Transform::new(
            c * other.dx - s * other.dy + self.dx,
            s * other.dx + c * other.dy + self.dy,
            self.dtheta + other.dtheta,
        )
    }

    pub fn inverse(&self) -> Transform {
        let (s, c) = self.dtheta.sin_cos();
        Transform::new(
            -(c * self.dx + s * self.dy),
            s * self.dx - c * self.dy,
            -self.dtheta,
        )
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        let (s, c) = self.dtheta.sin_cos();
        Point2::new(c * p.x - s * p.y + self.dx, s * p.x + c * p.y + self.dy)
    }
}

/// Axis-aligned rectangle, used both for box obstacles and workspace bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point2,
    pub max: Point2,
}

impl Aabb {
    pub fn new(min: Point2, max: Point2) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Signed distance: negative inside, zero on the boundary.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let cx = 0.5 * (self.min.x + self.max.x);
        let cy = 0.5 * (self.min.y + self.max.y);
        let qx = (p.x - cx).abs() - 0.5 * self.width();
        let qy = (p.y - cy).abs() - 0.5 * self.height();
        let outside = qx.max(0.0).hypot(qy.max(0.0));
        outside + qx.max(qy).min(0.0)
    }

    /// Smallest ray parameter `t >= 0` where `origin + t * dir` touches the box.
    fn ray_hit(&self, origin: Point2, dir: Point2) -> Option<f64> {
        if self.contains(origin) {
            return Some(0.0);
        }
        let mut t_enter = f64::NEG_INFINITY;
        let mut t_exit = f64::INFINITY;
        for (o, d, lo, hi) in [
            (origin.x, dir.x, self.min.x, self.max.x),
            (origin.y, dir.y, self.min.y, self.max.y),
        ] {
            if d.abs() < 1e-15 {
                if o < lo || o > hi {
                    return None;
                }
            } else {
                let t0 = (lo - o) / d;
                let t1 = (hi - o) / d;
                t_enter = t_enter.max(t0.min(t1));
                t_exit = t_exit.min(t0.max(t1));
            }
        }
        (t_enter <= t_exit && t_enter >= 0.0).then_some(t_enter)
    }
}

/// A bounded obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstacle {
    Circle { center: Point2, radius: f64 },
    Box { min: Point2, max: Point2 },
}

impl Obstacle {
    pub fn circle(cx: f64, cy: f64, radius: f64) -> Self {
        Obstacle::Circle {
            center: Point2::new(cx, cy),
            radius,
        }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Obstacle::Box {
            min: Point2::new(x0.min(x1), y0.min(y1)),
            max: Point2::new(x0.max(x1), y0.max(y1)),
        }
    }

    /// Signed Euclidean distance from `p` to the obstacle boundary (negative inside).
    pub fn signed_distance(&self, p: Point2) -> f64 {
        match *self {
            Obstacle::Circle { center, radius } => p.distance(&center) - radius,
            Obstacle::Box { min, max } => Aabb::new(min, max).signed_distance(p),
        }
    }

    /// First intersection of the ray `origin + t * dir` (`dir` unit length), `t >= 0`.
    /// An origin inside the obstacle hits at `t = 0`.
    pub fn ray_hit(&self, origin: Point2, dir: Point2) -> Option<f64> {
        match *self {
            Obstacle::Circle { center, radius } => {
                let rel = origin.sub(&center);
                let c = rel.dot(&rel) - radius * radius;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let b = dir.dot(&rel);
                let disc = b * b - c;
                if b > 0.0 || disc < 0.0 {
                    return None;
                }
                Some(-b - disc.sqrt())
            }
            Obstacle::Box { min, max } => Aabb::new(min, max).ray_hit(origin, dir),
        }
    }

    fn is_well_formed(&self) -> bool {
        match *self {
            Obstacle::Circle { center, radius } => {
                center.x.is_finite() && center.y.is_finite() && radius.is_finite() && radius > 0.0
            }
            Obstacle::Box { min, max } => {
                [min.x, min.y, max.x, max.y].iter().all(|v| v.is_finite())
                    && max.x > min.x
                    && max.y > min.y
            }
        }
    }
}

/// Thickness of the boundary walls added by [`Environment::with_walls`].
pub const WALL_THICKNESS: f64 = 0.1;

/// A planar world: obstacles, workspace limits, start pose and goal point.
///
/// JSON form:
///
/// ```json
/// {
///   "obstacles": [
///     {"kind": "circle", "center": {"x": 1.0, "y": 0.5}, "radius": 0.3},
///     {"kind": "box", "min": {"x": -1.0, "y": -1.0}, "max": {"x": -0.5, "y": 0.2}}
///   ],
///   "bounds": {"min": {"x": -2.5, "y": -2.5}, "max": {"x": 2.5, "y": 2.5}},
///   "start": {"x": -2.0, "y": 0.0, "theta": 0.0},
///   "goal": {"x": 2.0, "y": 0.0}
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub obstacles: Vec<Obstacle>,
    pub bounds: Aabb,
    pub start: Pose,
    pub goal: Point2,
}

impl Environment {
    /// Encloses the workspace with four box walls placed just outside `bounds`.
    pub fn with_walls(mut self) -> Self {
        let Aabb { min, max } = self.bounds;
        let t = WALL_THICKNESS;
        self.obstacles.extend([
            Obstacle::rect(min.x - t, min.y - t, max.x + t, min.y),
            Obstacle::rect(min.x - t, max.y, max.x + t, max.y + t),
            Obstacle::rect(min.x - t, min.y, min.x, max.y),
            Obstacle::rect(max.x, min.y, max.x + t, max.y),
        ]);
        self
    }

    /// Ground-truth clearance: signed distance to the nearest obstacle.
    pub fn clearance(&self, p: Point2) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks the structural invariants; `min_clearance` is the required
    /// distance between start/goal and every obstacle.
    pub fn validate(&self, min_clearance: f64) -> Result<(), Error> {
        if self.obstacles.iter().any(|o| !o.is_well_formed()) {
            return Err(Error::InvalidEnvironment("malformed obstacle".into()));
        }
        if !(self.bounds.max.x > self.bounds.min.x && self.bounds.max.y > self.bounds.min.y) {
            return Err(Error::InvalidEnvironment("empty workspace bounds".into()));
        }
        if !self.bounds.contains(self.start.position()) {
            return Err(Error::InvalidEnvironment("start outside bounds".into()));
        }
        if !self.bounds.contains(self.goal) {
            return Err(Error::InvalidEnvironment("goal outside bounds".into()));
        }
        if self.clearance(self.start.position()) <= min_clearance {
            return Err(Error::InvalidEnvironment("start too close to an obstacle".into()));
        }
        if self.clearance(self.goal) <= min_clearance {
            return Err(Error::InvalidEnvironment("goal too close to an obstacle".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("environment serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One Lidar sweep in the robot frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub points: Vec<Point2>,
    pub saturated: Vec<bool>,
}

impl LidarScan {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Bearing of ray `i` in the robot frame.
#[inline]
pub fn ray_bearing(i: usize, n_rays: usize) -> f64 {
    TAU * i as f64 / n_rays as f64
}

/// Casts `n_rays` evenly spaced rays from `pose` and returns the first contact
/// of each within `max_range`, or the saturated point at `max_range`.
pub fn raycast(env: &Environment, pose: &Pose, n_rays: usize, max_range: f64) -> LidarScan {
    assert!(n_rays >= 1, "n_rays must be positive");
    assert!(max_range > 0.0, "max_range must be positive");
    let origin = pose.position();
    let mut points = Vec::with_capacity(n_rays);
    let mut saturated = Vec::with_capacity(n_rays);
    for i in 0..n_rays {
        let bearing = ray_bearing(i, n_rays);
        let (s, c) = (pose.theta + bearing).sin_cos();
        let dir = Point2::new(c, s);
        let mut best = max_range;
        for obstacle in &env.obstacles {
            if let Some(t) = obstacle.ray_hit(origin, dir) {
                if t < best {
                    best = t;
                }
            }
        }
        let (ls, lc) = bearing.sin_cos();
        points.push(Point2::new(best * lc, best * ls));
        saturated.push(best >= max_range);
    }
    LidarScan { points, saturated }
}

/// Distance to the closest return in the scan.
pub fn min_range(scan: &LidarScan) -> f64 {
    assert!(!scan.is_empty(), "scan must be nonempty");
    scan.points
        .iter()
        .map(Point2::norm)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn assert_transform_eq(a: Transform, b: Transform, tol: f64) {
        assert_abs_diff_eq!(a.dx, b.dx, epsilon = tol);
        assert_abs_diff_eq!(a.dy, b.dy, epsilon = tol);
        assert_abs_diff_eq!(normalize_angle(a.dtheta - b.dtheta), 0.0, epsilon = tol);
    }

    // 3x3 homogeneous-matrix reference for SE(2).
    fn matrix(t: Transform) -> [[f64; 3]; 3] {
        let (s, c) = t.dtheta.sin_cos();
        [[c, -s, t.dx], [s, c, t.dy], [0.0, 0.0, 1.0]]
    }

    fn matmul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-FRAC_PI_2), -FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(normalize_angle(TAU + 0.25), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn compose_examples() {
        let id = Transform::IDENTITY;
        assert_eq!(id.compose(&id), id);

        let t = Transform::new(1.0, 0.0, FRAC_PI_2);
        assert_transform_eq(t.compose(&t.inverse()), id, 1e-12);

        let got = t.compose(&Transform::new(1.0, 0.0, 0.0));
        let m = matmul(matrix(t), matrix(Transform::new(1.0, 0.0, 0.0)));
        assert_abs_diff_eq!(got.dx, m[0][2], epsilon = 1e-12);
        assert_abs_diff_eq!(got.dy, m[1][2], epsilon = 1e-12);
        assert_transform_eq(got, Transform::new(1.0, 1.0, FRAC_PI_2), 1e-12);
    }

    #[test]
    fn apply_examples() {
        let p = Point2::new(1.0, 2.0);
        assert_eq!(Transform::IDENTITY.apply(p), p);

        let r = Transform::new(0.0, 0.0, FRAC_PI_2).apply(Point2::new(1.0, 0.0));
        assert_abs_diff_eq!(r.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.y, 1.0, epsilon = 1e-12);

        let q = Transform::new(1.0, 0.0, FRAC_PI_2)
            .inverse()
            .apply(Point2::new(1.0, 1.0));
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_environment_saturates() {
        let env = Environment {
            obstacles: vec![],
            bounds: Aabb::new(Point2::new(-5.0, -5.0), Point2::new(5.0, 5.0)),
            start: Pose::default(),
            goal: Point2::new(1.0, 0.0),
        };
        let scan = raycast(&env, &Pose::default(), 16, 3.0);
        assert_eq!(scan.len(), 16);
        assert!(scan.saturated.iter().all(|&s| s));
        assert_abs_diff_eq!(min_range(&scan), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn forward_ray_hits_circle() {
        let mut env = Environment {
            obstacles: vec![Obstacle::circle(3.0, 0.0, 1.0)],
            bounds: Aabb::new(Point2::new(-10.0, -10.0), Point2::new(10.0, 10.0)),
            start: Pose::default(),
            goal: Point2::new(-1.0, 0.0),
        };
        let scan = raycast(&env, &Pose::default(), 32, 3.0);
        assert_abs_diff_eq!(scan.points[0].x, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(scan.points[0].y, 0.0, epsilon = 1e-12);
        assert!(!scan.saturated[0]);

        env.obstacles = vec![Obstacle::circle(8.0, 0.0, 1.0)];
        let scan = raycast(&env, &Pose::default(), 32, 3.0);
        assert!(scan.saturated[0]);
        assert_abs_diff_eq!(scan.points[0].x, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn oblique_ray_matches_quadratic_root() {
        // Ray at 11.25 degrees into a circle at (2, 0.3) of radius 0.5.
        let env = Environment {
            obstacles: vec![Obstacle::circle(2.0, 0.3, 0.5)],
            bounds: Aabb::new(Point2::new(-10.0, -10.0), Point2::new(10.0, 10.0)),
            start: Pose::default(),
            goal: Point2::new(-1.0, 0.0),
        };
        let scan = raycast(&env, &Pose::default(), 32, 3.0);
        let a = ray_bearing(1, 32);
        let (dx, dy) = (a.cos(), a.sin());
        // |t d - c|^2 = r^2  ->  t^2 - 2 t (d.c) + |c|^2 - r^2 = 0
        let dc = dx * 2.0 + dy * 0.3;
        let t = dc - (dc * dc - (4.0 + 0.09 - 0.25)).sqrt();
        assert_abs_diff_eq!(scan.points[1].norm(), t, epsilon = 1e-12);
    }

    #[test]
    fn box_hit_and_inside() {
        let obstacle = Obstacle::rect(1.0, -0.5, 2.0, 0.5);
        let t = obstacle
            .ray_hit(Point2::ORIGIN, Point2::new(1.0, 0.0))
            .unwrap();
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
        assert_eq!(
            obstacle.ray_hit(Point2::new(1.5, 0.0), Point2::new(0.0, 1.0)),
            Some(0.0)
        );
        assert_eq!(
            obstacle.ray_hit(Point2::ORIGIN, Point2::new(-1.0, 0.0)),
            None
        );
        assert_abs_diff_eq!(obstacle.signed_distance(Point2::new(1.5, 0.0)), -0.5);
        assert_abs_diff_eq!(obstacle.signed_distance(Point2::new(3.0, 1.5)), 2f64.sqrt());
    }

    #[test]
    fn inside_obstacle_gives_zero_ranges() {
        let env = Environment {
            obstacles: vec![Obstacle::circle(0.0, 0.0, 1.0)],
            bounds: Aabb::new(Point2::new(-10.0, -10.0), Point2::new(10.0, 10.0)),
            start: Pose::new(5.0, 0.0, 0.0),
            goal: Point2::new(-5.0, 0.0),
        };
        let scan = raycast(&env, &Pose::default(), 8, 3.0);
        assert_eq!(min_range(&scan), 0.0);
    }

    #[test]
    fn min_range_examples() {
        let scan = LidarScan {
            points: vec![Point2::new(3.0, 0.0), Point2::new(0.0, 3.0)],
            saturated: vec![true, true],
        };
        assert_eq!(min_range(&scan), 3.0);
        let scan = LidarScan {
            points: vec![Point2::new(0.1, 0.0), Point2::new(0.0, 3.0)],
            saturated: vec![false, true],
        };
        assert_abs_diff_eq!(min_range(&scan), 0.1);
    }

    #[test]
    fn validate_rejects_bad_start() {
        let env = Environment {
            obstacles: vec![Obstacle::circle(0.0, 0.0, 1.0)],
            bounds: Aabb::new(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0)),
            start: Pose::new(1.1, 0.0, 0.0),
            goal: Point2::new(-2.5, 0.0),
        };
        assert!(env.validate(0.2).is_err());
        let env = Environment {
            start: Pose::new(2.0, 0.0, 0.0),
            ..env
        };
        assert!(env.validate(0.2).is_ok());
        assert!(env.clone().with_walls().validate(0.2).is_ok());
    }

    #[test]
    fn environment_json_round_trip() {
        let env = Environment {
            obstacles: vec![
                Obstacle::circle(1.0, 0.5, 0.3),
                Obstacle::rect(-1.0, -1.0, -0.5, 0.2),
            ],
            bounds: Aabb::new(Point2::new(-2.5, -2.5), Point2::new(2.5, 2.5)),
            start: Pose::new(-2.0, 0.0, 0.1),
            goal: Point2::new(2.0, 0.0),
        };
        let text = env.to_json();
        assert!(text.contains("\"kind\": \"circle\""));
        assert!(text.contains("\"kind\": \"box\""));
        let back = Environment::from_json(&text).unwrap();
        assert_eq!(back, env);
        assert_eq!(back.to_json(), text);
    }
}
