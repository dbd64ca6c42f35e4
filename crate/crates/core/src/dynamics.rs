//! Discrete-time Dubins car and the candidate control grid.

use serde::{Deserialize, Serialize};

use crate::geometry::{Pose, Transform};

/// Forward speed and turn rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub v: f64,
    pub omega: f64,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput { v: 0.0, omega: 0.0 };

    pub const fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    /// Euclidean norm of `(v, omega)`.
    pub fn norm(&self) -> f64 {
        self.v.hypot(self.omega)
    }
}

/// Actuator limits: `v` in `[0, v_max]`, `omega` in `[-omega_max, omega_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlLimits {
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            omega_max: 1.5,
        }
    }
}

impl ControlLimits {
    pub fn admits(&self, u: &ControlInput) -> bool {
        u.v >= -1e-12 && u.v <= self.v_max + 1e-12 && u.omega.abs() <= self.omega_max + 1e-12
    }
}

/// Finite set of candidate inputs searched by the controllers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlGrid {
    candidates: Vec<ControlInput>,
}

impl ControlGrid {
    /// Uniform `n_v x n_omega` grid over the limits; velocity-major order.
    /// Always contains the zero input when `n_omega` is odd; otherwise the
    /// zero input is appended.
    pub fn uniform(limits: ControlLimits, n_v: usize, n_omega: usize) -> Self {
        assert!(n_v >= 1 && n_omega >= 1, "grid needs at least one value per axis");
        let lerp = |lo: f64, hi: f64, i: usize, n: usize| {
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut candidates = Vec::with_capacity(n_v * n_omega + 1);
        for i in 0..n_v {
            let v = if n_v == 1 { 0.0 } else { lerp(0.0, limits.v_max, i, n_v) };
            for j in 0..n_omega {
                let omega = if n_omega == 1 {
                    0.0
                } else {
                    lerp(-limits.omega_max, limits.omega_max, j, n_omega)
                };
                // Snap the midpoint to an exact zero.
                let omega = if omega.abs() < 1e-12 { 0.0 } else { omega };
                candidates.push(ControlInput::new(v, omega));
            }
        }
        Self::from_candidates(candidates)
    }

    /// Builds a grid from explicit candidates, removing duplicates (first
    /// occurrence wins) and appending the zero input if missing.
    pub fn from_candidates(candidates: Vec<ControlInput>) -> Self {
        let mut out: Vec<ControlInput> = Vec::with_capacity(candidates.len() + 1);
        for u in candidates {
            if !out.contains(&u) {
                out.push(u);
            }
        }
        if !out.contains(&ControlInput::ZERO) {
            out.push(ControlInput::ZERO);
        }
        Self { candidates: out }
    }

    pub fn candidates(&self) -> &[ControlInput] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn zero_index(&self) -> usize {
        self.candidates
            .iter()
            .position(|u| *u == ControlInput::ZERO)
            .expect("grid always contains the zero input")
    }
}

/// Motion over `dt` under constant `u`, expressed in the robot frame at the
/// start of the interval. Exact arc integration of the unicycle.
pub fn local_transform(u: ControlInput, dt: f64) -> Transform {
    assert!(dt > 0.0, "dt must be positive");
    let heading = u.omega * dt;
    if u.omega.abs() < 1e-9 {
        Transform::new(u.v * dt, 0.0, heading)
    } else {
        let radius = u.v / u.omega;
        let (s, c) = heading.sin_cos();
        Transform::new(radius * s, radius * (1.0 - c), heading)
    }
}

/// Advances a world pose by one zero-order-hold interval.
pub fn dubins_step(pose: &Pose, u: ControlInput, dt: f64) -> Pose {
    pose.then(&local_transform(u, dt))
}
