//! Approximate one-step lookahead.
//!
//! A candidate control implies a rigid motion `T_u` of the robot frame. The
//! next scan is predicted by moving every current return by `T_u^-1` (no
//! re-casting, so occlusion changes are missed), and the goal vector is moved
//! the same way, which is exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::CertificateModel;
use crate::dynamics::{local_transform, ControlGrid, ControlInput};
use crate::geometry::{normalize_angle, raycast, Environment, LidarScan, Point2, Pose, Transform};

/// What the controller sees: a scan plus range and bearing to the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub scan: LidarScan,
    pub rho: f64,
    pub phi: f64,
}

impl Observation {
    pub fn new(scan: LidarScan, rho: f64, phi: f64) -> Self {
        assert!(rho >= 0.0, "range must be nonnegative");
        Self {
            scan,
            rho,
            phi: normalize_angle(phi),
        }
    }

    /// Simulated sensing at `pose`.
    pub fn observe(env: &Environment, pose: &Pose, n_rays: usize, max_range: f64) -> Self {
        let scan = raycast(env, pose, n_rays, max_range);
        let (rho, phi) = pose.range_bearing(env.goal);
        Self { scan, rho, phi }
    }
}

pub fn predict_scan(scan: &LidarScan, t: &Transform) -> LidarScan {
    let inv = t.inverse();
    LidarScan {
        points: scan.points.iter().map(|p| inv.apply(*p)).collect(),
        saturated: scan.saturated.clone(),
    }
}

pub fn predict_goal(rho: f64, phi: f64, t: &Transform) -> (f64, f64) {
    assert!(rho >= 0.0, "range must be nonnegative");
    let (s, c) = phi.sin_cos();
    let g = t.inverse().apply(Point2::new(rho * c, rho * s));
    (g.norm(), normalize_angle(g.angle()))
}

/// Predicted `(h, V)` after applying `u` for `dt`.
pub fn predict_certificates(
    model: &CertificateModel,
    obs: &Observation,
    u: ControlInput,
    dt: f64,
) -> (f64, f64) {
    let t = local_transform(u, dt);
    let h = model.cbf_value(&predict_scan(&obs.scan, &t));
    let (rho, phi) = predict_goal(obs.rho, obs.phi, &t);
    (h, model.clf_value(rho, phi))
}

/// Current and predicted certificate values for every candidate of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEvaluation {
    pub h_now: f64,
    pub v_now: f64,
    /// Indexed like the grid.
    pub h_next: Vec<f64>,
    pub v_next: Vec<f64>,
}

fn moved_points(points: &[Point2], u: ControlInput, dt: f64, out: &mut Vec<f64>) {
    let inv = local_transform(u, dt).inverse();
    for p in points {
        let q = inv.apply(*p);
        out.push(q.x);
        out.push(q.y);
    }
}

fn barrier_for(model: &CertificateModel, scan: &LidarScan, inputs: &[ControlInput], dt: f64) -> Vec<f64> {
    let mut flat = Vec::with_capacity(inputs.len() * scan.len() * 2);
    for u in inputs {
        moved_points(&scan.points, *u, dt, &mut flat);
    }
    model.cbf_batch(&flat, scan.len())
}

/// Number of candidates scored per batch when running in parallel.
const PARALLEL_CHUNK: usize = 16;

/// Scores every grid candidate with the lookahead. With `parallel`, chunks
/// of candidates are evaluated on the rayon pool; results are identical.
pub fn evaluate_candidates(
    model: &CertificateModel,
    obs: &Observation,
    grid: &ControlGrid,
    dt: f64,
    parallel: bool,
) -> CandidateEvaluation {
    let candidates = grid.candidates();
    let h_now = model.cbf_value(&obs.scan);
    let v_now = model.clf_value(obs.rho, obs.phi);
    let h_next = if parallel {
        candidates
            .par_chunks(PARALLEL_CHUNK)
            .flat_map_iter(|chunk| barrier_for(model, &obs.scan, chunk, dt))
            .collect()
    } else {
        barrier_for(model, &obs.scan, candidates, dt)
    };
    let goals: Vec<(f64, f64)> = candidates
        .iter()
        .map(|u| predict_goal(obs.rho, obs.phi, &local_transform(*u, dt)))
        .collect();
    let v_next = model.clf_batch(&goals);
    CandidateEvaluation {
        h_now,
        v_now,
        h_next,
        v_next,
    }
}
