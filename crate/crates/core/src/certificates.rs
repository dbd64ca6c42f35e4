//! Observation-space barrier (`h`) and Lyapunov (`V`) functions.
//!
//! ```text
//! e(o)       = max_i e_theta(o_i)                      (element-wise)
//! h(o)       = h_sigma(e(o)) - min_i |o_i| + d_c       (h <= 0 safe, h >= 0 unsafe)
//! V(rho,phi) = (rho^2 + (1 - cos phi) / 2) * (1 + exp(V_omega(rho, sin phi, cos phi))) / 2
//! ```
//!
//! The network scales the prior instead of adding to it, so `V` is zero at
//! the goal and at least half the prior elsewhere. With an additive term,
//! `V < 0` lets the zero input satisfy the decrease condition everywhere.
//!
//! `e_theta` maps each 2-D return to a 48-D feature. Because the pooling is a
//! maximum, `e(o)` does not depend on the order of the returns.

use std::path::Path;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{LidarScan, Point2};
use crate::nn::{rows, ForwardTrace, GradientTape, Mlp, MlpSnapshot};
use crate::Error;

pub const FEATURE_DIM: usize = 48;
pub const HIDDEN_DIM: usize = 48;

pub const ENCODER_DIMS: [usize; 4] = [2, HIDDEN_DIM, HIDDEN_DIM, FEATURE_DIM];
pub const BARRIER_HEAD_DIMS: [usize; 4] = [FEATURE_DIM, HIDDEN_DIM, HIDDEN_DIM, 1];
pub const LYAPUNOV_DIMS: [usize; 4] = [3, HIDDEN_DIM, HIDDEN_DIM, 1];

/// Scalars shared by both certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateParams {
    /// Collision distance (m).
    pub d_c: f64,
    /// Barrier decay rate per control step, in `[0, 1)`.
    pub alpha_h: f64,
    /// Lyapunov decay rate per control step, in `[0, 1)`.
    pub alpha_v: f64,
}

impl Default for CertificateParams {
    fn default() -> Self {
        Self {
            d_c: 0.2,
            alpha_h: 0.9,
            alpha_v: 0.9,
        }
    }
}

impl CertificateParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.d_c > 0.0) {
            return Err(Error::Config("d_c must be positive".into()));
        }
        for (name, a) in [("alpha_h", self.alpha_h), ("alpha_v", self.alpha_v)] {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::Config(format!("{name} must lie in [0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateModel {
    /// `e_theta`: 2 -> 48 -> 48 -> 48.
    pub encoder: Mlp,
    /// `h_sigma`: 48 -> 48 -> 48 -> 1.
    pub barrier_head: Mlp,
    /// `V_omega`: 3 -> 48 -> 48 -> 1, input `(rho, sin phi, cos phi)`.
    pub lyapunov: Mlp,
    pub params: CertificateParams,
    /// Lidar resolution the model was trained with.
    pub n_rays: usize,
    /// Seed used to initialize (and train) the model.
    pub seed: u64,
}

/// Gradient buffers for all three networks.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradient {
    pub encoder: GradientTape,
    pub barrier_head: GradientTape,
    pub lyapunov: GradientTape,
}

impl ModelGradient {
    pub fn add_assign(&mut self, other: &ModelGradient) {
        self.encoder.add_assign(&other.encoder);
        self.barrier_head.add_assign(&other.barrier_head);
        self.lyapunov.add_assign(&other.lyapunov);
    }

    pub fn scale(&mut self, factor: f64) {
        self.encoder.scale(factor);
        self.barrier_head.scale(factor);
        self.lyapunov.scale(factor);
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.encoder.flatten();
        out.extend(self.barrier_head.flatten());
        out.extend(self.lyapunov.flatten());
        out
    }

    pub fn norm(&self) -> f64 {
        (self.encoder.squared_norm() + self.barrier_head.squared_norm() + self.lyapunov.squared_norm())
            .sqrt()
    }
}

/// Element-wise max over groups of `group` consecutive rows, with the first
/// row index achieving each maximum.
fn max_pool(features: &Array2<f64>, group: usize) -> (Array2<f64>, Vec<usize>) {
    let n_groups = features.nrows() / group;
    let width = features.ncols();
    let mut pooled = Array2::from_elem((n_groups, width), f64::NEG_INFINITY);
    let mut argmax = vec![0usize; n_groups * width];
    for g in 0..n_groups {
        for r in 0..group {
            let row = features.row(g * group + r);
            let mut out = pooled.row_mut(g);
            for (k, &value) in row.iter().enumerate() {
                if value > out[k] {
                    out[k] = value;
                    argmax[g * width + k] = g * group + r;
                }
            }
        }
    }
    (pooled, argmax)
}

/// Lyapunov network input for a goal at range `rho` and bearing `phi`.
#[inline]
pub fn lyapunov_input(rho: f64, phi: f64) -> [f64; 3] {
    let (s, c) = phi.sin_cos();
    [rho, s, c]
}

/// The hand-designed part of `V`.
#[inline]
pub fn lyapunov_prior(rho: f64, phi: f64) -> f64 {
    rho * rho + 0.5 * (1.0 - phi.cos())
}

/// Factor the Lyapunov network applies to the prior; 1 at zero output and
/// never below 1/2.
#[inline]
pub fn lyapunov_scale(l: f64) -> f64 {
    0.5 * (1.0 + l.exp())
}

fn min_norm(points: &[f64]) -> f64 {
    points
        .chunks_exact(2)
        .map(|p| p[0].hypot(p[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Flattens points to `[x0, y0, x1, y1, ...]`.
pub fn flatten_points(points: &[Point2]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y]).collect()
}

impl CertificateModel {
    pub fn new(params: CertificateParams, n_rays: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            encoder: Mlp::new(&ENCODER_DIMS, &mut rng),
            barrier_head: Mlp::new(&BARRIER_HEAD_DIMS, &mut rng),
            lyapunov: Mlp::new(&LYAPUNOV_DIMS, &mut rng),
            params,
            n_rays,
            seed,
        }
    }

    /// All networks zero: `h` and `V` reduce to their distance priors.
    pub fn zeroed(params: CertificateParams, n_rays: usize) -> Self {
        Self {
            encoder: Mlp::zeros(&ENCODER_DIMS),
            barrier_head: Mlp::zeros(&BARRIER_HEAD_DIMS),
            lyapunov: Mlp::zeros(&LYAPUNOV_DIMS),
            params,
            n_rays,
            seed: 0,
        }
    }

    pub fn zero_gradient(&self) -> ModelGradient {
        ModelGradient {
            encoder: self.encoder.zero_tape(),
            barrier_head: self.barrier_head.zero_tape(),
            lyapunov: self.lyapunov.zero_tape(),
        }
    }

    pub fn encode(&self, scan: &LidarScan) -> Vec<f64> {
        assert!(!scan.is_empty(), "scan must be nonempty");
        let flat = flatten_points(&scan.points);
        let features = self.encoder.forward_batch(rows(&flat, 2));
        max_pool(&features, scan.len()).0.row(0).to_vec()
    }

    pub fn cbf_value(&self, scan: &LidarScan) -> f64 {
        assert!(!scan.is_empty(), "scan must be nonempty");
        self.cbf_batch(&flatten_points(&scan.points), scan.len())[0]
    }

    pub fn clf_value(&self, rho: f64, phi: f64) -> f64 {
        assert!(rho >= 0.0, "range must be nonnegative");
        let l = self.lyapunov.forward(&lyapunov_input(rho, phi))[0];
        lyapunov_prior(rho, phi) * lyapunov_scale(l)
    }

    /// `h` for several scans stored back to back: `points` holds
    /// `n_scans * points_per_scan` `(x, y)` pairs.
    pub fn cbf_batch(&self, points: &[f64], points_per_scan: usize) -> Vec<f64> {
        assert!(points_per_scan > 0, "scan must be nonempty");
        assert_eq!(points.len() % (2 * points_per_scan), 0, "ragged scan batch");
        let features = self.encoder.forward_batch(rows(points, 2));
        let (pooled, _) = max_pool(&features, points_per_scan);
        let head = self.barrier_head.forward_batch(pooled.view());
        points
            .chunks_exact(2 * points_per_scan)
            .zip(head.column(0))
            .map(|(scan, &learned)| learned - min_norm(scan) + self.params.d_c)
            .collect()
    }

    /// `V` for several `(rho, phi)` pairs.
    pub fn clf_batch(&self, goals: &[(f64, f64)]) -> Vec<f64> {
        let inputs: Vec<f64> = goals
            .iter()
            .flat_map(|&(rho, phi)| lyapunov_input(rho, phi))
            .collect();
        let learned = self.lyapunov.forward_batch(rows(&inputs, 3));
        goals
            .iter()
            .zip(learned.column(0))
            .map(|(&(rho, phi), &l)| lyapunov_prior(rho, phi) * lyapunov_scale(l))
            .collect()
    }

    /// Adds `upstream * dh/dparams` for one scan (flat `(x, y)` pairs) and
    /// returns `h`.
    pub fn accumulate_cbf_gradient(
        &self,
        points: &[f64],
        upstream: f64,
        grad: &mut ModelGradient,
    ) -> f64 {
        let n = points.len() / 2;
        let enc_trace: ForwardTrace = self.encoder.forward_trace(rows(points, 2));
        let (pooled, argmax) = max_pool(enc_trace.output(), n);
        let head_trace = self.barrier_head.forward_trace(pooled.view());
        let h = head_trace.output()[[0, 0]] - min_norm(points) + self.params.d_c;
        if upstream == 0.0 {
            return h;
        }
        let up = Array2::from_elem((1, 1), upstream);
        let d_feature = self
            .barrier_head
            .backward_batch(&head_trace, up.view(), &mut grad.barrier_head);
        // Route each pooled coordinate's gradient to the return that won the max.
        let mut d_points = Array2::zeros((n, FEATURE_DIM));
        for (k, &winner) in argmax.iter().enumerate() {
            d_points[[winner, k]] += d_feature[[0, k]];
        }
        self.encoder
            .backward_batch(&enc_trace, d_points.view(), &mut grad.encoder);
        h
    }

    /// Adds `upstream * dV/dparams` and returns `V`.
    pub fn accumulate_clf_gradient(
        &self,
        rho: f64,
        phi: f64,
        upstream: f64,
        grad: &mut ModelGradient,
    ) -> f64 {
        let input = lyapunov_input(rho, phi);
        let trace = self.lyapunov.forward_trace(rows(&input, 3));
        let l = trace.output()[[0, 0]];
        let prior = lyapunov_prior(rho, phi);
        let v = prior * lyapunov_scale(l);
        if upstream != 0.0 {
            let up = Array2::from_elem((1, 1), 0.5 * prior * l.exp() * upstream);
            self.lyapunov
                .backward_batch(&trace, up.view(), &mut grad.lyapunov);
        }
        v
    }

    /// Squared parameter norm of the barrier head and Lyapunov network.
    pub fn regularized_norm(&self) -> f64 {
        self.barrier_head.squared_norm() + self.lyapunov.squared_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.encoder.is_finite() && self.barrier_head.is_finite() && self.lyapunov.is_finite()
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            metadata: CheckpointMetadata {
                n_rays: self.n_rays,
                d_c: self.params.d_c,
                alpha_h: self.params.alpha_h,
                alpha_v: self.params.alpha_v,
                seed: self.seed,
            },
            encoder: self.encoder.to_snapshot(),
            barrier_head: self.barrier_head.to_snapshot(),
            lyapunov: self.lyapunov.to_snapshot(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self, Error> {
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format {:?}", ckpt.format)));
        }
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", ckpt.version)));
        }
        let encoder = Mlp::from_snapshot(&ckpt.encoder)?;
        let barrier_head = Mlp::from_snapshot(&ckpt.barrier_head)?;
        let lyapunov = Mlp::from_snapshot(&ckpt.lyapunov)?;
        if encoder.dims() != ENCODER_DIMS
            || barrier_head.dims() != BARRIER_HEAD_DIMS
            || lyapunov.dims() != LYAPUNOV_DIMS
        {
            return Err(Error::Checkpoint("network shapes do not match the architecture".into()));
        }
        let params = CertificateParams {
            d_c: ckpt.metadata.d_c,
            alpha_h: ckpt.metadata.alpha_h,
            alpha_v: ckpt.metadata.alpha_v,
        };
        params.validate()?;
        Ok(Self {
            encoder,
            barrier_head,
            lyapunov,
            params,
            n_rays: ckpt.metadata.n_rays,
            seed: ckpt.metadata.seed,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_checkpoint()).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        Self::from_checkpoint(&serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub const CHECKPOINT_FORMAT: &str = "certnav-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMetadata {
    pub n_rays: usize,
    pub d_c: f64,
    pub alpha_h: f64,
    #[serde(rename = "alpha_V")]
    pub alpha_v: f64,
    pub seed: u64,
}

/// On-disk model: layer shapes plus row-major parameters for each network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub metadata: CheckpointMetadata,
    pub encoder: MlpSnapshot,
    pub barrier_head: MlpSnapshot,
    pub lyapunov: MlpSnapshot,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::seq::SliceRandom;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn scan_of(points: Vec<Point2>) -> LidarScan {
        let saturated = vec![false; points.len()];
        LidarScan { points, saturated }
    }

    fn random_scan(rng: &mut ChaCha8Rng, n: usize) -> LidarScan {
        scan_of(
            (0..n)
                .map(|_| Point2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                .collect(),
        )
    }

    #[test]
    fn duplicated_point_encodes_like_one_point() {
        let model = CertificateModel::new(CertificateParams::default(), 32, 1);
        let p = Point2::new(0.7, -1.1);
        let one = model.encode(&scan_of(vec![p]));
        let many = model.encode(&scan_of(vec![p; 9]));
        assert_eq!(one, many);
    }

    #[test]
    fn encode_is_brute_force_max() {
        let model = CertificateModel::new(CertificateParams::default(), 32, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let scan = random_scan(&mut rng, 32);
        let per_point: Vec<Vec<f64>> = scan
            .points
            .iter()
            .map(|p| model.encoder.forward(&[p.x, p.y]))
            .collect();
        let feature = model.encode(&scan);
        for k in 0..FEATURE_DIM {
            let want = per_point.iter().map(|f| f[k]).fold(f64::NEG_INFINITY, f64::max);
            assert_abs_diff_eq!(feature[k], want, epsilon = 1e-12);
        }
    }

    #[test]
    fn encode_permutation_invariant() {
        let model = CertificateModel::new(CertificateParams::default(), 32, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scan = random_scan(&mut rng, 32);
        let base = model.encode(&scan);
        let mut shuffled = scan.clone();
        shuffled.points.shuffle(&mut rng);
        assert_eq!(model.encode(&shuffled), base);
    }

    #[test]
    fn barrier_prior_values() {
        let params = CertificateParams::default();
        let model = CertificateModel::zeroed(params, 4);
        let at = |r: f64| scan_of(vec![Point2::new(r, 0.0), Point2::new(0.0, 3.0)]);
        assert_abs_diff_eq!(model.cbf_value(&at(params.d_c)), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(model.cbf_value(&at(2.0 * params.d_c)), -params.d_c, epsilon = 1e-15);
    }

    #[test]
    fn barrier_composes_encoder_and_head() {
        let model = CertificateModel::new(CertificateParams::default(), 32, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let scan = random_scan(&mut rng, 32);
        let head = model.barrier_head.forward(&model.encode(&scan))[0];
        let want = head - crate::geometry::min_range(&scan) + model.params.d_c;
        assert_abs_diff_eq!(model.cbf_value(&scan), want, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_prior_values() {
        let model = CertificateModel::zeroed(CertificateParams::default(), 32);
        assert_eq!(model.clf_value(0.0, 0.0), 0.0);
        assert_abs_diff_eq!(model.clf_value(1.0, PI), 2.0, epsilon = 1e-15);

        let trained = CertificateModel::new(CertificateParams::default(), 32, 7);
        let (s, c) = FRAC_PI_4.sin_cos();
        let net = trained.lyapunov.forward(&[0.5, s, c])[0];
        let want = (0.25 + (1.0 - 2f64.sqrt() / 2.0) / 2.0) * (1.0 + net.exp()) / 2.0;
        assert_abs_diff_eq!(trained.clf_value(0.5, FRAC_PI_4), want, epsilon = 1e-12);
    }

    #[test]
    fn batch_matches_single() {
        let model = CertificateModel::new(CertificateParams::default(), 32, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let scans: Vec<LidarScan> = (0..5).map(|_| random_scan(&mut rng, 32)).collect();
        let flat: Vec<f64> = scans.iter().flat_map(|s| flatten_points(&s.points)).collect();
        let batch = model.cbf_batch(&flat, 32);
        for (scan, b) in scans.iter().zip(&batch) {
            assert_eq!(model.cbf_value(scan), *b);
        }
        let goals = [(0.5, 0.3), (2.0, -2.0)];
        let vs = model.clf_batch(&goals);
        for ((rho, phi), v) in goals.iter().zip(&vs) {
            assert_abs_diff_eq!(model.clf_value(*rho, *phi), *v, epsilon = 1e-12);
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let model = CertificateModel::new(CertificateParams::default(), 32, 12);
        let text = model.to_json();
        let back = CertificateModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"alpha_V\""));
    }

    #[test]
    fn checkpoint_rejects_wrong_architecture() {
        let model = CertificateModel::new(CertificateParams::default(), 32, 13);
        let mut ckpt = model.to_checkpoint();
        ckpt.lyapunov = Mlp::zeros(&[3, 4, 1]).to_snapshot();
        assert!(CertificateModel::from_checkpoint(&ckpt).is_err());
    }
}
