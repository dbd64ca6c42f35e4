//! Certificate learning and sampling-based verification.
//!
//! The loss over a batch of labeled observations is
//!
//! ```text
//! L = mean( a1 ReLU(eps + h) 1_safe + a2 ReLU(eps - h) 1_unsafe + a3 L_g + a4 L_c ) + l2 (|h_sigma|^2 + |V_omega|^2)
//! ```
//!
//! where `L_g` is the optimal value of the relaxed goal-seeking objective over
//! the training grid. Gradients of `L_g` flow through the minimizing candidate
//! only; the argmin itself is treated as constant.
//!
//! `L_c` is the Huber loss (width `CONSISTENCY_DELTA`) of
//! `h(predicted scan) - h(true scan)` for one random input per sample, so
//! that the barrier agrees with itself across the one-step lookahead.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::{flatten_points, CertificateModel, CertificateParams, ModelGradient};
use crate::controller::GoalSeekingWeights;
use crate::dynamics::{dubins_step, local_transform, ControlGrid, ControlInput, ControlLimits};
use crate::geometry::{min_range, raycast, Environment, LidarScan, Pose, Transform};
use crate::lookahead::{evaluate_candidates, predict_goal, Observation};
use crate::nn::sgd_step;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Safe,
    Unsafe,
    Boundary,
}

/// Labels a scan by its closest return.
pub fn label_for(min_range: f64, d_c: f64, margin: f64) -> Label {
    if min_range <= d_c {
        Label::Unsafe
    } else if min_range >= d_c + margin {
        Label::Safe
    } else {
        Label::Boundary
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub obs: Observation,
    pub label: Label,
    pub source_env: usize,
    pub source_pose: Pose,
    /// True scan one step after applying `u`, when both poses are more
    /// than `d_c` from every obstacle.
    #[serde(default)]
    pub next: Option<NextScan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextScan {
    pub u: ControlInput,
    pub scan: LidarScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub n_samples: usize,
    pub validation_fraction: f64,
    pub epochs: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Weight of the lookahead consistency term.
    pub a4: f64,
    /// Classification margin.
    pub eps_h: f64,
    pub l2: f64,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
    /// Width of the band above `d_c` left out of the classification terms.
    pub label_margin: f64,
    pub certificate: CertificateParams,
    pub weights: GoalSeekingWeights,
    pub gamma_v: f64,
    pub gamma_h: f64,
    pub dt: f64,
    pub limits: ControlLimits,
    /// Grid used inside `L_g`; coarser than the controller grid.
    pub grid_v: usize,
    pub grid_omega: usize,
    pub n_rays: usize,
    pub max_range: f64,
    /// Measure the decrease residual inside `L_g` relative to `V_t`.
    pub relative_clf: bool,
    /// Cast training scans with a random bearing offset within one ray
    /// spacing, so returns between the ray directions are seen in training.
    pub phase_jitter: bool,
    /// Extra decrease demanded by `L_g` on top of `alpha_V` (relative
    /// residual only), so the trained certificate is not merely marginal.
    pub clf_margin: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            validation_fraction: 0.1,
            epochs: 72,
            a1: 100.0,
            a2: 100.0,
            a3: 1.0,
            a4: 100.0,
            eps_h: 0.1,
            l2: 1e-4,
            lr: 1e-3,
            batch: 64,
            seed: 0,
            label_margin: 0.05,
            certificate: CertificateParams::default(),
            weights: GoalSeekingWeights::default(),
            gamma_v: 0.0,
            gamma_h: 0.0,
            dt: 0.1,
            limits: ControlLimits::default(),
            grid_v: 3,
            grid_omega: 5,
            n_rays: 32,
            max_range: 3.0,
            relative_clf: true,
            phase_jitter: true,
            clf_margin: 0.03,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.certificate.validate()?;
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config("validation_fraction must lie in (0, 1)".into()));
        }
        if !(self.a1 > 0.0 && self.a2 > 0.0 && self.a3 > 0.0) {
            return Err(Error::Config("loss coefficients must be positive".into()));
        }
        if !(self.lr > 0.0) || self.batch == 0 || self.l2 < 0.0 || !(self.eps_h > 0.0) {
            return Err(Error::Config("lr, batch and eps_h must be positive, l2 nonnegative".into()));
        }
        if self.grid_v == 0 || self.grid_omega == 0 || self.n_rays == 0 || !(self.max_range > 0.0) {
            return Err(Error::Config("grid, n_rays and max_range must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> ControlGrid {
        ControlGrid::uniform(self.limits, self.grid_v, self.grid_omega)
    }
}

/// Uniform pose over the workspace with positive clearance. Gives up after
/// `10_000` draws.
pub fn sample_free_pose<R: Rng + ?Sized>(env: &Environment, rng: &mut R) -> Option<Pose> {
    let b = env.bounds;
    for _ in 0..10_000 {
        let x = rng.gen_range(b.min.x..b.max.x);
        let y = rng.gen_range(b.min.y..b.max.y);
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let pose = Pose::new(x, y, theta);
        if env.clearance(pose.position()) > 0.0 {
            return Some(pose);
        }
    }
    None
}

fn pick_env<R: Rng + ?Sized>(envs: &[Environment], rng: &mut R) -> usize {
    if envs.len() == 1 {
        0
    } else {
        rng.gen_range(0..envs.len())
    }
}

/// Draws `cfg.n_samples` observations: environment uniformly, then a free
/// pose uniformly, then a ray cast.
pub fn sample_dataset<R: Rng + ?Sized>(
    envs: &[Environment],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<LabeledSample>, Error> {
    if envs.is_empty() {
        return Err(Error::Config("at least one environment is required".into()));
    }
    let mut poses = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let e = pick_env(envs, rng);
        let pose = sample_free_pose(&envs[e], rng)
            .ok_or_else(|| Error::InvalidEnvironment(format!("environment {e} has no free space")))?;
        let u = ControlInput::new(
            rng.gen_range(0.0..=cfg.limits.v_max),
            rng.gen_range(-cfg.limits.omega_max..=cfg.limits.omega_max),
        );
        let phase = if cfg.phase_jitter {
            rng.gen_range(0.0..std::f64::consts::TAU / cfg.n_rays as f64)
        } else {
            0.0
        };
        poses.push((e, pose, u, phase));
    }
    Ok(poses
        .par_iter()
        .map(|&(e, pose, u, phase)| {
            let env = &envs[e];
            let mut obs = Observation::observe(env, &pose, cfg.n_rays, cfg.max_range);
            if phase != 0.0 {
                let turned = Pose::new(pose.x, pose.y, pose.theta + phase);
                let back = Transform::new(0.0, 0.0, phase);
                let mut scan = raycast(env, &turned, cfg.n_rays, cfg.max_range);
                scan.points.iter_mut().for_each(|p| *p = back.apply(*p));
                obs.scan = scan;
            }
            let label = label_for(min_range(&obs.scan), cfg.certificate.d_c, cfg.label_margin);
            let moved = dubins_step(&pose, u, cfg.dt);
            let d_c = cfg.certificate.d_c;
            let free = |p: &Pose| env.clearance(p.position()) > d_c;
            let next = (free(&pose) && free(&moved)).then(|| NextScan {
                u,
                scan: Observation::observe(env, &moved, cfg.n_rays, cfg.max_range).scan,
            });
            LabeledSample {
                obs,
                label,
                source_env: e,
                source_pose: pose,
                next,
            }
        })
        .collect())
}

/// Relaxed goal-seeking objective at every candidate.
/// Decrease residual used by `L_g` and its partials with respect to
/// `(V_next, V_now)`.
fn clf_residual(v_next: f64, v_now: f64, alpha_v: f64, cfg: &TrainConfig) -> (f64, f64, f64) {
    if cfg.relative_clf && v_now > 0.0 {
        let r = (v_next + cfg.gamma_v) / v_now - alpha_v + cfg.clf_margin;
        (r, 1.0 / v_now, -(v_next + cfg.gamma_v) / (v_now * v_now))
    } else {
        (v_next - alpha_v * v_now + cfg.gamma_v, 1.0, -alpha_v)
    }
}

fn candidate_costs(
    model: &CertificateModel,
    obs: &Observation,
    grid: &ControlGrid,
    cfg: &TrainConfig,
) -> (crate::lookahead::CandidateEvaluation, Vec<f64>) {
    let eval = evaluate_candidates(model, obs, grid, cfg.dt, false);
    let w = cfg.weights;
    let a_h = model.params.alpha_h;
    let a_v = model.params.alpha_v;
    let costs = grid
        .candidates()
        .iter()
        .enumerate()
        .map(|(k, u)| {
            w.effort * u.norm()
                + w.clf * clf_residual(eval.v_next[k], eval.v_now, a_v, cfg).0.max(0.0)
                + w.cbf * (eval.h_next[k] - a_h * eval.h_now + cfg.gamma_h).max(0.0)
        })
        .collect();
    (eval, costs)
}

fn argmin(costs: &[f64], grid: &ControlGrid) -> usize {
    let c = grid.candidates();
    let mut best = 0;
    for k in 1..costs.len() {
        if costs[k] < costs[best] || (costs[k] == costs[best] && c[k].norm() < c[best].norm()) {
            best = k;
        }
    }
    best
}

/// `L_g`: minimum of the relaxed goal-seeking objective over `grid`.
pub fn relaxed_goal_cost(model: &CertificateModel, obs: &Observation, grid: &ControlGrid, cfg: &TrainConfig) -> f64 {
    let (_, costs) = candidate_costs(model, obs, grid, cfg);
    costs[argmin(&costs, grid)]
}

const CONSISTENCY_DELTA: f64 = 0.1;

/// Huber loss `d^2` near zero, linear beyond `delta`; returns value and slope.
fn huber(d: f64, delta: f64) -> (f64, f64) {
    if d.abs() <= delta {
        (d * d, 2.0 * d)
    } else {
        (delta * (2.0 * d.abs() - delta), 2.0 * delta * d.signum())
    }
}

/// Loss contributions of one sample (before averaging and regularization).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleLoss {
    pub safe: f64,
    pub collision: f64,
    pub goal: f64,
    pub consistency: f64,
}

impl SampleLoss {
    pub fn total(&self, cfg: &TrainConfig) -> f64 {
        cfg.a1 * self.safe + cfg.a2 * self.collision + cfg.a3 * self.goal + cfg.a4 * self.consistency
    }
}

/// Loss terms of one sample; if `grad` is given, adds the gradient of
/// their weighted total scaled by `weight`.
pub fn sample_loss(
    model: &CertificateModel,
    sample: &LabeledSample,
    grid: &ControlGrid,
    cfg: &TrainConfig,
    grad: Option<(&mut ModelGradient, f64)>,
) -> SampleLoss {
    let obs = &sample.obs;
    let (eval, costs) = candidate_costs(model, obs, grid, cfg);
    let k = argmin(&costs, grid);
    let h = eval.h_now;
    let mut out = SampleLoss {
        goal: costs[k],
        ..SampleLoss::default()
    };
    match sample.label {
        Label::Safe => out.safe = (cfg.eps_h + h).max(0.0),
        Label::Unsafe => out.collision = (cfg.eps_h - h).max(0.0),
        Label::Boundary => {}
    }
    let consistency = sample.next.as_ref().filter(|_| cfg.a4 > 0.0).map(|next| {
        let predicted = crate::lookahead::predict_scan(&obs.scan, &local_transform(next.u, cfg.dt));
        let (p, q) = (flatten_points(&predicted.points), flatten_points(&next.scan.points));
        let d = model.cbf_value(&predicted) - model.cbf_value(&next.scan);
        (p, q, d)
    });
    if let Some((_, _, d)) = &consistency {
        out.consistency = huber(*d, CONSISTENCY_DELTA).0;
    }
    let Some((grad, weight)) = grad else {
        return out;
    };
    if let Some((p, q, d)) = &consistency {
        let coef = weight * cfg.a4 * huber(*d, CONSISTENCY_DELTA).1;
        model.accumulate_cbf_gradient(p, coef, grad);
        model.accumulate_cbf_gradient(q, -coef, grad);
    }

    let w = cfg.weights;
    let (clf_res, d_next, d_now) = clf_residual(eval.v_next[k], eval.v_now, model.params.alpha_v, cfg);
    let clf_active = clf_res > 0.0;
    let cbf_active = eval.h_next[k] - model.params.alpha_h * h + cfg.gamma_h > 0.0;

    let mut dh_now = 0.0;
    if out.safe > 0.0 {
        dh_now += cfg.a1;
    }
    if out.collision > 0.0 {
        dh_now -= cfg.a2;
    }
    let mut dh_next = 0.0;
    if cbf_active {
        dh_now -= cfg.a3 * w.cbf * model.params.alpha_h;
        dh_next = cfg.a3 * w.cbf;
    }
    let points = flatten_points(&obs.scan.points);
    if dh_now != 0.0 {
        model.accumulate_cbf_gradient(&points, weight * dh_now, grad);
    }
    let t = local_transform(grid.candidates()[k], cfg.dt);
    if dh_next != 0.0 {
        let moved = crate::lookahead::predict_scan(&obs.scan, &t);
        model.accumulate_cbf_gradient(&flatten_points(&moved.points), weight * dh_next, grad);
    }
    if clf_active {
        let coef = weight * cfg.a3 * w.clf;
        model.accumulate_clf_gradient(obs.rho, obs.phi, coef * d_now, grad);
        let (rho, phi) = predict_goal(obs.rho, obs.phi, &t);
        model.accumulate_clf_gradient(rho, phi, coef * d_next, grad);
    }
    out
}

/// Batch loss (mean of sample losses plus regularization).
pub fn certificate_loss(model: &CertificateModel, batch: &[LabeledSample], cfg: &TrainConfig) -> f64 {
    assert!(!batch.is_empty(), "batch must be nonempty");
    let grid = cfg.grid();
    let sum: f64 = batch
        .iter()
        .map(|s| sample_loss(model, s, &grid, cfg, None).total(cfg))
        .sum();
    sum / batch.len() as f64 + cfg.l2 * model.regularized_norm()
}

/// Batch loss and its gradient with respect to every model parameter.
pub fn certificate_loss_gradient(
    model: &CertificateModel,
    batch: &[LabeledSample],
    cfg: &TrainConfig,
) -> (f64, ModelGradient) {
    assert!(!batch.is_empty(), "batch must be nonempty");
    let grid = cfg.grid();
    let weight = 1.0 / batch.len() as f64;
    let parts: Vec<(f64, ModelGradient)> = batch
        .par_iter()
        .map(|s| {
            let mut g = model.zero_gradient();
            let l = sample_loss(model, s, &grid, cfg, Some((&mut g, weight))).total(cfg);
            (l, g)
        })
        .collect();
    let mut grad = model.zero_gradient();
    let mut sum = 0.0;
    for (l, g) in &parts {
        sum += l;
        grad.add_assign(g);
    }
    grad.barrier_head
        .add_scaled_params(&model.barrier_head, 2.0 * cfg.l2);
    grad.lyapunov.add_scaled_params(&model.lyapunov, 2.0 * cfg.l2);
    (sum * weight + cfg.l2 * model.regularized_norm(), grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: CertificateModel,
    pub history: Vec<EpochRecord>,
    pub dataset: Vec<LabeledSample>,
    pub n_validation: usize,
}

/// Mini-batch SGD on a given split. `on_epoch` sees every finished epoch.
pub fn fit(
    model: &mut CertificateModel,
    train_set: &[LabeledSample],
    val_set: &[LabeledSample],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<Vec<EpochRecord>, Error> {
    cfg.validate()?;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    if train_set.is_empty() {
        return Ok(history);
    }
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        let mut batches = 0;
        for (b, idx) in order.chunks(cfg.batch).enumerate() {
            let batch: Vec<LabeledSample> = idx.iter().map(|&i| train_set[i].clone()).collect();
            let (loss, grad) = certificate_loss_gradient(model, &batch, cfg);
            if !loss.is_finite() || !grad.norm().is_finite() {
                return Err(Error::Divergence { epoch, batch: b, loss });
            }
            sgd_step(&mut model.encoder, &grad.encoder, cfg.lr, 0.0);
            sgd_step(&mut model.barrier_head, &grad.barrier_head, cfg.lr, 0.0);
            sgd_step(&mut model.lyapunov, &grad.lyapunov, cfg.lr, 0.0);
            total += loss;
            batches += 1;
        }
        let val_loss = if val_set.is_empty() {
            f64::NAN
        } else {
            certificate_loss(model, val_set, cfg)
        };
        let record = EpochRecord {
            epoch,
            train_loss: total / batches as f64,
            val_loss,
        };
        on_epoch(&record);
        history.push(record);
    }
    Ok(history)
}

/// Samples a dataset from `envs`, holds out the validation split and trains
/// a freshly initialized model.
pub fn train(envs: &[Environment], cfg: &TrainConfig) -> Result<TrainOutcome, Error> {
    train_with_progress(envs, cfg, |_| {})
}

pub fn train_with_progress(
    envs: &[Environment],
    cfg: &TrainConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome, Error> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dataset = sample_dataset(envs, cfg, &mut rng)?;
    let n_val = ((dataset.len() as f64) * cfg.validation_fraction).round() as usize;
    let (val_set, train_set) = dataset.split_at(n_val);
    let mut model = CertificateModel::new(cfg.certificate, cfg.n_rays, cfg.seed);
    let history = fit(&mut model, train_set, val_set, cfg, &mut rng, on_epoch)?;
    Ok(TrainOutcome {
        model,
        history,
        dataset,
        n_validation: n_val,
    })
}

pub fn write_history_csv(history: &[EpochRecord], path: &Path) -> Result<(), Error> {
    let mut out = String::from("epoch,train_loss,val_loss\n");
    for r in history {
        out.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, r.val_loss));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_dataset_jsonl(samples: &[LabeledSample], path: &Path) -> Result<(), Error> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_jsonl(path: &Path) -> Result<Vec<LabeledSample>, Error> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub dt: f64,
    pub gamma_h: f64,
    pub limits: ControlLimits,
    pub grid_v: usize,
    pub grid_omega: usize,
    pub max_range: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            dt: 0.1,
            gamma_h: 0.0,
            limits: ControlLimits::default(),
            grid_v: 7,
            grid_omega: 15,
            max_range: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub sample: usize,
    pub env: usize,
    pub pose: Pose,
    pub h: f64,
    /// Smallest `h' - a_h h + g_h` over the grid (positive here).
    pub best_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub samples: usize,
    pub feasible: usize,
    pub fraction_feasible: f64,
    pub counterexamples: Vec<Counterexample>,
}

pub const MAX_COUNTEREXAMPLES: usize = 100;

/// Smallest barrier residual over the grid. The zero input gives
/// `(1 - a_h) h + g_h`, so grid scoring is skipped when that is already
/// nonpositive.
fn best_cbf_residual(model: &CertificateModel, obs: &Observation, grid: &ControlGrid, cfg: &VerifyConfig) -> (f64, f64) {
    let a = model.params.alpha_h;
    let h = model.cbf_value(&obs.scan);
    let at_rest = (1.0 - a) * h + cfg.gamma_h;
    if at_rest <= 0.0 {
        return (h, at_rest);
    }
    let eval = evaluate_candidates(model, obs, grid, cfg.dt, false);
    let best = eval
        .h_next
        .iter()
        .map(|hn| hn - a * eval.h_now + cfg.gamma_h)
        .fold(f64::INFINITY, f64::min);
    (h, best)
}

/// Samples free poses over `envs` and checks that some grid input satisfies
/// the barrier decrease condition at each.
pub fn verify(model: &CertificateModel, envs: &[Environment], cfg: &VerifyConfig) -> Result<FeasibilityReport, Error> {
    if cfg.samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    if envs.is_empty() {
        return Err(Error::Config("at least one environment is required".into()));
    }
    let grid = ControlGrid::uniform(cfg.limits, cfg.grid_v, cfg.grid_omega);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut poses = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let e = pick_env(envs, &mut rng);
        let pose = sample_free_pose(&envs[e], &mut rng)
            .ok_or_else(|| Error::InvalidEnvironment(format!("environment {e} has no free space")))?;
        poses.push((e, pose));
    }
    let results: Vec<(f64, f64)> = poses
        .par_iter()
        .map(|&(e, pose)| {
            let obs = Observation::observe(&envs[e], &pose, model.n_rays, cfg.max_range);
            best_cbf_residual(model, &obs, &grid, cfg)
        })
        .collect();
    let mut feasible = 0;
    let mut counterexamples = Vec::new();
    for (i, (&(env, pose), &(h, r))) in poses.iter().zip(&results).enumerate() {
        if r <= 0.0 {
            feasible += 1;
        } else if counterexamples.len() < MAX_COUNTEREXAMPLES {
            counterexamples.push(Counterexample {
                sample: i,
                env,
                pose,
                h,
                best_residual: r,
            });
        }
    }
    Ok(FeasibilityReport {
        samples: cfg.samples,
        feasible,
        fraction_feasible: feasible as f64 / cfg.samples as f64,
        counterexamples,
    })
}
