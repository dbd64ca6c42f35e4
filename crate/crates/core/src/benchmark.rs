//! Random environments, the bug trap, episode rollouts and aggregate metrics.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::CertificateModel;
use crate::controller::{
    choose_goal_seeking, clf_greedy_index, hybrid_step, ControllerConfig, ControllerState, Mode,
};
use crate::dynamics::{dubins_step, ControlInput};
use crate::geometry::{min_range, Aabb, Environment, Obstacle, Point2, Pose};
use crate::lookahead::{evaluate_candidates, Observation};
use crate::Error;

/// Distribution of random environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvGenConfig {
    pub n_obstacles: usize,
    /// Workspace is `[-half_width, half_width] x [-half_height, half_height]`.
    pub half_width: f64,
    pub half_height: f64,
    pub start: Pose,
    pub goal: Point2,
    /// Probability that an obstacle is a circle rather than a box.
    pub circle_fraction: f64,
    pub radius_min: f64,
    pub radius_max: f64,
    /// Box half-extents are drawn from this range per axis.
    pub half_extent_min: f64,
    pub half_extent_max: f64,
    /// Required clearance between start/goal and every obstacle.
    pub clearance: f64,
    pub walls: bool,
    pub max_attempts: usize,
}

impl Default for EnvGenConfig {
    fn default() -> Self {
        Self {
            n_obstacles: 8,
            half_width: 2.5,
            half_height: 2.5,
            start: Pose::new(-1.5, 0.0, 0.0),
            goal: Point2::new(1.5, 0.0),
            circle_fraction: 0.5,
            radius_min: 0.15,
            radius_max: 0.4,
            half_extent_min: 0.1,
            half_extent_max: 0.35,
            clearance: 0.5,
            walls: true,
            max_attempts: 1000,
        }
    }
}

impl EnvGenConfig {
    pub fn bounds(&self) -> Aabb {
        Aabb::new(
            Point2::new(-self.half_width, -self.half_height),
            Point2::new(self.half_width, self.half_height),
        )
    }
}

/// Deterministic random environment for `seed`.
pub fn random_env(seed: u64, cfg: &EnvGenConfig) -> Result<Environment, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = cfg.bounds();
    let mut obstacles = Vec::with_capacity(cfg.n_obstacles + 4);
    for i in 0..cfg.n_obstacles {
        let mut placed = false;
        for _ in 0..cfg.max_attempts {
            let cx = rng.gen_range(bounds.min.x..bounds.max.x);
            let cy = rng.gen_range(bounds.min.y..bounds.max.y);
            let obstacle = if rng.gen_bool(cfg.circle_fraction) {
                Obstacle::circle(cx, cy, rng.gen_range(cfg.radius_min..=cfg.radius_max))
            } else {
                let hx = rng.gen_range(cfg.half_extent_min..=cfg.half_extent_max);
                let hy = rng.gen_range(cfg.half_extent_min..=cfg.half_extent_max);
                Obstacle::rect(cx - hx, cy - hy, cx + hx, cy + hy)
            };
            if obstacle.signed_distance(cfg.start.position()) > cfg.clearance
                && obstacle.signed_distance(cfg.goal) > cfg.clearance
            {
                obstacles.push(obstacle);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::RejectionBudgetExceeded {
                obstacle: i,
                attempts: cfg.max_attempts,
            });
        }
    }
    let env = Environment {
        obstacles,
        bounds,
        start: cfg.start,
        goal: cfg.goal,
    };
    Ok(if cfg.walls { env.with_walls() } else { env })
}

/// A C-shaped trap that opens away from the goal, with the robot inside.
///
/// ```text
///            +-------------+
///            +-----------+ |
///   opening      start   | |        goal
///            +-----------+ |
///            +-------------+
/// ```
pub fn bugtrap_env() -> Environment {
    Environment {
        obstacles: vec![
            Obstacle::rect(0.5, -1.0, 0.7, 1.0),
            Obstacle::rect(-0.8, 0.8, 0.7, 1.0),
            Obstacle::rect(-0.8, -1.0, 0.7, -0.8),
        ],
        bounds: Aabb::new(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0)),
        start: Pose::new(-0.1, 0.0, 0.0),
        goal: Point2::new(2.0, 0.0),
    }
    .with_walls()
}

/// The bug trap with the start pose perturbed by a seeded jitter of up to
/// 5 cm in position and 0.2 rad in heading.
pub fn bugtrap_env_jittered(seed: u64) -> Environment {
    let mut env = bugtrap_env();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = env.start;
    env.start = Pose::new(
        s.x + rng.gen_range(-0.05..=0.05),
        s.y + rng.gen_range(-0.05..=0.05),
        s.theta + rng.gen_range(-0.2..=0.2),
    );
    env
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Control period (s).
    pub dt: f64,
    /// Integration substeps per control period.
    pub substeps: usize,
    pub time_cap: f64,
    pub goal_radius: f64,
    /// Collision when the true clearance drops to this distance.
    pub collision_distance: f64,
    pub n_rays: usize,
    pub max_range: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            substeps: 10,
            time_cap: 10.0,
            goal_radius: 0.2,
            collision_distance: 0.2,
            n_rays: 32,
            max_range: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Hybrid,
    ClfGreedy,
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "hybrid" => Ok(Policy::Hybrid),
            "clf_greedy" | "clf-greedy" => Ok(Policy::ClfGreedy),
            other => Err(Error::Config(format!("unknown policy `{other}`"))),
        }
    }
}

/// A policy bound to a model and controller settings.
#[derive(Debug, Clone, Copy)]
pub struct Agent<'a> {
    pub policy: Policy,
    pub model: &'a CertificateModel,
    pub controller: &'a ControllerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    ReachedGoal { t: f64 },
    Collided { t: f64 },
    Timeout,
    FailSafe { t: f64 },
}

impl Outcome {
    pub fn reached_goal(&self) -> bool {
        matches!(self, Outcome::ReachedGoal { .. })
    }

    pub fn collided(&self) -> bool {
        matches!(self, Outcome::Collided { .. })
    }
}

/// One control tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub pose: Pose,
    pub u: ControlInput,
    pub mode: Mode,
    pub h: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub h_next: f64,
    #[serde(rename = "V_next")]
    pub v_next: f64,
    pub clf_feasible: bool,
    pub cbf_feasible: bool,
    pub min_range: f64,
    /// Exact distance to the nearest obstacle.
    pub clearance: f64,
    /// Controller time for this tick (ms); not serialized.
    #[serde(skip)]
    pub latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub env_seed: u64,
    pub policy: Policy,
    pub outcome: Outcome,
    pub steps: Vec<StepRecord>,
}

impl EpisodeLog {
    pub fn latencies_ms(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.latency_ms).collect()
    }

    /// Writes one step record per line.
    pub fn write_steps_jsonl(&self, path: &Path) -> Result<(), Error> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        for s in &self.steps {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn decide(agent: &Agent, state: &mut ControllerState, obs: &Observation) -> crate::controller::StepDecision {
    match agent.policy {
        Policy::Hybrid => hybrid_step(state, agent.model, obs, agent.controller),
        Policy::ClfGreedy => {
            let cfg = agent.controller;
            let eval = evaluate_candidates(agent.model, obs, &cfg.grid, cfg.dt, cfg.parallel);
            let k = clf_greedy_index(&eval, cfg);
            let flags = choose_goal_seeking(&eval, cfg);
            crate::controller::StepDecision {
                u: cfg.grid.candidates()[k],
                mode: Mode::GoalSeeking,
                h: eval.h_now,
                v: eval.v_now,
                h_next: eval.h_next[k],
                v_next: eval.v_next[k],
                clf_feasible: flags.clf_feasible,
                cbf_feasible: flags.cbf_feasible,
            }
        }
    }
}

/// Closed-loop rollout: zero-order hold at `1 / dt`, exact arcs at
/// `substeps / dt`, ground-truth collision checks after every substep.
pub fn run_episode(agent: &Agent, env: &Environment, sim: &SimConfig, seed: u64) -> EpisodeLog {
    let mut state = ControllerState::new(seed);
    let mut pose = env.start;
    let mut steps = Vec::new();
    let n_ticks = (sim.time_cap / sim.dt).round() as usize;
    let sub_dt = sim.dt / sim.substeps as f64;
    let log = |outcome, steps| EpisodeLog {
        env_seed: seed,
        policy: agent.policy,
        outcome,
        steps,
    };
    if env.clearance(pose.position()) <= sim.collision_distance {
        return log(Outcome::Collided { t: 0.0 }, steps);
    }
    for k in 0..n_ticks {
        let t = k as f64 * sim.dt;
        let obs = Observation::observe(env, &pose, sim.n_rays, sim.max_range);
        if obs.rho <= sim.goal_radius {
            return log(Outcome::ReachedGoal { t }, steps);
        }
        let started = Instant::now();
        let d = decide(agent, &mut state, &obs);
        let latency_ms = started.elapsed().as_secs_f64() * 1e3;
        steps.push(StepRecord {
            t,
            pose,
            u: d.u,
            mode: d.mode,
            h: d.h,
            v: d.v,
            h_next: d.h_next,
            v_next: d.v_next,
            clf_feasible: d.clf_feasible,
            cbf_feasible: d.cbf_feasible,
            min_range: min_range(&obs.scan),
            clearance: env.clearance(pose.position()),
            latency_ms,
        });
        if d.mode == Mode::FailSafe {
            return log(Outcome::FailSafe { t }, steps);
        }
        for j in 1..=sim.substeps {
            pose = dubins_step(&pose, d.u, sub_dt);
            if env.clearance(pose.position()) <= sim.collision_distance {
                let hit = t + j as f64 * sub_dt;
                return log(Outcome::Collided { t: hit }, steps);
            }
        }
    }
    let obs = Observation::observe(env, &pose, sim.n_rays, sim.max_range);
    if obs.rho <= sim.goal_radius {
        return log(Outcome::ReachedGoal { t: n_ticks as f64 * sim.dt }, steps);
    }
    log(Outcome::Timeout, steps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub env_seed: u64,
    pub outcome: Outcome,
    pub steps: usize,
    pub exploratory_steps: usize,
    pub min_clearance: f64,
}

impl EpisodeSummary {
    pub fn from_log(log: &EpisodeLog) -> Self {
        Self {
            env_seed: log.env_seed,
            outcome: log.outcome,
            steps: log.steps.len(),
            exploratory_steps: log
                .steps
                .iter()
                .filter(|s| matches!(s.mode, Mode::Exploratory { .. }))
                .count(),
            min_clearance: log
                .steps
                .iter()
                .map(|s| s.clearance)
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Deterministic aggregate metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub n_envs: usize,
    pub base_seed: u64,
    pub policy: Policy,
    pub safety_rate: f64,
    pub goal_rate: f64,
    /// Mean over episodes that reached the goal; `None` when none did.
    pub mean_time_to_goal: Option<f64>,
    pub episodes: Vec<EpisodeSummary>,
}

impl BenchmarkReport {
    pub fn from_logs(base_seed: u64, policy: Policy, logs: &[EpisodeLog]) -> Self {
        let n = logs.len();
        let safe = logs.iter().filter(|l| !l.outcome.collided()).count();
        let times: Vec<f64> = logs
            .iter()
            .filter_map(|l| match l.outcome {
                Outcome::ReachedGoal { t } => Some(t),
                _ => None,
            })
            .collect();
        Self {
            n_envs: n,
            base_seed,
            policy,
            safety_rate: safe as f64 / n as f64,
            goal_rate: times.len() as f64 / n as f64,
            mean_time_to_goal: if times.is_empty() {
                None
            } else {
                Some(times.iter().sum::<f64>() / times.len() as f64)
            },
            episodes: logs.iter().map(EpisodeSummary::from_log).collect(),
        }
    }

    /// Aligned plain-text summary.
    pub fn summary_table(&self, timing: Option<&LatencyStats>) -> String {
        let mut rows = vec![
            ("policy", format!("{:?}", self.policy)),
            ("environments", self.n_envs.to_string()),
            ("safety rate", format!("{:.4}", self.safety_rate)),
            ("goal rate", format!("{:.4}", self.goal_rate)),
            (
                "mean time to goal (s)",
                self.mean_time_to_goal
                    .map_or("n/a".into(), |t| format!("{t:.2}")),
            ),
        ];
        if let Some(t) = timing {
            rows.push(("median step latency (ms)", format!("{:.3}", t.median_ms)));
            rows.push(("mean step latency (ms)", format!("{:.3}", t.mean_ms)));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$}  {v}\n"))
            .collect()
    }
}

/// Wall-clock statistics; kept apart from the deterministic report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub samples: usize,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub p95_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(mut values: Vec<f64>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let median = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        let p95 = values[((0.95 * (n - 1) as f64).round() as usize).min(n - 1)];
        Some(Self {
            samples: n,
            median_ms: median,
            mean_ms: values.iter().sum::<f64>() / n as f64,
            p95_ms: p95,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub report: BenchmarkReport,
    pub logs: Vec<EpisodeLog>,
    pub latency: Option<LatencyStats>,
}

/// Runs `n_envs` episodes on `random_env(base_seed + i)` in parallel.
pub fn benchmark(
    agent: &Agent,
    n_envs: usize,
    base_seed: u64,
    envs: &EnvGenConfig,
    sim: &SimConfig,
) -> Result<BenchmarkRun, Error> {
    if n_envs == 0 {
        return Err(Error::Config("n_envs must be at least 1".into()));
    }
    let environments: Vec<(u64, Environment)> = (0..n_envs as u64)
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            random_env(seed, envs).map(|e| (seed, e))
        })
        .collect::<Result<_, _>>()?;
    Ok(run_batch(agent, &environments, base_seed, sim))
}

/// Runs one episode per `(seed, environment)` pair.
pub fn run_batch(agent: &Agent, environments: &[(u64, Environment)], base_seed: u64, sim: &SimConfig) -> BenchmarkRun {
    let logs: Vec<EpisodeLog> = environments
        .par_iter()
        .map(|(seed, env)| run_episode(agent, env, sim, *seed))
        .collect();
    let report = BenchmarkReport::from_logs(base_seed, agent.policy, &logs);
    let latency = LatencyStats::from_samples(logs.iter().flat_map(|l| l.latencies_ms()).collect());
    BenchmarkRun {
        report,
        logs,
        latency,
    }
}

pub fn write_logs_jsonl(logs: &[EpisodeLog], path: &Path) -> Result<(), Error> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for l in logs {
        serde_json::to_writer(&mut w, l)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_logs_jsonl(path: &Path) -> Result<Vec<EpisodeLog>, Error> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}
