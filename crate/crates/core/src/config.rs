//! Run configuration file (TOML).
//!
//! Every key is optional; missing keys take the defaults shown below.
//! Unknown keys are rejected.
//!
//! ```toml
//! version = 1
//! seed = 0
//!
//! [certificate]
//! d_c = 0.2
//! alpha_h = 0.9
//! alpha_v = 0.9
//!
//! [sensor]
//! n_rays = 32
//! max_range = 3.0
//!
//! [limits]
//! v_max = 0.5
//! omega_max = 1.5
//!
//! [controller]
//! eps_h = 0.5
//! gamma_v = 0.0
//! gamma_h = 0.01
//! grid_v = 7
//! grid_omega = 15
//! unify_decay = false
//! parallel = false
//! leaky_slope = 0.001
//! goal_seeking = { effort = 0.01, clf = 1.0, cbf = 1000.0 }
//! exploration = { decay = 1000.0, band = 1000.0, speed = -0.1 }
//!
//! [training]
//! n_samples = 10000
//! validation_fraction = 0.1
//! epochs = 72
//! a1 = 100.0
//! a2 = 100.0
//! a3 = 1.0
//! a4 = 100.0          # lookahead consistency
//! l2 = 1e-4
//! lr = 1e-3
//! batch = 64
//! label_margin = 0.05
//! eps_h = 0.1
//! gamma_h = 0.0
//! grid_v = 3
//! grid_omega = 5
//! relative_clf = true
//! phase_jitter = true
//! clf_margin = 0.03
//! n_envs = 32            # random training environments, plus one empty one
//! env_seed = 1000000
//!
//! [verify]
//! samples = 100000
//! n_envs = 500
//! env_seed = 0
//! gamma_h = 0.0
//!
//! [sim]
//! dt = 0.1
//! substeps = 10
//! time_cap = 10.0
//! bugtrap_time_cap = 60.0
//! goal_radius = 0.2
//!
//! [envs]                 # random environment distribution
//! n_obstacles = 8
//! half_width = 2.5
//! half_height = 2.5
//! start = { x = -1.5, y = 0.0, theta = 0.0 }
//! goal = { x = 1.5, y = 0.0 }
//! circle_fraction = 0.5
//! radius_min = 0.15
//! radius_max = 0.4
//! half_extent_min = 0.1
//! half_extent_max = 0.35
//! clearance = 0.5
//! walls = true
//! max_attempts = 1000
//!
//! [bench]
//! n_envs = 500
//! base_seed = 0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmark::{random_env, EnvGenConfig, SimConfig};
use crate::certificates::{CertificateModel, CertificateParams};
use crate::controller::{ControllerConfig, ExplorationWeights, GoalSeekingWeights};
use crate::dynamics::{ControlGrid, ControlLimits};
use crate::geometry::Environment;
use crate::training::{TrainConfig, VerifyConfig};
use crate::Error;

pub const CONFIG_VERSION: u32 = 1;

/// 1-based line on which `section.key` is assigned in `text`, if any.
fn key_line(text: &str, path: &str) -> Option<usize> {
    let (section, key) = path.split_once('.').unwrap_or(("", path));
    let mut current = "";
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.split(']').next().unwrap_or("").trim();
            continue;
        }
        if current != section {
            continue;
        }
        if let Some(rest) = line.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(i + 1);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSection {
    pub n_rays: usize,
    pub max_range: f64,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self {
            n_rays: 32,
            max_range: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub eps_h: f64,
    pub gamma_v: f64,
    pub gamma_h: f64,
    pub grid_v: usize,
    pub grid_omega: usize,
    pub unify_decay: bool,
    pub parallel: bool,
    pub leaky_slope: f64,
    pub goal_seeking: GoalSeekingWeights,
    pub exploration: ExplorationWeights,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            eps_h: 0.5,
            gamma_v: 0.0,
            gamma_h: 0.01,
            grid_v: 7,
            grid_omega: 15,
            unify_decay: false,
            parallel: false,
            leaky_slope: 0.001,
            goal_seeking: GoalSeekingWeights::default(),
            exploration: ExplorationWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub n_samples: usize,
    pub validation_fraction: f64,
    pub epochs: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub l2: f64,
    pub lr: f64,
    pub batch: usize,
    pub label_margin: f64,
    pub eps_h: f64,
    pub gamma_h: f64,
    pub grid_v: usize,
    pub grid_omega: usize,
    pub relative_clf: bool,
    pub phase_jitter: bool,
    pub clf_margin: f64,
    pub n_envs: usize,
    pub env_seed: u64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            n_samples: t.n_samples,
            validation_fraction: t.validation_fraction,
            epochs: t.epochs,
            a1: t.a1,
            a2: t.a2,
            a3: t.a3,
            a4: t.a4,
            l2: t.l2,
            lr: t.lr,
            batch: t.batch,
            label_margin: t.label_margin,
            eps_h: t.eps_h,
            gamma_h: t.gamma_h,
            grid_v: t.grid_v,
            grid_omega: t.grid_omega,
            relative_clf: t.relative_clf,
            phase_jitter: t.phase_jitter,
            clf_margin: t.clf_margin,
            n_envs: 32,
            env_seed: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub samples: usize,
    pub n_envs: usize,
    pub env_seed: u64,
    pub gamma_h: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            samples: 100_000,
            n_envs: 500,
            env_seed: 0,
            gamma_h: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub substeps: usize,
    pub time_cap: f64,
    pub bugtrap_time_cap: f64,
    pub goal_radius: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 0.1,
            substeps: 10,
            time_cap: 10.0,
            bugtrap_time_cap: 60.0,
            goal_radius: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub n_envs: usize,
    pub base_seed: u64,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            n_envs: 500,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub seed: u64,
    pub certificate: CertificateParams,
    pub sensor: SensorSection,
    pub limits: ControlLimits,
    pub controller: ControllerSection,
    pub training: TrainingSection,
    pub verify: VerifySection,
    pub sim: SimSection,
    pub envs: EnvGenConfig,
    pub bench: BenchSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 0,
            certificate: CertificateParams::default(),
            sensor: SensorSection::default(),
            limits: ControlLimits::default(),
            controller: ControllerSection::default(),
            training: TrainingSection::default(),
            verify: VerifySection::default(),
            sim: SimSection::default(),
            envs: EnvGenConfig::default(),
            bench: BenchSection::default(),
        }
    }
}

impl Config {
    /// Parses and validates; errors carry the line and column of the
    /// offending key.
    pub fn from_toml_str(text: &str) -> Result<Self, Error> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some((key, requirement)) = cfg.failed_key_check() {
            let at = key_line(text, key).map_or_else(String::new, |n| format!("line {n}: "));
            return Err(Error::Config(format!("{at}`{key}` {requirement}")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Range checks on single keys as `(section.key, holds, requirement)`.
    fn key_checks(&self) -> Vec<(&'static str, bool, &'static str)> {
        let c = &self.certificate;
        let s = &self.sensor;
        let k = &self.controller;
        let t = &self.training;
        let m = &self.sim;
        let e = &self.envs;
        let unit = |a: f64| (0.0..1.0).contains(&a);
        vec![
            ("certificate.d_c", c.d_c > 0.0, "must be positive"),
            ("certificate.alpha_h", unit(c.alpha_h), "must lie in [0, 1)"),
            ("certificate.alpha_v", unit(c.alpha_v), "must lie in [0, 1)"),
            ("sensor.n_rays", s.n_rays > 0, "must be at least 1"),
            ("sensor.max_range", s.max_range > 0.0, "must be positive"),
            ("limits.v_max", self.limits.v_max > 0.0, "must be positive"),
            ("limits.omega_max", self.limits.omega_max >= 0.0, "must be nonnegative"),
            ("controller.eps_h", k.eps_h > 0.0, "must be positive"),
            ("controller.gamma_v", k.gamma_v >= 0.0, "must be nonnegative"),
            ("controller.gamma_h", k.gamma_h >= 0.0, "must be nonnegative"),
            ("controller.grid_v", k.grid_v > 0, "must be at least 1"),
            ("controller.grid_omega", k.grid_omega > 0, "must be at least 1"),
            ("training.n_samples", t.n_samples > 0, "must be at least 1"),
            (
                "training.validation_fraction",
                t.validation_fraction > 0.0 && t.validation_fraction < 1.0,
                "must lie in (0, 1)",
            ),
            ("training.a1", t.a1 > 0.0, "must be positive"),
            ("training.a2", t.a2 > 0.0, "must be positive"),
            ("training.a3", t.a3 > 0.0, "must be positive"),
            ("training.a4", t.a4 >= 0.0, "must be nonnegative"),
            ("training.l2", t.l2 >= 0.0, "must be nonnegative"),
            ("training.lr", t.lr > 0.0, "must be positive"),
            ("training.batch", t.batch > 0, "must be at least 1"),
            ("training.eps_h", t.eps_h > 0.0, "must be positive"),
            ("training.gamma_h", t.gamma_h >= 0.0, "must be nonnegative"),
            ("training.clf_margin", t.clf_margin >= 0.0, "must be nonnegative"),
            ("training.grid_v", t.grid_v > 0, "must be at least 1"),
            ("training.grid_omega", t.grid_omega > 0, "must be at least 1"),
            ("verify.samples", self.verify.samples > 0, "must be at least 1"),
            ("verify.n_envs", self.verify.n_envs > 0, "must be at least 1"),
            ("verify.gamma_h", self.verify.gamma_h >= 0.0, "must be nonnegative"),
            ("sim.dt", m.dt > 0.0, "must be positive"),
            ("sim.substeps", m.substeps > 0, "must be at least 1"),
            ("sim.time_cap", m.time_cap > 0.0, "must be positive"),
            ("sim.bugtrap_time_cap", m.bugtrap_time_cap > 0.0, "must be positive"),
            ("sim.goal_radius", m.goal_radius > 0.0, "must be positive"),
            ("envs.half_width", e.half_width > 0.0, "must be positive"),
            ("envs.half_height", e.half_height > 0.0, "must be positive"),
            ("envs.circle_fraction", (0.0..=1.0).contains(&e.circle_fraction), "must lie in [0, 1]"),
            ("envs.radius_max", e.radius_max >= e.radius_min, "must be at least radius_min"),
            (
                "envs.half_extent_max",
                e.half_extent_max >= e.half_extent_min,
                "must be at least half_extent_min",
            ),
            ("bench.n_envs", self.bench.n_envs > 0, "must be at least 1"),
        ]
    }

    fn failed_key_check(&self) -> Option<(&'static str, &'static str)> {
        self.key_checks()
            .into_iter()
            .find(|(_, ok, _)| !ok)
            .map(|(key, _, requirement)| (key, requirement))
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let Some((key, requirement)) = self.failed_key_check() {
            return Err(Error::Config(format!("`{key}` {requirement}")));
        }
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.certificate.validate()?;
        self.train_config().validate()?;
        self.sim_config().validate()?;
        if self.controller.grid_v == 0 || self.controller.grid_omega == 0 {
            return Err(Error::Config("controller grid must be nonempty".into()));
        }
        if self.limits.v_max <= 0.0 || self.limits.omega_max < 0.0 {
            return Err(Error::Config("limits must be positive".into()));
        }
        if self.verify.n_envs == 0 || self.bench.n_envs == 0 {
            return Err(Error::Config("n_envs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.training;
        TrainConfig {
            n_samples: t.n_samples,
            validation_fraction: t.validation_fraction,
            epochs: t.epochs,
            a1: t.a1,
            a2: t.a2,
            a3: t.a3,
            a4: t.a4,
            eps_h: t.eps_h,
            l2: t.l2,
            lr: t.lr,
            batch: t.batch,
            seed: self.seed,
            label_margin: t.label_margin,
            certificate: self.certificate,
            weights: self.controller.goal_seeking,
            gamma_v: self.controller.gamma_v,
            gamma_h: t.gamma_h,
            dt: self.sim.dt,
            limits: self.limits,
            grid_v: t.grid_v,
            grid_omega: t.grid_omega,
            n_rays: self.sensor.n_rays,
            max_range: self.sensor.max_range,
            relative_clf: t.relative_clf,
            phase_jitter: t.phase_jitter,
            clf_margin: t.clf_margin,
        }
    }

    /// The random training family plus one obstacle-free workspace.
    pub fn training_envs(&self) -> Result<Vec<Environment>, Error> {
        let mut envs = (0..self.training.n_envs as u64)
            .map(|i| random_env(self.training.env_seed.wrapping_add(i), &self.envs))
            .collect::<Result<Vec<_>, _>>()?;
        let empty = EnvGenConfig {
            n_obstacles: 0,
            ..self.envs.clone()
        };
        envs.push(random_env(0, &empty)?);
        Ok(envs)
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            samples: self.verify.samples,
            seed: self.seed,
            dt: self.sim.dt,
            gamma_h: self.verify.gamma_h,
            limits: self.limits,
            grid_v: self.controller.grid_v,
            grid_omega: self.controller.grid_omega,
            max_range: self.sensor.max_range,
        }
    }

    pub fn verify_envs(&self) -> Result<Vec<Environment>, Error> {
        (0..self.verify.n_envs as u64)
            .map(|i| random_env(self.verify.env_seed.wrapping_add(i), &self.envs))
            .collect()
    }

    /// Controller settings for `model`; decay rates come from the model.
    pub fn controller_config(&self, model: &CertificateModel) -> ControllerConfig {
        let c = &self.controller;
        ControllerConfig {
            goal_seeking: c.goal_seeking,
            exploration: c.exploration,
            alpha_h: model.params.alpha_h,
            alpha_v: model.params.alpha_v,
            eps_h: c.eps_h,
            gamma_v: c.gamma_v,
            gamma_h: c.gamma_h,
            dt: self.sim.dt,
            grid: ControlGrid::uniform(self.limits, c.grid_v, c.grid_omega),
            unify_decay: c.unify_decay,
            parallel: c.parallel,
            leaky_slope: c.leaky_slope,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.sim.dt,
            substeps: self.sim.substeps,
            time_cap: self.sim.time_cap,
            goal_radius: self.sim.goal_radius,
            collision_distance: self.certificate.d_c,
            n_rays: self.sensor.n_rays,
            max_range: self.sensor.max_range,
        }
    }

    pub fn bugtrap_sim_config(&self) -> SimConfig {
        SimConfig {
            time_cap: self.sim.bugtrap_time_cap,
            ..self.sim_config()
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.dt > 0.0) || self.substeps == 0 || !(self.time_cap > 0.0) {
            return Err(Error::Config("dt, substeps and time_cap must be positive".into()));
        }
        if !(self.goal_radius > 0.0) || self.n_rays == 0 || !(self.max_range > 0.0) {
            return Err(Error::Config("goal_radius, n_rays and max_range must be positive".into()));
        }
        Ok(())
    }
}
