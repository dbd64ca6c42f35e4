//! Hybrid goal-seeking / exploratory controller.
//!
//! Both policies search a discrete control grid using the one-step
//! lookahead of [`crate::lookahead`].
//!
//! * Goal seeking minimizes `l1 |u| + l2 [V' - a_V V + g_V]+ + l3 [h' - a_h h + g_h]+`.
//!   Whenever some candidate satisfies both constraints, the minimum is taken
//!   over those candidates only, so the returned input always satisfies the
//!   Lyapunov decrease while in this mode.
//! * Exploration samples from a Gibbs-like distribution that keeps `h` inside
//!   a band of width `eps_h` around the value `h0` recorded on entry, with a
//!   leaky rectifier `[x]+ = max(x, 0.001 x)` on the penalty terms.
//!
//! Switching: goal seeking -> exploration when no candidate satisfies the
//! Lyapunov and barrier constraints together; exploration -> goal seeking
//! once `V <= a_V * V0`. If no candidate satisfies the barrier constraint, or
//! the exploration distribution is empty, the controller latches into
//! fail-safe and commands zero input.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificates::CertificateModel;
use crate::dynamics::{ControlGrid, ControlInput, ControlLimits};
use crate::lookahead::{evaluate_candidates, CandidateEvaluation, Observation};
use crate::Error;

/// Penalty weights of the goal-seeking objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoalSeekingWeights {
    /// Control effort.
    pub effort: f64,
    /// Lyapunov decrease violation.
    pub clf: f64,
    /// Barrier decrease violation.
    pub cbf: f64,
}

impl Default for GoalSeekingWeights {
    fn default() -> Self {
        Self {
            effort: 0.01,
            clf: 1.0,
            cbf: 1e3,
        }
    }
}

/// Coefficients of the exploration distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorationWeights {
    /// Barrier decrease term.
    pub decay: f64,
    /// Level-band term.
    pub band: f64,
    /// Forward-speed term; negative values favor faster motion.
    pub speed: f64,
}

impl Default for ExplorationWeights {
    fn default() -> Self {
        Self {
            decay: 1e3,
            band: 1e3,
            speed: -0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub goal_seeking: GoalSeekingWeights,
    pub exploration: ExplorationWeights,
    /// Barrier decay rate; taken from the model unless overridden.
    pub alpha_h: f64,
    /// Lyapunov decay rate; taken from the model unless overridden.
    pub alpha_v: f64,
    /// Half-width of the exploration band around `h0`.
    pub eps_h: f64,
    pub gamma_v: f64,
    pub gamma_h: f64,
    /// Control period (s).
    pub dt: f64,
    pub grid: ControlGrid,
    /// Use `h' - a_h h` in the exploration distribution instead of `h' - (1 - a_h) h`.
    pub unify_decay: bool,
    /// Score candidates on the rayon pool.
    pub parallel: bool,
    /// Slope of the leaky rectifier for negative arguments.
    pub leaky_slope: f64,
}

impl ControllerConfig {
    pub fn new(alpha_h: f64, alpha_v: f64, limits: ControlLimits, n_v: usize, n_omega: usize) -> Self {
        Self {
            goal_seeking: GoalSeekingWeights::default(),
            exploration: ExplorationWeights::default(),
            alpha_h,
            alpha_v,
            eps_h: 0.5,
            gamma_v: 0.0,
            gamma_h: 0.01,
            dt: 0.1,
            grid: ControlGrid::uniform(limits, n_v, n_omega),
            unify_decay: false,
            parallel: false,
            leaky_slope: 0.001,
        }
    }

    /// Default controller for a model: 7 x 15 grid over the default limits.
    pub fn for_model(model: &CertificateModel) -> Self {
        Self::new(
            model.params.alpha_h,
            model.params.alpha_v,
            ControlLimits::default(),
            7,
            15,
        )
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.eps_h > 0.0) {
            return Err(Error::Config("eps_h must be positive".into()));
        }
        if self.gamma_v < 0.0 || self.gamma_h < 0.0 {
            return Err(Error::Config("margins must be nonnegative".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        for (name, a) in [("alpha_h", self.alpha_h), ("alpha_v", self.alpha_v)] {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::Config(format!("{name} must lie in [0, 1)")));
            }
        }
        Ok(())
    }

    fn exploration_decay_factor(&self) -> f64 {
        if self.unify_decay {
            self.alpha_h
        } else {
            1.0 - self.alpha_h
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode")]
pub enum Mode {
    GoalSeeking,
    Exploratory { h0: f64, v0: f64 },
    FailSafe,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::GoalSeeking => "goal_seeking",
            Mode::Exploratory { .. } => "exploratory",
            Mode::FailSafe => "fail_safe",
        }
    }
}

/// Mode plus the random stream used by exploration.
#[derive(Debug, Clone)]
pub struct ControllerState {
    pub mode: Mode,
    pub rng: ChaCha8Rng,
}

impl ControllerState {
    pub fn new(seed: u64) -> Self {
        Self {
            mode: Mode::GoalSeeking,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn reset(&mut self) {
        self.mode = Mode::GoalSeeking;
    }
}

#[inline]
fn relu(x: f64) -> f64 {
    x.max(0.0)
}

#[inline]
fn leaky(x: f64, slope: f64) -> f64 {
    x.max(slope * x)
}

/// Result of the goal-seeking search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalSeekingChoice {
    pub index: usize,
    pub u: ControlInput,
    pub cost: f64,
    pub clf_feasible: bool,
    pub cbf_feasible: bool,
}

/// Per-candidate residuals `V' - a_V V + g_V` and `h' - a_h h + g_h`.
fn residuals(eval: &CandidateEvaluation, cfg: &ControllerConfig, k: usize) -> (f64, f64) {
    (
        eval.v_next[k] - cfg.alpha_v * eval.v_now + cfg.gamma_v,
        eval.h_next[k] - cfg.alpha_h * eval.h_now + cfg.gamma_h,
    )
}

/// Penalty objective of the goal-seeking problem for candidate `k`.
pub fn goal_seeking_cost(eval: &CandidateEvaluation, cfg: &ControllerConfig, k: usize) -> f64 {
    let (clf, cbf) = residuals(eval, cfg, k);
    let w = cfg.goal_seeking;
    w.effort * cfg.grid.candidates()[k].norm() + w.clf * relu(clf) + w.cbf * relu(cbf)
}

/// `argmin` over `indices` of `cost`, ties broken by smallest `|u|`, then grid order.
fn argmin_by_cost(
    grid: &ControlGrid,
    indices: impl Iterator<Item = usize>,
    cost: impl Fn(usize) -> f64,
) -> Option<(usize, f64)> {
    let candidates = grid.candidates();
    let mut best: Option<(usize, f64)> = None;
    for k in indices {
        let c = cost(k);
        best = match best {
            None => Some((k, c)),
            Some((b, bc)) => {
                if c < bc || (c == bc && candidates[k].norm() < candidates[b].norm()) {
                    Some((k, c))
                } else {
                    Some((b, bc))
                }
            }
        };
    }
    best
}

pub fn choose_goal_seeking(eval: &CandidateEvaluation, cfg: &ControllerConfig) -> GoalSeekingChoice {
    let n = cfg.grid.len();
    let mut feasible = Vec::with_capacity(n);
    let mut cbf_feasible = false;
    for k in 0..n {
        let (clf, cbf) = residuals(eval, cfg, k);
        if cbf <= 0.0 {
            cbf_feasible = true;
            if clf <= 0.0 {
                feasible.push(k);
            }
        }
    }
    let clf_feasible = !feasible.is_empty();
    let cost = |k| goal_seeking_cost(eval, cfg, k);
    let (index, cost) = if clf_feasible {
        argmin_by_cost(&cfg.grid, feasible.into_iter(), cost)
    } else {
        argmin_by_cost(&cfg.grid, 0..n, cost)
    }
    .expect("grid is nonempty");
    GoalSeekingChoice {
        index,
        u: cfg.grid.candidates()[index],
        cost,
        clf_feasible,
        cbf_feasible,
    }
}

/// Goal-seeking input with its feasibility flags.
pub fn goal_seeking_action(
    model: &CertificateModel,
    obs: &Observation,
    cfg: &ControllerConfig,
) -> (ControlInput, bool, bool) {
    let eval = evaluate_candidates(model, obs, &cfg.grid, cfg.dt, cfg.parallel);
    let choice = choose_goal_seeking(&eval, cfg);
    (choice.u, choice.clf_feasible, choice.cbf_feasible)
}

/// Normalized exploration probabilities over the grid.
///
/// A candidate gets probability zero when its barrier decrease term is
/// nonnegative, when it leaves the band `|h' - h0| < eps_h`, or when it
/// violates the goal-seeking barrier constraint `h' - a_h h + g_h <= 0`
/// (the barrier condition holds in every mode). Returns `None` when every
/// candidate is excluded.
pub fn exploration_distribution(
    eval: &CandidateEvaluation,
    h0: f64,
    cfg: &ControllerConfig,
) -> Option<Vec<f64>> {
    let w = cfg.exploration;
    let decay = cfg.exploration_decay_factor();
    let candidates = cfg.grid.candidates();
    let log_weights: Vec<Option<f64>> = (0..candidates.len())
        .map(|k| {
            let h_next = eval.h_next[k];
            let descent = h_next - decay * eval.h_now;
            let band = (h_next - h0).abs();
            let (_, cbf) = residuals(eval, cfg, k);
            if descent >= 0.0 || band >= cfg.eps_h || cbf > 0.0 {
                return None;
            }
            let v = candidates[k].v;
            Some(
                -(w.decay * leaky(descent, cfg.leaky_slope)
                    + w.band * leaky(band - cfg.eps_h, cfg.leaky_slope)
                    + w.speed * v * v),
            )
        })
        .collect();
    let max = log_weights
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let weights: Vec<f64> = log_weights
        .iter()
        .map(|lw| lw.map_or(0.0, |l| (l - max).exp()))
        .collect();
    let total: f64 = weights.iter().sum();
    Some(weights.iter().map(|w| w / total).collect())
}

fn sample_exploration(
    eval: &CandidateEvaluation,
    h0: f64,
    cfg: &ControllerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<usize, Error> {
    let probs = exploration_distribution(eval, h0, cfg).ok_or(Error::AllCandidatesExcluded)?;
    let dist = WeightedIndex::new(&probs).map_err(|_| Error::AllCandidatesExcluded)?;
    Ok(dist.sample(rng))
}

/// Samples one exploratory input.
pub fn exploratory_action(
    model: &CertificateModel,
    obs: &Observation,
    h0: f64,
    cfg: &ControllerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ControlInput, Error> {
    let eval = evaluate_candidates(model, obs, &cfg.grid, cfg.dt, cfg.parallel);
    let k = sample_exploration(&eval, h0, cfg, rng)?;
    Ok(cfg.grid.candidates()[k])
}

/// Relaxed-constraint baseline: the goal-seeking penalty argmin over the
/// whole grid, same margins, no mode switching.
pub fn clf_greedy_index(eval: &CandidateEvaluation, cfg: &ControllerConfig) -> usize {
    let w = cfg.goal_seeking;
    let candidates = cfg.grid.candidates();
    argmin_by_cost(&cfg.grid, 0..candidates.len(), |k| {
        w.clf * relu(eval.v_next[k] - cfg.alpha_v * eval.v_now + cfg.gamma_v)
            + w.cbf * relu(eval.h_next[k] - cfg.alpha_h * eval.h_now + cfg.gamma_h)
            + w.effort * candidates[k].norm()
    })
    .expect("grid is nonempty")
    .0
}

pub fn clf_greedy_action(model: &CertificateModel, obs: &Observation, cfg: &ControllerConfig) -> ControlInput {
    let eval = evaluate_candidates(model, obs, &cfg.grid, cfg.dt, cfg.parallel);
    cfg.grid.candidates()[clf_greedy_index(&eval, cfg)]
}

/// Everything the hybrid controller decided in one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    pub u: ControlInput,
    /// Mode in which `u` was chosen (the mode after the tick).
    pub mode: Mode,
    pub h: f64,
    pub v: f64,
    /// Lookahead prediction for the chosen input.
    pub h_next: f64,
    pub v_next: f64,
    pub clf_feasible: bool,
    pub cbf_feasible: bool,
}

/// One controller tick: updates `state.mode` and returns the input to apply.
pub fn hybrid_step(
    state: &mut ControllerState,
    model: &CertificateModel,
    obs: &Observation,
    cfg: &ControllerConfig,
) -> StepDecision {
    if state.mode == Mode::FailSafe {
        let h = model.cbf_value(&obs.scan);
        let v = model.clf_value(obs.rho, obs.phi);
        return StepDecision {
            u: ControlInput::ZERO,
            mode: Mode::FailSafe,
            h,
            v,
            h_next: h,
            v_next: v,
            clf_feasible: false,
            cbf_feasible: false,
        };
    }
    let eval = evaluate_candidates(model, obs, &cfg.grid, cfg.dt, cfg.parallel);
    let choice = choose_goal_seeking(&eval, cfg);
    let decide = |mode: Mode, k: usize| StepDecision {
        u: cfg.grid.candidates()[k],
        mode,
        h: eval.h_now,
        v: eval.v_now,
        h_next: eval.h_next[k],
        v_next: eval.v_next[k],
        clf_feasible: choice.clf_feasible,
        cbf_feasible: choice.cbf_feasible,
    };
    if !choice.cbf_feasible {
        state.mode = Mode::FailSafe;
        return decide(Mode::FailSafe, cfg.grid.zero_index());
    }

    let mut explore_from = match state.mode {
        Mode::GoalSeeking => None,
        Mode::Exploratory { h0, v0 } => {
            if eval.v_now <= cfg.alpha_v * v0 {
                None
            } else {
                Some((h0, v0))
            }
        }
        Mode::FailSafe => unreachable!("handled above"),
    };
    if explore_from.is_none() {
        if choice.clf_feasible {
            state.mode = Mode::GoalSeeking;
            return decide(Mode::GoalSeeking, choice.index);
        }
        explore_from = Some((eval.h_now, eval.v_now));
    }
    let (h0, v0) = explore_from.expect("set above");
    match sample_exploration(&eval, h0, cfg, &mut state.rng) {
        Ok(k) => {
            state.mode = Mode::Exploratory { h0, v0 };
            decide(state.mode, k)
        }
        Err(_) => {
            state.mode = Mode::FailSafe;
            decide(Mode::FailSafe, cfg.grid.zero_index())
        }
    }
}
