//! Checks of the controller's convergence and exploration properties on
//! logged episodes.
//!
//! * `Decrease`: every step acting in goal-seeking mode predicts
//!   `V' <= a_V V`.
//! * `Exit`: every exploratory -> goal-seeking transition happens at
//!   `V <= a_V V0`, where `V0` was recorded on entry.
//! * `Sequence`: the values of `V` observed at goal-seeking steps, taken in
//!   order, shrink by at least `a_V` from one to the next.
//! * `Band`: while exploring, `|h - h0| < eps_h + slack`.

use serde::{Deserialize, Serialize};

use crate::benchmark::{EpisodeLog, StepRecord};
use crate::controller::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    Decrease,
    Exit,
    Sequence,
    Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: InvariantKind,
    pub step: usize,
    /// Amount by which the inequality fails.
    pub excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceTolerances {
    pub alpha_v: f64,
    pub eps_h: f64,
    pub band_slack: f64,
    /// Relative slack for floating-point comparisons of `V`.
    pub rel_tol: f64,
}

impl TraceTolerances {
    pub fn new(alpha_v: f64, eps_h: f64) -> Self {
        Self {
            alpha_v,
            eps_h,
            band_slack: 0.5 * eps_h,
            rel_tol: 1e-9,
        }
    }

    fn slack(&self, v: f64) -> f64 {
        self.rel_tol * v.abs().max(1.0)
    }
}

fn is_goal_seeking(s: &StepRecord) -> bool {
    s.mode == Mode::GoalSeeking
}

pub fn check_decrease(steps: &[StepRecord], tol: &TraceTolerances) -> Vec<Violation> {
    steps
        .iter()
        .enumerate()
        .filter(|(_, s)| is_goal_seeking(s))
        .filter_map(|(i, s)| {
            let excess = s.v_next - tol.alpha_v * s.v;
            (excess > tol.slack(s.v)).then_some(Violation {
                kind: InvariantKind::Decrease,
                step: i,
                excess,
            })
        })
        .collect()
}

pub fn check_exit(steps: &[StepRecord], tol: &TraceTolerances) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 1..steps.len() {
        if let (Mode::Exploratory { v0, .. }, Mode::GoalSeeking) = (steps[i - 1].mode, steps[i].mode) {
            let excess = steps[i].v - tol.alpha_v * v0;
            if excess > tol.slack(v0) {
                out.push(Violation {
                    kind: InvariantKind::Exit,
                    step: i,
                    excess,
                });
            }
        }
    }
    out
}

pub fn check_sequence(steps: &[StepRecord], tol: &TraceTolerances) -> Vec<Violation> {
    let seq: Vec<(usize, f64)> = steps
        .iter()
        .enumerate()
        .filter(|(_, s)| is_goal_seeking(s))
        .map(|(i, s)| (i, s.v))
        .collect();
    seq.windows(2)
        .filter_map(|w| {
            let (_, prev) = w[0];
            let (i, next) = w[1];
            let excess = next - tol.alpha_v * prev;
            (excess > tol.slack(prev)).then_some(Violation {
                kind: InvariantKind::Sequence,
                step: i,
                excess,
            })
        })
        .collect()
}

pub fn check_band(steps: &[StepRecord], tol: &TraceTolerances) -> Vec<Violation> {
    steps
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s.mode {
            Mode::Exploratory { h0, .. } => {
                let excess = (s.h - h0).abs() - (tol.eps_h + tol.band_slack);
                (excess >= 0.0).then_some(Violation {
                    kind: InvariantKind::Band,
                    step: i,
                    excess,
                })
            }
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub episodes: usize,
    pub decrease: usize,
    pub exit: usize,
    pub sequence: usize,
    pub band: usize,
    /// First few violations, for inspection.
    pub examples: Vec<(u64, Violation)>,
}

impl TraceReport {
    pub fn total(&self) -> usize {
        self.decrease + self.exit + self.sequence + self.band
    }
}

/// Checks every invariant on every log.
pub fn check_logs(logs: &[EpisodeLog], tol: &TraceTolerances) -> TraceReport {
    let mut report = TraceReport::default();
    for log in logs {
        report.episodes += 1;
        let groups = [
            check_decrease(&log.steps, tol),
            check_exit(&log.steps, tol),
            check_sequence(&log.steps, tol),
            check_band(&log.steps, tol),
        ];
        report.decrease += groups[0].len();
        report.exit += groups[1].len();
        report.sequence += groups[2].len();
        report.band += groups[3].len();
        for v in groups.into_iter().flatten() {
            if report.examples.len() < 20 {
                report.examples.push((log.env_seed, v));
            }
        }
    }
    report
}
