//! Standalone SVG trajectory plots.

use std::fmt::Write;

use crate::benchmark::EpisodeLog;
use crate::controller::Mode;
use crate::geometry::{Environment, Obstacle, Pose};

pub const GOAL_SEEKING_COLOR: &str = "#1f77b4";
pub const EXPLORATORY_COLOR: &str = "#ff7f0e";
pub const FAIL_SAFE_COLOR: &str = "#d62728";

pub fn mode_color(mode: &Mode) -> &'static str {
    match mode {
        Mode::GoalSeeking => GOAL_SEEKING_COLOR,
        Mode::Exploratory { .. } => EXPLORATORY_COLOR,
        Mode::FailSafe => FAIL_SAFE_COLOR,
    }
}

/// Obstacles, start, goal and the path, one segment per control step colored
/// by the mode it was driven in. `final_pose` closes the last segment.
pub fn trajectory_svg(env: &Environment, log: &EpisodeLog, final_pose: Option<Pose>) -> String {
    let scale = 100.0;
    let margin = 0.2;
    let b = env.bounds;
    let x0 = b.min.x - margin;
    let y1 = b.max.y + margin;
    let w = (b.width() + 2.0 * margin) * scale;
    let h = (b.height() + 2.0 * margin) * scale;
    let px = |x: f64| (x - x0) * scale;
    let py = |y: f64| (y1 - y) * scale;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for o in &env.obstacles {
        match o {
            Obstacle::Circle { center, radius } => writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#555555"/>"##,
                px(center.x),
                py(center.y),
                radius * scale
            ),
            Obstacle::Box { min, max } => writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#555555"/>"##,
                px(min.x),
                py(max.y),
                (max.x - min.x) * scale,
                (max.y - min.y) * scale
            ),
        }
        .unwrap();
    }

    let mut poses: Vec<(Pose, &Mode)> = log.steps.iter().map(|st| (st.pose, &st.mode)).collect();
    if let (Some(p), Some(last)) = (final_pose, log.steps.last()) {
        poses.push((p, &last.mode));
    }
    for pair in poses.windows(2) {
        let (a, mode) = pair[0];
        let (b, _) = pair[1];
        writeln!(
            s,
            r#"<line class="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="3"/>"#,
            mode.label(),
            px(a.x),
            py(a.y),
            px(b.x),
            py(b.y),
            mode_color(mode)
        )
        .unwrap();
    }
    writeln!(
        s,
        r##"<circle cx="{:.2}" cy="{:.2}" r="6" fill="#2ca02c"/>"##,
        px(env.start.x),
        py(env.start.y)
    )
    .unwrap();
    writeln!(
        s,
        r##"<circle cx="{:.2}" cy="{:.2}" r="8" fill="none" stroke="#9467bd" stroke-width="3"/>"##,
        px(env.goal.x),
        py(env.goal.y)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{bugtrap_env, Outcome, Policy, StepRecord};
    use crate::dynamics::ControlInput;

    #[test]
    fn segments_carry_mode_colors() {
        let env = bugtrap_env();
        let rec = |x: f64, mode| StepRecord {
            t: 0.0,
            pose: Pose::new(x, 0.0, 0.0),
            u: ControlInput::ZERO,
            mode,
            h: 0.0,
            v: 0.0,
            h_next: 0.0,
            v_next: 0.0,
            clf_feasible: true,
            cbf_feasible: true,
            min_range: 1.0,
            clearance: 1.0,
            latency_ms: 0.0,
        };
        let log = EpisodeLog {
            env_seed: 0,
            policy: Policy::Hybrid,
            outcome: Outcome::Timeout,
            steps: vec![
                rec(0.0, Mode::GoalSeeking),
                rec(0.1, Mode::Exploratory { h0: 0.0, v0: 1.0 }),
                rec(0.2, Mode::GoalSeeking),
            ],
        };
        let svg = trajectory_svg(&env, &log, None);
        assert!(svg.contains(GOAL_SEEKING_COLOR));
        assert!(svg.contains(EXPLORATORY_COLOR));
        assert_eq!(svg.matches("<line").count(), 2);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
