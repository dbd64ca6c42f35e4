use certnav::certificates::{CertificateModel, CertificateParams};
use certnav::controller::{
    choose_goal_seeking, clf_greedy_action, exploration_distribution, goal_seeking_action, hybrid_step,
    ControllerConfig, ControllerState, Mode,
};
use certnav::dynamics::ControlGrid;
use certnav::geometry::{Aabb, Environment, Obstacle, Point2, Pose};
use certnav::lookahead::{evaluate_candidates, predict_certificates, CandidateEvaluation, Observation};
use certnav::ControlInput;

fn prior_model() -> CertificateModel {
    CertificateModel::zeroed(CertificateParams::default(), 32)
}

fn open_field(goal: Point2) -> Environment {
    Environment {
        obstacles: vec![Obstacle::circle(0.0, 2.5, 0.3)],
        bounds: Aabb::new(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0)),
        start: Pose::default(),
        goal,
    }
}

fn corridor() -> Environment {
    Environment {
        obstacles: vec![Obstacle::rect(-3.0, 0.6, 3.0, 0.8), Obstacle::rect(-3.0, -0.8, 3.0, -0.6)],
        bounds: Aabb::new(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0)),
        start: Pose::default(),
        goal: Point2::new(0.3, 0.0),
    }
}

#[test]
fn rests_at_the_goal() {
    let model = prior_model();
    let cfg = ControllerConfig::for_model(&model);
    let env = open_field(Point2::new(0.0, 0.0));
    let obs = Observation::observe(&env, &Pose::default(), 32, 3.0);
    assert_eq!(model.clf_value(obs.rho, obs.phi), 0.0);
    let (u, clf, cbf) = goal_seeking_action(&model, &obs, &cfg);
    assert_eq!(u, ControlInput::ZERO);
    assert!(clf && cbf);
    assert_eq!(clf_greedy_action(&model, &obs, &cfg), ControlInput::ZERO);
}

/// Brute-force argmin over the grid, one candidate at a time.
fn oracle_goal_seeking(model: &CertificateModel, obs: &Observation, cfg: &ControllerConfig) -> (usize, bool) {
    let h = model.cbf_value(&obs.scan);
    let v = model.clf_value(obs.rho, obs.phi);
    let w = cfg.goal_seeking;
    let scored: Vec<(f64, bool, f64)> = cfg
        .grid
        .candidates()
        .iter()
        .map(|u| {
            let (h1, v1) = predict_certificates(model, obs, *u, cfg.dt);
            let clf = v1 - cfg.alpha_v * v + cfg.gamma_v;
            let cbf = h1 - cfg.alpha_h * h + cfg.gamma_h;
            let cost = w.effort * u.norm() + w.clf * clf.max(0.0) + w.cbf * cbf.max(0.0);
            (cost, clf <= 0.0 && cbf <= 0.0, u.norm())
        })
        .collect();
    let any_feasible = scored.iter().any(|s| s.1);
    let mut best: Option<usize> = None;
    for (k, s) in scored.iter().enumerate() {
        if any_feasible && !s.1 {
            continue;
        }
        best = match best {
            Some(b) if scored[b].0 < s.0 || (scored[b].0 == s.0 && scored[b].2 <= s.2) => Some(b),
            _ => Some(k),
        };
    }
    (best.unwrap(), any_feasible)
}

#[test]
fn corridor_goal_ahead_matches_exhaustive_oracle() {
    let model = prior_model();
    let cfg = ControllerConfig::for_model(&model);
    let env = corridor();
    let obs = Observation::observe(&env, &Pose::default(), 32, 3.0);
    let eval = evaluate_candidates(&model, &obs, &cfg.grid, cfg.dt, false);
    let choice = choose_goal_seeking(&eval, &cfg);
    let (want, feasible) = oracle_goal_seeking(&model, &obs, &cfg);
    assert!(feasible);
    assert_eq!(choice.index, want);
    assert!(choice.u.v > 0.0);
    assert!(eval.v_next[choice.index] < cfg.alpha_v * eval.v_now);
}

#[test]
fn parallel_scoring_is_identical() {
    let model = CertificateModel::new(CertificateParams::default(), 32, 17);
    let cfg = ControllerConfig::for_model(&model);
    let env = corridor();
    let obs = Observation::observe(&env, &Pose::new(-0.5, 0.1, 0.3), 32, 3.0);
    let serial = evaluate_candidates(&model, &obs, &cfg.grid, cfg.dt, false);
    let parallel = evaluate_candidates(&model, &obs, &cfg.grid, cfg.dt, true);
    assert_eq!(serial, parallel);
}

#[test]
fn goal_behind_wall_is_clf_infeasible_but_safe() {
    let model = prior_model();
    // no barrier margin: with gamma_h > 0 nothing is safe this close to d_c
    let cfg = ControllerConfig {
        gamma_h: 0.0,
        ..ControllerConfig::for_model(&model)
    };
    let env = certnav::benchmark::bugtrap_env();
    // facing the closed end of the trap, 0.25 m from the wall
    let pose = Pose::new(0.25, 0.0, 0.0);
    let obs = Observation::observe(&env, &pose, 32, 3.0);
    let min = certnav::geometry::min_range(&obs.scan);
    assert!(min > 0.2 && min < 0.3);
    let (_, clf, cbf) = goal_seeking_action(&model, &obs, &cfg);
    assert!(!clf);
    assert!(cbf);
    let (want, feasible) = oracle_goal_seeking(&model, &obs, &cfg);
    assert!(!feasible);
    let eval = evaluate_candidates(&model, &obs, &cfg.grid, cfg.dt, false);
    assert_eq!(choose_goal_seeking(&eval, &cfg).index, want);
}

#[test]
fn infeasible_goal_seeking_switches_to_exploration() {
    let model = prior_model();
    // no barrier margin: with gamma_h > 0 nothing is safe this close to d_c
    let cfg = ControllerConfig {
        gamma_h: 0.0,
        ..ControllerConfig::for_model(&model)
    };
    let env = certnav::benchmark::bugtrap_env();
    let obs = Observation::observe(&env, &Pose::new(0.25, 0.0, 0.0), 32, 3.0);
    let mut state = ControllerState::new(3);
    let d = hybrid_step(&mut state, &model, &obs, &cfg);
    let h = model.cbf_value(&obs.scan);
    let v = model.clf_value(obs.rho, obs.phi);
    assert_eq!(state.mode, Mode::Exploratory { h0: h, v0: v });
    assert_eq!(d.mode, state.mode);
    // the exploratory input keeps the barrier condition
    assert!(d.h_next - cfg.alpha_h * h <= 0.0);
}

#[test]
fn exploration_exits_once_lyapunov_value_drops() {
    let model = prior_model();
    let cfg = ControllerConfig::for_model(&model);
    let env = open_field(Point2::new(0.1, 0.0));
    let obs = Observation::observe(&env, &Pose::default(), 32, 3.0);
    let v = model.clf_value(obs.rho, obs.phi);
    let h = model.cbf_value(&obs.scan);
    let mut state = ControllerState::new(0);
    state.mode = Mode::Exploratory { h0: h, v0: v / 0.85 };
    let d = hybrid_step(&mut state, &model, &obs, &cfg);
    assert_eq!(state.mode, Mode::GoalSeeking);
    assert_eq!(d.mode, Mode::GoalSeeking);

    let mut state = ControllerState::new(0);
    state.mode = Mode::Exploratory { h0: h, v0: v / 0.95 };
    hybrid_step(&mut state, &model, &obs, &cfg);
    assert!(matches!(state.mode, Mode::Exploratory { .. }));
}

#[test]
fn fail_safe_latches() {
    let model = prior_model();
    let cfg = ControllerConfig::for_model(&model);
    let obs = Observation::observe(&open_field(Point2::new(1.0, 0.0)), &Pose::default(), 32, 3.0);
    let mut state = ControllerState::new(0);
    state.mode = Mode::FailSafe;
    for _ in 0..3 {
        let d = hybrid_step(&mut state, &model, &obs, &cfg);
        assert_eq!(d.u, ControlInput::ZERO);
        assert_eq!(state.mode, Mode::FailSafe);
    }
}

#[test]
fn exploration_probabilities_follow_the_gibbs_formula() {
    let grid = ControlGrid::from_candidates(vec![
        ControlInput::new(0.1, 0.0),
        ControlInput::new(0.3, 0.0),
        ControlInput::new(0.2, 0.5),
        ControlInput::new(0.4, -0.5),
    ]);
    let model = prior_model();
    let mut cfg = ControllerConfig::for_model(&model);
    cfg.grid = grid;
    let h_now = -0.5;
    let eval = CandidateEvaluation {
        h_now,
        v_now: 1.0,
        // equal, equal, outside the band, above the decay line, and the
        // appended zero input also above the decay line
        h_next: vec![-0.48, -0.48, -0.3, -0.02, -0.02],
        v_next: vec![1.0; 5],
    };
    let p = exploration_distribution(&eval, h_now, &cfg).unwrap();
    assert_eq!(p[2], 0.0);
    assert_eq!(p[3], 0.0);
    assert_eq!(p[4], 0.0);
    let ratio = p[1] / p[0];
    let want = (-0.1f64 * (0.1 * 0.1 - 0.3 * 0.3)).exp();
    assert!((ratio - want).abs() < 1e-12, "{ratio} vs {want}");
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}
