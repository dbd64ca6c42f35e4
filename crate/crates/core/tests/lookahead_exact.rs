use std::f64::consts::PI;

use certnav::certificates::{CertificateModel, CertificateParams};
use certnav::dynamics::{dubins_step, local_transform};
use certnav::geometry::{normalize_angle, raycast, Aabb, Environment, Obstacle, Point2, Pose};
use certnav::lookahead::{predict_goal, predict_scan};
use certnav::ControlInput;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn predicted_goal_matches_recomputed_range_and_bearing() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let pose = Pose::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-PI..PI));
        let goal = Point2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let u = ControlInput::new(rng.gen_range(0.0..0.5), rng.gen_range(-1.5..1.5));
        let dt = 0.1;
        let (rho, phi) = pose.range_bearing(goal);
        let (rho_p, phi_p) = predict_goal(rho, phi, &local_transform(u, dt));
        let (rho_t, phi_t) = dubins_step(&pose, u, dt).range_bearing(goal);
        let dphi = normalize_angle(phi_p - phi_t).abs();
        // bearing is undefined at the goal itself
        let dphi = if rho_t < 1e-6 { 0.0 } else { dphi };
        worst = worst.max((rho_p - rho_t).abs()).max(dphi);
    }
    println!("worst goal error over 10000 cases: {worst:e}");
    assert!(worst < 1e-9, "worst error {worst:e}");
}

fn single_obstacle_env(rng: &mut ChaCha8Rng) -> Environment {
    let obstacle = if rng.gen_bool(0.5) {
        Obstacle::circle(rng.gen_range(0.8..2.0), rng.gen_range(-0.8..0.8), rng.gen_range(0.2..0.6))
    } else {
        let x = rng.gen_range(0.6..1.8);
        let y = rng.gen_range(-1.0..0.4);
        Obstacle::rect(x, y, x + rng.gen_range(0.2..0.8), y + rng.gen_range(0.2..0.8))
    };
    Environment {
        obstacles: vec![obstacle],
        bounds: Aabb::new(Point2::new(-4.0, -4.0), Point2::new(4.0, 4.0)),
        start: Pose::default(),
        goal: Point2::new(-3.0, 0.0),
    }
}

#[test]
fn predicted_scan_tracks_true_scan_for_small_motions() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for _ in 0..2000 {
        let env = single_obstacle_env(&mut rng);
        let pose = Pose::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(-0.5..0.5));
        if env.clearance(pose.position()) < 0.3 {
            continue;
        }
        // at most 0.05 m of travel in one 0.1 s step
        let u = ControlInput::new(rng.gen_range(0.0..0.5), rng.gen_range(-1.5..1.5));
        let scan = raycast(&env, &pose, 32, 3.0);
        let predicted = predict_scan(&scan, &local_transform(u, 0.1));
        let moved = dubins_step(&pose, u, 0.1);
        let to_world = moved.as_transform();
        for (q, &sat) in predicted.points.iter().zip(&scan.saturated) {
            if sat {
                continue;
            }
            // true return along the predicted point's bearing from the moved pose
            let dir = to_world.apply(*q).sub(&moved.position());
            let dir = Point2::new(dir.x / dir.norm(), dir.y / dir.norm());
            let hit = env.obstacles[0].ray_hit(moved.position(), dir);
            let Some(range) = hit.filter(|r| *r <= 3.0) else {
                continue;
            };
            compared += 1;
            worst = worst.max((q.norm() - range).abs());
        }
    }
    println!("worst per-ray range error over {compared} rays: {worst:.2e} m");
    assert!(compared > 1000);
    assert!(worst <= 0.05, "worst per-ray error {worst}");
}

#[test]
fn encoder_is_permutation_invariant_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let model = CertificateModel::new(CertificateParams::default(), 32, 99);
    let env = Environment {
        obstacles: vec![Obstacle::circle(1.0, 0.5, 0.4), Obstacle::rect(-2.0, -1.0, -1.5, 1.0)],
        bounds: Aabb::new(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0)),
        start: Pose::default(),
        goal: Point2::new(2.5, 2.5),
    };
    for _ in 0..1000 {
        let pose = Pose::new(rng.gen_range(-0.5..0.5), rng.gen_range(-2.0..0.0), rng.gen_range(-PI..PI));
        let scan = raycast(&env, &pose, 32, 3.0);
        let mut order: Vec<usize> = (0..scan.points.len()).collect();
        order.shuffle(&mut rng);
        let mut shuffled = scan.clone();
        shuffled.points = order.iter().map(|&i| scan.points[i]).collect();
        shuffled.saturated = order.iter().map(|&i| scan.saturated[i]).collect();
        let a = model.encode(&scan);
        let b = model.encode(&shuffled);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(model.cbf_value(&scan).to_bits(), model.cbf_value(&shuffled).to_bits());
    }
}
