//! Compares the rigid-motion scan prediction with a fresh ray cast after
//! one control step, for a few inputs.

use certnav::dynamics::{dubins_step, local_transform};
use certnav::geometry::{raycast, Aabb, Environment, Obstacle, Point2, Pose};
use certnav::lookahead::{predict_goal, predict_scan};
use certnav::ControlInput;

fn main() {
    let env = Environment {
        obstacles: vec![Obstacle::circle(1.0, 0.2, 0.4)],
        bounds: Aabb::new(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0)),
        start: Pose::default(),
        goal: Point2::new(2.5, -1.0),
    };
    let pose = env.start;
    let scan = raycast(&env, &pose, 32, 3.0);
    let (rho, phi) = pose.range_bearing(env.goal);

    println!("{:>6} {:>6} {:>12} {:>12}", "v", "omega", "goal err", "min range");
    for (v, omega) in [(0.5, 0.0), (0.5, 1.5), (0.0, -1.5), (0.25, 0.7)] {
        let u = ControlInput::new(v, omega);
        let t = local_transform(u, 0.1);
        let next = dubins_step(&pose, u, 0.1);
        let (r1, p1) = predict_goal(rho, phi, &t);
        let (r2, p2) = next.range_bearing(env.goal);
        let goal_err = (r1 - r2).abs().max((p1 - p2).abs());
        let predicted = predict_scan(&scan, &t);
        let truth = raycast(&env, &next, 32, 3.0);
        let closest = |s: &certnav::LidarScan| s.points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
        println!(
            "{v:>6.2} {omega:>6.2} {goal_err:>12.1e} {:>6.3}/{:<6.3}",
            closest(&predicted),
            closest(&truth)
        );
    }
}
