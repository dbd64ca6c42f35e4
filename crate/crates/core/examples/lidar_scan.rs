//! Casts a 16-ray scan in a small room and prints each return in the
//! robot frame.
//!
//! ```text
//! cargo run --release --example lidar_scan
//! ```

use certnav::geometry::{min_range, raycast, Aabb, Environment, Obstacle, Point2, Pose};

fn main() {
    let env = Environment {
        obstacles: vec![Obstacle::circle(1.2, 0.4, 0.3), Obstacle::rect(-1.0, -1.5, 0.5, -1.2)],
        bounds: Aabb::new(Point2::new(-2.0, -2.0), Point2::new(2.0, 2.0)),
        start: Pose::new(0.0, 0.0, 0.3),
        goal: Point2::new(1.5, 1.5),
    }
    .with_walls();
    let scan = raycast(&env, &env.start, 16, 3.0);
    println!("{:>4} {:>9} {:>8} {:>8}  hit", "ray", "bearing", "x", "y");
    for (i, (p, sat)) in scan.points.iter().zip(&scan.saturated).enumerate() {
        println!(
            "{i:>4} {:>9.3} {:>8.3} {:>8.3}  {}",
            p.angle(),
            p.x,
            p.y,
            if *sat { "-" } else { "yes" }
        );
    }
    println!("min range {:.3} m, true clearance {:.3} m", min_range(&scan), env.clearance(env.start.position()));
}
