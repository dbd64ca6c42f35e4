//! Integrates a constant-input Dubins car with exact arcs and checks that
//! coarse and fine steps agree.

use certnav::dynamics::{dubins_step, local_transform};
use certnav::geometry::Pose;
use certnav::ControlInput;

fn main() {
    let u = ControlInput::new(0.5, 0.8);
    let mut coarse = Pose::default();
    let mut fine = Pose::default();
    println!("{:>5} {:>8} {:>8} {:>8}", "t", "x", "y", "theta");
    for k in 1..=20 {
        coarse = dubins_step(&coarse, u, 0.1);
        for _ in 0..10 {
            fine = dubins_step(&fine, u, 0.01);
        }
        if k % 4 == 0 {
            println!("{:>5.1} {:>8.4} {:>8.4} {:>8.4}", k as f64 * 0.1, coarse.x, coarse.y, coarse.theta);
        }
    }
    println!("coarse vs fine: {:.2e} m", coarse.position().distance(&fine.position()));

    // the same step as a rigid motion of the robot frame
    let t = local_transform(u, 0.1);
    println!("one step moves the frame by ({:.4}, {:.4}) and turns it {:.3} rad", t.dx, t.dy, t.dtheta);
}
