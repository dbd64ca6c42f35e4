//! Prints the barrier and Lyapunov values of a model on a few slices.
//!
//! ```text
//! cargo run --release --example certificate_landscape [model.json]
//! ```
//! Without an argument the prior-only model is used.

use certnav::certificates::{CertificateModel, CertificateParams};
use certnav::geometry::{Aabb, Environment, Obstacle, Point2, Pose};
use certnav::lookahead::Observation;

fn main() -> Result<(), certnav::Error> {
    let model = match std::env::args().nth(1) {
        Some(path) => CertificateModel::load(path.as_ref())?,
        None => CertificateModel::zeroed(CertificateParams::default(), 32),
    };
    let a_v = model.params.alpha_v;

    println!("V(rho, phi); last column: V(rho - 0.05, 0) / V(rho, 0) against alpha_V = {a_v}");
    let phis = [0.0, 0.5, 1.0, 2.0, 3.0];
    print!("{:>6}", "rho");
    for p in phis {
        print!("{:>10}", format!("phi={p}"));
    }
    println!("{:>10}", "ratio");
    for i in 0..=12 {
        let rho = 0.25 * i as f64;
        print!("{rho:>6.2}");
        for p in phis {
            print!("{:>10.3}", model.clf_value(rho, p));
        }
        let ratio = if rho > 0.05 {
            model.clf_value(rho - 0.05, 0.0) / model.clf_value(rho, 0.0)
        } else {
            f64::NAN
        };
        println!("{ratio:>10.4}");
    }

    println!("\nh facing a wall at distance d, bearing b to the wall normal");
    let bearings = [0.0, 0.5, 1.0, 1.57, 2.5, 3.14];
    print!("{:>6}", "d");
    for b in bearings {
        print!("{:>9}", format!("b={b}"));
    }
    println!();
    let env = Environment {
        obstacles: vec![Obstacle::rect(1.0, -3.0, 1.2, 3.0)],
        bounds: Aabb::new(Point2::new(-3.0, -3.0), Point2::new(3.0, 3.0)),
        start: Pose::default(),
        goal: Point2::new(-2.0, 0.0),
    };
    for d in [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.5, 0.8, 1.2] {
        print!("{d:>6.2}");
        for b in bearings {
            let pose = Pose::new(1.0 - d, 0.0, b);
            let obs = Observation::observe(&env, &pose, model.n_rays, 3.0);
            print!("{:>9.3}", model.cbf_value(&obs.scan));
        }
        println!();
    }
    Ok(())
}
