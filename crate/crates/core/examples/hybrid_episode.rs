//! Steps the hybrid controller by hand in one random environment and prints
//! every mode change.
//!
//! ```text
//! cargo run --release --example hybrid_episode [model.json] [seed]
//! ```

use certnav::benchmark::{random_env, EnvGenConfig};
use certnav::certificates::{CertificateModel, CertificateParams};
use certnav::controller::{hybrid_step, ControllerConfig, ControllerState, Mode};
use certnav::dynamics::dubins_step;
use certnav::lookahead::Observation;

fn main() -> Result<(), certnav::Error> {
    let mut args = std::env::args().skip(1);
    let model = match args.next() {
        Some(path) => CertificateModel::load(path.as_ref())?,
        None => CertificateModel::zeroed(CertificateParams::default(), 32),
    };
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let env = random_env(seed, &EnvGenConfig::default())?;
    let cfg = ControllerConfig::for_model(&model);
    let mut state = ControllerState::new(seed);
    let mut pose = env.start;
    let mut last = None;
    for k in 0..100 {
        let obs = Observation::observe(&env, &pose, model.n_rays, 3.0);
        if obs.rho <= 0.2 {
            println!("t={:.1}: reached the goal", k as f64 * 0.1);
            return Ok(());
        }
        let d = hybrid_step(&mut state, &model, &obs, &cfg);
        let label = d.mode.label();
        if last != Some(label) {
            println!(
                "t={:.1}: {label:<12} h={:+.3} V={:.3} at ({:.2}, {:.2})",
                k as f64 * 0.1,
                d.h,
                d.v,
                pose.x,
                pose.y
            );
            last = Some(label);
        }
        if d.mode == Mode::FailSafe {
            return Ok(());
        }
        pose = dubins_step(&pose, d.u, 0.1);
    }
    println!("time cap at ({:.2}, {:.2}), clearance {:.3}", pose.x, pose.y, env.clearance(pose.position()));
    Ok(())
}
