//! Hybrid controller against the relaxed baseline in the bug trap. Writes
//! `bugtrap_hybrid.svg` and `bugtrap_greedy.svg`.
//!
//! ```text
//! cargo run --release --example bugtrap [model.json]
//! ```

use certnav::benchmark::{bugtrap_env, run_episode, Agent, Policy, SimConfig};
use certnav::certificates::{CertificateModel, CertificateParams};
use certnav::controller::ControllerConfig;
use certnav::dynamics::dubins_step;
use certnav::plot::trajectory_svg;

fn main() -> Result<(), certnav::Error> {
    let model = match std::env::args().nth(1) {
        Some(path) => CertificateModel::load(path.as_ref())?,
        None => CertificateModel::zeroed(CertificateParams::default(), 32),
    };
    let ctrl = ControllerConfig::for_model(&model);
    let sim = SimConfig {
        time_cap: 60.0,
        ..SimConfig::default()
    };
    let env = bugtrap_env();
    for (policy, file) in [(Policy::Hybrid, "bugtrap_hybrid.svg"), (Policy::ClfGreedy, "bugtrap_greedy.svg")] {
        let agent = Agent {
            policy,
            model: &model,
            controller: &ctrl,
        };
        let log = run_episode(&agent, &env, &sim, 1);
        let explored = log.steps.iter().filter(|s| s.mode.label() == "exploratory").count();
        println!("{policy:?}: {:?} after {} steps ({explored} exploratory)", log.outcome, log.steps.len());
        let last = log.steps.last().map(|s| dubins_step(&s.pose, s.u, sim.dt));
        std::fs::write(file, trajectory_svg(&env, &log, last))?;
    }
    Ok(())
}
