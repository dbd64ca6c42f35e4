//! Runs both policies on a few random environments and checks the trace
//! invariants on the logs.
//!
//! ```text
//! cargo run --release --example mini_benchmark [model.json] [n_envs]
//! ```

use certnav::benchmark::{benchmark, Agent, EnvGenConfig, Policy, SimConfig};
use certnav::certificates::{CertificateModel, CertificateParams};
use certnav::controller::ControllerConfig;
use certnav::trace::{check_logs, TraceTolerances};

fn main() -> Result<(), certnav::Error> {
    let mut args = std::env::args().skip(1);
    let model = match args.next() {
        Some(path) => CertificateModel::load(path.as_ref())?,
        None => CertificateModel::zeroed(CertificateParams::default(), 32),
    };
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let ctrl = ControllerConfig::for_model(&model);
    for policy in [Policy::Hybrid, Policy::ClfGreedy] {
        let agent = Agent {
            policy,
            model: &model,
            controller: &ctrl,
        };
        let run = benchmark(&agent, n, 0, &EnvGenConfig::default(), &SimConfig::default())?;
        print!("{}", run.report.summary_table(run.latency.as_ref()));
        if policy == Policy::Hybrid {
            let traces = check_logs(&run.logs, &TraceTolerances::new(ctrl.alpha_v, ctrl.eps_h));
            println!("trace invariant violations      {}", traces.total());
        }
        println!();
    }
    Ok(())
}
