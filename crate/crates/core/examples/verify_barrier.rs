//! Sampling check of the barrier condition for a model over a few random
//! environments.
//!
//! ```text
//! cargo run --release --example verify_barrier [model.json]
//! ```

use certnav::benchmark::{random_env, EnvGenConfig};
use certnav::certificates::{CertificateModel, CertificateParams};
use certnav::training::{verify, VerifyConfig};

fn main() -> Result<(), certnav::Error> {
    let model = match std::env::args().nth(1) {
        Some(path) => CertificateModel::load(path.as_ref())?,
        None => CertificateModel::zeroed(CertificateParams::default(), 32),
    };
    let envs = (0..20)
        .map(|s| random_env(s, &EnvGenConfig::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = VerifyConfig {
        samples: 5000,
        ..VerifyConfig::default()
    };
    let report = verify(&model, &envs, &cfg)?;
    println!(
        "{} of {} sampled states admit a safe input ({:.4})",
        report.feasible, report.samples, report.fraction_feasible
    );
    for c in report.counterexamples.iter().take(5) {
        println!("  {c:?}");
    }
    Ok(())
}
