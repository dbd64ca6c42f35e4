//! Trains certificates on a handful of environments for a few epochs and
//! saves the checkpoint.
//!
//! ```text
//! cargo run --release --example train_small [out.json]
//! ```

use certnav::benchmark::{random_env, EnvGenConfig};
use certnav::training::{train_with_progress, TrainConfig};

fn main() -> Result<(), certnav::Error> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "small_model.json".into());
    let envs = (0..4)
        .map(|s| random_env(500 + s, &EnvGenConfig::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = TrainConfig {
        n_samples: 1500,
        epochs: 8,
        ..TrainConfig::default()
    };
    let result = train_with_progress(&envs, &cfg, |r| {
        println!("epoch {:>2}  train {:.4}  val {:.4}", r.epoch, r.train_loss, r.val_loss);
    })?;
    result.model.save(out.as_ref())?;
    println!("{} samples ({} held out), saved {out}", result.dataset.len(), result.n_validation);
    Ok(())
}
