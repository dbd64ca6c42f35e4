//! Command-line front end: `train`, `verify`, `run`, `bench`.
//!
//! Every subcommand reads the optional `--config` file first and then
//! applies flag overrides. Outputs go to `--out` (created if missing).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::benchmark::{
    bugtrap_env, random_env, run_batch, run_episode, write_logs_jsonl, Agent, Policy,
};
use crate::certificates::CertificateModel;
use crate::config::Config;
use crate::dynamics::dubins_step;
use crate::geometry::Environment;
use crate::plot::trajectory_svg;
use crate::training::{train_with_progress, verify, write_dataset_jsonl, write_history_csv};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "certnav", version, about = "Learned-certificate Lidar navigation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the seed of this subcommand.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train certificates; writes model.json and history.csv.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Also write the sampled dataset as dataset.jsonl.
        #[arg(long)]
        save_dataset: bool,
    },
    /// Sampling check of the barrier condition; writes feasibility.json.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// One episode; writes episode.json, steps.jsonl and trajectory.svg.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        /// `bugtrap`, `random`, or a path to an environment JSON file.
        #[arg(long, default_value = "random")]
        env: String,
        #[arg(long, default_value = "hybrid")]
        policy: String,
        /// Time cap override (s).
        #[arg(long)]
        time_cap: Option<f64>,
    },
    /// Randomized benchmark; writes report.json, episodes.jsonl, timing.json.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        n_envs: Option<usize>,
        #[arg(long, default_value = "hybrid")]
        policy: String,
        /// Score candidates on the thread pool.
        #[arg(long)]
        parallel: bool,
    },
}

fn load_config(common: &Common) -> Result<Config, Error> {
    match &common.config {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

/// Trained model from `path`, or the prior-only model when absent.
fn load_model(path: Option<&Path>, cfg: &Config) -> Result<CertificateModel, Error> {
    match path {
        Some(p) => CertificateModel::load(p),
        None => Ok(CertificateModel::zeroed(cfg.certificate, cfg.sensor.n_rays)),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train {
            common,
            epochs,
            samples,
            save_dataset,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(e) = epochs {
                cfg.training.epochs = e;
            }
            if let Some(n) = samples {
                cfg.training.n_samples = n;
            }
            cfg.validate()?;
            std::fs::create_dir_all(&common.out)?;
            let envs = cfg.training_envs()?;
            let out = train_with_progress(&envs, &cfg.train_config(), |r| {
                eprintln!("epoch {:>3}  train {:.5}  val {:.5}", r.epoch, r.train_loss, r.val_loss);
            })?;
            out.model.save(&common.out.join("model.json"))?;
            write_history_csv(&out.history, &common.out.join("history.csv"))?;
            if save_dataset {
                write_dataset_jsonl(&out.dataset, &common.out.join("dataset.jsonl"))?;
            }
            println!("wrote {}", common.out.join("model.json").display());
        }
        Command::Verify {
            common,
            model,
            samples,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(n) = samples {
                cfg.verify.samples = n;
            }
            cfg.validate()?;
            let model = load_model(model.as_deref(), &cfg)?;
            std::fs::create_dir_all(&common.out)?;
            let report = verify(&model, &cfg.verify_envs()?, &cfg.verify_config())?;
            write_json(&common.out.join("feasibility.json"), &report)?;
            println!(
                "feasible {}/{} ({:.5}), {} counterexamples kept",
                report.feasible,
                report.samples,
                report.fraction_feasible,
                report.counterexamples.len()
            );
        }
        Command::Run {
            common,
            model,
            env,
            policy,
            time_cap,
        } => {
            let cfg = load_config(&common)?;
            let seed = common.seed.unwrap_or(cfg.seed);
            let policy: Policy = policy.parse()?;
            let model = load_model(model.as_deref(), &cfg)?;
            let (environment, mut sim): (Environment, _) = match env.as_str() {
                "bugtrap" => (bugtrap_env(), cfg.bugtrap_sim_config()),
                "random" => (random_env(seed, &cfg.envs)?, cfg.sim_config()),
                path => (
                    Environment::from_json(&std::fs::read_to_string(path)?)?,
                    cfg.sim_config(),
                ),
            };
            if let Some(t) = time_cap {
                sim.time_cap = t;
            }
            sim.validate()?;
            let ctrl = cfg.controller_config(&model);
            let agent = Agent {
                policy,
                model: &model,
                controller: &ctrl,
            };
            let log = run_episode(&agent, &environment, &sim, seed);
            std::fs::create_dir_all(&common.out)?;
            write_json(&common.out.join("episode.json"), &log)?;
            log.write_steps_jsonl(&common.out.join("steps.jsonl"))?;
            let final_pose = log
                .steps
                .last()
                .map(|s| dubins_step(&s.pose, s.u, sim.dt));
            std::fs::write(
                common.out.join("trajectory.svg"),
                trajectory_svg(&environment, &log, final_pose),
            )?;
            println!("outcome: {:?} after {} steps", log.outcome, log.steps.len());
        }
        Command::Bench {
            common,
            model,
            n_envs,
            policy,
            parallel,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = common.seed {
                cfg.bench.base_seed = s;
            }
            if let Some(n) = n_envs {
                cfg.bench.n_envs = n;
            }
            if parallel {
                cfg.controller.parallel = true;
            }
            cfg.validate()?;
            let policy: Policy = policy.parse()?;
            let model = load_model(model.as_deref(), &cfg)?;
            let ctrl = cfg.controller_config(&model);
            let agent = Agent {
                policy,
                model: &model,
                controller: &ctrl,
            };
            let environments = (0..cfg.bench.n_envs as u64)
                .map(|i| {
                    let seed = cfg.bench.base_seed.wrapping_add(i);
                    random_env(seed, &cfg.envs).map(|e| (seed, e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let run = run_batch(&agent, &environments, cfg.bench.base_seed, &cfg.sim_config());
            std::fs::create_dir_all(&common.out)?;
            write_json(&common.out.join("report.json"), &run.report)?;
            write_logs_jsonl(&run.logs, &common.out.join("episodes.jsonl"))?;
            write_json(&common.out.join("timing.json"), &run.latency)?;
            print!("{}", run.report.summary_table(run.latency.as_ref()));
        }
    }
    Ok(())
}

/// Parses `args` and runs; errors are printed to stderr with exit code 2.
pub fn main_from_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
