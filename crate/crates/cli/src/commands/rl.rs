use std::path::{Path, PathBuf};

use clap::Args as ClapArgs;
use serde::Serialize;

use rqaoa_core::graph::IsingInstance;
use rqaoa_core::policy::PolicyKind;
use rqaoa_core::rqaoa::RqaoaConfig;
use rqaoa_core::trainer::{train, AngleInit, TrainerConfig, TrainOutcome};

use crate::commands::{exact_if_tractable, instance_id, ratio_of, run_seed};
use crate::manifest::ManifestBuilder;
use crate::out::{Csv, Field};

#[derive(ClapArgs, Serialize)]
pub struct TrainArgs {
    /// Instance file.
    pub instance: PathBuf,
    /// Episodes per training run.
    #[arg(long, default_value_t = 1400)]
    pub episodes: usize,
    /// Independent training runs.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Recursion cutoff.
    #[arg(long, default_value_t = 8)]
    pub nc: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Episodes per policy update.
    #[arg(long, default_value_t = 10)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.99)]
    pub discount: f64,
    #[arg(long, default_value_t = 0.001)]
    pub lr_angles: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lr_betas: f64,
    #[arg(long, default_value_t = 25.0)]
    pub beta_init: f64,
    /// Angle initialization: energy-optimal or random.
    #[arg(long, default_value = "energy-optimal")]
    pub angle_init: String,
    /// Gamma grid resolution for warm starts.
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
}

#[derive(ClapArgs, Serialize)]
pub struct RqaoaArgs {
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(ClapArgs, Serialize)]
pub struct RoneArgs {
    #[command(flatten)]
    pub train: TrainArgs,
}

pub fn run_rqaoa(args: RqaoaArgs, out_dir: &Path) -> anyhow::Result<()> {
    run_training("rl-rqaoa", PolicyKind::RlRqaoa, args.train, out_dir)
}

pub fn run_rone(args: RoneArgs, out_dir: &Path) -> anyhow::Result<()> {
    run_training("rl-rone", PolicyKind::RlRone, args.train, out_dir)
}

fn angle_init(name: &str) -> anyhow::Result<AngleInit> {
    match name {
        "energy-optimal" => Ok(AngleInit::EnergyOptimal),
        "random" => Ok(AngleInit::Random),
        other => anyhow::bail!("unknown angle init '{other}' (energy-optimal | random)"),
    }
}

fn run_training(
    command: &str,
    kind: PolicyKind,
    args: TrainArgs,
    out_dir: &Path,
) -> anyhow::Result<()> {
    let mut manifest = ManifestBuilder::new(command);
    manifest.add_input(&args.instance)?;
    let instance = IsingInstance::load(&args.instance)?;
    let id = instance_id(&args.instance, &instance);
    let exact = exact_if_tractable(&instance)?;
    let rqaoa_config = RqaoaConfig { n_c: args.nc, grid_n: args.grid, ..Default::default() };

    let mut best_overall: Option<(usize, f64)> = None;
    for run in 0..args.runs {
        let trainer_config = TrainerConfig {
            batch_size: args.batch,
            total_episodes: args.episodes,
            discount: args.discount,
            lr_angles: args.lr_angles,
            lr_betas: args.lr_betas,
            beta_init: args.beta_init,
            angle_init: angle_init(&args.angle_init)?,
            seed: run_seed(args.seed, run as u64),
            ..Default::default()
        };
        let outcome: TrainOutcome = train(&instance, kind, &trainer_config, &rqaoa_config)?;

        let mut curve = Csv::new("episode,energy,best_so_far,ratio");
        for stat in &outcome.curve {
            curve.row(vec![
                Field::from(stat.episode),
                Field::from(stat.energy),
                Field::from(stat.best_so_far),
                Field::from(ratio_of(stat.best_so_far, exact)),
            ]);
        }
        curve.write(out_dir, &format!("curve_run{run:02}.csv"))?;
        std::fs::write(
            out_dir.join(format!("checkpoint_run{run:02}.json")),
            outcome.params.to_json()?,
        )?;

        if let Some(best) = &outcome.best {
            let is_better = best_overall.map_or(true, |(_, e)| best.energy > e);
            if is_better {
                best_overall = Some((run, best.energy));
                let record = BestRecord {
                    instance_id: id.clone(),
                    run,
                    energy: best.energy,
                    exact_energy: exact,
                    ratio: ratio_of(best.energy, exact),
                    assignment: best
                        .assignment
                        .iter()
                        .map(|(v, s)| (v, i32::from(s)))
                        .collect(),
                };
                std::fs::write(
                    out_dir.join("best.json"),
                    serde_json::to_string_pretty(&record)?,
                )?;
            }
        }
    }

    if let Some((run, energy)) = best_overall {
        println!(
            "{id}: best energy {energy} (run {run}){}",
            ratio_of(energy, exact).map(|r| format!(", ratio {r:.4}")).unwrap_or_default()
        );
    }
    manifest.write(out_dir, args.seed, &args)?;
    Ok(())
}

#[derive(Serialize)]
struct BestRecord {
    instance_id: String,
    run: usize,
    energy: f64,
    exact_energy: Option<f64>,
    ratio: Option<f64>,
    assignment: Vec<(u32, i32)>,
}
