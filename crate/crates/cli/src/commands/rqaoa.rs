use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args as ClapArgs;
use serde::Serialize;

use rqaoa_core::graph::IsingInstance;
use rqaoa_core::rqaoa::{run_rqaoa, RqaoaConfig};
use rqaoa_core::seeding::stream_rng;

use crate::commands::{exact_if_tractable, instance_id, ratio_of};
use crate::manifest::ManifestBuilder;
use crate::out::{mean, Csv, Field};

#[derive(ClapArgs, Serialize)]
pub struct Args {
    /// Instance file.
    pub instance: PathBuf,
    /// Recursion cutoff.
    #[arg(long, default_value_t = 8)]
    pub nc: usize,
    /// Independent runs.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gamma grid resolution.
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    /// Tie tolerance on |M|.
    #[arg(long, default_value_t = 1e-8)]
    pub tie_tol: f64,
    /// Record wall-clock per run (makes CSVs nondeterministic).
    #[arg(long, default_value_t = false)]
    pub timings: bool,
}

pub fn run(args: Args, out_dir: &Path) -> anyhow::Result<()> {
    let mut manifest = ManifestBuilder::new("rqaoa");
    manifest.add_input(&args.instance)?;
    let instance = IsingInstance::load(&args.instance)?;
    let id = instance_id(&args.instance, &instance);
    let exact = exact_if_tractable(&instance)?;
    let config = RqaoaConfig {
        n_c: args.nc,
        tie_tolerance: args.tie_tol,
        grid_n: args.grid,
        seed: args.seed,
    };

    let mut runs_csv = Csv::new("instance_id,seed,energy,exact_energy,ratio,ties_total,runtime_ms");
    let mut ratios = Vec::new();
    let mut ground = 0usize;
    let mut tie_iterations = 0usize;
    let mut total_iterations = 0usize;
    let mut total_tied_edges = 0usize;
    let mut best_energy = f64::NEG_INFINITY;

    for run_idx in 0..args.runs {
        let started = Instant::now();
        let mut rng = stream_rng(config.seed, run_idx as u64);
        let result = run_rqaoa(&instance, &config, &mut rng)?;
        let runtime_ms = started.elapsed().as_millis() as u64;
        let ratio = ratio_of(result.energy, exact);
        if let Some(r) = ratio {
            ratios.push(r);
        }
        if let Some(e) = exact {
            if (result.energy - e).abs() < 1e-9 {
                ground += 1;
            }
        }
        best_energy = best_energy.max(result.energy);
        let ties_total: usize = result.tie_counts.iter().filter(|&&c| c >= 2).count();
        tie_iterations += ties_total;
        total_iterations += result.tie_counts.len();
        total_tied_edges += result.tie_counts.iter().sum::<usize>();
        runs_csv.row(vec![
            Field::from(id.clone()),
            Field::from(run_idx),
            Field::from(result.energy),
            Field::from(exact),
            Field::from(ratio),
            Field::from(ties_total),
            if args.timings { Field::from(runtime_ms) } else { Field::Empty },
        ]);
    }
    runs_csv.write(out_dir, "runs.csv")?;

    let mut summary = Csv::new(
        "instance_id,runs,best_energy,exact_energy,best_ratio,mean_ratio,ground_state_prob,tie_iteration_fraction,mean_tied_edges_per_iteration",
    );
    summary.row(vec![
        Field::from(id.clone()),
        Field::from(args.runs),
        Field::from(best_energy),
        Field::from(exact),
        Field::from(ratio_of(best_energy, exact)),
        if ratios.is_empty() { Field::Empty } else { Field::from(mean(&ratios)) },
        if exact.is_some() {
            Field::from(ground as f64 / args.runs as f64)
        } else {
            Field::Empty
        },
        Field::from(tie_iterations as f64 / total_iterations.max(1) as f64),
        Field::from(total_tied_edges as f64 / total_iterations.max(1) as f64),
    ]);
    summary.write(out_dir, "summary.csv")?;
    println!(
        "{id}: best {best_energy}{} over {} runs",
        exact.map(|e| format!(" (exact {e})")).unwrap_or_default(),
        args.runs
    );
    manifest.write(out_dir, args.seed, &args)?;
    Ok(())
}
