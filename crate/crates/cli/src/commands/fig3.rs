use std::path::Path;

use clap::Args as ClapArgs;
use serde::Serialize;

use rqaoa_core::instances::{assign_weights, cage, WeightModel};
use rqaoa_core::rqaoa::{brute_force_exact, run_rqaoa, RqaoaConfig};
use rqaoa_core::seeding::stream_rng;

use crate::manifest::ManifestBuilder;
use crate::out::{mean, Csv, Field};

/// Tie statistics of the greedy recursion on bimodal weightings of the
/// 30-vertex cubic cage: per-iteration tie counts, approximation ratios, and
/// the ground-state hit rate, per weight seed and aggregated.
#[derive(ClapArgs, Serialize)]
pub struct Args {
    /// Number of independent +-1 weight assignments.
    #[arg(long, default_value_t = 5)]
    pub weight_seeds: u64,
    /// Recursive runs per weight assignment.
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    #[arg(long, default_value_t = 8)]
    pub nc: usize,
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub struct SeedStats {
    pub mean_ratio: f64,
    pub ground_state_prob: f64,
    pub tie_fraction: f64,
}

pub fn run(args: Args, out_dir: &Path) -> anyhow::Result<()> {
    let manifest = ManifestBuilder::new("bench-fig3");
    let graph = cage(3, 8)?;
    let mut ties_long = Csv::new("weight_seed,run,iteration,tied_edges");
    let mut runs_csv = Csv::new("weight_seed,run,energy,exact_energy,ratio,ground_state");
    let mut summary = Csv::new(
        "weight_seed,exact_energy,degeneracy,mean_ratio,sd_ratio,ground_state_prob,tie_iteration_fraction,mean_tied_edges",
    );
    let mut per_seed = Vec::new();

    for wseed in 0..args.weight_seeds {
        let mut wrng = stream_rng(args.seed, wseed);
        let instance = assign_weights(&graph, WeightModel::Bimodal, &mut wrng);
        let (_, exact, degeneracy) = brute_force_exact(&instance)?;
        let config = RqaoaConfig {
            n_c: args.nc,
            grid_n: args.grid,
            seed: args.seed ^ (wseed + 1).rotate_left(32),
            ..Default::default()
        };
        let mut ratios = Vec::with_capacity(args.runs);
        let mut ground = 0usize;
        let mut tie_iters = 0usize;
        let mut total_iters = 0usize;
        let mut tied_edges = 0usize;
        for run_idx in 0..args.runs {
            let mut rng = stream_rng(config.seed, run_idx as u64);
            let result = run_rqaoa(&instance, &config, &mut rng)?;
            let ratio = result.energy / exact;
            let hit = (result.energy - exact).abs() < 1e-9;
            ratios.push(ratio);
            if hit {
                ground += 1;
            }
            for (iteration, &count) in result.tie_counts.iter().enumerate() {
                ties_long.row(vec![
                    Field::from(wseed),
                    Field::from(run_idx),
                    Field::from(iteration),
                    Field::from(count),
                ]);
                if count >= 2 {
                    tie_iters += 1;
                }
                tied_edges += count;
                total_iters += 1;
            }
            runs_csv.row(vec![
                Field::from(wseed),
                Field::from(run_idx),
                Field::from(result.energy),
                Field::from(exact),
                Field::from(ratio),
                Field::from(if hit { 1u64 } else { 0 }),
            ]);
        }
        let mean_ratio = mean(&ratios);
        let sd = (ratios.iter().map(|r| (r - mean_ratio) * (r - mean_ratio)).sum::<f64>()
            / ratios.len() as f64)
            .sqrt();
        let stats = SeedStats {
            mean_ratio,
            ground_state_prob: ground as f64 / args.runs as f64,
            tie_fraction: tie_iters as f64 / total_iters.max(1) as f64,
        };
        summary.row(vec![
            Field::from(wseed),
            Field::from(exact),
            Field::from(degeneracy),
            Field::from(stats.mean_ratio),
            Field::from(sd),
            Field::from(stats.ground_state_prob),
            Field::from(stats.tie_fraction),
            Field::from(tied_edges as f64 / total_iters.max(1) as f64),
        ]);
        per_seed.push(stats);
    }

    // Aggregate row plus the acceptance-threshold verdicts.
    let agg_ratio = mean(&per_seed.iter().map(|s| s.mean_ratio).collect::<Vec<_>>());
    let agg_ground = mean(&per_seed.iter().map(|s| s.ground_state_prob).collect::<Vec<_>>());
    let agg_ties = mean(&per_seed.iter().map(|s| s.tie_fraction).collect::<Vec<_>>());
    let band_seed = per_seed
        .iter()
        .any(|s| (0.91..=1.0).contains(&s.mean_ratio) && (0.70..=1.0).contains(&s.tie_fraction));
    let mut verdict = Csv::new("check,value,threshold,pass");
    verdict.row(vec![
        Field::from("mean_ratio"),
        Field::from(agg_ratio),
        Field::from(">=0.90"),
        Field::from(u64::from(agg_ratio >= 0.90)),
    ]);
    verdict.row(vec![
        Field::from("ground_state_prob"),
        Field::from(agg_ground),
        Field::from(">=0.10"),
        Field::from(u64::from(agg_ground >= 0.10)),
    ]);
    verdict.row(vec![
        Field::from("tie_iteration_fraction"),
        Field::from(agg_ties),
        Field::from(">=0.50"),
        Field::from(u64::from(agg_ties >= 0.50)),
    ]);
    verdict.row(vec![
        Field::from("seed_in_band"),
        Field::from(u64::from(band_seed)),
        Field::from("ratio in [0.91,1.0] and ties in [0.70,1.0]"),
        Field::from(u64::from(band_seed)),
    ]);

    ties_long.write(out_dir, "ties_long.csv")?;
    runs_csv.write(out_dir, "runs.csv")?;
    summary.write(out_dir, "summary.csv")?;
    verdict.write(out_dir, "verdict.csv")?;
    println!(
        "cage(3,8): mean ratio {agg_ratio:.4}, ground-state prob {agg_ground:.3}, tie fraction {agg_ties:.3}"
    );
    manifest.write(out_dir, args.seed, &args)?;
    Ok(())
}
