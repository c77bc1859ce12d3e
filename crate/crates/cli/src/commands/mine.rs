use std::path::Path;

use clap::Args as ClapArgs;
use serde::Serialize;

use rqaoa_core::instances::{mine_hard, EnsembleSpec, WeightModel};
use rqaoa_core::rqaoa::RqaoaConfig;

use crate::manifest::ManifestBuilder;
use crate::out::{Csv, Field};

#[derive(ClapArgs, Serialize)]
pub struct Args {
    #[arg(long)]
    pub n_min: u32,
    #[arg(long)]
    pub n_max: u32,
    #[arg(long, default_value_t = 3)]
    pub d_min: u32,
    #[arg(long, default_value_t = 3)]
    pub d_max: u32,
    /// Edge weight model: gaussian or bimodal.
    #[arg(long, default_value = "bimodal")]
    pub weights: String,
    /// Instances per feasible (n, d) cell.
    #[arg(long, default_value_t = 25)]
    pub count: usize,
    /// Run budget per bimodal instance (Gaussian instances get one run).
    #[arg(long, default_value_t = 1400)]
    pub budget: usize,
    /// Keep instances with best ratio at or below this threshold.
    #[arg(long, default_value_t = 0.95)]
    pub threshold: f64,
    #[arg(long, default_value_t = 8)]
    pub nc: usize,
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: Args, out_dir: &Path) -> anyhow::Result<()> {
    let manifest = ManifestBuilder::new("mine");
    let model: WeightModel = args.weights.parse()?;
    let spec = EnsembleSpec {
        n_min: args.n_min,
        n_max: args.n_max,
        d_min: args.d_min,
        d_max: args.d_max,
        weight_model: model,
        count_per_cell: args.count,
        seed: args.seed,
    };
    let config = RqaoaConfig { n_c: args.nc, grid_n: args.grid, ..Default::default() };
    let records = mine_hard(&spec, args.budget, args.threshold, &config)?;

    let mut index =
        Csv::new("instance_id,n,d,weight_model,exact_energy,rqaoa_best,ratio,runs_used,file");
    for record in &records {
        let file = format!("{}.json", record.instance_id);
        record.instance.save(&out_dir.join(&file))?;
        index.row(vec![
            Field::from(record.instance_id.clone()),
            Field::from(record.n),
            Field::from(record.d),
            Field::from(record.weight_model.name()),
            Field::from(record.exact_energy),
            Field::from(record.rqaoa_best_energy),
            Field::from(record.ratio),
            Field::from(record.runs_used),
            Field::from(file),
        ]);
    }
    index.write(out_dir, "hard_instances.csv")?;
    println!(
        "scanned {} instances, kept {} with ratio <= {}",
        spec.cells().len() * spec.count_per_cell,
        records.len(),
        args.threshold
    );
    manifest.write(out_dir, args.seed, &args)?;
    Ok(())
}
