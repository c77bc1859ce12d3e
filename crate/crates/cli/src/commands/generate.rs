use std::path::Path;

use clap::Args as ClapArgs;
use serde::Serialize;

use rqaoa_core::instances::{ensemble_instance, EnsembleSpec, WeightModel};

use crate::manifest::ManifestBuilder;
use crate::out::{Csv, Field};

#[derive(ClapArgs, Serialize)]
pub struct Args {
    /// Smallest vertex count.
    #[arg(long)]
    pub n_min: u32,
    /// Largest vertex count.
    #[arg(long)]
    pub n_max: u32,
    /// Smallest degree.
    #[arg(long, default_value_t = 3)]
    pub d_min: u32,
    /// Largest degree.
    #[arg(long, default_value_t = 3)]
    pub d_max: u32,
    /// Edge weight model: gaussian or bimodal.
    #[arg(long, default_value = "bimodal")]
    pub weights: String,
    /// Instances per feasible (n, d) cell.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: Args, out_dir: &Path) -> anyhow::Result<()> {
    let manifest = ManifestBuilder::new("generate");
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
    let mut index = Csv::new("instance_id,n,d,weight_model,edges,file");
    let mut written = 0usize;
    for (n, d) in spec.cells() {
        for i in 0..spec.count_per_cell {
            let instance = ensemble_instance(&spec, n, d, i)?;
            let id = format!("n{n}_d{d}_{}_s{}_i{i}", model.name(), args.seed);
            let file = format!("{id}.json");
            instance.save(&out_dir.join(&file))?;
            index.row(vec![
                Field::from(id),
                Field::from(n),
                Field::from(d),
                Field::from(model.name()),
                Field::from(instance.num_edges()),
                Field::from(file),
            ]);
            written += 1;
        }
    }
    index.write(out_dir, "instances.csv")?;
    println!("wrote {written} instances to {}", out_dir.display());
    manifest.write(out_dir, args.seed, &args)?;
    Ok(())
}
