use std::path::PathBuf;

use clap::Args as ClapArgs;

use rqaoa_core::graph::IsingInstance;
use rqaoa_core::rqaoa::brute_force_exact;

#[derive(ClapArgs)]
pub struct Args {
    /// Instance file to solve.
    pub instance: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let instance = IsingInstance::load(&args.instance)?;
    let (assignment, energy, degeneracy) = brute_force_exact(&instance)?;
    println!("energy {energy}");
    println!("degeneracy {degeneracy}");
    let spins: Vec<String> =
        assignment.iter().map(|(v, s)| format!("{v}:{}", if s > 0 { "+1" } else { "-1" })).collect();
    println!("assignment {}", spins.join(" "));
    Ok(())
}
