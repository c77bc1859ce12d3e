pub mod exact;
pub mod fig3;
pub mod fig5;
pub mod fig6;
pub mod generate;
pub mod landscape;
pub mod mine;
pub mod rl;
pub mod rqaoa;

use rqaoa_core::graph::IsingInstance;
use rqaoa_core::rqaoa::{brute_force_exact, MAX_BRUTE_FORCE_VERTICES};

/// Exact optimum when the instance is small enough to enumerate.
pub fn exact_if_tractable(instance: &IsingInstance) -> anyhow::Result<Option<f64>> {
    if instance.num_vertices() <= MAX_BRUTE_FORCE_VERTICES {
        Ok(Some(brute_force_exact(instance)?.1))
    } else {
        Ok(None)
    }
}

/// Ratio defined only for positive exact optima.
pub fn ratio_of(energy: f64, exact: Option<f64>) -> Option<f64> {
    match exact {
        Some(e) if e > 0.0 => Some(energy / e),
        _ => None,
    }
}

/// Derives a per-run trainer seed from the master seed.
pub fn run_seed(master: u64, run: u64) -> u64 {
    master ^ run.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Instance id from file metadata or file stem.
pub fn instance_id(path: &std::path::Path, instance: &IsingInstance) -> String {
    let meta = instance.metadata();
    if !meta.weight_model.is_empty() {
        format!(
            "{}_{}_s{}",
            path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance"),
            meta.weight_model,
            meta.seed
        )
    } else {
        path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance").to_string()
    }
}
