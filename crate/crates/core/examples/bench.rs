use rqaoa_core::*;
use std::time::Instant;

fn scan(label: &str, spec: &instances::EnsembleSpec, rq: &rqaoa::RqaoaConfig) {
    let t0 = Instant::now();
    let records = instances::mine_hard(spec, 1400, 0.95, rq).unwrap();
    let total: usize = spec.cells().len() * spec.count_per_cell;
    println!("{label}: {} scanned, {} hard, {:?}", total, records.len(), t0.elapsed());
    for r in records.iter().take(8) {
        println!("   {} n={} d={} exact={} best={} ratio={:.4}", r.instance_id, r.n, r.d, r.exact_energy, r.rqaoa_best_energy, r.ratio);
    }
}

fn main() {
    let which: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    match which {
        0 => {
            // tie tolerance 0, d=3, n_c=8
            let spec = instances::EnsembleSpec { n_min: 14, n_max: 30, d_min: 3, d_max: 3,
                weight_model: instances::WeightModel::Bimodal, count_per_cell: 25, seed: 31 };
            let rq = rqaoa::RqaoaConfig { n_c: 8, tie_tolerance: 0.0, ..Default::default() };
            scan("tol0 d3 nc8", &spec, &rq);
        }
        1 => {
            // n_c = 4, d=3
            let spec = instances::EnsembleSpec { n_min: 14, n_max: 30, d_min: 3, d_max: 3,
                weight_model: instances::WeightModel::Bimodal, count_per_cell: 25, seed: 32 };
            let rq = rqaoa::RqaoaConfig { n_c: 4, ..Default::default() };
            scan("d3 nc4", &spec, &rq);
        }
        2 => {
            // wider degree range at n<=20, n_c=8 (criterion-8 style mining)
            let spec = instances::EnsembleSpec { n_min: 14, n_max: 20, d_min: 3, d_max: 19,
                weight_model: instances::WeightModel::Bimodal, count_per_cell: 4, seed: 33 };
            let rq = rqaoa::RqaoaConfig { n_c: 8, ..Default::default() };
            scan("d3-19 n14-20 nc8", &spec, &rq);
        }
        _ => {}
    }
}
