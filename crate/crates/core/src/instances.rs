//! Benchmark instance generation: random regular graphs with Gaussian or
//! bimodal weights, the small cubic cage catalog, and mining of instances
//! where the greedy recursion stays below an approximation-ratio threshold.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, InstanceMetadata, IsingInstance};
use crate::rqaoa::{best_of_runs_with_stop, brute_force_exact, RqaoaConfig};
use crate::seeding::stream_rng;

/// Edge weight distributions of the benchmark ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightModel {
    /// Standard normal N(0, 1) per edge.
    #[serde(rename = "gaussian")]
    Gaussian,
    /// Uniform over {-1, +1} per edge.
    #[serde(rename = "bimodal")]
    Bimodal,
}

impl WeightModel {
    pub fn name(&self) -> &'static str {
        match self {
            WeightModel::Gaussian => "gaussian",
            WeightModel::Bimodal => "bimodal",
        }
    }
}

impl std::str::FromStr for WeightModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(WeightModel::Gaussian),
            "bimodal" => Ok(WeightModel::Bimodal),
            other => Err(Error::InvalidConfig(format!("unknown weight model '{other}'"))),
        }
    }
}

/// Unweighted simple graph used between generation and weight assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub n: u32,
    pub edges: Vec<Edge>,
}

impl Graph {
    fn degree_check(&self, d: usize) -> bool {
        let mut deg = vec![0usize; self.n as usize];
        for e in &self.edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        deg.iter().all(|&x| x == d)
    }

    /// Length of the shortest cycle (`None` for forests): per-edge BFS for
    /// the shortest alternative path between its endpoints.
    pub fn girth(&self) -> Option<usize> {
        let n = self.n as usize;
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.u as usize].push(e.v as usize);
            adj[e.v as usize].push(e.u as usize);
        }
        let mut best: Option<usize> = None;
        for e in &self.edges {
            let (s, t) = (e.u as usize, e.v as usize);
            // BFS from s to t avoiding the direct edge.
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if x == s && y == t {
                        continue;
                    }
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            if dist[t] != usize::MAX {
                let cycle = dist[t] + 1;
                best = Some(best.map_or(cycle, |b| b.min(cycle)));
            }
        }
        best
    }
}

/// Random simple `d`-regular graph on `n` vertices via stub pairing with
/// restart on clashes; dense degrees are generated as the complement of a
/// sparse regular graph. Uniformity over regular graphs is not required,
/// only exact regularity and simplicity.
pub fn gen_random_regular(n: u32, d: u32, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if d < 1 || d > n.saturating_sub(1) {
        return Err(Error::InfeasibleParameters(format!(
            "degree {d} not in 1..={} for n = {n}",
            n.saturating_sub(1)
        )));
    }
    if (n as u64 * d as u64) % 2 != 0 {
        return Err(Error::InfeasibleParameters(format!("n*d = {n}*{d} must be even")));
    }
    if d > (n - 1) / 2 {
        // Complement trick: the complement of a simple (n-1-d)-regular
        // graph is simple d-regular, and n*(n-1-d) keeps the same parity.
        let sparse_d = n - 1 - d;
        let sparse = if sparse_d == 0 {
            Graph { n, edges: Vec::new() }
        } else {
            pair_stubs(n, sparse_d, rng)
        };
        let mut present = vec![false; (n as usize * (n as usize - 1)) / 2];
        let index = |e: &Edge| {
            let (u, v, n) = (e.u as usize, e.v as usize, n as usize);
            u * n - u * (u + 1) / 2 + (v - u - 1)
        };
        for e in &sparse.edges {
            present[index(e)] = true;
        }
        let mut edges = Vec::with_capacity((n as usize * d as usize) / 2);
        for u in 0..n {
            for v in (u + 1)..n {
                let e = Edge::new(u, v);
                if !present[index(&e)] {
                    edges.push(e);
                }
            }
        }
        let graph = Graph { n, edges };
        debug_assert!(graph.degree_check(d as usize));
        return Ok(graph);
    }
    let graph = pair_stubs(n, d, rng);
    debug_assert!(graph.degree_check(d as usize));
    Ok(graph)
}

/// Configuration-model pairing: shuffle the stub multiset and match halves,
/// restarting whenever a self-loop or duplicate edge appears.
fn pair_stubs(n: u32, d: u32, rng: &mut ChaCha8Rng) -> Graph {
    let mut stubs: Vec<u32> = (0..n).flat_map(|v| std::iter::repeat(v).take(d as usize)).collect();
    let half = stubs.len() / 2;
    'retry: loop {
        stubs.shuffle(rng);
        let mut seen = std::collections::HashSet::with_capacity(half);
        let mut edges = Vec::with_capacity(half);
        for i in 0..half {
            let (a, b) = (stubs[i], stubs[i + half]);
            if a == b {
                continue 'retry;
            }
            let e = Edge::new(a, b);
            if !seen.insert(e) {
                continue 'retry;
            }
            edges.push(e);
        }
        edges.sort();
        return Graph { n, edges };
    }
}

/// Draws independent edge weights. Gaussian draws are rejected wholesale and
/// redrawn if any two edges collide exactly (keeps ground states unique with
/// probability one, and the event is logged).
pub fn assign_weights(graph: &Graph, model: WeightModel, rng: &mut ChaCha8Rng) -> IsingInstance {
    loop {
        let weights: Vec<f64> = match model {
            WeightModel::Bimodal => {
                (0..graph.edges.len()).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect()
            }
            WeightModel::Gaussian => (0..graph.edges.len())
                .map(|_| {
                    loop {
                        let w: f64 = StandardNormal.sample(rng);
                        if w != 0.0 {
                            break w;
                        }
                    }
                })
                .collect(),
        };
        if model == WeightModel::Gaussian {
            let mut sorted: Vec<u64> = weights.iter().map(|w| w.to_bits()).collect();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                log::warn!("duplicate gaussian edge weights; regenerating");
                continue;
            }
        }
        let edges: Vec<(u32, u32, f64)> = graph
            .edges
            .iter()
            .zip(&weights)
            .map(|(e, &w)| (e.u, e.v, w))
            .collect();
        return IsingInstance::new(graph.n, &edges, &[]).expect("generated instance is valid");
    }
}

/// Embedded catalog of small cubic cages; larger ones can be imported as
/// instance files instead.
///
/// Entries are `(d, g, vertices, construction)`.
const PETERSEN_EDGES: [(u32, u32); 15] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    (0, 4),
    (5, 7),
    (7, 9),
    (6, 9),
    (6, 8),
    (5, 8),
    (0, 5),
    (1, 6),
    (2, 7),
    (3, 8),
    (4, 9),
];

const HEAWOOD_LCF: (&[i64], usize) = (&[5, -5], 7);
const MCGEE_LCF: (&[i64], usize) = (&[12, 7, -7], 8);
const TUTTE_COXETER_LCF: (&[i64], usize) = (&[-13, -9, 7, -7, 9, 13], 5);

/// Decodes LCF notation: a Hamiltonian cycle on `0..n` plus one chord per
/// vertex given by the repeated offset pattern.
fn lcf_graph(pattern: &[i64], repeats: usize) -> Graph {
    let n = (pattern.len() * repeats) as u32;
    let mut set = std::collections::BTreeSet::new();
    for v in 0..n {
        set.insert(Edge::new(v, (v + 1) % n));
        let offset = pattern[v as usize % pattern.len()];
        let w = (v as i64 + offset).rem_euclid(n as i64) as u32;
        set.insert(Edge::new(v, w));
    }
    Graph { n, edges: set.into_iter().collect() }
}

/// Returns the catalogued `(d, g)`-cage, verifying degree and girth on load.
/// Catalogued: (3,5) Petersen, (3,6) Heawood, (3,7) McGee, (3,8)
/// Tutte-Coxeter.
pub fn cage(d: u32, g: u32) -> Result<Graph> {
    let graph = match (d, g) {
        (3, 5) => Graph { n: 10, edges: PETERSEN_EDGES.iter().map(|&(u, v)| Edge::new(u, v)).collect() },
        (3, 6) => lcf_graph(HEAWOOD_LCF.0, HEAWOOD_LCF.1),
        (3, 7) => lcf_graph(MCGEE_LCF.0, MCGEE_LCF.1),
        (3, 8) => lcf_graph(TUTTE_COXETER_LCF.0, TUTTE_COXETER_LCF.1),
        _ => {
            return Err(Error::NotAvailable(format!(
                "({d},{g})-cage is not embedded; import it as an instance file instead"
            )))
        }
    };
    if !graph.degree_check(d as usize) {
        return Err(Error::InvalidInstance(format!("catalogued ({d},{g})-cage failed degree check")));
    }
    match graph.girth() {
        Some(girth) if girth == g as usize => Ok(graph),
        other => Err(Error::InvalidInstance(format!(
            "catalogued ({d},{g})-cage has girth {other:?}"
        ))),
    }
}

/// Parameter grid for ensemble generation and mining.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_min: u32,
    pub n_max: u32,
    pub d_min: u32,
    pub d_max: u32,
    pub weight_model: WeightModel,
    /// Instances per feasible (n, d) cell.
    pub count_per_cell: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    /// Feasible (n, d) cells in scan order.
    pub fn cells(&self) -> Vec<(u32, u32)> {
        let mut cells = Vec::new();
        for n in self.n_min..=self.n_max {
            for d in self.d_min..=self.d_max.min(n.saturating_sub(1)) {
                if (n as u64 * d as u64) % 2 == 0 {
                    cells.push((n, d));
                }
            }
        }
        cells
    }
}

/// A mined instance on which the greedy recursion stayed at or below the
/// ratio threshold with the full run budget.
#[derive(Debug, Clone)]
pub struct HardInstanceRecord {
    pub instance: IsingInstance,
    pub instance_id: String,
    pub n: u32,
    pub d: u32,
    pub weight_model: WeightModel,
    pub exact_energy: f64,
    pub rqaoa_best_energy: f64,
    pub ratio: f64,
    pub runs_used: usize,
}

/// Deterministic stream id for instance `(n, d, index)` cells.
fn cell_stream(n: u32, d: u32, index: usize) -> u64 {
    (u64::from(n) << 40) | (u64::from(d) << 24) | index as u64
}

/// Generates one ensemble member.
pub fn ensemble_instance(spec: &EnsembleSpec, n: u32, d: u32, index: usize) -> Result<IsingInstance> {
    let mut rng = stream_rng(spec.seed, cell_stream(n, d, index));
    let graph = gen_random_regular(n, d, &mut rng)?;
    let instance = assign_weights(&graph, spec.weight_model, &mut rng);
    Ok(instance.with_metadata(InstanceMetadata {
        weight_model: spec.weight_model.name().to_string(),
        seed: spec.seed ^ cell_stream(n, d, index),
    }))
}

/// Scans the ensemble for instances whose best ratio over the run budget
/// stays at or below `threshold`. Bimodal instances get the full budget
/// (greedy runs stop early once the threshold is exceeded); Gaussian
/// instances are deterministic up to tie-breaking (unique ground states) and
/// get a single run. Instances with non-positive exact optimum are skipped.
pub fn mine_hard(
    spec: &EnsembleSpec,
    run_budget: usize,
    threshold: f64,
    rqaoa_config: &RqaoaConfig,
) -> Result<Vec<HardInstanceRecord>> {
    if run_budget < 1 {
        return Err(Error::InvalidBudget(format!("run budget must be >= 1, got {run_budget}")));
    }
    let mut jobs = Vec::new();
    for (n, d) in spec.cells() {
        for index in 0..spec.count_per_cell {
            jobs.push((n, d, index));
        }
    }
    let records: Vec<Result<Option<HardInstanceRecord>>> = jobs
        .par_iter()
        .map(|&(n, d, index)| {
            let instance = ensemble_instance(spec, n, d, index)?;
            mine_one(spec, &instance, n, d, index, run_budget, threshold, rqaoa_config)
        })
        .collect();
    let mut found = Vec::new();
    for record in records {
        if let Some(r) = record? {
            found.push(r);
        }
    }
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn mine_one(
    spec: &EnsembleSpec,
    instance: &IsingInstance,
    n: u32,
    d: u32,
    index: usize,
    run_budget: usize,
    threshold: f64,
    rqaoa_config: &RqaoaConfig,
) -> Result<Option<HardInstanceRecord>> {
    let (_, exact, _) = brute_force_exact(instance)?;
    if exact <= 0.0 {
        log::warn!("skipping n={n} d={d} #{index}: non-positive exact optimum {exact}");
        return Ok(None);
    }
    let runs = match spec.weight_model {
        WeightModel::Bimodal => run_budget,
        WeightModel::Gaussian => 1,
    };
    let config = RqaoaConfig {
        seed: spec.seed ^ cell_stream(n, d, index).rotate_left(17),
        ..rqaoa_config.clone()
    };
    // A single run above the threshold disqualifies the instance, so the
    // budget is only spent in full on actual finds.
    let stop_at = threshold * exact + 1e-12;
    let (best, used) = best_of_runs_with_stop(instance, &config, runs, Some(stop_at))?;
    let ratio = best.energy / exact;
    if ratio <= threshold {
        Ok(Some(HardInstanceRecord {
            instance: instance.clone(),
            instance_id: format!("n{n}_d{d}_{}_s{}_i{index}", spec.weight_model.name(), spec.seed),
            n,
            d,
            weight_model: spec.weight_model,
            exact_energy: exact,
            rqaoa_best_energy: best.energy,
            ratio,
            runs_used: used,
        }))
    } else {
        Ok(None)
    }
}
