//! The greedy recursive solver: optimize angles, compute correlations,
//! eliminate the max-|M| variable with uniform tie-breaking, recurse down to
//! `n_c` vertices, solve the remainder exactly, and lift the solution back.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, IsingInstance, ReconstructionMap, Spin, SpinAssignment};
use crate::qaoa::{all_correlations, optimize_angles, Angles, CorrelationVector};
use crate::seeding::stream_rng;

/// Hard cap on exact enumeration (2^29 states after symmetry halving).
pub const MAX_BRUTE_FORCE_VERTICES: usize = 30;

/// Sign convention used throughout: zero correlations count as positive.
pub fn sign_of(m: f64) -> Spin {
    if m < 0.0 {
        -1
    } else {
        1
    }
}

/// Configuration of a recursive run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RqaoaConfig {
    /// Recursion cutoff: remaining subproblem is solved exactly.
    pub n_c: usize,
    /// Edges within this distance of the max |M| count as tied.
    pub tie_tolerance: f64,
    /// Gamma grid resolution for the per-iteration angle search.
    pub grid_n: usize,
    /// Master seed; per-run streams are derived from it.
    pub seed: u64,
}

impl Default for RqaoaConfig {
    fn default() -> Self {
        RqaoaConfig { n_c: 8, tie_tolerance: 1e-8, grid_n: 2000, seed: 0 }
    }
}

impl RqaoaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.n_c < 1 || self.n_c > n {
            return Err(Error::InvalidConfig(format!(
                "n_c = {} outside 1..={n}",
                self.n_c
            )));
        }
        if self.tie_tolerance < 0.0 {
            return Err(Error::InvalidConfig("tie_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Outcome of one recursive run (or one training episode).
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Spins for every original vertex.
    pub assignment: SpinAssignment,
    /// Energy of `assignment` on the untouched original instance.
    pub energy: f64,
    /// `energy / exact`, attached only when the exact optimum is known and positive.
    pub approx_ratio: Option<f64>,
    /// Per-iteration number of edges tied at the max |M| (1 = no tie).
    pub tie_counts: Vec<usize>,
    /// Chosen edge, imposed sign, and |M| per iteration.
    pub trajectory: Vec<(Edge, Spin, f64)>,
    /// Angles used at each iteration.
    pub angle_log: Vec<Angles>,
}

impl RunResult {
    /// Attaches the approximation ratio when the exact optimum is positive.
    pub fn with_exact(mut self, exact: f64) -> Self {
        self.approx_ratio = if exact > 0.0 { Some(self.energy / exact) } else { None };
        self
    }
}

/// Edges whose |M| is within `tie_tolerance` of the maximum, in edge order.
pub fn tie_set(correlations: &CorrelationVector, tie_tolerance: f64) -> Vec<(Edge, Spin, f64)> {
    let max = match correlations.max_abs() {
        Some(m) => m,
        None => return Vec::new(),
    };
    correlations
        .iter()
        .filter(|(_, m)| m.abs() >= max - tie_tolerance)
        .map(|(e, m)| (e, sign_of(m), m.abs()))
        .collect()
}

/// Uniformly selects one of the edges tied at the maximum |M|; the returned
/// sign is the sign of that edge's correlation (zero counts as +1).
pub fn select_edge_greedy(
    correlations: &CorrelationVector,
    rng: &mut impl Rng,
    tie_tolerance: f64,
) -> Result<(Edge, Spin)> {
    let ties = tie_set(correlations, tie_tolerance);
    if ties.is_empty() {
        return Err(Error::EmptyCorrelations);
    }
    let (edge, sign, _) = ties[rng.gen_range(0..ties.len())];
    Ok((edge, sign))
}

/// Exact maximum by Gray-code enumeration. Exploits global spin-flip symmetry
/// when there are no external fields (first vertex pinned to +1, each found
/// maximizer counted twice). Integral weights take an exact integer path.
pub fn brute_force_exact(instance: &IsingInstance) -> Result<(SpinAssignment, f64, u64)> {
    let verts = instance.vertices().to_vec();
    let m = verts.len();
    if m > MAX_BRUTE_FORCE_VERTICES {
        return Err(Error::SizeLimit { n: m, max: MAX_BRUTE_FORCE_VERTICES });
    }
    if m == 0 {
        return Ok((SpinAssignment::empty(instance.n_original() as usize), instance.offset(), 1));
    }

    let pos: HashMap<u32, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<(usize, f64)>> = {
        let mut adj = vec![Vec::new(); m];
        for (edge, w) in instance.edges() {
            let u = pos[&edge.u];
            let v = pos[&edge.v];
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        adj
    };
    let fields: Vec<f64> = verts.iter().map(|&v| instance.field(v)).collect();
    let symmetric = fields.iter().all(|&h| h == 0.0);

    let integral = instance
        .edges()
        .map(|(_, w)| w)
        .chain(fields.iter().copied())
        .all(|w| w.fract() == 0.0 && w.abs() < 1e12);

    let (best_bits, best_energy, degeneracy) = if integral {
        let adj_i: Vec<Vec<(usize, i64)>> = adj
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(k, w)| (k, w as i64)).collect())
            .collect();
        let fields_i: Vec<i64> = fields.iter().map(|&h| h as i64).collect();
        enumerate_gray_integer(m, &adj_i, &fields_i, symmetric)
    } else {
        enumerate_gray_float(m, &adj, &fields, symmetric)
    };

    let mut assignment = SpinAssignment::empty(instance.n_original() as usize);
    for (i, &v) in verts.iter().enumerate() {
        assignment.set(v, if best_bits >> i & 1 == 0 { 1 } else { -1 });
    }
    let energy = instance.energy(&assignment)?;
    debug_assert!((energy - (best_energy + instance.offset())).abs() < 1e-6);
    let degeneracy = if symmetric { degeneracy * 2 } else { degeneracy };
    Ok((assignment, energy, degeneracy))
}

/// Gray-code walk over spin configurations with exact integer energies.
/// Returns (bits of a maximizer, max energy sans offset, maximizer count).
fn enumerate_gray_integer(
    m: usize,
    adj: &[Vec<(usize, i64)>],
    fields: &[i64],
    symmetric: bool,
) -> (u64, f64, u64) {
    let mut spins = vec![1i64; m];
    let mut energy: i64 = fields.iter().sum::<i64>()
        + adj
            .iter()
            .enumerate()
            .map(|(u, nbrs)| nbrs.iter().filter(|&&(k, _)| k > u).map(|&(_, w)| w).sum::<i64>())
            .sum::<i64>();
    let free = if symmetric { m - 1 } else { m };
    let steps = 1u64 << free;
    let mut best_energy = energy;
    let mut best_bits = 0u64;
    let mut bits = 0u64;
    let mut count = 1u64;
    for i in 1..steps {
        let flip = i.trailing_zeros() as usize;
        // Local field of the flipped spin before the flip.
        let local: i64 =
            fields[flip] + adj[flip].iter().map(|&(k, w)| w * spins[k]).sum::<i64>();
        energy -= 2 * spins[flip] * local;
        spins[flip] = -spins[flip];
        bits ^= 1 << flip;
        if energy > best_energy {
            best_energy = energy;
            best_bits = bits;
            count = 1;
        } else if energy == best_energy {
            count += 1;
        }
    }
    (best_bits, best_energy as f64, count)
}

/// Float Gray-code walk. Incremental energies are only used for screening;
/// candidates near the running maximum are re-evaluated from scratch, and the
/// running value is re-synced periodically to keep drift below the margin.
fn enumerate_gray_float(
    m: usize,
    adj: &[Vec<(usize, f64)>],
    fields: &[f64],
    symmetric: bool,
) -> (u64, f64, u64) {
    const MARGIN: f64 = 1e-6;
    const RESYNC_MASK: u64 = (1 << 20) - 1;
    let exact = |spins: &[f64]| -> f64 {
        let mut e = 0.0;
        for (u, nbrs) in adj.iter().enumerate() {
            e += fields[u] * spins[u];
            for &(k, w) in nbrs {
                if k > u {
                    e += w * spins[u] * spins[k];
                }
            }
        }
        e
    };

    let mut spins = vec![1.0f64; m];
    let mut energy = exact(&spins);
    let free = if symmetric { m - 1 } else { m };
    let steps = 1u64 << free;
    let mut best_energy = energy;
    let mut best_bits = 0u64;
    let mut bits = 0u64;
    let mut count = 1u64;
    for i in 1..steps {
        let flip = i.trailing_zeros() as usize;
        let local: f64 =
            fields[flip] + adj[flip].iter().map(|&(k, w)| w * spins[k]).sum::<f64>();
        energy -= 2.0 * spins[flip] * local;
        spins[flip] = -spins[flip];
        bits ^= 1 << flip;
        if i & RESYNC_MASK == 0 {
            energy = exact(&spins);
        }
        if energy >= best_energy - MARGIN {
            let e = exact(&spins);
            if e > best_energy {
                best_energy = e;
                best_bits = bits;
                count = 1;
            } else if e == best_energy {
                count += 1;
            }
        }
    }
    (best_bits, best_energy, count)
}

/// Memo for repeated subproblems within a set of runs on one instance.
/// Different runs revisit the same intermediate graphs (tie branches merge
/// again after permuted eliminations), and the per-level angle optimization
/// is a pure function of the surviving weighted graph.
#[derive(Default)]
pub(crate) struct LevelCache {
    map: Mutex<HashMap<Vec<u64>, (Angles, CorrelationVector)>>,
}

const LEVEL_CACHE_CAP: usize = 200_000;

impl LevelCache {
    fn key(instance: &IsingInstance) -> Vec<u64> {
        let mut key = Vec::with_capacity(instance.num_edges() * 2 + 1);
        key.push(instance.num_vertices() as u64);
        for (edge, w) in instance.edges() {
            key.push(u64::from(edge.u) << 32 | u64::from(edge.v));
            key.push(w.to_bits());
        }
        key
    }

    fn level(&self, instance: &IsingInstance, grid_n: usize) -> Result<(Angles, CorrelationVector)> {
        let key = Self::key(instance);
        if let Some(hit) = self.map.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let (angles, _) = optimize_angles(instance, grid_n)?;
        let correlations = all_correlations(instance, angles);
        let mut map = self.map.lock().unwrap();
        if map.len() < LEVEL_CACHE_CAP {
            map.insert(key, (angles, correlations.clone()));
        }
        Ok((angles, correlations))
    }
}

/// Completes an instance whose edges all cancelled: every assignment is
/// optimal when fields are zero (all survivors get +1); otherwise each
/// survivor independently follows its field sign.
fn complete_edgeless(instance: &IsingInstance, x: &mut SpinAssignment) {
    for &v in instance.vertices() {
        let h = instance.field(v);
        x.set(v, if h < 0.0 { -1 } else { 1 });
    }
}

pub(crate) fn run_rqaoa_cached(
    instance: &IsingInstance,
    config: &RqaoaConfig,
    rng: &mut ChaCha8Rng,
    cache: Option<&LevelCache>,
) -> Result<RunResult> {
    let n = instance.num_vertices();
    config.validate(n)?;
    if n < config.n_c {
        return Err(Error::InvalidConfig(format!(
            "instance has {n} vertices, below n_c = {}",
            config.n_c
        )));
    }

    let iterations = n - config.n_c;
    let mut current = instance.clone();
    let mut map = ReconstructionMap::new();
    let mut tie_counts = Vec::with_capacity(iterations);
    let mut trajectory = Vec::with_capacity(iterations);
    let mut angle_log = Vec::with_capacity(iterations);

    for _ in 0..iterations {
        if current.num_edges() == 0 {
            break;
        }
        let (angles, correlations) = match cache {
            Some(cache) => cache.level(&current, config.grid_n)?,
            None => {
                let (angles, _) = optimize_angles(&current, config.grid_n)?;
                let correlations = all_correlations(&current, angles);
                (angles, correlations)
            }
        };
        let ties = tie_set(&correlations, config.tie_tolerance);
        let (edge, sign, m_abs) = ties[rng.gen_range(0..ties.len())];
        let (next, record) = current.contract(edge, sign)?;
        tie_counts.push(ties.len());
        trajectory.push((edge, sign, m_abs));
        angle_log.push(angles);
        map.push(record);
        current = next;
    }
    // Early exit on an empty intermediate graph leaves untaken iterations
    // with zero tied edges.
    tie_counts.resize(iterations, 0);

    let x_final = if current.num_edges() == 0 {
        let mut x = SpinAssignment::empty(instance.n_original() as usize);
        complete_edgeless(&current, &mut x);
        x
    } else {
        brute_force_exact(&current)?.0
    };
    // Brute force leaves non-surviving labels unassigned; reconstruction
    // fills them in reverse elimination order.
    let assignment = map.reconstruct(&x_final)?;
    let energy = instance.energy(&assignment)?;

    Ok(RunResult { assignment, energy, approx_ratio: None, tie_counts, trajectory, angle_log })
}

/// One recursive run: `n - n_c` eliminations followed by exact solution of
/// the remainder and reconstruction.
pub fn run_rqaoa(
    instance: &IsingInstance,
    config: &RqaoaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<RunResult> {
    run_rqaoa_cached(instance, config, rng, None)
}

/// Best of `k` independent runs with per-run RNG streams derived from the
/// config seed. Runs execute in parallel; the winner is the lowest-index run
/// achieving the maximum energy, so results match sequential execution.
pub fn best_of_runs(instance: &IsingInstance, config: &RqaoaConfig, k: usize) -> Result<RunResult> {
    let (result, _) = best_of_runs_with_stop(instance, config, k, None)?;
    Ok(result)
}

/// `best_of_runs` with an optional early-stop threshold: evaluation halts
/// (in sequential run order) as soon as a run reaches `stop_at`. Returns the
/// best result seen and the number of runs actually evaluated.
pub fn best_of_runs_with_stop(
    instance: &IsingInstance,
    config: &RqaoaConfig,
    k: usize,
    stop_at: Option<f64>,
) -> Result<(RunResult, usize)> {
    if k < 1 {
        return Err(Error::InvalidBudget(format!("need at least 1 run, got {k}")));
    }
    config.validate(instance.num_vertices())?;
    let cache = LevelCache::default();
    let chunk = rayon::current_num_threads().max(1) * 4;
    let mut best: Option<RunResult> = None;
    let mut used = 0;
    let mut start = 0;
    'outer: while start < k {
        let end = (start + chunk).min(k);
        let results: Vec<Result<RunResult>> = (start..end)
            .into_par_iter()
            .map(|run_idx| {
                let mut rng = stream_rng(config.seed, run_idx as u64);
                run_rqaoa_cached(instance, config, &mut rng, Some(&cache))
            })
            .collect();
        for (offset, result) in results.into_iter().enumerate() {
            let result = result?;
            used = start + offset + 1;
            let better = best.as_ref().map_or(true, |b| result.energy > b.energy);
            if better {
                best = Some(result);
            }
            if let Some(threshold) = stop_at {
                if best.as_ref().unwrap().energy >= threshold {
                    break 'outer;
                }
            }
        }
        start = end;
    }
    Ok((best.expect("k >= 1"), used))
}
