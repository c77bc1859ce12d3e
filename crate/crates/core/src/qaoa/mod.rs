//! Closed-form depth-1 expectations, the energy landscape in the mixer
//! angle, and grid-plus-refinement optimization of the variational angles.
//!
//! For a fixed phase angle the field-free energy is an exact trigonometric
//! polynomial `p cos(4a) + q sin(4a) + r` in the mixer angle, so the optimal
//! mixer angle is available in closed form from three evaluations. The phase
//! angle is scanned on an equidistant grid and the winner is refined by a
//! bounded derivative-free maximizer.

mod compiled;
mod statevector;

pub use statevector::{statevector_expectations, StatevectorExpectations, MAX_STATEVECTOR_QUBITS};

pub(crate) use compiled::{zz_shape_with_grad, CompiledInstance, GammaTables};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, IsingInstance};

/// Variational angle pair: `alpha` drives the mixer layer, `gamma` the phase
/// layer. The engine absorbs `gamma` into the couplings before applying the
/// closed forms, so the pair here matches the circuit convention.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Angles {
    pub alpha: f64,
    pub gamma: f64,
}

impl Angles {
    pub fn new(alpha: f64, gamma: f64) -> Self {
        Angles { alpha, gamma }
    }
}

/// Two-correlations keyed by the instance's edge set, in sorted edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    edges: Vec<Edge>,
    values: Vec<f64>,
}

impl CorrelationVector {
    pub(crate) fn from_parts(edges: Vec<Edge>, values: Vec<f64>) -> Self {
        debug_assert_eq!(edges.len(), values.len());
        CorrelationVector { edges, values }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn get(&self, edge: Edge) -> Option<f64> {
        self.edges.binary_search(&edge).ok().map(|i| self.values[i])
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.edges.iter().copied().zip(self.values.iter().copied())
    }

    /// Largest absolute correlation, if any.
    pub fn max_abs(&self) -> Option<f64> {
        self.values.iter().map(|v| v.abs()).fold(None, |acc, v| {
            Some(match acc {
                Some(a) if a >= v => a,
                _ => v,
            })
        })
    }
}

/// Result of the three-point fit of the mixer-angle landscape at fixed gamma:
/// `E(alpha) = p cos(4 alpha) + q sin(4 alpha) + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PQRFit {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub gamma: f64,
}

impl PQRFit {
    /// Evaluates the fitted landscape at a mixer angle.
    pub fn energy_at(&self, alpha: f64) -> f64 {
        self.p * (4.0 * alpha).cos() + self.q * (4.0 * alpha).sin() + self.r
    }

    /// Maximum of the fitted landscape over all mixer angles.
    pub fn max_energy(&self) -> f64 {
        self.r + self.p.hypot(self.q)
    }
}

/// `<Z_u>` at depth 1: `sin(2a) sin(2 g h_u) prod_k cos(2 g J_uk)`.
pub fn expectation_z(instance: &IsingInstance, angles: Angles, u: u32) -> Result<f64> {
    let ci = CompiledInstance::new(instance);
    let pos = ci.position(u).ok_or(Error::InvalidVertex { vertex: u })?;
    let mut tables = GammaTables::default();
    tables.fill(&ci, angles.gamma);
    Ok((2.0 * angles.alpha).sin() * compiled::z_factor(&ci, &tables, pos))
}

/// `<Z_u Z_v>` at depth 1 for an existing edge.
pub fn expectation_zz(instance: &IsingInstance, angles: Angles, edge: Edge) -> Result<f64> {
    if instance.weight(edge).is_none() {
        return Err(Error::InvalidEdge { u: edge.u, v: edge.v });
    }
    let ci = CompiledInstance::new(instance);
    let mut tables = GammaTables::default();
    tables.fill(&ci, angles.gamma);
    let idx = ci
        .edges
        .iter()
        .position(|e| ci.edge_labels_eq(e, edge))
        .expect("edge present");
    Ok(compiled::zz_shape(&ci, &tables, idx).at(angles.alpha))
}

/// All two-correlations at the given angles; one entry per edge, each costing
/// time linear in the endpoint degrees.
pub fn all_correlations(instance: &IsingInstance, angles: Angles) -> CorrelationVector {
    let ci = CompiledInstance::new(instance);
    let mut tables = GammaTables::default();
    tables.fill(&ci, angles.gamma);
    let edges: Vec<Edge> = (0..ci.edges.len()).map(|i| ci.edge_labels(i)).collect();
    let values: Vec<f64> = (0..ci.edges.len())
        .map(|i| compiled::zz_shape(&ci, &tables, i).at(angles.alpha))
        .collect();
    CorrelationVector::from_parts(edges, values)
}

/// Correlations together with their derivatives w.r.t. alpha and gamma, used
/// by the policy gradients. Entries align with [`all_correlations`].
pub(crate) fn correlations_with_grad(
    instance: &IsingInstance,
    angles: Angles,
) -> (CorrelationVector, Vec<(f64, f64)>) {
    let ci = CompiledInstance::new(instance);
    let mut tables = GammaTables::default();
    tables.fill(&ci, angles.gamma);
    let mut edges = Vec::with_capacity(ci.edges.len());
    let mut values = Vec::with_capacity(ci.edges.len());
    let mut grads = Vec::with_capacity(ci.edges.len());
    for i in 0..ci.edges.len() {
        let (shape, dshape) = zz_shape_with_grad(&ci, &tables, i);
        edges.push(ci.edge_labels(i));
        values.push(shape.at(angles.alpha));
        let d_alpha = shape.d_alpha(angles.alpha);
        // The gamma derivative flows through the shape coefficients only.
        let s2 = (2.0 * angles.alpha).sin();
        let d_gamma =
            dshape.s_a * (4.0 * angles.alpha).sin() * 0.5 + dshape.s_b * s2 * s2 * 0.5;
        grads.push((d_alpha, d_gamma));
    }
    (CorrelationVector::from_parts(edges, values), grads)
}

/// Depth-1 energy expectation `offset + sum h <Z> + sum J <ZZ>`.
pub fn energy_expectation(instance: &IsingInstance, angles: Angles) -> f64 {
    let ci = CompiledInstance::new(instance);
    let mut tables = GammaTables::default();
    tables.fill(&ci, angles.gamma);
    energy_from_tables(&ci, &tables, angles.alpha)
}

fn energy_from_tables(ci: &CompiledInstance, tables: &GammaTables, alpha: f64) -> f64 {
    let mut total = ci.offset;
    if ci.has_fields {
        let s2 = (2.0 * alpha).sin();
        for pos in 0..ci.num_vertices() {
            let h = ci.fields[pos];
            if h != 0.0 {
                total += h * s2 * compiled::z_factor(ci, tables, pos);
            }
        }
    }
    for idx in 0..ci.edges.len() {
        total += ci.edges[idx].weight * compiled::zz_shape(ci, tables, idx).at(alpha);
    }
    total
}

/// Fits `E(alpha) = p cos(4a) + q sin(4a) + r` at fixed gamma from the three
/// evaluations at `alpha in {pi/8, -pi/8, 0}`. Requires zero external fields
/// (the single-Z term oscillates at a different harmonic).
pub fn fit_pqr(instance: &IsingInstance, gamma: f64) -> Result<PQRFit> {
    if instance.has_fields() {
        return Err(Error::UnsupportedFields);
    }
    let ci = CompiledInstance::new(instance);
    let mut tables = GammaTables::default();
    tables.fill(&ci, gamma);
    Ok(fit_from_tables(&ci, &tables, gamma))
}

fn fit_from_tables(ci: &CompiledInstance, tables: &GammaTables, gamma: f64) -> PQRFit {
    let eighth = std::f64::consts::FRAC_PI_8;
    let e_plus = energy_from_tables(ci, tables, eighth);
    let e_minus = energy_from_tables(ci, tables, -eighth);
    let e_zero = energy_from_tables(ci, tables, 0.0);
    let q = 0.5 * (e_plus - e_minus);
    let r = 0.5 * (e_plus + e_minus);
    let p = e_zero - r;
    PQRFit { p, q, r, gamma }
}

/// Closed-form argmax of a fitted landscape: `tan(4a) = q/p` on the branch
/// where both `p cos(4a) >= 0` and `q sin(4a) >= 0`, which `atan2` delivers
/// directly. Returns `(alpha, max energy)`.
pub fn optimal_alpha(fit: &PQRFit) -> (f64, f64) {
    if fit.p == 0.0 && fit.q == 0.0 {
        return (0.0, fit.r);
    }
    let alpha = f64::atan2(fit.q, fit.p) / 4.0;
    (alpha, fit.max_energy())
}

/// Result of the two-stage angle search.
fn best_gamma_on_grid(ci: &CompiledInstance, grid_n: usize) -> (usize, Vec<f64>, f64) {
    let mut tables = GammaTables::default();
    let gammas: Vec<f64> = (0..grid_n)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / (grid_n - 1) as f64)
        .collect();
    let mut best_k = 0;
    let mut best_energy = f64::NEG_INFINITY;
    for (k, &gamma) in gammas.iter().enumerate() {
        tables.fill(ci, gamma);
        let (a, b) = compiled::landscape_coefficients(ci, &tables);
        // p = -B/4, q = A/2, r = offset + B/4.
        let energy = ci.offset + b * 0.25 + (b * 0.25).hypot(a * 0.5);
        if energy > best_energy {
            best_energy = energy;
            best_k = k;
        }
    }
    (best_k, gammas, best_energy)
}

/// Golden-section maximization of a unimodal-enough scalar function on
/// `[lo, hi]` to the given interval tolerance.
fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Finds energy-maximizing `(alpha, gamma)`: closed-form alpha on an
/// equidistant gamma grid over `[0, 2pi]`, then derivative-free refinement of
/// the winning gamma within its grid neighborhood (tolerance 1e-6).
///
/// An instance with no edges returns `(0, 0)` with the offset as energy.
pub fn optimize_angles(instance: &IsingInstance, grid_n: usize) -> Result<(Angles, f64)> {
    if instance.num_edges() == 0 {
        return Ok((Angles::default(), instance.offset()));
    }
    if instance.has_fields() {
        return Err(Error::UnsupportedFields);
    }
    if grid_n < 3 {
        return Err(Error::InvalidConfig(format!("grid_n must be >= 3, got {grid_n}")));
    }
    let ci = CompiledInstance::new(instance);
    let (best_k, gammas, grid_energy) = best_gamma_on_grid(&ci, grid_n);

    let lo = if best_k == 0 { gammas[0] } else { gammas[best_k - 1] };
    let hi = if best_k + 1 == gammas.len() { gammas[best_k] } else { gammas[best_k + 1] };
    let mut tables = GammaTables::default();
    let mut eval = |gamma: f64| {
        tables.fill(&ci, gamma);
        fit_from_tables(&ci, &tables, gamma).max_energy()
    };
    let (gamma_refined, energy_refined) = golden_section_max(&mut eval, lo, hi, 1e-6);

    let (gamma_star, _) = if energy_refined >= grid_energy {
        (gamma_refined, energy_refined)
    } else {
        (gammas[best_k], grid_energy)
    };
    let mut tables = GammaTables::default();
    tables.fill(&ci, gamma_star);
    let fit = fit_from_tables(&ci, &tables, gamma_star);
    let (alpha_star, energy) = optimal_alpha(&fit);
    Ok((Angles::new(alpha_star, gamma_star), energy))
}

impl CompiledInstance {
    fn edge_labels_eq(&self, e: &compiled::CompiledEdge, target: Edge) -> bool {
        Edge::new(self.label(e.u), self.label(e.v)) == target
    }
}
