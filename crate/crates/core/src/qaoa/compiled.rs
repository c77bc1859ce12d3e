//! Index-compiled instance view used by the hot numeric paths.
//!
//! The closed-form depth-1 expectations factor as
//!
//! ```text
//! <Z_u Z_v> = S_A * sin(4a)/2 + S_B * sin^2(2a)/2
//! ```
//!
//! where `S_A` and `S_B` depend on gamma only (through the absorbed couplings
//! `gamma*J`, `gamma*h`), never on alpha. Compiling the instance to dense
//! index space and sharing the per-gamma trig tables across all edges makes a
//! full gamma grid sweep O(grid * sum deg^2) with one sincos per edge per
//! gamma point.

use std::collections::HashMap;

use crate::graph::{Edge, IsingInstance};

/// Alpha-independent factorization of one two-correlation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ZzShape {
    pub s_a: f64,
    pub s_b: f64,
}

impl ZzShape {
    /// Evaluates the correlation at a mixer angle.
    pub fn at(&self, alpha: f64) -> f64 {
        let s2 = (2.0 * alpha).sin();
        self.s_a * (4.0 * alpha).sin() * 0.5 + self.s_b * s2 * s2 * 0.5
    }

    /// d/d(alpha) of [`ZzShape::at`].
    pub fn d_alpha(&self, alpha: f64) -> f64 {
        2.0 * self.s_a * (4.0 * alpha).cos() + self.s_b * (4.0 * alpha).sin()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CompiledEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Instance remapped to positions `0..n`, with adjacency lists.
#[derive(Debug, Clone)]
pub(crate) struct CompiledInstance {
    labels: Vec<u32>,
    pub edges: Vec<CompiledEdge>,
    /// Per position: (neighbor position, coupling, index of that edge).
    adj: Vec<Vec<(usize, f64, usize)>>,
    pub fields: Vec<f64>,
    pub offset: f64,
    pub has_fields: bool,
}

impl CompiledInstance {
    pub fn new(instance: &IsingInstance) -> Self {
        let labels: Vec<u32> = instance.vertices().to_vec();
        let pos: HashMap<u32, usize> =
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut edges = Vec::with_capacity(instance.num_edges());
        let mut adj = vec![Vec::new(); labels.len()];
        for (idx, (edge, weight)) in instance.edges().enumerate() {
            let u = pos[&edge.u];
            let v = pos[&edge.v];
            edges.push(CompiledEdge { u, v, weight });
            adj[u].push((v, weight, idx));
            adj[v].push((u, weight, idx));
        }
        let fields: Vec<f64> = labels.iter().map(|&l| instance.field(l)).collect();
        let has_fields = fields.iter().any(|&h| h != 0.0);
        CompiledInstance { labels, edges, adj, fields, offset: instance.offset(), has_fields }
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, pos: usize) -> u32 {
        self.labels[pos]
    }

    pub fn position(&self, label: u32) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn edge_labels(&self, idx: usize) -> Edge {
        let e = &self.edges[idx];
        Edge::new(self.labels[e.u], self.labels[e.v])
    }

    pub fn neighbors(&self, pos: usize) -> &[(usize, f64, usize)] {
        &self.adj[pos]
    }
}

/// Reusable per-gamma trig tables.
#[derive(Debug, Default, Clone)]
pub(crate) struct GammaTables {
    /// Per edge: (cos(2*gamma*J), sin(2*gamma*J)).
    edge_cs: Vec<(f64, f64)>,
    /// Per vertex: (cos(2*gamma*h), sin(2*gamma*h)).
    field_cs: Vec<(f64, f64)>,
}

impl GammaTables {
    pub fn fill(&mut self, ci: &CompiledInstance, gamma: f64) {
        self.edge_cs.clear();
        self.edge_cs.extend(ci.edges.iter().map(|e| {
            let a = 2.0 * gamma * e.weight;
            (a.cos(), a.sin())
        }));
        self.field_cs.clear();
        self.field_cs.extend(ci.fields.iter().map(|&h| {
            let a = 2.0 * gamma * h;
            (a.cos(), a.sin())
        }));
    }
}

/// Product accumulator carrying the value and its gamma derivative.
#[derive(Clone, Copy)]
struct Prod {
    value: f64,
    deriv: f64,
}

impl Prod {
    const ONE: Prod = Prod { value: 1.0, deriv: 0.0 };

    #[inline]
    fn mul(&mut self, factor: f64, factor_deriv: f64) {
        self.deriv = self.deriv * factor + self.value * factor_deriv;
        self.value *= factor;
    }
}

/// `sin(2*gamma*h_u) * prod_{k in N(u)} cos(2*gamma*J_uk)`; the alpha factor
/// `sin(2*alpha)` is applied by the caller.
pub(crate) fn z_factor(ci: &CompiledInstance, tables: &GammaTables, pos: usize) -> f64 {
    let mut p = tables.field_cs[pos].1;
    for &(_, _, eidx) in ci.neighbors(pos) {
        p *= tables.edge_cs[eidx].0;
    }
    p
}

/// Shape of one two-correlation at the tabulated gamma.
pub(crate) fn zz_shape(ci: &CompiledInstance, tables: &GammaTables, idx: usize) -> ZzShape {
    let CompiledEdge { u, v, .. } = ci.edges[idx];
    let s_uv = tables.edge_cs[idx].1;

    let mut p_u = 1.0;
    for &(k, _, eidx) in ci.neighbors(u) {
        if k != v {
            p_u *= tables.edge_cs[eidx].0;
        }
    }
    let mut p_v = 1.0;
    for &(k, _, eidx) in ci.neighbors(v) {
        if k != u {
            p_v *= tables.edge_cs[eidx].0;
        }
    }

    let (q_plus, q_minus) = joint_products(ci, tables, idx);

    if ci.has_fields {
        // cos(2g(hu+hv)) and cos(2g(hu-hv)) from the per-vertex tables.
        let (cu, su) = tables.field_cs[u];
        let (cv, sv) = tables.field_cs[v];
        let ch_sum = cu * cv - su * sv;
        let ch_diff = cu * cv + su * sv;
        ZzShape {
            s_a: s_uv * (cu * p_u + cv * p_v),
            s_b: ch_diff * q_minus - ch_sum * q_plus,
        }
    } else {
        ZzShape { s_a: s_uv * (p_u + p_v), s_b: q_minus - q_plus }
    }
}

/// Shape plus its gamma derivative, for the analytic policy gradients.
pub(crate) fn zz_shape_with_grad(
    ci: &CompiledInstance,
    tables: &GammaTables,
    idx: usize,
) -> (ZzShape, ZzShape) {
    let CompiledEdge { u, v, weight } = ci.edges[idx];
    let (c_uv, s_uv) = tables.edge_cs[idx];

    let mut p_u = Prod::ONE;
    for &(k, w, eidx) in ci.neighbors(u) {
        if k != v {
            let (c, s) = tables.edge_cs[eidx];
            p_u.mul(c, -2.0 * w * s);
        }
    }
    let mut p_v = Prod::ONE;
    for &(k, w, eidx) in ci.neighbors(v) {
        if k != u {
            let (c, s) = tables.edge_cs[eidx];
            p_v.mul(c, -2.0 * w * s);
        }
    }

    let h_u = ci.fields[u];
    let h_v = ci.fields[v];
    let (cu, su) = tables.field_cs[u];
    let (cv, sv) = tables.field_cs[v];
    let mut t_u = p_u;
    t_u.mul(cu, -2.0 * h_u * su);
    let mut t_v = p_v;
    t_v.mul(cv, -2.0 * h_v * sv);

    let s_a = s_uv * (t_u.value + t_v.value);
    let ds_a = 2.0 * weight * c_uv * (t_u.value + t_v.value) + s_uv * (t_u.deriv + t_v.deriv);

    let (mut q_plus, mut q_minus) = (Prod::ONE, Prod::ONE);
    accumulate_joint(ci, tables, idx, |w_sum, c_sum, s_sum, w_diff, c_diff, s_diff| {
        q_plus.mul(c_sum, -2.0 * w_sum * s_sum);
        q_minus.mul(c_diff, -2.0 * w_diff * s_diff);
    });
    // Field prefactors: cos(2g(hu+hv)) and cos(2g(hu-hv)).
    let ch_sum = cu * cv - su * sv;
    let sh_sum = su * cv + cu * sv;
    let ch_diff = cu * cv + su * sv;
    let sh_diff = su * cv - cu * sv;
    let mut b_plus = q_plus;
    b_plus.mul(ch_sum, -2.0 * (h_u + h_v) * sh_sum);
    let mut b_minus = q_minus;
    b_minus.mul(ch_diff, -2.0 * (h_u - h_v) * sh_diff);

    let s_b = b_minus.value - b_plus.value;
    let ds_b = b_minus.deriv - b_plus.deriv;

    (ZzShape { s_a, s_b }, ZzShape { s_a: ds_a, s_b: ds_b })
}

/// `Q+ = prod cos(2g(J_uk + J_vk))` and `Q- = prod cos(2g(J_uk - J_vk))`
/// over `k != u, v`; vertices adjacent to only one endpoint contribute the
/// single-edge cosine to both products.
fn joint_products(ci: &CompiledInstance, tables: &GammaTables, idx: usize) -> (f64, f64) {
    let mut q_plus = 1.0;
    let mut q_minus = 1.0;
    accumulate_joint(ci, tables, idx, |_, c_sum, _, _, c_diff, _| {
        q_plus *= c_sum;
        q_minus *= c_diff;
    });
    (q_plus, q_minus)
}

/// Visits every `k != u, v` adjacent to either endpoint of edge `idx`,
/// yielding weight/cos/sin of `2g(J_uk + J_vk)` and `2g(J_uk - J_vk)`.
#[inline]
fn accumulate_joint<F>(ci: &CompiledInstance, tables: &GammaTables, idx: usize, mut f: F)
where
    F: FnMut(f64, f64, f64, f64, f64, f64),
{
    let CompiledEdge { u, v, .. } = ci.edges[idx];
    let nbr_v = ci.neighbors(v);
    for &(k, w_uk, e_uk) in ci.neighbors(u) {
        if k == v {
            continue;
        }
        let (c_uk, s_uk) = tables.edge_cs[e_uk];
        match nbr_v.iter().find(|&&(kk, _, _)| kk == k) {
            Some(&(_, w_vk, e_vk)) => {
                // Shared neighbor: angle addition on the tabulated values.
                let (c_vk, s_vk) = tables.edge_cs[e_vk];
                let c_sum = c_uk * c_vk - s_uk * s_vk;
                let s_sum = s_uk * c_vk + c_uk * s_vk;
                let c_diff = c_uk * c_vk + s_uk * s_vk;
                let s_diff = s_uk * c_vk - c_uk * s_vk;
                f(w_uk + w_vk, c_sum, s_sum, w_uk - w_vk, c_diff, s_diff);
            }
            None => f(w_uk, c_uk, s_uk, w_uk, c_uk, s_uk),
        }
    }
    for &(k, w_vk, e_vk) in nbr_v {
        if k == u || ci.neighbors(u).iter().any(|&(kk, _, _)| kk == k) {
            continue;
        }
        let (c_vk, s_vk) = tables.edge_cs[e_vk];
        f(w_vk, c_vk, s_vk, w_vk, c_vk, s_vk);
    }
}

/// Sums `J_e * S_A_e` and `J_e * S_B_e` over all edges; the backbone of the
/// field-free energy landscape `E(alpha) = offset + A*sin(4a)/2 + B*sin^2(2a)/2`.
pub(crate) fn landscape_coefficients(ci: &CompiledInstance, tables: &GammaTables) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for idx in 0..ci.edges.len() {
        let shape = zz_shape(ci, tables, idx);
        let w = ci.edges[idx].weight;
        a += w * shape.s_a;
        b += w * shape.s_b;
    }
    (a, b)
}
