//! Ising instance representation, energy evaluation, edge contraction with
//! exact bookkeeping, and solution reconstruction.
//!
//! An instance is the Hamiltonian `offset + sum_u h_u Z_u + sum_{(u,v)} J_uv Z_u Z_v`
//! over spins in {-1, +1}. Contraction substitutes `Z_v = sign * Z_u`, folding
//! the eliminated vertex's couplings and field into the anchor and the constant
//! offset, so that the energy of any assignment of the reduced instance equals
//! the energy of its lift on the original instance.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spin value, +1 or -1.
pub type Spin = i8;

/// An unordered vertex pair with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
}

impl Edge {
    /// Normalizes the pair so that `u < v`. Panics on a self-pair.
    pub fn new(a: u32, b: u32) -> Self {
        assert_ne!(a, b, "self-pair ({a}, {a}) is not a valid edge");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    /// The other endpoint, given one endpoint of this edge.
    pub fn other(&self, w: u32) -> u32 {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// Spin assignment over original vertex labels. A zero entry means
/// "unassigned"; `set` only stores +1/-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinAssignment {
    spins: Vec<Spin>,
}

impl SpinAssignment {
    /// All vertices unassigned.
    pub fn empty(n_original: usize) -> Self {
        SpinAssignment { spins: vec![0; n_original] }
    }

    /// All `n_original` vertices set to +1.
    pub fn all_plus(n_original: usize) -> Self {
        SpinAssignment { spins: vec![1; n_original] }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn get(&self, vertex: u32) -> Option<Spin> {
        match self.spins.get(vertex as usize) {
            Some(0) | None => None,
            Some(&s) => Some(s),
        }
    }

    pub fn set(&mut self, vertex: u32, spin: Spin) {
        assert!(spin == 1 || spin == -1, "spin must be +1 or -1");
        self.spins[vertex as usize] = spin;
    }

    /// Iterator over assigned `(vertex, spin)` pairs in label order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, Spin)> + '_ {
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(v, &s)| (v as u32, s))
    }

    /// Flips every assigned spin in place.
    pub fn flip_all(&mut self) {
        for s in &mut self.spins {
            *s = -*s;
        }
    }
}

/// One vertex elimination: the eliminated vertex takes `sign` times the
/// anchor's spin on reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionRecord {
    pub eliminated: u32,
    pub anchor: u32,
    pub sign: Spin,
}

/// Ordered list of contraction records; reconstruction applies them in
/// reverse elimination order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReconstructionMap {
    records: Vec<ContractionRecord>,
}

impl ReconstructionMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: ContractionRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ContractionRecord] {
        &self.records
    }

    /// Lifts an assignment of the final surviving vertices back to the
    /// original vertex set by applying records in reverse elimination order:
    /// `x_eliminated = sign * x_anchor`.
    pub fn reconstruct(&self, x_final: &SpinAssignment) -> Result<SpinAssignment> {
        let mut x = x_final.clone();
        for record in self.records.iter().rev() {
            let anchor_spin = x
                .get(record.anchor)
                .ok_or(Error::CorruptMap { eliminated: record.eliminated, anchor: record.anchor })?;
            x.set(record.eliminated, record.sign * anchor_spin);
        }
        Ok(x)
    }
}

/// Weighted Ising instance: surviving vertices keep their original labels
/// across contractions so that parameters indexed by original vertex pairs
/// stay meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n_original: u32,
    /// Alive original labels, sorted.
    vertices: Vec<u32>,
    /// Unordered pairs (u < v) with nonzero coupling, in sorted order.
    edges: BTreeMap<Edge, f64>,
    /// External fields; absent entries are zero.
    fields: BTreeMap<u32, f64>,
    /// Constant energy accumulated by contractions.
    offset: f64,
    metadata: InstanceMetadata,
}

/// Provenance carried by instance files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    #[serde(default)]
    pub weight_model: String,
    #[serde(default)]
    pub seed: u64,
}

/// On-disk instance format: `{n, edges: [[u, v, w], ...], fields: [[u, h], ...], metadata}`.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: u32,
    edges: Vec<(u32, u32, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    fields: Vec<(u32, f64)>,
    #[serde(default)]
    metadata: InstanceMetadata,
}

impl IsingInstance {
    /// Builds a root instance over vertices `0..n`, validating invariants:
    /// no self-loops, at most one edge per pair, nonzero weights, labels in
    /// range.
    pub fn new(n: u32, edges: &[(u32, u32, f64)], fields: &[(u32, f64)]) -> Result<Self> {
        let mut edge_map = BTreeMap::new();
        for &(a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidInstance(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge ({a}, {b}) outside vertex range 0..{n}"
                )));
            }
            if w == 0.0 {
                return Err(Error::InvalidInstance(format!("edge ({a}, {b}) has zero weight")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidInstance(format!("edge ({a}, {b}) has non-finite weight")));
            }
            if edge_map.insert(Edge::new(a, b), w).is_some() {
                return Err(Error::InvalidInstance(format!("duplicate edge ({a}, {b})")));
            }
        }
        let mut field_map = BTreeMap::new();
        for &(u, h) in fields {
            if u >= n {
                return Err(Error::InvalidInstance(format!("field on vertex {u} outside range 0..{n}")));
            }
            if !h.is_finite() {
                return Err(Error::InvalidInstance(format!("field on vertex {u} is non-finite")));
            }
            if h != 0.0 && field_map.insert(u, h).is_some() {
                return Err(Error::InvalidInstance(format!("duplicate field entry for vertex {u}")));
            }
        }
        Ok(IsingInstance {
            n_original: n,
            vertices: (0..n).collect(),
            edges: edge_map,
            fields: field_map,
            offset: 0.0,
            metadata: InstanceMetadata::default(),
        })
    }

    pub fn with_metadata(mut self, metadata: InstanceMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn metadata(&self) -> &InstanceMetadata {
        &self.metadata
    }

    /// Vertex count of the root problem this instance descends from.
    pub fn n_original(&self) -> u32 {
        self.n_original
    }

    /// Surviving vertex labels, sorted ascending.
    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_alive(&self, vertex: u32) -> bool {
        self.vertices.binary_search(&vertex).is_ok()
    }

    /// Coupling weight of an edge, if present.
    pub fn weight(&self, edge: Edge) -> Option<f64> {
        self.edges.get(&edge).copied()
    }

    /// External field on a vertex (zero when unset).
    pub fn field(&self, vertex: u32) -> f64 {
        self.fields.get(&vertex).copied().unwrap_or(0.0)
    }

    pub fn has_fields(&self) -> bool {
        !self.fields.is_empty()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Edges in sorted `(u, v)` order with their weights.
    pub fn edges(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.edges.iter().map(|(&e, &w)| (e, w))
    }

    /// Nonzero fields in vertex order.
    pub fn fields(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.fields.iter().map(|(&u, &h)| (u, h))
    }

    /// Energy `offset + sum h_u x_u + sum J_uv x_u x_v` of a full assignment
    /// of the surviving vertices.
    pub fn energy(&self, x: &SpinAssignment) -> Result<f64> {
        let mut total = self.offset;
        for &u in &self.vertices {
            let h = self.field(u);
            if h != 0.0 {
                let s = x.get(u).ok_or(Error::InvalidAssignment { vertex: u })?;
                total += h * f64::from(s);
            }
        }
        // Verify coverage even for field-free vertices.
        for &u in &self.vertices {
            if x.get(u).is_none() {
                return Err(Error::InvalidAssignment { vertex: u });
            }
        }
        for (edge, w) in self.edges() {
            let xu = x.get(edge.u).ok_or(Error::InvalidAssignment { vertex: edge.u })?;
            let xv = x.get(edge.v).ok_or(Error::InvalidAssignment { vertex: edge.v })?;
            total += w * f64::from(xu) * f64::from(xv);
        }
        Ok(total)
    }

    /// Eliminates `edge.v` by imposing `Z_v = sign * Z_u` (u is the anchor).
    ///
    /// The contracted edge's weight moves into the offset, every other edge
    /// incident to `v` is rewritten onto the anchor (merging weights, and
    /// deleting pairs whose merged weight is exactly zero), and `v`'s field
    /// folds into the anchor's field.
    pub fn contract(&self, edge: Edge, sign: Spin) -> Result<(IsingInstance, ContractionRecord)> {
        assert!(sign == 1 || sign == -1, "contraction sign must be +1 or -1");
        let w_uv = self
            .weight(edge)
            .ok_or(Error::InvalidAction(format!("edge {edge} is not present")))?;
        let anchor = edge.u;
        let eliminated = edge.v;
        let s = f64::from(sign);

        let mut next = self.clone();
        next.edges.remove(&edge);
        next.offset += s * w_uv;

        // Rewrite (v, w) couplings onto (anchor, w).
        let moved: Vec<(Edge, f64)> = next
            .edges
            .iter()
            .filter(|(e, _)| e.u == eliminated || e.v == eliminated)
            .map(|(&e, &w)| (e, w))
            .collect();
        for (old_edge, w) in moved {
            next.edges.remove(&old_edge);
            let other = old_edge.other(eliminated);
            let new_edge = Edge::new(anchor, other);
            let merged = next.edges.get(&new_edge).copied().unwrap_or(0.0) + s * w;
            if merged == 0.0 {
                next.edges.remove(&new_edge);
            } else {
                next.edges.insert(new_edge, merged);
            }
        }

        let h_v = next.fields.remove(&eliminated).unwrap_or(0.0);
        if h_v != 0.0 {
            let merged = next.field(anchor) + s * h_v;
            if merged == 0.0 {
                next.fields.remove(&anchor);
            } else {
                next.fields.insert(anchor, merged);
            }
        }

        let pos = next
            .vertices
            .binary_search(&eliminated)
            .expect("eliminated vertex must be alive");
        next.vertices.remove(pos);

        Ok((next, ContractionRecord { eliminated, anchor, sign }))
    }

    /// Round-trips through the on-disk format. Only root instances (no
    /// contractions applied) can be serialized.
    pub fn to_json(&self) -> Result<String> {
        if self.offset != 0.0 || self.vertices.len() != self.n_original as usize {
            return Err(Error::InvalidInstance(
                "only root instances (no contractions) can be serialized".into(),
            ));
        }
        let file = InstanceFile {
            n: self.n_original,
            edges: self.edges().map(|(e, w)| (e.u, e.v, w)).collect(),
            fields: self.fields().collect(),
            metadata: self.metadata.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let inst = IsingInstance::new(file.n, &file.edges, &file.fields)?;
        Ok(inst.with_metadata(file.metadata))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Energy of an assignment; free-function form of [`IsingInstance::energy`].
pub fn energy(instance: &IsingInstance, x: &SpinAssignment) -> Result<f64> {
    instance.energy(x)
}

/// Contraction; free-function form of [`IsingInstance::contract`].
pub fn contract(
    instance: &IsingInstance,
    edge: Edge,
    sign: Spin,
) -> Result<(IsingInstance, ContractionRecord)> {
    instance.contract(edge, sign)
}

/// Reconstruction; free-function form of [`ReconstructionMap::reconstruct`].
pub fn reconstruct(map: &ReconstructionMap, x_final: &SpinAssignment) -> Result<SpinAssignment> {
    map.reconstruct(x_final)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2(weight: f64) -> IsingInstance {
        IsingInstance::new(2, &[(0, 1, weight)], &[]).unwrap()
    }

    fn triangle_unit() -> IsingInstance {
        IsingInstance::new(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], &[]).unwrap()
    }

    fn assignment(pairs: &[(u32, Spin)], n: usize) -> SpinAssignment {
        let mut x = SpinAssignment::empty(n);
        for &(v, s) in pairs {
            x.set(v, s);
        }
        x
    }

    #[test]
    fn energy_k2_same_sign() {
        let inst = k2(1.0);
        let x = assignment(&[(0, 1), (1, 1)], 2);
        assert_eq!(inst.energy(&x).unwrap(), 1.0);
    }

    #[test]
    fn energy_k2_opposite_sign() {
        let inst = k2(1.0);
        let x = assignment(&[(0, 1), (1, -1)], 2);
        assert_eq!(inst.energy(&x).unwrap(), -1.0);
    }

    #[test]
    fn energy_missing_assignment_errors() {
        let inst = k2(1.0);
        let x = assignment(&[(0, 1)], 2);
        assert!(matches!(inst.energy(&x), Err(Error::InvalidAssignment { vertex: 1 })));
    }

    #[test]
    fn energy_matches_naive_resummation() {
        // Independent double-loop oracle on a random 8-vertex instance.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 8u32;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(0.5) {
                    edges.push((u, v, rng.gen_range(-2.0..2.0)));
                }
            }
        }
        let fields: Vec<(u32, f64)> = (0..n).map(|u| (u, rng.gen_range(-1.0..1.0))).collect();
        let inst = IsingInstance::new(n, &edges, &fields).unwrap();
        let mut x = SpinAssignment::empty(n as usize);
        for u in 0..n {
            x.set(u, if rng.gen_bool(0.5) { 1 } else { -1 });
        }
        let mut expected = 0.0;
        for &(u, h) in &fields {
            expected += h * f64::from(x.get(u).unwrap());
        }
        for &(u, v, w) in &edges {
            expected += w * f64::from(x.get(u).unwrap()) * f64::from(x.get(v).unwrap());
        }
        assert!((inst.energy(&x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn contract_triangle_plus() {
        let inst = triangle_unit();
        let (next, record) = inst.contract(Edge::new(0, 1), 1).unwrap();
        assert_eq!(next.vertices(), &[0, 2]);
        assert_eq!(next.num_edges(), 1);
        assert_eq!(next.weight(Edge::new(0, 2)), Some(2.0));
        assert_eq!(next.offset(), 1.0);
        assert_eq!(record, ContractionRecord { eliminated: 1, anchor: 0, sign: 1 });
    }

    #[test]
    fn contract_triangle_minus_cancels() {
        let inst = triangle_unit();
        let (next, _) = inst.contract(Edge::new(0, 1), -1).unwrap();
        assert_eq!(next.vertices(), &[0, 2]);
        assert_eq!(next.num_edges(), 0);
        assert_eq!(next.offset(), -1.0);
    }

    #[test]
    fn contract_missing_edge_errors() {
        let inst = IsingInstance::new(3, &[(0, 1, 1.0)], &[]).unwrap();
        assert!(matches!(inst.contract(Edge::new(1, 2), 1), Err(Error::InvalidAction(_))));
    }

    #[test]
    fn contract_folds_field() {
        let inst = IsingInstance::new(2, &[(0, 1, 1.0)], &[(1, 0.5)]).unwrap();
        let (next, _) = inst.contract(Edge::new(0, 1), -1).unwrap();
        assert_eq!(next.field(0), -0.5);
        assert_eq!(next.field(1), 0.0);
    }

    #[test]
    fn reconstruct_identity_and_single_record() {
        let x = assignment(&[(0, 1)], 2);
        let map = ReconstructionMap::new();
        assert_eq!(map.reconstruct(&x).unwrap(), x);

        let mut map = ReconstructionMap::new();
        map.push(ContractionRecord { eliminated: 1, anchor: 0, sign: -1 });
        let lifted = map.reconstruct(&x).unwrap();
        assert_eq!(lifted.get(1), Some(-1));
    }

    #[test]
    fn reconstruct_unassigned_anchor_errors() {
        let mut map = ReconstructionMap::new();
        map.push(ContractionRecord { eliminated: 1, anchor: 0, sign: 1 });
        let x = SpinAssignment::empty(2);
        assert!(matches!(map.reconstruct(&x), Err(Error::CorruptMap { .. })));
    }

    #[test]
    fn chained_contraction_preserves_energy() {
        // Contract the triangle twice, solve the remainder trivially, and
        // check that the lifted assignment achieves the tracked energy.
        let inst = triangle_unit();
        let mut map = ReconstructionMap::new();
        let (step1, r1) = inst.contract(Edge::new(0, 1), 1).unwrap();
        map.push(r1);
        let (step2, r2) = step1.contract(Edge::new(0, 2), 1).unwrap();
        map.push(r2);
        assert_eq!(step2.vertices(), &[0]);
        assert_eq!(step2.offset(), 3.0);

        let mut x_final = SpinAssignment::empty(3);
        x_final.set(0, 1);
        let x = map.reconstruct(&x_final).unwrap();
        assert_eq!(inst.energy(&x).unwrap(), step2.offset());
    }

    #[test]
    fn contraction_energy_conservation_exhaustive() {
        // Every edge, every sign, every assignment on a fixed small instance.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 6u32;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(0.6) {
                    edges.push((u, v, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let inst = IsingInstance::new(n, &edges, &[]).unwrap();
        for (edge, _) in inst.edges() {
            for sign in [1i8, -1] {
                let (contracted, record) = inst.contract(edge, sign).unwrap();
                assert_eq!(contracted.num_vertices(), inst.num_vertices() - 1);
                let m = contracted.num_vertices();
                for bits in 0..(1u32 << m) {
                    let mut x = SpinAssignment::empty(n as usize);
                    for (i, &v) in contracted.vertices().iter().enumerate() {
                        x.set(v, if bits >> i & 1 == 1 { 1 } else { -1 });
                    }
                    let reduced_energy = contracted.energy(&x).unwrap();
                    let mut lifted = x.clone();
                    lifted.set(record.eliminated, record.sign * x.get(record.anchor).unwrap());
                    let original_energy = inst.energy(&lifted).unwrap();
                    assert!((reduced_energy - original_energy).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let inst = IsingInstance::new(4, &[(0, 1, -1.0), (1, 2, 0.25), (2, 3, 1.5)], &[(0, 0.5)])
            .unwrap()
            .with_metadata(InstanceMetadata { weight_model: "manual".into(), seed: 7 });
        let text = inst.to_json().unwrap();
        let back = IsingInstance::from_json(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn serialize_contracted_instance_errors() {
        let inst = triangle_unit();
        let (next, _) = inst.contract(Edge::new(0, 1), 1).unwrap();
        assert!(next.to_json().is_err());
    }

    #[test]
    fn rejects_invalid_instances() {
        assert!(IsingInstance::new(2, &[(0, 0, 1.0)], &[]).is_err());
        assert!(IsingInstance::new(2, &[(0, 1, 0.0)], &[]).is_err());
        assert!(IsingInstance::new(2, &[(0, 1, 1.0), (1, 0, 2.0)], &[]).is_err());
        assert!(IsingInstance::new(2, &[(0, 2, 1.0)], &[]).is_err());
    }
}
