//! Decoding graphs: weighted graphs whose non-virtual vertices are stabilizer
//! checks, whose edges are data qubits (plus zero-weight virtual boundary
//! edges), and whose highlighted vertex set encodes a syndrome.

use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;
use crate::code::{CodeSpec, CssCode, ErrorSector, SectorCode, SurfaceCodeLayout};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type QubitId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub is_virtual: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
    /// Data qubit carried by this edge; `None` for virtual edges.
    pub qubit: Option<QubitId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    NonContiguousIds,
    UnknownVertex(VertexId),
    UnknownEdge(EdgeId),
    SelfLoop(EdgeId),
    DuplicatedEdge { u: VertexId, v: VertexId },
    BadWeight(EdgeId),
    VirtualEdgeWithQubit(EdgeId),
    PlainEdgeWithoutQubit(EdgeId),
    DuplicateQubit(QubitId),
    NotGraphlike { qubit: QubitId, checks: usize },
    EmptyCheckSet,
    SyndromeLength { expected: usize, got: usize },
    OddSyndromeWithoutVirtual,
    EpsilonOutOfRange(f64),
    WeightCount { expected: usize, got: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::NonContiguousIds => write!(f, "vertex/edge ids must be 0..n in order"),
            GraphError::UnknownVertex(v) => write!(f, "unknown vertex id {v}"),
            GraphError::UnknownEdge(e) => write!(f, "unknown edge id {e}"),
            GraphError::SelfLoop(e) => write!(f, "edge {e} is a self loop"),
            GraphError::DuplicatedEdge { u, v } => {
                write!(f, "duplicated edge between vertices {u} and {v}")
            }
            GraphError::BadWeight(e) => write!(f, "edge {e} has a non-finite or negative weight"),
            GraphError::VirtualEdgeWithQubit(e) => write!(f, "virtual edge {e} carries a qubit"),
            GraphError::PlainEdgeWithoutQubit(e) => {
                write!(f, "non-virtual edge {e} carries no qubit")
            }
            GraphError::DuplicateQubit(q) => write!(f, "qubit {q} appears on two edges"),
            GraphError::NotGraphlike { qubit, checks } => {
                write!(f, "not graphlike: qubit {qubit} appears in {checks} checks")
            }
            GraphError::EmptyCheckSet => write!(f, "not graphlike / empty check set"),
            GraphError::SyndromeLength { expected, got } => {
                write!(f, "syndrome length {got}, expected {expected}")
            }
            GraphError::OddSyndromeWithoutVirtual => {
                write!(f, "odd syndrome weight but the graph has no virtual vertex")
            }
            GraphError::EpsilonOutOfRange(e) => {
                write!(f, "error probability {e} outside (0, 0.5)")
            }
            GraphError::WeightCount { expected, got } => {
                write!(f, "{got} error probabilities for {expected} qubits")
            }
        }
    }
}

impl core::error::Error for GraphError {}

/// How the per-boundary-qubit virtual vertices are wired together.
///
/// `Chain` connects them by a zero-weight path, which keeps the matching to
/// physical-error correspondence one-to-one (the virtual subgraph is a tree,
/// so parity completions are unique). `Complete` wires every pair, matching
/// the textbook construction; its zero-weight virtual cycles make matching
/// enumeration degenerate, so it is not the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VirtualWiring {
    #[default]
    Chain,
    Complete,
}

#[derive(Debug, Clone)]
pub struct ModelGraphConfig {
    pub virtual_weight: f64,
    pub wiring: VirtualWiring,
}

impl Default for ModelGraphConfig {
    fn default() -> Self {
        ModelGraphConfig {
            virtual_weight: 0.0,
            wiring: VirtualWiring::Chain,
        }
    }
}

/// Immutable weighted decoding graph. All mutating operations return a new
/// graph, so graphs can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct DecodingGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    highlighted: Bits,
    adjacency: Vec<Vec<(EdgeId, VertexId)>>,
    /// Map qubit id -> edge id, dense over the qubit range.
    qubit_edges: Vec<Option<EdgeId>>,
}

impl DecodingGraph {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        highlighted: &[VertexId],
    ) -> Result<Self, GraphError> {
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return Err(GraphError::NonContiguousIds);
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(GraphError::NonContiguousIds);
            }
        }
        let n = vertices.len();
        let mut pairs: Vec<(VertexId, VertexId)> = Vec::with_capacity(edges.len());
        let mut max_qubit = None;
        for e in &edges {
            if e.u >= n {
                return Err(GraphError::UnknownVertex(e.u));
            }
            if e.v >= n {
                return Err(GraphError::UnknownVertex(e.v));
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.id));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(GraphError::BadWeight(e.id));
            }
            let is_virtual_edge = vertices[e.u].is_virtual && vertices[e.v].is_virtual;
            match (e.qubit, is_virtual_edge) {
                (Some(_), true) => return Err(GraphError::VirtualEdgeWithQubit(e.id)),
                (None, false) => return Err(GraphError::PlainEdgeWithoutQubit(e.id)),
                _ => {}
            }
            if let Some(q) = e.qubit {
                max_qubit = Some(max_qubit.map_or(q, |m: usize| m.max(q)));
            }
            pairs.push((e.u.min(e.v), e.u.max(e.v)));
        }
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicatedEdge { u: w[0].0, v: w[0].1 });
            }
        }
        let mut qubit_edges = alloc::vec![None; max_qubit.map_or(0, |m| m + 1)];
        for e in &edges {
            if let Some(q) = e.qubit {
                if qubit_edges[q].is_some() {
                    return Err(GraphError::DuplicateQubit(q));
                }
                qubit_edges[q] = Some(e.id);
            }
        }
        let mut adjacency = alloc::vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.u].push((e.id, e.v));
            adjacency[e.v].push((e.id, e.u));
        }
        let mut bits = Bits::with_capacity(n);
        for &v in highlighted {
            if v >= n {
                return Err(GraphError::UnknownVertex(v));
            }
            bits.insert(v);
        }
        Ok(DecodingGraph {
            vertices,
            edges,
            highlighted: bits,
            adjacency,
            qubit_edges,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Result<&Edge, GraphError> {
        self.edges.get(id).ok_or(GraphError::UnknownEdge(id))
    }

    pub fn highlighted(&self) -> &Bits {
        &self.highlighted
    }

    pub fn highlighted_ids(&self) -> Vec<VertexId> {
        self.highlighted.to_indices()
    }

    pub fn adjacency(&self, v: VertexId) -> &[(EdgeId, VertexId)] {
        &self.adjacency[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of non-virtual (check) vertices.
    pub fn n_checks(&self) -> usize {
        self.vertices.iter().filter(|v| !v.is_virtual).count()
    }

    pub fn qubit_edge(&self, qubit: QubitId) -> Option<EdgeId> {
        self.qubit_edges.get(qubit).copied().flatten()
    }

    pub fn n_qubits(&self) -> usize {
        self.qubit_edges.iter().filter(|q| q.is_some()).count()
    }

    /// Replace the highlighted set wholesale.
    pub fn with_highlights(&self, highlighted: &Bits) -> Result<Self, GraphError> {
        if let Some(v) = highlighted.iter_ones().find(|&v| v >= self.vertices.len()) {
            return Err(GraphError::UnknownVertex(v));
        }
        let mut g = self.clone();
        g.highlighted = highlighted.clone();
        Ok(g)
    }

    /// Replace qubit-edge weights from a per-qubit table; virtual edges keep
    /// their configured weight.
    pub fn with_qubit_weights(&self, weights: &[f64]) -> Result<Self, GraphError> {
        let n_qubits = self.n_qubits();
        if weights.len() != n_qubits {
            return Err(GraphError::WeightCount {
                expected: n_qubits,
                got: weights.len(),
            });
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            if let Some(q) = e.qubit {
                let w = weights[q];
                if !w.is_finite() || w < 0.0 {
                    return Err(GraphError::BadWeight(e.id));
                }
                e.weight = w;
            }
        }
        Ok(g)
    }

    /// Reweight qubit edges as `ln((1-eps)/eps)` from per-qubit error
    /// probabilities; virtual edges keep their configured weight.
    pub fn assign_edge_weights(&self, eps: &[f64]) -> Result<Self, GraphError> {
        let n_qubits = self.n_qubits();
        if eps.len() != n_qubits {
            return Err(GraphError::WeightCount {
                expected: n_qubits,
                got: eps.len(),
            });
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            if let Some(q) = e.qubit {
                let p = eps[q];
                if !(p > 0.0 && p < 0.5) {
                    return Err(GraphError::EpsilonOutOfRange(p));
                }
                e.weight = crate::math::ln((1.0 - p) / p);
            }
        }
        Ok(g)
    }

    /// Highlight check vertices with nontrivial syndrome bits; when the count
    /// is odd the lowest-id virtual vertex is highlighted too, so the
    /// highlighted set always has even size.
    pub fn highlight_from_syndrome(&self, syndrome: &[u8]) -> Result<Self, GraphError> {
        let n_checks = self.n_checks();
        if syndrome.len() != n_checks {
            return Err(GraphError::SyndromeLength {
                expected: n_checks,
                got: syndrome.len(),
            });
        }
        let mut bits = Bits::with_capacity(self.vertices.len());
        let mut count = 0usize;
        let mut check_idx = 0usize;
        for v in &self.vertices {
            if !v.is_virtual {
                if syndrome[check_idx] % 2 == 1 {
                    bits.insert(v.id);
                    count += 1;
                }
                check_idx += 1;
            }
        }
        if count % 2 == 1 {
            let first_virtual = self
                .vertices
                .iter()
                .find(|v| v.is_virtual)
                .ok_or(GraphError::OddSyndromeWithoutVirtual)?;
            bits.insert(first_virtual.id);
        }
        let mut g = self.clone();
        g.highlighted = bits;
        Ok(g)
    }

    /// Whether `edge_ids` is a matching (its endpoint symmetric difference
    /// equals the highlighted set), plus the total weight either way.
    pub fn validate_matching(&self, edge_ids: &[EdgeId]) -> Result<(bool, f64), GraphError> {
        let mut set = Bits::with_capacity(self.edges.len());
        for &id in edge_ids {
            if id >= self.edges.len() {
                return Err(GraphError::UnknownEdge(id));
            }
            set.insert(id);
        }
        Ok(self.validate_matching_bits(&set))
    }

    pub fn validate_matching_bits(&self, set: &Bits) -> (bool, f64) {
        let mut boundary = Bits::with_capacity(self.vertices.len());
        let mut weight = 0.0;
        for id in set.iter_ones() {
            let e = &self.edges[id];
            boundary.flip(e.u);
            boundary.flip(e.v);
            weight += e.weight;
        }
        (boundary == self.highlighted, weight)
    }

    /// Total weight of an edge set, summed in ascending edge-id order.
    pub fn weight_of(&self, set: &Bits) -> f64 {
        set.iter_ones().map(|id| self.edges[id].weight).sum()
    }

    /// Endpoint pair of an edge as a vertex set.
    pub fn endpoints(&self, id: EdgeId) -> Bits {
        let e = &self.edges[id];
        Bits::from_indices(&[e.u, e.v])
    }
}

/// Build the model graph for one sector of a CSS code: one vertex per
/// detector check, one edge per qubit between its one or two checks, a
/// dedicated virtual vertex per single-check qubit, and the virtual cluster
/// wired per `config`. No vertices are highlighted yet.
pub fn build_sector_model_graph(
    sector: &SectorCode,
    config: &ModelGraphConfig,
) -> Result<DecodingGraph, GraphError> {
    if sector.detectors.is_empty() {
        return Err(GraphError::EmptyCheckSet);
    }
    let n_checks = sector.detectors.len();
    let mut incident: Vec<Vec<usize>> = alloc::vec![Vec::new(); sector.n_qubits];
    for (ci, check) in sector.detectors.iter().enumerate() {
        for q in check.iter_ones() {
            incident[q].push(ci);
        }
    }
    let mut vertices: Vec<Vertex> = (0..n_checks)
        .map(|id| Vertex { id, is_virtual: false })
        .collect();
    let mut edges: Vec<Edge> = Vec::new();
    let mut virtuals: Vec<VertexId> = Vec::new();
    for (q, checks) in incident.iter().enumerate() {
        match checks.len() {
            0 => {
                return Err(GraphError::NotGraphlike { qubit: q, checks: 0 });
            }
            1 => {
                let vid = vertices.len();
                vertices.push(Vertex { id: vid, is_virtual: true });
                virtuals.push(vid);
                edges.push(Edge {
                    id: edges.len(),
                    u: checks[0],
                    v: vid,
                    weight: 0.0,
                    qubit: Some(q),
                });
            }
            2 => {
                edges.push(Edge {
                    id: edges.len(),
                    u: checks[0],
                    v: checks[1],
                    weight: 0.0,
                    qubit: Some(q),
                });
            }
            n => {
                return Err(GraphError::NotGraphlike { qubit: q, checks: n });
            }
        }
    }
    match config.wiring {
        VirtualWiring::Chain => {
            for pair in virtuals.windows(2) {
                edges.push(Edge {
                    id: edges.len(),
                    u: pair[0],
                    v: pair[1],
                    weight: config.virtual_weight,
                    qubit: None,
                });
            }
        }
        VirtualWiring::Complete => {
            for i in 0..virtuals.len() {
                for j in i + 1..virtuals.len() {
                    edges.push(Edge {
                        id: edges.len(),
                        u: virtuals[i],
                        v: virtuals[j],
                        weight: config.virtual_weight,
                        qubit: None,
                    });
                }
            }
        }
    }
    DecodingGraph::new(vertices, edges, &[])
}

/// Model graph for one sector of the rotated surface code.
pub fn build_surface_model_graph(
    layout: &SurfaceCodeLayout,
    config: &ModelGraphConfig,
) -> Result<DecodingGraph, GraphError> {
    build_sector_model_graph(&layout.code, config)
}

/// The six-qubit worked example: decoding graph for its X errors with edge
/// weights (0.1, 0.5, 0.1, 0.1, 0.1, 0.1), a 1e-7 virtual edge, and the two
/// check vertices v1, v2 highlighted. Edge id `i` is the paper's edge
/// `e_{i+1}`.
pub fn build_six_qubit_fixture() -> (DecodingGraph, CodeSpec) {
    let css = CssCode::six_qubit();
    let sector = css.sector(ErrorSector::XErrors);
    let config = ModelGraphConfig {
        virtual_weight: 1e-7,
        wiring: VirtualWiring::Chain,
    };
    let graph = build_sector_model_graph(&sector, &config)
        .and_then(|g| g.with_qubit_weights(&[0.1, 0.5, 0.1, 0.1, 0.1, 0.1]))
        .and_then(|g| g.with_highlights(&Bits::from_indices(&[0, 1])))
        .expect("fixture is graphlike");
    (graph, CodeSpec { css, shapes: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::CssCode;

    fn fixture() -> DecodingGraph {
        build_six_qubit_fixture().0
    }

    #[test]
    fn fixture_shape_matches_worked_example() {
        let g = fixture();
        assert_eq!(g.n_vertices(), 6);
        assert_eq!(g.n_edges(), 7);
        assert_eq!(g.highlighted().count(), 2);
        // e1..e7: endpoints and weights
        let e = g.edges();
        assert_eq!((e[0].u, e[0].v), (0, 4)); // e1 = {v1, vA}
        assert_eq!((e[1].u, e[1].v), (0, 1)); // e2 = {v1, v2}
        assert_eq!((e[2].u, e[2].v), (1, 5)); // e3 = {v2, vB}
        assert_eq!((e[3].u, e[3].v), (0, 2)); // e4 = {v1, v3}
        assert_eq!((e[4].u, e[4].v), (1, 3)); // e5 = {v2, v4}
        assert_eq!((e[5].u, e[5].v), (2, 3)); // e6 = {v3, v4}
        assert_eq!((e[6].u, e[6].v), (4, 5)); // e7 = {vA, vB}
        assert_eq!(e[1].weight, 0.5);
        assert_eq!(e[6].weight, 1e-7);
        assert!(e[6].qubit.is_none());
    }

    #[test]
    fn fixture_validate_matching_examples() {
        let g = fixture();
        let (ok, w) = g.validate_matching(&[0, 2, 6]).unwrap();
        assert!(ok);
        assert!((w - (0.2 + 1e-7)).abs() < 1e-12);
        let (ok, w) = g.validate_matching(&[3, 4, 5]).unwrap();
        assert!(ok);
        assert!((w - 0.3).abs() < 1e-12);
        let (ok, w) = g.validate_matching(&[0]).unwrap();
        assert!(!ok);
        assert!((w - 0.1).abs() < 1e-12);
        assert!(matches!(
            g.validate_matching(&[99]),
            Err(GraphError::UnknownEdge(99))
        ));
    }

    #[test]
    fn surface_d3_counts() {
        let layout = SurfaceCodeLayout::new(3, ErrorSector::ZErrors).unwrap();
        let g = build_surface_model_graph(&layout, &ModelGraphConfig::default()).unwrap();
        assert_eq!(g.n_checks(), 4);
        assert_eq!(g.n_qubits(), 9);
        // six boundary qubits -> six virtuals chained by five edges
        assert_eq!(g.n_vertices(), 10);
        assert_eq!(g.n_edges(), 14);
    }

    #[test]
    fn surface_d5_counts() {
        let layout = SurfaceCodeLayout::new(5, ErrorSector::ZErrors).unwrap();
        let g = build_surface_model_graph(&layout, &ModelGraphConfig::default()).unwrap();
        assert_eq!(g.n_checks(), 12);
        assert_eq!(g.n_qubits(), 25);
    }

    #[test]
    fn degenerate_layout_rejected() {
        assert!(matches!(
            SurfaceCodeLayout::new(1, ErrorSector::ZErrors),
            Err(crate::code::CodeError::BadDistance(1))
        ));
        // single qubit, no checks at all
        let css = CssCode {
            n_qubits: 1,
            x_checks: alloc::vec::Vec::new(),
            z_checks: alloc::vec::Vec::new(),
            logical_x: Bits::from_indices(&[0]),
            logical_z: Bits::from_indices(&[0]),
        };
        let sector = css.sector(ErrorSector::ZErrors);
        assert!(matches!(
            build_sector_model_graph(&sector, &ModelGraphConfig::default()),
            Err(GraphError::EmptyCheckSet)
        ));
    }

    #[test]
    fn not_graphlike_rejected() {
        // one qubit in three checks
        let css = CssCode {
            n_qubits: 3,
            x_checks: alloc::vec![
                Bits::from_indices(&[0, 1]),
                Bits::from_indices(&[0, 2]),
                Bits::from_indices(&[0, 1, 2]),
            ],
            z_checks: alloc::vec::Vec::new(),
            logical_x: Bits::from_indices(&[0]),
            logical_z: Bits::from_indices(&[0]),
        };
        let sector = css.sector(ErrorSector::ZErrors);
        assert!(matches!(
            build_sector_model_graph(&sector, &ModelGraphConfig::default()),
            Err(GraphError::NotGraphlike { qubit: 0, checks: 3 })
        ));
    }

    #[test]
    fn assign_edge_weights_formula_and_domain() {
        let layout = SurfaceCodeLayout::new(3, ErrorSector::ZErrors).unwrap();
        let g = build_surface_model_graph(&layout, &ModelGraphConfig::default()).unwrap();
        let w = g.assign_edge_weights(&[0.1; 9]).unwrap();
        let ln9 = (9.0f64).ln();
        for e in w.edges() {
            if e.qubit.is_some() {
                assert!((e.weight - ln9).abs() < 1e-15);
            } else {
                assert_eq!(e.weight, 0.0);
            }
        }
        // eps -> 0.5- gives weights -> 0+
        let w = g.assign_edge_weights(&[0.4999999; 9]).unwrap();
        for e in w.edges() {
            if e.qubit.is_some() {
                assert!(e.weight > 0.0 && e.weight < 1e-5);
            }
        }
        assert!(matches!(
            g.assign_edge_weights(&[0.6; 9]),
            Err(GraphError::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            g.assign_edge_weights(&[0.1; 3]),
            Err(GraphError::WeightCount { .. })
        ));
    }

    #[test]
    fn highlight_from_syndrome_parity_fix() {
        let g = fixture();
        let h = g.highlight_from_syndrome(&[0, 0, 0, 0]).unwrap();
        assert!(h.highlighted().is_empty());
        let h = g.highlight_from_syndrome(&[1, 1, 0, 0]).unwrap();
        assert_eq!(h.highlighted_ids(), alloc::vec![0, 1]);
        // odd count pulls in the lowest-id virtual (vA = 4)
        let h = g.highlight_from_syndrome(&[1, 0, 0, 0]).unwrap();
        assert_eq!(h.highlighted_ids(), alloc::vec![0, 4]);
        assert_eq!(h.highlighted().count() % 2, 0);
        assert!(matches!(
            g.highlight_from_syndrome(&[1, 0]),
            Err(GraphError::SyndromeLength { .. })
        ));
    }

    #[test]
    fn duplicate_edges_rejected() {
        let vertices = alloc::vec![
            Vertex { id: 0, is_virtual: false },
            Vertex { id: 1, is_virtual: false },
        ];
        let edges = alloc::vec![
            Edge { id: 0, u: 0, v: 1, weight: 1.0, qubit: Some(0) },
            Edge { id: 1, u: 1, v: 0, weight: 2.0, qubit: Some(1) },
        ];
        assert!(matches!(
            DecodingGraph::new(vertices, edges, &[]),
            Err(GraphError::DuplicatedEdge { u: 0, v: 1 })
        ));
    }

    #[test]
    fn weight_is_additive_over_disjoint_sets() {
        let g = fixture();
        let a = Bits::from_indices(&[0, 2]);
        let b = Bits::from_indices(&[3, 5]);
        let mut ab = a.clone();
        ab.or_assign(&b);
        assert!((g.weight_of(&ab) - (g.weight_of(&a) + g.weight_of(&b))).abs() < 1e-12);
    }
}
