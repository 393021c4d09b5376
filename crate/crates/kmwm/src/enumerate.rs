//! Enumeration of the first K minimum-weight matchings of a decoding graph
//! via the decoding tree.
//!
//! Every tree node is a matching written as `mwm(G') ∪ E''`: the minimum
//! matching of a reduced graph plus a fixed completion edge set. Expanding a
//! node deletes the ordered edges of its inner matching one prefix at a time,
//! flipping the highlighted set accordingly, and re-solves each reduced
//! graph. Children never weigh less than their parent, so a best-first pop
//! order yields the matchings in globally non-decreasing weight.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::bits::Bits;
use crate::graph::{DecodingGraph, Edge, EdgeId, GraphError, Vertex};
use crate::matching::{mwm_view, GraphView, MatchingSolution, SolutionKind, SolverCtx};

/// One node of the decoding tree: a matching together with the reduced graph
/// (as a removed-edge mask plus highlighted set) and completion edges that
/// define it.
#[derive(Debug, Clone)]
pub struct TreeNode {
    /// The full matching of the original graph, `inner ∪ completion`.
    pub matching: Bits,
    pub weight: f64,
    /// Edges of `mwm(G')`, sorted by edge id; their deletion order when the
    /// node is expanded.
    pub inner: Vec<EdgeId>,
    /// Edges removed from the base graph to form the reduced graph G'.
    pub removed: Bits,
    /// Highlighted set of G'.
    pub highlights: Bits,
    /// Completion edge set E''; disjoint from the reduced graph's edges.
    pub completion: Bits,
    /// Index of the found matching whose expansion produced this node
    /// (0 for the root).
    pub discovered_at: usize,
    pub kind: SolutionKind,
}

impl TreeNode {
    /// Materialize the reduced graph this node's inner matching solves.
    pub fn reduced(&self, base: &DecodingGraph) -> DecodingGraph {
        materialize_reduced(base, &self.removed, &self.highlights)
    }
}

struct FrontierItem {
    node: TreeNode,
}

impl PartialEq for FrontierItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FrontierItem {}

impl Ord for FrontierItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.node
            .weight
            .total_cmp(&other.node.weight)
            .then_with(|| self.node.matching.cmp(&other.node.matching))
    }
}

impl PartialOrd for FrontierItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazy enumerator over the matchings of a decoding graph in non-decreasing
/// weight order. Holds the found count, the frontier of explored candidates
/// keyed by (weight, canonical edge set), and the set of every matching seen.
pub struct MwmEnumerator<'g> {
    graph: &'g DecodingGraph,
    frontier: BinaryHeap<Reverse<FrontierItem>>,
    seen: BTreeSet<Bits>,
    /// Popped but not yet expanded; expansion is deferred so that finding K
    /// matchings never pays for the children of the K-th.
    pending: Option<TreeNode>,
    found: usize,
    ctx: SolverCtx,
    mwm_calls: usize,
}

impl<'g> MwmEnumerator<'g> {
    pub fn new(graph: &'g DecodingGraph) -> Self {
        let mut e = MwmEnumerator {
            graph,
            frontier: BinaryHeap::new(),
            seen: BTreeSet::new(),
            pending: None,
            found: 0,
            ctx: SolverCtx::new(graph.n_vertices()),
            mwm_calls: 0,
        };
        let view = GraphView::full(graph);
        e.mwm_calls += 1;
        if let Some(root) = mwm_view(&view, &mut e.ctx) {
            let node = TreeNode {
                inner: root.edges.to_indices(),
                matching: root.edges,
                weight: root.weight,
                removed: Bits::with_capacity(graph.n_edges()),
                highlights: graph.highlighted().clone(),
                completion: Bits::with_capacity(graph.n_edges()),
                discovered_at: 0,
                kind: root.kind,
            };
            e.seen.insert(node.matching.clone());
            e.frontier.push(Reverse(FrontierItem { node }));
        }
        e
    }

    /// Number of matchings returned so far.
    pub fn found(&self) -> usize {
        self.found
    }

    /// Total inner minimum-weight matching solves, including the root.
    pub fn mwm_calls(&self) -> usize {
        self.mwm_calls
    }

    /// The explored-but-not-returned candidates, sorted by (weight, edge set).
    pub fn explored(&self) -> Vec<TreeNode> {
        let mut nodes: Vec<TreeNode> = self
            .frontier
            .iter()
            .map(|Reverse(item)| item.node.clone())
            .collect();
        nodes.sort_by(|a, b| {
            a.weight
                .total_cmp(&b.weight)
                .then_with(|| a.matching.cmp(&b.matching))
        });
        nodes
    }

    pub fn next_node(&mut self) -> Option<TreeNode> {
        if let Some(node) = self.pending.take() {
            self.expand(&node);
        }
        let Reverse(item) = self.frontier.pop()?;
        self.found += 1;
        self.pending = Some(item.node.clone());
        Some(item.node)
    }

    fn expand(&mut self, node: &TreeNode) {
        let m = node.inner.len();
        for j in 1..=m + 1 {
            let mut removed = node.removed.clone();
            for &e in node.inner.iter().take(j.min(m)) {
                removed.insert(e);
            }
            let mut highlights = node.highlights.clone();
            let mut completion = node.completion.clone();
            for &e in node.inner.iter().take(j - 1) {
                highlights.xor_assign(&self.graph.endpoints(e));
                completion.insert(e);
            }
            let view = GraphView {
                graph: self.graph,
                removed: Some(&removed),
                highlighted: &highlights,
            };
            self.mwm_calls += 1;
            let Some(sol) = mwm_view(&view, &mut self.ctx) else {
                continue;
            };
            let mut matching = sol.edges.clone();
            matching.or_assign(&completion);
            if self.seen.contains(&matching) {
                continue;
            }
            let weight = self.graph.weight_of(&matching);
            debug_assert!(weight >= node.weight - 1e-9);
            let child = TreeNode {
                inner: sol.edges.to_indices(),
                matching: matching.clone(),
                weight,
                removed,
                highlights,
                completion,
                discovered_at: self.found,
                kind: node.kind,
            };
            self.seen.insert(matching);
            self.frontier.push(Reverse(FrontierItem { node: child }));
        }
    }
}

impl Iterator for MwmEnumerator<'_> {
    type Item = MatchingSolution;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_node().map(|node| MatchingSolution {
            edges: node.matching,
            weight: node.weight,
            kind: node.kind,
        })
    }
}

/// The first `k` minimum-weight matchings of `graph`, in non-decreasing
/// weight order; fewer when the graph has fewer matchings.
pub fn enumerate_mwms(graph: &DecodingGraph, k: usize) -> Vec<MatchingSolution> {
    MwmEnumerator::new(graph).take(k).collect()
}

fn materialize_reduced(base: &DecodingGraph, removed: &Bits, highlights: &Bits) -> DecodingGraph {
    let vertices: Vec<Vertex> = base.vertices().to_vec();
    let mut edges: Vec<Edge> = Vec::new();
    for e in base.edges() {
        if !removed.get(e.id) {
            let mut e = *e;
            e.id = edges.len();
            edges.push(e);
        }
    }
    // edge ids are compacted; vertices and weights survive unchanged
    let g = DecodingGraph::new(vertices, edges, &[]).expect("reduced graph stays valid");
    g.with_highlights(highlights).expect("highlights stay valid")
}

/// The j-th reduced graph of `parent` for an ordered matching `mwm_edges`
/// (1-based `j` up to `|mwm_edges| + 1`): edges `e_1..e_j` are removed (all
/// of them at `j = |mwm_edges| + 1`) and the highlighted set is flipped by
/// the endpoints of `e_1..e_{j-1}`. Edge ids are renumbered contiguously.
pub fn reduced_graph(
    parent: &DecodingGraph,
    mwm_edges: &[EdgeId],
    j: usize,
) -> Result<DecodingGraph, GraphError> {
    if j == 0 || j > mwm_edges.len() + 1 {
        return Err(GraphError::UnknownEdge(j));
    }
    for &e in mwm_edges {
        if e >= parent.n_edges() {
            return Err(GraphError::UnknownEdge(e));
        }
    }
    let mut removed = Bits::with_capacity(parent.n_edges());
    for &e in mwm_edges.iter().take(j.min(mwm_edges.len())) {
        removed.insert(e);
    }
    let mut highlights = parent.highlighted().clone();
    for &e in mwm_edges.iter().take(j - 1) {
        highlights.xor_assign(&parent.endpoints(e));
    }
    Ok(materialize_reduced(parent, &removed, &highlights))
}

/// All children of a decoding-tree node, in (weight, edge set) order.
/// Children produced here carry `discovered_at = 0`.
pub fn node_children(base: &DecodingGraph, node: &TreeNode) -> Vec<TreeNode> {
    let mut scratch = MwmEnumerator {
        graph: base,
        frontier: BinaryHeap::new(),
        seen: BTreeSet::new(),
        pending: None,
        found: 0,
        ctx: SolverCtx::new(base.n_vertices()),
        mwm_calls: 0,
    };
    scratch.expand(node);
    let mut children: Vec<TreeNode> = scratch
        .frontier
        .into_iter()
        .map(|Reverse(item)| item.node)
        .collect();
    children.sort_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then_with(|| a.matching.cmp(&b.matching))
    });
    children
}

/// The root node of the decoding tree, when the graph has any matching.
pub fn root_node(graph: &DecodingGraph) -> Option<TreeNode> {
    MwmEnumerator::new(graph).next_node()
}
