//! Single-solution solvers over decoding graphs: Dijkstra shortest paths,
//! minimum-weight cycles, and minimum-weight matchings.
//!
//! The minimum-weight matching reduces to a blossom perfect matching over the
//! complete shortest-path graph on highlighted vertices, with even-use edge
//! cancellation when the realized paths overlap.

mod blossom;

use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::bits::Bits;
use crate::graph::{DecodingGraph, EdgeId, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub enum MatchingError {
    UnknownVertex(VertexId),
    SameEndpoints(VertexId),
    HighlightedGraph,
}

impl fmt::Display for MatchingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingError::UnknownVertex(v) => write!(f, "unknown vertex id {v}"),
            MatchingError::SameEndpoints(v) => {
                write!(f, "source and target are both vertex {v}")
            }
            MatchingError::HighlightedGraph => {
                write!(f, "minimum-weight cycle requires an empty highlighted set")
            }
        }
    }
}

impl core::error::Error for MatchingError {}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    /// Edge ids along the path, ordered from source to target.
    pub edges: Vec<EdgeId>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    HighlightedMatching,
    Cycle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingSolution {
    pub edges: Bits,
    pub weight: f64,
    pub kind: SolutionKind,
}

impl MatchingSolution {
    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.to_indices()
    }
}

/// A decoding graph with some edges masked off and an overriding highlighted
/// set; the reduced graphs of the decoding tree are represented this way
/// without copying the base graph.
#[derive(Clone, Copy)]
pub(crate) struct GraphView<'a> {
    pub graph: &'a DecodingGraph,
    pub removed: Option<&'a Bits>,
    pub highlighted: &'a Bits,
}

impl<'a> GraphView<'a> {
    pub fn full(graph: &'a DecodingGraph) -> Self {
        GraphView {
            graph,
            removed: None,
            highlighted: graph.highlighted(),
        }
    }

    #[inline]
    pub fn edge_active(&self, e: EdgeId) -> bool {
        self.removed.is_none_or(|r| !r.get(e))
    }
}

const NO_PRED: (EdgeId, VertexId) = (usize::MAX, usize::MAX);

/// Reusable scratch space for the solvers. One context serves one thread;
/// distinct solves may share a graph but not a context.
pub(crate) struct SolverCtx {
    dist: Vec<f64>,
    pred: Vec<(EdgeId, VertexId)>,
    seen: Vec<u32>,
    stamp: u32,
    heap: alloc::collections::BinaryHeap<Reverse<(u64, VertexId)>>,
    comp: Vec<usize>,
    bfs: Vec<VertexId>,
}

impl SolverCtx {
    pub fn new(n_vertices: usize) -> Self {
        SolverCtx {
            dist: alloc::vec![f64::INFINITY; n_vertices],
            pred: alloc::vec![NO_PRED; n_vertices],
            seen: alloc::vec![0; n_vertices],
            stamp: 0,
            heap: alloc::collections::BinaryHeap::new(),
            comp: alloc::vec![usize::MAX; n_vertices],
            bfs: Vec::new(),
        }
    }

    fn ensure(&mut self, n: usize) {
        if self.dist.len() < n {
            self.dist.resize(n, f64::INFINITY);
            self.pred.resize(n, NO_PRED);
            self.seen.resize(n, 0);
            self.comp.resize(n, usize::MAX);
        }
    }
}

/// Heap keys order floats by their IEEE total order; all weights are finite
/// and nonnegative, so the bit pattern of a nonnegative f64 orders correctly
/// as an unsigned integer.
#[inline]
fn order_key(w: f64) -> u64 {
    debug_assert!(w >= 0.0 && w.is_finite());
    w.to_bits()
}

/// Dijkstra from `source` over the view. Fills `ctx.dist`/`ctx.pred` for the
/// vertices reached; ties are broken toward lower vertex ids so predecessor
/// trees are deterministic.
fn dijkstra(view: &GraphView, source: VertexId, ctx: &mut SolverCtx) {
    let n = view.graph.n_vertices();
    ctx.ensure(n);
    ctx.stamp += 1;
    let stamp = ctx.stamp;
    ctx.heap.clear();
    ctx.dist[source] = 0.0;
    ctx.pred[source] = NO_PRED;
    ctx.seen[source] = stamp;
    ctx.heap.push(Reverse((order_key(0.0), source)));
    while let Some(Reverse((key, v))) = ctx.heap.pop() {
        if ctx.seen[v] != stamp || order_key(ctx.dist[v]) != key {
            continue;
        }
        let dv = ctx.dist[v];
        for &(e, u) in view.graph.adjacency(v) {
            if !view.edge_active(e) {
                continue;
            }
            let nd = dv + view.graph.edges()[e].weight;
            if ctx.seen[u] != stamp || nd < ctx.dist[u] {
                ctx.seen[u] = stamp;
                ctx.dist[u] = nd;
                ctx.pred[u] = (e, v);
                ctx.heap.push(Reverse((order_key(nd), u)));
            }
        }
    }
}

fn walk_path(ctx: &SolverCtx, source: VertexId, target: VertexId) -> Vec<EdgeId> {
    let mut edges = Vec::new();
    let mut v = target;
    while v != source {
        let (e, prev) = ctx.pred[v];
        edges.push(e);
        v = prev;
    }
    edges.reverse();
    edges
}

pub(crate) fn shortest_path_view(
    view: &GraphView,
    source: VertexId,
    target: VertexId,
    ctx: &mut SolverCtx,
) -> Option<PathResult> {
    dijkstra(view, source, ctx);
    if ctx.seen[target] != ctx.stamp {
        return None;
    }
    let edges = walk_path(ctx, source, target);
    let weight = edges.iter().map(|&e| view.graph.edges()[e].weight).sum();
    Some(PathResult { edges, weight })
}

/// Minimum-total-weight simple path between two vertices, or `None` when they
/// are disconnected.
pub fn shortest_path(
    graph: &DecodingGraph,
    source: VertexId,
    target: VertexId,
) -> Result<Option<PathResult>, MatchingError> {
    let n = graph.n_vertices();
    if source >= n {
        return Err(MatchingError::UnknownVertex(source));
    }
    if target >= n {
        return Err(MatchingError::UnknownVertex(target));
    }
    if source == target {
        return Err(MatchingError::SameEndpoints(source));
    }
    let mut ctx = SolverCtx::new(n);
    Ok(shortest_path_view(&GraphView::full(graph), source, target, &mut ctx))
}

pub(crate) fn mwc_view(view: &GraphView, ctx: &mut SolverCtx) -> Option<MatchingSolution> {
    let graph = view.graph;
    let mut best: Option<(f64, Bits)> = None;
    let mut masked: Bits;
    for e in 0..graph.n_edges() {
        if !view.edge_active(e) {
            continue;
        }
        // remove e, connect its endpoints by the cheapest remaining path
        masked = view.removed.cloned().unwrap_or_default();
        masked.insert(e);
        let sub = GraphView {
            graph,
            removed: Some(&masked),
            highlighted: view.highlighted,
        };
        let edge = &graph.edges()[e];
        let Some(path) = shortest_path_view(&sub, edge.u, edge.v, ctx) else {
            continue;
        };
        let mut cycle = Bits::with_capacity(graph.n_edges());
        for id in path.edges {
            cycle.insert(id);
        }
        cycle.insert(e);
        let weight = graph.weight_of(&cycle);
        let better = match &best {
            None => true,
            Some((bw, bc)) => match weight.total_cmp(bw) {
                core::cmp::Ordering::Less => true,
                core::cmp::Ordering::Equal => cycle < *bc,
                core::cmp::Ordering::Greater => false,
            },
        };
        if better {
            best = Some((weight, cycle));
        }
    }
    best.map(|(weight, edges)| MatchingSolution {
        edges,
        weight,
        kind: SolutionKind::Cycle,
    })
}

/// Minimum-weight cycle: for each edge, close the cheapest path between its
/// endpoints through the rest of the graph. `None` when the graph is acyclic.
///
/// The graph must have no highlighted vertices; a cycle is the matching of
/// such a graph.
pub fn mwc(graph: &DecodingGraph) -> Result<Option<MatchingSolution>, MatchingError> {
    if !graph.highlighted().is_empty() {
        return Err(MatchingError::HighlightedGraph);
    }
    let mut ctx = SolverCtx::new(graph.n_vertices());
    Ok(mwc_view(&GraphView::full(graph), &mut ctx))
}

/// Connected components over active edges; returns (component id per vertex,
/// component count).
fn components(view: &GraphView, ctx: &mut SolverCtx) -> usize {
    let graph = view.graph;
    let n = graph.n_vertices();
    ctx.ensure(n);
    for c in ctx.comp.iter_mut().take(n) {
        *c = usize::MAX;
    }
    let mut count = 0;
    for start in 0..n {
        if ctx.comp[start] != usize::MAX {
            continue;
        }
        ctx.bfs.clear();
        ctx.bfs.push(start);
        ctx.comp[start] = count;
        while let Some(v) = ctx.bfs.pop() {
            for &(e, u) in graph.adjacency(v) {
                if view.edge_active(e) && ctx.comp[u] == usize::MAX {
                    ctx.comp[u] = count;
                    ctx.bfs.push(u);
                }
            }
        }
        count += 1;
    }
    count
}

pub(crate) fn mwm_view(view: &GraphView, ctx: &mut SolverCtx) -> Option<MatchingSolution> {
    if view.highlighted.is_empty() {
        return mwc_view(view, ctx);
    }
    let graph = view.graph;
    let n_comp = components(view, ctx);
    let highlighted: Vec<VertexId> = view.highlighted.iter_ones().collect();
    let mut comp_counts = alloc::vec![0usize; n_comp];
    for &h in &highlighted {
        comp_counts[ctx.comp[h]] += 1;
    }
    if comp_counts.iter().any(|&c| c % 2 == 1) {
        return None;
    }
    let comp_of: Vec<usize> = highlighted.iter().map(|&h| ctx.comp[h]).collect();
    // all-pairs shortest paths among highlighted vertices, one Dijkstra per
    // source; predecessor rows are kept for path realization
    let mut dist_rows: Vec<Vec<f64>> = Vec::with_capacity(highlighted.len());
    let mut pred_rows: Vec<Vec<(EdgeId, VertexId)>> = Vec::with_capacity(highlighted.len());
    for &h in &highlighted {
        dijkstra(view, h, ctx);
        let mut drow = Vec::with_capacity(highlighted.len());
        for &t in &highlighted {
            if ctx.seen[t] == ctx.stamp {
                drow.push(ctx.dist[t]);
            } else {
                drow.push(f64::INFINITY);
            }
        }
        dist_rows.push(drow);
        pred_rows.push(ctx.pred[..graph.n_vertices()].to_vec());
    }
    let mut result = Bits::with_capacity(graph.n_edges());
    for comp in 0..n_comp {
        let members: Vec<usize> = (0..highlighted.len())
            .filter(|&i| comp_of[i] == comp)
            .collect();
        if members.is_empty() {
            continue;
        }
        let pairs: Vec<(usize, usize)> = if members.len() == 2 {
            alloc::vec![(members[0], members[1])]
        } else {
            let mut edges = Vec::new();
            for a in 0..members.len() {
                for b in a + 1..members.len() {
                    edges.push((a, b, dist_rows[members[a]][members[b]]));
                }
            }
            let mate = blossom::min_weight_perfect_matching(members.len(), &edges)?;
            (0..members.len())
                .filter(|&a| a < mate[a])
                .map(|a| (members[a], members[mate[a]]))
                .collect()
        };
        for (a, b) in pairs {
            // realize the path from highlighted[a] to highlighted[b] in a's
            // predecessor tree; XOR cancels edges used an even number of times
            let src = highlighted[a];
            let mut v = highlighted[b];
            while v != src {
                let (e, prev) = pred_rows[a][v];
                result.flip(e);
                v = prev;
            }
        }
    }
    let weight = graph.weight_of(&result);
    debug_assert!({
        let mut boundary = Bits::with_capacity(graph.n_vertices());
        for e in result.iter_ones() {
            boundary.xor_assign(&graph.endpoints(e));
        }
        boundary == *view.highlighted
    });
    Some(MatchingSolution {
        edges: result,
        weight,
        kind: SolutionKind::HighlightedMatching,
    })
}

/// Minimum-weight matching of the decoding graph: the cheapest edge subset
/// whose endpoint symmetric difference equals the highlighted set. With no
/// highlighted vertices this is the minimum-weight cycle. `None` when some
/// connected component holds an odd number of highlighted vertices, or when
/// the highlighted set is empty and the graph is acyclic.
pub fn mwm(graph: &DecodingGraph) -> Option<MatchingSolution> {
    let mut ctx = SolverCtx::new(graph.n_vertices());
    mwm_view(&GraphView::full(graph), &mut ctx)
}
