//! Qubit-level decoding: matchings to Pauli errors, logical classes,
//! K-matching class tallies, and the Pauli-to-GKP parameter map.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;
use crate::code::{ClassLabel, SectorCode};
use crate::enumerate::MwmEnumerator;
use crate::gkp::Mat2;
use crate::graph::DecodingGraph;
use crate::math;

/// A binary physical error over the data qubits of one sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalError {
    pub bits: Bits,
}

/// The physical error selected by a matching: qubit j flips iff its edge is
/// in the matching; virtual edges contribute nothing.
pub fn matching_to_error(graph: &DecodingGraph, matching: &Bits) -> PhysicalError {
    let mut bits = Bits::new();
    for id in matching.iter_ones() {
        if let Some(q) = graph.edges()[id].qubit {
            bits.insert(q);
        }
    }
    PhysicalError { bits }
}

/// The qubit-edge set of a physical error (the converse map; virtual edges
/// are never included).
pub fn error_to_matching(graph: &DecodingGraph, error: &PhysicalError) -> Bits {
    let mut set = Bits::with_capacity(graph.n_edges());
    for q in error.bits.iter_ones() {
        if let Some(e) = graph.qubit_edge(q) {
            set.insert(e);
        }
    }
    set
}

/// Logical class of a physical error: overlap parity with the opposing
/// logical operator.
pub fn logical_class(error: &PhysicalError, sector: &SectorCode) -> ClassLabel {
    sector.class_of(&error.bits)
}

/// Per-class accumulated (unnormalized) probabilities, with the emission
/// indices of the contributing matchings.
#[derive(Debug, Clone, Default)]
pub struct ClassTally {
    tallies: BTreeMap<ClassLabel, f64>,
    members: BTreeMap<ClassLabel, Vec<usize>>,
}

impl ClassTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, class: ClassLabel, probability: f64, member: usize) {
        *self.tallies.entry(class).or_insert(0.0) += probability;
        self.members.entry(class).or_default().push(member);
    }

    pub fn probability(&self, class: ClassLabel) -> f64 {
        self.tallies.get(&class).copied().unwrap_or(0.0)
    }

    pub fn classes(&self) -> impl Iterator<Item = (ClassLabel, f64)> + '_ {
        self.tallies.iter().map(|(&c, &p)| (c, p))
    }

    pub fn members(&self, class: ClassLabel) -> &[usize] {
        self.members.get(&class).map_or(&[], |v| v.as_slice())
    }

    pub fn total(&self) -> f64 {
        self.tallies.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tallies.is_empty()
    }

    /// The most probable class; ties break toward the identity, then by
    /// class-label order.
    pub fn decision(&self) -> Option<ClassLabel> {
        let mut best: Option<(ClassLabel, f64)> = None;
        for (&c, &p) in &self.tallies {
            best = match best {
                None => Some((c, p)),
                Some((bc, bp)) => {
                    if p > bp || (p == bp && c < bc) {
                        Some((c, p))
                    } else {
                        Some((bc, bp))
                    }
                }
            };
        }
        best.map(|(c, _)| c)
    }
}

/// One decoded matching in emission order: edges, weight, class, and its
/// `exp(-weight)` contribution.
#[derive(Debug, Clone)]
pub struct DecodedMatching {
    pub edges: Bits,
    pub weight: f64,
    pub class: ClassLabel,
    pub contribution: f64,
    /// Emission rank (1-based) for found matchings; `None` for candidates
    /// that were explored but not among the first K.
    pub rank: Option<usize>,
    /// Number of found matchings when this candidate entered the tree.
    pub discovered_at: usize,
}

/// Full record of a graphlike decode, sufficient to rebuild the tally for
/// any prefix K' <= K with or without the explored extras.
#[derive(Debug, Clone)]
pub struct DecodeTrace {
    pub found: Vec<DecodedMatching>,
    pub explored: Vec<DecodedMatching>,
}

impl DecodeTrace {
    /// Tally over the first `k` found matchings; with `include_explored`,
    /// candidates already discovered at that point of the search (and not
    /// among the first `k`) are added too.
    pub fn tally(&self, k: usize, include_explored: bool) -> ClassTally {
        let mut tally = ClassTally::new();
        for m in self.found.iter().take(k) {
            tally.add(m.class, m.contribution, m.rank.unwrap_or(0));
        }
        if include_explored {
            let late = self.found.iter().skip(k).chain(self.explored.iter());
            for m in late {
                if m.discovered_at < k {
                    tally.add(m.class, m.contribution, m.rank.unwrap_or(usize::MAX));
                }
            }
        }
        tally
    }
}

/// Decode a weighted, highlighted graph by accumulating `exp(-w(M))` over the
/// first `k` matchings, grouped by logical class. With an empty highlighted
/// set the identity (empty) matching is counted first at weight zero, then
/// cycles follow.
pub fn decode_graphlike(
    graph: &DecodingGraph,
    sector: &SectorCode,
    k: usize,
    include_explored: bool,
) -> (ClassTally, DecodeTrace) {
    let trace = decode_trace(graph, sector, k);
    let tally = trace.tally(k, include_explored);
    (tally, trace)
}

/// Run the enumeration for `k` matchings and record everything seen; the
/// explored list is the frontier left after finding them.
pub fn decode_trace(graph: &DecodingGraph, sector: &SectorCode, k: usize) -> DecodeTrace {
    // `discovered_at` is mapped to emission counting: 0 for anything known
    // before the first emission, otherwise the emission rank of the parent
    // whose expansion produced the candidate.
    let offset = usize::from(graph.highlighted().is_empty());
    let remap = |d: usize| if d == 0 { 0 } else { d + offset };
    let mut found = Vec::new();
    if offset == 1 && k >= 1 {
        // the empty matching is the identity error consistent with a trivial
        // syndrome; the decoding tree itself roots at the minimum cycle
        found.push(DecodedMatching {
            edges: Bits::new(),
            weight: 0.0,
            class: ClassLabel::I,
            contribution: 1.0,
            rank: Some(1),
            discovered_at: 0,
        });
    }
    let mut en = MwmEnumerator::new(graph);
    while found.len() < k {
        let Some(node) = en.next_node() else { break };
        let class = logical_class(&matching_to_error(graph, &node.matching), sector);
        found.push(DecodedMatching {
            class,
            contribution: math::exp(-node.weight),
            rank: Some(found.len() + 1),
            discovered_at: remap(node.discovered_at),
            weight: node.weight,
            edges: node.matching,
        });
    }
    let explored = en
        .explored()
        .into_iter()
        .map(|node| {
            let class = logical_class(&matching_to_error(graph, &node.matching), sector);
            DecodedMatching {
                class,
                contribution: math::exp(-node.weight),
                rank: None,
                discovered_at: remap(node.discovered_at),
                weight: node.weight,
                edges: node.matching,
            }
        })
        .collect();
    DecodeTrace { found, explored }
}

/// Per-mode GKP shape and noise deviation equivalent to a Pauli channel.
#[derive(Debug, Clone, Copy)]
pub struct GkpNoiseParams {
    pub shape: Mat2,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    NegativeRate(f64),
    OutOfRange(&'static str),
    NoRealSolution,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::NegativeRate(e) => write!(f, "negative error rate {e}"),
            ParamError::OutOfRange(what) => write!(f, "{what}"),
            ParamError::NoRealSolution => write!(f, "no real shape solves these rates"),
        }
    }
}

impl core::error::Error for ParamError {}

/// Solve for the one-mode GKP shape (upper-triangular, unit determinant) and
/// noise deviation whose discrete-shift channel reproduces the Pauli rates
/// `(eps_x, eps_y, eps_z)`:
///
///   eps_x/eps_i = exp(-pi g1^2 / 2 sigma^2)
///   eps_z/eps_i = exp(-pi (g2^2 + g4^2) / 2 sigma^2)
///   eps_y/eps_i = exp(-pi ((g1+g2)^2 + g4^2) / 2 sigma^2)
///
/// Pure Z noise maps to the square shape with sigma^2 = pi / (2 ln((1-e)/e));
/// depolarizing noise maps to the hexagonal shape.
pub fn pauli_to_gkp_params(
    eps_x: f64,
    eps_y: f64,
    eps_z: f64,
) -> Result<GkpNoiseParams, ParamError> {
    for e in [eps_x, eps_y, eps_z] {
        if e < 0.0 || !e.is_finite() {
            return Err(ParamError::NegativeRate(e));
        }
    }
    let eps = eps_x + eps_y + eps_z;
    if eps >= 1.0 {
        return Err(ParamError::OutOfRange("total error rate must be below 1"));
    }
    let eps_i = 1.0 - eps;
    if eps_x == 0.0 && eps_y == 0.0 {
        if !(eps_z > 0.0 && eps_z < 0.5) {
            return Err(ParamError::OutOfRange(
                "pure-Z rate must lie in (0, 0.5)",
            ));
        }
        let sigma = math::sqrt(math::PI / (2.0 * math::ln(eps_i / eps_z)));
        return Ok(GkpNoiseParams {
            shape: Mat2::square(),
            sigma,
        });
    }
    if eps_x == 0.0 || eps_y == 0.0 || eps_z == 0.0 {
        // the exponent equations need all three rates positive outside the
        // pure-Z special case
        return Err(ParamError::NoRealSolution);
    }
    let a = math::ln(eps_i / eps_x);
    let b = math::ln(eps_i / eps_z);
    let c = math::ln(eps_i / eps_y);
    let d = (c - a - b) / 2.0;
    let t2 = a * b - d * d;
    if a <= 0.0 || b <= 0.0 || t2 <= 0.0 {
        return Err(ParamError::NoRealSolution);
    }
    let t = math::sqrt(t2);
    if b - d * d / a <= 0.0 {
        return Err(ParamError::NoRealSolution);
    }
    let sigma = math::sqrt(math::PI / (2.0 * t));
    let g1 = math::sqrt(a / t);
    let g2 = d / (t * g1);
    let g4 = 1.0 / g1;
    Ok(GkpNoiseParams {
        shape: Mat2::new(g1, g2, 0.0, g4),
        sigma,
    })
}
