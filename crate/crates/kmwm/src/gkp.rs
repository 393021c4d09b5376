//! GKP lattice decoding: shape matrices, GKP-weighted decoding graphs, coset
//! representatives and probabilities, and the separable / correlated
//! surface-GKP decoders.

pub mod lattice;

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;

use crate::bits::Bits;
use crate::code::{ClassLabel, CssCode, ErrorSector, SectorCode};
use crate::enumerate::MwmEnumerator;
use crate::graph::{
    build_sector_model_graph, DecodingGraph, GraphError, ModelGraphConfig,
};
use crate::math;
use crate::qubit::ClassTally;

pub use lattice::{standard_form_generator, GkpLattice, IMat, LatticeError};

/// Row-major 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn square() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    /// Rectangular shape with aspect-ratio square root `gamma`.
    pub fn rectangular(gamma: f64) -> Self {
        Mat2::new(gamma, 0.0, 0.0, 1.0 / gamma)
    }

    /// The hexagonal shape in the upper-triangular basis.
    pub fn hexagonal() -> Self {
        let g1 = math::sqrt(2.0) / libm::pow(3.0, 0.25);
        Mat2::new(g1, -g1 / 2.0, 0.0, 1.0 / g1)
    }

    pub fn entries(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    pub fn inverse(&self) -> Mat2 {
        let det = self.det();
        Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    /// Deviation from the one-mode symplectic condition S Omega S^T = Omega,
    /// which for 2x2 matrices is |det - 1|.
    pub fn symplectic_defect(&self) -> f64 {
        math::abs(self.det() - 1.0)
    }
}

/// A one-mode shape matrix with the rotation that brings it upper
/// triangular: `tri = rotation^T * s`, `tri` has a zero lower-left entry and
/// positive diagonal.
#[derive(Debug, Clone, Copy)]
pub struct ModeShape {
    pub s: Mat2,
    pub rotation: Mat2,
    pub tri: Mat2,
}

impl ModeShape {
    pub fn new(s: Mat2) -> Result<Self, GkpError> {
        if s.symplectic_defect() > 1e-9 {
            return Err(GkpError::NotSymplectic);
        }
        let h = math::hypot(s.a, s.c);
        if h <= 0.0 {
            return Err(GkpError::NotSymplectic);
        }
        // Givens rotation zeroing the lower-left entry of rotation^T * s
        let rotation = Mat2::new(s.a / h, -s.c / h, s.c / h, s.a / h);
        let raw = rotation.transpose().mul(&s);
        let tri = Mat2::new(raw.a, raw.b, 0.0, raw.d);
        debug_assert!(math::abs(raw.c) < 1e-12);
        debug_assert!(tri.a > 0.0 && tri.d > 0.0);
        Ok(ModeShape { s, rotation, tri })
    }

    /// Whether the q and p subspaces decouple for this shape.
    pub fn is_separable(&self) -> bool {
        math::abs(self.tri.b) < 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GkpError {
    NotSymplectic,
    ShapeCount { expected: usize, got: usize },
    NonPositiveScale(f64),
    Dimension { expected: usize, got: usize },
    NotSeparable,
    NotInDualLattice,
    NoDecision,
    Graph(GraphError),
}

impl fmt::Display for GkpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GkpError::NotSymplectic => write!(f, "shape matrix is not symplectic"),
            GkpError::ShapeCount { expected, got } => {
                write!(f, "{got} mode shapes for {expected} modes")
            }
            GkpError::NonPositiveScale(g) => write!(f, "non-positive mode scale {g}"),
            GkpError::Dimension { expected, got } => {
                write!(f, "expected a vector of length {expected}, got {got}")
            }
            GkpError::NotSeparable => {
                write!(f, "shapes couple q and p; use the correlated decoder")
            }
            GkpError::NotInDualLattice => {
                write!(f, "vector is not a scaled symplectic-dual lattice point")
            }
            GkpError::NoDecision => write!(f, "decoder produced no representatives"),
            GkpError::Graph(e) => write!(f, "graph error: {e}"),
        }
    }
}

impl core::error::Error for GkpError {}

impl From<GraphError> for GkpError {
    fn from(e: GraphError) -> Self {
        GkpError::Graph(e)
    }
}

/// A surface-GKP code: outer CSS code, per-mode shapes, and the cached
/// per-sector model graphs (absent when the code has no checks).
#[derive(Debug, Clone)]
pub struct GkpSurfaceCode {
    pub css: CssCode,
    pub shapes: Vec<ModeShape>,
    pub sector_q: SectorCode,
    pub sector_p: SectorCode,
    pub model_q: Option<DecodingGraph>,
    pub model_p: Option<DecodingGraph>,
}

impl GkpSurfaceCode {
    pub fn new(css: CssCode, shapes: Vec<Mat2>) -> Result<Self, GkpError> {
        if shapes.len() != css.n_qubits {
            return Err(GkpError::ShapeCount {
                expected: css.n_qubits,
                got: shapes.len(),
            });
        }
        let shapes = shapes
            .into_iter()
            .map(ModeShape::new)
            .collect::<Result<Vec<_>, _>>()?;
        let sector_q = css.sector(ErrorSector::XErrors);
        let sector_p = css.sector(ErrorSector::ZErrors);
        let config = ModelGraphConfig::default();
        let model_q = if sector_q.detectors.is_empty() {
            None
        } else {
            Some(build_sector_model_graph(&sector_q, &config)?)
        };
        let model_p = if sector_p.detectors.is_empty() {
            None
        } else {
            Some(build_sector_model_graph(&sector_p, &config)?)
        };
        Ok(GkpSurfaceCode {
            css,
            shapes,
            sector_q,
            sector_p,
            model_q,
            model_p,
        })
    }

    pub fn square(css: CssCode) -> Result<Self, GkpError> {
        let n = css.n_qubits;
        Self::new(css, alloc::vec![Mat2::square(); n])
    }

    pub fn rectangular(css: CssCode, gammas: &[f64]) -> Result<Self, GkpError> {
        if gammas.iter().any(|&g| g <= 0.0) {
            return Err(GkpError::NonPositiveScale(
                gammas.iter().copied().find(|&g| g <= 0.0).unwrap_or(0.0),
            ));
        }
        let shapes = gammas.iter().map(|&g| Mat2::rectangular(g)).collect();
        Self::new(css, shapes)
    }

    pub fn hexagonal(css: CssCode) -> Result<Self, GkpError> {
        let n = css.n_qubits;
        Self::new(css, alloc::vec![Mat2::hexagonal(); n])
    }

    pub fn n_modes(&self) -> usize {
        self.css.n_qubits
    }

    pub fn is_separable(&self) -> bool {
        self.shapes.iter().all(|s| s.is_separable())
    }

    /// Rotate a phase-space vector (in eta-prime units) into the per-mode
    /// upper-triangular basis.
    pub fn rotate_in(&self, eta_prime: &[f64]) -> Result<Vec<f64>, GkpError> {
        let n = self.n_modes();
        if eta_prime.len() != 2 * n {
            return Err(GkpError::Dimension {
                expected: 2 * n,
                got: eta_prime.len(),
            });
        }
        let mut out = alloc::vec![0.0; 2 * n];
        for (m, shape) in self.shapes.iter().enumerate() {
            let rot = shape.rotation.transpose();
            let (q, p) = rot.apply((eta_prime[m], eta_prime[n + m]));
            out[m] = q;
            out[n + m] = p;
        }
        Ok(out)
    }

    /// Map a Pauli-frame binary displacement to the discrete shift
    /// `sqrt(pi) S eta'` of this code, in eta-prime units (i.e. `S eta'`).
    pub fn discrete_shift(&self, x_part: &Bits, z_part: &Bits) -> Vec<f64> {
        let n = self.n_modes();
        let mut out = alloc::vec![0.0; 2 * n];
        for (m, shape) in self.shapes.iter().enumerate() {
            let v = (
                if x_part.get(m) { 1.0 } else { 0.0 },
                if z_part.get(m) { 1.0 } else { 0.0 },
            );
            let (q, p) = shape.s.apply(v);
            out[m] = q;
            out[n + m] = p;
        }
        out
    }
}

/// First- and second-closest integers to `x` (ties round down / up).
pub fn round_pair(x: f64) -> (i64, i64) {
    (math::round_first(x), math::round_second(x))
}

/// Rounding penalty entering the GKP edge weight:
/// `gamma^2 [ (f2(x) - x)^2 - (f1(x) - x)^2 ]` for `x = eta'' = eta'/gamma`.
pub fn rounding_penalty(eta_dd: f64, gamma: f64) -> f64 {
    let (f1, f2) = round_pair(eta_dd);
    let d2 = f2 as f64 - eta_dd;
    let d1 = f1 as f64 - eta_dd;
    gamma * gamma * (d2 * d2 - d1 * d1)
}

/// Weight a model graph for GKP decoding: qubit edge `j` gets the rounding
/// penalty of `eta_prime[j]` at scale `gamma[j]`, and a vertex is highlighted
/// when the closest-integer ansatz violates its parity (with the usual
/// virtual parity fix).
pub fn gkp_decoding_graph(
    model: &DecodingGraph,
    eta_prime: &[f64],
    gamma: &[f64],
) -> Result<DecodingGraph, GkpError> {
    let n_qubits = model.n_qubits();
    if eta_prime.len() != n_qubits {
        return Err(GkpError::Dimension {
            expected: n_qubits,
            got: eta_prime.len(),
        });
    }
    if gamma.len() != n_qubits {
        return Err(GkpError::Dimension {
            expected: n_qubits,
            got: gamma.len(),
        });
    }
    if let Some(&g) = gamma.iter().find(|&&g| g <= 0.0) {
        return Err(GkpError::NonPositiveScale(g));
    }
    let mut weights = alloc::vec![0.0; n_qubits];
    let mut ansatz = alloc::vec![0i64; n_qubits];
    for q in 0..n_qubits {
        let eta_dd = eta_prime[q] / gamma[q];
        weights[q] = rounding_penalty(eta_dd, gamma[q]);
        ansatz[q] = math::round_first(eta_dd);
    }
    let weighted = model.with_qubit_weights(&weights)?;
    // parity of the ansatz at each check vertex, read off the incident qubit
    // edges (the incidence encodes the check matrix)
    let mut syndrome = Vec::new();
    for v in weighted.vertices() {
        if v.is_virtual {
            continue;
        }
        let mut parity = 0i64;
        for &(e, _) in weighted.adjacency(v.id) {
            if let Some(q) = weighted.edges()[e].qubit {
                parity += ansatz[q];
            }
        }
        syndrome.push((parity & 1) as u8);
    }
    Ok(weighted.highlight_from_syndrome(&syndrome)?)
}

/// An integer-valued coset representative chi: the underlying integers, the
/// scaled components `gamma_j * int_j`, and the matching weight it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetRepresentative {
    pub ints: Vec<i64>,
    pub scaled: Vec<f64>,
    pub weight: f64,
}

/// The representative selected by a matching: component `j` rounds
/// `eta''_j = eta'_j / gamma_j` the second-closest way iff qubit `j`'s edge
/// is in the matching.
pub fn matching_to_coset_rep(
    graph: &DecodingGraph,
    matching: &Bits,
    eta_prime: &[f64],
    gamma: &[f64],
) -> CosetRepresentative {
    let n_qubits = graph.n_qubits();
    let mut flipped = Bits::with_capacity(n_qubits);
    for e in matching.iter_ones() {
        if let Some(q) = graph.edges()[e].qubit {
            flipped.insert(q);
        }
    }
    let rep = rep_from_flips(&flipped, eta_prime, gamma);
    CosetRepresentative {
        weight: graph.weight_of(matching),
        ..rep
    }
}

fn rep_from_flips(flipped: &Bits, eta_prime: &[f64], gamma: &[f64]) -> CosetRepresentative {
    let n = eta_prime.len();
    let mut ints = alloc::vec![0i64; n];
    let mut scaled = alloc::vec![0.0; n];
    let mut weight = 0.0;
    for q in 0..n {
        let eta_dd = eta_prime[q] / gamma[q];
        let (f1, f2) = round_pair(eta_dd);
        ints[q] = if flipped.get(q) { f2 } else { f1 };
        scaled[q] = gamma[q] * ints[q] as f64;
        if flipped.get(q) {
            weight += rounding_penalty(eta_dd, gamma[q]);
        }
    }
    CosetRepresentative { ints, scaled, weight }
}

/// Separable (per-subspace) coset probability: product over modes of the
/// truncated one-dimensional Gaussian sums
/// `sum_{v=-n_v..n_v} exp(-pi (eta'_j - chi_j - 2 gamma_j v)^2 / 2 sigma^2)`.
/// The global Gaussian prefactor is dropped; it cancels between classes.
pub fn coset_probability(
    rep: &CosetRepresentative,
    eta_prime: &[f64],
    gamma: &[f64],
    sigma: f64,
    n_v: i64,
) -> f64 {
    let inv = math::PI / (2.0 * sigma * sigma);
    let mut prod = 1.0;
    for j in 0..eta_prime.len() {
        let base = eta_prime[j] - rep.scaled[j];
        let mut sum = 0.0;
        for v in -n_v..=n_v {
            let d = base - 2.0 * gamma[j] * v as f64;
            sum += math::exp(-inv * d * d);
        }
        prod *= sum;
    }
    prod
}

/// Per-mode two-dimensional coset term for a general shape: the `n_v`
/// closest points of `2 Lambda(S^T)` to the residue are found by exhaustive
/// search over coefficient vectors in `[-radius, radius]^2` and their
/// Gaussian weights summed. Works in the rotated (upper-triangular) frame.
pub fn mode_coset_probability_2d(
    tri: &Mat2,
    v: (i64, i64),
    eta_tilde: (f64, f64),
    sigma: f64,
    n_v: usize,
    radius: i64,
) -> f64 {
    let chi = tri.apply((v.0 as f64, v.1 as f64));
    let t = (eta_tilde.0 - chi.0, eta_tilde.1 - chi.1);
    let mut dists: Vec<(f64, (i64, i64))> = Vec::with_capacity(((2 * radius + 1) * (2 * radius + 1)) as usize);
    for wq in -radius..=radius {
        for wp in -radius..=radius {
            let u = tri.apply((2.0 * wq as f64, 2.0 * wp as f64));
            let dq = t.0 - u.0;
            let dp = t.1 - u.1;
            dists.push((dq * dq + dp * dp, (wq, wp)));
        }
    }
    dists.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
    let inv = math::PI / (2.0 * sigma * sigma);
    dists
        .iter()
        .take(n_v)
        .map(|(d2, _)| math::exp(-inv * d2))
        .sum()
}

/// One enumerated representative of a sector decode.
#[derive(Debug, Clone)]
pub struct SectorRep {
    pub rep: CosetRepresentative,
    pub class: ClassLabel,
    pub probability: f64,
    pub rank: Option<usize>,
    pub discovered_at: usize,
}

/// Ordered representatives found (and explored) while decoding one sector.
#[derive(Debug, Clone)]
pub struct SectorTrace {
    pub found: Vec<SectorRep>,
    pub explored: Vec<SectorRep>,
}

impl SectorTrace {
    pub fn tally(&self, k: usize, include_explored: bool) -> ClassTally {
        let mut tally = ClassTally::new();
        for r in self.found.iter().take(k) {
            tally.add(r.class, r.probability, r.rank.unwrap_or(0));
        }
        if include_explored {
            let late = self.found.iter().skip(k).chain(self.explored.iter());
            for r in late {
                if r.discovered_at < k {
                    tally.add(r.class, r.probability, r.rank.unwrap_or(usize::MAX));
                }
            }
        }
        tally
    }

    pub fn decision(&self, k: usize, include_explored: bool) -> Option<ClassLabel> {
        self.tally(k, include_explored).decision()
    }
}

/// Flip sets (over modes) in non-decreasing weight order, either read off
/// graph matchings or, for a sector with no checks, enumerated freely.
/// `discovered_at` counts emissions, with the identity seed (when present)
/// counted as the first emission.
enum FlipStream<'g> {
    Graph {
        graph: &'g DecodingGraph,
        en: MwmEnumerator<'g>,
        seed_pending: bool,
        seeded: bool,
    },
    Free(FreeStream),
}

struct FlipItem {
    flips: Bits,
    weight: f64,
    discovered_at: usize,
}

fn remap_discovery(d: usize, seeded: bool) -> usize {
    if d == 0 {
        0
    } else {
        d + usize::from(seeded)
    }
}

impl FlipStream<'_> {
    fn next_item(&mut self) -> Option<FlipItem> {
        match self {
            FlipStream::Graph {
                graph,
                en,
                seed_pending,
                seeded,
            } => {
                if *seed_pending {
                    *seed_pending = false;
                    return Some(FlipItem {
                        flips: Bits::new(),
                        weight: 0.0,
                        discovered_at: 0,
                    });
                }
                let node = en.next_node()?;
                let mut flips = Bits::new();
                for e in node.matching.iter_ones() {
                    if let Some(q) = graph.edges()[e].qubit {
                        flips.insert(q);
                    }
                }
                Some(FlipItem {
                    flips,
                    weight: node.weight,
                    discovered_at: remap_discovery(node.discovered_at, *seeded),
                })
            }
            FlipStream::Free(fs) => fs.next_item(),
        }
    }

    /// The remaining explored candidates (graph frontier or heap).
    fn explored(&self) -> Vec<FlipItem> {
        match self {
            FlipStream::Graph { graph, en, seeded, .. } => en
                .explored()
                .into_iter()
                .map(|node| {
                    let mut flips = Bits::new();
                    for e in node.matching.iter_ones() {
                        if let Some(q) = graph.edges()[e].qubit {
                            flips.insert(q);
                        }
                    }
                    FlipItem {
                        flips,
                        weight: node.weight,
                        discovered_at: remap_discovery(node.discovered_at, *seeded),
                    }
                })
                .collect(),
            FlipStream::Free(fs) => fs.explored(),
        }
    }
}

/// Lazy enumeration of mode subsets by total flip penalty: the classic
/// k-smallest-subset-sums walk over penalties sorted ascending.
struct FreeStream {
    /// (penalty, mode) sorted ascending.
    deltas: Vec<(f64, usize)>,
    heap: BinaryHeap<Reverse<FreeItem>>,
    emptied: bool,
    emitted: usize,
}

struct FreeItem {
    weight: f64,
    top: usize,
    flips_sorted: Bits,
    entered_at: usize,
}

impl PartialEq for FreeItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FreeItem {}

impl Ord for FreeItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then_with(|| self.flips_sorted.cmp(&other.flips_sorted))
    }
}

impl PartialOrd for FreeItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FreeStream {
    fn new(eta_prime: &[f64], gamma: &[f64]) -> Self {
        let mut deltas: Vec<(f64, usize)> = (0..eta_prime.len())
            .map(|q| (rounding_penalty(eta_prime[q] / gamma[q], gamma[q]), q))
            .collect();
        deltas.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let mut heap = BinaryHeap::new();
        if !deltas.is_empty() {
            heap.push(Reverse(FreeItem {
                weight: deltas[0].0,
                top: 0,
                flips_sorted: Bits::from_indices(&[0]),
                entered_at: 0,
            }));
        }
        FreeStream {
            deltas,
            heap,
            emptied: false,
            emitted: 0,
        }
    }

    fn translate(&self, flips_sorted: &Bits) -> Bits {
        let mut out = Bits::new();
        for i in flips_sorted.iter_ones() {
            out.insert(self.deltas[i].1);
        }
        out
    }

    fn next_item(&mut self) -> Option<FlipItem> {
        if !self.emptied {
            self.emptied = true;
            self.emitted = 1;
            return Some(FlipItem {
                flips: Bits::new(),
                weight: 0.0,
                discovered_at: 0,
            });
        }
        let Reverse(item) = self.heap.pop()?;
        self.emitted += 1;
        let i = item.top;
        if i + 1 < self.deltas.len() {
            let mut grown = item.flips_sorted.clone();
            grown.insert(i + 1);
            self.heap.push(Reverse(FreeItem {
                weight: item.weight + self.deltas[i + 1].0,
                top: i + 1,
                flips_sorted: grown,
                entered_at: self.emitted,
            }));
            let mut swapped = item.flips_sorted.clone();
            swapped.remove(i);
            swapped.insert(i + 1);
            self.heap.push(Reverse(FreeItem {
                weight: item.weight - self.deltas[i].0 + self.deltas[i + 1].0,
                top: i + 1,
                flips_sorted: swapped,
                entered_at: self.emitted,
            }));
        }
        Some(FlipItem {
            flips: self.translate(&item.flips_sorted),
            weight: item.weight,
            discovered_at: item.entered_at,
        })
    }

    fn explored(&self) -> Vec<FlipItem> {
        let mut items: Vec<FlipItem> = self
            .heap
            .iter()
            .map(|Reverse(it)| FlipItem {
                flips: self.translate(&it.flips_sorted),
                weight: it.weight,
                discovered_at: it.entered_at,
            })
            .collect();
        items.sort_by(|a, b| a.weight.total_cmp(&b.weight).then_with(|| a.flips.cmp(&b.flips)));
        items
    }
}

fn open_sector_stream<'g>(
    sector: &SectorCode,
    weighted: Option<&'g DecodingGraph>,
    eta_prime: &[f64],
    gamma: &[f64],
) -> FlipStream<'g> {
    match weighted {
        Some(graph) => {
            let seed_pending = graph.highlighted().is_empty();
            FlipStream::Graph {
                graph,
                en: MwmEnumerator::new(graph),
                seed_pending,
                seeded: seed_pending,
            }
        }
        None => {
            debug_assert!(sector.detectors.is_empty());
            FlipStream::Free(FreeStream::new(eta_prime, gamma))
        }
    }
}

/// Decode one sector of a separable code: enumerate `k` representatives in
/// weight order and score each with the one-dimensional coset sums.
fn decode_sector(
    sector: &SectorCode,
    model: Option<&DecodingGraph>,
    eta_prime: &[f64],
    gamma: &[f64],
    sigma: f64,
    n_v: i64,
    k: usize,
) -> Result<SectorTrace, GkpError> {
    let weighted = match model {
        Some(m) => Some(gkp_decoding_graph(m, eta_prime, gamma)?),
        None => None,
    };
    let mut stream = open_sector_stream(sector, weighted.as_ref(), eta_prime, gamma);
    let mut found = Vec::new();
    while found.len() < k {
        let Some(item) = stream.next_item() else { break };
        let rank = Some(found.len() + 1);
        found.push(score_rep(sector, &item, eta_prime, gamma, sigma, n_v, rank));
    }
    let explored = stream
        .explored()
        .into_iter()
        .map(|item| score_rep(sector, &item, eta_prime, gamma, sigma, n_v, None))
        .collect();
    Ok(SectorTrace { found, explored })
}

fn score_rep(
    sector: &SectorCode,
    item: &FlipItem,
    eta_prime: &[f64],
    gamma: &[f64],
    sigma: f64,
    n_v: i64,
    rank: Option<usize>,
) -> SectorRep {
    let rep = rep_from_flips(&item.flips, eta_prime, gamma);
    let class = sector.class_of_ints(&rep.ints);
    let probability = coset_probability(&rep, eta_prime, gamma, sigma, n_v);
    SectorRep {
        rep,
        class,
        probability,
        rank,
        discovered_at: item.discovered_at,
    }
}

/// Result of a separable surface-GKP decode: one trace per subspace.
#[derive(Debug, Clone)]
pub struct SeparableDecode {
    pub q: SectorTrace,
    pub p: SectorTrace,
}

impl SeparableDecode {
    /// Combined four-class tally: subspaces are independent, so class
    /// probabilities multiply.
    pub fn tally(&self, k: usize, include_explored: bool) -> ClassTally {
        let tq = self.q.tally(k, include_explored);
        let tp = self.p.tally(k, include_explored);
        let mut out = ClassTally::new();
        for (cq, pq) in tq.classes() {
            for (cp, pp) in tp.classes() {
                out.add(ClassLabel::combine(cq, cp), pq * pp, 0);
            }
        }
        out
    }

    pub fn decision(&self, k: usize, include_explored: bool) -> Option<ClassLabel> {
        let dq = self.q.decision(k, include_explored)?;
        let dp = self.p.decision(k, include_explored)?;
        Some(ClassLabel::combine(dq, dp))
    }
}

/// Approximate MLD for a square or rectangular surface-GKP code: decode the
/// two decoupled subspaces independently with `k` representatives each.
/// `eta_prime` is the candidate error in units of sqrt(pi).
pub fn decode_surface_gkp_separable(
    code: &GkpSurfaceCode,
    eta_prime: &[f64],
    sigma: f64,
    n_v: i64,
    k: usize,
) -> Result<SeparableDecode, GkpError> {
    if !code.is_separable() {
        return Err(GkpError::NotSeparable);
    }
    let n = code.n_modes();
    if eta_prime.len() != 2 * n {
        return Err(GkpError::Dimension {
            expected: 2 * n,
            got: eta_prime.len(),
        });
    }
    let gamma_q: Vec<f64> = code.shapes.iter().map(|s| s.tri.a).collect();
    let gamma_p: Vec<f64> = code.shapes.iter().map(|s| s.tri.d).collect();
    let q = decode_sector(
        &code.sector_q,
        code.model_q.as_ref(),
        &eta_prime[..n],
        &gamma_q,
        sigma,
        n_v,
        k,
    )?;
    let p = decode_sector(
        &code.sector_p,
        code.model_p.as_ref(),
        &eta_prime[n..],
        &gamma_p,
        sigma,
        n_v,
        k,
    )?;
    Ok(SeparableDecode { q, p })
}

/// One assembled (q, p) representative emitted by the correlated decoder.
#[derive(Debug, Clone)]
pub struct AssembledRep {
    /// Index of the p-subspace representative (1-based).
    pub p_rank: usize,
    /// Rank of the q-subspace representative within its branch (1-based).
    pub q_rank: usize,
    /// Underlying integers, q components then p components.
    pub ints: Vec<i64>,
    pub probability: f64,
    pub class: ClassLabel,
    /// Emission count when this candidate entered the search.
    pub entered_at: usize,
}

#[derive(Debug, Clone)]
pub struct CorrelatedDecode {
    pub emitted: Vec<AssembledRep>,
    pub leftovers: Vec<AssembledRep>,
}

impl CorrelatedDecode {
    pub fn tally(&self, k: usize, include_explored: bool) -> ClassTally {
        let mut tally = ClassTally::new();
        for (i, r) in self.emitted.iter().take(k).enumerate() {
            tally.add(r.class, r.probability, i + 1);
        }
        if include_explored {
            let late = self.emitted.iter().skip(k).chain(self.leftovers.iter());
            for r in late {
                if r.entered_at < k {
                    tally.add(r.class, r.probability, usize::MAX);
                }
            }
        }
        tally
    }

    pub fn decision(&self, k: usize, include_explored: bool) -> Option<ClassLabel> {
        self.tally(k, include_explored).decision()
    }

    pub fn best(&self) -> Option<&AssembledRep> {
        self.emitted.first()
    }
}

struct TreeNodeRef {
    probability: f64,
    p_index: usize,
    q_rank: usize,
    q_ints: Vec<i64>,
    entered_at: usize,
}

impl PartialEq for TreeNodeRef {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TreeNodeRef {}

impl Ord for TreeNodeRef {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap by probability; ties prefer the smaller (i, j)
        self.probability
            .total_cmp(&other.probability)
            .then_with(|| other.p_index.cmp(&self.p_index))
            .then_with(|| other.q_rank.cmp(&self.q_rank))
    }
}

impl PartialOrd for TreeNodeRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Approximate MLD for a general surface-GKP code via the root-less decoding
/// tree: enumerate `k` p-subspace representatives, pair each lazily with
/// q-subspace representatives for its modified candidate error, and emit
/// assembled representatives in decreasing coset probability, expanding only
/// the successor of the best node popped.
pub fn decode_surface_gkp_correlated(
    code: &GkpSurfaceCode,
    eta_prime: &[f64],
    sigma: f64,
    n_v: usize,
    k: usize,
) -> Result<CorrelatedDecode, GkpError> {
    let n = code.n_modes();
    if eta_prime.len() != 2 * n {
        return Err(GkpError::Dimension {
            expected: 2 * n,
            got: eta_prime.len(),
        });
    }
    let search_radius = 3;
    let rotated = code.rotate_in(eta_prime)?;
    let eta_q = &rotated[..n];
    let eta_p = &rotated[n..];
    let gamma_q: Vec<f64> = code.shapes.iter().map(|s| s.tri.a).collect();
    let gamma_p: Vec<f64> = code.shapes.iter().map(|s| s.tri.d).collect();
    let cross: Vec<f64> = code.shapes.iter().map(|s| s.tri.b).collect();

    // stage 1: the first k p-subspace representatives
    let p_weighted = match code.model_p.as_ref() {
        Some(m) => Some(gkp_decoding_graph(m, eta_p, &gamma_p)?),
        None => None,
    };
    let mut p_stream = open_sector_stream(&code.sector_p, p_weighted.as_ref(), eta_p, &gamma_p);
    let mut p_reps: Vec<CosetRepresentative> = Vec::new();
    while p_reps.len() < k {
        let Some(item) = p_stream.next_item() else { break };
        p_reps.push(rep_from_flips(&item.flips, eta_p, &gamma_p));
    }
    if p_reps.is_empty() {
        return Ok(CorrelatedDecode {
            emitted: Vec::new(),
            leftovers: Vec::new(),
        });
    }

    // stage 2: per p-representative, a modified q candidate and its own
    // weighted decoding graph (same connectivity, different weights and
    // highlights)
    let mut q_candidates: Vec<Vec<f64>> = Vec::with_capacity(p_reps.len());
    for rep in &p_reps {
        let modified: Vec<f64> = (0..n)
            .map(|m| eta_q[m] - cross[m] * rep.ints[m] as f64)
            .collect();
        q_candidates.push(modified);
    }
    let mut q_graphs: Vec<Option<DecodingGraph>> = Vec::with_capacity(p_reps.len());
    for cand in &q_candidates {
        q_graphs.push(match code.model_q.as_ref() {
            Some(m) => Some(gkp_decoding_graph(m, cand, &gamma_q)?),
            None => None,
        });
    }
    let mut q_streams: Vec<FlipStream> = Vec::with_capacity(p_reps.len());
    for (i, g) in q_graphs.iter().enumerate() {
        q_streams.push(open_sector_stream(
            &code.sector_q,
            g.as_ref(),
            &q_candidates[i],
            &gamma_q,
        ));
    }

    let probability_of = |q_ints: &[i64], p_ints: &[i64]| -> f64 {
        let mut prod = 1.0;
        for (m, shape) in code.shapes.iter().enumerate() {
            prod *= mode_coset_probability_2d(
                &shape.tri,
                (q_ints[m], p_ints[m]),
                (eta_q[m], eta_p[m]),
                sigma,
                n_v,
                search_radius,
            );
        }
        prod
    };
    let class_of = |q_ints: &[i64], p_ints: &[i64]| -> ClassLabel {
        ClassLabel::combine(
            code.sector_q.class_of_ints(q_ints),
            code.sector_p.class_of_ints(p_ints),
        )
    };

    // the k root-less starting nodes (i, j=1)
    let mut heap: BinaryHeap<TreeNodeRef> = BinaryHeap::new();
    for (i, stream) in q_streams.iter_mut().enumerate() {
        if let Some(item) = stream.next_item() {
            let q_rep = rep_from_flips(&item.flips, &q_candidates[i], &gamma_q);
            heap.push(TreeNodeRef {
                probability: probability_of(&q_rep.ints, &p_reps[i].ints),
                p_index: i,
                q_rank: 1,
                q_ints: q_rep.ints,
                entered_at: 0,
            });
        }
    }

    let mut emitted = Vec::new();
    while emitted.len() < k {
        let Some(node) = heap.pop() else { break };
        let assembled_ints: Vec<i64> = node
            .q_ints
            .iter()
            .chain(p_reps[node.p_index].ints.iter())
            .copied()
            .collect();
        emitted.push(AssembledRep {
            p_rank: node.p_index + 1,
            q_rank: node.q_rank,
            class: class_of(&node.q_ints, &p_reps[node.p_index].ints),
            probability: node.probability,
            ints: assembled_ints,
            entered_at: node.entered_at,
        });
        // expand only the popped node's successor in its q branch
        if let Some(item) = q_streams[node.p_index].next_item() {
            let q_rep = rep_from_flips(&item.flips, &q_candidates[node.p_index], &gamma_q);
            heap.push(TreeNodeRef {
                probability: probability_of(&q_rep.ints, &p_reps[node.p_index].ints),
                p_index: node.p_index,
                q_rank: node.q_rank + 1,
                q_ints: q_rep.ints,
                entered_at: emitted.len(),
            });
        }
    }
    let mut leftovers: Vec<AssembledRep> = heap
        .into_iter()
        .map(|node| AssembledRep {
            p_rank: node.p_index + 1,
            q_rank: node.q_rank,
            class: class_of(&node.q_ints, &p_reps[node.p_index].ints),
            probability: node.probability,
            ints: node
                .q_ints
                .iter()
                .chain(p_reps[node.p_index].ints.iter())
                .copied()
                .collect(),
            entered_at: node.entered_at,
        })
        .collect();
    leftovers.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.p_rank.cmp(&b.p_rank))
            .then_with(|| a.q_rank.cmp(&b.q_rank))
    });
    Ok(CorrelatedDecode { emitted, leftovers })
}

/// The logical class of the dual-lattice vector separating two consistent
/// candidate errors (both in units of sqrt(pi)); used to name the true class
/// of a sampled shift relative to the decoder's candidate.
pub fn true_class(
    code: &GkpSurfaceCode,
    candidate_eta_prime: &[f64],
    actual_eta_prime: &[f64],
) -> Result<ClassLabel, GkpError> {
    let n = code.n_modes();
    if candidate_eta_prime.len() != 2 * n || actual_eta_prime.len() != 2 * n {
        return Err(GkpError::Dimension {
            expected: 2 * n,
            got: candidate_eta_prime.len().min(actual_eta_prime.len()),
        });
    }
    let mut q_ints = alloc::vec![0i64; n];
    let mut p_ints = alloc::vec![0i64; n];
    for (m, shape) in code.shapes.iter().enumerate() {
        let d = (
            candidate_eta_prime[m] - actual_eta_prime[m],
            candidate_eta_prime[n + m] - actual_eta_prime[n + m],
        );
        let v = shape.s.inverse().apply(d);
        let vq = math::round_first(v.0);
        let vp = math::round_first(v.1);
        if math::abs(v.0 - vq as f64) > 1e-6 || math::abs(v.1 - vp as f64) > 1e-6 {
            return Err(GkpError::NotInDualLattice);
        }
        q_ints[m] = vq;
        p_ints[m] = vp;
    }
    Ok(ClassLabel::combine(
        code.sector_q.class_of_ints(&q_ints),
        code.sector_p.class_of_ints(&p_ints),
    ))
}
