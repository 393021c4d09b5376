//! Brute-force reference computations that gate the approximate decoders at
//! desk scale, plus the seeded random instances they run on. Size guards are
//! hard errors; an oracle that silently degrades is useless.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::code::{ClassLabel, SectorCode};

use crate::gkp::{mode_coset_probability_2d, GkpSurfaceCode};
use crate::graph::{DecodingGraph, Edge, Vertex};
use crate::matching::{MatchingSolution, SolutionKind};
use crate::math;
use crate::qubit::ClassTally;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    TooLarge { what: &'static str, limit: usize, got: usize },
    Inconsistent(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { what, limit, got } => {
                write!(f, "{what} size {got} exceeds the oracle guard {limit}")
            }
            OracleError::Inconsistent(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for OracleError {}

/// Comparison record between an oracle and the system under test.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub instance: String,
    pub oracle: String,
    pub under_test: String,
    pub agree: bool,
    pub detail: String,
}

/// Every edge subset whose boundary equals the highlighted set, sorted by
/// (weight, canonical edge set). Guarded to 22 edges (a 2^|E| scan).
pub fn enumerate_all_matchings(
    graph: &DecodingGraph,
) -> Result<Vec<MatchingSolution>, OracleError> {
    let ne = graph.n_edges();
    if ne > 22 {
        return Err(OracleError::TooLarge {
            what: "edge count",
            limit: 22,
            got: ne,
        });
    }
    let kind = if graph.highlighted().is_empty() {
        SolutionKind::Cycle
    } else {
        SolutionKind::HighlightedMatching
    };
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << ne) {
        let mut boundary = Bits::with_capacity(graph.n_vertices());
        let mut set = Bits::with_capacity(ne);
        for e in 0..ne {
            if mask >> e & 1 == 1 {
                set.insert(e);
                boundary.xor_assign(&graph.endpoints(e));
            }
        }
        if boundary == *graph.highlighted() {
            let weight = graph.weight_of(&set);
            out.push(MatchingSolution { edges: set, weight, kind });
        }
    }
    out.sort_by(|a, b| a.weight.total_cmp(&b.weight).then_with(|| a.edges.cmp(&b.edges)));
    Ok(out)
}

/// Number of matchings predicted by linear algebra over F2: solutions of the
/// incidence system `B m = h` number `2^(|E| - rank B)` when consistent.
pub fn count_matchings_rank_formula(graph: &DecodingGraph) -> usize {
    let nv = graph.n_vertices();
    let ne = graph.n_edges();
    // rows: one per vertex over edge columns, augmented with the highlight bit
    let mut rows: Vec<(Bits, bool)> = (0..nv)
        .map(|v| {
            let mut row = Bits::with_capacity(ne);
            for &(e, _) in graph.adjacency(v) {
                row.flip(e);
            }
            (row, graph.highlighted().get(v))
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..ne {
        let Some(pivot) = (rank..nv).find(|&r| rows[r].0.get(col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..nv {
            if r != rank && rows[r].0.get(col) {
                let (head, aug) = rows[rank].clone();
                rows[r].0.xor_assign(&head);
                rows[r].1 ^= aug;
            }
        }
        rank += 1;
        if rank == nv {
            break;
        }
    }
    // inconsistent if a zero row demands a highlight
    for (row, aug) in &rows {
        if row.is_empty() && *aug {
            return 0;
        }
    }
    1usize << (ne - rank)
}

fn group_elements(generators: &[Bits], guard: usize) -> Result<Vec<Bits>, OracleError> {
    if generators.len() > guard {
        return Err(OracleError::TooLarge {
            what: "stabilizer generator count",
            limit: guard,
            got: generators.len(),
        });
    }
    let mut out = Vec::with_capacity(1 << generators.len());
    for mask in 0usize..(1 << generators.len()) {
        let mut g = Bits::new();
        for (i, gen) in generators.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g.xor_assign(gen);
            }
        }
        out.push(g);
    }
    Ok(out)
}

/// Solve `H eta = s` over F2 for one candidate error of a sector.
pub fn candidate_error(sector: &SectorCode, syndrome: &[u8]) -> Option<Bits> {
    let mut rows: Vec<(Bits, bool)> = sector
        .detectors
        .iter()
        .zip(syndrome)
        .map(|(d, &s)| (d.clone(), s % 2 == 1))
        .collect();
    let n = sector.n_qubits;
    let mut eta = Bits::with_capacity(n);
    let mut rank = 0usize;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].0.get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r].0.get(col) {
                let (head, aug) = rows[rank].clone();
                rows[r].0.xor_assign(&head);
                rows[r].1 ^= aug;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    for (row, aug) in rows.iter().skip(rank) {
        debug_assert!(row.is_empty());
        if *aug {
            return None;
        }
    }
    for (r, &col) in pivots.iter().enumerate() {
        if rows[r].1 {
            eta.insert(col);
        }
    }
    Some(eta)
}

/// Exact graphlike maximum-likelihood class probabilities for one sector:
/// sum `(eps/(1-eps))^{|error|}` over the full same-type stabilizer group for
/// each logical class. Unnormalized; only ratios matter.
pub fn brute_force_mld_qubit(
    sector: &SectorCode,
    candidate: &Bits,
    eps: &[f64],
) -> Result<ClassTally, OracleError> {
    let group = group_elements(&sector.group, 16)?;
    let ratios: Vec<f64> = eps.iter().map(|&e| e / (1.0 - e)).collect();
    let mut tally = ClassTally::new();
    for flip in [false, true] {
        let mut base = candidate.clone();
        if flip {
            base.xor_assign(&sector.same_logical);
        }
        let label = sector.class_of(&base);
        let mut total = 0.0;
        for g in &group {
            let mut err = base.clone();
            err.xor_assign(g);
            let mut p = 1.0;
            for q in err.iter_ones() {
                p *= ratios[q];
            }
            total += p;
        }
        tally.add(label, total, 0);
    }
    Ok(tally)
}

/// Exact correlated maximum-likelihood class probabilities: sum Eq.-style
/// factorized Pauli weights over the full stabilizer group for each of the
/// four logical classes. Errors and stabilizers are symplectic pairs
/// `[x part | z part]` over `2N` bits.
pub fn brute_force_mld_qubit_correlated(
    code: &crate::code::CssCode,
    candidate_x: &Bits,
    candidate_z: &Bits,
    eps_xyz: (f64, f64, f64),
) -> Result<ClassTally, OracleError> {
    let n = code.n_qubits;
    let gens: Vec<(Bits, Bits)> = code
        .x_checks
        .iter()
        .map(|g| (g.clone(), Bits::new()))
        .chain(code.z_checks.iter().map(|g| (Bits::new(), g.clone())))
        .collect();
    if gens.len() > 16 {
        return Err(OracleError::TooLarge {
            what: "stabilizer generator count",
            limit: 16,
            got: gens.len(),
        });
    }
    let (ex, ey, ez) = eps_xyz;
    let ei = 1.0 - ex - ey - ez;
    let mut tally = ClassTally::new();
    for class in [ClassLabel::I, ClassLabel::X, ClassLabel::Z, ClassLabel::Y] {
        let mut base_x = candidate_x.clone();
        let mut base_z = candidate_z.clone();
        if class.x {
            base_x.xor_assign(&code.logical_x);
        }
        if class.z {
            base_z.xor_assign(&code.logical_z);
        }
        let mut total = 0.0;
        for mask in 0usize..(1 << gens.len()) {
            let mut err_x = base_x.clone();
            let mut err_z = base_z.clone();
            for (i, (gx, gz)) in gens.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    err_x.xor_assign(gx);
                    err_z.xor_assign(gz);
                }
            }
            let mut p = 1.0;
            for q in 0..n {
                p *= match (err_x.get(q), err_z.get(q)) {
                    (false, false) => 1.0,
                    (true, false) => ex / ei,
                    (false, true) => ez / ei,
                    (true, true) => ey / ei,
                };
            }
            total += p;
        }
        tally.add(class, total, 0);
    }
    Ok(tally)
}

/// Exact-within-truncation GKP class probabilities: sum the per-mode
/// two-dimensional Gaussian lattice sums over the full stabilizer group for
/// each logical class. `eta_prime` is the candidate in units of sqrt(pi).
pub fn brute_force_mld_gkp(
    code: &GkpSurfaceCode,
    eta_prime: &[f64],
    sigma: f64,
    n_v: usize,
) -> Result<ClassTally, OracleError> {
    let n = code.n_modes();
    let gens: Vec<(Bits, Bits)> = code
        .css
        .x_checks
        .iter()
        .map(|g| (g.clone(), Bits::new()))
        .chain(code.css.z_checks.iter().map(|g| (Bits::new(), g.clone())))
        .collect();
    if gens.len() > 16 {
        return Err(OracleError::TooLarge {
            what: "stabilizer generator count",
            limit: 16,
            got: gens.len(),
        });
    }
    let rotated = code
        .rotate_in(eta_prime)
        .map_err(|e| OracleError::Inconsistent(alloc::format!("{e}")))?;
    let mut tally = ClassTally::new();
    for class in [ClassLabel::I, ClassLabel::X, ClassLabel::Z, ClassLabel::Y] {
        let mut base_x = Bits::new();
        let mut base_z = Bits::new();
        if class.x {
            base_x.xor_assign(&code.css.logical_x);
        }
        if class.z {
            base_z.xor_assign(&code.css.logical_z);
        }
        let mut total = 0.0;
        for mask in 0usize..(1 << gens.len()) {
            let mut vx = base_x.clone();
            let mut vz = base_z.clone();
            for (i, (gx, gz)) in gens.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    vx.xor_assign(gx);
                    vz.xor_assign(gz);
                }
            }
            let mut p = 1.0;
            for m in 0..n {
                p *= mode_coset_probability_2d(
                    &code.shapes[m].tri,
                    (vx.get(m) as i64, vz.get(m) as i64),
                    (rotated[m], rotated[n + m]),
                    sigma,
                    n_v,
                    3,
                );
            }
            total += p;
        }
        tally.add(class, total, 0);
    }
    Ok(tally)
}

/// Exhaustive single-mode coset computation, independent of the decoder's
/// representative machinery: sum `exp(-pi |eta' - S v|^2 / 2 sigma^2)` over
/// all integer vectors `v` in a box, binned by the parity class of `v`.
pub fn closest_coset_2d(
    code: &GkpSurfaceCode,
    eta_prime: &[f64],
    sigma: f64,
    radius: i64,
) -> Result<ClassTally, OracleError> {
    if code.n_modes() != 1 || eta_prime.len() != 2 {
        return Err(OracleError::Inconsistent(String::from(
            "closest_coset_2d expects a single-mode code",
        )));
    }
    let shape = &code.shapes[0].s;
    let inv = math::PI / (2.0 * sigma * sigma);
    let mut tally = ClassTally::new();
    for vq in -radius..=radius {
        for vp in -radius..=radius {
            let chi = shape.apply((vq as f64, vp as f64));
            let dq = eta_prime[0] - chi.0;
            let dp = eta_prime[1] - chi.1;
            let class = ClassLabel::combine(
                code.sector_q.class_of_ints(&[vq]),
                code.sector_p.class_of_ints(&[vp]),
            );
            tally.add(class, math::exp(-inv * (dq * dq + dp * dp)), 0);
        }
    }
    Ok(tally)
}

fn format_weights(sols: &[MatchingSolution], limit: usize) -> String {
    let mut s = String::new();
    for (i, sol) in sols.iter().take(limit).enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&alloc::format!("{:.12}", sol.weight));
    }
    if sols.len() > limit {
        s.push_str(" ...");
    }
    s
}

/// Matching-enumeration suite: on seeded random highlighted graphs, the full
/// enumeration must reproduce the brute-force matching list weight for
/// weight, and every output must satisfy the matching condition.
pub fn run_matching_suite(instances: usize, seed: u64) -> Vec<OracleReport> {
    let mut reports = Vec::with_capacity(instances);
    for i in 0..instances {
        let graph = random_instance_with_gaps(seed.wrapping_add(i as u64), 12, true, 1e-9);
        let all = enumerate_all_matchings(&graph).expect("instance within guard");
        let sols = crate::enumerate::enumerate_mwms(&graph, all.len() + 3);
        let mut agree = sols.len() == all.len();
        let mut detail = String::new();
        if !agree {
            detail = alloc::format!("count {} vs brute-force {}", sols.len(), all.len());
        }
        for (k, (a, b)) in sols.iter().zip(all.iter()).enumerate() {
            // sorted weight sequences identical at every prefix means the
            // first-K multisets agree for every K
            if a.weight != b.weight {
                agree = false;
                detail = alloc::format!("weight mismatch at K={}: {} vs {}", k + 1, a.weight, b.weight);
                break;
            }
            let (ok, w) = graph.validate_matching_bits(&a.edges);
            if !ok || w != a.weight {
                agree = false;
                detail = alloc::format!("invalid matching at K={}", k + 1);
                break;
            }
        }
        reports.push(OracleReport {
            instance: alloc::format!(
                "graph seed {} ({} edges, {} matchings)",
                seed.wrapping_add(i as u64),
                graph.n_edges(),
                all.len()
            ),
            oracle: format_weights(&all, 4),
            under_test: format_weights(&sols, 4),
            agree,
            detail,
        });
    }
    reports
}

/// Minimum-weight-cycle suite: with no highlighted vertices, mwc must match
/// the exhaustive cycle search exactly, and acyclic graphs must return no
/// solution.
pub fn run_mwc_suite(instances: usize, seed: u64) -> Vec<OracleReport> {
    let mut reports = Vec::with_capacity(instances);
    for i in 0..instances {
        let graph = random_instance_with_gaps(seed.wrapping_add(i as u64), 12, false, 1e-9);
        let all = enumerate_all_matchings(&graph).expect("instance within guard");
        // the empty set always satisfies the condition; cycles are the rest
        let best_cycle = all.iter().find(|s| !s.edges.is_empty());
        let sut = crate::matching::mwc(&graph).expect("no highlights by construction");
        let (agree, detail) = match (best_cycle, &sut) {
            (None, None) => (true, String::from("acyclic")),
            (Some(b), Some(s)) => {
                if s.weight == b.weight && s.edges.count() >= 3 {
                    (true, String::new())
                } else {
                    (false, alloc::format!("weight {} vs {}", s.weight, b.weight))
                }
            }
            (oracle, sut) => (
                false,
                alloc::format!("oracle {:?} vs mwc {:?}", oracle.map(|s| s.weight), sut.as_ref().map(|s| s.weight)),
            ),
        };
        reports.push(OracleReport {
            instance: alloc::format!("graph seed {} ({} edges)", seed.wrapping_add(i as u64), graph.n_edges()),
            oracle: best_cycle.map_or(String::from("none"), |s| alloc::format!("{:.12}", s.weight)),
            under_test: sut.as_ref().map_or(String::from("none"), |s| alloc::format!("{:.12}", s.weight)),
            agree,
            detail,
        });
    }
    reports
}

/// Exact-MLD agreement at distance 3: for all 16 Z-sector syndromes at
/// eps = 0.1, the full enumeration tally must pick the same class as the
/// brute-force coset sums.
pub fn run_mld_qubit_suite() -> Vec<OracleReport> {
    let css = crate::code::CssCode::rotated_surface(3).expect("distance 3 is valid");
    let sector = css.sector(crate::code::ErrorSector::ZErrors);
    let layout_graph = crate::graph::build_sector_model_graph(
        &sector,
        &crate::graph::ModelGraphConfig::default(),
    )
    .expect("d=3 sector is graphlike");
    let eps = alloc::vec![0.1; sector.n_qubits];
    let weighted = layout_graph.assign_edge_weights(&eps).expect("valid eps");
    let mut reports = Vec::with_capacity(16);
    for s in 0u8..16 {
        let syndrome: Vec<u8> = (0..4).map(|b| s >> b & 1).collect();
        let graph = weighted
            .highlight_from_syndrome(&syndrome)
            .expect("syndrome length matches");
        let total = count_matchings_rank_formula(&graph);
        let (tally, _) = crate::qubit::decode_graphlike(&graph, &sector, total, false);
        let sut = tally.decision();
        let candidate = candidate_error(&sector, &syndrome).expect("syndromes are consistent");
        let oracle_tally = brute_force_mld_qubit(&sector, &candidate, &eps).expect("within guard");
        let oracle = oracle_tally.decision();
        reports.push(OracleReport {
            instance: alloc::format!("d=3 syndrome {syndrome:?} ({total} matchings)"),
            oracle: oracle.map_or(String::from("none"), |c| String::from(c.name())),
            under_test: sut.map_or(String::from("none"), |c| String::from(c.name())),
            agree: sut == oracle && sut.is_some(),
            detail: String::new(),
        });
    }
    reports
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Two iid standard normal samples by the Box-Muller transform.
fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = loop {
        let u = uniform01(rng);
        if u > 0.0 {
            break u;
        }
    };
    let u2 = uniform01(rng);
    let r = math::sqrt(-2.0 * math::ln(u1));
    let theta = 2.0 * math::PI * u2;
    (r * libm::cos(theta), r * libm::sin(theta))
}

fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize, sigma: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let (a, b) = gaussian_pair(rng);
        out.push(a * sigma);
        if out.len() < len {
            out.push(b * sigma);
        }
    }
    out
}

/// GKP oracle suite, part 1: d=3 surface-square at sigma = 0.3, decoder at
/// K = all matchings against the stabilizer-group brute force. Part 2: one
/// hexagonal mode at sigma = 0.5, the correlated decoder's best assembled
/// representative against the exhaustive 2D lattice sum.
pub fn run_mld_gkp_suite(instances: usize, seed: u64) -> Vec<OracleReport> {
    let mut reports = Vec::new();
    let css = crate::code::CssCode::rotated_surface(3).expect("distance 3 is valid");
    let code = GkpSurfaceCode::square(css).expect("square shapes are symplectic");
    let sigma = 0.3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = instances / 2;
    for i in 0..half {
        let shift = gaussian_vec(&mut rng, 2 * code.n_modes(), sigma);
        let eta_prime: Vec<f64> = shift.iter().map(|x| x / math::sqrt(math::PI)).collect();
        // one subspace has 2^(|E| - rank) matchings; use it as K
        let k = {
            let g = crate::gkp::gkp_decoding_graph(
                code.model_p.as_ref().expect("d=3 has checks"),
                &eta_prime[code.n_modes()..],
                &alloc::vec![1.0; code.n_modes()],
            )
            .expect("valid graph");
            count_matchings_rank_formula(&g)
        };
        let decode = crate::gkp::decode_surface_gkp_separable(&code, &eta_prime, sigma, 4, k)
            .expect("square code decodes separably");
        let sut = decode.decision(k, false);
        let oracle_tally = brute_force_mld_gkp(&code, &eta_prime, sigma, 8).expect("within guard");
        let oracle = oracle_tally.decision();
        reports.push(OracleReport {
            instance: alloc::format!("surface-square d=3 shift {i} (K={k})"),
            oracle: oracle.map_or(String::from("none"), |c| String::from(c.name())),
            under_test: sut.map_or(String::from("none"), |c| String::from(c.name())),
            agree: sut == oracle && sut.is_some(),
            detail: String::new(),
        });
    }
    let trivial = crate::code::CssCode {
        n_qubits: 1,
        x_checks: Vec::new(),
        z_checks: Vec::new(),
        logical_x: Bits::from_indices(&[0]),
        logical_z: Bits::from_indices(&[0]),
    };
    let hex = GkpSurfaceCode::hexagonal(trivial).expect("hexagonal shape is symplectic");
    let sigma = 0.5;
    for i in 0..instances - half {
        let shift = gaussian_vec(&mut rng, 2, sigma);
        let eta_prime: Vec<f64> = shift.iter().map(|x| x / math::sqrt(math::PI)).collect();
        let decode = crate::gkp::decode_surface_gkp_correlated(&hex, &eta_prime, sigma, 4, 4)
            .expect("single-mode decode");
        let best = decode.best().map(|r| r.class);
        let oracle_tally = closest_coset_2d(&hex, &eta_prime, sigma, 8).expect("single mode");
        let oracle = oracle_tally.decision();
        reports.push(OracleReport {
            instance: alloc::format!("hexagonal N=1 shift {i}"),
            oracle: oracle.map_or(String::from("none"), |c| String::from(c.name())),
            under_test: best.map_or(String::from("none"), |c| String::from(c.name())),
            agree: best == oracle && best.is_some(),
            detail: String::new(),
        });
    }
    reports
}

/// Seeded Erdos-Renyi-style decoding graph with at most `max_edges` edges,
/// weights in [0.1, 2.0], and a random even highlighted set. Weight gaps
/// between distinct matchings are not enforced here; suite generators reseed
/// when they need them.
pub fn random_instance(seed: u64, max_edges: usize, force_highlights: bool) -> DecodingGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = |rng: &mut ChaCha8Rng| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    loop {
        let nv = 4 + (rng.next_u64() % 5) as usize; // 4..8 vertices
        let mut pairs = Vec::new();
        for u in 0..nv {
            for v in u + 1..nv {
                pairs.push((u, v));
            }
        }
        let mut edges = Vec::new();
        for &(u, v) in &pairs {
            if edges.len() >= max_edges {
                break;
            }
            if uniform(&mut rng) < 0.45 {
                let weight = 0.1 + 1.9 * uniform(&mut rng);
                edges.push(Edge {
                    id: edges.len(),
                    u,
                    v,
                    weight,
                    qubit: Some(edges.len()),
                });
            }
        }
        if edges.len() < 3 {
            continue;
        }
        let vertices: Vec<Vertex> = (0..nv)
            .map(|id| Vertex { id, is_virtual: false })
            .collect();
        let mut highlighted = Vec::new();
        if force_highlights {
            for v in 0..nv {
                if uniform(&mut rng) < 0.5 {
                    highlighted.push(v);
                }
            }
            if highlighted.len() % 2 == 1 {
                highlighted.pop();
            }
            if highlighted.is_empty() {
                highlighted = alloc::vec![0, 1];
            }
        }
        let graph = DecodingGraph::new(vertices, edges, &highlighted)
            .expect("random instance construction is valid");
        return graph;
    }
}

/// A random instance whose distinct matching weights are separated by more
/// than `min_gap` (exactly equal weights are allowed); reseeds until found.
pub fn random_instance_with_gaps(
    seed: u64,
    max_edges: usize,
    force_highlights: bool,
    min_gap: f64,
) -> DecodingGraph {
    let mut attempt = 0u64;
    loop {
        let graph = random_instance(
            seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(attempt),
            max_edges,
            force_highlights,
        );
        let all = enumerate_all_matchings(&graph).expect("guarded size");
        let mut ok = true;
        for pair in all.windows(2) {
            let gap = pair[1].weight - pair[0].weight;
            if gap != 0.0 && gap < min_gap {
                ok = false;
                break;
            }
        }
        if ok {
            return graph;
        }
        attempt += 1;
    }
}

/// Statistical helper: `exp(-w)` tally of a list of matching solutions by
/// class, used when cross-checking decode tallies against full enumerations.
pub fn tally_from_matchings(
    graph: &DecodingGraph,
    sector: &SectorCode,
    sols: &[MatchingSolution],
) -> ClassTally {
    let mut tally = ClassTally::new();
    for (i, sol) in sols.iter().enumerate() {
        let err = crate::qubit::matching_to_error(graph, &sol.edges);
        tally.add(sector.class_of(&err.bits), math::exp(-sol.weight), i + 1);
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{CssCode, ErrorSector};
    use crate::graph::build_six_qubit_fixture;

    #[test]
    fn fixture_has_exactly_four_matchings() {
        let (g, _) = build_six_qubit_fixture();
        let all = enumerate_all_matchings(&g).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].edge_ids(), alloc::vec![0, 2, 6]);
        assert_eq!(all[1].edge_ids(), alloc::vec![3, 4, 5]);
        assert_eq!(all[2].edge_ids(), alloc::vec![1]);
        assert_eq!(all[3].edge_ids(), alloc::vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(count_matchings_rank_formula(&g), 4);
    }

    #[test]
    fn fixture_cycles_with_cleared_highlights() {
        let (g, _) = build_six_qubit_fixture();
        let g = g.with_highlights(&Bits::new()).unwrap();
        let all = enumerate_all_matchings(&g).unwrap();
        // the empty set plus three cycles
        assert_eq!(all.len(), 4);
        assert!(all[0].edges.is_empty());
        let sets: Vec<Vec<usize>> = all[1..].iter().map(|s| s.edge_ids()).collect();
        assert!(sets.contains(&alloc::vec![0, 1, 2, 6]));
        assert!(sets.contains(&alloc::vec![1, 3, 4, 5]));
        assert!(sets.contains(&alloc::vec![0, 2, 3, 4, 5, 6]));
        assert_eq!(count_matchings_rank_formula(&g), 4);
    }

    #[test]
    fn single_edge_graph() {
        let g = DecodingGraph::new(
            alloc::vec![
                Vertex { id: 0, is_virtual: false },
                Vertex { id: 1, is_virtual: false },
            ],
            alloc::vec![Edge { id: 0, u: 0, v: 1, weight: 0.7, qubit: Some(0) }],
            &[0, 1],
        )
        .unwrap();
        let all = enumerate_all_matchings(&g).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].edge_ids(), alloc::vec![0]);
    }

    #[test]
    fn size_guard_is_a_hard_error() {
        let layout = crate::code::SurfaceCodeLayout::new(5, ErrorSector::ZErrors).unwrap();
        let g = crate::graph::build_surface_model_graph(
            &layout,
            &crate::graph::ModelGraphConfig::default(),
        )
        .unwrap();
        assert!(matches!(
            enumerate_all_matchings(&g),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn two_qubit_mld_by_hand() {
        // single stabilizer Z1Z2, X errors detected by it are irrelevant
        // here: probe the Z-error sector whose group is {I, Z1Z2}
        let css = CssCode {
            n_qubits: 2,
            x_checks: alloc::vec::Vec::new(),
            z_checks: alloc::vec![Bits::from_indices(&[0, 1])],
            logical_x: Bits::from_indices(&[0, 1]),
            logical_z: Bits::from_indices(&[0]),
        };
        let sector = css.sector(ErrorSector::ZErrors);
        let tally = brute_force_mld_qubit(&sector, &Bits::new(), &[0.1, 0.1]).unwrap();
        let p_i = tally.probability(ClassLabel::I);
        let p_z = tally.probability(ClassLabel::Z);
        assert!((p_i - (1.0 + 1.0 / 81.0)).abs() < 1e-12);
        assert!((p_z - 2.0 / 9.0).abs() < 1e-12);
        assert_eq!(tally.decision(), Some(ClassLabel::I));
    }

    #[test]
    fn eps_zero_limit() {
        let css = CssCode::six_qubit();
        let sector = css.sector(ErrorSector::XErrors);
        let tally = brute_force_mld_qubit(&sector, &Bits::new(), &[1e-300; 6]).unwrap();
        assert!((tally.probability(ClassLabel::I) - 1.0).abs() < 1e-12);
        assert!(tally.probability(ClassLabel::X) < 1e-200);
    }

    #[test]
    fn fixture_oracle_agrees_with_tally_under_consistent_weights() {
        // fixture weights induced by eps with ln((1-e)/e) = w
        let (g, code) = build_six_qubit_fixture();
        let sector = code.css.sector(ErrorSector::XErrors);
        let eps: Vec<f64> = [0.1, 0.5, 0.1, 0.1, 0.1, 0.1]
            .iter()
            .map(|w| 1.0 / (1.0 + math::exp(*w)))
            .collect();
        let candidate = candidate_error(&sector, &[1, 1, 0, 0]).unwrap();
        let oracle = brute_force_mld_qubit(&sector, &candidate, &eps).unwrap();
        assert_eq!(oracle.decision(), Some(ClassLabel::I));
        let all = enumerate_all_matchings(&g).unwrap();
        let sut = tally_from_matchings(&g, &sector, &all);
        assert_eq!(sut.decision(), Some(ClassLabel::I));
        // the graph tally matches the oracle up to the tiny virtual-edge
        // weight on e7
        let ratio_i = sut.probability(ClassLabel::I) / oracle.probability(ClassLabel::I);
        let ratio_x = sut.probability(ClassLabel::X) / oracle.probability(ClassLabel::X);
        assert!((ratio_i - ratio_x).abs() < 1e-6, "{ratio_i} vs {ratio_x}");
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = random_instance(42, 12, true);
        let b = random_instance(42, 12, true);
        assert_eq!(a.n_edges(), b.n_edges());
        for (x, y) in a.edges().iter().zip(b.edges()) {
            assert_eq!(x.weight, y.weight);
        }
        assert!(a.n_edges() <= 12);
        assert_eq!(a.highlighted().count() % 2, 0);
    }
}
