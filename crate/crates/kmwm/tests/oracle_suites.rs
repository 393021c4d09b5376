//! Randomized oracle suites: the enumeration, cycle and decoder outputs are
//! gated against brute-force references on seeded desk-scale instances.

use kmwm::enumerate::{enumerate_mwms, MwmEnumerator};
use kmwm::matching::shortest_path;
use kmwm::oracle::{
    count_matchings_rank_formula, enumerate_all_matchings, random_instance,
    random_instance_with_gaps, run_matching_suite, run_mld_gkp_suite, run_mld_qubit_suite,
    run_mwc_suite,
};

#[test]
fn matching_suite_50_instances() {
    let reports = run_matching_suite(50, 0xA11CE);
    for r in &reports {
        assert!(r.agree, "{}: {} ({} vs {})", r.instance, r.detail, r.oracle, r.under_test);
    }
}

#[test]
fn mwc_suite_50_instances() {
    let reports = run_mwc_suite(50, 0xB0B);
    for r in &reports {
        assert!(r.agree, "{}: {} ({} vs {})", r.instance, r.detail, r.oracle, r.under_test);
    }
}

#[test]
fn mld_qubit_suite_all_16_syndromes() {
    let reports = run_mld_qubit_suite();
    assert_eq!(reports.len(), 16);
    for r in &reports {
        assert!(r.agree, "{}: {} vs {}", r.instance, r.oracle, r.under_test);
    }
}

#[test]
fn mld_gkp_suite_smoke() {
    // the full 100+100 comparison runs in the acceptance suite
    let reports = run_mld_gkp_suite(20, 0x6A7);
    for r in &reports {
        assert!(r.agree, "{}: {} vs {}", r.instance, r.oracle, r.under_test);
    }
}

#[test]
fn rank_formula_matches_subset_scan() {
    for seed in 0..30 {
        let g = random_instance(1000 + seed, 12, seed % 2 == 0);
        let all = enumerate_all_matchings(&g).unwrap();
        assert_eq!(
            all.len(),
            count_matchings_rank_formula(&g),
            "seed {seed}"
        );
    }
}

#[test]
fn enumeration_is_deterministic() {
    for seed in 0..10 {
        let g = random_instance_with_gaps(7_000 + seed, 12, true, 1e-9);
        let a = enumerate_mwms(&g, 20);
        let b = enumerate_mwms(&g, 20);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.edges, y.edges);
            assert_eq!(x.weight, y.weight);
        }
    }
}

#[test]
fn tree_weights_never_decrease_along_expansion() {
    for seed in 0..10 {
        let g = random_instance_with_gaps(9_000 + seed, 12, true, 1e-9);
        let mut en = MwmEnumerator::new(&g);
        let mut last = f64::NEG_INFINITY;
        while let Some(node) = en.next_node() {
            assert!(node.weight >= last - 1e-12);
            last = node.weight;
        }
    }
}

/// Exhaustive simple-path enumeration by DFS, the oracle for Dijkstra.
fn all_simple_paths(
    g: &kmwm::DecodingGraph,
    s: usize,
    t: usize,
) -> Vec<(Vec<usize>, f64)> {
    fn dfs(
        g: &kmwm::DecodingGraph,
        v: usize,
        t: usize,
        used_v: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if v == t {
            let w = path.iter().map(|&e| g.edges()[e].weight).sum();
            out.push((path.clone(), w));
            return;
        }
        for &(e, u) in g.adjacency(v) {
            if !used_v[u] {
                used_v[u] = true;
                path.push(e);
                dfs(g, u, t, used_v, path, out);
                path.pop();
                used_v[u] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; g.n_vertices()];
    used[s] = true;
    dfs(g, s, t, &mut used, &mut Vec::new(), &mut out);
    out
}

#[test]
fn dijkstra_matches_exhaustive_path_search() {
    for seed in 0..20 {
        let g = random_instance(5_000 + seed, 12, false);
        let n = g.n_vertices();
        for s in 0..n.min(3) {
            for t in (s + 1)..n {
                let paths = all_simple_paths(&g, s, t);
                let best = paths
                    .iter()
                    .map(|(_, w)| *w)
                    .fold(f64::INFINITY, f64::min);
                match shortest_path(&g, s, t).unwrap() {
                    Some(p) => {
                        assert!(
                            (p.weight - best).abs() < 1e-12,
                            "seed {seed} {s}->{t}: {} vs {}",
                            p.weight,
                            best
                        );
                        // consecutive edges share a vertex and no vertex repeats
                        let mut seen = vec![false; n];
                        let mut at = s;
                        seen[at] = true;
                        for &e in &p.edges {
                            let edge = &g.edges()[e];
                            let next = if edge.u == at { edge.v } else { edge.u };
                            assert!(edge.u == at || edge.v == at);
                            assert!(!seen[next]);
                            seen[next] = true;
                            at = next;
                        }
                        assert_eq!(at, t);
                    }
                    None => assert!(paths.is_empty()),
                }
            }
        }
    }
}

#[test]
fn matching_error_correspondence_is_bijective_at_desk_scale() {
    // physical errors consistent with a syndrome correspond one-to-one to
    // matchings; check both directions by full enumeration on the fixture
    let (g, code) = kmwm::graph::build_six_qubit_fixture();
    let sector = code.css.sector(kmwm::ErrorSector::XErrors);
    let all = enumerate_all_matchings(&g).unwrap();
    let mut errors = std::collections::BTreeSet::new();
    for sol in &all {
        let err = kmwm::qubit::matching_to_error(&g, &sol.edges);
        // same syndrome on both sides
        assert_eq!(sector.syndrome_of(&err.bits), vec![1, 1, 0, 0]);
        let back = kmwm::qubit::error_to_matching(&g, &err);
        // the qubit-edge part survives the round trip
        for e in sol.edges.iter_ones() {
            if g.edges()[e].qubit.is_some() {
                assert!(back.get(e));
            }
        }
        assert!(errors.insert(err.bits.to_indices()), "duplicate physical error");
    }
    // 6 qubits, 4 independent checks: 2^(6-4) = 4 consistent errors
    assert_eq!(errors.len(), 4);
}
