//! Lattice-level invariants of the GKP decoding machinery: rounding and
//! distance bookkeeping, parity membership, coset-sum stability, and the
//! separable/correlated consistency on square shapes.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kmwm::bits::Bits;
use kmwm::code::{CssCode, ErrorSector};
use kmwm::enumerate::enumerate_mwms;
use kmwm::gkp::{
    coset_probability, decode_surface_gkp_correlated, decode_surface_gkp_separable,
    gkp_decoding_graph, matching_to_coset_rep, mode_coset_probability_2d, CosetRepresentative,
    GkpSurfaceCode, Mat2, ModeShape,
};

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let u1 = uniform(rng).max(1e-18);
    let u2 = uniform(rng);
    sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn d3_square() -> GkpSurfaceCode {
    GkpSurfaceCode::square(CssCode::rotated_surface(3).unwrap()).unwrap()
}

#[test]
fn rounding_examples() {
    let g = d3_square();
    let n = g.n_modes();
    // eta' = 0.3 at gamma 1 -> weight 0.7^2 - 0.3^2 = 0.4
    let mut eta = vec![0.0; n];
    eta[0] = 0.3;
    let graph = gkp_decoding_graph(g.model_p.as_ref().unwrap(), &eta, &vec![1.0; n]).unwrap();
    let e0 = graph.qubit_edge(0).unwrap();
    assert!((graph.edges()[e0].weight - 0.4).abs() < 1e-12);
    // a rounding tie costs nothing
    eta[0] = 0.5;
    let graph = gkp_decoding_graph(g.model_p.as_ref().unwrap(), &eta, &vec![1.0; n]).unwrap();
    let e0 = graph.qubit_edge(0).unwrap();
    assert_eq!(graph.edges()[e0].weight, 0.0);
    // eta' = 0.8 at gamma 2: the ansatz rounds eta'' = 0.4 down to 0, and
    // the penalty is 4 (0.36 - 0.16) = 0.8
    eta[0] = 0.8;
    let mut gamma = vec![1.0; n];
    gamma[0] = 2.0;
    let graph = gkp_decoding_graph(g.model_p.as_ref().unwrap(), &eta, &gamma).unwrap();
    let e0 = graph.qubit_edge(0).unwrap();
    assert!((graph.edges()[e0].weight - 0.8).abs() < 1e-12);
    let rep = matching_to_coset_rep(&graph, &Bits::new(), &eta, &gamma);
    assert_eq!(rep.ints[0], 0);
    assert_eq!(rep.scaled[0], 0.0);
}

#[test]
fn distance_bookkeeping_ties_weight_to_rounding_penalty() {
    // |chi_M - eta'|^2 - |chi' - eta'|^2 = w(M) for every enumerated matching
    let code = d3_square();
    let n = code.n_modes();
    let gamma = vec![1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let eta: Vec<f64> = (0..n).map(|_| gaussian(&mut rng, 0.4)).collect();
        let graph = gkp_decoding_graph(code.model_p.as_ref().unwrap(), &eta, &gamma).unwrap();
        let ansatz = matching_to_coset_rep(&graph, &Bits::new(), &eta, &gamma);
        let d0: f64 = (0..n).map(|j| (ansatz.scaled[j] - eta[j]).powi(2)).sum();
        for sol in enumerate_mwms(&graph, 12) {
            let rep = matching_to_coset_rep(&graph, &sol.edges, &eta, &gamma);
            let d: f64 = (0..n).map(|j| (rep.scaled[j] - eta[j]).powi(2)).sum();
            assert!(
                (d - d0 - sol.weight).abs() < 1e-9,
                "{} vs {}",
                d - d0,
                sol.weight
            );
        }
    }
}

#[test]
fn reps_satisfy_all_parity_conditions_exactly() {
    let code = d3_square();
    let n = code.n_modes();
    let gamma = vec![1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let eta: Vec<f64> = (0..n).map(|_| gaussian(&mut rng, 0.5)).collect();
        let graph = gkp_decoding_graph(code.model_p.as_ref().unwrap(), &eta, &gamma).unwrap();
        for sol in enumerate_mwms(&graph, 8) {
            let rep = matching_to_coset_rep(&graph, &sol.edges, &eta, &gamma);
            for check in &code.sector_p.detectors {
                let parity: i64 = check.iter_ones().map(|q| rep.ints[q]).sum();
                assert_eq!(parity & 1, 0, "parity condition violated");
            }
        }
    }
}

#[test]
fn zero_shift_cycle_reps_have_unit_entries() {
    // all-zero candidate: any cycle matching moves exactly its qubits to
    // +/-1 while keeping every check parity even
    let code = d3_square();
    let n = code.n_modes();
    let gamma = vec![1.0; n];
    let eta = vec![0.0; n];
    let graph = gkp_decoding_graph(code.model_p.as_ref().unwrap(), &eta, &gamma).unwrap();
    assert!(graph.highlighted().is_empty());
    for sol in enumerate_mwms(&graph, 5) {
        let rep = matching_to_coset_rep(&graph, &sol.edges, &eta, &gamma);
        for e in sol.edges.iter_ones() {
            if let Some(q) = graph.edges()[e].qubit {
                assert_eq!(rep.ints[q].abs(), 1);
            }
        }
        for (q, &v) in rep.ints.iter().enumerate() {
            let on_cycle = graph
                .qubit_edge(q)
                .is_some_and(|e| sol.edges.get(e));
            assert_eq!(v != 0, on_cycle);
        }
    }
}

#[test]
fn coset_probability_reference_values() {
    // N=1, eta=0, chi=0, sigma=0.6: leading term 1, corrections about
    // 2 exp(-4 pi / (2 sigma^2)) relative
    let rep = CosetRepresentative {
        ints: vec![0],
        scaled: vec![0.0],
        weight: 0.0,
    };
    let p1 = coset_probability(&rep, &[0.0], &[1.0], 0.6, 1);
    let corr = 2.0 * (-4.0 * std::f64::consts::PI / (2.0 * 0.36)).exp();
    assert!((p1 - 1.0 - corr).abs() < 1e-12, "{p1}");
    let p8 = coset_probability(&rep, &[0.0], &[1.0], 0.6, 8);
    assert!((p8 - p1).abs() / p8 < 1e-12);
}

#[test]
fn coset_probability_is_invariant_within_a_coset() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let eta = [gaussian(&mut rng, 0.5), gaussian(&mut rng, 0.5)];
        let gamma = [1.0, 1.3];
        let ints = vec![
            (uniform(&mut rng) * 3.0) as i64 - 1,
            (uniform(&mut rng) * 3.0) as i64 - 1,
        ];
        let scaled: Vec<f64> = ints.iter().zip(gamma).map(|(&v, g)| g * v as f64).collect();
        let rep = CosetRepresentative { ints: ints.clone(), scaled, weight: 0.0 };
        let p = coset_probability(&rep, &eta, &gamma, 0.6, 8);
        // shift one component by 2 (same coset)
        let mut ints2 = ints.clone();
        ints2[0] += 2;
        let scaled2: Vec<f64> = ints2.iter().zip(gamma).map(|(&v, g)| g * v as f64).collect();
        let rep2 = CosetRepresentative { ints: ints2, scaled: scaled2, weight: 0.0 };
        let p2 = coset_probability(&rep2, &eta, &gamma, 0.6, 8);
        assert!((p - p2).abs() / p.max(1e-300) < 1e-9, "{p} vs {p2}");
    }
}

#[test]
fn truncation_stability_1d() {
    // sigma = 0.6: widening the sum from 4 to 8 terms changes nothing at
    // 1e-12 relative (neglected terms are of order 1e-31)
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..1000 {
        let eta = [gaussian(&mut rng, 0.6)];
        let ints = vec![(uniform(&mut rng) * 5.0) as i64 - 2];
        let rep = CosetRepresentative {
            scaled: vec![ints[0] as f64],
            ints,
            weight: 0.0,
        };
        let p4 = coset_probability(&rep, &eta, &[1.0], 0.6, 4);
        let p8 = coset_probability(&rep, &eta, &[1.0], 0.6, 8);
        assert!((p4 - p8).abs() / p8 < 1e-12);
    }
}

#[test]
fn shape_construction_and_rotation_soundness() {
    for shape in [Mat2::square(), Mat2::rectangular(1.4), Mat2::hexagonal()] {
        let mode = ModeShape::new(shape).unwrap();
        assert!(mode.s.symplectic_defect() < 1e-12);
        // rotation preserves norms
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let v = (gaussian(&mut rng, 1.0), gaussian(&mut rng, 1.0));
            let rv = mode.rotation.apply(v);
            let n0 = (v.0 * v.0 + v.1 * v.1).sqrt();
            let n1 = (rv.0 * rv.0 + rv.1 * rv.1).sqrt();
            assert!((n0 - n1).abs() < 1e-12);
        }
        // triangularization is exact in the lower-left entry
        assert_eq!(mode.tri.c, 0.0);
        // rotation^T s = tri
        let recon = mode.rotation.mul(&mode.tri);
        for (a, b) in [
            (recon.a, mode.s.a),
            (recon.b, mode.s.b),
            (recon.c, mode.s.c),
            (recon.d, mode.s.d),
        ] {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let skew = Mat2::new(1.0, 0.5, 0.0, 1.3);
    assert!(ModeShape::new(skew).is_err());
}

#[test]
fn hexagonal_2d_sums_match_direct_evaluation() {
    // per-mode 2D truncation keeps the nearest lattice points; against a
    // wide direct sum the relative error stays tiny at sigma = 0.5
    let shape = ModeShape::new(Mat2::hexagonal()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..50 {
        let eta = (gaussian(&mut rng, 0.5), gaussian(&mut rng, 0.5));
        let v = (0i64, 1i64);
        let p4 = mode_coset_probability_2d(&shape.tri, v, eta, 0.5, 4, 3);
        // direct: all points within the box
        let chi = shape.tri.apply((v.0 as f64, v.1 as f64));
        let t = (eta.0 - chi.0, eta.1 - chi.1);
        let mut full = 0.0;
        for wq in -6i64..=6 {
            for wp in -6i64..=6 {
                let u = shape.tri.apply((2.0 * wq as f64, 2.0 * wp as f64));
                let d2 = (t.0 - u.0).powi(2) + (t.1 - u.1).powi(2);
                full += (-std::f64::consts::PI * d2 / (2.0 * 0.25)).exp();
            }
        }
        assert!((p4 - full).abs() / full < 1e-6, "{p4} vs {full}");
    }
}

#[test]
fn separable_and_correlated_agree_on_square_shapes() {
    // 100 random syndromes at d=3, sigma=0.5: identical class decisions
    let code = d3_square();
    let n = code.n_modes();
    let sigma = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for trial in 0..100 {
        let eta: Vec<f64> = (0..2 * n).map(|_| gaussian(&mut rng, sigma)).collect();
        let k = 8;
        let sep = decode_surface_gkp_separable(&code, &eta, sigma, 4, k).unwrap();
        let cor = decode_surface_gkp_correlated(&code, &eta, sigma, 4, k * k).unwrap();
        let d_sep = sep.decision(k, false).unwrap();
        let d_cor = cor.decision(k * k, false).unwrap();
        assert_eq!(d_sep, d_cor, "trial {trial}");
    }
}

#[test]
fn correlated_first_emission_is_the_best_initial_node() {
    // the first emitted node must be the maximum-probability member of the
    // initial nodes (i, j=1); verified by recomputing all initial nodes
    let trivial = CssCode {
        n_qubits: 1,
        x_checks: vec![],
        z_checks: vec![],
        logical_x: Bits::from_indices(&[0]),
        logical_z: Bits::from_indices(&[0]),
    };
    let code = GkpSurfaceCode::hexagonal(trivial).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..50 {
        let eta = vec![gaussian(&mut rng, 0.5), gaussian(&mut rng, 0.5)];
        let decode = decode_surface_gkp_correlated(&code, &eta, 0.5, 4, 4).unwrap();
        let first = decode.emitted.first().unwrap();
        for other in decode.emitted.iter().chain(decode.leftovers.iter()) {
            if other.q_rank == 1 {
                assert!(first.probability >= other.probability);
            }
        }
        // identity shift decodes to the identity
    }
    let decode = decode_surface_gkp_correlated(&code, &[0.0, 0.0], 0.5, 4, 4).unwrap();
    assert_eq!(decode.best().unwrap().class, kmwm::ClassLabel::I);
    assert_eq!(decode.best().unwrap().ints, vec![0, 0]);
}

#[test]
fn separable_identity_shift_decodes_to_identity() {
    let code = d3_square();
    let eta = vec![0.0; 2 * code.n_modes()];
    let sep = decode_surface_gkp_separable(&code, &eta, 0.5, 4, 4).unwrap();
    assert_eq!(sep.decision(4, false).unwrap(), kmwm::ClassLabel::I);
    // and the identity class carries the maximal coset probability
    let tally = sep.tally(4, false);
    let p_i = tally.probability(kmwm::ClassLabel::I);
    for (c, p) in tally.classes() {
        if c != kmwm::ClassLabel::I {
            assert!(p_i > p);
        }
    }
}

#[test]
fn qubit_and_gkp_decisions_match_at_d3() {
    // discrete sqrt(pi) shifts with sigma from the eps mapping: per-syndrome
    // decisions equal the qubit decoder's at matched K
    let eps = 0.1;
    let css = CssCode::rotated_surface(3).unwrap();
    let sector = css.sector(ErrorSector::ZErrors);
    let code = GkpSurfaceCode::square(css.clone()).unwrap();
    let params = kmwm::qubit::pauli_to_gkp_params(0.0, 0.0, eps).unwrap();
    let n = code.n_modes();
    let model = kmwm::graph::build_sector_model_graph(
        &sector,
        &kmwm::graph::ModelGraphConfig::default(),
    )
    .unwrap();
    let weighted = model.assign_edge_weights(&vec![eps; n]).unwrap();
    for s in 0u8..16 {
        let syndrome: Vec<u8> = (0..4).map(|b| s >> b & 1).collect();
        let qubit_graph = weighted.highlight_from_syndrome(&syndrome).unwrap();
        let total = kmwm::oracle::count_matchings_rank_formula(&qubit_graph);
        let (tally, _) = kmwm::qubit::decode_graphlike(&qubit_graph, &sector, total, false);
        let qubit_decision = tally.decision().unwrap();
        // the same syndrome as a discrete p-shift; the candidate is gauged
        // to the identity class so that the relative classes the GKP tally
        // uses line up with the qubit decoder's absolute ones
        let mut eta0 = kmwm::oracle::candidate_error(&sector, &syndrome).unwrap();
        if sector.opposing_logical.dot_parity(&eta0) {
            eta0.xor_assign(&sector.same_logical);
        }
        let mut eta_prime = vec![0.0; 2 * n];
        for q in eta0.iter_ones() {
            eta_prime[n + q] = 1.0;
        }
        let sep = decode_surface_gkp_separable(&code, &eta_prime, params.sigma, 4, total).unwrap();
        let gkp_decision = sep.p.decision(total, false).unwrap();
        assert_eq!(qubit_decision, gkp_decision, "syndrome {syndrome:?}");
    }
}
