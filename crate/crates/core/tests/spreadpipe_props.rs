use hypermatch::construct::complete;
use hypermatch::matcher::{has_perfect_matching, SolveBudget};
use hypermatch::randomize::{random_hypergraph, vortex_with_levels};
use hypermatch::spreadpipe::{
    check_contracts, cover_down, find_absorbers_k, sample_spread_pm, spread_estimate, tuple_matching,
    vortex_pipeline, FixedSampler, Mode, PipelineConfig, PipelineSampler, UniformPmSampler,
};
use hypermatch::{Edge, Hypergraph, Matching, RngSeed, VertexId, VertexSubset};
use proptest::prelude::*;
use rand::Rng as _;

fn blocks(k: usize, m: usize) -> Vec<VertexSubset> {
    (0..k).map(|i| VertexSubset::from_iter(k * m, (i * m..(i + 1) * m).map(|v| v as u32))).collect()
}

fn random_partite(k: usize, m: usize, density: f64, seed: u64) -> Hypergraph {
    let mut rng = RngSeed::new(seed, 0).rng();
    let full = complete(k * m, k).unwrap().to_explicit();
    let parts = blocks(k, m);
    full.filter_edges(|e| parts.iter().all(|p| p.count_in(e) == 1) && rng.random_bool(density))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tuple_matching_is_partite_and_disjoint_from_waste(
        m in 3usize..14, density in 0.0f64..1.0, eps in 0.001f64..0.5, seed in any::<u64>()
    ) {
        let h = random_partite(3, m, density, seed);
        let parts = blocks(3, m);
        let (matching, waste) = tuple_matching(&h, &parts, eps, &mut RngSeed::new(seed, 1).rng()).unwrap();
        prop_assert!(matching.is_valid_in(&h));
        for e in matching.edges() {
            prop_assert!(parts.iter().all(|p| p.count_in(e) == 1));
        }
        prop_assert!(waste.is_disjoint(matching.covered()));
        prop_assert!(waste.is_subset(&parts[0]));
    }

    #[test]
    fn cover_down_uses_each_b_vertex_once(n in 12usize..26, a_size in 0usize..4, seed in any::<u64>()) {
        let mut rng = RngSeed::new(seed, 2).rng();
        let h = random_hypergraph(n, 3, 0.7, &mut rng).unwrap();
        let a = VertexSubset::from_iter(n, 0..a_size as u32);
        let b = a.complement();
        if let Ok(m) = cover_down(&h, &a, &b, &mut rng) {
            prop_assert_eq!(m.len(), a_size);
            prop_assert!(m.is_valid_in(&h));
            prop_assert!(m.edges().iter().all(|e| a.count_in(e) == 1));
            prop_assert_eq!(m.covered().intersection_len(&b), 2 * a_size);
        }
    }

    #[test]
    fn absorbers_in_dense_random_hosts_absorb(seed in any::<u64>()) {
        let mut rng = RngSeed::new(seed, 3).rng();
        let h = random_hypergraph(24, 3, 0.8, &mut rng).unwrap();
        for a in find_absorbers_k(&h, &[0, 1, 2], 3, &mut rng).unwrap() {
            prop_assert!(a.check(&h));
            let mut inside = VertexSubset::from_iter(24, a.target.iter().copied());
            a.core.iter().for_each(|e| e.iter().for_each(|&v| _ = inside.insert(v)));
            let (local, _) = h.induced(&inside);
            prop_assert!(has_perfect_matching(&local, SolveBudget::unlimited()).unwrap().is_yes());
        }
    }

    #[test]
    fn pipeline_contracts_hold_whenever_it_returns(n in 100usize..300, s in 0u8..2, seed in any::<u64>()) {
        let h = complete(n, 3).unwrap();
        let config = PipelineConfig::default();
        let mut rng = RngSeed::new(seed, 4).rng();
        let vortex = vortex_with_levels(&h, 4, config.vortex_params(), &mut rng).unwrap();
        let last: Vec<VertexId> = vortex.last().iter().collect();
        let u_star = VertexSubset::from_iter(n, last.iter().take(last.len() / 5).copied());
        if let Ok(run) = vortex_pipeline(&h, &vortex, &u_star, Some(s), &config, &mut rng) {
            let r = check_contracts(&run.matching, &vortex, &u_star, Some(s), config.eps);
            prop_assert!(r.parity_ok && r.protected_untouched && r.uncovered_in_last);
            // at most k-1 leftovers pushed down by k-1 vertices each, plus one parity edge
            prop_assert!(r.intrusion <= 2 * 2 + 3);
            prop_assert!(run.matching.is_valid_in(&h));
        }
    }

    #[test]
    fn sampler_returns_optimal_matchings(n in 12usize..28, seed in any::<u64>()) {
        let mut rng = RngSeed::new(seed, 5).rng();
        let h = random_hypergraph(n, 3, 0.9, &mut rng).unwrap();
        let config = PipelineConfig { retry_cap: 5, ..PipelineConfig::default() };
        if let Ok(run) = sample_spread_pm(&h, Mode::General, &config, &mut rng) {
            prop_assert!(run.matching.is_optimal_in(&h));
        }
    }
}

#[test]
fn frequencies_sum_to_n_for_perfect_samplers() {
    let h = complete(12, 3).unwrap();
    let sampler = PipelineSampler { mode: Mode::General, config: PipelineConfig::default() };
    let report = spread_estimate(&sampler, &h, 300, 4, &mut RngSeed::new(1, 0).rng()).unwrap();
    let total: f64 = report.per_edge_freq.values().sum();
    // each trial contributes n/k edges; frequencies of edges sum to n/k
    assert_eq!(report.failures, 0);
    assert!((total - 4.0).abs() < 1e-9, "{total}");
    assert!(report.per_edge_freq.values().all(|&f| (0.0..=1.0).contains(&f)));

    let h9 = complete(9, 3).unwrap();
    let uniform = UniformPmSampler::new(&h9, 1000, SolveBudget::unlimited()).unwrap();
    assert_eq!(uniform.len(), 280);
    let report = spread_estimate(&uniform, &h9, 20_000, 0, &mut RngSeed::new(2, 0).rng()).unwrap();
    let vertex_total: f64 = report.per_edge_freq.values().map(|f| 3.0 * f).sum();
    assert!((vertex_total - 9.0).abs() < 1e-9);

    let fixed = Matching::from_edges(
        9,
        [vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]].map(|e| Edge::new(e).unwrap()),
    )
    .unwrap();
    let report = spread_estimate(&FixedSampler(fixed), &h9, 5, 0, &mut RngSeed::new(3, 0).rng()).unwrap();
    assert_eq!(report.spread_constant_estimate, 81.0);
}

#[test]
fn same_seed_same_sample() {
    let h = complete(60, 3).unwrap();
    let config = PipelineConfig::default();
    for mode in [Mode::General, Mode::CodegreeNonextremal] {
        let a = sample_spread_pm(&h, mode, &config, &mut RngSeed::new(8, 0).rng()).unwrap();
        let b = sample_spread_pm(&h, mode, &config, &mut RngSeed::new(8, 0).rng()).unwrap();
        assert_eq!(a.matching, b.matching);
        assert_eq!(a.trace, b.trace);
    }
}
