use proptest::prelude::*;
use rand::Rng;
use rustc_hash::FxHashSet;

use dyncc::baselines::{brute_force_opt, cost, pivot_with_priorities, singletons, static_agreement};
use dyncc::bench::fixtures::{agreement_pair, fuzz_events, small_graph};
use dyncc::probes::{
    probabilistic_agreement, symmetric_difference, Convention, EvalRoute, ProbeConfig, ProbeCounters,
};
use dyncc::registry::Registry;
use dyncc::stream::{format_stream, gen_stream, parse_stream, planted_partition, GapDeletion, SourceGraph};
use dyncc::{rng_from_seed, DccConfig, DynamicAgreement, DynamicGraph, NodeId};

/// Plain edge-set model the adjacency store is checked against.
#[derive(Default)]
struct Model {
    nodes: FxHashSet<u64>,
    edges: FxHashSet<(u64, u64)>,
}

impl Model {
    fn key(a: u64, b: u64) -> (u64, u64) {
        (a.min(b), a.max(b))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_store_matches_edge_set_model(seed in any::<u64>(), ops in 1usize..200) {
        let mut rng = rng_from_seed(seed);
        let mut g = DynamicGraph::new();
        let mut m = Model::default();
        let mut next = 0u64;
        for _ in 0..ops {
            if m.nodes.is_empty() || rng.random_bool(0.65) {
                let nbrs: Vec<NodeId> = m.nodes.iter().copied().filter(|_| rng.random_bool(0.3)).map(NodeId).collect();
                g.insert_node(NodeId(next), &nbrs).unwrap();
                for v in &nbrs {
                    m.edges.insert(Model::key(next, v.0));
                }
                m.nodes.insert(next);
                next += 1;
            } else {
                let victim = g.random_node(&mut rng).unwrap();
                g.delete_node(victim).unwrap();
                m.nodes.remove(&victim.0);
                m.edges.retain(|&(a, b)| a != victim.0 && b != victim.0);
            }
            prop_assert!(g.check_invariants().is_ok());
        }
        prop_assert_eq!(g.node_count(), m.nodes.len());
        prop_assert_eq!(g.edge_count(), m.edges.len());
        for &(a, b) in &m.edges {
            prop_assert!(g.has_edge(NodeId(a), NodeId(b)).unwrap());
        }
    }

    #[test]
    fn symmetric_difference_is_symmetric(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let g = small_graph(&mut rng).to_graph();
        for &u in g.nodes() {
            for &v in g.nodes() {
                for conv in [Convention::Open, Convention::Closed] {
                    prop_assert_eq!(
                        symmetric_difference(&g, u, v, conv).unwrap(),
                        symmetric_difference(&g, v, u, conv).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn opt_lower_bounds_every_algorithm(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let g = small_graph(&mut rng).to_graph();
        let (_, opt) = brute_force_opt(&g).unwrap();
        let pivot = dyncc::baselines::pivot(&g, &mut rng);
        for labels in [pivot, singletons(&g), static_agreement(&g, 0.2, Convention::Closed)] {
            prop_assert!(cost(&g, &labels).unwrap().total >= opt.total);
        }
    }

    #[test]
    fn stream_text_round_trips(seed in any::<u64>(), p in 0.0f64..0.6) {
        let src = planted_partition(3, 6, 0.8, 0.1, seed);
        let events = gen_stream(&src, p, seed, GapDeletion::OneCoin).unwrap();
        let back = parse_stream(&format_stream(&events), "roundtrip").unwrap();
        prop_assert_eq!(events, back);
    }

    #[test]
    fn every_algorithm_labels_exactly_the_present_nodes(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let events = fuzz_events(150, 25, &mut rng);
        let reg = Registry::default();
        let mut algs = reg.build_list(&reg.names().join(","), &DccConfig::practical(0.2, seed)).unwrap();
        for (t, e) in events.iter().enumerate() {
            for a in algs.iter_mut() {
                a.observe(e).unwrap();
                if t % 15 == 0 {
                    let labels = a.labels();
                    let present: FxHashSet<NodeId> = a.graph().nodes().iter().copied().collect();
                    let labeled: FxHashSet<NodeId> = labels.iter().map(|(u, _)| u).collect();
                    prop_assert_eq!(present, labeled, "{}", a.name());
                }
            }
        }
    }
}

/// Expected Pivot cost over every priority order is at most 3 OPT.
#[test]
fn pivot_is_three_approximate_on_small_graphs() {
    let mut rng = rng_from_seed(77);
    for _ in 0..30 {
        let src = small_graph(&mut rng);
        let g = src.to_graph();
        if g.node_count() > 7 {
            continue;
        }
        let (_, opt) = brute_force_opt(&g).unwrap();
        let nodes = g.sorted_nodes();
        let mut total = 0u64;
        let mut orders = 0u64;
        permute(&mut nodes.clone(), 0, &mut |order| {
            let prio = order.iter().enumerate().map(|(i, &u)| (u, i as u64)).collect();
            total += cost(&g, &pivot_with_priorities(&g, &prio)).unwrap().total;
            orders += 1;
        });
        let mean = total as f64 / orders as f64;
        assert!(mean <= 3.0 * opt.total as f64 + 1e-9, "mean {mean} opt {}", opt.total);
    }
}

fn permute(v: &mut Vec<NodeId>, k: usize, f: &mut impl FnMut(&[NodeId])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// The enumerated route must reproduce the sampled route's YES rate.
#[test]
fn enumerated_route_matches_sampled_distribution() {
    let trials = 3000;
    for (common, uo, vo) in [(30, 1, 1), (30, 3, 2), (20, 6, 6)] {
        let (g, u, v) = agreement_pair(common, uo, vo);
        let mut rates = Vec::new();
        for route in [EvalRoute::Sampled, EvalRoute::Enumerated] {
            let cfg = ProbeConfig::practical(0.2).with_route(route);
            let mut rng = rng_from_seed(common as u64 * 31 + uo as u64);
            let mut c = ProbeCounters::default();
            let yes = (0..trials)
                .filter(|_| probabilistic_agreement(&g, u, v, &cfg, &mut c, &mut rng).unwrap().is_yes())
                .count();
            rates.push(yes as f64 / trials as f64);
        }
        // 5 sigma of the difference of two proportions
        let p = (rates[0] + rates[1]) / 2.0;
        let sigma = (2.0 * p * (1.0 - p) / trials as f64).sqrt();
        assert!((rates[0] - rates[1]).abs() <= 5.0 * sigma + 1e-9, "{common}/{uo}/{vo}: {rates:?}");
    }
}

/// Neighbor samples are uniform over `N(u)`.
#[test]
fn neighbor_sampling_is_uniform() {
    let src = SourceGraph::from_pairs(9, (1..9).map(|i| (0, i)));
    let g = src.to_graph();
    let mut rng = rng_from_seed(5);
    let draws = 45_000;
    let mut counts = [0usize; 9];
    for _ in 0..draws {
        counts[g.sample_neighbor(NodeId(0), &mut rng).unwrap().0 as usize] += 1;
    }
    let expected = draws as f64 / 8.0;
    let chi2: f64 = counts[1..].iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 7 degrees of freedom; 24.3 is the 0.999 quantile
    assert!(chi2 < 24.3, "chi2 {chi2} counts {counts:?}");
    assert_eq!(counts[0], 0);
}

#[test]
fn dynamic_agreement_keeps_a_clique_together() {
    let mut hits = 0;
    for seed in 0..20 {
        let src = SourceGraph::from_pairs(10, (0..10u32).flat_map(|a| (a + 1..10).map(move |b| (a, b))));
        let events = gen_stream(&src, 0.0, seed, GapDeletion::OneCoin).unwrap();
        let mut da = DynamicAgreement::new(DccConfig::practical(0.2, seed));
        for e in &events {
            da.process_event(e).unwrap();
        }
        da.check_invariants().unwrap();
        if da.labels().cluster_count() == 1 {
            hits += 1;
        }
    }
    assert!(hits >= 18, "K10 kept whole in {hits}/20 runs");
}

#[test]
fn deleted_nodes_leave_no_trace() {
    let mut rng = rng_from_seed(9);
    let events = fuzz_events(3000, 40, &mut rng);
    let mut da = DynamicAgreement::new(DccConfig::practical(0.2, 9));
    let mut gone: FxHashSet<NodeId> = FxHashSet::default();
    for e in &events {
        da.process_event(e).unwrap();
        if e.is_insert() {
            gone.remove(&e.node());
        } else {
            gone.insert(e.node());
        }
    }
    let sol = da.solution();
    for (a, b) in sol.edges() {
        assert!(!gone.contains(&a) && !gone.contains(&b));
    }
    for u in sol.sorted_anchors() {
        assert!(!gone.contains(&u));
    }
    da.check_invariants().unwrap();
}
