use std::collections::{BTreeMap, BTreeSet};

use cohort_sna::io;
use cohort_sna::prelude::*;
use cohort_sna::stats::Shape;
use cohort_sna::synthetic::random_cohort;
use proptest::prelude::*;

fn arb_network(max_nodes: u32) -> impl Strategy<Value = FriendshipNetwork> {
    (1..=max_nodes).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> = (1..=n)
            .flat_map(|a| (1..=n).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        let len = pairs.len();
        (
            Just(n),
            Just(pairs),
            proptest::collection::vec(any::<bool>(), len),
            proptest::collection::vec(prop_oneof![Just(Gender::Male), Just(Gender::Female), Just(Gender::Unspecified)], n as usize),
            proptest::collection::vec(prop_oneof![Just(None), (0u32..=1000).prop_map(|m| Some(m as f64 / 10.0))], n as usize),
        )
            .prop_map(|(n, pairs, keep, genders, marks)| {
                let roster = (1..=n)
                    .map(|i| {
                        let mut s = Student::new(i, genders[i as usize - 1]);
                        if let Some(m) = marks[i as usize - 1] {
                            s = s.with_mark("S5", m);
                        }
                        s
                    })
                    .collect();
                let edges = pairs
                    .into_iter()
                    .zip(keep)
                    .filter(|(_, k)| *k)
                    .map(|((a, b), _)| (StudentId(a), StudentId(b)));
                build_network(roster, edges, "P").unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn intersection_within_union(net in arb_network(8)) {
        let union = symmetrize(&net, SymmetrizeRule::Union);
        let inter = symmetrize(&net, SymmetrizeRule::Intersection);
        prop_assert!(inter.edges().all(|(a, b)| union.has_edge(a, b)));
        prop_assert_eq!(union.nodes(), inter.nodes());
        if net.edge_count() > 0 {
            let r = reciprocity_rate(&net).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert_eq!(r == 1.0, union.edge_count() == inter.edge_count());
        }
    }

    #[test]
    fn components_partition_nodes(net in arb_network(9)) {
        let comps = weak_components(&net);
        let all: Vec<StudentId> = comps.iter().flatten().copied().collect();
        let set: BTreeSet<_> = all.iter().copied().collect();
        prop_assert_eq!(all.len(), set.len());
        prop_assert_eq!(set.into_iter().collect::<Vec<_>>(), net.node_ids());
        for w in comps.windows(2) {
            prop_assert!(w[0].len() > w[1].len() || (w[0].len() == w[1].len() && w[0][0] < w[1][0]));
        }
    }

    #[test]
    fn cohort_and_csv_round_trips(net in arb_network(8)) {
        let json = io::write_cohort(&net);
        prop_assert_eq!(&io::read_cohort(json.as_bytes()).unwrap(), &net);

        let roster = io::parse_roster(io::write_roster(net.students()).as_bytes()).unwrap();
        let edges = io::parse_edges(io::write_edges(&net).as_bytes()).unwrap();
        prop_assert_eq!(&build_network(roster.clone(), edges, "P").unwrap(), &net);
        let adj = io::parse_adjacency(io::write_adjacency(&net).as_bytes()).unwrap();
        prop_assert_eq!(&build_network(roster, adj, "P").unwrap(), &net);
    }

    #[test]
    fn singleton_partition_has_non_positive_q(net in arb_network(8)) {
        let view = symmetrize(&net, SymmetrizeRule::Union);
        prop_assume!(view.edge_count() > 0);
        let singletons = Partition::from_clusters(view.nodes().iter().map(|&n| vec![n]));
        prop_assert!(modularity(&view, &singletons).unwrap() <= 0.0);
        let whole = Partition::from_clusters([view.nodes().to_vec()]);
        prop_assert!(modularity(&view, &whole).unwrap().abs() < 1e-12);
    }

    #[test]
    fn girvan_newman_nested_and_deterministic(net in arb_network(8)) {
        let view = symmetrize(&net, SymmetrizeRule::Union);
        let trace = girvan_newman(&view);
        prop_assert_eq!(&trace, &girvan_newman(&view));
        prop_assert_eq!(trace.steps.len(), view.edge_count());
        let snaps: Vec<&Partition> = trace.snapshots().collect();
        for w in snaps.windows(2) {
            prop_assert!(w[1].k() > w[0].k());
            prop_assert!(w[1].refines(w[0]));
        }
        let mut last = trace.initial.k();
        for s in &trace.steps {
            prop_assert!(s.components >= last);
            last = s.components;
        }
        for p in snaps {
            prop_assert!((-1.0..=1.0).contains(&p.q));
        }
    }

    #[test]
    fn betweenness_non_negative_and_ranking_deterministic(net in arb_network(8), k in 1usize..4) {
        for mode in [Mode::Directed, Mode::Undirected] {
            let b = betweenness(&net, mode);
            prop_assert_eq!(b.scores.len(), net.node_count());
            prop_assert!(b.scores.values().all(|&v| v >= 0.0));
        }
        prop_assume!(k <= net.node_count());
        prop_assert_eq!(rank_representatives(&net, k).unwrap(), rank_representatives(&net, k).unwrap());
    }

    #[test]
    fn summarize_invariants(
        marks in proptest::collection::vec((0u32..=1000).prop_map(|m| m as f64 / 10.0), 1..60),
        width in 1u32..30,
        seed in any::<u64>(),
    ) {
        let width = width as f64;
        let s = summarize(&marks, width).unwrap();
        prop_assert_eq!(s.histogram.iter().map(|b| b.count).sum::<usize>(), marks.len());

        let mut shuffled = marks.clone();
        // cheap deterministic permutation
        let len = shuffled.len();
        shuffled.rotate_left((seed as usize) % len);
        shuffled.reverse();
        let t = summarize(&shuffled, width).unwrap();
        prop_assert_eq!(s.histogram, t.histogram);
        prop_assert!((s.mean - t.mean).abs() < 1e-9);
        prop_assert_eq!(s.median, t.median);
        prop_assert_eq!(s.shape, t.shape);
    }

    #[test]
    fn skewness_flips_under_reflection(
        marks in proptest::collection::vec((0u32..=1000).prop_map(|m| m as f64 / 10.0), 3..40),
    ) {
        let lo = marks.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = marks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi - lo > 1.0);
        let g = skewness(&marks).unwrap();
        let reflected: Vec<f64> = marks.iter().map(|x| hi + lo - x).collect();
        let h = skewness(&reflected).unwrap();
        prop_assert!((g + h).abs() < 1e-9 * g.abs().max(1.0));
    }

    #[test]
    fn cluster_classes_ignore_listing_order(seed in any::<u64>(), n in 6usize..30, k in 2usize..6) {
        let cohort = random_cohort(seed, n, k.min(n));
        let perf = cluster_performance(&cohort.partition, &cohort.marks, Thresholds::default()).unwrap();
        // relist clusters in reverse id order
        let k = cohort.partition.k();
        let relisted: BTreeMap<StudentId, usize> = cohort
            .partition
            .assignment()
            .iter()
            .map(|(&id, &c)| (id, k - 1 - c))
            .collect();
        let relisted = Partition::from_assignment(relisted).unwrap();
        let again = cluster_performance(&relisted, &cohort.marks, Thresholds::default()).unwrap();
        for c in &perf {
            let twin = &again[k - 1 - c.cluster];
            prop_assert_eq!(&twin.members, &c.members);
            prop_assert_eq!(twin.class, c.class);
        }
    }

    #[test]
    fn greedy_balance_bounded_by_largest_unit(seed in any::<u64>(), n in 10usize..80, k in 3usize..10, keep in any::<bool>()) {
        let cohort = random_cohort(seed, n, k.min(n));
        let policy = InterventionPolicy { keep_low_subgroups: keep, ..Default::default() };
        let plan = plan_intervention(&cohort.network, &cohort.partition, &cohort.marks, &policy).unwrap();
        let high: Vec<_> = plan.groups.iter().filter(|g| g.anchor_class == PerformanceClass::High).collect();
        let recipients: Vec<usize> = high.iter().filter(|g| g.members.iter().any(|m| m.role == Role::Dispersed)).map(|g| g.len()).collect();
        prop_assume!(!recipients.is_empty());
        let inter = symmetrize(&cohort.network, SymmetrizeRule::Intersection);
        let perf = cluster_performance(&cohort.partition, &cohort.marks, Thresholds::default()).unwrap();
        let largest_unit = perf
            .iter()
            .filter(|c| c.class == PerformanceClass::Low)
            .map(|c| {
                if keep {
                    let members: BTreeSet<_> = c.members.iter().copied().collect();
                    inter.restricted_to(&members).components().iter().map(Vec::len).max().unwrap()
                } else {
                    1
                }
            })
            .max()
            .unwrap();
        let spread = recipients.iter().max().unwrap() - recipients.iter().min().unwrap();
        prop_assert!(spread <= largest_unit, "spread {} > largest unit {}", spread, largest_unit);
    }
}

#[test]
fn symmetric_adjacency_is_fully_reciprocal() {
    let text = "id,1,2,3\n1,0,1,1\n2,1,0,0\n3,1,0,0\n";
    let edges = io::parse_adjacency(text.as_bytes()).unwrap();
    let roster = (1..=3).map(|i| Student::new(i, Gender::Female)).collect();
    let net = build_network(roster, edges, "A").unwrap();
    assert_eq!(reciprocity_rate(&net).unwrap(), 1.0);
}

#[test]
fn demo_skew_classification_is_consistent() {
    let demo = cohort_sna::synthetic::demo_cohort();
    let marks: Vec<f64> = demo.network.marks("S5").into_values().collect();
    let s = summarize(&marks, 5.0).unwrap();
    let g = s.skewness.unwrap();
    assert_eq!(s.shape, Some(Shape::from_skewness(g)));
}
