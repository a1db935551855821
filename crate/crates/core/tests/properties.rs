use leftmatch::failprob::{fail_closed_form, fail_total, fail_total_exact, NormalizedBI};
use leftmatch::graph::sample_graph;
use leftmatch::matching::{has_left_perfect_matching, hopcroft_karp};
use leftmatch::montecarlo::wilson_interval;
use leftmatch::oracle::kuhn_left_perfect;
use leftmatch::structure::bi_partition;
use leftmatch::{BipartiteMultigraph, DegreeDistribution, DegreeSpec, SamplingMode};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = BipartiteMultigraph> {
    (1usize..=7).prop_flat_map(|m| {
        prop::collection::vec(prop::collection::vec(0..m, 1..=3), 0..=6)
            .prop_map(move |adj| BipartiteMultigraph::new(m, adj).unwrap())
    })
}

fn normalized_bi() -> impl Strategy<Value = NormalizedBI> {
    (0u32..=4, prop::collection::vec(1u32..=5, 1..=4)).prop_map(|(b, sizes)| {
        let total = (b + sizes.iter().sum::<u32>()) as f64;
        let gammas = sizes.iter().map(|&s| s as f64 / total).collect();
        NormalizedBI::new(b as f64 / total, gammas).unwrap()
    })
}

proptest! {
    #[test]
    fn hopcroft_karp_agrees_with_kuhn(g in graph()) {
        let adj = g.support_adjacency();
        let fast = hopcroft_karp(&adj, g.right_count()).is_left_perfect();
        prop_assert_eq!(fast, kuhn_left_perfect(&adj, g.right_count()));
        let result = has_left_perfect_matching(&g);
        prop_assert_eq!(result.is_matched(), fast);
        prop_assert!(result.is_sound_for(&g));
    }

    #[test]
    fn text_round_trip(g in graph()) {
        prop_assert_eq!(BipartiteMultigraph::from_text(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn partition_covers_right_side(g in graph()) {
        if has_left_perfect_matching(&g).is_matched() {
            let p = bi_partition(&g).unwrap();
            prop_assert_eq!(p.bi.m(), g.right_count());
            let mut all: Vec<usize> = p.blocked.iter().chain(p.classes.iter().flatten()).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..g.right_count()).collect::<Vec<_>>());
        } else {
            prop_assert!(bi_partition(&g).is_err());
        }
    }

    #[test]
    fn float_fail_tracks_exact(g in graph(), dy in 1u32..=4, dz in 1u32..=4) {
        if has_left_perfect_matching(&g).is_matched() {
            let f = fail_total(dy, dz, &g).unwrap();
            let exact = fail_total_exact(dy, dz, &g).unwrap().to_f64().unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - exact).abs() < 1e-12, "{} vs {}", f, exact);
        }
    }

    #[test]
    fn closed_form_is_a_probability(nbi in normalized_bi(), dy in 1u32..=10, dz in 1u32..=10) {
        let f = fail_closed_form(dy, dz, &nbi);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f), "{}", f);
    }

    #[test]
    fn single_class_always_fails(b in 0u32..=5, size in 1u32..=5, dy in 1u32..=10, dz in 1u32..=10) {
        let total = (b + size) as f64;
        let nbi = NormalizedBI::new(b as f64 / total, vec![size as f64 / total]).unwrap();
        prop_assert!((fail_closed_form(dy, dz, &nbi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), n in 1usize..=20, m in 3usize..=30, distinct in any::<bool>()) {
        let spec = DegreeSpec::new(vec![DegreeDistribution::new(&[(2, 0.5), (3, 0.5)]).unwrap(); n]).unwrap();
        let mode = if distinct { SamplingMode::WithoutReplacement } else { SamplingMode::WithReplacement };
        let a = sample_graph(&spec, m, seed, mode).unwrap();
        prop_assert_eq!(&a, &sample_graph(&spec, m, seed, mode).unwrap());
        for x in 0..n {
            let d = a.neighbors(x).len();
            prop_assert!(d == 2 || d == 3);
            if distinct {
                prop_assert_eq!(a.support(x).len(), d);
            }
        }
    }

    #[test]
    fn wilson_contains_the_rate(trials in 1u64..=100_000, frac in 0.0f64..=1.0) {
        let successes = (frac * trials as f64) as u64;
        let (lo, hi) = wilson_interval(successes, trials);
        let rate = successes as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= rate && rate <= hi && hi <= 1.0);
    }
}
