//! Property tests for the degree laws, the graph samplers and the matching
//! algorithms.

use ocm::analytics::ConfigModelLaw;
use ocm::degree_dist::{du_delta, DegreeDistribution};
use ocm::graph_gen::{config_model_from_pairing, BipartiteMultigraph, DegreeSequence};
use ocm::harness::trial_rng;
use ocm::matching::{
    brute_force_max, greedy_online, hopcroft_karp, karp_sipser_phase1, ranking, residual_graph,
};
use ocm::num_format::sig17;
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = BipartiteMultigraph> {
    (1usize..=10, 1usize..=10).prop_flat_map(|(n_users, n_ads)| {
        prop::collection::vec(prop::collection::vec(0..n_ads, 0..=3), n_users)
            .prop_map(move |adj| BipartiteMultigraph::from_adjacency(n_ads, adj).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn every_algorithm_returns_a_valid_matching(g in small_graph(), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0, 0);
        prop_assert!(greedy_online(&g, &mut rng).validate(&g).is_ok());
        prop_assert!(ranking(&g, &mut rng).validate(&g).is_ok());
        prop_assert!(karp_sipser_phase1(&g).partial.validate(&g).is_ok());
        prop_assert!(hopcroft_karp(&g).validate(&g).is_ok());
    }

    #[test]
    fn hopcroft_karp_is_maximum(g in small_graph()) {
        prop_assert_eq!(hopcroft_karp(&g).size(), brute_force_max(&g).unwrap());
    }

    #[test]
    fn karp_sipser_extends_to_a_maximum(g in small_graph()) {
        let ks = karp_sipser_phase1(&g);
        let rest = brute_force_max(&residual_graph(&g, &ks.partial)).unwrap();
        prop_assert_eq!(brute_force_max(&g).unwrap(), ks.partial.size() + rest);
    }

    #[test]
    fn size_ordering(g in small_graph(), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 1, 0);
        let max = hopcroft_karp(&g).size();
        let ks = karp_sipser_phase1(&g);
        prop_assert!(greedy_online(&g, &mut rng).size() <= max);
        prop_assert!(ranking(&g, &mut rng).size() <= max);
        prop_assert!(ks.partial.size() <= max);
        prop_assert!(max <= ks.upper_bound());
    }

    #[test]
    fn greedy_is_maximum_with_one_distinct_neighbor(
        n_ads in 1usize..=10,
        picks in prop::collection::vec((0usize..10, 1usize..=3), 1..=10),
        seed in any::<u64>(),
    ) {
        let adj: Vec<Vec<usize>> = picks.iter().map(|&(a, d)| vec![a % n_ads; d]).collect();
        let g = BipartiteMultigraph::from_adjacency(n_ads, adj).unwrap();
        let mut distinct: Vec<usize> = picks.iter().map(|&(a, _)| a % n_ads).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let mut rng = trial_rng(seed, 0, 1);
        let m = greedy_online(&g, &mut rng).size();
        prop_assert_eq!(m, distinct.len());
        prop_assert_eq!(m, hopcroft_karp(&g).size());
    }

    #[test]
    fn pairings_preserve_degrees(
        user_degrees in prop::collection::vec(0usize..4, 1..8),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let total: usize = user_degrees.iter().sum();
        let n_ads = 4;
        let mut rng = trial_rng(seed, 0, 2);
        let mut ad_degrees = vec![0usize; n_ads];
        for _ in 0..total {
            ad_degrees[rng.gen_range(0..n_ads)] += 1;
        }
        let mut pairing: Vec<usize> = (0..total).collect();
        pairing.shuffle(&mut rng);
        let seq = DegreeSequence { user_degrees, ad_degrees };
        let g = config_model_from_pairing(&seq, &pairing).unwrap();
        prop_assert_eq!(g.degree_sequence(), seq);
    }

    #[test]
    fn numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
    }
}

fn check_law(d: &DegreeDistribution) -> Result<(), TestCaseError> {
    let top = d.max_degree().unwrap();
    let mut total = 0.0;
    for k in 0..=top + 1 {
        let p = d.pmf(k);
        prop_assert!(p >= 0.0);
        total += p;
        if k >= 1 {
            prop_assert!((d.tail(k - 1) - d.tail(k) - p).abs() < 1e-12);
        }
    }
    prop_assert!((total - 1.0).abs() < 1e-12);
    prop_assert_eq!(d.tail(top), 0.0);
    Ok(())
}

proptest! {
    #[test]
    fn truncated_laws_are_consistent(delta in 2usize..60) {
        let d = DegreeDistribution::truncated(delta).unwrap();
        check_law(&d)?;
        prop_assert!((d.pmf(0) - 1.0 / delta as f64).abs() < 1e-15);
    }

    #[test]
    fn eps_mass_laws_are_consistent(delta in 2usize..30, frac in 0.0f64..1.0) {
        let eps = frac / delta as f64;
        check_law(&DegreeDistribution::eps_mass(delta, eps).unwrap())?;
    }

    #[test]
    fn du_laws_are_consistent(u in 0.01f64..0.999) {
        let d = DegreeDistribution::generalized_u(u).unwrap();
        check_law(&d)?;
        let delta = du_delta(u);
        prop_assert_eq!(d.max_degree(), Some(delta));
        prop_assert!(u <= 1.0 - 1.0 / delta as f64 + 1e-12);
        prop_assert!(delta == 2 || u > 1.0 - 1.0 / (delta - 1) as f64 - 1e-12);
        prop_assert!((0.0..=1.0).contains(&d.pmf(delta)));
    }

    #[test]
    fn main_law_tail(k in 1usize..1_000_000) {
        let d = DegreeDistribution::main();
        prop_assert!((d.tail(k) - 1.0 / k as f64).abs() < 1e-15);
        prop_assert!((d.tail(k) - d.tail(k + 1) - d.pmf(k + 1)).abs() < 1e-15);
    }

    #[test]
    fn inverse_cdf_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, delta in 2usize..12) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for d in [DegreeDistribution::main(), DegreeDistribution::truncated(delta).unwrap()] {
            prop_assert!(d.degree_from_uniform(lo, 1 << 20) <= d.degree_from_uniform(hi, 1 << 20));
        }
    }

    #[test]
    fn fixed_point_bounds_are_ordered(delta in 2usize..12, frac in 0.01f64..0.9) {
        let eps = frac / delta as f64;
        let law = ConfigModelLaw::new(&DegreeDistribution::eps_mass(delta, eps).unwrap(), 1.0).unwrap();
        let fp = law.solve(1e-12).unwrap();
        let b = law.bounds(&fp);
        prop_assert!(0.0 <= b.lower_fraction && b.lower_fraction <= b.upper_fraction + 1e-12);
        prop_assert!(b.upper_fraction <= 1.0 - 1.0 / delta as f64 + eps + 1e-12);
    }
}
