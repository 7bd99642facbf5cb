use kikuchi_core::concavity::{
    check_bethe_concavity, check_kikuchi_concavity, hall_labeling, kikuchi_hall_instance,
    symmetric_pseudomarginal, SymmetricPoint,
};
use kikuchi_core::models::Graph;
use kikuchi_core::objective::validate_local_polytope;
use kikuchi_core::polytope::{
    enumerate_f, in_concavity_polytope, is_single_cycle_forest_graph, lp_upper_bound,
    max_weight_single_cycle_forest, sample_conv_f,
};
use kikuchi_core::{Error, FactorTable, RegionGraph};
use proptest::prelude::*;

/// A simple graph on `n` vertices from a bitmask over all vertex pairs.
fn graph_strategy(max_n: usize, max_edges: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n).prop_flat_map(move |n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|s| (s + 1..n).map(move |t| (s, t)))
            .collect();
        proptest::sample::subsequence(pairs.clone(), 1..=pairs.len().min(max_edges))
            .prop_map(move |edges| Graph::new(n, edges).unwrap())
    })
}

fn pairwise(g: &Graph) -> RegionGraph {
    RegionGraph::pairwise(g.num_vertices(), 2, g.edges()).unwrap()
}

/// Hasse diagram by brute force: contained pairs with nothing in between.
fn brute_hasse(regions: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let sub = |a: &Vec<usize>, b: &Vec<usize>| a.len() < b.len() && a.iter().all(|v| b.contains(v));
    let mut out = Vec::new();
    for (p, big) in regions.iter().enumerate() {
        for (c, small) in regions.iter().enumerate() {
            if sub(small, big) && !regions.iter().any(|mid| sub(small, mid) && sub(mid, big)) {
                out.push((p, c));
            }
        }
    }
    out.sort_unstable();
    out
}

fn region_family() -> impl Strategy<Value = Vec<Vec<usize>>> {
    proptest::collection::btree_set(proptest::collection::btree_set(0usize..6, 1..=4), 1..10)
        .prop_map(|sets| sets.into_iter().map(|s| s.into_iter().collect()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hasse_diagram_is_the_transitive_reduction(regions in region_family()) {
        let g = RegionGraph::new(6, 2, regions.clone()).unwrap();
        let mut edges = g.hasse_edges().to_vec();
        edges.sort_unstable();
        prop_assert_eq!(edges, brute_hasse(&regions));
    }

    #[test]
    fn integral_points_of_c_are_the_forest_family(g in graph_strategy(6, 9)) {
        let rg = pairwise(&g);
        let view = rg.two_layer_view().unwrap();
        let family = enumerate_f(&view).unwrap();
        let m = view.num_factors();
        for mask in 0u32..1 << m {
            let x: Vec<bool> = (0..m).map(|j| mask >> (m - 1 - j) & 1 == 1).collect();
            let edges: Vec<(usize, usize)> = g.edges().iter().zip(&x).filter(|(_, on)| **on).map(|(e, _)| *e).collect();
            let point: Vec<f64> = x.iter().map(|&b| b as u8 as f64).collect();
            let member = in_concavity_polytope(&view, &point).unwrap().member;
            prop_assert_eq!(member, family.binary_search(&x).is_ok());
            prop_assert_eq!(member, is_single_cycle_forest_graph(g.num_vertices(), &edges));
        }
    }

    #[test]
    fn greedy_forest_meets_the_bound(g in graph_strategy(7, 12), seed in 0u64..1000) {
        let w: Vec<f64> = (0..g.num_edges()).map(|e| ((seed + 7 * e as u64) % 5 + 1) as f64).collect();
        let (chosen, value) = max_weight_single_cycle_forest(&g, &w).unwrap();
        let edges: Vec<(usize, usize)> = g.edges().iter().zip(&chosen).filter(|(_, on)| **on).map(|(e, _)| *e).collect();
        prop_assert!(is_single_cycle_forest_graph(g.num_vertices(), &edges));
        prop_assert_eq!(value, lp_upper_bound(&g, &w).unwrap());
    }

    #[test]
    fn hull_samples_lie_in_c(g in graph_strategy(6, 10), seed in 0u64..1000) {
        let rg = pairwise(&g);
        let view = rg.two_layer_view().unwrap();
        for p in sample_conv_f(&view, 5, seed) {
            prop_assert!(in_concavity_polytope(&view, &p).unwrap().member);
        }
    }

    #[test]
    fn two_layer_checks_agree(g in graph_strategy(6, 10), rho in 0.0f64..1.0) {
        let rg = pairwise(&g);
        let view = rg.two_layer_view().unwrap();
        let weights = view.weights_from_factors(&vec![rho; view.num_factors()]);
        let bethe = check_bethe_concavity(&view, &weights).unwrap();
        let general = check_kikuchi_concavity(&rg, &weights).unwrap();
        prop_assert_eq!(bethe.satisfied, general.satisfied);
        let polytope = in_concavity_polytope(&view, &vec![rho; view.num_factors()]).unwrap();
        prop_assert_eq!(bethe.satisfied, polytope.member);
    }

    #[test]
    fn hall_labeling_exists_when_the_kikuchi_condition_holds(g in graph_strategy(6, 10), rho in 0.05f64..1.0) {
        let rg = pairwise(&g);
        let view = rg.two_layer_view().unwrap();
        let weights = view.weights_from_factors(&vec![rho; view.num_factors()]);
        let satisfied = check_kikuchi_concavity(&rg, &weights).unwrap().satisfied;
        let inst = kikuchi_hall_instance(&rg, &weights).unwrap();
        if inst.left.is_empty() || inst.right.is_empty() {
            return Ok(());
        }
        match hall_labeling(&inst) {
            Ok(lab) => {
                prop_assert!(satisfied);
                for (s, w) in lab.left_sums(&inst).iter().zip(&inst.left_weights) {
                    prop_assert!((s - w).abs() <= 1e-8);
                }
            }
            Err(Error::HallConditionViolated(_)) => prop_assert!(!satisfied),
            Err(e) => prop_assert!(false, "{e:?}"),
        }
    }

    #[test]
    fn symmetric_family_is_locally_consistent(t in -0.99f64..0.99, q2 in 0.0f64..0.99) {
        // triplet tables stay nonnegative while |q1| <= (1 + 3 q2) / 4
        let q1 = t * (1.0 + 3.0 * q2) / 4.0;
        let mut regions: Vec<Vec<usize>> = (0..5).map(|v| vec![v]).collect();
        regions.extend([vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4]]);
        let g = RegionGraph::new(5, 2, regions).unwrap();
        let tau = symmetric_pseudomarginal(&g, SymmetricPoint::new(q1, q2)).unwrap();
        prop_assert!(validate_local_polytope(&g, &tau, 1e-12).unwrap().passed);
    }

    #[test]
    fn marginalization_preserves_mass(values in proptest::collection::vec(0.0f64..1.0, 12)) {
        let t = FactorTable::new(vec![1, 4, 7], vec![2, 3, 2], values.clone()).unwrap();
        let m = t.marginalize(&[1, 7]).unwrap();
        prop_assert!((m.sum() - values.iter().sum::<f64>()).abs() < 1e-12);
        // direct nested-loop sum over the dropped variable
        for a in 0..2 {
            for c in 0..2 {
                let direct: f64 = (0..3).map(|b| t.get(&[a, b, c])).sum();
                prop_assert!((m.get(&[a, c]) - direct).abs() < 1e-12);
            }
        }
    }
}
