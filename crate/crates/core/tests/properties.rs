use std::sync::Arc;

use greedy_hausdorff::hausdorff::directed_hausdorff_observed;
use greedy_hausdorff::invariants::{
    proven_packing, radius_violations, traversal_violations, EdgeChecker,
};
use greedy_hausdorff::oracle::{exact_directed, exact_hausdorff, exact_partial_all};
use greedy_hausdorff::{
    build, directed_hausdorff, greedy_permutation, hausdorff, k_hausdorff_all, verify_greedy,
    DistanceCounter, Error, GreedyTree, MetricKind, PointSet,
};
use proptest::prelude::*;

/// Up to `max` distinct points in `[0, 1]^dim` on a 1/1024 grid, so exact
/// ties between distances are common.
fn points(dim: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::btree_set(prop::collection::vec(0u16..1024, dim), 1..=max).prop_map(|s| {
        s.into_iter()
            .map(|p| p.into_iter().map(|c| c as f64 / 1024.0).collect())
            .collect()
    })
}

fn metric() -> impl Strategy<Value = MetricKind> {
    prop_oneof![
        Just(MetricKind::L2),
        Just(MetricKind::L1),
        Just(MetricKind::LInf)
    ]
}

/// Trees for two random sets sharing a dimension, metric and α, including
/// exact-greedy trees and α < 2, where radii need raising to stay monotone.
fn pair(max: usize) -> impl Strategy<Value = (GreedyTree, GreedyTree)> {
    let alpha = prop::sample::select(vec![1.0, 1.25, 2.0, 3.0]);
    (1usize..=3)
        .prop_flat_map(move |d| (points(d, max), points(d, max), metric(), alpha.clone()))
        .prop_map(|(a, b, m, alpha)| (tree(a, m, alpha), tree(b, m, alpha)))
}

fn tree(points: Vec<Vec<f64>>, metric: MetricKind, alpha: f64) -> GreedyTree {
    build(Arc::new(PointSet::new(points, metric, "p").unwrap()), alpha).unwrap()
}

fn exact(a: &GreedyTree, b: &GreedyTree) -> f64 {
    exact_directed(a.set(), b.set(), &mut DistanceCounter::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutations_verify(pts in points(2, 60), alpha in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
        let n = pts.len();
        let set = Arc::new(PointSet::new(pts, MetricKind::L2, "p").unwrap());
        for root in [0, n - 1] {
            let mut c = DistanceCounter::default();
            let perm = greedy_permutation(set.clone(), alpha, Some(root), &mut c).unwrap();
            prop_assert_eq!(perm.order()[0], root);
            prop_assert_eq!(verify_greedy(&perm), Ok(()));
            // The selected insertion distance never grows.
            prop_assert!(perm.insertion_dist().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn trees_cover_and_pack(pts in points(2, 80), metric in metric(), alpha in prop::sample::select(vec![1.0, 1.25, 1.5, 2.0, 4.0])) {
        let t = tree(pts, metric, alpha);
        prop_assert_eq!(t.nodes().len(), 2 * t.len() - 1);
        prop_assert_eq!(radius_violations(&t), vec![]);
        let packing = (alpha > 1.0).then(|| proven_packing(alpha));
        prop_assert_eq!(traversal_violations(&t, packing), vec![]);
    }

    #[test]
    fn serialization_round_trips(pts in points(3, 40), metric in metric()) {
        let t = tree(pts, metric, 2.0);
        prop_assert_eq!(GreedyTree::deserialize(&t.serialize()).unwrap(), t);
    }

    #[test]
    fn directed_sandwich((ta, tb) in pair(50), eps in prop::sample::select(vec![0.05, 0.2, 1.0, 4.0])) {
        let exact = exact(&ta, &tb);
        let r = directed_hausdorff(&ta, &tb, eps).unwrap();
        prop_assert!(r.value <= exact && exact <= (1.0 + eps) * r.value, "{} vs {:?}", exact, r);
        if r.exhausted {
            prop_assert_eq!(r.value, exact);
        }
    }

    #[test]
    fn symmetric_sandwich((ta, tb) in pair(40), eps in prop::sample::select(vec![0.05, 0.5])) {
        let exact = exact_hausdorff(ta.set(), tb.set(), &mut DistanceCounter::default()).unwrap();
        let r = hausdorff(&ta, &tb, eps).unwrap();
        prop_assert!(r.value <= exact && exact <= (1.0 + eps) * r.value);
        prop_assert_eq!(r.value, hausdorff(&tb, &ta, eps).unwrap().value);
    }

    #[test]
    fn tiny_eps_is_exact((ta, tb) in pair(40)) {
        let r = directed_hausdorff(&ta, &tb, 1e-9).unwrap();
        if r.exhausted {
            prop_assert_eq!(r.value, exact(&ta, &tb));
        }
        let p = k_hausdorff_all(&ta, &tb, 1e-9).unwrap();
        let want = exact_partial_all(ta.set(), tb.set(), &mut DistanceCounter::default()).unwrap();
        for (d, w) in p.deltas.iter().zip(&want) {
            prop_assert!(*d <= *w && *w <= (1.0 + 1e-9) * d);
        }
    }

    #[test]
    fn larger_eps_stops_no_later((ta, tb) in pair(50)) {
        let runs: Vec<_> = [0.01, 0.1, 1.0, 10.0]
            .iter()
            .map(|&e| directed_hausdorff(&ta, &tb, e).unwrap())
            .collect();
        for w in runs.windows(2) {
            prop_assert!(w[1].iterations <= w[0].iterations);
            prop_assert!(w[1].value <= w[0].value);
        }
    }

    #[test]
    fn partial_sandwich((ta, tb) in pair(50), eps in prop::sample::select(vec![0.05, 0.2, 1.0, 4.0])) {
        let want = exact_partial_all(ta.set(), tb.set(), &mut DistanceCounter::default()).unwrap();
        let p = k_hausdorff_all(&ta, &tb, eps).unwrap();
        prop_assert_eq!(p.deltas.len(), want.len());
        prop_assert!(p.deltas.windows(2).all(|w| w[0] >= w[1]), "{:?}", p.deltas);
        for (k, (d, w)) in p.deltas.iter().zip(&want).enumerate() {
            prop_assert!(*d <= *w && *w <= (1.0 + eps) * d, "k={} delta={} exact={}", k, d, w);
        }
        prop_assert_eq!(p.growth_violations, 0);
    }

    #[test]
    fn edge_and_covering_hold((ta, tb) in pair(40)) {
        let mut chk = EdgeChecker::new(ta.set(), tb.set());
        let r = directed_hausdorff_observed(&ta, &tb, 1e-9, &mut chk).unwrap();
        prop_assert_eq!(chk.iterations, r.iterations);
        prop_assert_eq!(chk.violations, vec![]);
    }
}

#[test]
fn incompatible_trees_are_rejected() {
    let a = tree(vec![vec![0.0]], MetricKind::L2, 2.0);
    let b = tree(vec![vec![0.0]], MetricKind::L1, 2.0);
    let c = tree(vec![vec![0.0, 1.0]], MetricKind::L2, 2.0);
    for other in [&b, &c] {
        assert!(matches!(
            directed_hausdorff(&a, other, 0.1),
            Err(Error::Incompatible(_))
        ));
        assert!(matches!(
            k_hausdorff_all(&a, other, 0.1),
            Err(Error::Incompatible(_))
        ));
    }
}
