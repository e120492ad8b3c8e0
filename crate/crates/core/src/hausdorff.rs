//! (1+ε)-approximate directed and symmetric Hausdorff distances.
//!
//! Both trees are traversed together in radius order. Before splitting the
//! next node of radius `r`, the query stops if `r ≤ (ε/2)·L`, where `L` is
//! the largest local lower bound seen so far; then `L ≤ d_h(A, B) ≤ L + 2r ≤
//! (1+ε)·L`. If the list runs out every active node is a leaf and `L` is exact.

use crate::error::{Error, Result};
use crate::gtree::{merge_traversals, GreedyTree, Side};
use crate::viability::{IterationView, Observer, ViabilityGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryResult {
    pub value: f64,
    pub iterations: u64,
    pub distance_calls: u64,
    pub max_degree: usize,
    /// The whole traversal was consumed, so `value` is exact.
    pub exhausted: bool,
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    Ok(())
}

pub fn directed_hausdorff(a: &GreedyTree, b: &GreedyTree, eps: f64) -> Result<QueryResult> {
    directed_hausdorff_observed(a, b, eps, &mut ())
}

/// [`directed_hausdorff`] with a per-iteration hook.
pub fn directed_hausdorff_observed(
    a: &GreedyTree,
    b: &GreedyTree,
    eps: f64,
    observer: &mut dyn Observer,
) -> Result<QueryResult> {
    check_eps(eps)?;
    let mut g = ViabilityGraph::new(a, b)?;
    let list = merge_traversals(&a.traversal_list(Side::A), &b.traversal_list(Side::B));

    let mut global = g.lower(a.root());
    let mut iterations = 0;
    let mut max_degree = 1;
    let mut exhausted = true;
    for item in list {
        if item.radius <= eps / 2.0 * global {
            exhausted = false;
            break;
        }
        let touched = g.split(item)?;
        for &x in &touched {
            g.prune(x);
            global = global.max(g.update_lower_bound(x)?);
        }
        iterations += 1;
        max_degree = max_degree.max(g.local_max_degree(&touched));
        observer.on_iteration(&IterationView {
            iteration: iterations,
            item,
            touched: &touched,
            lower_bound: global,
            graph: &g,
        });
    }

    Ok(QueryResult {
        value: global,
        iterations,
        distance_calls: g.distance_calls(),
        max_degree,
        exhausted,
    })
}

/// `max(d_h(A, B), d_h(B, A))`, both approximated to within 1+ε.
pub fn hausdorff(a: &GreedyTree, b: &GreedyTree, eps: f64) -> Result<QueryResult> {
    let ab = directed_hausdorff(a, b, eps)?;
    let ba = directed_hausdorff(b, a, eps)?;
    Ok(QueryResult {
        value: ab.value.max(ba.value),
        iterations: ab.iterations + ba.iterations,
        distance_calls: ab.distance_calls + ba.distance_calls,
        max_degree: ab.max_degree.max(ba.max_degree),
        exhausted: ab.exhausted && ba.exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricKind, PointSet};
    use std::sync::Arc;

    fn tree1d(xs: &[f64]) -> GreedyTree {
        let set =
            PointSet::new(xs.iter().map(|&x| vec![x]).collect(), MetricKind::L2, "t").unwrap();
        crate::build(Arc::new(set), 2.0).unwrap()
    }

    #[test]
    fn identical_sets_are_at_zero() {
        let a = tree1d(&[0.0, 3.0, 4.5, 9.0, -2.0]);
        for eps in [0.01, 0.5, 3.0] {
            let r = directed_hausdorff(&a, &a, eps).unwrap();
            assert_eq!(r.value, 0.0);
            assert!(r.exhausted);
            assert_eq!(hausdorff(&a, &a, eps).unwrap().value, 0.0);
        }
    }

    #[test]
    fn small_line_sandwich() {
        let a = tree1d(&[0.0, 5.0, 9.0]);
        let b = tree1d(&[1.0, 8.0]);
        let r = directed_hausdorff(&a, &b, 0.1).unwrap();
        assert!(r.value <= 3.0 && 3.0 <= 1.1 * r.value, "{r:?}");
    }

    #[test]
    fn singletons_are_exact_at_init() {
        let r = directed_hausdorff(&tree1d(&[0.0]), &tree1d(&[7.0]), 0.5).unwrap();
        assert_eq!(r.value, 7.0);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.distance_calls, 1);
    }

    #[test]
    fn symmetric_examples() {
        let a = tree1d(&[0.0]);
        let b = tree1d(&[0.0, 100.0]);
        assert_eq!(directed_hausdorff(&a, &b, 0.1).unwrap().value, 0.0);
        let h = hausdorff(&a, &b, 0.1).unwrap();
        assert!(h.value <= 100.0 && 100.0 <= 1.1 * h.value);
        assert_eq!(h.value, hausdorff(&b, &a, 0.1).unwrap().value);
    }

    #[test]
    fn rejects_bad_eps() {
        let a = tree1d(&[0.0]);
        for eps in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                directed_hausdorff(&a, &a, eps),
                Err(Error::Parameter(_))
            ));
        }
    }

    #[test]
    fn observer_sees_every_iteration() {
        let a = tree1d(&[0.0, 1.0, 2.0, 3.5]);
        let b = tree1d(&[0.5, 2.5]);
        let mut seen = Vec::new();
        let r = directed_hausdorff_observed(&a, &b, 1e-9, &mut |v: &IterationView<'_, '_>| {
            seen.push((v.iteration, v.lower_bound))
        })
        .unwrap();
        assert_eq!(seen.len() as u64, r.iterations);
        assert!(seen.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(r.value, 1.0);
    }
}
