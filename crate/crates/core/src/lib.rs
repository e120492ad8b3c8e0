//! Greedy trees and near-linear approximate Hausdorff distances.
//!
//! A point set is preprocessed once into a [`GreedyTree`]: a binary ball tree
//! induced by an α-approximate greedy permutation. Two trees can then be
//! compared with
//!
//! - [`directed_hausdorff`] / [`hausdorff`]: a (1+ε)-approximation of the
//!   (directed) Hausdorff distance, computed by a simultaneous radius-order
//!   traversal of both trees over a pruned bipartite "viability graph";
//! - [`k_hausdorff_all`]: (1+ε)-approximations of every k-partial directed
//!   Hausdorff distance in a single pass, using a geometric bucket queue over
//!   local lower bounds.
//!
//! The [`oracle`] module holds the exact quadratic references used to check
//! both.
//!
//! ```
//! use std::sync::Arc;
//! use greedy_hausdorff::{build, directed_hausdorff, MetricKind, PointSet};
//!
//! let a = PointSet::new(vec![vec![0.0], vec![5.0], vec![9.0]], MetricKind::L2, "a").unwrap();
//! let b = PointSet::new(vec![vec![1.0], vec![8.0]], MetricKind::L2, "b").unwrap();
//! let ta = build(Arc::new(a), 2.0).unwrap();
//! let tb = build(Arc::new(b), 2.0).unwrap();
//! let res = directed_hausdorff(&ta, &tb, 0.1).unwrap();
//! assert!(res.value <= 3.0 && 3.0 <= 1.1 * res.value);
//! ```

pub mod error;
pub mod greedy;
pub mod gtree;
pub mod hausdorff;
pub mod invariants;
pub mod kpartial;
pub mod metric;
pub mod oracle;
pub mod viability;

use std::sync::Arc;

pub use error::{Error, Result};
pub use greedy::{greedy_permutation, verify_greedy, GreedyPermutation, GreedyViolation};
pub use gtree::{merge_traversals, GreedyTree, Side, TraversalItem, TreeNode};
pub use hausdorff::{directed_hausdorff, hausdorff, QueryResult};
pub use kpartial::{
    bucket_index, finish_threshold, k_hausdorff_all, BucketKey, BucketQueue, FinishThreshold,
    PartialResult,
};
pub use metric::{distance, spread, validate, DistanceCounter, MetricKind, PointSet};
pub use viability::{IterationView, Observer, ViabilityGraph};

/// Builds a greedy tree rooted at the first point with the given α.
pub fn build(set: Arc<PointSet>, alpha: f64) -> Result<GreedyTree> {
    let mut counter = DistanceCounter::default();
    let perm = greedy_permutation(set, alpha, None, &mut counter)?;
    Ok(GreedyTree::build(perm, &mut counter))
}
