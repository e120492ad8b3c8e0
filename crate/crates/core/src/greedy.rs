//! α-approximate greedy permutations with an α-scaling predecessor map.
//!
//! Construction is the quadratic farthest-point iteration with α-lazy parent
//! updates: every uninserted point remembers a parent among the inserted
//! points, the point farthest from its parent is inserted next, and a point
//! switches parent to the newcomer only when the newcomer is closer by a
//! factor of α.

use std::sync::Arc;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::metric::{DistanceCounter, PointSet};

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyPermutation {
    set: Arc<PointSet>,
    /// `order[i]` is the point index at permutation position `i`.
    order: Vec<usize>,
    /// Permutation position of the predecessor of position `i`; `None` at 0.
    pred: Vec<Option<usize>>,
    /// Insertion distance per position; `f64::INFINITY` for the root.
    insertion_dist: Vec<f64>,
    alpha: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 1.0 || alpha.is_infinite() {
        return Err(Error::Parameter(format!("alpha must be >= 1, got {alpha}")));
    }
    Ok(())
}

/// Builds a permutation of `set` rooted at `root` (default: point 0).
///
/// Ties for the farthest point go to the lowest point index. A point is
/// reparented only when `alpha * d(new, q) < d(parent(q), q)`.
pub fn greedy_permutation(
    set: Arc<PointSet>,
    alpha: f64,
    root: Option<usize>,
    counter: &mut DistanceCounter,
) -> Result<GreedyPermutation> {
    check_alpha(alpha)?;
    let n = set.len();
    let root = root.unwrap_or(0);
    if root >= n {
        return Err(Error::Parameter(format!(
            "root index {root} out of range for {n} points"
        )));
    }

    let mut order = Vec::with_capacity(n);
    let mut pred = Vec::with_capacity(n);
    let mut insertion_dist = Vec::with_capacity(n);
    order.push(root);
    pred.push(None);
    insertion_dist.push(f64::INFINITY);

    let mut inserted = vec![false; n];
    inserted[root] = true;
    // parent position and distance to parent, per point index
    let mut parent = vec![0usize; n];
    let mut parent_dist = vec![0.0f64; n];
    for q in (0..n).filter(|&q| q != root) {
        parent_dist[q] = set.dist(root, q, counter);
    }

    for pos in 1..n {
        let mut best = usize::MAX;
        let mut best_dist = f64::NEG_INFINITY;
        for q in 0..n {
            if !inserted[q] && parent_dist[q] > best_dist {
                best = q;
                best_dist = parent_dist[q];
            }
        }
        inserted[best] = true;
        order.push(best);
        pred.push(Some(parent[best]));
        insertion_dist.push(best_dist);

        for q in 0..n {
            if inserted[q] {
                continue;
            }
            let d = set.dist(best, q, counter);
            if alpha * d < parent_dist[q] {
                parent[q] = pos;
                parent_dist[q] = d;
            }
        }
    }

    Ok(GreedyPermutation {
        set,
        order,
        pred,
        insertion_dist,
        alpha,
    })
}

impl GreedyPermutation {
    /// Assembles a permutation from an explicit order and predecessor map,
    /// computing insertion distances. Only structure is checked here; use
    /// [`verify_greedy`] for the greedy properties.
    pub fn from_parts(
        set: Arc<PointSet>,
        order: Vec<usize>,
        pred: Vec<Option<usize>>,
        alpha: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let n = set.len();
        if order.len() != n || pred.len() != n {
            return Err(Error::Parameter(format!(
                "order/pred lengths {}/{} do not match {n} points",
                order.len(),
                pred.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in &order {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Parameter("order is not a permutation".into()));
            }
        }
        let mut counter = DistanceCounter::default();
        let mut insertion_dist = Vec::with_capacity(n);
        for (i, p) in pred.iter().enumerate() {
            match (i, p) {
                (0, None) => insertion_dist.push(f64::INFINITY),
                (i, Some(k)) if i > 0 && *k < i => {
                    insertion_dist.push(set.dist(order[i], order[*k], &mut counter))
                }
                _ => return Err(Error::Parameter(format!("bad predecessor at position {i}"))),
            }
        }
        Ok(GreedyPermutation {
            set,
            order,
            pred,
            insertion_dist,
            alpha,
        })
    }

    /// Like [`from_parts`](Self::from_parts) with each predecessor taken as the
    /// nearest earlier point (earliest position on ties).
    pub fn from_order(set: Arc<PointSet>, order: Vec<usize>, alpha: f64) -> Result<Self> {
        let mut counter = DistanceCounter::default();
        let mut pred = vec![None; order.len()];
        for i in 1..order.len().min(set.len()) {
            let mut best = (f64::INFINITY, 0);
            for k in 0..i {
                let d = set.dist(order[i], order[k], &mut counter);
                if d < best.0 {
                    best = (d, k);
                }
            }
            pred[i] = Some(best.1);
        }
        Self::from_parts(set, order, pred, alpha)
    }

    /// Reassembles a permutation whose insertion distances were stored
    /// elsewhere (tree files). Structure is checked, distances are not.
    pub(crate) fn from_stored(
        set: Arc<PointSet>,
        order: Vec<usize>,
        pred: Vec<Option<usize>>,
        insertion_dist: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        let n = set.len();
        if order.len() != n || pred.len() != n || insertion_dist.len() != n {
            return Err(Error::Format(
                "permutation arrays do not match point count".into(),
            ));
        }
        check_alpha(alpha).map_err(|e| Error::Format(e.to_string()))?;
        let mut seen = vec![false; n];
        for &p in &order {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Format("order is not a permutation".into()));
            }
        }
        for i in 0..n {
            let ok = match pred[i] {
                None => i == 0 && insertion_dist[0] == f64::INFINITY,
                Some(k) => {
                    i > 0 && k < i && insertion_dist[i].is_finite() && insertion_dist[i] >= 0.0
                }
            };
            if !ok {
                return Err(Error::Format(format!(
                    "bad permutation entry at position {i}"
                )));
            }
        }
        // Stored distances must be the ones the metric gives, bit for bit.
        let mut counter = DistanceCounter::default();
        for i in 1..n {
            let k = pred[i].expect("checked above");
            if set.dist(order[i], order[k], &mut counter) != insertion_dist[i] {
                return Err(Error::Format(format!(
                    "insertion distance at position {i} does not match the points"
                )));
            }
        }
        Ok(GreedyPermutation {
            set,
            order,
            pred,
            insertion_dist,
            alpha,
        })
    }

    pub fn set(&self) -> &Arc<PointSet> {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn pred(&self) -> &[Option<usize>] {
        &self.pred
    }

    pub fn insertion_dist(&self) -> &[f64] {
        &self.insertion_dist
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// First property a permutation fails under [`verify_greedy`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreedyViolation {
    #[error("position {index}: predecessor is not an earlier position")]
    PredecessorOrder { index: usize },
    #[error("position {index}: stored insertion distance {stored} != {actual}")]
    InsertionDistance {
        index: usize,
        stored: f64,
        actual: f64,
    },
    #[error("position {index}: a remaining point is at {farthest}, more than alpha * {inserted}")]
    NotGreedy {
        index: usize,
        farthest: f64,
        inserted: f64,
    },
    #[error(
        "position {index}: insertion distance {dist} exceeds predecessor's {pred_dist} / alpha"
    )]
    NotScaling {
        index: usize,
        dist: f64,
        pred_dist: f64,
    },
}

/// Brute-force O(n²) check of the α-approximate greedy and α-scaling
/// properties. For α = 1 the greedy check is exact greediness.
pub fn verify_greedy(perm: &GreedyPermutation) -> std::result::Result<(), GreedyViolation> {
    let set = &perm.set;
    let n = perm.len();
    let alpha = perm.alpha;
    let mut counter = DistanceCounter::default();

    for i in 1..n {
        let k = match perm.pred[i] {
            Some(k) if k < i => k,
            _ => return Err(GreedyViolation::PredecessorOrder { index: i }),
        };
        let actual = set.dist(perm.order[i], perm.order[k], &mut counter);
        if actual != perm.insertion_dist[i] {
            return Err(GreedyViolation::InsertionDistance {
                index: i,
                stored: perm.insertion_dist[i],
                actual,
            });
        }
    }

    // distance from each position's point to the current prefix
    let mut to_prefix = vec![f64::INFINITY; n];
    for i in 0..n {
        if i > 0 {
            let farthest = to_prefix[i..].iter().copied().fold(0.0, f64::max);
            if farthest > alpha * to_prefix[i] {
                return Err(GreedyViolation::NotGreedy {
                    index: i,
                    farthest,
                    inserted: to_prefix[i],
                });
            }
        }
        let p = perm.order[i];
        for (&q, t) in perm.order[i + 1..].iter().zip(&mut to_prefix[i + 1..]) {
            *t = t.min(set.dist(p, q, &mut counter));
        }
    }

    if alpha > 1.0 {
        for i in 1..n {
            if let Some(k) = perm.pred[i].filter(|&k| k > 0) {
                if alpha * perm.insertion_dist[i] > perm.insertion_dist[k] {
                    return Err(GreedyViolation::NotScaling {
                        index: i,
                        dist: perm.insertion_dist[i],
                        pred_dist: perm.insertion_dist[k],
                    });
                }
            }
        }
    }
    Ok(())
}
