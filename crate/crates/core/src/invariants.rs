//! Brute-force checkers for the structural invariants of greedy trees and of
//! the viability graph. They are quadratic or worse and meant for tests and
//! tracing, not for the query path.

use crate::gtree::{GreedyTree, Side};
use crate::metric::{DistanceCounter, PointSet};
use crate::viability::{IterationView, Observer, ViabilityGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `rad(x) > ε/(α−1)` for the insertion distance ε of the node's center.
    RadiusBound {
        node: usize,
        radius: f64,
        bound: f64,
    },
    ChildRadius {
        node: usize,
        parent: usize,
    },
    /// After `prefix` splits a point lies in `count` active nodes, not one.
    Covering {
        prefix: usize,
        point: usize,
        count: usize,
    },
    /// Two active centers closer than the packing bound.
    Packing {
        prefix: usize,
        p: usize,
        q: usize,
        dist: f64,
        bound: f64,
    },
    /// After `iteration`, the active nodes holding `a` and its nearest
    /// neighbor `b` are not adjacent.
    Edge {
        iteration: u64,
        a: usize,
        b: usize,
    },
    Partition {
        iteration: u64,
        side: Side,
        point: usize,
        count: usize,
    },
}

/// Parent of every node, `None` for the root.
pub fn parents(tree: &GreedyTree) -> Vec<Option<usize>> {
    let mut parent = vec![None; tree.nodes().len()];
    for node in tree.nodes() {
        if let Some((l, r)) = node.children() {
            parent[l] = Some(node.id);
            parent[r] = Some(node.id);
        }
    }
    parent
}

/// Radius bound (for α > 1) and monotone radii along every edge.
pub fn radius_violations(tree: &GreedyTree) -> Vec<Violation> {
    let mut out = Vec::new();
    let alpha = tree.alpha();
    for node in tree.nodes() {
        if alpha > 1.0 {
            let bound = tree.insertion_dist_of_point(node.center) / (alpha - 1.0);
            if node.radius > bound {
                out.push(Violation::RadiusBound {
                    node: node.id,
                    radius: node.radius,
                    bound,
                });
            }
        }
        if let Some((l, r)) = node.children() {
            for c in [l, r] {
                if tree.node(c).radius > node.radius {
                    out.push(Violation::ChildRadius {
                        node: c,
                        parent: node.id,
                    });
                }
            }
        }
    }
    out
}

/// For each point, how many of the `active` nodes hold it as a leaf.
fn cover_counts(tree: &GreedyTree, active: &[usize]) -> Vec<usize> {
    let mut count = vec![0; tree.len()];
    for &x in active {
        for p in tree.leaf_points(x) {
            count[p] += 1;
        }
    }
    count
}

/// `(α−1)/α`: the packing factor stated for greedy trees. Lazily parented
/// trees can violate it for α ≥ 2; see [`proven_packing`].
pub fn claimed_packing(alpha: f64) -> f64 {
    (alpha - 1.0) / alpha
}

/// `(α−1)/α²`, which does hold. For active centers `p`, `q` with `q` inserted
/// later, `d(p, q) ≥ ε_q/α`. If the parent of `q`'s node is centered at `q`
/// then `r ≤ ε_q/(α−1)`. Otherwise it is the node split when `q` was
/// inserted, whose radius is at most `α·ε_q/(α−1)` because no later point
/// has a larger insertion distance.
pub fn proven_packing(alpha: f64) -> f64 {
    (alpha - 1.0) / (alpha * alpha)
}

/// Replays the radius-order traversal and checks covering after every
/// prefix. With a packing factor `c`, also checks by brute force over all
/// active pairs that centers are at least `c·r` apart, `r` the least radius
/// among parents of active nodes.
pub fn traversal_violations(tree: &GreedyTree, packing: Option<f64>) -> Vec<Violation> {
    let mut out = Vec::new();
    let parent = parents(tree);
    let mut active = vec![false; tree.nodes().len()];
    active[tree.root()] = true;
    let mut counter = DistanceCounter::default();
    let set = tree.set();

    for prefix in 0..=tree.sorted_nodes().len() {
        if prefix > 0 {
            let z = tree.sorted_nodes()[prefix - 1];
            let (l, r) = tree
                .node(z)
                .children()
                .expect("traversal lists internal nodes");
            active[z] = false;
            active[l] = true;
            active[r] = true;
        }
        let ids: Vec<usize> = (0..active.len()).filter(|&i| active[i]).collect();
        for (point, &count) in cover_counts(tree, &ids).iter().enumerate() {
            if count != 1 {
                out.push(Violation::Covering {
                    prefix,
                    point,
                    count,
                });
            }
        }
        let Some(factor) = packing else { continue };
        let r = ids
            .iter()
            .filter_map(|&x| parent[x].map(|p| tree.node(p).radius))
            .fold(f64::INFINITY, f64::min);
        if r.is_infinite() {
            continue;
        }
        let bound = factor * r;
        for (i, &x) in ids.iter().enumerate() {
            for &y in &ids[i + 1..] {
                let (p, q) = (tree.node(x).center, tree.node(y).center);
                let dist = set.dist(p, q, &mut counter);
                if dist < bound {
                    out.push(Violation::Packing {
                        prefix,
                        p,
                        q,
                        dist,
                        bound,
                    });
                }
            }
        }
    }
    out
}

/// Every nearest neighbor in `b` of every point of `a`, compared exactly.
pub fn nearest_neighbors(a: &PointSet, b: &PointSet) -> Vec<Vec<usize>> {
    let mut counter = DistanceCounter::default();
    (0..a.len())
        .map(|i| {
            let d: Vec<f64> = b
                .points()
                .map(|q| counter.eval(a.metric(), a.point(i), q))
                .collect();
            let m = d.iter().copied().fold(f64::INFINITY, f64::min);
            (0..d.len()).filter(|&j| d[j] == m).collect()
        })
        .collect()
}

/// The unique active node holding each point, or the first point whose
/// count is not one.
fn holders(g: &ViabilityGraph<'_>, side: Side) -> Result<Vec<usize>, (usize, usize)> {
    let tree = g.tree(side);
    let mut holder = vec![usize::MAX; tree.len()];
    let mut count = vec![0usize; tree.len()];
    for x in g.active(side) {
        for p in tree.leaf_points(x) {
            holder[p] = x;
            count[p] += 1;
        }
    }
    match count.iter().position(|&c| c != 1) {
        Some(p) => Err((p, count[p])),
        None => Ok(holder),
    }
}

/// Observer asserting, after every iteration of a directed query, that active
/// nodes partition both sets and that each point's node is adjacent to the
/// node of each of its nearest neighbors.
pub struct EdgeChecker {
    nn: Vec<Vec<usize>>,
    pub iterations: u64,
    pub violations: Vec<Violation>,
}

impl EdgeChecker {
    pub fn new(a: &PointSet, b: &PointSet) -> Self {
        EdgeChecker {
            nn: nearest_neighbors(a, b),
            iterations: 0,
            violations: Vec::new(),
        }
    }

    /// Runs the checks against the graph as it is now.
    pub fn check(&mut self, iteration: u64, g: &ViabilityGraph<'_>) {
        let mut sides = [Side::A, Side::B].map(|side| match holders(g, side) {
            Ok(h) => Some(h),
            Err((point, count)) => {
                self.violations.push(Violation::Partition {
                    iteration,
                    side,
                    point,
                    count,
                });
                None
            }
        });
        let (Some(ha), Some(hb)) = (sides[0].take(), sides[1].take()) else {
            return;
        };
        for (a, nn) in self.nn.iter().enumerate() {
            for &b in nn {
                if !g.adjacent(ha[a], hb[b]) {
                    self.violations.push(Violation::Edge { iteration, a, b });
                }
            }
        }
    }
}

impl Observer for EdgeChecker {
    fn on_iteration(&mut self, view: &IterationView<'_, '_>) {
        self.iterations += 1;
        self.check(view.iteration, view.graph);
    }
}
