//! Greedy trees: binary ball trees induced by a greedy permutation.
//!
//! Inserting point `p` with predecessor `q` splits the leaf currently centered
//! at `q` into a left child (still centered at `q`) and a right child centered
//! at `p`. Node ids follow creation order, so every child has a larger id than
//! its parent and the root is node 0.

mod file;

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::greedy::GreedyPermutation;
use crate::metric::{DistanceCounter, MetricKind, PointSet};

pub use file::FORMAT_VERSION;

static BUILDS: AtomicU64 = AtomicU64::new(0);
static LOADS: AtomicU64 = AtomicU64::new(0);

/// Trees built by [`GreedyTree::build`] in this process so far.
pub fn build_count() -> u64 {
    BUILDS.load(AtomicOrdering::Relaxed)
}

/// Trees loaded by [`GreedyTree::deserialize`] in this process so far.
pub fn load_count() -> u64 {
    LOADS.load(AtomicOrdering::Relaxed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: usize,
    /// Index of the center point in the underlying [`PointSet`].
    pub center: usize,
    pub radius: f64,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub leaf_count: usize,
    /// Permutation position whose insertion created this node (0 for the root).
    pub perm_rank: usize,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.left.is_none()
    }

    pub fn children(&self) -> Option<(usize, usize)> {
        self.left.zip(self.right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTree {
    perm: GreedyPermutation,
    nodes: Vec<TreeNode>,
    root: usize,
    /// Internal node ids by non-increasing radius, ties by ascending id.
    sorted_nodes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversalItem {
    pub side: Side,
    pub node: usize,
    pub radius: f64,
}

fn by_radius_then_id(a: &TreeNode, b: &TreeNode) -> Ordering {
    b.radius.total_cmp(&a.radius).then(a.id.cmp(&b.id))
}

impl GreedyTree {
    /// Builds the tree topology in O(n) and computes radii by walking every
    /// point up through its ancestors. A radius is the distance from the
    /// center to the farthest leaf, or the largest child radius if that is
    /// bigger.
    pub fn build(perm: GreedyPermutation, counter: &mut DistanceCounter) -> Self {
        let n = perm.len();
        let order = perm.order();
        let mut nodes = Vec::with_capacity(2 * n - 1);
        let mut parent = Vec::with_capacity(2 * n - 1);
        nodes.push(TreeNode {
            id: 0,
            center: order[0],
            radius: 0.0,
            left: None,
            right: None,
            leaf_count: 1,
            perm_rank: 0,
        });
        parent.push(usize::MAX);
        // current leaf id per permutation position
        let mut leaf_at = vec![0usize; n];

        for (i, pred) in perm.pred().iter().enumerate().skip(1) {
            let q = pred.expect("non-root position has a predecessor");
            let split = leaf_at[q];
            let (l, r) = (nodes.len(), nodes.len() + 1);
            for (id, center) in [(l, order[q]), (r, order[i])] {
                nodes.push(TreeNode {
                    id,
                    center,
                    radius: 0.0,
                    left: None,
                    right: None,
                    leaf_count: 1,
                    perm_rank: i,
                });
                parent.push(split);
            }
            nodes[split].left = Some(l);
            nodes[split].right = Some(r);
            leaf_at[q] = l;
            leaf_at[i] = r;
        }

        for id in (0..nodes.len()).rev() {
            if let Some((l, r)) = nodes[id].children() {
                nodes[id].leaf_count = nodes[l].leaf_count + nodes[r].leaf_count;
            }
        }

        let set = perm.set().clone();
        for &leaf in &leaf_at {
            let p = nodes[leaf].center;
            let mut x = parent[leaf];
            let mut last = (p, 0.0);
            while x != usize::MAX {
                let c = nodes[x].center;
                if c != last.0 {
                    last = (c, set.dist(c, p, counter));
                }
                if last.1 > nodes[x].radius {
                    nodes[x].radius = last.1;
                }
                x = parent[x];
            }
        }

        // For α < 2 a right child can reach farther from its own center than
        // the parent does from its center. Raising such parents keeps radii
        // monotone along every path, which the radius-sorted traversal
        // relies on; the result is still a covering radius.
        for id in (0..nodes.len()).rev() {
            if let Some((l, r)) = nodes[id].children() {
                let below = nodes[l].radius.max(nodes[r].radius);
                if below > nodes[id].radius {
                    nodes[id].radius = below;
                }
            }
        }

        let sorted_nodes = sort_internal(&nodes);
        BUILDS.fetch_add(1, AtomicOrdering::Relaxed);
        GreedyTree {
            perm,
            nodes,
            root: 0,
            sorted_nodes,
        }
    }

    pub(crate) fn from_raw(
        perm: GreedyPermutation,
        nodes: Vec<TreeNode>,
        root: usize,
        sorted_nodes: Vec<usize>,
    ) -> Self {
        GreedyTree {
            perm,
            nodes,
            root,
            sorted_nodes,
        }
    }

    pub fn perm(&self) -> &GreedyPermutation {
        &self.perm
    }

    pub fn set(&self) -> &Arc<PointSet> {
        self.perm.set()
    }

    pub fn metric(&self) -> MetricKind {
        self.set().metric()
    }

    pub fn dim(&self) -> usize {
        self.set().dim()
    }

    pub fn label(&self) -> &str {
        self.set().label()
    }

    pub fn alpha(&self) -> f64 {
        self.perm.alpha()
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn sorted_nodes(&self) -> &[usize] {
        &self.sorted_nodes
    }

    /// Coordinates of a node's center.
    #[inline]
    pub fn center_point(&self, id: usize) -> &[f64] {
        self.set().point(self.nodes[id].center)
    }

    /// Insertion distance of the point at `center` (∞ for the root point).
    pub fn insertion_dist_of_point(&self, point: usize) -> f64 {
        let rank = self
            .perm
            .order()
            .iter()
            .position(|&p| p == point)
            .expect("point belongs to the permutation");
        self.perm.insertion_dist()[rank]
    }

    /// Radius-order traversal of internal nodes (leaves are never split).
    pub fn traversal_list(&self, side: Side) -> Vec<TraversalItem> {
        self.sorted_nodes
            .iter()
            .map(|&node| TraversalItem {
                side,
                node,
                radius: self.nodes[node].radius,
            })
            .collect()
    }

    /// Point indices of the leaves below `id`.
    pub fn leaf_points(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes[id].leaf_count);
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            match self.nodes[x].children() {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(self.nodes[x].center),
            }
        }
        out
    }

    /// Leaf node id for every point index.
    pub fn leaf_of_points(&self) -> Vec<usize> {
        let mut leaf = vec![usize::MAX; self.len()];
        for node in self.nodes.iter().filter(|x| x.is_leaf()) {
            leaf[node.center] = node.id;
        }
        leaf
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut height = 0;
        for node in &self.nodes {
            if let Some((l, r)) = node.children() {
                depth[l] = depth[node.id] + 1;
                depth[r] = depth[node.id] + 1;
                height = height.max(depth[l]);
            }
        }
        height
    }
}

pub(crate) fn sort_internal(nodes: &[TreeNode]) -> Vec<usize> {
    let mut internal: Vec<&TreeNode> = nodes.iter().filter(|x| !x.is_leaf()).collect();
    internal.sort_by(|a, b| by_radius_then_id(a, b));
    internal.into_iter().map(|x| x.id).collect()
}

fn item_order(a: &TraversalItem, b: &TraversalItem) -> Ordering {
    b.radius
        .total_cmp(&a.radius)
        .then(a.side.cmp(&b.side))
        .then(a.node.cmp(&b.node))
}

/// Stable merge of two radius-sorted traversals; on equal radii tree A comes
/// first, then ascending node id.
pub fn merge_traversals(a: &[TraversalItem], b: &[TraversalItem]) -> Vec<TraversalItem> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if item_order(&b[j], &a[i]) == Ordering::Less {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::greedy_permutation;

    fn tree(points: Vec<Vec<f64>>, alpha: f64) -> GreedyTree {
        let set = Arc::new(PointSet::new(points, MetricKind::L2, "t").unwrap());
        let mut c = DistanceCounter::default();
        GreedyTree::build(
            greedy_permutation(set, alpha, None, &mut c).unwrap(),
            &mut c,
        )
    }

    fn fig1() -> GreedyTree {
        tree(
            vec![
                vec![0.1, 0.1],
                vec![1.7, 1.5],
                vec![2.5, 2.8],
                vec![2.4, 1.7],
            ],
            2.0,
        )
    }

    fn radii(t: &GreedyTree) -> Vec<f64> {
        t.traversal_list(Side::A).iter().map(|x| x.radius).collect()
    }

    #[test]
    fn figure_one_tree() {
        let t = fig1();
        assert_eq!(t.nodes().len(), 7);
        let root = t.node(0);
        assert_eq!(root.center, 0);
        assert!((root.radius - (2.4f64 * 2.4 + 2.7 * 2.7).sqrt()).abs() < 1e-15);
        // (a,c,b,d): a splits into (a, c); a splits into (a, b); c splits into (c, d)
        let centers: Vec<usize> = t.nodes().iter().map(|x| x.center).collect();
        assert_eq!(centers, vec![0, 0, 2, 0, 1, 2, 3]);
        assert_eq!(t.node(0).children(), Some((1, 2)));
        assert_eq!(t.node(1).children(), Some((3, 4)));
        assert_eq!(t.node(2).children(), Some((5, 6)));
        assert_eq!(t.node(0).leaf_count, 4);
        assert_eq!(t.height(), 2);
    }

    #[test]
    fn singleton_tree() {
        let t = tree(vec![vec![3.0]], 2.0);
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.node(0).radius, 0.0);
        assert!(t.node(0).is_leaf());
        assert!(t.traversal_list(Side::A).is_empty());
        assert_eq!(t.height(), 0);
    }

    #[test]
    fn line_tree_radii() {
        // order (0, 10, 4, 6.5); node 1 (center 0) holds {0, 4, 6.5}
        let t = tree(vec![vec![0.0], vec![10.0], vec![4.0], vec![6.5]], 1.0);
        assert_eq!(t.node(0).radius, 10.0);
        assert_eq!(t.node(1).center, 0);
        assert_eq!(t.node(1).radius, 6.5);
        assert_eq!(t.node(4).center, 2);
        assert_eq!(t.node(4).radius, 2.5);
        assert_eq!(radii(&t), vec![10.0, 6.5, 2.5]);
        assert_eq!(t.sorted_nodes(), &[0, 1, 4]);
    }

    #[test]
    fn figure_three_traversal() {
        // permutation (a..f) with b->a, c->b, d->a, e->c, f->b
        let set = Arc::new(
            PointSet::new(
                vec![
                    vec![2.3, 2.5],
                    vec![3.6, 1.0],
                    vec![3.9, 2.0],
                    vec![1.8, 3.5],
                    vec![3.4, 2.25],
                    vec![2.9, 1.3],
                ],
                MetricKind::L2,
                "fig3",
            )
            .unwrap(),
        );
        let perm = GreedyPermutation::from_parts(
            set,
            vec![0, 1, 2, 3, 4, 5],
            vec![None, Some(0), Some(1), Some(0), Some(2), Some(1)],
            2.0,
        )
        .unwrap();
        let t = GreedyTree::build(perm, &mut DistanceCounter::default());
        // u0 = 0, u1 = 1, v0 = 2, v1 = 3, w0 = 4
        let (u0, u1, v0) = (0, 1, 2);
        let (v1, w0) = t.node(v0).children().unwrap();
        assert_eq!(t.node(v1).center, 1);
        assert_eq!(t.node(w0).center, 2);
        assert_eq!(t.node(u1).leaf_count, 2);
        assert_eq!(t.sorted_nodes(), &[u0, v0, u1, v1, w0]);
    }

    #[test]
    fn merge_examples() {
        let item = |side, node, radius| TraversalItem { side, node, radius };
        let a = vec![item(Side::A, 0, 10.0), item(Side::A, 1, 4.0)];
        let b = vec![item(Side::B, 0, 7.0)];
        let m = merge_traversals(&a, &b);
        let tags: Vec<(Side, f64)> = m.iter().map(|x| (x.side, x.radius)).collect();
        assert_eq!(tags, vec![(Side::A, 10.0), (Side::B, 7.0), (Side::A, 4.0)]);
        assert_eq!(merge_traversals(&a, &[]), a);
        assert_eq!(merge_traversals(&[], &b), b);
        let tie = merge_traversals(&[item(Side::A, 3, 5.0)], &[item(Side::B, 1, 5.0)]);
        assert_eq!(tie[0].side, Side::A);
        let tie = merge_traversals(&[item(Side::B, 1, 5.0)], &[item(Side::A, 3, 5.0)]);
        assert_eq!(tie[0].side, Side::A);
    }

    #[test]
    fn radius_bound_needs_the_center_insertion_distance() {
        // Left node 3 (center 0) is created by inserting -1 (distance 1) but
        // holds 1.1 through the chain 0 <- 0.9 <- 1.1.
        let t = tree(
            vec![vec![0.0], vec![1.6], vec![-1.0], vec![0.9], vec![1.1]],
            2.0,
        );
        assert_eq!(t.perm().order(), &[0, 1, 2, 3, 4]);
        let x = t
            .nodes()
            .iter()
            .find(|x| x.perm_rank == 2 && x.center == 0)
            .unwrap();
        let created_by = t.perm().insertion_dist()[x.perm_rank];
        assert_eq!(created_by, 1.0);
        assert!(x.radius > created_by / (t.alpha() - 1.0));
        for x in t.nodes() {
            let eps = t.insertion_dist_of_point(x.center);
            assert!(x.radius <= eps / (t.alpha() - 1.0));
        }
    }
}
