//! JSON tree files.
//!
//! A file carries the points, the permutation and every node record, so
//! loading is a linear-time structural check. The only distances evaluated
//! are the n−1 stored insertion distances, recomputed to catch tampering.
//! The root's infinite insertion distance and its missing predecessor are
//! written as `null`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GreedyTree, TreeNode};
use crate::error::{Error, Result};
use crate::greedy::GreedyPermutation;
use crate::metric::{MetricKind, PointSet};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TreeFile {
    version: u32,
    label: String,
    metric: MetricKind,
    dim: usize,
    points: Vec<Vec<f64>>,
    alpha: f64,
    perm: PermRecord,
    nodes: Vec<NodeRecord>,
    root: usize,
    sorted_nodes: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PermRecord {
    order: Vec<usize>,
    pred: Vec<Option<usize>>,
    insertion_dist: Vec<Option<f64>>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    center: usize,
    radius: f64,
    left: Option<usize>,
    right: Option<usize>,
    leaf_count: usize,
    perm_rank: usize,
}

fn fail<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

impl GreedyTree {
    pub fn to_json(&self) -> String {
        let set = self.set();
        let perm = self.perm();
        let file = TreeFile {
            version: FORMAT_VERSION,
            label: set.label().to_owned(),
            metric: set.metric(),
            dim: set.dim(),
            points: set.to_vecs(),
            alpha: perm.alpha(),
            perm: PermRecord {
                order: perm.order().to_vec(),
                pred: perm.pred().to_vec(),
                insertion_dist: perm
                    .insertion_dist()
                    .iter()
                    .map(|&e| e.is_finite().then_some(e))
                    .collect(),
            },
            nodes: self
                .nodes()
                .iter()
                .map(|x| NodeRecord {
                    id: x.id,
                    center: x.center,
                    radius: x.radius,
                    left: x.left,
                    right: x.right,
                    leaf_count: x.leaf_count,
                    perm_rank: x.perm_rank,
                })
                .collect(),
            root: self.root(),
            sorted_nodes: self.sorted_nodes().to_vec(),
        };
        serde_json::to_string(&file).expect("tree records serialize")
    }

    pub fn serialize(&self) -> Vec<u8> {
        self.to_json().into_bytes()
    }

    /// Loads a tree file, rejecting version mismatches, truncation and any
    /// violated structural invariant.
    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        let file: TreeFile =
            serde_json::from_slice(bytes).map_err(|e| Error::Format(e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return fail(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                file.version
            ));
        }
        if file.points.iter().any(|p| p.len() != file.dim) {
            return fail("point dimension does not match `dim`");
        }
        let set = PointSet::new(file.points, file.metric, file.label)
            .map_err(|e| Error::Format(e.to_string()))?;
        let n = set.len();

        let PermRecord {
            order,
            pred,
            insertion_dist,
        } = file.perm;
        let insertion_dist = insertion_dist
            .into_iter()
            .map(|e| e.unwrap_or(f64::INFINITY))
            .collect();
        let perm =
            GreedyPermutation::from_stored(Arc::new(set), order, pred, insertion_dist, file.alpha)?;

        let nodes: Vec<TreeNode> = file
            .nodes
            .into_iter()
            .map(|r| TreeNode {
                id: r.id,
                center: r.center,
                radius: r.radius,
                left: r.left,
                right: r.right,
                leaf_count: r.leaf_count,
                perm_rank: r.perm_rank,
            })
            .collect();
        check_nodes(&perm, &nodes, file.root)?;
        if super::sort_internal(&nodes) != file.sorted_nodes {
            return fail("sorted_nodes is not the radius order of the internal nodes");
        }
        debug_assert_eq!(nodes.len(), 2 * n - 1);
        super::LOADS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        Ok(GreedyTree::from_raw(
            perm,
            nodes,
            file.root,
            file.sorted_nodes,
        ))
    }
}

fn check_nodes(perm: &GreedyPermutation, nodes: &[TreeNode], root: usize) -> Result<()> {
    let n = perm.len();
    if nodes.len() != 2 * n - 1 {
        return fail(format!(
            "expected {} nodes, found {}",
            2 * n - 1,
            nodes.len()
        ));
    }
    if root != 0 {
        return fail("root must be node 0");
    }
    let order = perm.order();
    let mut has_parent = vec![false; nodes.len()];
    let mut leaf_for_point = vec![false; n];
    for (i, x) in nodes.iter().enumerate() {
        if x.id != i {
            return fail(format!("node at index {i} has id {}", x.id));
        }
        if x.center >= n || x.perm_rank >= n {
            return fail(format!("node {i}: center or perm_rank out of range"));
        }
        if !x.radius.is_finite() || x.radius < 0.0 {
            return fail(format!("node {i}: invalid radius"));
        }
        match (x.left, x.right) {
            (None, None) => {
                if x.radius != 0.0 || x.leaf_count != 1 {
                    return fail(format!("leaf {i}: radius must be 0 and leaf_count 1"));
                }
                if std::mem::replace(&mut leaf_for_point[x.center], true) {
                    return fail(format!("point {} has two leaves", x.center));
                }
            }
            (Some(l), Some(r)) => {
                if l <= i || r <= i || l >= nodes.len() || r >= nodes.len() || l == r {
                    return fail(format!("node {i}: bad child ids"));
                }
                for c in [l, r] {
                    if std::mem::replace(&mut has_parent[c], true) {
                        return fail(format!("node {c} has two parents"));
                    }
                }
                let (lx, rx) = (&nodes[l], &nodes[r]);
                if lx.radius > x.radius || rx.radius > x.radius {
                    return fail(format!("node {i}: child radius exceeds parent radius"));
                }
                if lx.leaf_count + rx.leaf_count != x.leaf_count {
                    return fail(format!("node {i}: wrong leaf count"));
                }
                if lx.center != x.center {
                    return fail(format!("node {i}: left child must share the center"));
                }
                let rank = rx.perm_rank;
                if rank == 0 || lx.perm_rank != rank || rx.center != order[rank] {
                    return fail(format!("node {i}: children disagree with the permutation"));
                }
                let q = perm.pred()[rank].expect("checked by the permutation");
                if lx.center != order[q] {
                    return fail(format!("node {i}: split point is not the predecessor"));
                }
            }
            _ => return fail(format!("node {i} has exactly one child")),
        }
    }
    if has_parent[0] || has_parent.iter().skip(1).any(|&p| !p) {
        return fail("nodes do not form a single tree");
    }
    if nodes[0].leaf_count != n || nodes[0].center != order[0] {
        return fail("root does not cover the point set");
    }
    Ok(())
}
