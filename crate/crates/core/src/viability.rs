//! The viability graph: a bipartite graph between the active nodes of two
//! greedy trees whose edges over-approximate where each point of A may find
//! its nearest neighbor in B.
//!
//! Two invariants are maintained across splits and pruning:
//!
//! - covering: every point of A (resp. B) is a leaf of exactly one active
//!   A-node (resp. B-node);
//! - edges: if `b` is a nearest neighbor of `a`, the active nodes holding `a`
//!   and `b` are adjacent.
//!
//! Each active A-node `x` carries a local lower bound
//! `ℓ(x) = max(min_{y ∈ N(x)} d_ctr(x, y) − rad(y), 0)` on `d(ctr(x), B)`.
//! Center distances are cached on the edges; a left child shares its parent's
//! center and therefore inherits them without new metric evaluations.

use crate::error::{Error, Result};
use crate::gtree::{GreedyTree, Side, TraversalItem};
use crate::metric::{DistanceCounter, MetricKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeState {
    /// Not yet reached by the traversal.
    Inactive,
    Active,
    /// Replaced by its children.
    Split,
    /// Removed by the partial-distance query along with all its edges.
    Finished,
    /// Descendant of a finished node.
    Dead,
}

/// An A-side adjacency entry: neighbor B-node and the cached center distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub node: usize,
    pub dist: f64,
}

/// Drops every edge `(x, y)` with `d_ctr(x, y) − rad(y) > m + 2·rad(x)`, where
/// `m` is the smallest center distance among `x`'s edges. Returns the removed
/// neighbor ids in their original order.
pub fn prune_edges(edges: &mut Vec<Edge>, rad_x: f64, rad_of: impl Fn(usize) -> f64) -> Vec<usize> {
    let m = edges.iter().map(|e| e.dist).fold(f64::INFINITY, f64::min);
    let limit = m + 2.0 * rad_x;
    let mut removed = Vec::new();
    edges.retain(|e| {
        let keep = e.dist - rad_of(e.node) <= limit;
        if !keep {
            removed.push(e.node);
        }
        keep
    });
    removed
}

/// `max(min_y d_ctr(x, y) − rad(y), 0)`, or `None` without neighbors.
pub fn lower_bound(edges: &[Edge], rad_of: impl Fn(usize) -> f64) -> Option<f64> {
    edges
        .iter()
        .map(|e| e.dist - rad_of(e.node))
        .reduce(f64::min)
        .map(|l| l.max(0.0))
}

pub struct ViabilityGraph<'t> {
    a: &'t GreedyTree,
    b: &'t GreedyTree,
    metric: MetricKind,
    a_adj: Vec<Vec<Edge>>,
    b_adj: Vec<Vec<usize>>,
    a_state: Vec<NodeState>,
    b_state: Vec<NodeState>,
    lower: Vec<f64>,
    edges: usize,
    counter: DistanceCounter,
}

impl<'t> ViabilityGraph<'t> {
    /// Starts with the two roots joined by one edge.
    pub fn new(a: &'t GreedyTree, b: &'t GreedyTree) -> Result<Self> {
        a.set().check_compatible(b.set())?;
        let (na, nb) = (a.nodes().len(), b.nodes().len());
        let mut g = ViabilityGraph {
            a,
            b,
            metric: a.metric(),
            a_adj: vec![Vec::new(); na],
            b_adj: vec![Vec::new(); nb],
            a_state: vec![NodeState::Inactive; na],
            b_state: vec![NodeState::Inactive; nb],
            lower: vec![0.0; na],
            edges: 1,
            counter: DistanceCounter::default(),
        };
        let (x0, y0) = (a.root(), b.root());
        let dist = g
            .counter
            .eval(g.metric, a.center_point(x0), b.center_point(y0));
        g.a_adj[x0].push(Edge { node: y0, dist });
        g.b_adj[y0].push(x0);
        g.a_state[x0] = NodeState::Active;
        g.b_state[y0] = NodeState::Active;
        g.update_lower_bound(x0)?;
        Ok(g)
    }

    pub fn tree(&self, side: Side) -> &'t GreedyTree {
        match side {
            Side::A => self.a,
            Side::B => self.b,
        }
    }

    pub fn state(&self, side: Side, node: usize) -> NodeState {
        match side {
            Side::A => self.a_state[node],
            Side::B => self.b_state[node],
        }
    }

    pub fn is_active(&self, side: Side, node: usize) -> bool {
        self.state(side, node) == NodeState::Active
    }

    /// Active node ids on one side, in ascending order. O(tree size).
    pub fn active(&self, side: Side) -> Vec<usize> {
        let states = match side {
            Side::A => &self.a_state,
            Side::B => &self.b_state,
        };
        (0..states.len())
            .filter(|&i| states[i] == NodeState::Active)
            .collect()
    }

    pub fn neighbors_of_a(&self, x: usize) -> &[Edge] {
        &self.a_adj[x]
    }

    pub fn neighbors_of_b(&self, y: usize) -> &[usize] {
        &self.b_adj[y]
    }

    pub fn degree(&self, side: Side, node: usize) -> usize {
        match side {
            Side::A => self.a_adj[node].len(),
            Side::B => self.b_adj[node].len(),
        }
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        self.a_adj[x].iter().any(|e| e.node == y)
    }

    /// Last computed ℓ(x).
    pub fn lower(&self, x: usize) -> f64 {
        self.lower[x]
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn distance_calls(&self) -> u64 {
        self.counter.calls
    }

    /// Replaces the active node `z` by its two children, each inheriting all
    /// of `z`'s edges. Returns the A-nodes to prune and re-bound next: both
    /// children for an A split, the inherited neighbors for a B split.
    pub fn split(&mut self, item: TraversalItem) -> Result<Vec<usize>> {
        let z = item.node;
        if !self.is_active(item.side, z) {
            return Err(Error::Internal(format!(
                "split of inactive {:?}-node {z} (state {:?})",
                item.side,
                self.state(item.side, z)
            )));
        }
        let (zl, zr) =
            self.tree(item.side).node(z).children().ok_or_else(|| {
                Error::Internal(format!("split of leaf {:?}-node {z}", item.side))
            })?;
        match item.side {
            Side::A => {
                let edges = std::mem::take(&mut self.a_adj[z]);
                let cr = self.a.center_point(zr);
                let mut right = Vec::with_capacity(edges.len());
                for e in &edges {
                    let dist = self
                        .counter
                        .eval(self.metric, cr, self.b.center_point(e.node));
                    right.push(Edge { node: e.node, dist });
                    let list = &mut self.b_adj[e.node];
                    let pos = list
                        .iter()
                        .position(|&v| v == z)
                        .expect("adjacency is symmetric");
                    list[pos] = zl;
                    list.push(zr);
                }
                self.edges += edges.len();
                self.a_adj[zl] = edges;
                self.a_adj[zr] = right;
                self.lower[zl] = self.lower[z];
                self.a_state[z] = NodeState::Split;
                self.a_state[zl] = NodeState::Active;
                self.a_state[zr] = NodeState::Active;
                Ok(vec![zl, zr])
            }
            Side::B => {
                let nbrs = std::mem::take(&mut self.b_adj[z]);
                let cr = self.b.center_point(zr);
                for &x in &nbrs {
                    let dist = self.counter.eval(self.metric, self.a.center_point(x), cr);
                    let list = &mut self.a_adj[x];
                    let e = list
                        .iter_mut()
                        .find(|e| e.node == z)
                        .expect("adjacency is symmetric");
                    e.node = zl;
                    list.push(Edge { node: zr, dist });
                }
                self.edges += nbrs.len();
                self.b_adj[zl] = nbrs.clone();
                self.b_adj[zr] = nbrs.clone();
                self.b_state[z] = NodeState::Split;
                self.b_state[zl] = NodeState::Active;
                self.b_state[zr] = NodeState::Active;
                Ok(nbrs)
            }
        }
    }

    /// Applies the pruning condition to every edge of the A-node `x`.
    /// Returns the number of removed edges.
    pub fn prune(&mut self, x: usize) -> usize {
        let b = self.b;
        let removed = prune_edges(&mut self.a_adj[x], self.a.node(x).radius, |y| {
            b.node(y).radius
        });
        for &y in &removed {
            remove_value(&mut self.b_adj[y], x);
        }
        self.edges -= removed.len();
        removed.len()
    }

    /// Recomputes and stores ℓ(x) from `x`'s current neighbors.
    pub fn update_lower_bound(&mut self, x: usize) -> Result<f64> {
        let b = self.b;
        let l = lower_bound(&self.a_adj[x], |y| b.node(y).radius)
            .ok_or_else(|| Error::Internal(format!("A-node {x} has no neighbors")))?;
        self.lower[x] = l;
        Ok(l)
    }

    /// Removes the A-node `x` and all its edges.
    pub fn finish(&mut self, x: usize) {
        for e in std::mem::take(&mut self.a_adj[x]) {
            remove_value(&mut self.b_adj[e.node], x);
            self.edges -= 1;
        }
        self.a_state[x] = NodeState::Finished;
    }

    /// Marks the children of a finished or dead A-node as dead, so their own
    /// traversal items can be skipped.
    pub fn discard(&mut self, z: usize) -> Result<()> {
        match self.a_state[z] {
            NodeState::Finished | NodeState::Dead => {
                if let Some((l, r)) = self.a.node(z).children() {
                    self.a_state[l] = NodeState::Dead;
                    self.a_state[r] = NodeState::Dead;
                }
                Ok(())
            }
            s => Err(Error::Internal(format!(
                "discard of A-node {z} in state {s:?}"
            ))),
        }
    }

    /// Largest degree among the given A-nodes and their neighbors.
    pub(crate) fn local_max_degree(&self, xs: &[usize]) -> usize {
        xs.iter()
            .flat_map(|&x| {
                std::iter::once(self.a_adj[x].len())
                    .chain(self.a_adj[x].iter().map(|e| self.b_adj[e.node].len()))
            })
            .max()
            .unwrap_or(0)
    }
}

fn remove_value(list: &mut Vec<usize>, v: usize) {
    if let Some(pos) = list.iter().position(|&u| u == v) {
        list.swap_remove(pos);
    }
}

/// Per-iteration snapshot handed to an [`Observer`].
pub struct IterationView<'a, 't> {
    /// 1-based count of splits performed so far.
    pub iteration: u64,
    pub item: TraversalItem,
    /// A-nodes pruned and re-bounded in this iteration.
    pub touched: &'a [usize],
    /// Global lower bound after the iteration (running maximum of ℓ for the
    /// directed query; largest unfinished ℓ for the partial query).
    pub lower_bound: f64,
    pub graph: &'a ViabilityGraph<'t>,
}

/// Hook called after every iteration of a query, for tracing and
/// invariant checks.
pub trait Observer {
    fn on_iteration(&mut self, view: &IterationView<'_, '_>);
}

/// No-op observer.
impl Observer for () {
    fn on_iteration(&mut self, _: &IterationView<'_, '_>) {}
}

impl<F: FnMut(&IterationView<'_, '_>)> Observer for F {
    fn on_iteration(&mut self, view: &IterationView<'_, '_>) {
        self(view)
    }
}
