//! All k-partial directed Hausdorff distances in one traversal.
//!
//! The query runs the same radius-order loop as the directed query but never
//! stops early. Active A-nodes sit in a monotone bucket queue keyed by their
//! local lower bounds, bucket `m` holding `β^m < ℓ ≤ β^(m+1)` with
//! `β = 1 + ε/2`. Whenever the next radius is `r`, every bucket at or above
//! `s = ⌈log_β(2rβ/(β−1))⌉` is finished and leaves the graph. A bound update
//! that would land at or above bucket `s` finishes the node immediately.
//! Since `s` only decreases, the sweep visits every bucket index at most once.
//!
//! A finished node `x` emits `max(ℓ(x) − rad(x), 0)` once per leaf, not the
//! bucket floor `β^m`: a leaf `a` other than the center is only known to
//! satisfy `d(a, B) ≥ ℓ(x) − rad(x)`, which can be below `β^m`. Every active
//! node has radius at most `r`, so `d(a, B) ≤ ℓ(x) + 2r`, and the threshold
//! gives `3r ≤ ε·(ℓ(x) − rad(x))`. Each point thus gets a value within a
//! factor 1+ε below its own distance, and the sorted values sandwich every
//! k-partial distance.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::gtree::{merge_traversals, GreedyTree, Side};
use crate::hausdorff::check_eps;
use crate::viability::{IterationView, Observer, ViabilityGraph};

/// Bucket of a lower bound: `Index(m)` for `β^m < ℓ ≤ β^(m+1)`, `Zero` for 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BucketKey {
    Zero,
    Index(i64),
}

/// First bucket index to finish; `All` is the −∞ threshold used once the
/// traversal is exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinishThreshold {
    All,
    From(i64),
}

impl FinishThreshold {
    pub fn admits(self, m: i64) -> bool {
        match self {
            FinishThreshold::All => true,
            FinishThreshold::From(s) => m >= s,
        }
    }
}

#[inline]
fn pow(beta: f64, m: i64) -> f64 {
    beta.powf(m as f64)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!("beta must be > 1, got {beta}")));
    }
    Ok(())
}

/// The unique `m` with `β^m < l ≤ β^(m+1)`, or `Zero` for `l = 0`.
///
/// The logarithm only seeds the search; the bracketing inequality is then
/// checked against the same powers used for thresholds.
pub fn bucket_index(l: f64, beta: f64) -> Result<BucketKey> {
    check_beta(beta)?;
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::Internal(format!(
            "bucket of invalid lower bound {l}"
        )));
    }
    if l == 0.0 {
        return Ok(BucketKey::Zero);
    }
    let mut m = (l.ln() / beta.ln()).ceil() as i64 - 1;
    for _ in 0..64 {
        if pow(beta, m + 1) < l {
            m += 1;
        } else if pow(beta, m) >= l {
            m -= 1;
        } else {
            return Ok(BucketKey::Index(m));
        }
    }
    Err(Error::Internal(format!(
        "no bucket brackets {l} for beta {beta}"
    )))
}

/// `s = ⌈log_β(2rβ/(β−1))⌉`, the smallest `s` with `β^s ≥ 2rβ/(β−1)`;
/// `All` for `r = 0`.
pub fn finish_threshold(r: f64, beta: f64) -> Result<FinishThreshold> {
    check_beta(beta)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Internal(format!(
            "finish threshold of invalid radius {r}"
        )));
    }
    if r == 0.0 {
        return Ok(FinishThreshold::All);
    }
    let target = 2.0 * r * beta / (beta - 1.0);
    let mut s = (target.ln() / beta.ln()).ceil() as i64;
    for _ in 0..64 {
        if pow(beta, s) < target {
            s += 1;
        } else if pow(beta, s - 1) >= target {
            s -= 1;
        } else {
            return Ok(FinishThreshold::From(s));
        }
    }
    Err(Error::Internal(format!("no threshold for radius {r}")))
}

/// Monotone max-queue over lower bounds with geometric buckets.
#[derive(Debug, Clone)]
pub struct BucketQueue {
    beta: f64,
    buckets: BTreeMap<i64, Vec<usize>>,
    zero: Vec<usize>,
    slot: Vec<Option<(BucketKey, usize)>>,
    len: usize,
    /// Lowest index finished so far; every bucket at or above it is gone.
    floor: Option<i64>,
    visited: HashSet<i64>,
}

impl BucketQueue {
    /// Queue for node ids below `capacity`.
    pub fn new(beta: f64, capacity: usize) -> Result<Self> {
        check_beta(beta)?;
        Ok(BucketQueue {
            beta,
            buckets: BTreeMap::new(),
            zero: Vec::new(),
            slot: vec![None; capacity],
            len: 0,
            floor: None,
            visited: HashSet::new(),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Highest bucket index that has not been finished, if any was.
    pub fn cursor(&self) -> Option<i64> {
        self.floor.map(|f| f - 1)
    }

    /// Number of buckets removed by [`drain`](Self::drain) so far.
    pub fn buckets_visited(&self) -> usize {
        self.visited.len()
    }

    pub fn key_of(&self, node: usize) -> Option<BucketKey> {
        self.slot[node].map(|(k, _)| k)
    }

    /// Highest occupied key.
    pub fn top(&self) -> Option<BucketKey> {
        match self.buckets.last_key_value() {
            Some((&m, _)) => Some(BucketKey::Index(m)),
            None => (!self.zero.is_empty()).then_some(BucketKey::Zero),
        }
    }

    pub fn nodes_in(&self, key: BucketKey) -> &[usize] {
        match key {
            BucketKey::Zero => &self.zero,
            BucketKey::Index(m) => self.buckets.get(&m).map_or(&[], Vec::as_slice),
        }
    }

    /// Inserts `node` with lower bound `l`. Fails if the node is already
    /// queued or its bucket has already been finished.
    pub fn insert(&mut self, node: usize, l: f64) -> Result<BucketKey> {
        if self.slot[node].is_some() {
            return Err(Error::Internal(format!("node {node} queued twice")));
        }
        let key = bucket_index(l, self.beta)?;
        let list = match key {
            BucketKey::Zero => &mut self.zero,
            BucketKey::Index(m) => {
                if self.floor.is_some_and(|f| m >= f) {
                    return Err(Error::Internal(format!(
                        "insert into finished bucket {m} (cursor {:?})",
                        self.cursor()
                    )));
                }
                self.buckets.entry(m).or_default()
            }
        };
        self.slot[node] = Some((key, list.len()));
        list.push(node);
        self.len += 1;
        Ok(key)
    }

    pub fn remove(&mut self, node: usize) -> Option<BucketKey> {
        let (key, pos) = self.slot[node].take()?;
        let list = match key {
            BucketKey::Zero => &mut self.zero,
            BucketKey::Index(m) => self.buckets.get_mut(&m).expect("slot points at a bucket"),
        };
        list.swap_remove(pos);
        if let Some(&moved) = list.get(pos) {
            self.slot[moved] = Some((key, pos));
        }
        if let BucketKey::Index(m) = key {
            if list.is_empty() {
                self.buckets.remove(&m);
            }
        }
        self.len -= 1;
        Some(key)
    }

    /// Removes every bucket admitted by `threshold`, highest first, each with
    /// its nodes in ascending id order. `All` also takes the zero bucket last.
    pub fn drain(&mut self, threshold: FinishThreshold) -> Result<Vec<(BucketKey, Vec<usize>)>> {
        let mut out = Vec::new();
        while let Some((&m, _)) = self.buckets.last_key_value() {
            if !threshold.admits(m) {
                break;
            }
            if !self.visited.insert(m) {
                return Err(Error::Internal(format!("bucket {m} visited twice")));
            }
            let mut nodes = self.buckets.remove(&m).expect("key just observed");
            nodes.sort_unstable();
            for &x in &nodes {
                self.slot[x] = None;
            }
            self.len -= nodes.len();
            out.push((BucketKey::Index(m), nodes));
        }
        match threshold {
            FinishThreshold::From(s) => {
                self.floor = Some(self.floor.map_or(s, |f| f.min(s)));
            }
            FinishThreshold::All => {
                self.floor = Some(i64::MIN);
                if !self.zero.is_empty() {
                    let mut nodes = std::mem::take(&mut self.zero);
                    nodes.sort_unstable();
                    for &x in &nodes {
                        self.slot[x] = None;
                    }
                    self.len -= nodes.len();
                    out.push((BucketKey::Zero, nodes));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialResult {
    /// `deltas[k]` approximates the k-partial distance, for k < |A|.
    pub deltas: Vec<f64>,
    pub eps: f64,
    pub beta: f64,
    pub iterations: u64,
    pub distance_calls: u64,
    pub max_degree: usize,
    /// Buckets removed by the finishing sweep, each at most once.
    pub buckets_visited: usize,
    /// Distinct bucket indices from which nodes were finished.
    pub distinct_buckets: usize,
    /// Lower-bound updates that grew by more than the split radius.
    pub growth_violations: u64,
    /// Immediate finishes whose bucket lay above the current threshold.
    pub bucket_overflows: u64,
}

pub fn k_hausdorff_all(a: &GreedyTree, b: &GreedyTree, eps: f64) -> Result<PartialResult> {
    k_hausdorff_all_observed(a, b, eps, &mut ())
}

struct Emitter<'a> {
    tree: &'a GreedyTree,
    deltas: Vec<f64>,
    emitted: BTreeSet<i64>,
}

impl Emitter<'_> {
    /// Finishes `x`, whose bucket is `key`, and emits its certified value.
    fn finish(&mut self, g: &mut ViabilityGraph<'_>, key: BucketKey, x: usize) {
        if let BucketKey::Index(m) = key {
            self.emitted.insert(m);
        }
        let node = self.tree.node(x);
        let value = (g.lower(x) - node.radius).max(0.0);
        self.deltas
            .extend(std::iter::repeat_n(value, node.leaf_count));
        g.finish(x);
    }
}

// Relative slack for the growth-cap diagnostics only.
const GROWTH_SLACK: f64 = 1e-12;

/// [`k_hausdorff_all`] with a per-iteration hook.
pub fn k_hausdorff_all_observed(
    a: &GreedyTree,
    b: &GreedyTree,
    eps: f64,
    observer: &mut dyn Observer,
) -> Result<PartialResult> {
    check_eps(eps)?;
    let beta = 1.0 + eps / 2.0;
    let mut g = ViabilityGraph::new(a, b)?;
    let mut queue = BucketQueue::new(beta, a.nodes().len())?;
    queue.insert(a.root(), g.lower(a.root()))?;
    let mut out = Emitter {
        tree: a,
        deltas: Vec::with_capacity(a.len()),
        emitted: BTreeSet::new(),
    };

    let list = merge_traversals(&a.traversal_list(Side::A), &b.traversal_list(Side::B));
    let mut iterations = 0;
    let mut max_degree = 1;
    let mut growth_violations = 0;
    let mut bucket_overflows = 0;

    for item in list {
        if queue.is_empty() {
            break;
        }
        let threshold = finish_threshold(item.radius, beta)?;
        for (key, nodes) in queue.drain(threshold)? {
            for x in nodes {
                out.finish(&mut g, key, x);
            }
        }

        let r = item.radius;
        let mut before = Vec::new();
        match item.side {
            Side::A => {
                if !g.is_active(Side::A, item.node) {
                    g.discard(item.node)?;
                    continue;
                }
                queue.remove(item.node);
            }
            Side::B => {
                before.extend(g.neighbors_of_b(item.node).iter().map(|&x| g.lower(x)));
            }
        }
        let parent_lower = match item.side {
            Side::A => g.lower(item.node),
            Side::B => 0.0,
        };
        let touched = g.split(item)?;

        let mut finished = Vec::new();
        for (i, &x) in touched.iter().enumerate() {
            g.prune(x);
            let l = g.update_lower_bound(x)?;
            let cap = match item.side {
                Side::B => Some(before[i] + r),
                Side::A if i == 1 => Some(parent_lower + r),
                Side::A => None,
            };
            if cap.is_some_and(|c| l > c * (1.0 + GROWTH_SLACK)) {
                growth_violations += 1;
            }
            queue.remove(x);
            match (bucket_index(l, beta)?, threshold) {
                (BucketKey::Index(m), FinishThreshold::From(s)) if m >= s => {
                    if m > s {
                        bucket_overflows += 1;
                    }
                    finished.push((BucketKey::Index(m.min(s)), x));
                }
                (key @ BucketKey::Index(_), FinishThreshold::All) => finished.push((key, x)),
                _ => {
                    queue.insert(x, l)?;
                }
            }
        }
        for (key, x) in finished {
            out.finish(&mut g, key, x);
        }

        iterations += 1;
        max_degree = max_degree.max(g.local_max_degree(&touched));
        let lower_bound = queue
            .top()
            .map(|k| {
                queue
                    .nodes_in(k)
                    .iter()
                    .map(|&x| g.lower(x))
                    .fold(0.0, f64::max)
            })
            .unwrap_or(0.0);
        observer.on_iteration(&IterationView {
            iteration: iterations,
            item,
            touched: &touched,
            lower_bound,
            graph: &g,
        });
    }

    for (key, nodes) in queue.drain(FinishThreshold::All)? {
        for x in nodes {
            out.finish(&mut g, key, x);
        }
    }

    if out.deltas.len() != a.len() {
        return Err(Error::Internal(format!(
            "emitted {} distances for {} points",
            out.deltas.len(),
            a.len()
        )));
    }
    let mut deltas = out.deltas;
    deltas.sort_by(|x, y| y.total_cmp(x));
    Ok(PartialResult {
        deltas,
        eps,
        beta,
        iterations,
        distance_calls: g.distance_calls(),
        max_degree,
        buckets_visited: queue.buckets_visited(),
        distinct_buckets: out.emitted.len(),
        growth_violations,
        bucket_overflows,
    })
}
