//! k-core decomposition.
//!
//! [`decompose`] is the linear-time bucket peeling for the degree property.
//! [`decompose_generalized`] and [`generalized_coreness`] peel against any
//! monotone [`PropertyFunction`], which recovers the classic decomposition
//! for [`Degree`].

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum CoreError {
    #[error("property function declares itself non-monotone")]
    DeclaredNonMonotone,
    #[error("property is not monotone: node {node} score rose from {before} to {after} after removals")]
    NotMonotone { node: usize, before: i64, after: i64 },
    #[error("node {node} has negative score {score}; coreness needs non-negative scores")]
    NegativeScore { node: usize, score: i64 },
    #[error("survival level {0} is outside (0, 1)")]
    SurvivalOutOfRange(f64),
    #[error("degree bins do not cover observed degree {0}")]
    BinsDoNotCover(usize),
    #[error("{what} has length {actual}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
}

/// Per-node coreness, indexed by dense node index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorenessVector {
    values: Vec<u32>,
    k_max: u32,
}

impl CorenessVector {
    pub fn from_values(values: Vec<u32>) -> Self {
        let k_max = values.iter().copied().max().unwrap_or(0);
        CorenessVector { values, k_max }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, node: usize) -> u32 {
        self.values[node]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Number of nodes in each shell `k_s = k`, for `k` in `0..=k_max`.
    pub fn shell_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; self.k_max as usize + 1];
        for &k in &self.values {
            sizes[k as usize] += 1;
        }
        sizes
    }

    /// Dense indices with coreness at least `k`, ascending.
    pub fn members_at_least(&self, k: u32) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] >= k).collect()
    }

    /// Lower median of the coreness distribution (`None` when empty).
    pub fn median(&self) -> Option<u32> {
        if self.values.is_empty() {
            return None;
        }
        let sizes = self.shell_sizes();
        let rank = (self.values.len() as u64).div_ceil(2);
        let mut seen = 0;
        for (k, &c) in sizes.iter().enumerate() {
            seen += c;
            if seen >= rank {
                return Some(k as u32);
            }
        }
        unreachable!("ranks are bounded by the node count")
    }
}

/// Classic coreness by bucket-ordered peeling, O(n + m).
///
/// Nodes are kept in an array sorted by current degree, with the start of
/// every degree bucket tracked so a neighbor can be moved one bucket down
/// by a single swap.
pub fn decompose(graph: &Graph) -> CorenessVector {
    let n = graph.node_count();
    if n == 0 {
        return CorenessVector::default();
    }
    let mut deg: Vec<u32> = (0..n).map(|i| graph.degree(i) as u32).collect();
    let max_deg = *deg.iter().max().unwrap() as usize;

    let mut bin = vec![0u32; max_deg + 1];
    for &d in &deg {
        bin[d as usize] += 1;
    }
    let mut start = 0u32;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0u32; n];
    let mut vert = vec![0u32; n];
    for v in 0..n {
        let d = deg[v] as usize;
        pos[v] = bin[d];
        vert[bin[d] as usize] = v as u32;
        bin[d] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;

    for i in 0..n {
        let v = vert[i] as usize;
        let dv = deg[v];
        for &u in graph.neighbors(v) {
            let u = u as usize;
            let du = deg[u];
            if du > dv {
                let pu = pos[u];
                let pw = bin[du as usize];
                let w = vert[pw as usize] as usize;
                if u != w {
                    pos[u] = pw;
                    vert[pu as usize] = w as u32;
                    pos[w] = pu;
                    vert[pw as usize] = u as u32;
                }
                bin[du as usize] += 1;
                deg[u] = du - 1;
            }
        }
    }
    CorenessVector::from_values(deg)
}

/// The current sub-network `H` while peeling.
pub struct SubgraphView<'a> {
    alive: &'a [bool],
    internal_degree: &'a [u32],
}

impl SubgraphView<'_> {
    pub fn contains(&self, node: usize) -> bool {
        self.alive[node]
    }

    /// Number of neighbors of `node` that are still in `H`.
    pub fn internal_degree(&self, node: usize) -> u32 {
        self.internal_degree[node]
    }
}

/// A node benefit `B_i(H)` evaluated against the current sub-network.
///
/// Peeling re-evaluates a node only when one of its neighbors leaves, so a
/// score may depend on the node and its neighborhood but nothing further
/// away. Scores must never increase as nodes are removed.
pub trait PropertyFunction {
    fn score(&self, graph: &Graph, node: usize, view: &SubgraphView<'_>) -> i64;

    fn is_monotone(&self) -> bool {
        true
    }
}

/// `B_i(H)` = number of neighbors inside `H`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Degree;

impl PropertyFunction for Degree {
    fn score(&self, _: &Graph, node: usize, view: &SubgraphView<'_>) -> i64 {
        view.internal_degree(node) as i64
    }
}

/// `B_i(H)` = `benefit` × neighbors inside `H`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledDegree(pub i64);

impl PropertyFunction for ScaledDegree {
    fn score(&self, _: &Graph, node: usize, view: &SubgraphView<'_>) -> i64 {
        self.0 * view.internal_degree(node) as i64
    }
}

/// A score that ignores the network.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub i64);

impl PropertyFunction for Constant {
    fn score(&self, _: &Graph, _: usize, _: &SubgraphView<'_>) -> i64 {
        self.0
    }
}

/// Sum of edge weights towards neighbors inside `H`.
///
/// Weights are aligned with the graph's neighbor array, so each undirected
/// edge carries one weight per direction.
#[derive(Debug, Clone)]
pub struct WeightedDegree {
    weights: Vec<i64>,
}

impl WeightedDegree {
    pub fn new(graph: &Graph, weights: Vec<i64>) -> Result<Self, CoreError> {
        if weights.len() != graph.neighbor_array().len() {
            return Err(CoreError::LengthMismatch {
                what: "weight array",
                expected: graph.neighbor_array().len(),
                actual: weights.len(),
            });
        }
        Ok(WeightedDegree { weights })
    }

    pub fn uniform(graph: &Graph, weight: i64) -> Self {
        WeightedDegree {
            weights: vec![weight; graph.neighbor_array().len()],
        }
    }
}

impl PropertyFunction for WeightedDegree {
    fn is_monotone(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0)
    }

    fn score(&self, graph: &Graph, node: usize, view: &SubgraphView<'_>) -> i64 {
        let lo = graph.offsets()[node] as usize;
        graph
            .neighbors(node)
            .iter()
            .enumerate()
            .filter(|&(_, &v)| view.contains(v as usize))
            .map(|(k, _)| self.weights[lo + k])
            .sum()
    }
}

struct Peeler<'g, P: ?Sized> {
    graph: &'g Graph,
    prop: &'g P,
    alive: Vec<bool>,
    internal: Vec<u32>,
    score: Vec<i64>,
}

impl<'g, P: PropertyFunction + ?Sized> Peeler<'g, P> {
    fn new(graph: &'g Graph, prop: &'g P) -> Result<Self, CoreError> {
        if !prop.is_monotone() {
            return Err(CoreError::DeclaredNonMonotone);
        }
        let n = graph.node_count();
        let mut peeler = Peeler {
            graph,
            prop,
            alive: vec![true; n],
            internal: (0..n).map(|i| graph.degree(i) as u32).collect(),
            score: vec![0; n],
        };
        for i in 0..n {
            peeler.score[i] = peeler.evaluate(i);
        }
        Ok(peeler)
    }

    fn evaluate(&self, node: usize) -> i64 {
        let view = SubgraphView {
            alive: &self.alive,
            internal_degree: &self.internal,
        };
        self.prop.score(self.graph, node, &view)
    }

    /// Removes `v` and refreshes the scores of its surviving neighbors,
    /// calling `changed` for each neighbor whose score moved.
    fn remove(
        &mut self,
        v: usize,
        mut changed: impl FnMut(usize, i64),
    ) -> Result<(), CoreError> {
        self.alive[v] = false;
        let graph = self.graph;
        for &u in graph.neighbors(v) {
            self.internal[u as usize] -= 1;
        }
        for &u in graph.neighbors(v) {
            let u = u as usize;
            if !self.alive[u] {
                continue;
            }
            let after = self.evaluate(u);
            let before = self.score[u];
            if after > before {
                return Err(CoreError::NotMonotone {
                    node: u,
                    before,
                    after,
                });
            }
            if after != before {
                self.score[u] = after;
                changed(u, after);
            }
        }
        Ok(())
    }
}

/// The maximal sub-network in which every node scores at least `k`,
/// as ascending dense indices.
///
/// Worklist peeling: any node scoring below `k` is removed and its
/// neighbors are re-scored, until nothing changes. Afterwards every removed
/// node is re-scored against the final sub-network; a removed node that
/// would now pass means the property was not monotone.
pub fn decompose_generalized<P: PropertyFunction + ?Sized>(
    graph: &Graph,
    prop: &P,
    k: i64,
) -> Result<Vec<usize>, CoreError> {
    let mut peeler = Peeler::new(graph, prop)?;
    let n = graph.node_count();
    let mut work: Vec<usize> = (0..n).filter(|&i| peeler.score[i] < k).collect();
    let mut removed = Vec::new();
    while let Some(v) = work.pop() {
        if !peeler.alive[v] {
            continue;
        }
        peeler.remove(v, |u, s| {
            if s < k {
                work.push(u);
            }
        })?;
        removed.push(v);
    }
    for &v in &removed {
        let now = peeler.evaluate(v);
        if now >= k {
            return Err(CoreError::NotMonotone {
                node: v,
                before: k - 1,
                after: now,
            });
        }
    }
    Ok((0..n).filter(|&i| peeler.alive[i]).collect())
}

/// Generalized coreness: for each node the largest `k` such that it belongs
/// to `decompose_generalized(graph, prop, k)`.
///
/// Repeatedly removes a node of minimum current score; the running maximum
/// of removal scores is the coreness of the removed node.
pub fn generalized_coreness<P: PropertyFunction + ?Sized>(
    graph: &Graph,
    prop: &P,
) -> Result<CorenessVector, CoreError> {
    let mut peeler = Peeler::new(graph, prop)?;
    let n = graph.node_count();
    if let Some(node) = (0..n).find(|&i| peeler.score[i] < 0) {
        return Err(CoreError::NegativeScore {
            node,
            score: peeler.score[node],
        });
    }
    let mut heap: BinaryHeap<Reverse<(i64, usize)>> =
        (0..n).map(|i| Reverse((peeler.score[i], i))).collect();
    let mut core = vec![0u32; n];
    let mut level = 0i64;
    while let Some(Reverse((s, v))) = heap.pop() {
        if !peeler.alive[v] || s != peeler.score[v] {
            continue;
        }
        level = level.max(s);
        core[v] = u32::try_from(level).unwrap_or(u32::MAX);
        peeler.remove(v, |u, after| heap.push(Reverse((after, u))))?;
    }
    Ok(CorenessVector::from_values(core))
}

/// Resilience curve: how many nodes survive each threshold `K`.
///
/// `count(K) = |{i : k_s[i] ≥ K}|`. The strict form `P(k_s > K)` is
/// [`CorenessCcdf::fraction_exceeding`], i.e. `fraction(K + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorenessCcdf {
    counts: Vec<u64>,
    total: u64,
}

/// One row of the CCDF table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfRow {
    #[serde(rename = "K")]
    pub k: u32,
    pub count: u64,
    pub fraction: f64,
}

impl CorenessCcdf {
    pub fn new(coreness: &CorenessVector) -> Self {
        let mut counts = coreness.shell_sizes();
        for k in (0..counts.len().saturating_sub(1)).rev() {
            counts[k] += counts[k + 1];
        }
        CorenessCcdf {
            counts,
            total: coreness.len() as u64,
        }
    }

    /// Builds a CCDF directly from counts at `K = 0, 1, ...`.
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.first().copied().unwrap_or(0);
        let counts = if counts.is_empty() { vec![0] } else { counts };
        CorenessCcdf { counts, total }
    }

    pub fn k_max(&self) -> u32 {
        (self.counts.len() - 1) as u32
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Counts for `K = 0..=k_max`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Nodes with coreness at least `k`; zero past `k_max`.
    pub fn count(&self, k: u32) -> u64 {
        self.counts.get(k as usize).copied().unwrap_or(0)
    }

    pub fn fraction(&self, k: u32) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(k) as f64 / self.total as f64
        }
    }

    /// `P(k_s > k)`.
    pub fn fraction_exceeding(&self, k: u32) -> f64 {
        self.fraction(k + 1)
    }

    pub fn rows(&self) -> Vec<CcdfRow> {
        (0..=self.k_max())
            .map(|k| CcdfRow {
                k,
                count: self.count(k),
                fraction: self.fraction(k),
            })
            .collect()
    }
}

pub fn ccdf(coreness: &CorenessVector) -> CorenessCcdf {
    CorenessCcdf::new(coreness)
}

/// Smallest threshold `K` at which at most `survival` of the nodes remain.
///
/// Returns `k_max + 1` when even the top shell holds more than that share.
pub fn catastrophic_k(ccdf: &CorenessCcdf, survival: f64) -> Result<u32, CoreError> {
    if !(survival > 0.0 && survival < 1.0) {
        return Err(CoreError::SurvivalOutOfRange(survival));
    }
    Ok((0..=ccdf.k_max())
        .find(|&k| ccdf.fraction(k) <= survival)
        .unwrap_or(ccdf.k_max() + 1))
}

/// How degrees are grouped for [`coreness_by_degree`].
#[derive(Debug, Clone, PartialEq)]
pub enum DegreeBins {
    /// `[0, w), [w, 2w), ...`
    Linear { width: usize },
    /// Bin edges at `ceil(10^(j / per_decade))`, after a `[0, 1)` bin.
    Logarithmic { per_decade: usize },
    /// Sorted edges `e_0 < e_1 < ...`; bin `j` is `[e_j, e_{j+1})`.
    Explicit(Vec<usize>),
}

impl DegreeBins {
    /// Concrete bin edges covering `0..=max_degree`.
    pub fn edges(&self, max_degree: usize) -> Vec<usize> {
        match self {
            DegreeBins::Linear { width } => {
                let width = (*width).max(1);
                (0..=max_degree / width + 1).map(|j| j * width).collect()
            }
            DegreeBins::Logarithmic { per_decade } => {
                let per_decade = (*per_decade).max(1) as f64;
                let mut edges = vec![0usize, 1];
                let mut j = 1;
                while *edges.last().unwrap() <= max_degree {
                    let e = 10f64.powf(j as f64 / per_decade).ceil() as usize;
                    if e > *edges.last().unwrap() {
                        edges.push(e);
                    }
                    j += 1;
                }
                edges
            }
            DegreeBins::Explicit(edges) => edges.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats {
    pub mean: f64,
    pub min: u32,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: u32,
}

/// Coreness summary for one degree bin `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeBinSummary {
    pub lo: usize,
    pub hi: usize,
    /// Middle value of the bin, used as its plotting key.
    pub mid: f64,
    pub count: usize,
    pub stats: Option<BoxStats>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[u32], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] as f64 + (h - lo as f64) * (sorted[hi] as f64 - sorted[lo] as f64)
}

/// Spread of coreness among nodes of similar degree.
pub fn coreness_by_degree(
    graph: &Graph,
    coreness: &CorenessVector,
    bins: &DegreeBins,
) -> Result<Vec<DegreeBinSummary>, CoreError> {
    let n = graph.node_count();
    if coreness.len() != n {
        return Err(CoreError::LengthMismatch {
            what: "coreness vector",
            expected: n,
            actual: coreness.len(),
        });
    }
    let edges = bins.edges(graph.max_degree());
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); edges.len().saturating_sub(1)];
    for i in 0..n {
        let d = graph.degree(i);
        let slot = edges.partition_point(|&e| e <= d);
        if slot == 0 || slot == edges.len() {
            return Err(CoreError::BinsDoNotCover(d));
        }
        groups[slot - 1].push(coreness.get(i));
    }
    Ok(groups
        .into_iter()
        .enumerate()
        .map(|(j, mut ks)| {
            let (lo, hi) = (edges[j], edges[j + 1]);
            ks.sort_unstable();
            let stats = (!ks.is_empty()).then(|| BoxStats {
                mean: ks.iter().map(|&k| k as f64).sum::<f64>() / ks.len() as f64,
                min: ks[0],
                q1: quantile(&ks, 0.25),
                median: quantile(&ks, 0.5),
                q3: quantile(&ks, 0.75),
                max: *ks.last().unwrap(),
            });
            DegreeBinSummary {
                lo,
                hi,
                mid: (lo + hi - 1) as f64 / 2.0,
                count: ks.len(),
                stats,
            }
        })
        .collect())
}
