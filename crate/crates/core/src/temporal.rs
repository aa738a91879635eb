//! Id-time analysis.
//!
//! Sequential signup ids act as a clock. The network is cut into slices of
//! consecutive ids; every edge seen from a slice is internal, towards the
//! past (an earlier slice) or towards the future (a later slice), and its
//! length is the id difference of its endpoints.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::graph::{ExternalId, Graph};
use crate::kcore::CorenessVector;

#[derive(Debug, Error, PartialEq)]
pub enum TemporalError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("slice width must be positive")]
    InvalidWidth,
    #[error("external id {0} lies before the slicing origin")]
    IdBeforeOrigin(u64),
    #[error("coreness vector has {actual} entries for {expected} nodes")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("confidence level {0} is outside (0, 1)")]
    InvalidConfidence(f64),
}

/// `|id(u) − id(v)|`.
pub fn edge_distance(u: ExternalId, v: ExternalId) -> u64 {
    u.0.abs_diff(v.0)
}

/// Slices `[origin + t·width, origin + (t+1)·width)`; the last one is cut
/// at the largest id present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SliceSpec {
    width: u64,
    origin: u64,
}

impl SliceSpec {
    pub fn new(width: u64, origin: u64) -> Result<Self, TemporalError> {
        if width == 0 {
            return Err(TemporalError::InvalidWidth);
        }
        Ok(SliceSpec { width, origin })
    }

    /// Slices starting at the smallest id of `graph`.
    pub fn for_graph(graph: &Graph, width: u64) -> Result<Self, TemporalError> {
        let origin = graph.id_map().first().copied().ok_or(TemporalError::EmptyGraph)?;
        Self::new(width, origin)
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn origin(&self) -> u64 {
        self.origin
    }

    /// Number of slices needed to reach `max_id`.
    pub fn slice_count(&self, max_id: u64) -> usize {
        if max_id < self.origin {
            0
        } else {
            ((max_id - self.origin) / self.width + 1) as usize
        }
    }

    /// `[start, end)` of slice `t`, with `end` clipped to `max_id + 1`.
    pub fn bounds(&self, t: usize, max_id: u64) -> (u64, u64) {
        let start = self.origin + t as u64 * self.width;
        let end = (start + self.width).min(max_id + 1);
        (start, end)
    }
}

/// Expected mean past/future distance under uniformly random linking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaselineMode {
    /// Conditional on the observed ids: a slice's past edges have expected
    /// length `mean(slice ids) − mean(earlier ids)`, its future edges
    /// `mean(later ids) − mean(slice ids)`.
    #[default]
    Exact,
    /// Slice-center approximation: with the center at offset `x` of an id
    /// range `R`, past distance `x / 2` and future distance `(R − x) / 2`.
    SliceCenter,
}

/// Slice-center baseline `(x / 2, (R − x) / 2)` for slice `t`, where `x` is
/// the slice center and `R = id_end − origin` the id range.
pub fn random_baseline(spec: &SliceSpec, id_end: u64, t: usize) -> (f64, f64) {
    let (start, end) = spec.bounds(t, id_end.saturating_sub(1));
    let x = (start + end) as f64 / 2.0 - spec.origin as f64;
    let range = (id_end - spec.origin) as f64;
    (x / 2.0, (range - x) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceStats {
    pub t: usize,
    pub start: u64,
    pub end: u64,
    pub node_count: u64,
    pub internal_edges: u64,
    pub past_edges: u64,
    pub future_edges: u64,
    /// `2 |E_in| / |N|`; missing for an empty slice.
    pub internal_avg_degree: Option<f64>,
    /// Mean id distance over past edges; missing when there are none.
    pub mean_past_distance: Option<f64>,
    pub mean_future_distance: Option<f64>,
    pub baseline_past: Option<f64>,
    pub baseline_future: Option<f64>,
}

/// Dense-index range of each slice (dense order is id order).
fn slice_ranges(graph: &Graph, spec: &SliceSpec) -> Result<Vec<(usize, usize)>, TemporalError> {
    let ids = graph.id_map();
    let (&first, &last) = ids.first().zip(ids.last()).ok_or(TemporalError::EmptyGraph)?;
    if first < spec.origin {
        return Err(TemporalError::IdBeforeOrigin(first));
    }
    let count = spec.slice_count(last);
    let mut ranges = Vec::with_capacity(count);
    let mut lo = 0;
    for t in 0..count {
        let (_, end) = spec.bounds(t, last);
        let hi = lo + ids[lo..].partition_point(|&id| id < end);
        ranges.push((lo, hi));
        lo = hi;
    }
    Ok(ranges)
}

#[derive(Default)]
struct SliceTally {
    internal_twice: u64,
    past: u64,
    future: u64,
    past_dist: u128,
    future_dist: u128,
    id_sum: u128,
}

/// Per-slice connectivity: node counts, internal/past/future edge counts,
/// mean past and future distances and their random-linking baselines.
pub fn slice_stats(
    graph: &Graph,
    spec: &SliceSpec,
    mode: BaselineMode,
    exec: Execution,
) -> Result<Vec<SliceStats>, TemporalError> {
    let ranges = slice_ranges(graph, spec)?;
    let ids = graph.id_map();
    let last_id = *ids.last().unwrap();
    let tallies = exec::map_indexed(exec, ranges.len(), |t| {
        let (lo, hi) = ranges[t];
        let mut tally = SliceTally::default();
        for i in lo..hi {
            let id = ids[i];
            tally.id_sum += id as u128;
            for &j in graph.neighbors(i) {
                let j = j as usize;
                if j < lo {
                    tally.past += 1;
                    tally.past_dist += (id - ids[j]) as u128;
                } else if j >= hi {
                    tally.future += 1;
                    tally.future_dist += (ids[j] - id) as u128;
                } else {
                    tally.internal_twice += 1;
                }
            }
        }
        tally
    });

    let total_nodes = graph.node_count() as u128;
    let total_id_sum: u128 = tallies.iter().map(|t| t.id_sum).sum();
    let mut before_nodes = 0u128;
    let mut before_sum = 0u128;
    let mut out = Vec::with_capacity(ranges.len());
    for (t, (tally, &(lo, hi))) in tallies.iter().zip(&ranges).enumerate() {
        let (start, end) = spec.bounds(t, last_id);
        let n = (hi - lo) as u128;
        let after_nodes = total_nodes - before_nodes - n;
        let after_sum = total_id_sum - before_sum - tally.id_sum;
        let (baseline_past, baseline_future) = match mode {
            BaselineMode::SliceCenter => {
                let (p, f) = random_baseline(spec, last_id + 1, t);
                (Some(p), Some(f))
            }
            BaselineMode::Exact if n > 0 => {
                let here = tally.id_sum as f64 / n as f64;
                (
                    (before_nodes > 0).then(|| here - before_sum as f64 / before_nodes as f64),
                    (after_nodes > 0).then(|| after_sum as f64 / after_nodes as f64 - here),
                )
            }
            BaselineMode::Exact => (None, None),
        };
        let mean = |sum: u128, count: u64| (count > 0).then(|| sum as f64 / count as f64);
        out.push(SliceStats {
            t,
            start,
            end,
            node_count: n as u64,
            internal_edges: tally.internal_twice / 2,
            past_edges: tally.past,
            future_edges: tally.future,
            internal_avg_degree: (n > 0).then(|| tally.internal_twice as f64 / n as f64),
            mean_past_distance: mean(tally.past_dist, tally.past),
            mean_future_distance: mean(tally.future_dist, tally.future),
            baseline_past,
            baseline_future,
        });
        before_nodes += n;
        before_sum += tally.id_sum;
    }
    Ok(out)
}

/// Wilson score interval for `successes` out of `n` at the given two-sided
/// confidence level.
pub fn wilson_interval(successes: u64, n: u64, confidence: f64) -> (f64, f64) {
    assert!(n > 0, "Wilson interval needs at least one trial");
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtRiskPoint {
    pub t: usize,
    pub start: u64,
    pub end: u64,
    pub node_count: u64,
    pub at_risk: u64,
    /// Missing for an empty slice.
    pub fraction: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtRiskSeries {
    /// Nodes with coreness strictly below this are at risk.
    pub threshold: u32,
    pub confidence: f64,
    pub points: Vec<AtRiskPoint>,
}

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Share of each slice whose coreness is below `threshold` (the median
/// coreness when `None`), with Wilson intervals.
pub fn at_risk_series(
    graph: &Graph,
    coreness: &CorenessVector,
    spec: &SliceSpec,
    threshold: Option<u32>,
    confidence: f64,
) -> Result<AtRiskSeries, TemporalError> {
    if coreness.len() != graph.node_count() {
        return Err(TemporalError::LengthMismatch {
            expected: graph.node_count(),
            actual: coreness.len(),
        });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(TemporalError::InvalidConfidence(confidence));
    }
    let ranges = slice_ranges(graph, spec)?;
    let threshold = threshold.unwrap_or_else(|| coreness.median().unwrap_or(0));
    let last_id = *graph.id_map().last().unwrap();
    let points = ranges
        .iter()
        .enumerate()
        .map(|(t, &(lo, hi))| {
            let (start, end) = spec.bounds(t, last_id);
            let n = (hi - lo) as u64;
            let at_risk = coreness.values()[lo..hi].iter().filter(|&&k| k < threshold).count() as u64;
            let (fraction, ci_low, ci_high) = if n == 0 {
                (None, None, None)
            } else {
                let (lo, hi) = wilson_interval(at_risk, n, confidence);
                (Some(at_risk as f64 / n as f64), Some(lo), Some(hi))
            };
            AtRiskPoint {
                t,
                start,
                end,
                node_count: n,
                at_risk,
                fraction,
                ci_low,
                ci_high,
            }
        })
        .collect();
    Ok(AtRiskSeries {
        threshold,
        confidence,
        points,
    })
}
