//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the decomposition code under test; the oracles
//! only read adjacency lists.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use resilience_core::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn adjacency(graph: &Graph) -> Vec<HashSet<usize>> {
    (0..graph.node_count())
        .map(|i| graph.neighbors(i).iter().map(|&v| v as usize).collect())
        .collect()
}

/// Survivors of repeatedly deleting every node with fewer than `k` living
/// neighbors, until nothing changes.
pub fn prune_to_core(graph: &Graph, k: usize) -> Vec<bool> {
    let adj = adjacency(graph);
    let mut alive = vec![true; adj.len()];
    loop {
        let doomed: Vec<usize> = (0..adj.len())
            .filter(|&i| alive[i] && adj[i].iter().filter(|&&j| alive[j]).count() < k)
            .collect();
        if doomed.is_empty() {
            return alive;
        }
        for i in doomed {
            alive[i] = false;
        }
    }
}

pub fn prune_size(graph: &Graph, k: usize) -> usize {
    prune_to_core(graph, k).iter().filter(|&&a| a).count()
}

/// Coreness by pruning at every k in turn.
pub fn brute_force_coreness(graph: &Graph) -> Vec<u32> {
    let n = graph.node_count();
    let mut core = vec![0u32; n];
    let mut k = 1;
    loop {
        let alive = prune_to_core(graph, k);
        if !alive.iter().any(|&a| a) {
            return core;
        }
        for i in 0..n {
            if alive[i] {
                core[i] = k as u32;
            }
        }
        k += 1;
    }
}

/// Minimum internal degree of the subgraph induced by `members`.
pub fn min_internal_degree(graph: &Graph, members: &[bool]) -> Option<usize> {
    (0..graph.node_count())
        .filter(|&i| members[i])
        .map(|i| graph.neighbors(i).iter().filter(|&&v| members[v as usize]).count())
        .min()
}

/// Closed-form Wilson score interval with an explicit z.
pub fn wilson(successes: f64, n: f64, z: f64) -> (f64, f64) {
    let p = successes / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    (center - half, center + half)
}

/// z for a two-sided 99% interval.
pub const Z99: f64 = 2.575_829_303_548_900_4;
