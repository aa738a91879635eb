//! Synthetic graph families used by tests, benches and calibration runs.
//!
//! Generated graphs label node `i` with external id `i` unless relabeled
//! with [`with_external_ids`].

use rand::seq::index;
use rand::Rng;

use crate::graph::{Graph, GraphBuilder};

fn build(n: usize, edges: Vec<(u64, u64)>) -> Graph {
    GraphBuilder::new()
        .with_nodes(0..n as u64)
        .with_edges(edges)
        .build()
        .expect("generated graphs are small enough")
}

/// Complete graph K_n.
pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n as u64 {
        for v in u + 1..n as u64 {
            edges.push((u, v));
        }
    }
    build(n, edges)
}

/// Cycle C_n (n ≥ 3).
pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "a cycle needs at least 3 nodes");
    let n64 = n as u64;
    build(n, (0..n64).map(|u| (u, (u + 1) % n64)).collect())
}

/// Path on `n` nodes, ids in path order.
pub fn path(n: usize) -> Graph {
    build(n, (1..n as u64).map(|u| (u - 1, u)).collect())
}

/// Star with a hub (id 0) and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    build(leaves + 1, (1..=leaves as u64).map(|v| (0, v)).collect())
}

/// Erdős–Rényi G(n, p) using geometric skipping, O(n + m) expected.
pub fn gnp<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Graph {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
    if p == 0.0 || n < 2 {
        return build(n, Vec::new());
    }
    if p == 1.0 {
        return complete(n);
    }
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::new();
    let (mut v, mut w) = (1i64, -1i64);
    let n = n as i64;
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            edges.push((w as u64, v as u64));
        }
    }
    build(n as usize, edges)
}

/// Uniform random graph with exactly `m` distinct edges, G(n, m).
pub fn gnm<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Graph {
    let possible = n as u128 * (n as u128).saturating_sub(1) / 2;
    assert!(m as u128 <= possible, "G(n, m) needs m ≤ n(n-1)/2");
    let mut packed: Vec<u64> = Vec::with_capacity(m);
    while packed.len() < m {
        let missing = m - packed.len();
        for _ in 0..missing + missing / 16 + 1 {
            let a = rng.random_range(0..n as u64);
            let b = rng.random_range(0..n as u64);
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                packed.push((lo << 32) | hi);
            }
        }
        packed.sort_unstable();
        packed.dedup();
        if packed.len() > m {
            // Drop a uniformly random surplus so the kept set stays uniform.
            let surplus = packed.len() - m;
            let mut drop = index::sample(rng, packed.len(), surplus).into_vec();
            drop.sort_unstable();
            let mut keep = Vec::with_capacity(m);
            let mut d = drop.into_iter().peekable();
            for (i, p) in packed.into_iter().enumerate() {
                if d.peek() == Some(&i) {
                    d.next();
                } else {
                    keep.push(p);
                }
            }
            packed = keep;
        }
    }
    build(n, packed.into_iter().map(|p| (p >> 32, p & 0xffff_ffff)).collect())
}

/// A clique of `core` nodes (ids `0..core`) plus `fringe` nodes that each
/// attach to between 1 and `max_attach` distinct earlier nodes.
///
/// Fringe coreness never exceeds `max_attach`, so for `max_attach < core - 1`
/// the maximum coreness is exactly `core - 1` and is carried by the clique.
pub fn planted_core<R: Rng + ?Sized>(
    rng: &mut R,
    core: usize,
    fringe: usize,
    max_attach: usize,
) -> Graph {
    assert!(core >= 1 && max_attach >= 1);
    let mut edges = Vec::new();
    for u in 0..core as u64 {
        for v in u + 1..core as u64 {
            edges.push((u, v));
        }
    }
    for i in core..core + fringe {
        let k = rng.random_range(1..=max_attach).min(i);
        for t in index::sample(rng, i, k) {
            edges.push((i as u64, t as u64));
        }
    }
    build(core + fringe, edges)
}

/// Copies `graph`, giving dense node `i` the external id `ids[i]`.
///
/// Dense indices of the result follow the new id order, so this is also how
/// node relabeling is expressed.
pub fn with_external_ids(graph: &Graph, ids: &[u64]) -> Graph {
    assert_eq!(ids.len(), graph.node_count());
    GraphBuilder::new()
        .with_nodes(ids.iter().copied())
        .with_edges(graph.edges().map(|(u, v)| (ids[u], ids[v])))
        .build()
        .expect("relabeling keeps the node count")
}

/// Disjoint union of graphs; ids of later parts are shifted past earlier ones.
pub fn disjoint_union(parts: &[&Graph]) -> Graph {
    let mut shift = 0u64;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for g in parts {
        let base = shift;
        nodes.extend((0..g.node_count() as u64).map(|i| base + i));
        edges.extend(g.edges().map(|(u, v)| (base + u as u64, base + v as u64)));
        shift += g.node_count() as u64;
    }
    GraphBuilder::new()
        .with_nodes(nodes)
        .with_edges(edges)
        .build()
        .expect("union of valid graphs")
}
