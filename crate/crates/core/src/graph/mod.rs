//! Immutable compressed adjacency storage for undirected simple graphs.
//!
//! Nodes carry a dense index `0..n` used by every algorithm, plus the
//! external id they had in the source data. Dense indices follow external
//! id order, so `id_map` is strictly increasing and slicing by signup order
//! is a contiguous range of dense indices.

mod binary;
mod build;
mod ingest;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub use binary::{load_binary, save_binary, write_binary, FORMAT_VERSION};
pub use build::{from_edges, GraphBuilder};
pub use ingest::{ingest_edge_list, ingest_edge_list_with, EdgeListFormat, IngestOptions};

/// Node id as it appears in the source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExternalId(pub u64);

impl fmt::Display for ExternalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One raw edge from a source file, before canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub source: ExternalId,
    pub target: ExternalId,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}: line {line}: cannot parse {token:?}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        token: String,
        reason: &'static str,
    },
    #[error("graph has {0} nodes, more than the 2^32 dense index space")]
    TooManyNodes(u64),
    #[error("not a graph cache file (bad magic)")]
    BadMagic,
    #[error("graph cache format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u8, expected: u8 },
    #[error("graph cache is truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("graph cache is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Compressed sparse row adjacency of an undirected simple graph.
///
/// Every undirected edge is stored twice, once in each endpoint's range.
/// Neighbor ranges are sorted and free of duplicates and self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    offsets: Vec<u64>,
    neighbors: Vec<u32>,
    id_map: Vec<u64>,
}

impl Graph {
    /// Assembles a graph from raw parts, checking the structural invariants.
    pub fn from_parts(
        offsets: Vec<u64>,
        neighbors: Vec<u32>,
        id_map: Vec<u64>,
    ) -> Result<Self, GraphError> {
        let graph = Graph {
            offsets,
            neighbors,
            id_map,
        };
        graph.validate().map_err(GraphError::Corrupt)?;
        Ok(graph)
    }

    pub(crate) fn from_parts_unchecked(
        offsets: Vec<u64>,
        neighbors: Vec<u32>,
        id_map: Vec<u64>,
    ) -> Self {
        debug_assert_eq!(offsets.len(), id_map.len() + 1);
        Graph {
            offsets,
            neighbors,
            id_map,
        }
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.id_map.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.id_map.is_empty()
    }

    /// Degree of a dense node index. Panics when `node >= n`.
    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        (self.offsets[node + 1] - self.offsets[node]) as usize
    }

    /// Sorted neighbor list of a dense node index.
    #[inline]
    pub fn neighbors(&self, node: usize) -> &[u32] {
        let lo = self.offsets[node] as usize;
        let hi = self.offsets[node + 1] as usize;
        &self.neighbors[lo..hi]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[u32] {
        &self.neighbors
    }

    /// Dense index → external id, strictly increasing.
    pub fn id_map(&self) -> &[u64] {
        &self.id_map
    }

    pub fn external_id(&self, node: usize) -> ExternalId {
        ExternalId(self.id_map[node])
    }

    /// External id → dense index, if the id was seen during ingestion.
    pub fn dense_index(&self, id: ExternalId) -> Option<usize> {
        self.id_map.binary_search(&id.0).ok()
    }

    /// Iterates every undirected edge once as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Whether the undirected edge `u`–`v` exists.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Number of nodes of each degree. Counts sum to `n`.
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for i in 0..self.node_count() {
            *hist.entry(self.degree(i)).or_insert(0) += 1;
        }
        hist
    }

    /// Full scan of the structural invariants: offsets shape, sorted simple
    /// neighbor ranges, symmetry and a strictly increasing id map.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.id_map.len();
        if self.offsets.len() != n + 1 {
            return Err(format!(
                "offsets has length {}, expected {}",
                self.offsets.len(),
                n + 1
            ));
        }
        if self.offsets[0] != 0 {
            return Err("offsets[0] is not 0".into());
        }
        if self.offsets[n] != self.neighbors.len() as u64 {
            return Err(format!(
                "offsets[n] = {} but neighbor array has {} entries",
                self.offsets[n],
                self.neighbors.len()
            ));
        }
        if !self.neighbors.len().is_multiple_of(2) {
            return Err("odd neighbor array length".into());
        }
        if self.offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err("offsets decrease".into());
        }
        if self.id_map.windows(2).any(|w| w[0] >= w[1]) {
            return Err("id map is not strictly increasing".into());
        }
        for u in 0..n {
            let nbrs = self.neighbors(u);
            for (k, &v) in nbrs.iter().enumerate() {
                let v = v as usize;
                if v >= n {
                    return Err(format!("node {u} has out-of-range neighbor {v}"));
                }
                if v == u {
                    return Err(format!("self-loop at node {u}"));
                }
                if k > 0 && nbrs[k - 1] as usize >= v {
                    return Err(format!("neighbors of node {u} are not sorted and unique"));
                }
                if !self.has_edge(v, u) {
                    return Err(format!("edge {u}->{v} has no reverse"));
                }
            }
        }
        Ok(())
    }
}
