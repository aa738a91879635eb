use super::{Graph, GraphError};
use crate::exec::{self, Execution};

/// Packs a directed dense pair so that sorting packed values orders by
/// source, then target.
#[inline]
pub(crate) fn pack(u: u32, v: u32) -> u64 {
    ((u as u64) << 32) | v as u64
}

/// Builds CSR arrays from directed packed pairs sorted ascending.
/// Duplicates are collapsed; self-loops must already be absent.
pub(crate) fn csr_from_sorted<I>(n: usize, sorted: I, capacity: usize) -> (Vec<u64>, Vec<u32>)
where
    I: IntoIterator<Item = u64>,
{
    let mut offsets = vec![0u64; n + 1];
    let mut neighbors = Vec::with_capacity(capacity);
    let mut last = None;
    for p in sorted {
        if last == Some(p) {
            continue;
        }
        last = Some(p);
        let u = (p >> 32) as usize;
        offsets[u + 1] += 1;
        neighbors.push(p as u32);
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    (offsets, neighbors)
}

pub(crate) fn check_node_count(n: usize) -> Result<(), GraphError> {
    if n as u64 > u32::MAX as u64 + 1 {
        return Err(GraphError::TooManyNodes(n as u64));
    }
    Ok(())
}

/// In-memory graph construction from external-id edges.
///
/// Edges may arrive in any order, in either direction, duplicated, or as
/// self-loops; `build` canonicalizes them. Nodes added with
/// [`GraphBuilder::add_node`] are kept even when isolated.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    nodes: Vec<u64>,
    edges: Vec<(u64, u64)>,
    exec: Execution,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn add_node(&mut self, id: u64) -> &mut Self {
        self.nodes.push(id);
        self
    }

    pub fn with_nodes<I: IntoIterator<Item = u64>>(mut self, ids: I) -> Self {
        self.nodes.extend(ids);
        self
    }

    pub fn add_edge(&mut self, u: u64, v: u64) -> &mut Self {
        self.edges.push((u, v));
        self
    }

    pub fn with_edges<I: IntoIterator<Item = (u64, u64)>>(mut self, edges: I) -> Self {
        self.edges.extend(edges);
        self
    }

    pub fn build(self) -> Result<Graph, GraphError> {
        let GraphBuilder {
            mut nodes,
            edges,
            exec,
        } = self;
        nodes.reserve(edges.len() * 2);
        for &(u, v) in &edges {
            nodes.push(u);
            nodes.push(v);
        }
        exec::sort_unstable(exec, &mut nodes);
        nodes.dedup();
        nodes.shrink_to_fit();
        check_node_count(nodes.len())?;

        let dense = |id: u64| nodes.binary_search(&id).expect("id collected above") as u32;
        let mut pairs = Vec::with_capacity(edges.len() * 2);
        for (u, v) in edges {
            if u == v {
                continue;
            }
            let (a, b) = (dense(u), dense(v));
            pairs.push(pack(a, b));
            pairs.push(pack(b, a));
        }
        exec::sort_unstable(exec, &mut pairs);
        let capacity = pairs.len();
        let (offsets, neighbors) = csr_from_sorted(nodes.len(), pairs, capacity);
        Ok(Graph::from_parts_unchecked(offsets, neighbors, nodes))
    }
}

/// Builds a canonical graph from raw external-id edges.
pub fn from_edges<I: IntoIterator<Item = (u64, u64)>>(edges: I) -> Result<Graph, GraphError> {
    GraphBuilder::new().with_edges(edges).build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_duplicates_loops_and_direction() {
        let g = from_edges([(1, 2), (2, 1), (1, 1), (1, 2)]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
        g.validate().unwrap();
    }

    #[test]
    fn one_direction_is_symmetrized() {
        let g = from_edges([(5, 9)]).unwrap();
        let a = g.dense_index(super::super::ExternalId(5)).unwrap();
        let b = g.dense_index(super::super::ExternalId(9)).unwrap();
        assert_eq!(g.degree(a), 1);
        assert_eq!(g.degree(b), 1);
    }

    #[test]
    fn self_loop_only_node_is_kept_isolated() {
        let g = from_edges([(3, 3), (1, 2)]).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.degree(g.dense_index(super::super::ExternalId(3)).unwrap()), 0);
    }

    #[test]
    fn empty_builder() {
        let g = GraphBuilder::new().build().unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.offsets(), &[0]);
    }
}
