//! Text edge-list ingestion.
//!
//! Ingestion reads the input twice. The first pass collects the set of
//! external ids (which fixes the dense numbering); the second pass emits
//! both directions of every non-loop edge as packed dense pairs. Pairs are
//! sorted and deduplicated in memory, or, once they exceed
//! [`IngestOptions::max_in_memory_pairs`], spilled as sorted runs to
//! temporary files and k-way merged straight into the CSR arrays.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::str::FromStr;

use super::build::{check_node_count, csr_from_sorted, pack};
use super::{Graph, GraphError};
use crate::exec::{self, Execution};

/// Supported text layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// `u v` per line, whitespace separated.
    PairPerLine,
    /// `u: v1,v2,...` per line; the neighbor list may be empty.
    AdjacencyList,
}

impl FromStr for EdgeListFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pairs" | "pair-per-line" | "edgelist" => Ok(EdgeListFormat::PairPerLine),
            "adjacency" | "adjacency-list" | "adj" => Ok(EdgeListFormat::AdjacencyList),
            other => Err(format!("unknown edge list format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// Directed pairs held in memory before spilling a sorted run to disk.
    pub max_in_memory_pairs: usize,
    pub exec: Execution,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            max_in_memory_pairs: 1 << 28,
            exec: Execution::default(),
        }
    }
}

/// Reads an edge list and returns its canonical graph.
pub fn ingest_edge_list(path: &Path, format: EdgeListFormat) -> Result<Graph, GraphError> {
    ingest_edge_list_with(path, format, &IngestOptions::default())
}

pub fn ingest_edge_list_with(
    path: &Path,
    format: EdgeListFormat,
    options: &IngestOptions,
) -> Result<Graph, GraphError> {
    // Pass 1: the id universe.
    let mut ids: Vec<u64> = Vec::new();
    let mut compacted_len = 0usize;
    for_each_record(path, format, |rec| {
        match rec {
            Record::Node(u) => ids.push(u),
            Record::Edge(u, v) => {
                ids.push(u);
                ids.push(v);
            }
        }
        if ids.len() > 2 * compacted_len + (1 << 20) {
            exec::sort_unstable(options.exec, &mut ids);
            ids.dedup();
            compacted_len = ids.len();
        }
    })?;
    exec::sort_unstable(options.exec, &mut ids);
    ids.dedup();
    ids.shrink_to_fit();
    check_node_count(ids.len())?;
    let n = ids.len();

    // Pass 2: directed dense pairs.
    let budget = options.max_in_memory_pairs.max(2);
    let mut pairs: Vec<u64> = Vec::new();
    let mut runs: Vec<File> = Vec::new();
    let mut spill_error: Option<io::Error> = None;
    for_each_record(path, format, |rec| {
        let Record::Edge(u, v) = rec else { return };
        if u == v || spill_error.is_some() {
            return;
        }
        let a = ids.binary_search(&u).expect("id seen in pass 1") as u32;
        let b = ids.binary_search(&v).expect("id seen in pass 1") as u32;
        pairs.push(pack(a, b));
        pairs.push(pack(b, a));
        if pairs.len() >= budget {
            match spill_run(&mut pairs, options.exec) {
                Ok(run) => runs.push(run),
                Err(e) => spill_error = Some(e),
            }
        }
    })?;
    if let Some(e) = spill_error {
        return Err(e.into());
    }

    let (offsets, neighbors) = if runs.is_empty() {
        exec::sort_unstable(options.exec, &mut pairs);
        let capacity = pairs.len();
        csr_from_sorted(n, pairs, capacity)
    } else {
        if !pairs.is_empty() {
            runs.push(spill_run(&mut pairs, options.exec)?);
        }
        drop(pairs);
        merge_runs(n, runs)?
    };
    Ok(Graph::from_parts_unchecked(offsets, neighbors, ids))
}

enum Record {
    Node(u64),
    Edge(u64, u64),
}

fn for_each_record<F>(path: &Path, format: EdgeListFormat, mut f: F) -> Result<(), GraphError>
where
    F: FnMut(Record),
{
    let mut reader = BufReader::with_capacity(1 << 20, File::open(path)?);
    let mut line = String::new();
    let mut line_no = 0u64;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        line_no += 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fail = |token: &str, reason: &'static str| GraphError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            token: token.to_string(),
            reason,
        };
        match format {
            EdgeListFormat::PairPerLine => {
                let mut tokens = text.split_ascii_whitespace();
                let (Some(a), Some(b)) = (tokens.next(), tokens.next()) else {
                    return Err(fail(text, "expected two node ids"));
                };
                if let Some(extra) = tokens.next() {
                    return Err(fail(extra, "unexpected third field"));
                }
                let u = parse_id(a).map_err(|r| fail(a, r))?;
                let v = parse_id(b).map_err(|r| fail(b, r))?;
                f(Record::Edge(u, v));
            }
            EdgeListFormat::AdjacencyList => {
                let Some((head, tail)) = text.split_once(':') else {
                    return Err(fail(text, "expected `id: neighbors`"));
                };
                let head = head.trim();
                let u = parse_id(head).map_err(|r| fail(head, r))?;
                f(Record::Node(u));
                for tok in tail.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    let v = parse_id(tok).map_err(|r| fail(tok, r))?;
                    f(Record::Edge(u, v));
                }
            }
        }
    }
}

fn parse_id(token: &str) -> Result<u64, &'static str> {
    token
        .parse::<u64>()
        .map_err(|_| "not a non-negative 64-bit integer")
}

fn spill_run(pairs: &mut Vec<u64>, exec: Execution) -> io::Result<File> {
    exec::sort_unstable(exec, pairs);
    pairs.dedup();
    let mut file = tempfile::tempfile()?;
    {
        let mut w = BufWriter::with_capacity(1 << 20, &mut file);
        for p in pairs.iter() {
            w.write_all(&p.to_le_bytes())?;
        }
        w.flush()?;
    }
    file.seek(SeekFrom::Start(0))?;
    pairs.clear();
    Ok(file)
}

struct RunReader {
    inner: BufReader<File>,
}

impl RunReader {
    fn next(&mut self) -> io::Result<Option<u64>> {
        let mut buf = [0u8; 8];
        match self.inner.read_exact(&mut buf) {
            Ok(()) => Ok(Some(u64::from_le_bytes(buf))),
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Ok(None),
            Err(e) => Err(e),
        }
    }
}

fn merge_runs(n: usize, runs: Vec<File>) -> Result<(Vec<u64>, Vec<u32>), GraphError> {
    let mut capacity = 0usize;
    let mut readers = Vec::with_capacity(runs.len());
    for run in runs {
        capacity += (run.metadata()?.len() / 8) as usize;
        readers.push(RunReader {
            inner: BufReader::with_capacity(1 << 16, run),
        });
    }
    let mut heap = BinaryHeap::with_capacity(readers.len());
    for (i, r) in readers.iter_mut().enumerate() {
        if let Some(v) = r.next()? {
            heap.push(Reverse((v, i)));
        }
    }
    let mut err = None;
    let stream = std::iter::from_fn(|| {
        let Reverse((v, i)) = heap.pop()?;
        match readers[i].next() {
            Ok(Some(next)) => heap.push(Reverse((next, i))),
            Ok(None) => {}
            Err(e) => err = Some(e),
        }
        Some(v)
    });
    let csr = csr_from_sorted(n, stream, capacity);
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(csr)
}
