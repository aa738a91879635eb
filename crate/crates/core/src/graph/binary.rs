//! Versioned little-endian binary cache.
//!
//! Layout:
//!
//! ```text
//! magic    b"CLG" + version byte (b'1')
//! n        u64
//! m        u64
//! flags    u32   bit 0 set: neighbors stored as u64, else u32
//! offsets  u64 x (n + 1)
//! neighbors u32|u64 x 2m
//! id_map   u64 x n
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Graph, GraphError};

pub const FORMAT_VERSION: u8 = b'1';
const MAGIC_PREFIX: &[u8; 3] = b"CLG";
const HEADER_LEN: u64 = 4 + 8 + 8 + 4;
const FLAG_WIDE_NEIGHBORS: u32 = 1;

/// Writes `graph` to `path`, replacing any existing file.
pub fn save_binary(graph: &Graph, path: &Path) -> Result<(), GraphError> {
    let mut w = BufWriter::with_capacity(1 << 20, File::create(path)?);
    write_binary(graph, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Serializes `graph` into any writer.
pub fn write_binary<W: Write>(graph: &Graph, w: &mut W) -> Result<(), GraphError> {
    w.write_all(MAGIC_PREFIX)?;
    w.write_all(&[FORMAT_VERSION])?;
    w.write_all(&(graph.node_count() as u64).to_le_bytes())?;
    w.write_all(&(graph.edge_count() as u64).to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for &o in graph.offsets() {
        w.write_all(&o.to_le_bytes())?;
    }
    for &v in graph.neighbor_array() {
        w.write_all(&v.to_le_bytes())?;
    }
    for &id in graph.id_map() {
        w.write_all(&id.to_le_bytes())?;
    }
    Ok(())
}

/// Loads a graph written by [`save_binary`].
///
/// The file length is checked against the header before any array is
/// allocated, so a truncated cache fails with [`GraphError::Truncated`]
/// and never yields a partial graph.
pub fn load_binary(path: &Path) -> Result<Graph, GraphError> {
    let file = File::open(path)?;
    let actual = file.metadata()?.len();
    let mut r = BufReader::with_capacity(1 << 20, file);

    let mut magic = [0u8; 4];
    read_or_truncated(&mut r, &mut magic, HEADER_LEN, actual)?;
    if &magic[..3] != MAGIC_PREFIX {
        return Err(GraphError::BadMagic);
    }
    if magic[3] != FORMAT_VERSION {
        return Err(GraphError::VersionMismatch {
            found: magic[3],
            expected: FORMAT_VERSION,
        });
    }
    let mut header = [0u8; 20];
    read_or_truncated(&mut r, &mut header, HEADER_LEN, actual)?;
    let n = u64::from_le_bytes(header[0..8].try_into().unwrap());
    let m = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let flags = u32::from_le_bytes(header[16..20].try_into().unwrap());
    if flags & !FLAG_WIDE_NEIGHBORS != 0 {
        return Err(GraphError::Corrupt(format!("unknown header flags {flags:#x}")));
    }
    let wide = flags & FLAG_WIDE_NEIGHBORS != 0;
    let width = if wide { 8 } else { 4 };

    let expected = n
        .checked_add(1)
        .and_then(|x| x.checked_mul(8))
        .and_then(|x| x.checked_add(m.checked_mul(2)?.checked_mul(width)?))
        .and_then(|x| x.checked_add(n.checked_mul(8)?))
        .and_then(|x| x.checked_add(HEADER_LEN))
        .ok_or_else(|| GraphError::Corrupt("header sizes overflow".into()))?;
    if actual < expected {
        return Err(GraphError::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(GraphError::Corrupt(format!(
            "{} trailing bytes after graph data",
            actual - expected
        )));
    }
    if n > u32::MAX as u64 + 1 {
        return Err(GraphError::TooManyNodes(n));
    }

    let offsets = read_u64s(&mut r, (n + 1) as usize)?;
    let neighbors = if wide {
        read_u64s(&mut r, (2 * m) as usize)?
            .into_iter()
            .map(|v| u32::try_from(v).map_err(|_| GraphError::Corrupt("neighbor index overflow".into())))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        read_u32s(&mut r, (2 * m) as usize)?
    };
    let id_map = read_u64s(&mut r, n as usize)?;
    Graph::from_parts(offsets, neighbors, id_map)
}

fn read_or_truncated<R: Read>(
    r: &mut R,
    buf: &mut [u8],
    expected: u64,
    actual: u64,
) -> Result<(), GraphError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => GraphError::Truncated { expected, actual },
        _ => e.into(),
    })
}

fn read_u64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<u64>, GraphError> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_u32s<R: Read>(r: &mut R, count: usize) -> Result<Vec<u32>, GraphError> {
    let mut bytes = vec![0u8; count * 4];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
