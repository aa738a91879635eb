use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use resilience_core::graph::{ingest_edge_list, load_binary};
use resilience_core::{EdgeListFormat, Graph};

use crate::Format;

/// Seed and command echoed into every output file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Provenance<'a> {
    pub seed: u64,
    pub command: &'a str,
}

const TAG: &str = "# resilience";

impl Provenance<'_> {
    fn header(&self) -> String {
        format!("{TAG} seed={} command={}\n", self.seed, self.command)
    }
}

pub fn load_graph(path: &Path, format: Format) -> Result<Graph> {
    let format = match format {
        Format::Auto => {
            let mut magic = [0u8; 3];
            let n = File::open(path)
                .and_then(|mut f| f.read(&mut magic))
                .with_context(|| format!("cannot open {}", path.display()))?;
            if n == 3 && &magic == b"CLG" {
                Format::Binary
            } else {
                Format::Pairs
            }
        }
        other => other,
    };
    let graph = match format {
        Format::Binary => load_binary(path),
        Format::Pairs => ingest_edge_list(path, EdgeListFormat::PairPerLine),
        Format::Adjacency => ingest_edge_list(path, EdgeListFormat::AdjacencyList),
        Format::Auto => unreachable!(),
    };
    graph.with_context(|| format!("cannot load {}", path.display()))
}

/// Dataset label of an input path: its file stem.
pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub fn write_csv<T: Serialize>(
    path: &Path,
    prov: Provenance,
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let ctx = || format!("cannot write {}", path.display());
    let mut file = BufWriter::new(File::create(path).with_context(ctx)?);
    file.write_all(prov.header().as_bytes()).with_context(ctx)?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row).with_context(ctx)?;
    }
    w.flush().with_context(ctx)?;
    Ok(())
}

/// Writes `{ "seed", "command", ...body }` as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, prov: Provenance, body: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        #[serde(flatten)]
        prov: Provenance<'a>,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut text = serde_json::to_string_pretty(&Doc { prov, body })?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Reads a CSV written by [`write_csv`], returning its provenance and rows.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<(Provenance<'static>, Vec<T>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (first, body) = text.split_once('\n').unwrap_or((&text, ""));
    let prov = parse_header(first).with_context(|| format!("{}: missing provenance line", path.display()))?;
    let rows = csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("cannot parse {}", path.display()))?;
    Ok((prov, rows))
}

/// Reads a plain CSV whose lines starting with `#` are comments.
pub fn read_plain_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("cannot parse {}", path.display()))
}

fn parse_header(line: &str) -> Option<Provenance<'static>> {
    let rest = line.strip_prefix(TAG)?.trim();
    let mut seed = None;
    let mut command = None;
    for field in rest.split_whitespace() {
        match field.split_once('=')? {
            ("seed", v) => seed = v.parse().ok(),
            ("command", v) => command = Some(intern(v)?),
            _ => {}
        }
    }
    Some(Provenance {
        seed: seed?,
        command: command?,
    })
}

fn intern(command: &str) -> Option<&'static str> {
    crate::commands::NAMES.iter().copied().find(|&c| c == command)
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

pub fn require_single(inputs: &[PathBuf], command: &str) -> Result<PathBuf> {
    match inputs {
        [one] => Ok(one.clone()),
        _ => bail!("{command} takes exactly one --input, got {}", inputs.len()),
    }
}
