use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::io::{prepare_dir, read_csv, write_json, Provenance};
use crate::rows::{AtRiskRow, CatastrophicRow, PlfitRow, ResilienceRow, UnravelRow};

pub const SCHEMA_VERSION: u32 = 1;

/// Files the report is assembled from, in the order they are listed.
pub const ARTIFACTS: [&str; 7] = [
    "summary.json",
    "plfit.csv",
    "resilience.csv",
    "catastrophic.csv",
    "atrisk.csv",
    "unravel.csv",
    "fit.json",
];

#[derive(Serialize)]
struct Source {
    file: &'static str,
    seed: u64,
    command: String,
}

#[derive(Serialize)]
struct Resilience {
    curves: Vec<ResilienceRow>,
    catastrophic: Vec<CatastrophicRow>,
}

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    sources: Vec<Source>,
    summary: Value,
    powerlaw: Vec<PlfitRow>,
    resilience: Resilience,
    at_risk: Vec<AtRiskRow>,
    unravel: Vec<UnravelRow>,
    fit: Value,
}

fn read_json(path: &Path) -> Result<(Source, Value)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut value: Value =
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    let obj = value
        .as_object_mut()
        .with_context(|| format!("{} is not a JSON object", path.display()))?;
    let seed = obj.remove("seed").and_then(|v| v.as_u64());
    let command = obj.remove("command").and_then(|v| v.as_str().map(str::to_string));
    let (Some(seed), Some(command)) = (seed, command) else {
        bail!("{}: missing seed or command", path.display());
    };
    let file = ARTIFACTS
        .iter()
        .copied()
        .find(|f| path.ends_with(f))
        .expect("only known artifacts are read");
    Ok((Source { file, seed, command }, value))
}

fn csv_artifact<T: serde::de::DeserializeOwned>(
    dir: &Path,
    file: &'static str,
    sources: &mut Vec<Source>,
) -> Result<Vec<T>> {
    let (prov, rows) = read_csv(&dir.join(file))?;
    sources.push(Source {
        file,
        seed: prov.seed,
        command: prov.command.to_string(),
    });
    Ok(rows)
}

pub fn report(input: &Path, out: &Path, seed: u64) -> Result<()> {
    let missing: Vec<&str> = ARTIFACTS
        .iter()
        .copied()
        .filter(|f| !input.join(f).is_file())
        .collect();
    if !missing.is_empty() {
        bail!(
            "missing artifacts in {}: {}",
            input.display(),
            missing.join(", ")
        );
    }
    let mut sources = Vec::new();
    let (src, summary) = read_json(&input.join("summary.json"))?;
    sources.push(src);
    let powerlaw = csv_artifact(input, "plfit.csv", &mut sources)?;
    let curves = csv_artifact(input, "resilience.csv", &mut sources)?;
    let catastrophic = csv_artifact(input, "catastrophic.csv", &mut sources)?;
    let at_risk = csv_artifact(input, "atrisk.csv", &mut sources)?;
    let unravel = csv_artifact(input, "unravel.csv", &mut sources)?;
    let (src, fit) = read_json(&input.join("fit.json"))?;
    sources.push(src);

    let report = Report {
        schema_version: SCHEMA_VERSION,
        sources,
        summary,
        powerlaw,
        resilience: Resilience {
            curves,
            catastrophic,
        },
        at_risk,
        unravel,
        fit,
    };
    prepare_dir(out)?;
    let prov = Provenance {
        seed,
        command: "report",
    };
    write_json(&out.join("report.json"), prov, &report)?;
    println!("wrote {}", out.join("report.json").display());
    Ok(())
}
