//! Row types of every CSV file, shared by the writers and the report reader.

use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct CorenessRow {
    pub external_id: u64,
    pub degree: u64,
    pub coreness: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CcdfRow {
    #[serde(rename = "K")]
    pub k: u32,
    pub count: u64,
    pub fraction: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DegreeBinRow {
    pub lo: usize,
    pub hi: usize,
    pub mid: f64,
    pub count: usize,
    pub mean: Option<f64>,
    pub min: Option<u32>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub max: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResilienceRow {
    pub dataset: String,
    #[serde(rename = "K")]
    pub k: u32,
    pub count: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatastrophicRow {
    pub dataset: String,
    pub survival: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub k_max: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EquilibriumRow {
    pub external_id: u64,
    pub friends: u64,
    pub utility: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnravelRow {
    pub t: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub remaining: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRow {
    pub t: f64,
    pub observed: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Deserialize)]
pub struct ObservedRow {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlfitRow {
    pub dataset: String,
    pub deg_min: u64,
    pub alpha: f64,
    pub n_tail: u64,
    #[serde(rename = "D")]
    pub d: f64,
    pub p: f64,
    pub range_decades: f64,
    pub tail_pct: f64,
}

#[derive(Debug, Serialize)]
pub struct TrialRow<'a> {
    pub dataset: &'a str,
    pub trial: usize,
    #[serde(rename = "D")]
    pub d: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct TimesliceRow {
    pub t: usize,
    pub slice_start: u64,
    pub slice_end: u64,
    pub n: u64,
    pub e_in: u64,
    pub e_p: u64,
    pub e_f: u64,
    pub avg_deg_in: Option<f64>,
    pub P: Option<f64>,
    pub F: Option<f64>,
    pub baseline_P: Option<f64>,
    pub baseline_F: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtRiskRow {
    pub t: usize,
    pub fraction: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}
