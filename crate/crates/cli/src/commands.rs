use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use resilience_core::equilibrium::{
    calibrate_schedule, equilibrium_network, fit_quality, unravel, verify_equilibrium,
    Environment, UnravelSchedule,
};
use resilience_core::graph::save_binary;
use resilience_core::kcore::{catastrophic_k, ccdf, coreness_by_degree, decompose, DegreeBins};
use resilience_core::powerlaw::{fit_power_law, tail_coverage, DegreeSample};
use resilience_core::temporal::{at_risk_series, slice_stats, BaselineMode, SliceSpec};
use resilience_core::{seed, CorenessCcdf, Execution, Graph};

use crate::io::{
    dataset_name, load_graph, out_path, prepare_dir, read_plain_csv, require_single, write_csv,
    write_json, Provenance,
};
use crate::rows::*;
use crate::{Baseline, Command, Common, ScheduleArgs};

pub const NAMES: [&str; 10] = [
    "ingest",
    "kcore",
    "resilience",
    "equilibrium",
    "unravel",
    "fit",
    "plfit",
    "timeslice",
    "atrisk",
    "report",
];

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(common) => ingest(&common),
        Command::Kcore { common, bin_width } => kcore(&common, bin_width),
        Command::Resilience {
            common,
            survival,
            exceed,
        } => resilience(&common, &survival, exceed),
        Command::Equilibrium { common, c, b } => equilibrium(&common, c, b),
        Command::Unravel {
            common,
            schedule,
            step,
            horizon,
        } => unravel_cmd(&common, &schedule, step, horizon),
        Command::Fit {
            common,
            schedule,
            observed,
            step,
            tolerance,
        } => fit(&common, &schedule, &observed, step, tolerance),
        Command::Plfit {
            common,
            trials,
            emit_trials,
        } => plfit(&common, trials, emit_trials),
        Command::Timeslice {
            common,
            width,
            baseline,
        } => timeslice(&common, width, baseline),
        Command::Atrisk {
            common,
            width,
            threshold,
            confidence,
        } => atrisk(&common, width, threshold, confidence),
        Command::Report { input, out, seed } => {
            let input = input.unwrap_or_else(|| out.clone());
            crate::report::report(&input, &out, seed)
        }
    }
}

impl Common {
    fn prov(&self, command: &'static str) -> Provenance<'static> {
        Provenance {
            seed: self.seed,
            command,
        }
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn single(&self, command: &'static str) -> Result<Graph> {
        prepare_dir(&self.out)?;
        load_graph(&require_single(&self.input, command)?, self.format)
    }

    fn all(&self) -> Result<Vec<(String, Graph)>> {
        prepare_dir(&self.out)?;
        let mut graphs: Vec<(String, Graph)> = Vec::with_capacity(self.input.len());
        for path in &self.input {
            let name = dataset_name(path);
            if graphs.iter().any(|(n, _)| *n == name) {
                bail!("two inputs share the dataset name {name:?}");
            }
            graphs.push((name, load_graph(path, self.format)?));
        }
        Ok(graphs)
    }
}

#[derive(Serialize)]
struct Summary {
    input: String,
    n: usize,
    m: usize,
    max_degree: usize,
}

fn ingest(common: &Common) -> Result<()> {
    let path = require_single(&common.input, "ingest")?;
    let g = common.single("ingest")?;
    save_binary(&g, &out_path(&common.out, "graph.clg"))
        .context("cannot write graph cache")?;
    let summary = Summary {
        input: dataset_name(&path),
        n: g.node_count(),
        m: g.edge_count(),
        max_degree: g.max_degree(),
    };
    write_json(&out_path(&common.out, "summary.json"), common.prov("ingest"), &summary)?;
    println!("n={} m={} max_degree={}", summary.n, summary.m, summary.max_degree);
    Ok(())
}

fn coreness_rows<'a>(g: &'a Graph, core: &'a resilience_core::CorenessVector) -> impl Iterator<Item = CorenessRow> + 'a {
    (0..g.node_count()).map(move |i| CorenessRow {
        external_id: g.external_id(i).0,
        degree: g.degree(i) as u64,
        coreness: core.get(i),
    })
}

fn kcore(common: &Common, bin_width: Option<usize>) -> Result<()> {
    let g = common.single("kcore")?;
    let prov = common.prov("kcore");
    let core = decompose(&g);
    write_csv(&out_path(&common.out, "coreness.csv"), prov, coreness_rows(&g, &core))?;
    let curve = ccdf(&core);
    let rows = curve.rows().into_iter().map(|r| CcdfRow {
        k: r.k,
        count: r.count,
        fraction: r.fraction,
    });
    write_csv(&out_path(&common.out, "ccdf.csv"), prov, rows)?;
    if let Some(width) = bin_width {
        if width == 0 {
            bail!("--bin-width must be positive");
        }
        let bins = coreness_by_degree(&g, &core, &DegreeBins::Linear { width })?;
        let rows = bins.into_iter().map(|b| DegreeBinRow {
            lo: b.lo,
            hi: b.hi,
            mid: b.mid,
            count: b.count,
            mean: b.stats.map(|s| s.mean),
            min: b.stats.map(|s| s.min),
            q1: b.stats.map(|s| s.q1),
            median: b.stats.map(|s| s.median),
            q3: b.stats.map(|s| s.q3),
            max: b.stats.map(|s| s.max),
        });
        write_csv(&out_path(&common.out, "coreness_by_degree.csv"), prov, rows)?;
    }
    println!("k_max={}", core.k_max());
    Ok(())
}

/// Curve rows for `K = 0..=k_max + 1`; with `exceed` each row holds
/// `P(k_s > K)`.
fn curve_rows(dataset: &str, curve: &CorenessCcdf, exceed: bool) -> Vec<ResilienceRow> {
    (0..=curve.k_max() + 1)
        .map(|k| {
            let at = if exceed { k + 1 } else { k };
            ResilienceRow {
                dataset: dataset.to_string(),
                k,
                count: curve.count(at),
                fraction: curve.fraction(at),
            }
        })
        .collect()
}

fn resilience(common: &Common, survival: &[f64], exceed: bool) -> Result<()> {
    let graphs = common.all()?;
    let prov = common.prov("resilience");
    let mut curves = Vec::new();
    let mut catastrophic = Vec::new();
    for (name, g) in &graphs {
        let core = decompose(g);
        let curve = ccdf(&core);
        let file = format!("coreness_{name}.csv");
        write_csv(&out_path(&common.out, &file), prov, coreness_rows(g, &core))?;
        curves.extend(curve_rows(name, &curve, exceed));
        for &s in survival {
            let k = catastrophic_k(&curve, s)?;
            // Under the strict convention the first K with P(k_s > K) ≤ s
            // is one below the inclusive one.
            let k = if exceed { k.saturating_sub(1) } else { k };
            catastrophic.push(CatastrophicRow {
                dataset: name.clone(),
                survival: s,
                k,
                k_max: core.k_max(),
            });
        }
        println!("{name} k_max={}", core.k_max());
    }
    write_csv(&out_path(&common.out, "resilience.csv"), prov, curves)?;
    write_csv(&out_path(&common.out, "catastrophic.csv"), prov, catastrophic)?;
    Ok(())
}

#[derive(Serialize)]
struct EquilibriumDoc {
    c: u64,
    b: u64,
    threshold: u32,
    members: usize,
    stable: bool,
    would_leave: usize,
    would_join: usize,
}

fn equilibrium(common: &Common, c: u64, b: u64) -> Result<()> {
    let g = common.single("equilibrium")?;
    let prov = common.prov("equilibrium");
    let env = Environment::new(c, b)?;
    let eq = equilibrium_network(&g, &decompose(&g), env);
    let report = verify_equilibrium(&g, &eq, env);
    let mut member = vec![false; g.node_count()];
    for &i in &eq.members {
        member[i] = true;
    }
    let rows = eq.members.iter().zip(&eq.utilities).map(|(&i, &u)| EquilibriumRow {
        external_id: g.external_id(i).0,
        friends: g.neighbors(i).iter().filter(|&&v| member[v as usize]).count() as u64,
        utility: i64::try_from(u).unwrap_or(i64::MAX),
    });
    write_csv(&out_path(&common.out, "equilibrium.csv"), prov, rows)?;
    let doc = EquilibriumDoc {
        c,
        b,
        threshold: eq.threshold,
        members: eq.len(),
        stable: report.passed(),
        would_leave: report.would_leave.len(),
        would_join: report.would_join.len(),
    };
    write_json(&out_path(&common.out, "equilibrium.json"), prov, &doc)?;
    println!("K={} members={} stable={}", doc.threshold, doc.members, doc.stable);
    if !doc.stable {
        bail!("equilibrium check failed");
    }
    Ok(())
}

fn parse_reference(text: &str) -> Result<(f64, u32)> {
    let (t, k) = text
        .split_once(':')
        .with_context(|| format!("reference {text:?} is not of the form t:K"))?;
    Ok((
        t.trim().parse().with_context(|| format!("bad time in {text:?}"))?,
        k.trim().parse().with_context(|| format!("bad threshold in {text:?}"))?,
    ))
}

impl ScheduleArgs {
    fn build(&self) -> Result<UnravelSchedule> {
        if let (Some(a), Some(b)) = (&self.ref_a, &self.ref_b) {
            if self.k0.is_some() || self.rate.is_some() {
                bail!("--ref-a/--ref-b cannot be combined with --k0 or --rate");
            }
            return Ok(calibrate_schedule(parse_reference(a)?, parse_reference(b)?)?);
        }
        let k0 = match (self.k0, self.c, self.b) {
            (Some(k0), _, _) => k0,
            (None, Some(c), Some(b)) => Environment::new(c, b)?.threshold(),
            _ => bail!("give --k0, or --c and --b, or --ref-a and --ref-b"),
        };
        let rate = self.rate.context("--rate is required without --ref-a/--ref-b")?;
        Ok(UnravelSchedule::new(k0, rate, self.start)?)
    }
}

fn unravel_rows(g: &Graph, schedule: &UnravelSchedule, horizon: f64, step: f64) -> Result<Vec<UnravelRow>> {
    let curve = ccdf(&decompose(g));
    Ok(unravel(&curve, schedule, horizon, step)?
        .into_iter()
        .map(|p| UnravelRow {
            t: p.t,
            k: p.k,
            remaining: p.remaining,
            fraction: p.fraction,
        })
        .collect())
}

fn unravel_cmd(common: &Common, schedule: &ScheduleArgs, step: f64, horizon: f64) -> Result<()> {
    let g = common.single("unravel")?;
    let rows = unravel_rows(&g, &schedule.build()?, horizon, step)?;
    if let Some(last) = rows.last() {
        println!("t={} K={} remaining={}", last.t, last.k, last.remaining);
    }
    write_csv(&out_path(&common.out, "unravel.csv"), common.prov("unravel"), rows)
}

#[derive(Serialize)]
struct FitDoc {
    k0: u32,
    rate: f64,
    start: f64,
    tolerance: f64,
    r_squared: f64,
    points: usize,
}

fn fit(common: &Common, schedule: &ScheduleArgs, observed: &Path, step: f64, tolerance: Option<f64>) -> Result<()> {
    let g = common.single("fit")?;
    let prov = common.prov("fit");
    let schedule = schedule.build()?;
    let observed: Vec<ObservedRow> = read_plain_csv(observed)?;
    let observed: Vec<(f64, f64)> = observed.iter().map(|r| (r.t, r.value)).collect();
    let last = observed.iter().map(|o| o.0).fold(schedule.t0, f64::max);
    let predicted: Vec<(f64, f64)> = unravel_rows(&g, &schedule, last - schedule.t0 + step, step)?
        .iter()
        .map(|r| (r.t, r.fraction))
        .collect();
    let tolerance = tolerance.unwrap_or(step / 2.0);
    let fit = fit_quality(&predicted, &observed, tolerance)?;
    let rows = fit.points.iter().map(|p| FitRow {
        t: p.t,
        observed: p.observed,
        predicted: p.predicted,
        residual: p.residual,
    });
    write_csv(&out_path(&common.out, "fit.csv"), prov, rows)?;
    let doc = FitDoc {
        k0: schedule.k0,
        rate: schedule.rate,
        start: schedule.t0,
        tolerance,
        r_squared: fit.r_squared,
        points: fit.points.len(),
    };
    write_json(&out_path(&common.out, "fit.json"), prov, &doc)?;
    println!("r_squared={} points={}", doc.r_squared, doc.points);
    Ok(())
}

fn plfit(common: &Common, trials: usize, emit_trials: bool) -> Result<()> {
    let graphs = common.all()?;
    let prov = common.prov("plfit");
    let mut rows = Vec::new();
    let mut trial_rows = Vec::new();
    for (index, (name, g)) in graphs.iter().enumerate() {
        let degrees = (0..g.node_count()).map(|i| g.degree(i) as u64).filter(|&d| d > 0);
        let sample = DegreeSample::from_degrees(degrees)
            .with_context(|| format!("{name}: no connected nodes"))?;
        let dataset_seed = seed::derive(common.seed, "plfit", index as u64);
        let (fit, boot) = fit_power_law(&sample, trials, dataset_seed, common.exec())
            .with_context(|| format!("{name}: power-law fit failed"))?;
        let cov = tail_coverage(&sample, fit.deg_min);
        if cov.flagged() {
            eprintln!(
                "warning: {name}: tail covers {:.3}% of nodes over {:.2} decades",
                cov.tail_percent(),
                cov.range_decades
            );
        }
        if boot.excessive_failures() {
            eprintln!("warning: {name}: {} synthetic draws needed a redraw", boot.failed_draws);
        }
        if emit_trials {
            trial_rows.extend(boot.synthetic_d.iter().enumerate().map(|(trial, &d)| (index, trial, d)));
        }
        rows.push(PlfitRow {
            dataset: name.clone(),
            deg_min: fit.deg_min,
            alpha: fit.alpha,
            n_tail: fit.n_tail,
            d: fit.d,
            p: fit.p_value,
            range_decades: fit.range_decades,
            tail_pct: 100.0 * fit.tail_fraction,
        });
        println!("{name} deg_min={} alpha={:.3} p={}", fit.deg_min, fit.alpha, fit.p_value);
    }
    write_csv(&out_path(&common.out, "plfit.csv"), prov, rows)?;
    if emit_trials {
        let rows = trial_rows.iter().map(|&(i, trial, d)| TrialRow {
            dataset: &graphs[i].0,
            trial,
            d,
        });
        write_csv(&out_path(&common.out, "plfit_trials.csv"), prov, rows)?;
    }
    Ok(())
}

fn timeslice(common: &Common, width: u64, baseline: Baseline) -> Result<()> {
    let g = common.single("timeslice")?;
    let spec = SliceSpec::for_graph(&g, width)?;
    let mode = match baseline {
        Baseline::Exact => BaselineMode::Exact,
        Baseline::Center => BaselineMode::SliceCenter,
    };
    let rows = slice_stats(&g, &spec, mode, common.exec())?
        .into_iter()
        .map(|s| TimesliceRow {
            t: s.t,
            slice_start: s.start,
            slice_end: s.end,
            n: s.node_count,
            e_in: s.internal_edges,
            e_p: s.past_edges,
            e_f: s.future_edges,
            avg_deg_in: s.internal_avg_degree,
            P: s.mean_past_distance,
            F: s.mean_future_distance,
            baseline_P: s.baseline_past,
            baseline_F: s.baseline_future,
        });
    write_csv(&out_path(&common.out, "timeslice.csv"), common.prov("timeslice"), rows)
}

fn atrisk(common: &Common, width: u64, threshold: Option<u32>, confidence: f64) -> Result<()> {
    let g = common.single("atrisk")?;
    let spec = SliceSpec::for_graph(&g, width)?;
    let series = at_risk_series(&g, &decompose(&g), &spec, threshold, confidence)?;
    println!("threshold={} slices={}", series.threshold, series.points.len());
    let rows = series.points.into_iter().map(|p| AtRiskRow {
        t: p.t,
        fraction: p.fraction,
        ci_low: p.ci_low,
        ci_high: p.ci_high,
    });
    write_csv(&out_path(&common.out, "atrisk.csv"), common.prov("atrisk"), rows)
}
