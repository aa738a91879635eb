//! Rational stay/leave model and departure cascades.
//!
//! A user pays a constant cost `c` and earns `b` per friend who stays, so
//! staying pays off exactly when the number of staying friends exceeds
//! `c / b`. The resulting equilibrium network is the k-core at
//! `K = floor(c / b) + 1`. Letting `K` rise over time unravels the network
//! shell by shell; [`unravel`] tracks how many users remain.

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::kcore::{decompose_generalized, CoreError, CorenessCcdf, CorenessVector, ScaledDegree};

#[derive(Debug, Error, PartialEq)]
pub enum EquilibriumError {
    #[error("cost and benefit must both be positive (got c={cost}, b={benefit})")]
    InvalidEnvironment { cost: u64, benefit: u64 },
    #[error("invalid unraveling schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid calibration reference points: {0}")]
    InvalidReference(String),
    #[error("only {0} aligned points; at least 2 are needed")]
    TooFewAlignedPoints(usize),
    #[error("observed series has zero variance over the aligned points")]
    ZeroVariance,
}

/// Per-period participation cost and per-friend benefit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Environment {
    cost: u64,
    benefit: u64,
}

impl Environment {
    pub fn new(cost: u64, benefit: u64) -> Result<Self, EquilibriumError> {
        if cost == 0 || benefit == 0 {
            return Err(EquilibriumError::InvalidEnvironment { cost, benefit });
        }
        Ok(Environment { cost, benefit })
    }

    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn benefit(&self) -> u64 {
        self.benefit
    }

    /// `K = floor(c / b) + 1`, the fewest friends that make staying pay.
    pub fn threshold(&self) -> u32 {
        u32::try_from(self.cost / self.benefit + 1).unwrap_or(u32::MAX)
    }

    /// `U = b · friends − c`.
    pub fn utility(&self, friends: u64) -> i128 {
        self.benefit as i128 * friends as i128 - self.cost as i128
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub threshold: u32,
    /// Staying users, ascending dense indices.
    pub members: Vec<usize>,
    /// Utility of each member, aligned with `members`.
    pub utilities: Vec<i128>,
}

impl EquilibriumResult {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn membership(n: usize, members: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in members {
        mask[i] = true;
    }
    mask
}

fn friends_inside(graph: &Graph, mask: &[bool], node: usize) -> u64 {
    graph
        .neighbors(node)
        .iter()
        .filter(|&&v| mask[v as usize])
        .count() as u64
}

/// The equilibrium network: every user whose coreness reaches `K`.
pub fn equilibrium_network(
    graph: &Graph,
    coreness: &CorenessVector,
    env: Environment,
) -> EquilibriumResult {
    let threshold = env.threshold();
    let members = coreness.members_at_least(threshold);
    let mask = membership(graph.node_count(), &members);
    let utilities = members
        .iter()
        .map(|&i| env.utility(friends_inside(graph, &mask, i)))
        .collect();
    EquilibriumResult {
        threshold,
        members,
        utilities,
    }
}

/// The same member set computed by peeling with `B_i = b · N_i` against
/// `B_i > c`, without going through coreness.
pub fn equilibrium_by_peeling(graph: &Graph, env: Environment) -> Result<Vec<usize>, CoreError> {
    let b = i64::try_from(env.benefit()).unwrap_or(i64::MAX);
    let c = i64::try_from(env.cost()).unwrap_or(i64::MAX - 1);
    decompose_generalized(graph, &ScaledDegree(b), c + 1)
}

/// Outcome of the no-unilateral-deviation check.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EquilibriumReport {
    /// Members whose utility from staying is not positive: `(node, utility)`.
    pub would_leave: Vec<(usize, i128)>,
    /// Non-members who would earn positive utility by joining.
    pub would_join: Vec<(usize, i128)>,
}

impl EquilibriumReport {
    pub fn passed(&self) -> bool {
        self.would_leave.is_empty() && self.would_join.is_empty()
    }
}

/// Checks that no member wants to leave and no outsider wants to join.
///
/// Utilities are recomputed from the graph; `result.utilities` is not
/// trusted.
pub fn verify_equilibrium(
    graph: &Graph,
    result: &EquilibriumResult,
    env: Environment,
) -> EquilibriumReport {
    let mask = membership(graph.node_count(), &result.members);
    let mut report = EquilibriumReport::default();
    for node in 0..graph.node_count() {
        let u = env.utility(friends_inside(graph, &mask, node));
        if mask[node] && u <= 0 {
            report.would_leave.push((node, u));
        } else if !mask[node] && u > 0 {
            report.would_join.push((node, u));
        }
    }
    report
}

/// Rising threshold `K(t) = K0 + floor(rate · (t − t0))` for `t ≥ t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnravelSchedule {
    pub k0: u32,
    /// Threshold increase per unit of time.
    pub rate: f64,
    pub t0: f64,
}

// Absorbs rounding when rate · Δt lands on an integer, e.g. 6 · (64 / 6).
const FLOOR_SLACK: f64 = 1e-9;

impl UnravelSchedule {
    pub fn new(k0: u32, rate: f64, t0: f64) -> Result<Self, EquilibriumError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(EquilibriumError::InvalidSchedule(format!(
                "rate must be positive and finite, got {rate}"
            )));
        }
        if !t0.is_finite() {
            return Err(EquilibriumError::InvalidSchedule("t0 must be finite".into()));
        }
        Ok(UnravelSchedule { k0, rate, t0 })
    }

    /// Threshold in force at time `t`; `K0` before the schedule starts.
    pub fn threshold_at(&self, t: f64) -> u32 {
        if t <= self.t0 {
            return self.k0;
        }
        let steps = (self.rate * (t - self.t0) + FLOOR_SLACK).floor();
        (self.k0 as f64 + steps).min(u32::MAX as f64) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnravelPoint {
    pub t: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub remaining: u64,
    pub fraction: f64,
}

/// Remaining users at `t0, t0 + step, ...` up to `t0 + horizon`.
pub fn unravel(
    ccdf: &CorenessCcdf,
    schedule: &UnravelSchedule,
    horizon: f64,
    step: f64,
) -> Result<Vec<UnravelPoint>, EquilibriumError> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(EquilibriumError::InvalidSchedule(format!(
            "horizon must be non-negative, got {horizon}"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(EquilibriumError::InvalidSchedule(format!(
            "step must be positive, got {step}"
        )));
    }
    let steps = (horizon / step + FLOOR_SLACK).floor() as u64;
    Ok((0..=steps)
        .map(|i| {
            let t = schedule.t0 + i as f64 * step;
            let k = schedule.threshold_at(t);
            UnravelPoint {
                t,
                k,
                remaining: ccdf.count(k),
                fraction: ccdf.fraction(k),
            }
        })
        .collect())
}

/// Fits a schedule through two `(time, threshold)` reference points.
pub fn calibrate_schedule(
    ref_a: (f64, u32),
    ref_b: (f64, u32),
) -> Result<UnravelSchedule, EquilibriumError> {
    let (ta, ka) = ref_a;
    let (tb, kb) = ref_b;
    if !(ta.is_finite() && tb.is_finite()) || tb <= ta {
        return Err(EquilibriumError::InvalidReference(format!(
            "reference times must increase (got {ta} then {tb})"
        )));
    }
    if kb <= ka {
        return Err(EquilibriumError::InvalidReference(format!(
            "threshold must rise between references (got {ka} then {kb})"
        )));
    }
    UnravelSchedule::new(ka, (kb - ka) as f64 / (tb - ta), ta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignedPoint {
    pub t: f64,
    pub observed: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub r_squared: f64,
    pub points: Vec<AlignedPoint>,
}

/// Coefficient of determination of `predicted` against `observed`.
///
/// Each observed point is paired with the nearest predicted timestamp when
/// it lies within `tolerance`; unpaired observations are dropped.
pub fn fit_quality(
    predicted: &[(f64, f64)],
    observed: &[(f64, f64)],
    tolerance: f64,
) -> Result<FitReport, EquilibriumError> {
    let mut pred = predicted.to_vec();
    pred.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points = Vec::new();
    for &(t, obs) in observed {
        let at = pred.partition_point(|p| p.0 < t);
        let nearest = [at.checked_sub(1), (at < pred.len()).then_some(at)]
            .into_iter()
            .flatten()
            .min_by(|&i, &j| (pred[i].0 - t).abs().total_cmp(&(pred[j].0 - t).abs()));
        if let Some(i) = nearest {
            if (pred[i].0 - t).abs() <= tolerance + FLOOR_SLACK {
                points.push(AlignedPoint {
                    t,
                    observed: obs,
                    predicted: pred[i].1,
                    residual: obs - pred[i].1,
                });
            }
        }
    }
    if points.len() < 2 {
        return Err(EquilibriumError::TooFewAlignedPoints(points.len()));
    }
    let mean = points.iter().map(|p| p.observed).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|p| (p.observed - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(EquilibriumError::ZeroVariance);
    }
    let ss_res: f64 = points.iter().map(|p| p.residual.powi(2)).sum();
    Ok(FitReport {
        r_squared: 1.0 - ss_res / ss_tot,
        points,
    })
}

/// Expresses a remaining-user count as a percentage of the users with
/// coreness at least 1 (everyone with a friend).
pub fn percent_of_connected(ccdf: &CorenessCcdf, remaining: u64) -> f64 {
    let base = ccdf.count(1);
    if base == 0 {
        0.0
    } else {
        100.0 * remaining as f64 / base as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::{from_edges, GraphBuilder};
    use crate::kcore::{ccdf, decompose};

    fn k4_with_pendants() -> Graph {
        from_edges([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (0, 4), (4, 5), (2, 6)]).unwrap()
    }

    #[test]
    fn threshold_arithmetic() {
        assert_eq!(Environment::new(2, 1).unwrap().threshold(), 3);
        assert_eq!(Environment::new(1, 10).unwrap().threshold(), 1);
        assert_eq!(Environment::new(7, 2).unwrap().threshold(), 4);
        assert!(Environment::new(0, 1).is_err());
        assert!(Environment::new(1, 0).is_err());
    }

    #[test]
    fn k4_equilibrium() {
        let g = k4_with_pendants();
        let env = Environment::new(2, 1).unwrap();
        let r = equilibrium_network(&g, &decompose(&g), env);
        assert_eq!(r.threshold, 3);
        assert_eq!(r.members, vec![0, 1, 2, 3]);
        assert_eq!(r.utilities, vec![1; 4]);
        assert!(verify_equilibrium(&g, &r, env).passed());
        assert_eq!(equilibrium_by_peeling(&g, env).unwrap(), r.members);
    }

    #[test]
    fn cheap_environment_keeps_everyone_with_a_friend() {
        let g = GraphBuilder::new().with_nodes([99]).with_edges([(1, 2), (2, 3)]).build().unwrap();
        let env = Environment::new(1, 10).unwrap();
        let r = equilibrium_network(&g, &decompose(&g), env);
        assert_eq!(r.members, vec![0, 1, 2]);
    }

    #[test]
    fn cycle_unravels_completely() {
        let g = generators::cycle(8);
        let env = Environment::new(2, 1).unwrap();
        let r = equilibrium_network(&g, &decompose(&g), env);
        assert!(r.is_empty());
        assert!(verify_equilibrium(&g, &r, env).passed());
    }

    #[test]
    fn enlarged_member_set_fails() {
        let g = k4_with_pendants();
        let env = Environment::new(2, 1).unwrap();
        let mut r = equilibrium_network(&g, &decompose(&g), env);
        r.members.push(4);
        let report = verify_equilibrium(&g, &r, env);
        assert!(!report.passed());
        assert_eq!(report.would_leave, vec![(4, -1)]);
    }

    #[test]
    fn shrunken_member_set_fails_join_check() {
        let g = generators::complete(5);
        let env = Environment::new(1, 1).unwrap();
        let mut r = equilibrium_network(&g, &decompose(&g), env);
        r.members.pop();
        let report = verify_equilibrium(&g, &r, env);
        assert_eq!(report.would_join, vec![(4, 3)]);
    }

    #[test]
    fn unravel_indexes_counts() {
        let cc = CorenessCcdf::from_counts(vec![100, 100, 60, 30, 10, 1]);
        let s = UnravelSchedule::new(1, 1.0, 0.0).unwrap();
        let got: Vec<u64> = unravel(&cc, &s, 7.0, 1.0).unwrap().iter().map(|p| p.remaining).collect();
        assert_eq!(got, vec![100, 60, 30, 10, 1, 0, 0, 0]);
    }

    #[test]
    fn negligible_rate_is_constant() {
        let cc = CorenessCcdf::from_counts(vec![100, 100, 60, 30, 10, 1]);
        let s = UnravelSchedule::new(2, 1e-9, 0.0).unwrap();
        let pts = unravel(&cc, &s, 10.0, 1.0).unwrap();
        assert!(pts.iter().all(|p| p.remaining == 60 && p.k == 2));
    }

    #[test]
    fn schedule_validation() {
        assert!(UnravelSchedule::new(1, 0.0, 0.0).is_err());
        assert!(UnravelSchedule::new(1, f64::NAN, 0.0).is_err());
        let cc = CorenessCcdf::from_counts(vec![3, 2]);
        let s = UnravelSchedule::new(1, 1.0, 0.0).unwrap();
        assert!(unravel(&cc, &s, 1.0, 0.0).is_err());
        assert!(unravel(&cc, &s, -1.0, 1.0).is_err());
    }

    #[test]
    fn calibration_six_per_month() {
        let s = calibrate_schedule((0.0, 3), (64.0 / 6.0, 67)).unwrap();
        assert!((s.rate - 6.0).abs() < 1e-12);
        assert_eq!(s.k0, 3);
        assert_eq!(s.threshold_at(64.0 / 6.0), 67);

        let s = calibrate_schedule((0.0, 5), (10.0, 15)).unwrap();
        assert_eq!(s.rate, 1.0);

        assert!(calibrate_schedule((1.0, 3), (1.0, 5)).is_err());
        assert!(calibrate_schedule((2.0, 3), (1.0, 5)).is_err());
        assert!(calibrate_schedule((0.0, 5), (1.0, 5)).is_err());
    }

    #[test]
    fn calibrated_schedule_hits_second_reference() {
        let g = generators::planted_core(&mut crate::seed::rng(1, "test", 0), 25, 300, 6);
        let cc = ccdf(&decompose(&g));
        for (ta, ka, tb, kb) in [(0.0, 1, 3.0, 7), (2.5, 2, 9.75, 20), (1.0, 3, 1.5, 4)] {
            let s = calibrate_schedule((ta, ka), (tb, kb)).unwrap();
            let pts = unravel(&cc, &s, tb - ta, (tb - ta) / 8.0).unwrap();
            assert_eq!(pts.last().unwrap().remaining, cc.count(kb));
        }
    }

    #[test]
    fn fit_quality_identity_and_errors() {
        let series: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 100.0 - 9.0 * i as f64)).collect();
        assert_eq!(fit_quality(&series, &series, 0.5).unwrap().r_squared, 1.0);
        let flat: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 5.0)).collect();
        assert_eq!(fit_quality(&series, &flat, 0.5).unwrap_err(), EquilibriumError::ZeroVariance);
        assert_eq!(
            fit_quality(&series, &[(0.0, 1.0), (30.0, 2.0)], 0.5).unwrap_err(),
            EquilibriumError::TooFewAlignedPoints(1)
        );
    }

    #[test]
    fn fit_quality_swamped_by_noise() {
        // Observations alternate ±A around the prediction, with A chosen so
        // that SS_res equals SS_tot of the observations.
        let predicted: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, i as f64)).collect();
        let observed: Vec<(f64, f64)> = (0..20)
            .map(|i| (i as f64, i as f64 + if i % 2 == 0 { 50.0 } else { -50.0 }))
            .collect();
        let r2 = fit_quality(&predicted, &observed, 0.5).unwrap().r_squared;
        assert!(r2 <= 0.2, "R² = {r2}");
    }

    #[test]
    fn nearest_alignment_within_tolerance() {
        let predicted = [(0.0, 10.0), (1.0, 8.0), (2.0, 6.0)];
        let observed = [(0.1, 10.0), (0.9, 8.0), (2.6, 1.0), (1.9, 6.0)];
        let rep = fit_quality(&predicted, &observed, 0.5).unwrap();
        assert_eq!(rep.points.len(), 3);
        assert_eq!(rep.r_squared, 1.0);
    }
}
