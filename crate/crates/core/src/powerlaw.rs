//! Power-law hypothesis test for degree distributions.
//!
//! The tail model is the continuous approximation of a discrete power law
//! with the usual half-unit correction:
//!
//! ```text
//! P(X ≥ d) = ((d − ½) / (deg_min − ½))^(1 − α),   d ≥ deg_min
//! α̂ = 1 + n_tail / Σ ln(d_i / (deg_min − ½))
//! ```
//!
//! The KS statistic is the supremum over integers `d ≥ deg_min` of the gap
//! between the empirical tail CDF and `P(X ≤ d)`. `deg_min` is chosen to
//! minimise it, and the p-value comes from a semiparametric bootstrap.

use serde::Serialize;
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::seed;
use rand::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum PowerLawError {
    #[error("degree sample is empty")]
    EmptySample,
    #[error("degree sample contains a zero; degrees must be at least 1")]
    ZeroValue,
    #[error("deg_min must be at least 1")]
    InvalidDegMin,
    #[error("only {0} values at or above deg_min; at least 2 are needed")]
    TooFewTailPoints(u64),
    #[error("every tail value equals {0}; the exponent estimate is meaningless")]
    DegenerateTail(u64),
    #[error("no value of deg_min leaves a usable tail")]
    NoCandidate,
    #[error("bootstrap needs at least one trial")]
    NoTrials,
    #[error("bootstrap trial {trial} could not be refitted after {attempts} draws")]
    TrialFailed { trial: usize, attempts: usize },
}

/// Positive integer observations, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSample {
    values: Vec<u64>,
    distinct: Vec<u64>,
    counts: Vec<u64>,
}

impl DegreeSample {
    pub fn new(mut values: Vec<u64>) -> Result<Self, PowerLawError> {
        if values.is_empty() {
            return Err(PowerLawError::EmptySample);
        }
        if values.contains(&0) {
            return Err(PowerLawError::ZeroValue);
        }
        values.sort_unstable();
        let mut distinct: Vec<u64> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for &v in &values {
            if distinct.last() == Some(&v) {
                *counts.last_mut().unwrap() += 1;
            } else {
                distinct.push(v);
                counts.push(1);
            }
        }
        Ok(DegreeSample {
            values,
            distinct,
            counts,
        })
    }

    /// Node degrees with isolated nodes (degree 0) dropped.
    pub fn from_degrees<I: IntoIterator<Item = u64>>(degrees: I) -> Result<Self, PowerLawError> {
        Self::new(degrees.into_iter().filter(|&d| d > 0).collect())
    }

    /// From `(degree, count)` pairs; zero degrees are dropped.
    pub fn from_histogram<I: IntoIterator<Item = (u64, u64)>>(hist: I) -> Result<Self, PowerLawError> {
        let mut values = Vec::new();
        for (d, c) in hist {
            if d > 0 {
                values.extend(std::iter::repeat_n(d, c as usize));
            }
        }
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn max(&self) -> u64 {
        *self.values.last().unwrap()
    }

    /// Number of values at or above `deg_min`.
    pub fn tail_len(&self, deg_min: u64) -> u64 {
        (self.values.len() - self.values.partition_point(|&v| v < deg_min)) as u64
    }

    fn first_distinct_at_least(&self, deg_min: u64) -> usize {
        self.distinct.partition_point(|&v| v < deg_min)
    }
}

/// Model CDF `P(X ≤ d)` of the tail above `deg_min`.
pub fn model_cdf(d: u64, deg_min: u64, alpha: f64) -> f64 {
    if d < deg_min {
        return 0.0;
    }
    1.0 - ((d as f64 + 0.5) / (deg_min as f64 - 0.5)).powf(1.0 - alpha)
}

/// Draws one value from the tail model by inverse CDF.
pub fn sample_tail<R: Rng + ?Sized>(rng: &mut R, deg_min: u64, alpha: f64) -> u64 {
    let u: f64 = rng.random();
    let x = (deg_min as f64 - 0.5) * (1.0 - u).powf(-1.0 / (alpha - 1.0)) + 0.5;
    if x >= 1e18 {
        1_000_000_000_000_000_000
    } else {
        (x.floor() as u64).max(deg_min)
    }
}

fn check_tail(sample: &DegreeSample, deg_min: u64) -> Result<usize, PowerLawError> {
    if deg_min == 0 {
        return Err(PowerLawError::InvalidDegMin);
    }
    let j = sample.first_distinct_at_least(deg_min);
    let n_tail: u64 = sample.counts[j..].iter().sum();
    if n_tail < 2 {
        return Err(PowerLawError::TooFewTailPoints(n_tail));
    }
    if j + 1 == sample.distinct.len() {
        return Err(PowerLawError::DegenerateTail(sample.distinct[j]));
    }
    Ok(j)
}

/// Maximum-likelihood exponent for the tail at or above `deg_min`.
pub fn fit_alpha(sample: &DegreeSample, deg_min: u64) -> Result<f64, PowerLawError> {
    let j = check_tail(sample, deg_min)?;
    let shift = (deg_min as f64 - 0.5).ln();
    let (mut n_tail, mut log_sum) = (0.0, 0.0);
    for (&d, &c) in sample.distinct[j..].iter().zip(&sample.counts[j..]) {
        n_tail += c as f64;
        log_sum += c as f64 * ((d as f64).ln() - shift);
    }
    Ok(1.0 + n_tail / log_sum)
}

fn ks_from(sample: &DegreeSample, j: usize, deg_min: u64, alpha: f64) -> f64 {
    let distinct = &sample.distinct[j..];
    let counts = &sample.counts[j..];
    let n_tail: u64 = counts.iter().sum();
    let n_tail = n_tail as f64;
    let mut cum = 0u64;
    // Just below the first observed tail value the empirical CDF is 0.
    let mut d_max = if distinct[0] > deg_min {
        model_cdf(distinct[0] - 1, deg_min, alpha)
    } else {
        0.0
    };
    for k in 0..distinct.len() {
        cum += counts[k];
        let emp = cum as f64 / n_tail;
        d_max = d_max.max((emp - model_cdf(distinct[k], deg_min, alpha)).abs());
        // The empirical CDF stays flat up to the next observed value.
        if let Some(&next) = distinct.get(k + 1) {
            if next > distinct[k] + 1 {
                d_max = d_max.max((emp - model_cdf(next - 1, deg_min, alpha)).abs());
            }
        }
    }
    d_max
}

/// KS distance between the tail at or above `deg_min` and the model.
pub fn ks_statistic(sample: &DegreeSample, deg_min: u64, alpha: f64) -> Result<f64, PowerLawError> {
    if deg_min == 0 {
        return Err(PowerLawError::InvalidDegMin);
    }
    let j = sample.first_distinct_at_least(deg_min);
    if j == sample.distinct.len() {
        return Err(PowerLawError::TooFewTailPoints(0));
    }
    Ok(ks_from(sample, j, deg_min, alpha))
}

/// Best `(deg_min, α, D)` found by the scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub deg_min: u64,
    pub alpha: f64,
    pub d: f64,
    pub n_tail: u64,
}

/// Tails shorter than this are only considered when nothing longer fits.
pub const PREFERRED_MIN_TAIL: u64 = 10;

/// Scans every distinct value as `deg_min` and keeps the one whose fitted
/// tail has the smallest KS distance (ties go to the smaller `deg_min`).
pub fn select_deg_min(sample: &DegreeSample) -> Result<TailFit, PowerLawError> {
    select_deg_min_with(sample, Execution::Sequential)
}

pub fn select_deg_min_with(sample: &DegreeSample, exec: Execution) -> Result<TailFit, PowerLawError> {
    let k = sample.distinct.len();
    if k < 2 {
        return Err(PowerLawError::NoCandidate);
    }
    // Suffix counts and log sums make each α̂ O(1).
    let mut tail_count = vec![0u64; k + 1];
    let mut tail_log = vec![0f64; k + 1];
    for j in (0..k).rev() {
        tail_count[j] = tail_count[j + 1] + sample.counts[j];
        tail_log[j] = tail_log[j + 1] + sample.counts[j] as f64 * (sample.distinct[j] as f64).ln();
    }
    // The last distinct value always leaves a degenerate tail.
    let usable = |j: usize| j + 1 < k && tail_count[j] >= 2;
    let prefer_long = (0..k).any(|j| usable(j) && tail_count[j] >= PREFERRED_MIN_TAIL);
    let candidates: Vec<usize> = (0..k)
        .filter(|&j| usable(j) && (!prefer_long || tail_count[j] >= PREFERRED_MIN_TAIL))
        .collect();
    if candidates.is_empty() {
        return Err(PowerLawError::NoCandidate);
    }
    let fits = exec::map_indexed(exec, candidates.len(), |c| {
        let j = candidates[c];
        let deg_min = sample.distinct[j];
        let n_tail = tail_count[j];
        let alpha = 1.0 + n_tail as f64 / (tail_log[j] - n_tail as f64 * (deg_min as f64 - 0.5).ln());
        TailFit {
            deg_min,
            alpha,
            d: ks_from(sample, j, deg_min, alpha),
            n_tail,
        }
    });
    Ok(fits
        .into_iter()
        .reduce(|best, f| if f.d < best.d { f } else { best })
        .expect("candidates is non-empty"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapOutcome {
    pub p_value: f64,
    pub trials: usize,
    /// KS distance of each refitted synthetic dataset, by trial index.
    pub synthetic_d: Vec<f64>,
    /// Synthetic draws that could not be refitted and were redrawn.
    pub failed_draws: usize,
}

impl BootstrapOutcome {
    /// More than a tenth of the trials needed a redraw.
    pub fn excessive_failures(&self) -> bool {
        self.failed_draws * 10 > self.trials
    }
}

const MAX_ATTEMPTS: usize = 64;

/// Builds one synthetic dataset: each value comes from the fitted tail with
/// probability `n_tail / n`, otherwise it is resampled from the observed
/// values below `deg_min`.
pub fn synthetic_sample<R: Rng + ?Sized>(
    rng: &mut R,
    sample: &DegreeSample,
    fit: &TailFit,
) -> Result<DegreeSample, PowerLawError> {
    let n = sample.len();
    let body = &sample.values[..sample.values.partition_point(|&v| v < fit.deg_min)];
    let p_tail = fit.n_tail as f64 / n as f64;
    let values = (0..n)
        .map(|_| {
            if body.is_empty() || rng.random::<f64>() < p_tail {
                sample_tail(rng, fit.deg_min, fit.alpha)
            } else {
                body[rng.random_range(0..body.len())]
            }
        })
        .collect();
    DegreeSample::new(values)
}

/// Fraction of synthetic datasets whose refitted KS distance exceeds the
/// empirical one.
///
/// Trial `i` draws from its own stream derived from `(seed, i)`, so the
/// result does not depend on `exec`.
pub fn bootstrap_pvalue(
    sample: &DegreeSample,
    fit: &TailFit,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<BootstrapOutcome, PowerLawError> {
    if trials == 0 {
        return Err(PowerLawError::NoTrials);
    }
    let per_trial = exec::map_indexed(exec, trials, |trial| {
        let trial_seed = seed::derive(seed, "powerlaw.bootstrap", trial as u64);
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = seed::rng(trial_seed, "attempt", attempt as u64);
            let refit = synthetic_sample(&mut rng, sample, fit).and_then(|s| select_deg_min(&s));
            if let Ok(f) = refit {
                return Ok((f.d, attempt));
            }
        }
        Err(PowerLawError::TrialFailed {
            trial,
            attempts: MAX_ATTEMPTS,
        })
    });
    let mut synthetic_d = Vec::with_capacity(trials);
    let mut failed_draws = 0;
    for r in per_trial {
        let (d, retries) = r?;
        synthetic_d.push(d);
        failed_draws += retries;
    }
    let exceed = synthetic_d.iter().filter(|&&d| d > fit.d).count();
    Ok(BootstrapOutcome {
        p_value: exceed as f64 / trials as f64,
        trials,
        synthetic_d,
        failed_draws,
    })
}

/// One row of the fit table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub deg_min: u64,
    pub alpha: f64,
    pub n_tail: u64,
    pub n: u64,
    pub deg_max: u64,
    #[serde(rename = "D")]
    pub d: f64,
    pub p_value: f64,
    pub trials: usize,
    pub range_decades: f64,
    pub tail_fraction: f64,
}

/// Scan, fit and bootstrap in one call.
pub fn fit_power_law(
    sample: &DegreeSample,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<(PowerLawFit, BootstrapOutcome), PowerLawError> {
    let best = select_deg_min_with(sample, exec)?;
    let boot = bootstrap_pvalue(sample, &best, trials, seed, exec)?;
    let cov = tail_coverage(sample, best.deg_min);
    Ok((
        PowerLawFit {
            deg_min: best.deg_min,
            alpha: best.alpha,
            n_tail: best.n_tail,
            n: sample.len() as u64,
            deg_max: sample.max(),
            d: best.d,
            p_value: boot.p_value,
            trials,
            range_decades: cov.range_decades,
            tail_fraction: cov.tail_fraction,
        },
        boot,
    ))
}

/// How much of the data a tail fit speaks for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCoverage {
    /// `log10(deg_max / deg_min)`.
    pub range_decades: f64,
    /// `n_tail / n`.
    pub tail_fraction: f64,
    pub narrow_range: bool,
    pub small_tail: bool,
}

impl TailCoverage {
    /// The fit covers less than a decade or less than 1% of the data, so
    /// even an unrejected power law is anecdotal.
    pub fn flagged(&self) -> bool {
        self.narrow_range || self.small_tail
    }

    pub fn tail_percent(&self) -> f64 {
        100.0 * self.tail_fraction
    }
}

pub fn tail_coverage(sample: &DegreeSample, deg_min: u64) -> TailCoverage {
    let range_decades = (sample.max() as f64 / deg_min.max(1) as f64).log10();
    let tail_fraction = sample.tail_len(deg_min) as f64 / sample.len() as f64;
    TailCoverage {
        range_decades,
        tail_fraction,
        narrow_range: range_decades < 1.0,
        small_tail: tail_fraction < 0.01,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Inverse-CDF draws of the continuous Pareto (x_min − ½, α), rounded
    /// to the nearest integer.
    fn pareto(seed: u64, n: usize, alpha: f64, xmin: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let y = (xmin as f64 - 0.5) * (1.0 - u).powf(-1.0 / (alpha - 1.0));
                (y + 0.5).floor() as u64
            })
            .collect()
    }

    #[test]
    fn sample_validation() {
        assert_eq!(DegreeSample::new(vec![]).unwrap_err(), PowerLawError::EmptySample);
        assert_eq!(DegreeSample::new(vec![1, 0]).unwrap_err(), PowerLawError::ZeroValue);
        let s = DegreeSample::from_degrees([0, 3, 1, 0, 3]).unwrap();
        assert_eq!(s.values(), &[1, 3, 3]);
        let h = DegreeSample::from_histogram([(0, 4), (2, 3), (5, 1)]).unwrap();
        assert_eq!(h.values(), &[2, 2, 2, 5]);
    }

    #[test]
    fn alpha_recovers_pareto_exponent() {
        let s = DegreeSample::new(pareto(11, 10_000, 2.5, 5)).unwrap();
        let a = fit_alpha(&s, 5).unwrap();
        assert!((a - 2.5).abs() < 0.05, "alpha = {a}");
    }

    #[test]
    fn degenerate_and_short_tails() {
        let s = DegreeSample::new(vec![10, 10]).unwrap();
        assert_eq!(fit_alpha(&s, 10).unwrap_err(), PowerLawError::DegenerateTail(10));
        let s = DegreeSample::new(vec![3, 10]).unwrap();
        assert_eq!(fit_alpha(&s, 10).unwrap_err(), PowerLawError::TooFewTailPoints(1));
        assert_eq!(fit_alpha(&s, 0).unwrap_err(), PowerLawError::InvalidDegMin);
    }

    #[test]
    fn alpha_matches_closed_form() {
        let s = DegreeSample::new(vec![2, 3, 5, 8]).unwrap();
        let expected = 1.0 + 3.0 / [3.0f64, 5.0, 8.0].iter().map(|d| (d / 2.5).ln()).sum::<f64>();
        assert!((fit_alpha(&s, 3).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn ks_small_for_model_data() {
        let s = DegreeSample::new(pareto(5, 10_000, 2.5, 5)).unwrap();
        let a = fit_alpha(&s, 5).unwrap();
        let d = ks_statistic(&s, 5, a).unwrap();
        assert!(d < 0.02, "D = {d}");
    }

    #[test]
    fn ks_single_point_in_unit_interval() {
        let s = DegreeSample::new(vec![1, 2, 40]).unwrap();
        let d = ks_statistic(&s, 40, 3.0).unwrap();
        assert!((0.0..=1.0).contains(&d));
        assert!(ks_statistic(&s, 41, 3.0).is_err());
    }

    #[test]
    fn ks_large_for_uniform_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = DegreeSample::new((0..5000).map(|_| rng.random_range(10..=100)).collect()).unwrap();
        let d = ks_statistic(&s, 10, 3.5).unwrap();
        assert!(d > 0.3, "D = {d}");
    }

    #[test]
    fn ks_matches_brute_force_supremum() {
        let s = DegreeSample::new(vec![4, 4, 5, 9, 9, 9, 13, 40]).unwrap();
        let (deg_min, alpha) = (4, 2.2);
        let tail: Vec<u64> = s.values().to_vec();
        let mut brute: f64 = 0.0;
        for x in deg_min..=200 {
            let emp = tail.iter().filter(|&&v| v <= x).count() as f64 / tail.len() as f64;
            brute = brute.max((emp - model_cdf(x, deg_min, alpha)).abs());
        }
        assert!((ks_statistic(&s, deg_min, alpha).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn geometric_sample_fits_badly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let values: Vec<u64> = (0..5000)
            .map(|_| {
                let u: f64 = rng.random();
                1 + ((1.0 - u).ln() / 0.7f64.ln()).floor() as u64
            })
            .collect();
        let s = DegreeSample::new(values).unwrap();
        let a = fit_alpha(&s, 1).unwrap();
        assert!(a.is_finite());
        assert!(ks_statistic(&s, 1, a).unwrap() > 0.05);
    }

    #[test]
    fn scan_finds_pareto_cutoff() {
        let s = DegreeSample::new(pareto(21, 10_000, 2.5, 5)).unwrap();
        let f = select_deg_min(&s).unwrap();
        assert!(f.deg_min <= 10, "deg_min = {}", f.deg_min);
        assert!((f.alpha - 2.5).abs() < 0.1, "alpha = {}", f.alpha);
        assert_eq!(select_deg_min_with(&s, Execution::Parallel).unwrap(), f);
    }

    #[test]
    fn scan_needs_two_distinct_values() {
        let s = DegreeSample::new(vec![7, 7, 7]).unwrap();
        assert_eq!(select_deg_min(&s).unwrap_err(), PowerLawError::NoCandidate);
    }

    #[test]
    fn single_trial_pvalue_is_binary() {
        let s = DegreeSample::new(pareto(3, 2000, 2.5, 5)).unwrap();
        let f = select_deg_min(&s).unwrap();
        let b = bootstrap_pvalue(&s, &f, 1, 17, Execution::Sequential).unwrap();
        assert!(b.p_value == 0.0 || b.p_value == 1.0);
        assert!(bootstrap_pvalue(&s, &f, 0, 17, Execution::Sequential).is_err());
    }

    #[test]
    fn bootstrap_independent_of_execution() {
        let s = DegreeSample::new(pareto(8, 3000, 2.5, 5)).unwrap();
        let f = select_deg_min(&s).unwrap();
        let a = bootstrap_pvalue(&s, &f, 20, 99, Execution::Sequential).unwrap();
        let b = bootstrap_pvalue(&s, &f, 20, 99, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_pvalue(&s, &f, 20, 100, Execution::Sequential).unwrap();
        assert_ne!(a.synthetic_d, c.synthetic_d);
    }

    #[test]
    fn synthetic_tail_respects_cutoff() {
        let s = DegreeSample::new(pareto(8, 3000, 2.5, 5)).unwrap();
        let f = TailFit { deg_min: 12, alpha: 2.5, d: 0.0, n_tail: s.tail_len(12) };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let syn = synthetic_sample(&mut rng, &s, &f).unwrap();
        assert_eq!(syn.len(), s.len());
        let share = syn.tail_len(12) as f64 / syn.len() as f64;
        let expected = f.n_tail as f64 / s.len() as f64;
        assert!((share - expected).abs() < 0.03);
    }

    #[test]
    fn coverage_flags() {
        // 623 tail values spread over one decade out of 100 000.
        let mut values = vec![10u64; 100_000 - 623];
        values.extend((0..623).map(|i| 2350 + (i as u64 * (23_500 - 2350)) / 622));
        let s = DegreeSample::new(values).unwrap();
        let c = tail_coverage(&s, 2350);
        assert!((c.range_decades - 1.0).abs() < 1e-9);
        assert!((c.tail_percent() - 0.623).abs() < 1e-9);
        assert!(c.flagged() && c.small_tail && !c.narrow_range);

        let s = DegreeSample::new((1..=1000).collect()).unwrap();
        let c = tail_coverage(&s, 1);
        assert!((c.range_decades - 3.0).abs() < 1e-12);
        assert_eq!(c.tail_fraction, 1.0);
        assert!(!c.flagged());

        let mut values = vec![3u64; 995];
        values.extend([500, 800, 2000, 9000, 40000]);
        let c = tail_coverage(&DegreeSample::new(values).unwrap(), 500);
        assert!((c.tail_percent() - 0.5).abs() < 1e-12);
        assert!(c.flagged());
    }
}
