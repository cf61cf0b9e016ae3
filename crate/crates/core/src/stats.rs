//! Monte Carlo estimates and Kolmogorov-Smirnov goodness-of-fit tests.
//!
//! KS tests use the fixed asymptotic 5% critical value `1.36/√n` (one sample)
//! and `1.36·√((n_a+n_b)/(n_a n_b))` (two samples); no p-values are computed.

use crate::error::{domain, Result};
use crate::tolerances::{KS_CRITICAL_5PCT, KS_MIN_SAMPLES};

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    /// Whether `target` lies within `sigmas` standard errors of the mean.
    pub fn covers(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_error
    }
}

/// Neumaier-compensated sum of `xs` taken in ascending order.
///
/// Sorting first makes the result a function of the multiset of values, so
/// it is bit-identical under any permutation of the input.
pub fn ordered_sum(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    neumaier(&v)
}

/// Neumaier-compensated sum in the given order.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    neumaier(xs)
}

fn neumaier(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and standard error (unbiased sample variance, `sd/√n`).
pub fn mc_estimate(samples: &[f64]) -> Result<McEstimate> {
    let n = samples.len();
    if n == 0 {
        return domain("mc_estimate needs at least one sample");
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let mean = neumaier(&v) / n as f64;
    let std_error = if n > 1 {
        let sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        (neumaier(&sq) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate { mean, std_error, n })
}

/// Fraction of `flags` that are set, as an estimate with binomial standard error.
pub fn proportion(flags: impl IntoIterator<Item = bool>) -> Result<McEstimate> {
    let v: Vec<f64> = flags.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
    mc_estimate(&v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// One-sample KS test of `samples` against the continuous `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let n = samples.len();
    if n < KS_MIN_SAMPLES {
        return domain(format!("KS test needs at least {KS_MIN_SAMPLES} samples, got {n}"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / nf - f).abs()).max((f - i as f64 / nf).abs());
    }
    let statistic = d.clamp(0.0, 1.0);
    let threshold = KS_CRITICAL_5PCT / nf.sqrt();
    Ok(KsResult {
        statistic,
        threshold,
        pass: statistic < threshold,
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (na, nb) = (a.len(), b.len());
    if na < KS_MIN_SAMPLES || nb < KS_MIN_SAMPLES {
        return domain(format!(
            "KS test needs at least {KS_MIN_SAMPLES} samples per side, got {na} and {nb}"
        ));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        // advance past every copy of the smaller value so ties are handled
        let t = x[i].min(y[j]);
        while i < na && x[i] <= t {
            i += 1;
        }
        while j < nb && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let (naf, nbf) = (na as f64, nb as f64);
    let threshold = KS_CRITICAL_5PCT * ((naf + nbf) / (naf * nbf)).sqrt();
    Ok(KsResult {
        statistic: d,
        threshold,
        pass: d < threshold,
    })
}
