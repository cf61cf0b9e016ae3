//! The convex function `λ̄(v) = e^{-|v|} - 1 + |v|`, the maximal inequality for
//! martingales built on it, and the exit-time martingale `Y_r = u(B_{τ(r)})`.

use rayon::prelude::*;

use crate::brownian::wos_exit_point;
use crate::dd::exp_tail;
use crate::error::{domain, Result};
use crate::geom::Point;
use crate::harmonic::{hardy_integrals, HarmonicFn};
use crate::rng::{stream_id, Stream};
use crate::sphere_measure::SurfaceQuadrature;
use crate::stats::{mc_estimate, proportion, McEstimate};
use crate::tolerances::{LAMBDA_SERIES_SWITCH, MC_SIGMAS, MONOTONE_STEP};

/// Stream tag for skeleton paths.
pub const SKELETON_TAG: u16 = 0x5E;

/// `λ̄(v) = e^{-|v|} - 1 + |v|`.
///
/// Below `|v| = 1e-4` the power series `Σ_{k≥2} (-|v|)^k / k!` is summed;
/// between `1e-4` and `1` the closed form is taken with `e^{-|v|} - 1` in
/// double-double; above `1` there is no cancellation to guard against.
pub fn lambda_bar(v: f64) -> f64 {
    let a = v.abs();
    if a < LAMBDA_SERIES_SWITCH {
        lambda_bar_series(a)
    } else if a < 1.0 {
        lambda_bar_closed(a)
    } else {
        libm::expm1(-a) + a
    }
}

/// Series branch, valid for `|v| ≤ 1`.
pub fn lambda_bar_series(v: f64) -> f64 {
    let a = v.abs();
    if a == 0.0 {
        return 0.0;
    }
    exp_tail(-a, 2).to_f64()
}

/// Closed-form branch `(e^{-|v|} - 1) + |v|`, valid for `|v| ≤ 1`.
pub fn lambda_bar_closed(v: f64) -> f64 {
    let a = v.abs();
    exp_tail(-a, 1).add_f64(a).to_f64()
}

/// Values of a discrete martingale: `values[i][k]` is stage `k` of path `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSample {
    stages: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl MartingaleSample {
    /// `stages` are the (nondecreasing) times or radii of the columns.
    pub fn new(stages: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if stages.is_empty() {
            return domain("a martingale sample needs at least one stage");
        }
        if values.is_empty() {
            return domain("a martingale sample needs at least one path");
        }
        if stages.windows(2).any(|w| w[1] < w[0]) {
            return domain("stages must be nondecreasing");
        }
        if let Some(i) = values.iter().position(|row| row.len() != stages.len()) {
            return domain(format!("path {i} has the wrong number of stages"));
        }
        Ok(MartingaleSample { stages, values })
    }

    pub fn stages(&self) -> &[f64] {
        &self.stages
    }

    pub fn n_paths(&self) -> usize {
        self.values.len()
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn stage(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[k]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalReport {
    pub eps: f64,
    /// `Eλ̄(Z_n) - Eλ̄(Z₀)` from paired differences.
    pub lhs: McEstimate,
    /// `(1/6) ε³ exp(-(3/ε)(E|Z₀| ∨ E|Z_n|))` at the sample means.
    pub rhs: f64,
    /// The same with `E|Z|` raised by the margin.
    pub rhs_lower: f64,
    pub premise_holds: bool,
    /// `P(max_k |Z_k - Z₀| > ε)`.
    pub exceedance: McEstimate,
    pub bound: f64,
    /// Set only when the premise holds.
    pub conclusion_holds: Option<bool>,
}

fn log_premise_rhs(eps: f64, abs_mean: f64) -> f64 {
    (eps.powi(3) / 6.0).ln() - (3.0 / eps) * abs_mean
}

/// Checks `Eλ̄(Z_n) - Eλ̄(Z₀) < (1/6)ε³ exp(-(3/ε)(E|Z₀| ∨ E|Z_n|))`
/// with a `3σ` margin on each side, and if it holds, whether
/// `P(max_k |Z_k - Z₀| > ε) < ε` within `3σ`.
pub fn maximal_inequality_check(z: &MartingaleSample, eps: f64) -> Result<MaximalReport> {
    if !(eps > 0.0) {
        return domain(format!("eps must be positive, got {eps}"));
    }
    let last = z.n_stages() - 1;
    let diffs: Vec<f64> = z
        .values
        .iter()
        .map(|row| lambda_bar(row[last]) - lambda_bar(row[0]))
        .collect();
    let lhs = mc_estimate(&diffs)?;
    let first_abs = mc_estimate(&z.stage(0).iter().map(|v| v.abs()).collect::<Vec<_>>())?;
    let last_abs = mc_estimate(&z.stage(last).iter().map(|v| v.abs()).collect::<Vec<_>>())?;
    let rhs = log_premise_rhs(eps, first_abs.mean.max(last_abs.mean)).exp();
    let upper = |e: &McEstimate| e.mean + MC_SIGMAS * e.std_error;
    let log_rhs_lower = log_premise_rhs(eps, upper(&first_abs).max(upper(&last_abs)));
    let rhs_lower = log_rhs_lower.exp();
    // compared in logs: the right side underflows for small ε
    let lhs_upper = upper(&lhs);
    let premise_holds = lhs_upper <= 0.0 || lhs_upper.ln() < log_rhs_lower;
    let exceedance = proportion(z.values.iter().map(|row| row.iter().any(|v| (v - row[0]).abs() > eps)))?;
    let conclusion_holds = premise_holds.then_some(exceedance.mean < eps + MC_SIGMAS * exceedance.std_error);
    Ok(MaximalReport {
        eps,
        lhs,
        rhs,
        rhs_lower,
        premise_holds,
        exceedance,
        bound: eps,
        conclusion_holds,
    })
}

/// `Y_{r_1}, …, Y_{r_n}` along chained walk-on-spheres exits from the origin.
///
/// Path `i` draws from stream `stream_id(SKELETON_TAG, i)` of `seed`.
pub fn sample_y_skeleton(u: &HarmonicFn, radii: &[f64], n_paths: usize, seed: u64) -> Result<MartingaleSample> {
    if radii.is_empty() || radii[0] <= 0.0 || radii[radii.len() - 1] >= 1.0 {
        return domain("skeleton radii must lie in (0, 1)");
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return domain("skeleton radii must be strictly increasing");
    }
    if n_paths == 0 {
        return domain("skeleton needs at least one path");
    }
    let m = u.dim();
    let values = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = Stream::new(seed, stream_id(SKELETON_TAG, i));
            let mut x = Point::zeros(m);
            let mut row = Vec::with_capacity(radii.len());
            for &r in radii {
                x = wos_exit_point(&mut stream, &x, r)?;
                row.push(u.value(&x));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    MartingaleSample::new(radii.to_vec(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub radii: Vec<f64>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub i3: Vec<f64>,
    /// Most negative step of `I₁, I₂, I₃` (0 when nondecreasing).
    pub min_step: [f64; 3],
    pub max_i2: f64,
    /// `max |I₃ - (I₂ - 1 + I₁)|`.
    pub identity_residual: f64,
    /// `I₁ ≤ b₀` on the grid, when rate data declares `b₀`.
    pub within_b0: Option<bool>,
    /// All three integrals nondecreasing within tolerance.
    pub pass: bool,
}

fn min_step(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::min)
}

pub fn monotonicity_report(u: &HarmonicFn, r_grid: &[f64], quad: &SurfaceQuadrature) -> Result<MonotonicityReport> {
    if r_grid.is_empty() || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("radius grid must be nonempty and strictly increasing");
    }
    let ints = r_grid
        .iter()
        .map(|&r| hardy_integrals(u, r, quad))
        .collect::<Result<Vec<_>>>()?;
    let i1: Vec<f64> = ints.iter().map(|h| h.i1).collect();
    let i2: Vec<f64> = ints.iter().map(|h| h.i2).collect();
    let i3: Vec<f64> = ints.iter().map(|h| h.i3).collect();
    let min_step = [min_step(&i1), min_step(&i2), min_step(&i3)];
    let identity_residual = ints
        .iter()
        .map(|h| (h.i3 - (h.i2 - 1.0 + h.i1)).abs())
        .fold(0.0, f64::max);
    let max_i2 = i2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let within_b0 = u.hardy().map(|h| i1.iter().all(|&v| v <= h.b0));
    let pass = min_step.iter().all(|&s| s >= -MONOTONE_STEP);
    Ok(MonotonicityReport {
        radii: r_grid.to_vec(),
        i1,
        i2,
        i3,
        min_step,
        max_i2,
        identity_residual,
        within_b0,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinDrift {
    pub lo: f64,
    pub hi: f64,
    /// Mean of `Y_to - Y_from` over paths whose `Y_from` falls in the bin.
    pub drift: McEstimate,
    pub pass: bool,
}

/// Binned regression of `Y_to - Y_from` on quantile bins of `Y_from`;
/// each bin's mean increment should be 0 within `3σ`.
pub fn martingale_witness(z: &MartingaleSample, from: usize, to: usize, bins: usize) -> Result<Vec<BinDrift>> {
    if from >= to || to >= z.n_stages() {
        return domain("need from < to < number of stages");
    }
    if bins == 0 || z.n_paths() < 2 * bins {
        return domain("need at least two paths per bin");
    }
    let mut pairs: Vec<(f64, f64)> = z.values.iter().map(|row| (row[from], row[to] - row[from])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pairs.len();
    (0..bins)
        .map(|b| {
            let chunk = &pairs[b * n / bins..(b + 1) * n / bins];
            let incr: Vec<f64> = chunk.iter().map(|p| p.1).collect();
            let drift = mc_estimate(&incr)?;
            Ok(BinDrift {
                lo: chunk[0].0,
                hi: chunk[chunk.len() - 1].0,
                drift,
                pass: drift.covers(0.0, MC_SIGMAS),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::coordinate;

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_bar(0.0), 0.0);
        assert!((lambda_bar(1.0) - (-1f64).exp()).abs() < 1e-16);
        assert!((lambda_bar(-2.0) - ((-2f64).exp() + 1.0)).abs() < 1e-15);
        assert_eq!(lambda_bar(0.3), lambda_bar(-0.3));
    }

    #[test]
    fn small_arguments_keep_relative_accuracy() {
        // λ̄(v) = v²/2 - v³/6 + v⁴/24 + O(v⁵)
        for v in [1e-5f64, 1e-8, 1e-12, 1e-150] {
            let want = v * v / 2.0 - v * v * v / 6.0 + v.powi(4) / 24.0;
            assert!(((lambda_bar(v) - want) / want).abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let s = LAMBDA_SERIES_SWITCH;
        for v in [s, s * (1.0 - f64::EPSILON), s * (1.0 + f64::EPSILON), 0.5, 0.99] {
            let a = lambda_bar_series(v);
            let b = lambda_bar_closed(v);
            assert!(((a - b) / a).abs() <= 1e-16, "{v}: {a} vs {b}");
        }
    }

    #[test]
    fn sample_validation() {
        assert!(MartingaleSample::new(vec![], vec![vec![]]).is_err());
        assert!(MartingaleSample::new(vec![0.0], vec![]).is_err());
        assert!(MartingaleSample::new(vec![1.0, 0.0], vec![vec![0.0, 0.0]]).is_err());
        assert!(MartingaleSample::new(vec![0.0, 1.0], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn constant_martingale_satisfies_premise() {
        let z = MartingaleSample::new(vec![0.0, 1.0, 2.0], vec![vec![0.3; 3]; 100]).unwrap();
        for eps in [1e-3, 0.1, 1.0] {
            let rep = maximal_inequality_check(&z, eps).unwrap();
            assert!(rep.premise_holds);
            assert_eq!(rep.lhs.mean, 0.0);
            assert_eq!(rep.exceedance.mean, 0.0);
            assert_eq!(rep.conclusion_holds, Some(true));
        }
    }

    #[test]
    fn fair_coin_fails_premise() {
        let rows: Vec<Vec<f64>> = (0..1000)
            .map(|i| vec![0.0, if i % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
        let z = MartingaleSample::new(vec![0.0, 1.0], rows).unwrap();
        let rep = maximal_inequality_check(&z, 0.5).unwrap();
        assert!(!rep.premise_holds);
        assert!((rep.lhs.mean - (-1f64).exp()).abs() < 1e-15);
        // (1/6)(1/8)e^{-6}
        assert!((rep.rhs - (-6f64).exp() / 48.0).abs() < 1e-18);
        assert_eq!(rep.conclusion_holds, None);
    }

    #[test]
    fn skeleton_is_deterministic_and_centred() {
        let u = coordinate(2, 0);
        let a = sample_y_skeleton(&u, &[0.5, 0.9], 4000, 7).unwrap();
        let b = sample_y_skeleton(&u, &[0.5, 0.9], 4000, 7).unwrap();
        assert_eq!(a, b);
        for k in 0..2 {
            assert!(mc_estimate(&a.stage(k)).unwrap().covers(0.0, 3.0));
        }
        for (k, r) in [0.5, 0.9].iter().enumerate() {
            assert!(a.stage(k).iter().all(|v| v.abs() <= r + 1e-12));
        }
        assert!(sample_y_skeleton(&u, &[0.9, 0.5], 10, 1).is_err());
    }

    #[test]
    fn monotonicity_of_zero() {
        let q = SurfaceQuadrature::default_for(2, 1.0).unwrap();
        let rep = monotonicity_report(&HarmonicFn::zero(2), &[0.1, 0.5, 0.9], &q).unwrap();
        assert_eq!(rep.min_step, [0.0; 3]);
        assert!(rep.pass);
    }

    #[test]
    fn witness_on_exact_martingale() {
        let u = coordinate(2, 0);
        let z = sample_y_skeleton(&u, &[0.4, 0.8], 5000, 3).unwrap();
        let bins = martingale_witness(&z, 0, 1, 10).unwrap();
        assert_eq!(bins.len(), 10);
        assert!(bins.iter().filter(|b| b.pass).count() >= 9);
    }
}
