//! Rate calculus for the boundary limit of `u(B_s)` as `s ↑ τ(1)` for
//! `u ∈ h¹`, and its Monte Carlo verification.
//!
//! From rates `δ₁, δ₂` of `I₁ → b₁` and `I₂ → b₂` the radius schedule is
//! `r_q = 1 - δ₃(ε̃_q)` with `δ₃(ε) = δ₁(ε/2) ∧ δ₂(ε/2)`. Along a path, the
//! oscillation of `u(B_s)` after `τ(r_q)` should exceed `2^{-q+3}` with
//! probability below `2^{-q+4}`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::brownian::{simulate_nested_exits, tightness_n, PathConfig};
use crate::error::{domain, Error, Result};
use crate::geom::{norm, Point};
use crate::harmonic::{HarmonicFn, RateData};
use crate::stats::{mc_estimate, proportion, McEstimate};
use crate::tolerances::MC_SIGMAS;

/// Stream tag for limit-experiment paths.
pub const LIMIT_TAG: u16 = 0x11;

/// `δ₃(ε) = min(δ₁(ε/2), δ₂(ε/2))`.
pub fn delta3(rates: &RateData, eps: f64) -> f64 {
    rates.delta1(0.5 * eps).min(rates.delta2(0.5 * eps))
}

/// `γ = b₂ - 1 + b₁`.
pub fn gamma(rates: &RateData) -> f64 {
    rates.gamma()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScheduleVariant {
    /// `ε̃_q = (1/12) 2^{-q} e^{-3·2^q b₁}`
    Paper133,
    /// `ε̃_q = (1/6) 2^{-3q} e^{-3·2^q b₁}`
    PaperStep10,
    /// The smaller of the two.
    #[default]
    ConservativeMin,
}

impl ScheduleVariant {
    pub const ALL: [ScheduleVariant; 3] = [
        ScheduleVariant::Paper133,
        ScheduleVariant::PaperStep10,
        ScheduleVariant::ConservativeMin,
    ];

    /// `ε̃_q` for this variant.
    pub fn epsilon(self, q: u32, b1: f64) -> f64 {
        let decay = (-3.0 * 2f64.powi(q as i32) * b1).exp();
        let a = decay * 0.5f64.powi(q as i32) / 12.0;
        let b = decay * 0.5f64.powi(3 * q as i32) / 6.0;
        match self {
            ScheduleVariant::Paper133 => a,
            ScheduleVariant::PaperStep10 => b,
            ScheduleVariant::ConservativeMin => a.min(b),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleVariant::Paper133 => "paper-133",
            ScheduleVariant::PaperStep10 => "paper-step10",
            ScheduleVariant::ConservativeMin => "conservative-min",
        }
    }
}

impl fmt::Display for ScheduleVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScheduleVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown schedule variant {s:?}")))
    }
}

/// Radii `r_1 < … < r_{q_max}` in `(0, 1)`, stored through their gaps `1 - r_q`
/// since the later ones are often closer to 1 than `f64` resolves.
#[derive(Debug, Clone)]
pub struct RadiusSchedule {
    pub q_max: u32,
    pub variant: ScheduleVariant,
    pub rate_source: RateData,
    epsilons: Vec<f64>,
    gaps: Vec<f64>,
}

impl RadiusSchedule {
    /// `1 - r_q` for `q = 1..=q_max`.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn radii(&self) -> Vec<f64> {
        self.gaps.iter().map(|g| 1.0 - g).collect()
    }

    /// `ε̃_q` for `q = 1..=q_max`.
    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn radius(&self, q: u32) -> f64 {
        1.0 - self.gaps[q as usize - 1]
    }
}

/// `r_q = 1 - δ₃(ε̃_q)`; a gap that fails to shrink is replaced by half the
/// previous one so the radii increase strictly.
pub fn radius_schedule(rates: &RateData, q_max: u32, variant: ScheduleVariant) -> Result<RadiusSchedule> {
    if q_max < 1 {
        return domain("q_max must be at least 1");
    }
    let mut epsilons = Vec::with_capacity(q_max as usize);
    let mut gaps: Vec<f64> = Vec::with_capacity(q_max as usize);
    for q in 1..=q_max {
        let eps = variant.epsilon(q, rates.b1);
        let mut gap = delta3(rates, eps);
        if let Some(&prev) = gaps.last() {
            if gap >= prev {
                gap = 0.5 * prev;
            }
        }
        if !(gap > 0.0 && gap < 1.0) {
            return domain(format!("radius r_{q} escapes (0, 1): gap 1 - r = {gap}, ε = {eps}"));
        }
        epsilons.push(eps);
        gaps.push(gap);
    }
    Ok(RadiusSchedule {
        q_max,
        variant,
        rate_source: rates.clone(),
        epsilons,
        gaps,
    })
}

/// Per-`q` result of [`limit_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitRow {
    pub q: u32,
    pub radius: f64,
    /// Radius actually used, `min(r_q, 2 r_trunc - 1)`.
    pub effective_radius: f64,
    /// `2^{-q+3}`
    pub threshold: f64,
    /// `2^{-q+4}`
    pub bound: f64,
    pub exceedance: McEstimate,
    /// Exceedance with `V` from the boundary function, when there is one.
    pub boundary_exceedance: Option<McEstimate>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub name: String,
    pub variant: ScheduleVariant,
    pub r_trunc: f64,
    pub rows: Vec<LimitRow>,
    /// Fraction of completed paths failing any `q`.
    pub any_exceedance: McEstimate,
    pub budget: f64,
    pub budget_pass: bool,
    pub n_paths: usize,
    pub censored: usize,
    pub censoring: McEstimate,
    pub censoring_allowance: f64,
    pub censoring_pass: bool,
    /// Mean and max of `|u(B_{τ(r_trunc)}) - g(B_{τ(r_trunc)}/‖·‖)|`.
    pub truncation_gap: Option<(f64, f64)>,
    pub pass: bool,
}

struct PathResult {
    exceed: Vec<bool>,
    exceed_boundary: Option<Vec<bool>>,
    truncation_gap: Option<f64>,
}

/// Largest `2^{-k+1}` with `N_{2r,k} + 1 ≤ horizon`; 1 when no `k ≥ 1` qualifies.
pub fn censoring_allowance(r: f64, horizon: f64) -> Result<f64> {
    let mut allowance = 1.0;
    for k in 1..=40u32 {
        if (tightness_n(2.0 * r, k)? + 1) as f64 <= horizon {
            allowance = 0.5f64.powi(k as i32 - 1);
        } else {
            break;
        }
    }
    Ok(allowance)
}

/// Runs `n_paths` discretized paths from the origin to `∂D(0, r_trunc)` and
/// measures `sup_{s ∈ [τ(r_q), τ(r_trunc))} |V̂ - u(B_s)|` with `V̂ = u(B_{τ(r_trunc)})`.
///
/// Scheduled radii above `2 r_trunc - 1` are lowered to it. A smaller radius
/// only lengthens the interval the supremum runs over.
pub fn limit_experiment(
    u: &HarmonicFn,
    sched: &RadiusSchedule,
    cfg: &PathConfig,
    n_paths: usize,
    r_trunc: f64,
) -> Result<LimitReport> {
    if u.dim() != cfg.dim {
        return domain("function and path dimensions differ");
    }
    if !(r_trunc > 0.0 && r_trunc < 1.0) {
        return domain(format!("r_trunc must lie in (0, 1), got {r_trunc}"));
    }
    if n_paths == 0 {
        return domain("limit_experiment needs at least one path");
    }
    let cap = r_trunc - (1.0 - r_trunc);
    let radii = sched.radii();
    let effective: Vec<f64> = radii.iter().map(|&r| r.min(cap)).collect();
    if effective[0] <= 0.0 {
        return domain("r_trunc leaves no room for the schedule");
    }
    let mut levels: Vec<f64> = effective.clone();
    levels.dedup();
    levels.push(r_trunc);
    let level_of: Vec<usize> = effective
        .iter()
        .map(|r| levels.iter().position(|l| l == r).expect("present"))
        .collect();
    let thresholds: Vec<f64> = (1..=sched.q_max).map(|q| 0.5f64.powi(q as i32 - 3)).collect();
    let origin = Point::zeros(cfg.dim);
    let boundary = u.boundary().cloned();

    let results = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<PathResult>> {
            let run = simulate_nested_exits(&cfg.for_path(LIMIT_TAG, i), &origin, &levels, true)?;
            if !run.complete() {
                return Ok(None);
            }
            let trace = run.trace.as_ref().expect("trace requested");
            let last = run.events.last().expect("complete run");
            let v_hat = u.value(&last.exit_point);
            let tau_end = last.tau.expect("discretized");
            let v_bound = boundary.as_ref().map(|g| {
                let p = last.exit_point.as_slice();
                let n = norm(p);
                g(&p.iter().map(|c| c / n).collect::<Vec<_>>())
            });
            // u along the trace, cut at τ(r_trunc)
            let vals: Vec<(f64, f64)> = trace
                .iter()
                .take_while(|(t, _)| *t < tau_end)
                .map(|(t, x)| (t, u.eval(x)))
                .collect();
            let sup_after = |v_ref: f64, level: usize| -> f64 {
                let ev = &run.events[level];
                let t0 = ev.tau.expect("discretized");
                let start = vals.partition_point(|(t, _)| *t < t0);
                vals[start..]
                    .iter()
                    .map(|(_, v)| (v_ref - v).abs())
                    .fold((v_ref - u.value(&ev.exit_point)).abs(), f64::max)
            };
            let flags = |v_ref: f64| -> Vec<bool> {
                level_of
                    .iter()
                    .zip(&thresholds)
                    .map(|(&l, &th)| sup_after(v_ref, l) > th)
                    .collect()
            };
            Ok(Some(PathResult {
                exceed: flags(v_hat),
                exceed_boundary: v_bound.map(flags),
                truncation_gap: v_bound.map(|v| (v - v_hat).abs()),
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    let done: Vec<&PathResult> = results.iter().flatten().collect();
    let censored = n_paths - done.len();
    let censoring = proportion(results.iter().map(|r| r.is_none()))?;
    let censoring_allowance = censoring_allowance(r_trunc, cfg.horizon)?;
    let censoring_pass = censoring.mean <= censoring_allowance + MC_SIGMAS * censoring.std_error;
    if done.is_empty() {
        return domain("every path was censored; raise the horizon");
    }
    let rows: Vec<LimitRow> = (1..=sched.q_max)
        .map(|q| {
            let j = q as usize - 1;
            let exceedance = proportion(done.iter().map(|p| p.exceed[j]))?;
            let boundary_exceedance = if boundary.is_some() {
                Some(proportion(
                    done.iter().map(|p| p.exceed_boundary.as_ref().expect("boundary")[j]),
                )?)
            } else {
                None
            };
            let bound = 0.5f64.powi(q as i32 - 4);
            Ok(LimitRow {
                q,
                radius: radii[j],
                effective_radius: effective[j],
                threshold: thresholds[j],
                bound,
                exceedance,
                boundary_exceedance,
                pass: exceedance.mean <= bound + MC_SIGMAS * exceedance.std_error,
            })
        })
        .collect::<Result<_>>()?;
    let any_exceedance = proportion(done.iter().map(|p| p.exceed.iter().any(|&b| b)))?;
    let budget: f64 = rows.iter().map(|r| r.bound).sum();
    let budget_pass = any_exceedance.mean <= budget + MC_SIGMAS * any_exceedance.std_error;
    let truncation_gap = if boundary.is_some() {
        let gaps: Vec<f64> = done.iter().map(|p| p.truncation_gap.expect("boundary")).collect();
        let mean = mc_estimate(&gaps)?.mean;
        Some((mean, gaps.iter().copied().fold(0.0, f64::max)))
    } else {
        None
    };
    let pass = rows.iter().all(|r| r.pass) && budget_pass && censoring_pass;
    Ok(LimitReport {
        name: u.name().to_string(),
        variant: sched.variant,
        r_trunc,
        rows,
        any_exceedance,
        budget,
        budget_pass,
        n_paths,
        censored,
        censoring,
        censoring_allowance,
        censoring_pass,
        truncation_gap,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaCheck {
    pub eps: f64,
    pub radius: f64,
    pub gamma: f64,
    pub i3: f64,
    pub pass: bool,
}

/// `0 ≤ γ - I₃(r) < ε` at radii with `1 - r < δ₃(ε)`.
pub fn gamma_consistency(
    u: &HarmonicFn,
    eps: f64,
    fractions: &[f64],
    quad: &crate::sphere_measure::SurfaceQuadrature,
) -> Result<Vec<GammaCheck>> {
    let rates = u
        .hardy()
        .ok_or_else(|| Error::Domain(format!("{} carries no rate data", u.name())))?;
    let d = delta3(rates, eps);
    let g = rates.gamma();
    fractions
        .iter()
        .map(|&f| {
            if !(f > 0.0 && f < 1.0) {
                return domain("fractions of δ₃ must lie in (0, 1)");
            }
            let r = 1.0 - f * d;
            let i3 = crate::harmonic::hardy_integrals(u, r, quad)?.i3;
            let diff = g - i3;
            Ok(GammaCheck {
                eps,
                radius: r,
                gamma: g,
                i3,
                pass: (0.0..eps).contains(&diff),
            })
        })
        .collect()
}
