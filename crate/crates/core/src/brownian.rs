//! Brownian motion started inside a ball and stopped at the sphere.
//!
//! Two engines produce exit points. [`simulate_exit`] steps the path with
//! Gaussian increments, locates the crossing on the linear interpolant and
//! optionally applies the half-space Brownian-bridge correction between steps.
//! [`wos_exit_point`] samples the exit point exactly by rejection from the
//! Poisson kernel. The nested-radius engine behind [`simulate_nested_exits`]
//! records first crossings of several concentric spheres along one path.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::geom::{dot, norm, Point};
use crate::harmonic::kernel;
use crate::rng::{stream_id, Stream};
use crate::sphere_measure::sample_unit_direction;
use crate::stats::{ks_two_sample, mc_estimate, proportion, KsResult, McEstimate};
use crate::tolerances::{MC_SIGMAS, WOS_CENTER};

/// Stream tags of the experiments in this module.
pub const EXIT_TAG: u16 = 0xE1;
pub const REFLECTION_TAG: u16 = 0xEF;
pub const SCALED_TAG: u16 = 0x5C;
pub const UNIT_TAG: u16 = 0x51;
pub const CONTINUITY_TAG: u16 = 0xC0;
pub const WOS_TAG: u16 = 0xA0;

/// Standard normal CDF, `½ erfc(-x/√2)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(sup_{s ≤ t} B_s ≥ λ) = 2(1 - Φ(λ/√t))`.
pub fn reflection_prob(t: f64, lam: f64) -> Result<f64> {
    if !(t > 0.0 && lam > 0.0) {
        return domain(format!("reflection_prob needs t > 0 and λ > 0, got t = {t}, λ = {lam}"));
    }
    // 2(1 - Φ(a)) = erfc(a/√2), without the cancellation
    Ok(libm::erfc(lam / t.sqrt() / std::f64::consts::SQRT_2))
}

fn tightness_gap(r_tilde: f64, n: u64) -> f64 {
    2.0 * normal_cdf(r_tilde / (n as f64).sqrt()) - 1.0
}

/// Smallest integer `N ≥ 1` with `2Φ(r̃/√N) - 1 < 2^{-k}`.
pub fn tightness_n(r_tilde: f64, k: u32) -> Result<u64> {
    if !(r_tilde > 0.0 && r_tilde.is_finite()) {
        return domain(format!("r_tilde must be positive, got {r_tilde}"));
    }
    if k > 60 {
        return domain("k above 60 overflows the search range");
    }
    let target = 0.5f64.powi(k as i32);
    let holds = |n: u64| tightness_gap(r_tilde, n) < target;
    if holds(1) {
        return Ok(1);
    }
    let mut hi = 2u64;
    while !holds(hi) {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| crate::Error::Domain("tightness search overflow".into()))?;
    }
    let mut lo = hi / 2;
    // holds(hi), !holds(lo)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    pub dim: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub stream_id: u64,
    pub bridge_correction: bool,
}

impl PathConfig {
    pub fn new(dim: usize, dt: f64, horizon: f64, seed: u64) -> Result<Self> {
        let cfg = PathConfig {
            dim,
            dt,
            horizon,
            seed,
            stream_id: 0,
            bridge_correction: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return domain("dimension must be at least 1");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return domain(format!("horizon {} must be at least dt {}", self.horizon, self.dt));
        }
        Ok(())
    }

    pub fn with_bridge_correction(mut self, on: bool) -> Self {
        self.bridge_correction = on;
        self
    }

    pub fn with_stream(mut self, stream_id: u64) -> Self {
        self.stream_id = stream_id;
        self
    }

    /// The configuration of path `index` in the experiment tagged `tag`.
    pub fn for_path(&self, tag: u16, index: u64) -> Self {
        self.clone().with_stream(stream_id(tag, index))
    }

    fn stream(&self) -> Stream {
        Stream::new(self.seed, self.stream_id)
    }

    fn max_steps(&self) -> u64 {
        (self.horizon / self.dt * (1.0 + 1e-12)).floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitMethod {
    Discretized,
    WalkOnSpheres,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitEvent {
    /// Exit time; not sampled by walk-on-spheres.
    pub tau: Option<f64>,
    pub exit_point: Point,
    pub method: ExitMethod,
    pub dt_used: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExitOutcome {
    Exited(ExitEvent),
    /// The horizon ran out first.
    Censored {
        elapsed: f64,
        position: Point,
    },
}

impl ExitOutcome {
    pub fn event(&self) -> Option<&ExitEvent> {
        match self {
            ExitOutcome::Exited(e) => Some(e),
            ExitOutcome::Censored { .. } => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, ExitOutcome::Censored { .. })
    }
}

/// Grid points `(t_k, B_{t_k})` of a simulated path, in step order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    pub dim: usize,
    pub times: Vec<f64>,
    points: Vec<f64>,
}

impl PathTrace {
    fn new(dim: usize) -> Self {
        PathTrace {
            dim,
            times: Vec::new(),
            points: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, x: &[f64]) {
        self.times.push(t);
        self.points.extend_from_slice(x);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().copied().zip(self.points.chunks_exact(self.dim))
    }
}

/// First crossings of increasing radii along one discretized path.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedExits {
    /// One event per crossed radius, in radius order.
    pub events: Vec<ExitEvent>,
    /// Elapsed time when the horizon cut the path short.
    pub censored: Option<f64>,
    pub trace: Option<PathTrace>,
}

impl NestedExits {
    pub fn complete(&self) -> bool {
        self.censored.is_none()
    }

    pub fn tau(&self, i: usize) -> Option<f64> {
        self.events.get(i).and_then(|e| e.tau)
    }
}

/// Positive root `s ∈ (0, 1]` of `‖x + s d‖ = r` for `‖x‖ < r`.
fn crossing_fraction(x: &[f64], d: &[f64], r: f64) -> f64 {
    let a = dot(d, d);
    let b = 2.0 * dot(x, d);
    let c = dot(x, x) - r * r;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let s = if b >= 0.0 {
        2.0 * c / (-b - disc)
    } else {
        (-b + disc) / (2.0 * a)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0)
}

fn project(x: &[f64], r: f64) -> Point {
    let n = norm(x);
    Point::new(x.iter().map(|c| r * c / n).collect())
}

/// Steps a path from `x0` until it has crossed every radius in `radii`
/// (strictly increasing, the first larger than `‖x0‖`) or the horizon ends.
pub fn simulate_nested_exits(cfg: &PathConfig, x0: &Point, radii: &[f64], keep_trace: bool) -> Result<NestedExits> {
    cfg.validate()?;
    if x0.dim() != cfg.dim {
        return domain("start point and configuration dimensions differ");
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return domain("radii must be nonempty and strictly increasing");
    }
    if x0.norm() >= radii[0] {
        return domain(format!("start point lies outside the ball of radius {}", radii[0]));
    }
    let m = cfg.dim;
    let dt = cfg.dt;
    let sdt = dt.sqrt();
    let mut stream = cfg.stream();
    let mut x = x0.as_slice().to_vec();
    let mut step = vec![0.0; m];
    let mut x_new = vec![0.0; m];
    let mut trace = keep_trace.then(|| PathTrace::new(m));
    if let Some(tr) = trace.as_mut() {
        tr.push(0.0, &x);
    }
    let mut events: Vec<ExitEvent> = Vec::with_capacity(radii.len());
    let mut last_tau = 0.0f64;
    let mut record = |events: &mut Vec<ExitEvent>, tau: f64, point: Point| {
        let tau = tau.max(last_tau);
        last_tau = tau;
        events.push(ExitEvent {
            tau: Some(tau),
            exit_point: point,
            method: ExitMethod::Discretized,
            dt_used: Some(dt),
        });
    };
    let max_steps = cfg.max_steps();
    let mut k = 0u64;
    while events.len() < radii.len() {
        if k >= max_steps {
            return Ok(NestedExits {
                events,
                censored: Some(k as f64 * dt),
                trace,
            });
        }
        let t = k as f64 * dt;
        for s in step.iter_mut() {
            *s = sdt * stream.normal();
        }
        let u = if cfg.bridge_correction { stream.uniform() } else { 1.0 };
        for i in 0..m {
            x_new[i] = x[i] + step[i];
        }
        let r_new = norm(&x_new);
        while events.len() < radii.len() && r_new >= radii[events.len()] {
            let r = radii[events.len()];
            let s = crossing_fraction(&x, &step, r);
            let hit: Vec<f64> = (0..m).map(|i| x[i] + s * step[i]).collect();
            record(&mut events, t + s * dt, project(&hit, r));
        }
        if cfg.bridge_correction && events.len() < radii.len() {
            let r = radii[events.len()];
            let d0 = r - norm(&x);
            let d1 = r - r_new;
            if u < (-2.0 * d0 * d1 / dt).exp() {
                let mid: Vec<f64> = (0..m).map(|i| 0.5 * (x[i] + x_new[i])).collect();
                record(&mut events, t + 0.5 * dt, project(&mid, r));
            }
        }
        k += 1;
        if events.len() < radii.len() {
            std::mem::swap(&mut x, &mut x_new);
            if let Some(tr) = trace.as_mut() {
                tr.push(k as f64 * dt, &x);
            }
        }
    }
    Ok(NestedExits {
        events,
        censored: None,
        trace,
    })
}

/// First exit from `D(0, r)` for the path configured by `cfg`.
pub fn simulate_exit(cfg: &PathConfig, x0: &Point, r: f64) -> Result<ExitOutcome> {
    Ok(simulate_exit_traced(cfg, x0, r, false)?.0)
}

/// As [`simulate_exit`], also returning the grid points visited before exit.
pub fn simulate_exit_traced(
    cfg: &PathConfig,
    x0: &Point,
    r: f64,
    keep_trace: bool,
) -> Result<(ExitOutcome, Option<PathTrace>)> {
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let run = simulate_nested_exits(cfg, x0, &[r], keep_trace)?;
    let outcome = match run.censored {
        Some(elapsed) => {
            let position = match &run.trace {
                Some(tr) if !tr.is_empty() => Point::new(tr.point(tr.len() - 1).to_vec()),
                _ => x0.clone(),
            };
            ExitOutcome::Censored { elapsed, position }
        }
        None => ExitOutcome::Exited(run.events.into_iter().next().expect("one radius crossed")),
    };
    Ok((outcome, run.trace))
}

/// `n` independent exits; path `i` reads stream `stream_id(tag, i)`.
pub fn exit_batch(cfg: &PathConfig, x0: &Point, r: f64, n: usize, tag: u16) -> Result<Vec<ExitOutcome>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_exit(&cfg.for_path(tag, i), x0, r))
        .collect()
}

/// Exact sample of `B^x_{τ}` on `∂D(0, r)`: uniform when `x` is the centre,
/// otherwise rejection from the uniform law against the Poisson kernel with
/// envelope `(1 - s²)/(1 - s)^m`, `s = ‖x‖/r`.
pub fn wos_exit_point(stream: &mut Stream, x: &Point, r: f64) -> Result<Point> {
    let m = x.dim();
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let s = x.norm() / r;
    if s >= 1.0 {
        return domain("walk-on-spheres start must lie in the open ball");
    }
    let mut z = vec![0.0; m];
    if s < WOS_CENTER {
        sample_unit_direction(stream, &mut z);
        z.iter_mut().for_each(|c| *c *= r);
        return Ok(Point::new(z));
    }
    let envelope = (1.0 - s * s) / (1.0 - s).powi(m as i32);
    let origin = vec![0.0; m];
    loop {
        sample_unit_direction(stream, &mut z);
        z.iter_mut().for_each(|c| *c *= r);
        let density = kernel(&origin, r, x.as_slice(), &z);
        if stream.uniform() * envelope < density {
            return Ok(Point::new(z));
        }
    }
}

/// Walk-on-spheres exit event.
pub fn wos_exit(stream: &mut Stream, x: &Point, r: f64) -> Result<ExitEvent> {
    Ok(ExitEvent {
        tau: None,
        exit_point: wos_exit_point(stream, x, r)?,
        method: ExitMethod::WalkOnSpheres,
        dt_used: None,
    })
}

/// `n` walk-on-spheres exit points; sample `i` reads stream `stream_id(WOS_TAG, i)` of `seed`.
pub fn wos_batch(seed: u64, x: &Point, r: f64, n: usize) -> Result<Vec<Point>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| wos_exit_point(&mut Stream::new(seed, stream_id(WOS_TAG, i)), x, r))
        .collect()
}

/// Whether a one-dimensional path from 0 reaches `level` before time `t`,
/// with the bridge crossing probability `exp(-2(λ-x_k)(λ-x_{k+1})/dt)`
/// between grid points when correction is on.
pub fn reaches_level(cfg: &PathConfig, level: f64, t: f64) -> Result<bool> {
    cfg.validate()?;
    if cfg.dim != 1 {
        return domain("reaches_level runs in one dimension");
    }
    if !(level > 0.0 && t >= cfg.dt) {
        return domain("reaches_level needs level > 0 and t ≥ dt");
    }
    let mut stream = cfg.stream();
    let sdt = cfg.dt.sqrt();
    let steps = (t / cfg.dt * (1.0 + 1e-12)).floor() as u64;
    let mut x = 0.0f64;
    for _ in 0..steps {
        let next = x + sdt * stream.normal();
        if next >= level {
            return Ok(true);
        }
        if cfg.bridge_correction {
            let u = stream.uniform();
            if u < (-2.0 * (level - x) * (level - next) / cfg.dt).exp() {
                return Ok(true);
            }
        }
        x = next;
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionReport {
    pub t: f64,
    pub level: f64,
    pub estimate: McEstimate,
    pub target: f64,
    /// Per-path outcome, in path order.
    pub hits: Vec<bool>,
}

/// Fraction of `n` paths whose running maximum on `[0, t]` reaches `level`.
pub fn reflection_experiment(cfg: &PathConfig, level: f64, t: f64, n: usize) -> Result<ReflectionReport> {
    let hits = (0..n as u64)
        .into_par_iter()
        .map(|i| reaches_level(&cfg.for_path(REFLECTION_TAG, i), level, t))
        .collect::<Result<Vec<bool>>>()?;
    Ok(ReflectionReport {
        t,
        level,
        estimate: proportion(hits.iter().copied())?,
        target: reflection_prob(t, level)?,
        hits,
    })
}

/// `P(τ > t)` for each `t` in `times` from `n` paths run to `max(times)`.
pub fn exit_time_tail(cfg: &PathConfig, x0: &Point, r: f64, times: &[f64], n: usize) -> Result<Vec<McEstimate>> {
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let cfg = PathConfig { horizon, ..cfg.clone() };
    let outcomes = exit_batch(&cfg, x0, r, n, EXIT_TAG)?;
    times
        .iter()
        .map(|&t| {
            proportion(outcomes.iter().map(|o| match o {
                ExitOutcome::Exited(e) => e.tau.expect("discretized exits carry τ") > t,
                ExitOutcome::Censored { .. } => true,
            }))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub scale: f64,
    pub ks: KsResult,
    /// Mean of `τ_{0,√scale}`.
    pub scaled: McEstimate,
    /// Mean of `scale · τ_{0,1}`.
    pub unit_rescaled: McEstimate,
    pub means_agree: bool,
    pub censored: usize,
    /// `τ_{0,√scale}` of the completed scaled paths, in path order.
    pub scaled_times: Vec<f64>,
    /// `scale · τ_{0,1}` of the completed unit paths, in path order.
    pub unit_times: Vec<f64>,
}

/// Compares the law of `τ_{0,√c}` with that of `c·τ_{0,1}` from independent paths.
pub fn scaling_check(cfg: &PathConfig, scale: f64, n: usize) -> Result<ScalingReport> {
    if !(scale > 0.0) {
        return domain(format!("scale must be positive, got {scale}"));
    }
    let origin = Point::zeros(cfg.dim);
    let times = |outs: Vec<ExitOutcome>, factor: f64| -> (Vec<f64>, usize) {
        let censored = outs.iter().filter(|o| o.is_censored()).count();
        let t = outs
            .iter()
            .filter_map(|o| o.event().and_then(|e| e.tau))
            .map(|t| factor * t)
            .collect();
        (t, censored)
    };
    let (a, ca) = times(exit_batch(cfg, &origin, scale.sqrt(), n, SCALED_TAG)?, 1.0);
    let (b, cb) = times(exit_batch(cfg, &origin, 1.0, n, UNIT_TAG)?, scale);
    let ks = ks_two_sample(&a, &b)?;
    let scaled = mc_estimate(&a)?;
    let unit_rescaled = mc_estimate(&b)?;
    let se = scaled.std_error.hypot(unit_rescaled.std_error);
    let means_agree = (scaled.mean - unit_rescaled.mean).abs() <= MC_SIGMAS * se;
    Ok(ScalingReport {
        scale,
        ks,
        scaled,
        unit_rescaled,
        means_agree,
        censored: ca + cb,
        scaled_times: a,
        unit_times: b,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub kappa: u32,
    /// `P(τ'' - τ' > 2^{-κ+4})`.
    pub exceedance: McEstimate,
    pub gap_threshold: f64,
    pub bound: f64,
    /// `τ'' ≥ τ'` on every path.
    pub ordered: bool,
    pub censored: usize,
    pub pass: bool,
}

/// Coupled exits from `D(0, r')` and `D(0, r'')` along the same paths from `x`.
pub fn exit_continuity_check(
    cfg: &PathConfig,
    x: &Point,
    r_inner: f64,
    r_outer: f64,
    kappa: u32,
    n: usize,
) -> Result<ContinuityReport> {
    let width = 0.5f64.powi(kappa as i32 + 1);
    let gap = r_outer - r_inner;
    if !(gap >= 0.0 && gap < width) {
        return domain(format!(
            "precondition 0 ≤ r'' - r' < 2^(-κ-1) fails: r'' - r' = {gap}, 2^(-κ-1) = {width}"
        ));
    }
    let spread = 2.0 * normal_cdf(gap / width.sqrt()) - 1.0;
    if !(spread < width) {
        return domain(format!(
            "precondition 2Φ((r'' - r')/√(2^(-κ-1))) - 1 < 2^(-κ-1) fails: {spread} ≥ {width}"
        ));
    }
    let radii: Vec<f64> = if gap == 0.0 {
        vec![r_inner]
    } else {
        vec![r_inner, r_outer]
    };
    let runs = (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_nested_exits(&cfg.for_path(CONTINUITY_TAG, i), x, &radii, false))
        .collect::<Result<Vec<_>>>()?;
    let complete: Vec<&NestedExits> = runs.iter().filter(|r| r.complete()).collect();
    let censored = runs.len() - complete.len();
    let gaps: Vec<f64> = complete
        .iter()
        .map(|r| r.tau(radii.len() - 1).unwrap() - r.tau(0).unwrap())
        .collect();
    let threshold = 0.5f64.powi(kappa as i32 - 4);
    let exceedance = proportion(gaps.iter().map(|&g| g > threshold))?;
    let bound = 0.5f64.powi(kappa as i32 - 1);
    let ordered = gaps.iter().all(|&g| g >= 0.0);
    let pass = ordered && exceedance.mean <= bound + MC_SIGMAS * exceedance.std_error;
    Ok(ContinuityReport {
        kappa,
        exceedance,
        gap_threshold: threshold,
        bound,
        ordered,
        censored,
        pass,
    })
}
