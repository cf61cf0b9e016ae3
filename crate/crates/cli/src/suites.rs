//! The experiment suites behind the subcommands.
//!
//! Every suite draws its randomness from `(seed, stream_id(tag, index))`
//! streams and aggregates in index order, so its CSV depends on the
//! configuration alone, not on the number of worker threads.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use hardylim_core::brownian::{
    exit_batch, exit_continuity_check, exit_time_tail, reflection_experiment, scaling_check, tightness_n, wos_batch,
    ExitOutcome, PathConfig, EXIT_TAG,
};
use hardylim_core::geom::Point;
use hardylim_core::hardy_limit::{limit_experiment, radius_schedule, ScheduleVariant};
use hardylim_core::harmonic::{
    catalog, catalog_member, estimate_rates, geometric_grid, hardy_integrals, mean_value_residual, poisson_extend,
    poisson_kernel,
};
use hardylim_core::martingale::{
    lambda_bar, lambda_bar_closed, lambda_bar_series, martingale_witness, maximal_inequality_check,
    monotonicity_report, sample_y_skeleton, MartingaleSample,
};
use hardylim_core::rng::stream_id;
use hardylim_core::sphere_measure::{
    ball_volume, chart_area_monte_carlo, gauss_legendre, sample_unit_direction, surface_integral, unit_surface_area,
    SurfaceQuadrature,
};
use hardylim_core::stats::{ks_one_sample, ks_two_sample, mc_estimate};
use hardylim_core::tolerances::{EXIT_POINT, LAMBDA_SERIES_SWITCH, MC_SIGMAS, MONOTONE_STEP};
use hardylim_core::{HarmonicFn, Result, Stream};

use crate::config::RunConfig;
use crate::output::{Check, Csv, SuiteOutput, Verdict};

const AREA_TAG: u16 = 0xA5;
const POINTS_TAG: u16 = 0x4A;
const LAMBDA_TAG: u16 = 0x1B;
const OFFSET_EXIT_TAG: u16 = 0xE2;

/// Weighted chart samples for the Monte Carlo areas.
pub const AREA_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Constants,
    Harmonic,
    ExitDist,
    Reflection,
    Tightness,
    Scaling,
    Continuity,
    Martingale,
    HardyLimit,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Constants,
        Suite::Harmonic,
        Suite::ExitDist,
        Suite::Reflection,
        Suite::Tightness,
        Suite::Scaling,
        Suite::Continuity,
        Suite::Martingale,
        Suite::HardyLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Constants => "constants",
            Suite::Harmonic => "harmonic",
            Suite::ExitDist => "exit-dist",
            Suite::Reflection => "reflection",
            Suite::Tightness => "tightness",
            Suite::Scaling => "scaling",
            Suite::Continuity => "continuity",
            Suite::Martingale => "martingale",
            Suite::HardyLimit => "hardy-limit",
        }
    }

    pub fn run(self, cfg: &RunConfig) -> Result<SuiteOutput> {
        match self {
            Suite::Constants => constants(cfg),
            Suite::Harmonic => harmonic(cfg),
            Suite::ExitDist => exit_dist(cfg),
            Suite::Reflection => reflection(cfg),
            Suite::Tightness => tightness(cfg),
            Suite::Scaling => scaling(cfg),
            Suite::Continuity => continuity(cfg),
            Suite::Martingale => martingale(cfg),
            Suite::HardyLimit => hardy_limit(cfg),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

fn path_config(cfg: &RunConfig, dim: usize) -> Result<PathConfig> {
    PathConfig::new(dim, cfg.dt, cfg.horizon, cfg.seed)
}

fn finish(suite: Suite, cfg: &RunConfig, csv: Csv, checks: Vec<Check>) -> SuiteOutput {
    SuiteOutput {
        csv,
        verdict: Verdict::new(suite.name(), cfg.seed, checks),
    }
}

/// A point drawn uniformly from the ball of radius `radius` in `R^m`.
fn ball_point(stream: &mut Stream, m: usize, radius: f64) -> Point {
    let mut d = vec![0.0; m];
    sample_unit_direction(stream, &mut d);
    let s = radius * stream.uniform().powf(1.0 / m as f64);
    Point::new(d.into_iter().map(|c| s * c).collect())
}

// ---------------------------------------------------------------- constants

fn constants(cfg: &RunConfig) -> Result<SuiteOutput> {
    let mut csv = Csv::new(
        "constants",
        cfg.seed,
        &[
            "quantity",
            "m",
            "method",
            "closed_form",
            "quadrature",
            "abs_err",
            "tolerance",
            "pass",
        ],
    );
    csv.meta("area_samples", AREA_SAMPLES);
    let mut checks = Vec::new();
    // ∫₀¹ r^{m-1} dr by Gauss-Legendre on [0, 1]
    let (gx, gw) = gauss_legendre(8);
    let radial = |m: usize| -> f64 {
        gx.iter()
            .zip(&gw)
            .map(|(x, w)| 0.5 * w * (0.5 * (x + 1.0)).powi(m as i32 - 1))
            .sum()
    };
    for m in 2..=5usize {
        let sigma = unit_surface_area(m)?;
        let (method, estimate, tol) = if m <= 3 {
            let q = SurfaceQuadrature::default_for(m, 1.0)?;
            let v = surface_integral(|_| 1.0, &q).value;
            ("chart-gauss", v, if m == 2 { 1e-10 } else { 1e-8 })
        } else {
            let mut st = Stream::new(cfg.seed, stream_id(AREA_TAG, m as u64));
            let e = chart_area_monte_carlo(m, AREA_SAMPLES, &mut st)?;
            ("chart-monte-carlo", e.mean, 5.0 * e.std_error)
        };
        let nu = ball_volume(m, 1.0)?;
        let nu_est = estimate * radial(m);
        for (quantity, closed, est, tol) in [("sigma", sigma, estimate, tol), ("nu", nu, nu_est, tol / m as f64)] {
            let c = Check::close(
                format!("{method} quadrature reproduces the closed form of {quantity}_{{{m},1}}"),
                closed,
                est,
                tol,
            );
            csv.row(&[
                &quantity,
                &m,
                &method,
                &closed,
                &est,
                &(est - closed).abs(),
                &tol,
                &c.pass,
            ]);
            checks.push(c);
        }
    }
    checks.push(Check::close(
        "closed form of sigma_{4,1} equals 2 pi^2",
        2.0 * PI * PI,
        unit_surface_area(4)?,
        0.0,
    ));
    Ok(finish(Suite::Constants, cfg, csv, checks))
}

// ----------------------------------------------------------------- harmonic

/// `n` points on `S²` spread by the golden-angle spiral.
fn spiral_directions(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// 100 interior points: 10 radii up to 0.9 times 10 directions.
fn interior_grid(m: usize) -> Vec<Point> {
    let dirs: Vec<Vec<f64>> = match m {
        2 => (0..10)
            .map(|j| 2.0 * PI * (j as f64 + 0.25) / 10.0)
            .map(|a| vec![a.cos(), a.sin()])
            .collect(),
        _ => spiral_directions(10).into_iter().map(|d| d.to_vec()).collect(),
    };
    let mut pts = Vec::with_capacity(100);
    for k in 1..=10 {
        let rho = 0.09 * k as f64;
        for d in &dirs {
            pts.push(Point::new(d.iter().map(|c| rho * c).collect()));
        }
    }
    pts
}

fn harmonic(cfg: &RunConfig) -> Result<SuiteOutput> {
    let mut csv = Csv::new("harmonic", cfg.seed, &["check", "function", "m", "index", "residual"]);
    let mut checks = Vec::new();
    for m in [2usize, 3] {
        let quad = SurfaceQuadrature::default_for(m, 1.0)?;
        let origin = Point::zeros(m);

        let mut st = Stream::new(cfg.seed, stream_id(POINTS_TAG, m as u64));
        let mut worst = 0.0f64;
        for i in 0..50usize {
            let x = ball_point(&mut st, m, 0.9);
            let res = (poisson_extend(|_| 1.0, &origin, 1.0, &x, &quad)?.value - 1.0).abs();
            worst = worst.max(res);
            csv.row(&[&"kernel-mass", &"1", &m, &i, &res]);
        }
        checks.push(Check::at_most(
            format!("Poisson kernel has unit mass under the uniform law at 50 points with |x| <= 0.9, m = {m}"),
            0.0,
            worst,
            1e-6,
        ));

        let mut worst = 0.0f64;
        for (i, x) in interior_grid(m).iter().enumerate() {
            let v = poisson_extend(|z| z[0], &origin, 1.0, x, &quad)?.value;
            let res = (v - x[0]).abs();
            worst = worst.max(res);
            csv.row(&[&"extension", &"z1", &m, &i, &res]);
        }
        checks.push(Check::at_most(
            format!("Poisson extension of z1 equals x1 on a 100-point interior grid, m = {m}"),
            0.0,
            worst,
            1e-6,
        ));
    }

    let members = catalog();
    let mut worst = 0.0f64;
    for (j, u) in members.iter().enumerate() {
        let m = u.dim();
        let quad = SurfaceQuadrature::default_for(m, 1.0)?;
        let mut st = Stream::new(cfg.seed, stream_id(POINTS_TAG, 0x100 + j as u64));
        for i in 0..20usize {
            let y = ball_point(&mut st, m, 0.45);
            let r = (0.9 - y.norm()) * (0.1 + 0.9 * st.uniform());
            let res = mean_value_residual(u, &y, r, &quad)?;
            worst = worst.max(res);
            csv.row(&[&"mean-value", &u.name(), &m, &i, &res]);
        }
    }
    checks.push(Check::at_most(
        format!(
            "mean value property of all {} catalog functions at 20 random balls each",
            members.len()
        ),
        0.0,
        worst,
        1e-6,
    ));
    Ok(finish(Suite::Harmonic, cfg, csv, checks))
}

// ---------------------------------------------------------------- exit-dist

/// CDF of the first coordinate of a uniform point on `S^{m-1}`.
fn first_coordinate_cdf(m: usize) -> fn(f64) -> f64 {
    match m {
        2 => |t: f64| 1.0 - t.clamp(-1.0, 1.0).acos() / PI,
        _ => |t: f64| (0.5 * (t + 1.0)).clamp(0.0, 1.0),
    }
}

fn exit_dist(cfg: &RunConfig) -> Result<SuiteOutput> {
    let m = cfg.m;
    let pc = path_config(cfg, m)?;
    let mut csv = Csv::new("exit-dist", cfg.seed, &["part", "index", "z1", "radius_error"]);
    csv.meta("m", m);
    csv.meta("dt", cfg.dt);
    let mut checks = Vec::new();
    let origin = Point::zeros(m);
    let mut x = vec![0.0; m];
    x[0] = 0.5;
    let x = Point::new(x);

    let mut radius_error = 0.0f64;
    let mut exits = |outs: &[ExitOutcome], part: &str, csv: &mut Csv| -> (Vec<f64>, usize) {
        let mut z1 = Vec::with_capacity(outs.len());
        let mut censored = 0;
        for (i, o) in outs.iter().enumerate() {
            match o.event() {
                Some(e) => {
                    let err = (e.exit_point.norm() - 1.0).abs();
                    radius_error = radius_error.max(err);
                    z1.push(e.exit_point[0]);
                    csv.row(&[&part, &i, &e.exit_point[0], &err]);
                }
                None => censored += 1,
            }
        }
        (z1, censored)
    };

    // centred start: z1 has the law of the first coordinate of a uniform point
    let outs = exit_batch(&pc, &origin, 1.0, 2 * cfg.n_paths, EXIT_TAG)?;
    let (z1, c0) = exits(&outs, "centred-discretized", &mut csv);
    let ks = ks_one_sample(&z1, first_coordinate_cdf(m))?;
    checks.push(Check::new(
        format!("discretized exit from the centre: z1 passes KS at 5% against the uniform-sphere marginal, m = {m}"),
        0.0,
        ks.statistic,
        ks.threshold,
        ks.pass,
    ));

    // off-centre start, both engines
    let outs = exit_batch(&pc, &x, 1.0, cfg.n_paths, OFFSET_EXIT_TAG)?;
    let (z1_disc, c1) = exits(&outs, "offset-discretized", &mut csv);
    let wos = wos_batch(cfg.seed, &x, 1.0, 10 * cfg.n_paths)?;
    let mut wos_z1 = Vec::with_capacity(wos.len());
    let s = 0.5f64;
    let (lo, hi) = (
        (1.0 - s * s) / (1.0 + s).powi(m as i32),
        (1.0 - s * s) / (1.0 - s).powi(m as i32),
    );
    let mut density_ok = true;
    for (i, z) in wos.iter().enumerate() {
        let err = (z.norm() - 1.0).abs();
        radius_error = radius_error.max(err);
        wos_z1.push(z[0]);
        csv.row(&[&"offset-wos", &i, &z[0], &err]);
        let k = poisson_kernel(&origin, 1.0, &x, z)?;
        density_ok &= k >= lo * (1.0 - 1e-12) && k <= hi * (1.0 + 1e-12);
    }
    let mean = mc_estimate(&wos_z1)?;
    checks.push(Check::close(
        "walk-on-spheres exit from x = (0.5, 0, ...): E z1 equals 0.5 within 3 standard errors",
        0.5,
        mean.mean,
        MC_SIGMAS * mean.std_error,
    ));
    checks.push(Check::holds(
        "Poisson kernel at every walk-on-spheres exit lies between its extremal values",
        density_ok,
    ));
    let ks = ks_two_sample(&wos_z1[..cfg.n_paths], &z1_disc)?;
    checks.push(Check::new(
        "walk-on-spheres and discretized exits from x = (0.5, 0, ...) agree: two-sample KS at 5%",
        0.0,
        ks.statistic,
        ks.threshold,
        ks.pass,
    ));
    checks.push(Check::at_most(
        "every exit point lies on the sphere",
        0.0,
        radius_error,
        EXIT_POINT,
    ));
    checks.push(Check::close(
        "no discretized path hit the horizon",
        0.0,
        (c0 + c1) as f64,
        0.0,
    ));
    Ok(finish(Suite::ExitDist, cfg, csv, checks))
}

// --------------------------------------------------------------- reflection

fn reflection(cfg: &RunConfig) -> Result<SuiteOutput> {
    let (t, level) = (1.0f64, 1.0);
    let pc = PathConfig::new(1, cfg.dt, t.max(cfg.dt), cfg.seed)?;
    let rep = reflection_experiment(&pc, level, t, cfg.n_paths)?;
    let mut csv = Csv::new("reflection", cfg.seed, &["path", "reached"]);
    csv.meta("dt", cfg.dt);
    csv.meta("t", t);
    csv.meta("level", level);
    csv.meta("target", rep.target);
    for (i, h) in rep.hits.iter().enumerate() {
        csv.row(&[&i, &u32::from(*h)]);
    }
    let checks = vec![Check::close(
        "one-dimensional path from 0 reaches level 1 by time 1 with probability 2(1 - Phi(1))",
        rep.target,
        rep.estimate.mean,
        0.005,
    )];
    Ok(finish(Suite::Reflection, cfg, csv, checks))
}

// ---------------------------------------------------------------- tightness

fn tightness(cfg: &RunConfig) -> Result<SuiteOutput> {
    let r_tilde = 2.0;
    let mut csv = Csv::new(
        "tightness",
        cfg.seed,
        &["k", "n", "t", "tail_estimate", "std_error", "bound", "pass"],
    );
    csv.meta("m", cfg.m);
    csv.meta("dt", cfg.dt);
    csv.meta("r_tilde", r_tilde);
    let mut checks = Vec::new();
    let table: Vec<u64> = (0..=8).map(|k| tightness_n(r_tilde, k)).collect::<Result<_>>()?;
    checks.push(Check::close("tightness table N_{2,1}", 9.0, table[1] as f64, 0.0));
    checks.push(Check::holds(
        "tightness table is nondecreasing in k",
        table.windows(2).all(|w| w[1] >= w[0]),
    ));

    let ks = [1u32, 2, 3];
    let times: Vec<f64> = ks.iter().map(|&k| (table[k as usize] + 1) as f64).collect();
    let pc = path_config(cfg, cfg.m)?;
    let tails = exit_time_tail(&pc, &Point::zeros(cfg.m), 1.0, &times, cfg.n_paths)?;
    for (k, n) in table.iter().enumerate() {
        let row = ks.iter().position(|&kk| kk as usize == k);
        match row {
            Some(j) => {
                let bound = 0.5f64.powi(k as i32 - 1);
                let c = Check::at_most(
                    format!("exit from the unit ball by time N_{{2,{k}}} + 1 fails with probability at most 2^(1-{k})"),
                    bound,
                    tails[j].mean,
                    MC_SIGMAS * tails[j].std_error,
                );
                csv.row(&[&k, n, &times[j], &tails[j].mean, &tails[j].std_error, &bound, &c.pass]);
                checks.push(c);
            }
            None => csv.row(&[
                &k,
                n,
                &None::<f64>,
                &None::<f64>,
                &None::<f64>,
                &None::<f64>,
                &None::<bool>,
            ]),
        }
    }
    Ok(finish(Suite::Tightness, cfg, csv, checks))
}

// ------------------------------------------------------------------ scaling

fn scaling(cfg: &RunConfig) -> Result<SuiteOutput> {
    let scale = 4.0;
    let pc = path_config(cfg, cfg.m)?;
    let rep = scaling_check(&pc, scale, cfg.n_paths)?;
    let mut csv = Csv::new("scaling", cfg.seed, &["sample", "index", "tau"]);
    csv.meta("m", cfg.m);
    csv.meta("dt", cfg.dt);
    csv.meta("scale", scale);
    for (i, t) in rep.scaled_times.iter().enumerate() {
        csv.row(&[&"tau_sqrt_scale", &i, t]);
    }
    for (i, t) in rep.unit_times.iter().enumerate() {
        csv.row(&[&"scale_times_tau_1", &i, t]);
    }
    let se = rep.scaled.std_error.hypot(rep.unit_rescaled.std_error);
    let checks = vec![
        Check::new(
            "exit time from radius 2 and 4 times the exit time from radius 1 agree in law: two-sample KS at 5%",
            0.0,
            rep.ks.statistic,
            rep.ks.threshold,
            rep.ks.pass,
        ),
        Check::close(
            "means of the two exit times agree within 3 combined standard errors",
            rep.unit_rescaled.mean,
            rep.scaled.mean,
            MC_SIGMAS * se,
        ),
        Check::close("no path hit the horizon", 0.0, rep.censored as f64, 0.0),
    ];
    Ok(finish(Suite::Scaling, cfg, csv, checks))
}

// --------------------------------------------------------------- continuity

fn continuity(cfg: &RunConfig) -> Result<SuiteOutput> {
    let pc = path_config(cfg, cfg.m)?;
    let origin = Point::zeros(cfg.m);
    let kappa = 2;
    let mut csv = Csv::new(
        "continuity",
        cfg.seed,
        &[
            "r_inner",
            "r_outer",
            "kappa",
            "gap_threshold",
            "exceedance",
            "std_error",
            "bound",
            "ordered",
            "censored",
            "pass",
        ],
    );
    csv.meta("m", cfg.m);
    csv.meta("dt", cfg.dt);
    let mut checks = Vec::new();
    for (r1, r2) in [(0.9, 0.95), (0.9, 0.9)] {
        let rep = exit_continuity_check(&pc, &origin, r1, r2, kappa, cfg.n_paths)?;
        csv.row(&[
            &r1,
            &r2,
            &kappa,
            &rep.gap_threshold,
            &rep.exceedance.mean,
            &rep.exceedance.std_error,
            &rep.bound,
            &rep.ordered,
            &rep.censored,
            &rep.pass,
        ]);
        if r1 == r2 {
            checks.push(Check::close(
                "equal radii give identical exit times",
                0.0,
                rep.exceedance.mean,
                0.0,
            ));
        } else {
            checks.push(Check::at_most(
                format!("exit times from radii {r1} and {r2} differ by more than 2^(4-{kappa}) with probability at most 2^(1-{kappa})"),
                rep.bound,
                rep.exceedance.mean,
                MC_SIGMAS * rep.exceedance.std_error,
            ));
        }
        checks.push(Check::holds(
            format!("exit from radius {r2} never precedes exit from radius {r1}"),
            rep.ordered,
        ));
    }
    Ok(finish(Suite::Continuity, cfg, csv, checks))
}

// --------------------------------------------------------------- martingale

fn lambda_checks(cfg: &RunConfig, csv: &mut Csv) -> Vec<Check> {
    let mut st = Stream::new(cfg.seed, stream_id(LAMBDA_TAG, 0));
    let vs: Vec<f64> = (0..10_000).map(|_| -10.0 + 20.0 * st.uniform()).collect();
    let h = 1e-2;
    let mut violations = 0usize;
    let mut min_second = f64::INFINITY;
    for (i, &v) in vs.iter().enumerate() {
        let l = lambda_bar(v);
        if !(0.0..=v.abs()).contains(&l) {
            violations += 1;
        }
        let d2 = lambda_bar(v - h) - 2.0 * l + lambda_bar(v + h);
        min_second = min_second.min(d2);
        csv.row(&[&"lambda", &"value", &i, &l]);
    }
    let s = LAMBDA_SERIES_SWITCH;
    let branch = [s, -s]
        .iter()
        .map(|&v| {
            let (a, b) = (lambda_bar_series(v), lambda_bar_closed(v));
            ((a - b) / b).abs()
        })
        .fold(0.0, f64::max);
    vec![
        Check::close(
            "0 <= lambda_bar(v) <= |v| at 10^4 random v in [-10, 10] (violations)",
            0.0,
            violations as f64,
            0.0,
        ),
        Check::at_least(
            "second differences of lambda_bar with h = 0.01 are nonnegative",
            0.0,
            min_second,
            1e-12,
        ),
        Check::at_most(
            "series and closed form of lambda_bar agree at |v| = 1e-4 (relative)",
            0.0,
            branch,
            1e-16,
        ),
    ]
}

fn maximal_checks(cfg: &RunConfig, u: &HarmonicFn, csv: &mut Csv) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let radii = [0.5, 0.9, 0.91];
    let y = sample_y_skeleton(u, &radii, cfg.n_paths, cfg.seed)?;
    for (k, &r) in radii.iter().enumerate() {
        for (i, v) in y.stage(k).iter().enumerate() {
            csv.row(&[&"skeleton", &format!("Y_{r}"), &i, v]);
        }
    }
    let quad = SurfaceQuadrature::default_for(u.dim(), 1.0)?;
    for (k, &r) in radii[..2].iter().enumerate() {
        let stage = y.stage(k);
        let h = hardy_integrals(u, r, &quad)?;
        let mean = mc_estimate(&stage)?;
        let abs = mc_estimate(&stage.iter().map(|v| v.abs()).collect::<Vec<_>>())?;
        let exp = mc_estimate(&stage.iter().map(|v| (-v.abs()).exp()).collect::<Vec<_>>())?;
        checks.push(Check::close(
            format!("E Y_{r} = 0 within 3 standard errors"),
            0.0,
            mean.mean,
            MC_SIGMAS * mean.std_error,
        ));
        checks.push(Check::close(
            format!("E|Y_{r}| matches the sphere average of |u(r.)| within 3 standard errors"),
            h.i1,
            abs.mean,
            MC_SIGMAS * abs.std_error + h.errors[0],
        ));
        checks.push(Check::close(
            format!("E exp(-|Y_{r}|) matches the sphere average of exp(-|u(r.)|) within 3 standard errors"),
            h.i2,
            exp.mean,
            MC_SIGMAS * exp.std_error + h.errors[1],
        ));
    }
    let drifts = martingale_witness(&y, 0, 1, 10)?;
    for (b, d) in drifts.iter().enumerate() {
        csv.row(&[&"witness", &"drift", &b, &d.drift.mean]);
    }
    let bad = drifts.iter().filter(|d| !d.pass).count();
    checks.push(Check::close(
        "decile bins of Y_0.5 show no drift of Y_0.9 - Y_0.5 beyond 3 standard errors (failing bins)",
        0.0,
        bad as f64,
        0.0,
    ));

    let z = MartingaleSample::new(
        radii[1..].to_vec(),
        (0..y.n_paths()).map(|i| y.path(i)[1..].to_vec()).collect(),
    )?;
    let mut first_eps = None;
    let mut broken = 0usize;
    for j in 0..=30usize {
        let eps = 0.5 + 0.05 * j as f64;
        let rep = maximal_inequality_check(&z, eps)?;
        csv.row(&[&"maximal", &"lhs", &j, &rep.lhs.mean]);
        csv.row(&[&"maximal", &"rhs_lower", &j, &rep.rhs_lower]);
        csv.row(&[&"maximal", &"exceedance", &j, &rep.exceedance.mean]);
        if rep.premise_holds {
            first_eps.get_or_insert(rep.clone());
            if rep.conclusion_holds != Some(true) {
                broken += 1;
            }
        }
    }
    match &first_eps {
        Some(rep) => checks.push(Check::at_most(
            format!(
                "Y_0.9 -> Y_0.91 for {}: premise verified at eps = {}; P(max |Z_k - Z_0| > eps) < eps",
                u.name(),
                rep.eps
            ),
            rep.eps,
            rep.exceedance.mean,
            MC_SIGMAS * rep.exceedance.std_error,
        )),
        None => checks.push(Check::holds(
            "maximal-inequality premise verified for some eps in [0.5, 2]",
            false,
        )),
    }
    checks.push(Check::close(
        "maximal-inequality conclusion at every eps in [0.5, 2] whose premise is verified (failures)",
        0.0,
        broken as f64,
        0.0,
    ));

    let coin: Vec<Vec<f64>> = (0..1000)
        .map(|i| vec![0.0, if i % 2 == 0 { 1.0 } else { -1.0 }])
        .collect();
    let rep = maximal_inequality_check(&MartingaleSample::new(vec![0.0, 1.0], coin)?, 0.5)?;
    checks.push(Check::holds(
        "fair-coin martingale at eps = 0.5 is reported as failing the premise",
        !rep.premise_holds,
    ));
    let flat = vec![vec![0.3, 0.3, 0.3]; 1000];
    let rep = maximal_inequality_check(&MartingaleSample::new(vec![0.0, 1.0, 2.0], flat)?, 1e-3)?;
    checks.push(Check::holds(
        "constant martingale satisfies the premise at eps = 1e-3 with no exceedance",
        rep.premise_holds && rep.exceedance.mean == 0.0,
    ));
    Ok(checks)
}

/// `0.10, 0.15, …, 0.95`.
pub fn monotonicity_grid() -> Vec<f64> {
    (2..=19).map(|k| k as f64 * 0.05).collect()
}

fn monotonicity_checks(csv: &mut Csv) -> Result<Vec<Check>> {
    let grid = monotonicity_grid();
    let mut steps = [0.0f64; 3];
    let mut max_i2 = f64::NEG_INFINITY;
    let mut identity = 0.0f64;
    let mut within_b0 = true;
    for u in catalog() {
        let quad = SurfaceQuadrature::default_for(u.dim(), 1.0)?;
        let rep = monotonicity_report(&u, &grid, &quad)?;
        for (k, s) in steps.iter_mut().enumerate() {
            *s = s.min(rep.min_step[k]);
        }
        max_i2 = max_i2.max(rep.max_i2);
        identity = identity.max(rep.identity_residual);
        within_b0 &= rep.within_b0.unwrap_or(true);
        for (label, vals) in [("I1", &rep.i1), ("I2", &rep.i2), ("I3", &rep.i3)] {
            for (j, v) in vals.iter().enumerate() {
                csv.row(&[&"monotonicity", &format!("{}:{label}", u.name()), &j, v]);
            }
        }
    }
    let mut checks: Vec<Check> = ["I1", "I2", "I3"]
        .iter()
        .zip(steps)
        .map(|(label, s)| {
            Check::at_least(
                format!("{label} nondecreasing on r = 0.10..0.95 for every catalog function (most negative step)"),
                0.0,
                s,
                MONOTONE_STEP,
            )
        })
        .collect();
    checks.push(Check::at_most("I2 <= 1 on the grid", 1.0, max_i2, 0.0));
    checks.push(Check::at_most("I3 = I2 - 1 + I1 on the grid", 0.0, identity, 1e-12));
    checks.push(Check::holds("I1 <= b0 on the grid where b0 is declared", within_b0));
    Ok(checks)
}

fn martingale(cfg: &RunConfig) -> Result<SuiteOutput> {
    let mut csv = Csv::new("martingale", cfg.seed, &["section", "label", "index", "value"]);
    csv.meta("m", cfg.m);
    let name = format!("x1_m{}", cfg.m);
    let u = catalog_member(&name).expect("x1 is in the catalog for m = 2, 3");
    let mut checks = lambda_checks(cfg, &mut csv);
    checks.extend(maximal_checks(cfg, &u, &mut csv)?);
    checks.extend(monotonicity_checks(&mut csv)?);
    Ok(finish(Suite::Martingale, cfg, csv, checks))
}

// -------------------------------------------------------------- hardy-limit

fn hardy_limit(cfg: &RunConfig) -> Result<SuiteOutput> {
    let m = cfg.m;
    let pc = path_config(cfg, m)?;
    let mut csv = Csv::new(
        "hardy-limit",
        cfg.seed,
        &[
            "function",
            "q",
            "gap",
            "r_q",
            "effective_r",
            "threshold",
            "bound",
            "exceedance",
            "std_error",
            "boundary_exceedance",
            "pass",
        ],
    );
    csv.meta("m", m);
    csv.meta("dt", cfg.dt);
    csv.meta("horizon", cfg.horizon);
    csv.meta("r_trunc", cfg.r_trunc);
    csv.meta("variant", cfg.variant);
    csv.meta("n_paths", cfg.n_paths);
    let mut checks = Vec::new();

    let quad = SurfaceQuadrature::default_for(m, 1.0)?;
    let zero = HarmonicFn::zero(m);
    let zero_rates = estimate_rates(&zero, &geometric_grid(20), &quad)?;
    let zero = zero.with_hardy(zero_rates);
    let mut members = vec![
        catalog_member(&format!("x1_m{m}")).expect("catalog has x1"),
        catalog_member(&format!("poisson_slice_m{m}")).expect("catalog has the Poisson slice"),
    ];
    members.push(zero);

    for u in &members {
        let rates = u.hardy().expect("catalog functions carry rates");
        let sched = radius_schedule(rates, cfg.q_max, cfg.variant)?;
        if u.name() == format!("x1_m{m}") {
            let cons = radius_schedule(rates, cfg.q_max, ScheduleVariant::ConservativeMin)?;
            let dominated = [ScheduleVariant::Paper133, ScheduleVariant::PaperStep10]
                .iter()
                .all(|&v| {
                    radius_schedule(rates, cfg.q_max, v)
                        .map(|s| s.gaps().iter().zip(cons.gaps()).all(|(g, c)| c <= g))
                        .unwrap_or(false)
                });
            checks.push(Check::holds(
                "conservative-min radii dominate both other schedule variants",
                dominated,
            ));
        }
        let rep = limit_experiment(u, &sched, &pc, cfg.n_paths, cfg.r_trunc)?;
        for (row, gap) in rep.rows.iter().zip(sched.gaps()) {
            csv.row(&[
                &u.name(),
                &row.q,
                gap,
                &row.radius,
                &row.effective_radius,
                &row.threshold,
                &row.bound,
                &row.exceedance.mean,
                &row.exceedance.std_error,
                &row.boundary_exceedance.map(|e| e.mean),
                &row.pass,
            ]);
        }
        if u.name() == "zero" {
            let worst = rep.rows.iter().map(|r| r.exceedance.mean).fold(0.0, f64::max);
            checks.push(Check::close(
                "u = 0: exceedance is exactly 0 for every q",
                0.0,
                worst,
                0.0,
            ));
            continue;
        }
        for row in &rep.rows {
            checks.push(Check::at_most(
                format!(
                    "{}: P(sup over [tau(r_{q}), tau(r_trunc)) of |V - u(B_s)| > 2^({q3}) ) <= 2^({q4})",
                    u.name(),
                    q = row.q,
                    q3 = 3 - row.q as i32,
                    q4 = 4 - row.q as i32
                ),
                row.bound,
                row.exceedance.mean,
                MC_SIGMAS * row.exceedance.std_error,
            ));
        }
        checks.push(Check::at_most(
            format!(
                "{}: fraction of paths failing any q is within the summed bounds",
                u.name()
            ),
            rep.budget,
            rep.any_exceedance.mean,
            MC_SIGMAS * rep.any_exceedance.std_error,
        ));
        checks.push(Check::at_most(
            format!("{}: censoring at the horizon within the tightness allowance", u.name()),
            rep.censoring_allowance,
            rep.censoring.mean,
            MC_SIGMAS * rep.censoring.std_error,
        ));
    }
    Ok(finish(Suite::HardyLimit, cfg, csv, checks))
}
