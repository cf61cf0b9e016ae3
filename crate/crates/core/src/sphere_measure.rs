//! Surface-area integration on `(m-1)`-spheres.
//!
//! The surface measure is defined through the hemisphere chart
//!
//! ```text
//! σ_{m,0,r}(g) = ∫_{‖θ‖<1} r^{m-1} / √(1-‖θ‖²) · [ g(rθ, +r√(1-‖θ‖²)) + g(rθ, -r√(1-‖θ‖²)) ] dθ
//! ```
//!
//! over the unit disc in `R^{m-1}`. The weight `1/√(1-‖θ‖²)` is singular at the
//! equator and is never evaluated there:
//!
//! * `m = 2`: the chart integral is one-dimensional with exactly the
//!   Chebyshev–Gauss weight, so Chebyshev–Gauss nodes integrate it.
//! * `m = 3`: polar coordinates on the disc with `ρ = sin u` turn the weighted
//!   area element into `sin u du dφ`; Gauss–Legendre in `u`, trapezoid in `φ`.
//! * any `m`: Monte Carlo with `θ` drawn from the density proportional to the
//!   weight, i.e. `‖θ‖² ~ Beta((m-1)/2, 1/2)` and a uniform direction.
//!
//! Every rule is stored as nodes on the unit sphere with weights summing to
//! `σ_{m,1}`; integrals on `∂D(y, r)` rescale and translate them.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rand_distr::{Beta, Distribution};

use crate::error::{domain, Result};
use crate::geom::{norm, Point};
use crate::rng::Stream;
use crate::stats::{compensated_sum, mc_estimate, McEstimate};
use crate::tolerances::GAUSSIAN_NORM_FLOOR;

/// Default node counts per axis for the deterministic rules.
pub const DEFAULT_NODES_2D: usize = 4096;
pub const DEFAULT_NODES_3D: usize = 192;
/// Default sample count for the Monte Carlo rule.
pub const DEFAULT_MC_NODES: usize = 200_000;

/// Total surface area `σ_{m,1}` of the unit `(m-1)`-sphere.
///
/// Even `m`: `π^{m/2} m / (m/2)!`. Odd `m`: `2^{(m+1)/2} π^{(m-1)/2} / (1·3·5···(m-2))`.
pub fn unit_surface_area(m: usize) -> Result<f64> {
    if m < 2 {
        return domain(format!("surface area needs m ≥ 2, got {m}"));
    }
    let v = if m.is_multiple_of(2) {
        let h = m / 2;
        let fact: f64 = (1..=h).map(|k| k as f64).product();
        PI.powi(h as i32) * m as f64 / fact
    } else {
        let odd: f64 = (1..=m - 2).step_by(2).map(|k| k as f64).product();
        2f64.powi((m as i32 + 1) / 2) * PI.powi((m as i32 - 1) / 2) / odd
    };
    Ok(v)
}

/// `σ_{m,r} = r^{m-1} σ_{m,1}`.
pub fn surface_area(m: usize, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(r.powi(m as i32 - 1) * unit_surface_area(m)?)
}

/// `ν_{m,r} = r^m σ_{m,1} / m`.
pub fn ball_volume(m: usize, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(r.powi(m as i32) * unit_surface_area(m)? / m as f64)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("radius must be positive, got {r}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureMethod {
    /// Deterministic chart quadrature; `m ∈ {2, 3}` only.
    ChartGauss,
    /// Importance-sampled chart quadrature for any `m ≥ 2`.
    ChartMonteCarlo { seed: u64, stream_id: u64 },
}

/// Nodes on the unit sphere with weights summing to `σ_{m,1}`.
#[derive(Debug)]
struct Rule {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// A surface quadrature rule for `∂D(y, r)` in `R^m`.
#[derive(Debug, Clone)]
pub struct SurfaceQuadrature {
    dim: usize,
    radius: f64,
    method: QuadratureMethod,
    node_count: usize,
    rule: Arc<Rule>,
    coarse: Option<Arc<Rule>>,
}

/// A quadrature value with an error estimate: the standard error for Monte
/// Carlo, the difference from a half-resolution rule otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl SurfaceQuadrature {
    /// Chart quadrature with `node_count` nodes per axis (`m = 2, 3`).
    pub fn gauss(m: usize, r: f64, node_count: usize) -> Result<Self> {
        check_radius(r)?;
        if node_count < 1 {
            return domain("node_count must be at least 1");
        }
        let build = |n: usize| match m {
            2 => Ok(chebyshev_circle_rule(n)),
            3 => Ok(polar_sphere_rule(n)),
            _ => domain(format!("chart-gauss quadrature supports m = 2, 3 only, got {m}")),
        };
        let rule = Arc::new(build(node_count)?);
        let coarse = (node_count >= 2)
            .then(|| build(node_count / 2).map(Arc::new))
            .transpose()?;
        Ok(SurfaceQuadrature {
            dim: m,
            radius: r,
            method: QuadratureMethod::ChartGauss,
            node_count,
            rule,
            coarse,
        })
    }

    /// Importance-sampled chart quadrature with `node_count` disc samples.
    pub fn monte_carlo(m: usize, r: f64, node_count: usize, seed: u64, stream_id: u64) -> Result<Self> {
        check_radius(r)?;
        if m < 2 {
            return domain(format!("surface quadrature needs m ≥ 2, got {m}"));
        }
        if node_count < 2 {
            return domain("Monte Carlo quadrature needs at least 2 samples");
        }
        let mut stream = Stream::new(seed, stream_id);
        let rule = Arc::new(chart_monte_carlo_rule(m, node_count, &mut stream)?);
        Ok(SurfaceQuadrature {
            dim: m,
            radius: r,
            method: QuadratureMethod::ChartMonteCarlo { seed, stream_id },
            node_count,
            rule,
            coarse: None,
        })
    }

    /// Chart-gauss at the default resolution for `m ∈ {2, 3}`, Monte Carlo otherwise.
    pub fn default_for(m: usize, r: f64) -> Result<Self> {
        match m {
            2 => Self::gauss(2, r, DEFAULT_NODES_2D),
            3 => Self::gauss(3, r, DEFAULT_NODES_3D),
            _ => Self::monte_carlo(m, r, DEFAULT_MC_NODES, 0x5EED, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn method(&self) -> QuadratureMethod {
        self.method
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Same nodes, different radius.
    pub fn with_radius(&self, r: f64) -> Result<Self> {
        check_radius(r)?;
        Ok(SurfaceQuadrature {
            radius: r,
            ..self.clone()
        })
    }

    /// `σ̄_{m,0,1}(f)`: the uniform average of `f` over the unit sphere.
    pub fn unit_average(&self, f: impl Fn(&[f64]) -> f64) -> Integral {
        let total = unit_surface_area(self.dim).expect("dimension validated at construction");
        let raw = self.integrate_rule(&f);
        Integral {
            value: raw.value / total,
            error: raw.error / total,
        }
    }

    /// Evaluates `f` at every node of the rule; used by callers that need
    /// several integrals of the same values.
    #[cfg(test)]
    pub(crate) fn unit_nodes(&self) -> impl Iterator<Item = (&[f64], f64)> {
        let total = unit_surface_area(self.dim).expect("dimension validated at construction");
        let rule = &self.rule;
        (0..rule.len()).map(move |i| (rule.point(i), rule.weights[i] / total))
    }

    fn integrate_rule(&self, f: &impl Fn(&[f64]) -> f64) -> Integral {
        match self.method {
            QuadratureMethod::ChartGauss => {
                let value = apply_rule(&self.rule, f);
                let error = self.coarse.as_ref().map_or(0.0, |c| (value - apply_rule(c, f)).abs());
                Integral { value, error }
            }
            QuadratureMethod::ChartMonteCarlo { .. } => {
                // nodes come in (+, -) hemisphere pairs; each pair is one sample
                let total = unit_surface_area(self.dim).expect("validated");
                let pairs: Vec<f64> = (0..self.rule.len() / 2)
                    .map(|k| 0.5 * (f(self.rule.point(2 * k)) + f(self.rule.point(2 * k + 1))))
                    .collect();
                let est = mc_estimate(&pairs).expect("nonempty");
                Integral {
                    value: total * est.mean,
                    error: total * est.std_error,
                }
            }
        }
    }
}

fn apply_rule(rule: &Rule, f: &impl Fn(&[f64]) -> f64) -> f64 {
    let terms: Vec<f64> = (0..rule.len()).map(|i| rule.weights[i] * f(rule.point(i))).collect();
    compensated_sum(&terms)
}

/// `σ_{m,0,r}(g)` over `∂D(0, r)` with the radius carried by `quad`.
pub fn surface_integral(g: impl Fn(&[f64]) -> f64, quad: &SurfaceQuadrature) -> Integral {
    surface_integral_centered(g, &Point::zeros(quad.dim), quad)
}

/// `σ_{m,y,r}(g) = ∫ σ_{m,0,r}(dz) g(y + z)`.
pub fn surface_integral_centered(g: impl Fn(&[f64]) -> f64, y: &Point, quad: &SurfaceQuadrature) -> Integral {
    assert_eq!(y.dim(), quad.dim, "centre and quadrature dimensions differ");
    let r = quad.radius;
    let scale = r.powi(quad.dim as i32 - 1);
    let yc = y.as_slice();
    let buf = RefCell::new(vec![0.0; quad.dim]);
    let f = |p: &[f64]| {
        let mut b = buf.borrow_mut();
        for ((bi, &pi), &yi) in b.iter_mut().zip(p).zip(yc) {
            *bi = yi + r * pi;
        }
        g(&b)
    };
    let raw = quad.integrate_rule(&f);
    Integral {
        value: scale * raw.value,
        error: scale * raw.error,
    }
}

/// `σ̄_{m,y,r}(g)`: the uniform average of `g` over `∂D(y, r)`.
pub fn uniform_average(g: impl Fn(&[f64]) -> f64, y: &Point, quad: &SurfaceQuadrature) -> Integral {
    let r = quad.radius;
    let yc = y.as_slice();
    quad.unit_average(|p| {
        let x: Vec<f64> = p.iter().zip(yc).map(|(pi, yi)| yi + r * pi).collect();
        g(&x)
    })
}

/// `m = 2`: Chebyshev nodes `θ_k = cos((2k-1)π/2n)` on both half circles.
fn chebyshev_circle_rule(n: usize) -> Rule {
    let w = PI / n as f64;
    let mut points = Vec::with_capacity(4 * n);
    let mut weights = Vec::with_capacity(2 * n);
    for k in 1..=n {
        let phi = (2 * k - 1) as f64 * PI / (2 * n) as f64;
        let (s, c) = phi.sin_cos();
        for sign in [1.0, -1.0] {
            points.extend_from_slice(&[c, sign * s]);
            weights.push(w);
        }
    }
    Rule {
        dim: 2,
        points,
        weights,
    }
}

/// `m = 3`: `θ = sin u (cos φ, sin φ)`, so the chart element is `sin u du dφ`.
fn polar_sphere_rule(n: usize) -> Rule {
    let (t, wt) = gauss_legendre(n);
    let n_phi = 2 * n;
    let w_phi = 2.0 * PI / n_phi as f64;
    let mut points = Vec::with_capacity(3 * 2 * n * n_phi);
    let mut weights = Vec::with_capacity(2 * n * n_phi);
    for (&ti, &wi) in t.iter().zip(&wt) {
        let u = 0.25 * PI * (ti + 1.0);
        let wu = 0.25 * PI * wi;
        let (su, cu) = u.sin_cos();
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * w_phi;
            let (sp, cp) = phi.sin_cos();
            for sign in [1.0, -1.0] {
                points.extend_from_slice(&[su * cp, su * sp, sign * cu]);
                weights.push(wu * su * w_phi);
            }
        }
    }
    Rule {
        dim: 3,
        points,
        weights,
    }
}

fn chart_monte_carlo_rule(m: usize, n: usize, stream: &mut Stream) -> Result<Rule> {
    let total = unit_surface_area(m)?;
    let beta = Beta::new(0.5 * (m - 1) as f64, 0.5).map_err(|e| crate::Error::Domain(format!("beta law: {e}")))?;
    let w = total / (2 * n) as f64;
    let mut points = Vec::with_capacity(2 * n * m);
    let mut dir = vec![0.0; m - 1];
    for _ in 0..n {
        let rho2: f64 = beta.sample(stream);
        let rho = rho2.sqrt();
        sample_unit_direction(stream, &mut dir);
        let last = (1.0 - rho2).max(0.0).sqrt();
        for sign in [1.0, -1.0] {
            points.extend(dir.iter().map(|d| rho * d));
            points.push(sign * last);
        }
    }
    Ok(Rule {
        dim: m,
        points,
        weights: vec![w; 2 * n],
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fills `out` with a uniform point of the unit sphere in `R^{out.len()}`
/// (normalized Gaussian vector; for length 1, a random sign).
pub fn sample_unit_direction(stream: &mut Stream, out: &mut [f64]) {
    loop {
        stream.fill_normal(out);
        let n = norm(out);
        if n >= GAUSSIAN_NORM_FLOOR {
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

/// A point distributed by `σ̄_{m,y,r}`.
pub fn uniform_sphere_sample(stream: &mut Stream, y: &Point, r: f64) -> Result<Point> {
    check_radius(r)?;
    let mut d = vec![0.0; y.dim()];
    sample_unit_direction(stream, &mut d);
    Ok(Point::new(
        d.iter().zip(y.as_slice()).map(|(di, yi)| yi + r * di).collect(),
    ))
}

/// Monte Carlo estimate of `ν_{m,s,r}^{-1} ∫_{D(0,s,r)} g(r x/‖x‖) dx` from
/// `n` points drawn uniformly in the shell by rejection from the cube `[-r, r]^m`.
pub fn shell_average(
    g: impl Fn(&[f64]) -> f64,
    m: usize,
    s: f64,
    r: f64,
    n: usize,
    stream: &mut Stream,
) -> Result<McEstimate> {
    check_radius(r)?;
    if !(s > 0.0 && s < r) {
        return domain(format!("shell needs 0 < s < r, got s = {s}, r = {r}"));
    }
    if n == 0 {
        return domain("shell_average needs at least one sample");
    }
    let mut x = vec![0.0; m];
    let mut vals = Vec::with_capacity(n);
    while vals.len() < n {
        for v in x.iter_mut() {
            *v = r * (2.0 * stream.uniform() - 1.0);
        }
        let nx = norm(&x);
        if nx > s && nx < r {
            x.iter_mut().for_each(|v| *v *= r / nx);
            vals.push(g(&x));
        }
    }
    mc_estimate(&vals)
}

/// Monte Carlo estimate of `σ_{m,1}` from `n` weighted chart samples.
///
/// Over each hemisphere the chart element is `ρ^{m-2}/√(1-ρ²) dρ dω`; with
/// `ρ = sin t` it becomes `sin^{m-2} t dt dω`, so `t` uniform on `[0, π/2]`
/// carries weight `2 · (π/2) · σ_{m-1,1} · sin^{m-2} t`.
pub fn chart_area_monte_carlo(m: usize, n: usize, stream: &mut Stream) -> Result<McEstimate> {
    if m < 3 {
        return domain(format!("chart area sampling needs m ≥ 3, got {m}"));
    }
    if n < 2 {
        return domain("chart area sampling needs at least 2 samples");
    }
    let c = PI * unit_surface_area(m - 1)?;
    let samples: Vec<f64> = (0..n)
        .map(|_| c * (0.5 * PI * stream.uniform()).sin().powi(m as i32 - 2))
        .collect();
    mc_estimate(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_areas() {
        assert!((unit_surface_area(2).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((unit_surface_area(3).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!((unit_surface_area(4).unwrap() - 2.0 * PI * PI).abs() < 1e-14);
        // σ_5 = 8π²/3
        assert!((unit_surface_area(5).unwrap() - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!(unit_surface_area(1).is_err());
    }

    #[test]
    fn chart_area_sampling_covers_closed_form() {
        let mut st = Stream::new(11, 0);
        for m in 3..=6 {
            let est = chart_area_monte_carlo(m, 100_000, &mut st).unwrap();
            assert!(est.std_error > 0.0);
            assert!(est.covers(unit_surface_area(m).unwrap(), 5.0), "m = {m}: {est:?}");
        }
        assert!(chart_area_monte_carlo(2, 10, &mut st).is_err());
    }

    #[test]
    fn volumes() {
        assert!((ball_volume(2, 1.0).unwrap() - PI).abs() < 1e-15);
        assert!((ball_volume(3, 1.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        for m in 2..7 {
            let ratio = ball_volume(m, 2.0).unwrap() / ball_volume(m, 1.0).unwrap();
            assert!((ratio - 2f64.powi(m as i32)).abs() < 1e-12);
        }
        assert!(ball_volume(2, -1.0).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        // exact for degree ≤ 13
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((int - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let (x1, w1) = gauss_legendre(1);
        assert_eq!((x1[0], w1[0]), (0.0, 2.0));
    }

    #[test]
    fn constant_integrand_gives_area() {
        let q2 = SurfaceQuadrature::gauss(2, 1.0, 64).unwrap();
        assert!((surface_integral(|_| 1.0, &q2).value - 2.0 * PI).abs() < 1e-10);
        let q3 = SurfaceQuadrature::gauss(3, 1.0, 32).unwrap();
        assert!((surface_integral(|_| 1.0, &q3).value - 4.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn odd_and_quadratic_moments_in_three_dimensions() {
        let q = SurfaceQuadrature::gauss(3, 1.0, 48).unwrap();
        assert!(surface_integral(|z| z[0], &q).value.abs() < 1e-8);
        let v = surface_integral(|z| z[0] * z[0], &q).value;
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-6);
    }

    #[test]
    fn gauss_rejects_unsupported_dimension() {
        assert!(SurfaceQuadrature::gauss(4, 1.0, 8).is_err());
        assert!(SurfaceQuadrature::gauss(2, 1.0, 0).is_err());
    }

    #[test]
    fn monte_carlo_nodes_lie_on_sphere() {
        let q = SurfaceQuadrature::monte_carlo(5, 1.0, 100, 1, 0).unwrap();
        for (p, _) in q.unit_nodes() {
            assert!((norm(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_samples_lie_on_sphere() {
        let mut s = Stream::new(2, 0);
        let y = Point::new(vec![1.0, -2.0, 0.5]);
        for _ in 0..1000 {
            let z = uniform_sphere_sample(&mut s, &y, 0.7).unwrap();
            assert!((z.distance(&y) - 0.7).abs() <= 1e-12);
        }
    }

    #[test]
    fn shell_average_of_constant_is_one() {
        let mut s = Stream::new(4, 0);
        let e = shell_average(|_| 1.0, 3, 0.5, 1.0, 1000, &mut s).unwrap();
        assert_eq!(e.mean, 1.0);
        assert!(shell_average(|_| 1.0, 3, 1.0, 1.0, 10, &mut s).is_err());
    }
}
