//! Harmonic functions on the unit ball: Poisson kernel and extension,
//! mean-value and Laplacian witnesses, the integrals `I₁, I₂, I₃` over
//! concentric spheres, and a catalog of test functions with rate data.

use std::cell::RefCell;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{domain, Error, Result};
use crate::geom::{norm, rotation_to, Point, RotationMatrix};
use crate::martingale::lambda_bar;
use crate::sphere_measure::{Integral, SurfaceQuadrature};
use crate::tolerances::{LAPLACIAN_STEP, MONOTONE_STEP, ON_SPHERE, RATE_RESOLUTION};

pub type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type ModulusFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `k_{y,r}(x, z) = r^{m-2} (r² - ‖x - y‖²) / ‖z - x‖^m`.
///
/// This is the density of the exit point of Brownian motion started at `x`
/// relative to the uniform law on `∂D(y, r)`, so `∫ k σ̄(dz) = 1` for every `r`.
pub fn poisson_kernel(y: &Point, r: f64, x: &Point, z: &Point) -> Result<f64> {
    let m = y.dim();
    if x.dim() != m || z.dim() != m {
        return domain("poisson_kernel: dimension mismatch");
    }
    if !(r > 0.0) {
        return domain(format!("poisson_kernel: radius must be positive, got {r}"));
    }
    if x.distance(y) >= r {
        return domain("poisson_kernel: x must lie in the open ball");
    }
    if (z.distance(y) - r).abs() > ON_SPHERE * r.max(1.0) {
        return domain("poisson_kernel: z must lie on the sphere");
    }
    Ok(kernel(y.as_slice(), r, x.as_slice(), z.as_slice()))
}

#[inline]
pub(crate) fn kernel(y: &[f64], r: f64, x: &[f64], z: &[f64]) -> f64 {
    let m = y.len();
    let mut dxy = 0.0;
    let mut dzx = 0.0;
    for i in 0..m {
        dxy += (x[i] - y[i]) * (x[i] - y[i]);
        dzx += (z[i] - x[i]) * (z[i] - x[i]);
    }
    r.powi(m as i32 - 2) * (r * r - dxy) / dzx.sqrt().powi(m as i32)
}

/// Rotation sending the pole `ê_m` of the chart rules to the direction of `v`.
fn pole_towards(v: &[f64]) -> Result<RotationMatrix> {
    let m = v.len();
    let n = norm(v);
    if n == 0.0 {
        return Ok(RotationMatrix::identity(m));
    }
    let dir = Point::new(v.iter().map(|c| c / n).collect());
    let to_dir = rotation_to(&dir)?;
    let to_pole = rotation_to(&Point::basis(m, m - 1))?;
    Ok(to_dir.compose(&to_pole.transpose()))
}

/// Poisson integral `∫ k_{y,r}(x, z) g(z) σ̄_{m,y,r}(dz)`.
///
/// The nodes of `quad` are scaled to radius `r` and turned so that the pole
/// of the rule faces `x - y`, where the kernel peaks.
pub fn poisson_extend(
    g: impl Fn(&[f64]) -> f64,
    y: &Point,
    r: f64,
    x: &Point,
    quad: &SurfaceQuadrature,
) -> Result<Integral> {
    let m = y.dim();
    if x.dim() != m || quad.dim() != m {
        return domain("poisson_extend: dimension mismatch");
    }
    if !(r > 0.0) || x.distance(y) >= r {
        return domain("poisson_extend: x must lie in the open ball");
    }
    let rel: Vec<f64> = x.sub(y).into_vec();
    let rot = pole_towards(&rel)?;
    let (ys, xs) = (y.as_slice(), x.as_slice());
    let scratch = RefCell::new((vec![0.0; m], vec![0.0; m]));
    Ok(quad.unit_average(|p| {
        let (rp, z) = &mut *scratch.borrow_mut();
        rot.apply_slice(p, rp);
        for i in 0..m {
            z[i] = ys[i] + r * rp[i];
        }
        kernel(ys, r, xs, z) * g(z)
    }))
}

#[derive(Clone)]
pub enum Rate {
    /// A rate read off tabulated integrals, see [`estimate_rates`].
    Table(RateTable),
    Custom(RateFn),
}

impl Rate {
    pub fn eval(&self, eps: f64) -> f64 {
        match self {
            Rate::Table(t) => t.eval(eps),
            Rate::Custom(f) => f(eps),
        }
    }
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Rate::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Step-function inverse of `r ↦ |b - I_r|` on a radius grid, with a power-law
/// model `C (1 - r)^α` for targets finer than the grid resolves.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    gaps: Vec<f64>,
    /// `max_{k ≥ j} |b - I_{r_k}|`
    tail_residuals: Vec<f64>,
    model_scale: f64,
    model_exponent: f64,
}

impl RateTable {
    fn new(gaps: Vec<f64>, residuals: &[f64], model_scale: f64, model_exponent: f64) -> Self {
        let mut tail = residuals.to_vec();
        for j in (0..tail.len().saturating_sub(1)).rev() {
            tail[j] = tail[j].max(tail[j + 1]);
        }
        RateTable {
            gaps,
            tail_residuals: tail,
            model_scale,
            model_exponent,
        }
    }

    /// Half the smallest of: the grid inverse, the model inverse, and `ε`.
    pub fn eval(&self, eps: f64) -> f64 {
        let model = if self.model_scale > 0.0 {
            (eps / self.model_scale).powf(1.0 / self.model_exponent)
        } else {
            f64::INFINITY
        };
        let last_gap = *self.gaps.last().expect("nonempty grid");
        let grid = self
            .tail_residuals
            .iter()
            .position(|&res| res < eps)
            .map(|j| self.gaps[j]);
        let raw = match grid {
            Some(g) => g.min(model),
            None => model.min(last_gap),
        };
        0.5 * raw.min(eps).min(1.0)
    }
}

/// Hardy-space rate data for `u ∈ h^p`: bounds on and convergence rates of
/// `I₁(r) → b₁` and `I₂(r) → b₂` as `r ↑ 1`.
#[derive(Debug, Clone)]
pub struct RateData {
    pub p: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    delta1: Rate,
    delta2: Rate,
}

impl RateData {
    pub fn new(p: f64, b0: f64, b1: f64, delta1: Rate, b2: f64, delta2: Rate) -> Result<Self> {
        if !(p >= 1.0) {
            return domain(format!("exponent p must be at least 1, got {p}"));
        }
        if !(b1 >= 0.0) || !(b0 >= 0.0) {
            return domain("b0 and b1 must be nonnegative");
        }
        if !(0.0..=1.0).contains(&b2) {
            return domain(format!("b2 must lie in [0, 1], got {b2}"));
        }
        Ok(RateData {
            p,
            b0,
            b1,
            b2,
            delta1,
            delta2,
        })
    }

    /// Rate data with closure-valued `δ₁, δ₂`.
    pub fn from_fns(
        b1: f64,
        delta1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b2: f64,
        delta2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(
            1.0,
            b1,
            b1,
            Rate::Custom(Arc::new(delta1)),
            b2,
            Rate::Custom(Arc::new(delta2)),
        )
    }

    pub fn delta1(&self, eps: f64) -> f64 {
        self.delta1.eval(eps)
    }

    pub fn delta2(&self, eps: f64) -> f64 {
        self.delta2.eval(eps)
    }

    /// `γ = b₂ - 1 + b₁`, the limit of `I₃`.
    pub fn gamma(&self) -> f64 {
        self.b2 - 1.0 + self.b1
    }
}

/// A harmonic function on the open unit ball with its metadata.
#[derive(Clone)]
pub struct HarmonicFn {
    name: String,
    dim: usize,
    eval: EvalFn,
    modulus: ModulusFn,
    boundary: Option<EvalFn>,
    hardy: Option<RateData>,
}

impl fmt::Debug for HarmonicFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HarmonicFn")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("boundary", &self.boundary.is_some())
            .field("hardy", &self.hardy)
            .finish()
    }
}

impl HarmonicFn {
    /// `lipschitz(r)` bounds `|∇u|` on the closed ball of radius `r`; the
    /// modulus of continuity is then `ε / lipschitz(r)`.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        lipschitz: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let modulus = move |r: f64, eps: f64| {
            let l = lipschitz(r);
            if l > 0.0 {
                (eps / l).min(2.0 * r)
            } else {
                2.0 * r
            }
        };
        HarmonicFn {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            modulus: Arc::new(modulus),
            boundary: None,
            hardy: None,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new("zero", dim, |_| 0.0, |_| 0.0).with_boundary(|_| 0.0)
    }

    pub fn with_boundary(mut self, g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.boundary = Some(Arc::new(g));
        self
    }

    pub fn with_hardy(mut self, rates: RateData) -> Self {
        self.hardy = Some(rates);
        self
    }

    /// `u - u(0)`; boundary values shift with it.
    pub fn centered(self) -> Self {
        let c = (self.eval)(&vec![0.0; self.dim]);
        if c == 0.0 {
            return self;
        }
        let eval = self.eval.clone();
        let boundary = self.boundary.clone();
        HarmonicFn {
            eval: Arc::new(move |x| eval(x) - c),
            boundary: boundary.map(|b| Arc::new(move |z: &[f64]| b(z) - c) as EvalFn),
            ..self
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn value(&self, x: &Point) -> f64 {
        (self.eval)(x.as_slice())
    }

    /// `δ` such that `|u(x) - u(x')| ≤ ε` whenever `‖x - x'‖ < δ` on `B̄(0, r)`.
    pub fn modulus(&self, r: f64, eps: f64) -> f64 {
        (self.modulus)(r, eps)
    }

    pub fn boundary(&self) -> Option<&EvalFn> {
        self.boundary.as_ref()
    }

    pub fn hardy(&self) -> Option<&RateData> {
        self.hardy.as_ref()
    }
}

fn check_in_ball(x: &[f64], margin: f64, what: &str) -> Result<()> {
    if norm(x) + margin >= 1.0 {
        return domain(format!("{what}: ball of radius {margin} around x leaves the unit ball"));
    }
    Ok(())
}

/// `|u(y) - σ̄_{m,y,r}(u)|`.
pub fn mean_value_residual(u: &HarmonicFn, y: &Point, r: f64, quad: &SurfaceQuadrature) -> Result<f64> {
    if y.dim() != u.dim || quad.dim() != u.dim {
        return domain("mean_value_residual: dimension mismatch");
    }
    if !(r > 0.0) {
        return domain("mean_value_residual: radius must be positive");
    }
    check_in_ball(y.as_slice(), r, "mean_value_residual")?;
    let ys = y.as_slice();
    let avg = quad.unit_average(|p| {
        let x: Vec<f64> = p.iter().zip(ys).map(|(pi, yi)| yi + r * pi).collect();
        u.eval(&x)
    });
    Ok((u.eval(ys) - avg.value).abs())
}

/// Central second-difference Laplacian `Σᵢ (u(x+heᵢ) - 2u(x) + u(x-heᵢ)) / h²`.
pub fn laplacian_fd(u: &HarmonicFn, x: &Point, h: f64) -> Result<f64> {
    if x.dim() != u.dim {
        return domain("laplacian_fd: dimension mismatch");
    }
    if !(h > 0.0) {
        return domain("laplacian_fd: step must be positive");
    }
    check_in_ball(x.as_slice(), h, "laplacian_fd")?;
    let mut p = x.as_slice().to_vec();
    let centre = u.eval(&p);
    let mut acc = 0.0;
    for i in 0..p.len() {
        let xi = p[i];
        p[i] = xi + h;
        let fwd = u.eval(&p);
        p[i] = xi - h;
        let bwd = u.eval(&p);
        p[i] = xi;
        acc += fwd - 2.0 * centre + bwd;
    }
    Ok(acc / (h * h))
}

/// Laplacian at the default step.
pub fn laplacian(u: &HarmonicFn, x: &Point) -> Result<f64> {
    laplacian_fd(u, x, LAPLACIAN_STEP)
}

/// `I₁ = σ̄|u(r·)|`, `I₂ = σ̄ e^{-|u(r·)|}` and `I₃ = σ̄ λ̄(u(r·))` over the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyIntegrals {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// Quadrature error estimates of `I₁, I₂, I₃`.
    pub errors: [f64; 3],
}

impl HardyIntegrals {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

pub fn hardy_integrals(u: &HarmonicFn, r: f64, quad: &SurfaceQuadrature) -> Result<HardyIntegrals> {
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("hardy_integrals: r must lie in (0, 1), got {r}"));
    }
    if quad.dim() != u.dim {
        return domain("hardy_integrals: dimension mismatch");
    }
    let scratch = RefCell::new(vec![0.0; u.dim]);
    let integrate = |f: &dyn Fn(f64) -> f64| {
        quad.unit_average(|p| {
            let x = &mut *scratch.borrow_mut();
            for (xi, pi) in x.iter_mut().zip(p) {
                *xi = r * pi;
            }
            f(u.eval(x))
        })
    };
    let a = integrate(&|v| v.abs());
    let b = integrate(&|v| (-v.abs()).exp());
    let c = integrate(&lambda_bar);
    Ok(HardyIntegrals {
        i1: a.value,
        i2: b.value,
        i3: c.value,
        errors: [a.error, b.error, c.error],
    })
}

/// `r_j = 1 - 2^{-j}` for `j = 1..=levels`.
pub fn geometric_grid(levels: usize) -> Vec<f64> {
    (1..=levels).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect()
}

/// Limit of a sequence sampled at gaps `h_j = 1 - r_j`, assuming
/// `I_r = L - C (1 - r)^α` near `r = 1`; fitted on the last three points.
#[derive(Debug, Clone, Copy)]
struct PowerLawFit {
    limit: f64,
    scale: f64,
    exponent: f64,
    tail: f64,
}

fn fit_power_law(gaps: &[f64], vals: &[f64]) -> PowerLawFit {
    let n = vals.len();
    let last = vals[n - 1];
    let (h0, h1, h2) = (gaps[n - 3], gaps[n - 2], gaps[n - 1]);
    let d1 = vals[n - 2] - vals[n - 3];
    let d2 = vals[n - 1] - vals[n - 2];
    if d2.abs() <= 1e-12 {
        return PowerLawFit {
            limit: last,
            scale: 0.0,
            exponent: 1.0,
            tail: 0.0,
        };
    }
    let ratio = |a: f64| (h0.powf(a) - h1.powf(a)) / (h1.powf(a) - h2.powf(a));
    let target = d1 / d2;
    let exponent = if target > 0.0 {
        let (mut lo, mut hi) = (1e-3f64, 50.0f64);
        if target <= ratio(lo) {
            lo
        } else if target >= ratio(hi) {
            hi
        } else {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if ratio(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    } else {
        1.0
    };
    let c = d2 / (h1.powf(exponent) - h2.powf(exponent));
    let tail = c * h2.powf(exponent);
    PowerLawFit {
        limit: last + tail,
        scale: c.abs(),
        exponent,
        tail,
    }
}

/// Reads `b₁, b₂` and the rates `δ₁, δ₂` off `I₁, I₂, I₃` on `r_grid`.
///
/// Radii from the first one whose quadrature error estimate exceeds
/// `RATE_RESOLUTION` on are dropped; at least three must remain.
/// `I₁` and `I₃` are checked to be nondecreasing. `b₁` and `γ` are the
/// extrapolated limits of `I₁` and `I₃` plus a margin, and `b₂ = γ + 1 - b₁`
/// so that `γ = b₂ - 1 + b₁` holds exactly. `δ₂` inverts `|b₂ - I₂|`.
pub fn estimate_rates(u: &HarmonicFn, r_grid: &[f64], quad: &SurfaceQuadrature) -> Result<RateData> {
    if r_grid.len() < 3 {
        return domain("estimate_rates needs at least three radii");
    }
    if r_grid.windows(2).any(|w| w[0] >= w[1]) || r_grid[0] <= 0.0 || r_grid[r_grid.len() - 1] >= 1.0 {
        return domain("estimate_rates: grid must be strictly increasing in (0, 1)");
    }
    let mut ints = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let h = hardy_integrals(u, r, quad)?;
        if h.max_error() > RATE_RESOLUTION {
            break;
        }
        ints.push(h);
    }
    if ints.len() < 3 {
        return domain(format!(
            "estimate_rates: quadrature resolves only {} radii for {}",
            ints.len(),
            u.name()
        ));
    }
    let r_grid = &r_grid[..ints.len()];
    let i1: Vec<f64> = ints.iter().map(|h| h.i1).collect();
    let i2: Vec<f64> = ints.iter().map(|h| h.i2).collect();
    let i3: Vec<f64> = ints.iter().map(|h| h.i3).collect();
    let err = |k: usize| ints.iter().map(|h| h.errors[k]).fold(0.0, f64::max);
    for (label, seq, e) in [("I1", &i1, err(0)), ("I3", &i3, err(2))] {
        if let Some(w) = seq.windows(2).find(|w| w[1] - w[0] < -(MONOTONE_STEP + e)) {
            return Err(Error::InvariantViolation(format!(
                "{label} decreases from {} to {} for {}",
                w[0],
                w[1],
                u.name()
            )));
        }
    }
    let gaps: Vec<f64> = r_grid.iter().map(|r| 1.0 - r).collect();
    let f1 = fit_power_law(&gaps, &i1);
    let f3 = fit_power_law(&gaps, &i3);
    let f2 = fit_power_law(&gaps, &i2);
    let margin = |f: &PowerLawFit, e: f64| 1e-4 * f.tail.abs() + e;
    let top = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let b1 = (f1.limit + margin(&f1, err(0))).max(top(&i1));
    let gamma = (f3.limit + margin(&f3, err(2))).max(top(&i3));
    let b2 = (gamma + 1.0 - b1).clamp(0.0, 1.0);
    let res1: Vec<f64> = i1.iter().map(|v| b1 - v).collect();
    let res2: Vec<f64> = i2.iter().map(|v| (b2 - v).abs()).collect();
    let d1 = RateTable::new(gaps.clone(), &res1, f1.scale, f1.exponent);
    let d2 = RateTable::new(gaps, &res2, f2.scale, f2.exponent);
    RateData::new(1.0, b1, b1, Rate::Table(d1), b2, Rate::Table(d2))
}

/// Levels of the geometric grid behind the catalog's rate estimates.
const CATALOG_LEVELS: usize = 20;

fn with_rates(u: HarmonicFn) -> HarmonicFn {
    let quad = SurfaceQuadrature::default_for(u.dim(), 1.0).expect("catalog dimensions are 2 or 3");
    match estimate_rates(&u, &geometric_grid(CATALOG_LEVELS), &quad) {
        Ok(rates) => u.with_hardy(rates),
        Err(_) => u,
    }
}

fn complex_power(n: u32, x: f64, y: f64) -> (f64, f64) {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..n {
        (re, im) = (re * x - im * y, re * y + im * x);
    }
    (re, im)
}

/// Coordinate function `x_i` in dimension `m`.
pub fn coordinate(m: usize, i: usize) -> HarmonicFn {
    HarmonicFn::new(format!("x{}_m{m}", i + 1), m, move |x| x[i], |_| 1.0).with_boundary(move |z| z[i])
}

/// `x ↦ k_{0,1}(x, ê_m)`: positive, with `σ̄|u(r·)| = 1` for every `r`.
pub fn poisson_slice(m: usize) -> HarmonicFn {
    let pole: Vec<f64> = Point::basis(m, m - 1).into_vec();
    let origin = vec![0.0; m];
    let mf = m as i32;
    HarmonicFn::new(
        format!("poisson_slice_m{m}"),
        m,
        move |x| kernel(&origin, 1.0, x, &pole),
        move |r| 2.0 * r / (1.0 - r).powi(mf) + m as f64 / (1.0 - r).powi(mf + 1),
    )
}

/// The test functions, with rate data attached.
///
/// Members vanish at the origin except the Poisson slices, whose value 1 at
/// the origin is what makes `I₁ ≡ 1`.
pub fn catalog() -> Vec<HarmonicFn> {
    static CATALOG: OnceLock<Vec<HarmonicFn>> = OnceLock::new();
    CATALOG.get_or_init(build_catalog).clone()
}

/// Looks a catalog member up by name.
pub fn catalog_member(name: &str) -> Option<HarmonicFn> {
    catalog().into_iter().find(|u| u.name() == name)
}

fn build_catalog() -> Vec<HarmonicFn> {
    let mut raw = Vec::new();
    for m in [2usize, 3] {
        for i in 0..m {
            raw.push(coordinate(m, i));
        }
    }
    for n in 2..=4u32 {
        let lip = move |r: f64| n as f64 * r.powi(n as i32 - 1);
        let re = HarmonicFn::new(format!("re_z{n}"), 2, move |x| complex_power(n, x[0], x[1]).0, lip)
            .with_boundary(move |z| complex_power(n, z[0], z[1]).0);
        let im = HarmonicFn::new(format!("im_z{n}"), 2, move |x| complex_power(n, x[0], x[1]).1, lip)
            .with_boundary(move |z| complex_power(n, z[0], z[1]).1);
        raw.push(re);
        raw.push(im);
    }
    raw.push(HarmonicFn::new("x1x2_m3", 3, |x| x[0] * x[1], |r| r).with_boundary(|z| z[0] * z[1]));
    raw.push(
        HarmonicFn::new("x1x2x3_m3", 3, |x| x[0] * x[1] * x[2], |r| r * r / 3f64.sqrt())
            .with_boundary(|z| z[0] * z[1] * z[2]),
    );
    raw.push(poisson_slice(2));
    raw.push(poisson_slice(3));
    raw.into_iter()
        .map(|u| {
            let u = if u.name().starts_with("poisson_slice") {
                u
            } else {
                u.centered()
            };
            with_rates(u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec())
    }

    #[test]
    fn kernel_examples() {
        let o = Point::zeros(2);
        let k = poisson_kernel(&o, 1.0, &o, &p(&[0.6, 0.8])).unwrap();
        assert!((k - 1.0).abs() < 1e-15);
        let k = poisson_kernel(&o, 1.0, &p(&[0.5, 0.0]), &p(&[1.0, 0.0])).unwrap();
        assert!((k - 3.0).abs() < 1e-14);
        let k = poisson_kernel(&o, 1.0, &p(&[0.5, 0.0]), &p(&[-1.0, 0.0])).unwrap();
        assert!((k - 1.0 / 3.0).abs() < 1e-15);
        // centre of any ball, any radius
        let y = p(&[0.2, -0.1, 0.3]);
        let z = y.add(&p(&[0.0, 2.5, 0.0]));
        assert!((poisson_kernel(&y, 2.5, &y, &z).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_rejects_bad_points() {
        let o = Point::zeros(2);
        assert!(poisson_kernel(&o, 1.0, &p(&[1.0, 0.0]), &p(&[0.0, 1.0])).is_err());
        assert!(poisson_kernel(&o, 1.0, &o, &p(&[0.0, 0.9])).is_err());
        assert!(poisson_kernel(&o, 1.0, &o, &Point::zeros(3)).is_err());
    }

    #[test]
    fn extension_reproduces_harmonic_polynomials() {
        let q = SurfaceQuadrature::default_for(2, 1.0).unwrap();
        let o = Point::zeros(2);
        for x in [[0.0, 0.0], [0.3, -0.4], [0.85, 0.1], [-0.2, 0.88]] {
            let x = p(&x);
            let one = poisson_extend(|_| 1.0, &o, 1.0, &x, &q).unwrap().value;
            assert!((one - 1.0).abs() < 1e-8);
            let v = poisson_extend(|z| z[0] * z[0] - z[1] * z[1], &o, 1.0, &x, &q)
                .unwrap()
                .value;
            assert!((v - (x[0] * x[0] - x[1] * x[1])).abs() < 1e-6);
        }
        assert!(poisson_extend(|_| 1.0, &o, 1.0, &p(&[1.0, 0.0]), &q).is_err());
    }

    #[test]
    fn extension_in_three_dimensions() {
        let q = SurfaceQuadrature::default_for(3, 1.0).unwrap();
        let o = Point::zeros(3);
        let x = p(&[0.5, -0.4, 0.6]);
        let v = poisson_extend(|z| z[0], &o, 1.0, &x, &q).unwrap().value;
        assert!((v - 0.5).abs() < 1e-6, "{v}");
        // off-centre ball
        let y = p(&[0.1, 0.2, -0.1]);
        let x = p(&[0.3, 0.2, 0.0]);
        let v = poisson_extend(|z| z[0] * z[1], &y, 0.5, &x, &q).unwrap().value;
        assert!((v - 0.06).abs() < 1e-6, "{v}");
    }

    #[test]
    fn mean_value_examples() {
        let q2 = SurfaceQuadrature::default_for(2, 1.0).unwrap();
        let x1 = coordinate(2, 0);
        assert!(mean_value_residual(&x1, &p(&[0.3, 0.0]), 0.2, &q2).unwrap() < 1e-8);
        let q3 = SurfaceQuadrature::default_for(3, 1.0).unwrap();
        let prod = HarmonicFn::new("xy", 3, |x| x[0] * x[1], |r| r);
        for r in [0.1, 0.5, 0.9] {
            assert!(mean_value_residual(&prod, &Point::zeros(3), r, &q3).unwrap() < 1e-8);
        }
        let sq = HarmonicFn::new("sq", 2, |x| x[0] * x[0] + x[1] * x[1], |r| 2.0 * r);
        let res = mean_value_residual(&sq, &Point::zeros(2), 0.5, &q2).unwrap();
        assert!((res - 0.25).abs() < 1e-12);
        assert!(mean_value_residual(&x1, &p(&[0.5, 0.0]), 0.5, &q2).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let x = p(&[0.2, 0.3, -0.1]);
        let lin = HarmonicFn::new("lin", 3, |x| x[0], |_| 1.0);
        assert!(laplacian_fd(&lin, &x, 1e-3).unwrap().abs() < 1e-6);
        let saddle = HarmonicFn::new("saddle", 3, |x| x[0] * x[0] - x[1] * x[1], |r| 2.0 * r);
        assert!(laplacian_fd(&saddle, &x, 1e-3).unwrap().abs() < 1e-6);
        let sq = HarmonicFn::new("sq", 3, |x| x.iter().map(|c| c * c).sum(), |r| 2.0 * r);
        assert!((laplacian_fd(&sq, &x, 1e-3).unwrap() - 6.0).abs() < 1e-4);
        assert!(laplacian_fd(&lin, &p(&[0.9995, 0.0, 0.0]), 1e-3).is_err());
    }

    #[test]
    fn hardy_integrals_of_zero_and_coordinate() {
        let q = SurfaceQuadrature::default_for(2, 1.0).unwrap();
        let h = hardy_integrals(&HarmonicFn::zero(2), 0.5, &q).unwrap();
        assert_eq!((h.i1, h.i3), (0.0, 0.0));
        assert!((h.i2 - 1.0).abs() < 1e-15);
        let x1 = coordinate(2, 0);
        for r in [0.1, 0.5, 0.9] {
            let h = hardy_integrals(&x1, r, &q).unwrap();
            assert!((h.i1 - 2.0 * r / PI).abs() < 1e-7, "{r}: {}", h.i1);
            assert!((h.i3 - (h.i2 - 1.0 + h.i1)).abs() <= 1e-12);
            assert!(h.i2 <= 1.0);
        }
        assert!(hardy_integrals(&x1, 1.0, &q).is_err());
    }

    #[test]
    fn rates_of_zero_function() {
        let q = SurfaceQuadrature::default_for(2, 1.0).unwrap();
        let grid = geometric_grid(8);
        let rates = estimate_rates(&HarmonicFn::zero(2), &grid, &q).unwrap();
        assert_eq!((rates.b1, rates.b2), (0.0, 1.0));
        for eps in [0.5, 0.1, 1e-3, 1e-9] {
            let d = rates.delta1(eps);
            assert!(d > 0.0 && d < 1.0);
            assert_eq!(d, rates.delta2(eps));
            assert_eq!(d, 0.5 * eps.min(0.5));
        }
    }

    #[test]
    fn rates_of_coordinate_function() {
        let q = SurfaceQuadrature::default_for(2, 1.0).unwrap();
        let rates = estimate_rates(&coordinate(2, 0), &geometric_grid(20), &q).unwrap();
        assert!((rates.b1 - 2.0 / PI).abs() < 1e-6, "{}", rates.b1);
        let eps: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k)).collect();
        for w in eps.windows(2) {
            // w[0] > w[1]
            assert!(rates.delta1(w[1]) <= rates.delta1(w[0]));
            assert!(rates.delta2(w[1]) <= rates.delta2(w[0]));
        }
    }

    #[test]
    fn rates_reject_decreasing_integrals() {
        // a harmonic function is never this, but the check should fire
        let shrinking = HarmonicFn::new("shrinking", 2, |x| (1.0 - norm(x)).max(0.0), |_| 1.0);
        let q = SurfaceQuadrature::gauss(2, 1.0, 64).unwrap();
        let err = estimate_rates(&shrinking, &[0.2, 0.4, 0.6], &q).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(_)));
    }

    #[test]
    fn catalog_contents() {
        let cat = catalog();
        let x1 = cat.iter().find(|u| u.name() == "x1_m2").unwrap();
        assert!((x1.hardy().unwrap().b1 - 2.0 / PI).abs() < 1e-6);
        for name in [
            "re_z4",
            "im_z2",
            "x1x2_m3",
            "x1x2x3_m3",
            "x3_m3",
            "poisson_slice_m2",
            "poisson_slice_m3",
        ] {
            assert!(catalog_member(name).is_some(), "{name}");
        }
        for u in &cat {
            assert!(u.hardy().is_some(), "{} has no rate data", u.name());
        }
        for m in [2, 3] {
            let rates = catalog_member(&format!("poisson_slice_m{m}"))
                .unwrap()
                .hardy()
                .unwrap()
                .clone();
            assert!(rates.b1 >= 1.0 && rates.b1 < 1.0 + 1e-4, "m = {m}: b1 = {}", rates.b1);
        }
    }

    #[test]
    fn unresolved_radii_are_dropped() {
        let q = SurfaceQuadrature::default_for(3, 1.0).unwrap();
        let u = poisson_slice(3);
        assert!(estimate_rates(&u, &geometric_grid(20), &q).is_ok());
        assert!(estimate_rates(&u, &[0.999, 0.9995, 0.9999], &q).is_err());
    }

    #[test]
    fn poisson_slice_has_unit_mean_modulus() {
        let q = SurfaceQuadrature::default_for(2, 1.0).unwrap();
        let u = poisson_slice(2);
        for r in [0.1, 0.5, 0.9, 0.99] {
            let h = hardy_integrals(&u, r, &q).unwrap();
            assert!((h.i1 - 1.0).abs() < 1e-10, "{r}: {}", h.i1);
        }
        let q = SurfaceQuadrature::default_for(3, 1.0).unwrap();
        let u = poisson_slice(3);
        for r in [0.1, 0.5, 0.9, 0.99] {
            let h = hardy_integrals(&u, r, &q).unwrap();
            assert!((h.i1 - 1.0).abs() < 1e-8, "{r}: {}", h.i1);
        }
    }

    #[test]
    fn modulus_bounds_increments() {
        for u in catalog() {
            let m = u.dim();
            let r = 0.8;
            let eps = 1e-3;
            let d = u.modulus(r, eps);
            assert!(d > 0.0);
            let a = Point::new((0..m).map(|i| if i == 0 { 0.5 } else { 0.1 }).collect());
            let mut b = a.clone();
            b[0] += 0.99 * d.min(0.2);
            assert!((u.value(&a) - u.value(&b)).abs() <= eps * (1.0 + 1e-9), "{}", u.name());
        }
    }
}
