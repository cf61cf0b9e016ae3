//! Library values against independently computed references.

use std::f64::consts::PI;

use hardylim_core::brownian::{reflection_prob, tightness_n};
use hardylim_core::harmonic::{catalog_member, hardy_integrals, poisson_extend};
use hardylim_core::martingale::lambda_bar;
use hardylim_core::sphere_measure::{ball_volume, unit_surface_area, SurfaceQuadrature};
use hardylim_core::Point;

type Poly = fn(&[f64]) -> f64;

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `P(|N(0,1)| < a)` by quadrature of the density.
fn central_mass(a: f64) -> f64 {
    2.0 * simpson(|x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt(), 0.0, a, 4000)
}

#[test]
fn sphere_areas_follow_the_dimension_recursion() {
    // σ_{m+2} = 2π σ_m / m, from σ_1 = 2 and σ_2 = 2π
    let mut sigma = vec![0.0, 2.0, 2.0 * PI];
    for m in 1..=10 {
        let next = 2.0 * PI * sigma[m] / m as f64;
        sigma.push(next);
    }
    for (m, &want) in sigma.iter().enumerate().skip(2) {
        let got = unit_surface_area(m).unwrap();
        assert!((got - want).abs() <= 1e-13 * want, "m = {m}: {got} vs {want}");
        let vol = ball_volume(m, 0.7).unwrap();
        assert!((vol - want * 0.7f64.powi(m as i32) / m as f64).abs() <= 1e-13 * vol);
    }
}

#[test]
fn reflection_probability_against_density_quadrature() {
    for &(t, lam) in &[(1.0, 1.0), (2.0, 0.5), (0.25, 1.5), (4.0, 3.0)] {
        let want = 1.0 - central_mass(lam / f64::sqrt(t));
        let got = reflection_prob(t, lam).unwrap();
        assert!((got - want).abs() < 1e-12, "t = {t}, λ = {lam}: {got} vs {want}");
    }
}

#[test]
fn tightness_table_is_the_first_crossing() {
    for k in 0..=12u32 {
        let n = tightness_n(2.0, k).unwrap();
        let target = 0.5f64.powi(k as i32);
        assert!(central_mass(2.0 / (n as f64).sqrt()) < target, "k = {k}, N = {n}");
        if n > 1 {
            assert!(
                central_mass(2.0 / ((n - 1) as f64).sqrt()) >= target,
                "k = {k}, N = {n} is not minimal"
            );
        }
    }
    assert_eq!(tightness_n(2.0, 1).unwrap(), 9);
}

#[test]
fn lambda_bar_against_long_series() {
    for i in 1..=200 {
        let v = -1.0 + 2.0 * i as f64 / 200.0;
        let a = f64::abs(v);
        // Σ_{k≥2} (-a)^k / k!, alternating with shrinking terms
        let mut term = a * a / 2.0;
        let mut sum = 0.0;
        let mut k = 2.0;
        while term.abs() > 1e-30 {
            sum += term;
            k += 1.0;
            term *= -a / k;
        }
        let got = lambda_bar(v);
        assert!((got - sum).abs() <= 4.0 * f64::EPSILON * sum, "v = {v}: {got} vs {sum}");
    }
    for v in [1.5, 3.0, -8.0, 40.0] {
        let want = f64::exp(-f64::abs(v)) - 1.0 + f64::abs(v);
        assert!((lambda_bar(v) - want).abs() <= 2.0 * f64::EPSILON * want);
    }
}

#[test]
fn poisson_extension_of_harmonic_polynomials() {
    let q2 = SurfaceQuadrature::default_for(2, 1.0).unwrap();
    let o2 = Point::zeros(2);
    for &(rho, th) in &[(0.3, 0.4), (0.75, 2.0), (0.9, -1.1)] {
        let x = Point::new(vec![rho * f64::cos(th), rho * f64::sin(th)]);
        for n in 1..=4 {
            let g = |z: &[f64]| f64::cos(n as f64 * f64::atan2(z[1], z[0]));
            let got = poisson_extend(g, &o2, 1.0, &x, &q2).unwrap().value;
            let want = rho.powi(n) * f64::cos(n as f64 * th);
            assert!((got - want).abs() < 1e-8, "n = {n}, x = {x:?}: {got} vs {want}");
        }
    }
    let q3 = SurfaceQuadrature::default_for(3, 1.0).unwrap();
    let y = Point::new(vec![0.1, -0.2, 0.05]);
    let x = Point::new(vec![0.4, 0.1, -0.3]);
    let polys: [(Poly, &str); 3] = [
        (|p| p[0] * p[1], "x1 x2"),
        (|p| p[0] * p[0] - p[2] * p[2], "x1^2 - x3^2"),
        (|p| p[0] * p[1] * p[2], "x1 x2 x3"),
    ];
    for (h, name) in polys {
        let got = poisson_extend(h, &y, 0.7, &x, &q3.with_radius(0.7).unwrap())
            .unwrap()
            .value;
        let want = h(x.as_slice());
        assert!((got - want).abs() < 1e-8, "{name}: {got} vs {want}");
    }
}

#[test]
fn hardy_integrals_of_x1_in_closed_form() {
    let u2 = catalog_member("x1_m2").unwrap();
    let u3 = catalog_member("x1_m3").unwrap();
    let q2 = SurfaceQuadrature::default_for(2, 1.0).unwrap();
    let q3 = SurfaceQuadrature::default_for(3, 1.0).unwrap();
    for r in [0.1, 0.5, 0.9, 0.99] {
        // m = 2: average over the circle of |r cos θ| and e^{-r|cos θ|}
        let h = hardy_integrals(&u2, r, &q2).unwrap();
        let i2 = 2.0 / PI * simpson(|t| f64::exp(-r * f64::cos(t)), 0.0, PI / 2.0, 2000);
        assert!((h.i1 - 2.0 * r / PI).abs() < 1e-5, "r = {r}: {}", h.i1);
        assert!((h.i2 - i2).abs() < 1e-5, "r = {r}: {} vs {i2}", h.i2);
        assert!((h.i3 - (h.i2 - 1.0 + h.i1)).abs() < 1e-12);
        // m = 3: x1 is uniform on [-1, 1] under the surface measure
        let h = hardy_integrals(&u3, r, &q3).unwrap();
        assert!((h.i1 - r / 2.0).abs() < 1e-4, "r = {r}: {}", h.i1);
        assert!((h.i2 - (1.0 - f64::exp(-r)) / r).abs() < 1e-4, "r = {r}: {}", h.i2);
    }
}

#[test]
fn exponential_integral_of_x1_falls_with_radius() {
    // e^{-|v|} decreases in |v| and |u(r z)| grows with r, so I2 cannot rise
    let u = catalog_member("x1_m3").unwrap();
    let q = SurfaceQuadrature::default_for(3, 1.0).unwrap();
    let vals: Vec<f64> = [0.2, 0.4, 0.6, 0.8]
        .iter()
        .map(|&r| hardy_integrals(&u, r, &q).unwrap().i2)
        .collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
}
