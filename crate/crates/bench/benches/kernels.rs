use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hardylim_core::brownian::{simulate_exit, wos_exit_point, PathConfig};
use hardylim_core::harmonic::{coordinate, hardy_integrals, poisson_extend};
use hardylim_core::sphere_measure::{surface_integral, SurfaceQuadrature};
use hardylim_core::{Point, Stream};

fn quadrature(c: &mut Criterion) {
    let q2 = SurfaceQuadrature::default_for(2, 1.0).unwrap();
    let q3 = SurfaceQuadrature::default_for(3, 1.0).unwrap();
    c.bench_function("surface_integral m=2", |b| {
        b.iter(|| surface_integral(|z| z[0] * z[0], black_box(&q2)))
    });
    c.bench_function("surface_integral m=3", |b| {
        b.iter(|| surface_integral(|z| z[0] * z[0], black_box(&q3)))
    });
    let x = Point::new(vec![0.5, -0.3, 0.2]);
    c.bench_function("poisson_extend m=3", |b| {
        b.iter(|| poisson_extend(|z| z[0], &Point::zeros(3), 1.0, black_box(&x), &q3).unwrap())
    });
    let u = coordinate(2, 0);
    c.bench_function("hardy_integrals m=2", |b| {
        b.iter(|| hardy_integrals(&u, black_box(0.9), &q2).unwrap())
    });
}

fn exits(c: &mut Criterion) {
    let mut stream = Stream::new(1, 0);
    let x = Point::new(vec![0.5, 0.0]);
    c.bench_function("wos_exit_point m=2 s=0.5", |b| {
        b.iter(|| wos_exit_point(&mut stream, black_box(&x), 1.0).unwrap())
    });
    let cfg = PathConfig::new(2, 1e-3, 100.0, 7).unwrap();
    let mut i = 0;
    c.bench_function("simulate_exit m=2 dt=1e-3", |b| {
        b.iter(|| {
            i += 1;
            simulate_exit(&cfg.for_path(1, i), &Point::zeros(2), 1.0).unwrap()
        })
    });
}

criterion_group!(benches, quadrature, exits);
criterion_main!(benches);
