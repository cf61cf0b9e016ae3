use proptest::prelude::*;

use hardylim_core::geom::{random_rotation, rotate_about, rotation_to, rotation_to_with_order};
use hardylim_core::hardy_limit::{delta3, radius_schedule, ScheduleVariant};
use hardylim_core::harmonic::poisson_kernel;
use hardylim_core::martingale::{lambda_bar, maximal_inequality_check, MartingaleSample};
use hardylim_core::rng::stream_id;
use hardylim_core::sphere_measure::{uniform_sphere_sample, SurfaceQuadrature};
use hardylim_core::stats::{ks_one_sample, ordered_sum};
use hardylim_core::tolerances;
use hardylim_core::{Point, RateData, Stream};

fn unit(v: Vec<f64>) -> Option<Point> {
    let p = Point::new(v);
    let n = p.norm();
    (n > 1e-3).then(|| p.scale(1.0 / n))
}

fn direction(m: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-1.0..1.0f64, m).prop_filter_map("near zero", unit)
}

/// A point of the open ball of radius `rmax`.
fn inside(m: usize, rmax: f64) -> impl Strategy<Value = Point> {
    (direction(m), 0.0..rmax).prop_map(|(d, s)| d.scale(s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_to_is_a_rotation_onto_z((m, z) in (2usize..=6).prop_flat_map(|m| (Just(m), direction(m)))) {
        let a = rotation_to(&z).unwrap();
        prop_assert!(a.orthogonality_defect() <= tolerances::ROTATION_ORTHOGONALITY);
        prop_assert!((a.determinant() - 1.0).abs() <= tolerances::ROTATION_DETERMINANT);
        prop_assert!(a.apply(&Point::basis(m, 0)).distance(&z) < 1e-12);
    }

    #[test]
    fn rotation_to_ignores_the_seed_order((z, order) in (2usize..=6).prop_flat_map(|m| {
        (direction(m), Just((0..m).collect::<Vec<_>>()).prop_shuffle())
    })) {
        let a = rotation_to(&z).unwrap();
        let b = rotation_to_with_order(&z, &order).unwrap();
        prop_assert!(a.distance(&b) < 1e-10, "distance {}", a.distance(&b));
    }

    #[test]
    fn rotation_about_a_centre_keeps_distances(seed in any::<u64>(), m in 2usize..=5, c in -2.0..2.0f64) {
        let mut s = Stream::new(seed, 0);
        let alpha = random_rotation(&mut s, m);
        let y = Point::new((0..m).map(|i| c + i as f64).collect());
        let z = Point::new((0..m).map(|_| s.normal()).collect());
        let w = rotate_about(&alpha, &y, &z).unwrap();
        prop_assert!((w.distance(&y) - z.distance(&y)).abs() < 1e-12 * (1.0 + z.distance(&y)));
    }

    #[test]
    fn poisson_kernel_is_rotation_invariant(seed in any::<u64>(), m in 2usize..=4, frac in 0.0..0.95f64) {
        let mut s = Stream::new(seed, 1);
        let y = Point::new((0..m).map(|_| s.normal()).collect());
        let r = 0.5 + s.uniform();
        let x = y.add(&unit((0..m).map(|_| s.normal()).collect()).unwrap().scale(frac * r));
        let z = uniform_sphere_sample(&mut s, &y, r).unwrap();
        let alpha = random_rotation(&mut s, m);
        let k = poisson_kernel(&y, r, &x, &z).unwrap();
        let rx = rotate_about(&alpha, &y, &x).unwrap();
        let rz = rotate_about(&alpha, &y, &z).unwrap();
        let kr = poisson_kernel(&y, r, &rx, &rz).unwrap();
        prop_assert!(k > 0.0);
        prop_assert!((k - kr).abs() <= 1e-9 * k, "{k} vs {kr}");
    }

    #[test]
    fn lambda_bar_is_even_and_bounded(v in -50.0..50.0f64) {
        let l = lambda_bar(v);
        prop_assert_eq!(l, lambda_bar(-v));
        prop_assert!(l >= 0.0 && l <= v.abs());
        // e^{-a} ≤ 1 - a + a²/2
        prop_assert!(l <= 0.5 * v * v * (1.0 + 4.0 * f64::EPSILON));
    }

    #[test]
    fn lambda_bar_is_midpoint_convex(a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let mid = lambda_bar(0.5 * (a + b));
        prop_assert!(mid <= 0.5 * (lambda_bar(a) + lambda_bar(b)) + 1e-15);
    }

    #[test]
    fn ordered_sum_ignores_order(mut xs in prop::collection::vec(-1e6..1e6f64, 1..200), seed in any::<u64>()) {
        let before = ordered_sum(&xs);
        let mut s = Stream::new(seed, 2);
        for i in (1..xs.len()).rev() {
            let j = (s.uniform() * (i + 1) as f64) as usize;
            xs.swap(i, j.min(i));
        }
        prop_assert_eq!(before.to_bits(), ordered_sum(&xs).to_bits());
    }

    #[test]
    fn streams_replay_and_separate(seed in any::<u64>(), tag in 0u16..0x100, i in 0u64..1 << 40) {
        let draw = |id| { let mut s = Stream::new(seed, id); (0..8).map(|_| s.uniform()).collect::<Vec<_>>() };
        let a = draw(stream_id(tag, i));
        prop_assert!(a.iter().all(|u| (0.0..1.0).contains(u)));
        prop_assert_eq!(&a, &draw(stream_id(tag, i)));
        prop_assert_ne!(&a, &draw(stream_id(tag, i + 1)));
        prop_assert_ne!(&a, &draw(stream_id(tag + 1, i)));
    }

    #[test]
    fn conservative_epsilon_is_the_smaller(q in 1u32..=20, b1 in 0.0..3.0f64) {
        let c = ScheduleVariant::ConservativeMin.epsilon(q, b1);
        prop_assert!(c <= ScheduleVariant::Paper133.epsilon(q, b1));
        prop_assert!(c <= ScheduleVariant::PaperStep10.epsilon(q, b1));
        prop_assert!(ScheduleVariant::ConservativeMin.epsilon(q + 1, b1) < c || c == 0.0);
    }

    #[test]
    fn schedules_increase_strictly(k1 in 0.1..2.0f64, k2 in 0.1..2.0f64, e2 in 1.0..3.0f64, b1 in 0.0..0.5f64) {
        let rates = RateData::from_fns(
            b1,
            move |e: f64| (k1 * e).min(0.999),
            1.0,
            move |e: f64| (k2 * e.powf(e2)).min(0.999),
        ).unwrap();
        for v in ScheduleVariant::ALL {
            let Ok(s) = radius_schedule(&rates, 4, v) else { continue };
            prop_assert!(s.gaps().windows(2).all(|w| w[1] < w[0]), "{:?}", s.gaps());
        }
        let d: Vec<f64> = [0.01, 0.02, 0.05, 0.1, 0.2].iter().map(|&e| delta3(&rates, e)).collect();
        prop_assert!(d.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn constant_martingales_never_exceed(c in -3.0..3.0f64, eps in 1e-3..1.0f64) {
        let z = MartingaleSample::new(vec![0.0, 1.0, 2.0], vec![vec![c; 3]; 10]).unwrap();
        let rep = maximal_inequality_check(&z, eps).unwrap();
        prop_assert_eq!(rep.exceedance.mean, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernel_has_unit_mass(x in prop_oneof![inside(2, 0.9), inside(3, 0.9)]) {
        let m = x.dim();
        let q = SurfaceQuadrature::default_for(m, 1.0).unwrap();
        let o = Point::zeros(m);
        let mass = q.unit_average(|z| poisson_kernel(&o, 1.0, &x, &Point::new(z.to_vec())).unwrap()).value;
        prop_assert!((mass - 1.0).abs() < 1e-6, "mass {mass} at {x:?}");
    }

    #[test]
    fn quadrature_is_rotation_invariant(seed in any::<u64>(), m in 2usize..=3) {
        let q = SurfaceQuadrature::default_for(m, 1.0).unwrap();
        let mut s = Stream::new(seed, 3);
        let alpha = random_rotation(&mut s, m);
        let f = |p: &[f64]| (p[0] + 2.0 * p[1]).powi(4) + p[m - 1] * p[0];
        let a = q.unit_average(f).value;
        let b = q.unit_average(|p| f(alpha.apply(&Point::new(p.to_vec())).as_slice())).value;
        prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn sphere_samples_are_uniform(seed in any::<u64>()) {
        // x1 of a uniform point of the 2-sphere is uniform on [-1, 1]
        let mut s = Stream::new(seed, 4);
        let o = Point::zeros(3);
        let xs: Vec<f64> = (0..2000).map(|_| uniform_sphere_sample(&mut s, &o, 1.0).unwrap()[0]).collect();
        let ks = ks_one_sample(&xs, |t| (0.5 * (t + 1.0)).clamp(0.0, 1.0)).unwrap();
        // five times the 5% critical value: fails with negligible probability
        prop_assert!(ks.statistic < 5.0 * ks.threshold, "{ks:?}");
    }
}
