//! Numerical tolerances shared by the library and its tests.

/// Frobenius-norm bound on `αᵀα - I` for a rotation matrix.
pub const ROTATION_ORTHOGONALITY: f64 = 1e-12;
/// Bound on `|det α - 1|`.
pub const ROTATION_DETERMINANT: f64 = 1e-12;
/// Accepted deviation of `‖z‖` from 1 for a point handed to `rotation_to`.
pub const UNIT_NORM: f64 = 1e-10;
/// Below this distance from `ê₁` the rotation `α_z` is the identity.
pub const REFERENCE_POINT_SNAP: f64 = 1e-8;
/// Gram-Schmidt discards candidate vectors whose residual is shorter than this.
pub const GRAM_SCHMIDT_RESIDUAL: f64 = 1e-8;
/// Accepted deviation of `‖z - y‖` from `r` for a point claimed to lie on `∂D(y, r)`.
pub const ON_SPHERE: f64 = 1e-10;
/// Exit points of the simulation engines lie on the sphere to this accuracy.
pub const EXIT_POINT: f64 = 1e-9;
/// Central-difference step for the finite-difference Laplacian.
pub const LAPLACIAN_STEP: f64 = 1e-3;
/// Harmonicity witness: `|Δ_h u| ≤ HARMONIC_LAPLACIAN`.
pub const HARMONIC_LAPLACIAN: f64 = 1e-4;
/// Largest tolerated downward step of an integral that must be nondecreasing in `r`.
pub const MONOTONE_STEP: f64 = 1e-8;
/// Largest quadrature error estimate at which a radius still enters rate estimation.
pub const RATE_RESOLUTION: f64 = 1e-4;
/// Below this `|v|` the special convex function is evaluated by its power series.
pub const LAMBDA_SERIES_SWITCH: f64 = 1e-4;
/// Starting points with `‖x‖/r` below this are treated as the centre by walk-on-spheres.
pub const WOS_CENTER: f64 = 1e-12;
/// Gaussian vectors shorter than this are redrawn before normalization.
pub const GAUSSIAN_NORM_FLOOR: f64 = 1e-300;
/// Number of standard errors allowed by Monte Carlo assertions.
pub const MC_SIGMAS: f64 = 3.0;
/// Asymptotic 5% critical value of the Kolmogorov-Smirnov statistic, scaled by `√n`.
pub const KS_CRITICAL_5PCT: f64 = 1.36;
/// Minimum sample size accepted by the KS tests.
pub const KS_MIN_SAMPLES: usize = 50;
