#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN
//! Numerical potential theory on the unit ball.
//!
//! The crate covers surface-area integration on `(m-1)`-spheres, Poisson-kernel
//! harmonic extension, Brownian first-exit simulation (time-stepped and
//! walk-on-spheres), the maximal inequality for martingales built on the
//! special convex function `λ̄(v) = e^{-|v|} - 1 + |v|`, and a Monte Carlo
//! harness for the Brownian boundary-limit theorem on the Hardy space `h¹`.
//!
//! Every random quantity is drawn from a [`rng::Stream`] keyed by
//! `(seed, stream_id)`, so results do not depend on how paths are scheduled
//! across worker threads.

pub mod brownian;
pub mod error;
pub mod geom;
pub mod hardy_limit;
pub mod harmonic;
pub mod martingale;
pub mod rng;
pub mod sphere_measure;
pub mod stats;
pub mod tolerances;

mod dd;

pub use error::{Error, Result};
pub use geom::{BallSpec, Point, RotationMatrix};
pub use harmonic::{HarmonicFn, RateData};
pub use rng::Stream;
pub use stats::McEstimate;
