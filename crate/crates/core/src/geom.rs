//! Points, balls, angles and rotations in `R^m`.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::rng::Stream;
use crate::tolerances;

/// A point of `R^m`, stored as its coordinate column.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "a point needs at least one coordinate");
        Point(coords)
    }

    pub fn zeros(m: usize) -> Self {
        Point::new(vec![0.0; m])
    }

    /// The standard basis vector `ê_i` (0-based index).
    pub fn basis(m: usize, i: usize) -> Self {
        let mut p = Point::zeros(m);
        p.0[i] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Point {
        Point(self.0.iter().map(|a| a * c).collect())
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn check_dim(&self, other: &Point) -> Result<()> {
        if self.dim() != other.dim() {
            return domain(format!("dimension mismatch: {} vs {}", self.dim(), other.dim()));
        }
        Ok(())
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::new(v)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// An open ball `D(center, radius)`, or the open shell `D(center, inner, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSpec {
    pub center: Point,
    pub radius: f64,
    pub inner_radius: Option<f64>,
}

impl BallSpec {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("ball radius must be positive, got {radius}"));
        }
        Ok(BallSpec {
            center,
            radius,
            inner_radius: None,
        })
    }

    pub fn shell(center: Point, inner: f64, radius: f64) -> Result<Self> {
        if !(inner > 0.0 && inner < radius && radius.is_finite()) {
            return domain(format!(
                "shell radii must satisfy 0 < inner < radius, got {inner}, {radius}"
            ));
        }
        Ok(BallSpec {
            center,
            radius,
            inner_radius: Some(inner),
        })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, x: &Point) -> bool {
        let d = x.distance(&self.center);
        d < self.radius && self.inner_radius.is_none_or(|s| d > s)
    }

    /// Whether `x` lies on the outer sphere within [`tolerances::ON_SPHERE`].
    pub fn on_boundary(&self, x: &Point) -> bool {
        (x.distance(&self.center) - self.radius).abs() <= tolerances::ON_SPHERE
    }
}

/// Unsigned angle between two nonzero vectors, in `[0, π]`.
pub fn angle(x: &Point, y: &Point) -> Result<f64> {
    x.check_dim(y)?;
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return domain("angle is undefined for a zero vector");
    }
    Ok((x.dot(y) / (nx * ny)).clamp(-1.0, 1.0).acos())
}

/// An `m × m` orthogonal matrix of determinant one.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    entries: DMatrix<f64>,
}

impl RotationMatrix {
    pub fn identity(m: usize) -> Self {
        RotationMatrix {
            entries: DMatrix::identity(m, m),
        }
    }

    /// Validates orthogonality and orientation before wrapping `entries`.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return domain("rotation matrix must be square");
        }
        let r = RotationMatrix { entries };
        if r.orthogonality_defect() > tolerances::ROTATION_ORTHOGONALITY {
            return domain(format!(
                "matrix is not orthogonal (‖αᵀα − I‖_F = {:e})",
                r.orthogonality_defect()
            ));
        }
        if (r.determinant() - 1.0).abs() > tolerances::ROTATION_DETERMINANT {
            return domain(format!("determinant {} is not 1", r.determinant()));
        }
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `‖αᵀα − I‖` in the Frobenius norm.
    pub fn orthogonality_defect(&self) -> f64 {
        let m = self.dim();
        (self.entries.transpose() * &self.entries - DMatrix::<f64>::identity(m, m)).norm()
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    pub fn apply(&self, x: &Point) -> Point {
        let v = &self.entries * DVector::from_column_slice(x.as_slice());
        Point::new(v.as_slice().to_vec())
    }

    /// In-place `out = α x` for slices; avoids allocating in quadrature loops.
    pub fn apply_slice(&self, x: &[f64], out: &mut [f64]) {
        let m = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(m) {
            *o = (0..m).map(|j| self.entries[(i, j)] * x[j]).sum();
        }
    }

    pub fn compose(&self, other: &RotationMatrix) -> RotationMatrix {
        RotationMatrix {
            entries: &self.entries * &other.entries,
        }
    }

    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix {
            entries: self.entries.transpose(),
        }
    }

    /// Frobenius distance between two rotations.
    pub fn distance(&self, other: &RotationMatrix) -> f64 {
        (&self.entries - &other.entries).norm()
    }
}

/// The rotation `α_z` carrying `ê₁` to the unit vector `z`.
///
/// `α_z` turns the plane spanned by `ê₁` and `z` through the angle
/// `θ_z = ∠(ê₁, z)` and fixes its orthogonal complement pointwise. For `z`
/// within [`tolerances::REFERENCE_POINT_SNAP`] of `ê₁` the identity is returned.
pub fn rotation_to(z: &Point) -> Result<RotationMatrix> {
    let order: Vec<usize> = (0..z.dim()).collect();
    rotation_to_with_order(z, &order)
}

/// [`rotation_to`] with the complement basis seeded from the standard basis
/// vectors in `seed_order`. The result does not depend on the order.
pub fn rotation_to_with_order(z: &Point, seed_order: &[usize]) -> Result<RotationMatrix> {
    let m = z.dim();
    if m < 2 {
        return domain("rotation_to needs dimension at least 2");
    }
    if (z.norm() - 1.0).abs() > tolerances::UNIT_NORM {
        return domain(format!("rotation_to needs a unit vector, ‖z‖ = {}", z.norm()));
    }
    let mut seeds = seed_order.to_vec();
    seeds.sort_unstable();
    if seeds != (0..m).collect::<Vec<_>>() {
        return domain("seed order must be a permutation of 0..m");
    }
    let e1 = Point::basis(m, 0);
    if z.distance(&e1) < tolerances::REFERENCE_POINT_SNAP {
        return Ok(RotationMatrix::identity(m));
    }

    let cos_t = z[0].clamp(-1.0, 1.0);
    let residual = z.sub(&e1.scale(cos_t));
    let sin_t = residual.norm();

    let mut frame = vec![e1];
    if sin_t >= tolerances::GRAM_SCHMIDT_RESIDUAL {
        frame.push(residual.scale(1.0 / sin_t));
    }
    // complete to an orthonormal basis; at the antipode this also supplies ê₂
    for &i in seed_order {
        if frame.len() == m {
            break;
        }
        let mut v = Point::basis(m, i);
        for _ in 0..2 {
            for f in &frame {
                v = v.sub(&f.scale(v.dot(f)));
            }
        }
        let n = v.norm();
        if n >= tolerances::GRAM_SCHMIDT_RESIDUAL {
            frame.push(v.scale(1.0 / n));
        }
    }
    debug_assert_eq!(frame.len(), m);

    // α = ê₁(ê₁ᵀc − ê₂ᵀs) + ê₂(ê₁ᵀs + ê₂ᵀc) + Σ_{i≥3} ê_i ê_iᵀ
    let (c, s) = if sin_t >= tolerances::GRAM_SCHMIDT_RESIDUAL {
        (cos_t, sin_t)
    } else {
        (-1.0, 0.0)
    };
    let col = |p: &Point| DVector::from_column_slice(p.as_slice());
    let (u1, u2) = (col(&frame[0]), col(&frame[1]));
    let mut a = &u1 * (u1.transpose() * c - u2.transpose() * s) + &u2 * (u1.transpose() * s + u2.transpose() * c);
    for f in &frame[2..] {
        let u = col(f);
        a += &u * u.transpose();
    }
    RotationMatrix::from_matrix(a)
}

/// `ρ_{α,y}(z) = y + α(z − y)`: rotation of `R^m` about `y`.
pub fn rotate_about(alpha: &RotationMatrix, y: &Point, z: &Point) -> Result<Point> {
    y.check_dim(z)?;
    if alpha.dim() != y.dim() {
        return domain(format!(
            "rotation of dimension {} applied to a point of dimension {}",
            alpha.dim(),
            y.dim()
        ));
    }
    Ok(y.add(&alpha.apply(&z.sub(y))))
}

/// A Haar-distributed rotation (QR of a Gaussian matrix, signs fixed, det forced to +1).
pub fn random_rotation(stream: &mut Stream, m: usize) -> RotationMatrix {
    let g = DMatrix::from_fn(m, m, |_, _| stream.normal());
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    RotationMatrix { entries: q }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn e(m: usize, i: usize) -> Point {
        Point::basis(m, i)
    }

    #[test]
    fn angle_examples() {
        assert_eq!(angle(&e(3, 0), &e(3, 0)).unwrap(), 0.0);
        assert!((angle(&e(3, 0), &e(3, 1)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((angle(&e(3, 0), &e(3, 0).scale(-1.0)).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn angle_rejects_zero_vector() {
        assert!(matches!(
            angle(&Point::zeros(2), &e(2, 0)),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn rotation_to_reference_is_identity() {
        for m in 2..6 {
            assert_eq!(rotation_to(&e(m, 0)).unwrap(), RotationMatrix::identity(m));
        }
    }

    #[test]
    fn rotation_to_quarter_turn_in_the_plane() {
        let a = rotation_to(&Point::new(vec![0.0, 1.0])).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((a.entries() - expect).norm() < 1e-15);
    }

    #[test]
    fn rotation_to_antipode_is_a_rotation() {
        for m in 2..5 {
            let z = e(m, 0).scale(-1.0);
            let a = rotation_to(&z).unwrap();
            assert!(a.apply(&e(m, 0)).distance(&z) < 1e-12);
        }
    }

    #[test]
    fn rotation_to_rejects_non_unit_and_low_dim() {
        assert!(rotation_to(&Point::new(vec![0.5, 0.5])).is_err());
        assert!(rotation_to(&Point::new(vec![1.0])).is_err());
    }

    #[test]
    fn rotate_about_examples() {
        let y = Point::new(vec![0.3, -1.0, 2.0]);
        let z = Point::new(vec![1.0, 1.0, 1.0]);
        let a = rotation_to(&Point::new(vec![0.0, 0.6, 0.8])).unwrap();
        assert_eq!(rotate_about(&a, &y, &y).unwrap(), y);
        assert_eq!(rotate_about(&RotationMatrix::identity(3), &y, &z).unwrap(), z);
        let w = rotate_about(&a, &y, &z).unwrap();
        assert!((w.distance(&y) - z.distance(&y)).abs() < 1e-12);
        assert!(rotate_about(&a, &Point::zeros(2), &Point::zeros(2)).is_err());
    }

    #[test]
    fn ball_spec_validation() {
        assert!(BallSpec::ball(Point::zeros(2), 0.0).is_err());
        assert!(BallSpec::shell(Point::zeros(2), 1.0, 1.0).is_err());
        let s = BallSpec::shell(Point::zeros(2), 0.5, 1.0).unwrap();
        assert!(s.contains(&Point::new(vec![0.7, 0.0])));
        assert!(!s.contains(&Point::new(vec![0.2, 0.0])));
    }

    #[test]
    fn random_rotation_is_special_orthogonal() {
        let mut s = Stream::new(1, 0);
        for m in [2, 3, 5] {
            let r = random_rotation(&mut s, m);
            assert!(r.orthogonality_defect() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }
}
