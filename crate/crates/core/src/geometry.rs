//! Convex geometry: H-polytopes, ellipsoids, hyperplanes, and the metric
//! and containment predicates the region-growing algorithms build on.
//!
//! All values are immutable after construction and safe to share across
//! threads; every operation is a pure function.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::real::Real;

/// Absolute membership tolerance: boundary points count as inside.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Symmetry tolerance for ellipsoid shape matrices (relative to the largest
/// entry).
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Squared distance in an ellipsoid metric, `(q - c)^T E (q - c)`. Always
/// nonnegative for a valid ellipsoid.
pub type MetricSq<S> = S;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("face count mismatch: {rows} normal rows vs {offsets} offsets")]
    FaceCountMismatch { rows: usize, offsets: usize },
    #[error("face normal in row {row} has (near-)zero length")]
    ZeroNormal { row: usize },
    #[error("box corner ordering violated at coordinate {coord}")]
    BadBoxCorners { coord: usize },
    #[error("shape matrix is not symmetric")]
    NotSymmetric,
    #[error("shape matrix is not positive-definite")]
    NotPositiveDefinite,
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("tangent point coincides with the ellipsoid center")]
    DegenerateTangentPoint,
}

/// Intersection of halfspaces `A q <= b`, one row of `A` per face.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope<S: Real> {
    a: DMatrix<S>,
    b: DVector<S>,
}

impl<S: Real> HPolytope<S> {
    /// Builds a polytope from face normals `a` (rows) and offsets `b`.
    /// Rows must be nonzero; they are kept as given (not normalized).
    pub fn new(a: DMatrix<S>, b: DVector<S>) -> Result<Self, GeometryError> {
        if a.nrows() != b.len() {
            return Err(GeometryError::FaceCountMismatch {
                rows: a.nrows(),
                offsets: b.len(),
            });
        }
        let tiny = S::cast(1e-30);
        for row in 0..a.nrows() {
            if a.row(row).norm() <= tiny {
                return Err(GeometryError::ZeroNormal { row });
            }
        }
        Ok(Self { a, b })
    }

    /// Axis-aligned box `lo <= q <= hi` as 2·d faces.
    pub fn axis_box(lo: &DVector<S>, hi: &DVector<S>) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        let d = lo.len();
        for i in 0..d {
            if lo[i] >= hi[i] {
                return Err(GeometryError::BadBoxCorners { coord: i });
            }
        }
        let mut a = DMatrix::zeros(2 * d, d);
        let mut b = DVector::zeros(2 * d);
        for i in 0..d {
            a[(2 * i, i)] = S::one();
            b[2 * i] = hi[i];
            a[(2 * i + 1, i)] = -S::one();
            b[2 * i + 1] = -lo[i];
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_faces(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<S> {
        &self.a
    }

    pub fn b(&self) -> &DVector<S> {
        &self.b
    }

    /// `a_i . q` for face `i`.
    pub fn face_dot(&self, i: usize, q: &DVector<S>) -> S {
        let mut acc = S::zero();
        for j in 0..self.dim() {
            acc += self.a[(i, j)] * q[j];
        }
        acc
    }

    /// Membership with the boundary-inclusive tolerance.
    ///
    /// Panics if `q` has the wrong dimension.
    pub fn contains(&self, q: &DVector<S>) -> bool {
        self.check_dim(q);
        let tol = S::cast(MEMBERSHIP_TOL);
        for i in 0..self.a.nrows() {
            if self.face_dot(i, q) > self.b[i] + tol {
                return false;
            }
        }
        true
    }

    /// Strict membership, `A q < b` with no tolerance. Used when placing
    /// hyperplanes: a candidate on or behind an added face is redundant.
    pub fn contains_strict(&self, q: &DVector<S>) -> bool {
        self.check_dim(q);
        for i in 0..self.a.nrows() {
            if self.face_dot(i, q) >= self.b[i] {
                return false;
            }
        }
        true
    }

    /// Per-face slack `b_i - a_i . q` (positive inside).
    pub fn slacks(&self, q: &DVector<S>) -> DVector<S> {
        self.check_dim(q);
        let mut s = self.b.clone();
        s.gemv(-S::one(), &self.a, q, S::one());
        s
    }

    /// New polytope with one extra face; membership of the result is the
    /// conjunction of `self` and the halfspace of `h`.
    pub fn add_face(&self, h: &Hyperplane<S>) -> Self {
        assert_eq!(
            h.normal().len(),
            self.dim(),
            "hyperplane dimension {} does not match polytope dimension {}",
            h.normal().len(),
            self.dim()
        );
        let n = self.a.nrows();
        let mut a = DMatrix::zeros(n + 1, self.dim());
        a.rows_mut(0, n).copy_from(&self.a);
        a.row_mut(n).copy_from(&h.normal().transpose());
        let mut b = DVector::zeros(n + 1);
        b.rows_mut(0, n).copy_from(&self.b);
        b[n] = h.offset();
        Self { a, b }
    }

    /// Cheap necessary condition for boundedness: every coordinate direction
    /// (both signs) must be opposed by some face normal. Exact for boxes and
    /// anything built from one by adding faces; a heuristic in general.
    pub fn is_axis_bounded(&self) -> bool {
        let tol = S::cast(1e-12);
        for j in 0..self.dim() {
            let mut pos = false;
            let mut neg = false;
            for i in 0..self.a.nrows() {
                let v = self.a[(i, j)] / self.a.row(i).norm();
                if v > tol {
                    pos = true;
                }
                if v < -tol {
                    neg = true;
                }
            }
            if !pos || !neg {
                return false;
            }
        }
        true
    }

    fn check_dim(&self, q: &DVector<S>) {
        assert_eq!(
            q.len(),
            self.dim(),
            "configuration dimension {} does not match polytope dimension {}",
            q.len(),
            self.dim()
        );
    }
}

/// Oriented hyperplane with unit normal; the induced halfspace is
/// `{q : a . q <= b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane<S: Real> {
    normal: DVector<S>,
    offset: S,
}

impl<S: Real> Hyperplane<S> {
    /// Normalizes `(a, b)` so the stored normal is unit length.
    pub fn new(a: DVector<S>, b: S) -> Result<Self, GeometryError> {
        let n = a.norm();
        if n <= S::cast(1e-30) {
            return Err(GeometryError::ZeroNormal { row: 0 });
        }
        Ok(Self {
            normal: a / n,
            offset: b / n,
        })
    }

    pub fn normal(&self) -> &DVector<S> {
        &self.normal
    }

    pub fn offset(&self) -> S {
        self.offset
    }

    /// `a . q - b`; negative inside the halfspace.
    pub fn signed_violation(&self, q: &DVector<S>) -> S {
        self.normal.dot(q) - self.offset
    }

    pub fn halfspace_contains(&self, q: &DVector<S>) -> bool {
        self.signed_violation(q) <= S::cast(MEMBERSHIP_TOL)
    }
}

/// Ellipsoid `{x : (x - c)^T E (x - c) <= 1}` with `E` symmetric
/// positive-definite.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipsoid<S: Real> {
    e: DMatrix<S>,
    c: DVector<S>,
}

impl<S: Real> Ellipsoid<S> {
    /// Validates symmetry (relative tolerance) and positive-definiteness
    /// (Cholesky succeeds).
    pub fn new(e: DMatrix<S>, c: DVector<S>) -> Result<Self, GeometryError> {
        if e.nrows() != e.ncols() || e.nrows() != c.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: c.len(),
                got: e.nrows(),
            });
        }
        let scale = e.amax().max(S::one());
        let tol = S::cast(SYMMETRY_TOL) * scale;
        for i in 0..e.nrows() {
            for j in (i + 1)..e.ncols() {
                if (e[(i, j)] - e[(j, i)]).abs() > tol {
                    return Err(GeometryError::NotSymmetric);
                }
            }
        }
        // Work on the symmetrized matrix so tiny asymmetries cannot leak
        // into downstream factorizations.
        let sym = (&e + e.transpose()) * S::cast(0.5);
        if nalgebra::Cholesky::new(sym.clone()).is_none() {
            return Err(GeometryError::NotPositiveDefinite);
        }
        Ok(Self { e: sym, c })
    }

    /// Ball of the given radius: `E = I / r^2`.
    pub fn ball(center: DVector<S>, radius: S) -> Result<Self, GeometryError> {
        if radius <= S::zero() {
            return Err(GeometryError::NonPositiveRadius);
        }
        let d = center.len();
        let e = DMatrix::identity(d, d) / (radius * radius);
        Ok(Self { e, c: center })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// The shape matrix `E`.
    pub fn shape(&self) -> &DMatrix<S> {
        &self.e
    }

    pub fn center(&self) -> &DVector<S> {
        &self.c
    }

    /// Squared ellipsoid-metric distance `(q - c)^T E (q - c)`.
    ///
    /// Panics if `q` has the wrong dimension.
    pub fn metric_sq(&self, q: &DVector<S>) -> MetricSq<S> {
        assert_eq!(
            q.len(),
            self.dim(),
            "configuration dimension {} does not match ellipsoid dimension {}",
            q.len(),
            self.dim()
        );
        let diff = q - &self.c;
        (&self.e * &diff).dot(&diff)
    }

    pub fn contains(&self, q: &DVector<S>) -> bool {
        self.metric_sq(q) <= S::one() + S::cast(MEMBERSHIP_TOL)
    }

    /// Hyperplane through `q_star` (shifted back by `stepback`) tangent to
    /// the ellipsoid scaled through `q_star`: `a = E (q* - c) / |E (q* - c)|`,
    /// `b = a . q* - stepback`.
    ///
    /// For `q_star` outside the ellipsoid and `stepback = 0` the halfspace
    /// contains the whole ellipsoid.
    pub fn tangent_hyperplane(
        &self,
        q_star: &DVector<S>,
        stepback: S,
    ) -> Result<Hyperplane<S>, GeometryError> {
        let grad = &self.e * (q_star - &self.c);
        let n = grad.norm();
        if n <= S::cast(1e-30) {
            return Err(GeometryError::DegenerateTangentPoint);
        }
        let a = grad / n;
        let b = a.dot(q_star) - stepback;
        Ok(Hyperplane {
            normal: a,
            offset: b,
        })
    }

    /// Support value `max { a . x : x in ellipsoid } = a . c + sqrt(a^T E^-1 a)`
    /// for a unit direction `a`.
    pub fn support(&self, a: &DVector<S>) -> S {
        let chol = nalgebra::Cholesky::new(self.e.clone())
            .expect("shape matrix validated positive-definite at construction");
        let einv_a = chol.solve(a);
        a.dot(&self.c) + a.dot(&einv_a).max(S::zero()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_box2() -> HPolytope<f64> {
        HPolytope::axis_box(
            &DVector::from_vec(vec![-1.0, -1.0]),
            &DVector::from_vec(vec![1.0, 1.0]),
        )
        .unwrap()
    }

    fn v(parts: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(parts)
    }

    #[test]
    fn box_membership() {
        let p = unit_box2();
        assert!(p.contains(&v(&[0.0, 0.0])));
        assert!(!p.contains(&v(&[2.0, 0.0])));
    }

    #[test]
    fn boundary_point_counts_as_inside() {
        let p = unit_box2();
        let h = Hyperplane::new(v(&[1.0, 0.0]), 0.5).unwrap();
        let cut = p.add_face(&h);
        assert!(cut.contains(&v(&[0.5, 0.0])));
        assert!(!cut.contains(&v(&[0.5 + 1e-6, 0.0])));
    }

    #[test]
    #[should_panic(expected = "dimension")]
    fn membership_dimension_mismatch_panics() {
        unit_box2().contains(&v(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn add_face_cuts_box_in_half() {
        let p = unit_box2();
        let h = Hyperplane::new(v(&[1.0, 0.0]), 0.0).unwrap();
        let cut = p.add_face(&h);
        // Membership oracle on a grid: cut == [-1,0] x [-1,1].
        let n = 21;
        for i in 0..n {
            for j in 0..n {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                let q = v(&[x, y]);
                assert_eq!(cut.contains(&q), x <= 0.0 + 1e-12 && p.contains(&q));
            }
        }
    }

    #[test]
    fn redundant_and_repeated_faces_leave_membership_unchanged() {
        let p = unit_box2();
        let redundant = Hyperplane::new(v(&[1.0, 0.0]), 10.0).unwrap();
        let with_redundant = p.add_face(&redundant);
        let h = Hyperplane::new(v(&[0.0, 1.0]), 0.3).unwrap();
        let once = p.add_face(&h);
        let twice = once.add_face(&h);
        let mut rng_state = 0x1234_5678_u64;
        let mut next = || {
            rng_state = crate::real::splitmix64(rng_state);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..10_000 {
            let q = v(&[next(), next()]);
            assert_eq!(p.contains(&q), with_redundant.contains(&q));
            assert_eq!(once.contains(&q), twice.contains(&q));
        }
    }

    #[test]
    fn metric_examples() {
        let e = Ellipsoid::new(DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        assert_relative_eq!(e.metric_sq(&v(&[3.0, 4.0])), 25.0);
        assert_relative_eq!(e.metric_sq(&v(&[0.0, 0.0])), 0.0);

        let diag = Ellipsoid::new(DMatrix::from_diagonal(&v(&[4.0, 1.0])), v(&[0.0, 0.0])).unwrap();
        assert_relative_eq!(diag.metric_sq(&v(&[1.0, 0.0])), 4.0);
    }

    #[test]
    fn metric_translation_invariant() {
        let e = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let t = v(&[0.7, -2.5]);
        let a = Ellipsoid::new(e.clone(), v(&[0.1, 0.2])).unwrap();
        let b = Ellipsoid::new(e, v(&[0.1, 0.2]) + &t).unwrap();
        let q = v(&[1.3, 0.4]);
        assert_relative_eq!(
            a.metric_sq(&q),
            b.metric_sq(&(q.clone() + t)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn tangent_identity_metric() {
        let e = Ellipsoid::new(DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let h = e.tangent_hyperplane(&v(&[2.0, 0.0]), 0.1).unwrap();
        assert_relative_eq!(h.normal()[0], 1.0);
        assert_relative_eq!(h.normal()[1], 0.0);
        assert_relative_eq!(h.offset(), 1.9);
    }

    #[test]
    fn tangent_diagonal_metric() {
        let e = Ellipsoid::new(DMatrix::from_diagonal(&v(&[4.0, 1.0])), v(&[0.0, 0.0])).unwrap();
        let h = e.tangent_hyperplane(&v(&[1.0, 0.0]), 0.0).unwrap();
        assert_relative_eq!(h.normal()[0], 1.0);
        assert_relative_eq!(h.normal()[1], 0.0);
        assert_relative_eq!(h.offset(), 1.0);
    }

    #[test]
    fn tangent_at_center_is_degenerate() {
        let e = Ellipsoid::new(DMatrix::identity(2, 2), v(&[0.5, 0.5])).unwrap();
        assert!(matches!(
            e.tangent_hyperplane(&v(&[0.5, 0.5]), 0.0),
            Err(GeometryError::DegenerateTangentPoint)
        ));
    }

    #[test]
    fn tangent_plane_excludes_no_ellipsoid_point() {
        // Exterior tangent point, zero stepback: support of the halfspace
        // normal over the ellipsoid must not exceed the offset.
        let e = Ellipsoid::new(
            DMatrix::from_row_slice(2, 2, &[3.0, 0.5, 0.5, 1.0]),
            v(&[0.3, -0.2]),
        )
        .unwrap();
        let q_star = v(&[2.0, 1.5]);
        assert!(e.metric_sq(&q_star) > 1.0);
        let h = e.tangent_hyperplane(&q_star, 0.0).unwrap();
        assert!(e.support(h.normal()) <= h.offset() + 1e-9);
    }

    #[test]
    fn ellipsoid_validation() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        assert!(matches!(
            Ellipsoid::new(asym, v(&[0.0, 0.0])),
            Err(GeometryError::NotSymmetric)
        ));
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            Ellipsoid::new(indefinite, v(&[0.0, 0.0])),
            Err(GeometryError::NotPositiveDefinite)
        ));
    }

    #[test]
    fn axis_bounded_heuristic() {
        assert!(unit_box2().is_axis_bounded());
        let halfspace = HPolytope::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::from_vec(vec![1.0]),
        )
        .unwrap();
        assert!(!halfspace.is_axis_bounded());
    }

    #[test]
    fn polytope_rejects_zero_rows() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            HPolytope::new(a, b),
            Err(GeometryError::ZeroNormal { row: 1 })
        ));
    }
}
