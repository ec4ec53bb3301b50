//! Collision environments: the implicit configuration-space obstacle
//! oracle, two built-in desk-scale worlds, and the Monte Carlo
//! fraction-in-collision estimator used to validate generated regions.
//!
//! Worlds are immutable after construction and `check` is a pure
//! predicate, so batches may be evaluated from many threads at once.

use nalgebra::{DVector, Vector2};
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{Ellipsoid, HPolytope};
use crate::real::Real;
use crate::sampling::{hit_and_run_batch, SamplerConfig, SamplingError};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("obstacle radius must be positive")]
    NonPositiveRadius,
    #[error("box corner ordering violated at coordinate {coord}")]
    BadBoxCorners { coord: usize },
    #[error("polygon needs at least 3 vertices")]
    DegeneratePolygon,
    #[error("polygon is not convex")]
    NonConvexPolygon,
    #[error("link lengths must be positive")]
    NonPositiveLinkLength,
    #[error("link radius must be nonnegative")]
    NegativeLinkRadius,
    #[error("joint limit {joint} has lower bound above upper bound")]
    BadJointLimits { joint: usize },
    #[error("metric projection did not converge")]
    ProjectionDiverged,
}

/// Environment with a pure configuration -> in-collision predicate.
pub trait CollisionWorld<S: Real>: Sync {
    fn dim(&self) -> usize;

    /// `true` iff some valid collision pair intersects at `q`.
    fn check(&self, q: &DVector<S>) -> bool;

    /// Names of the valid collision pairs, for reporting.
    fn pair_names(&self) -> Vec<String>;
}

/// Checks a batch, possibly concurrently; output order matches input order.
pub fn check_batch<S: Real, W: CollisionWorld<S> + ?Sized>(
    world: &W,
    qs: &[DVector<S>],
) -> Vec<bool> {
    qs.par_iter().map(|q| world.check(q)).collect()
}

/// Monte Carlo estimate of the fraction of `p` in collision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionEstimate<S: Real> {
    pub mean: S,
    /// Normal-approximation 95% half-width `1.96 sqrt(mean (1-mean) / n)`.
    pub half_width: S,
    pub samples: usize,
}

/// Estimates the collision fraction of `p` with `n` hit-and-run samples.
pub fn fraction_in_collision<S: Real, W: CollisionWorld<S> + ?Sized>(
    world: &W,
    p: &HPolytope<S>,
    n: usize,
    cfg: &SamplerConfig<S>,
) -> Result<FractionEstimate<S>, SamplingError> {
    let samples = hit_and_run_batch(p, n, cfg)?;
    let flags = check_batch(world, &samples);
    let hits = flags.iter().filter(|&&f| f).count();
    let mean = S::from_count(hits) / S::from_count(n.max(1));
    let half_width = S::cast(1.96)
        * (mean * (S::one() - mean) / S::from_count(n.max(1)))
            .max(S::zero())
            .sqrt();
    Ok(FractionEstimate {
        mean,
        half_width,
        samples: n,
    })
}

/// Convex set in configuration space, the obstacle primitive of
/// [`PointRobotWorld`].
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexObstacle<S: Real> {
    /// Euclidean ball (a disk in 2D, an interval in 1D).
    Ball { center: DVector<S>, radius: S },
    /// Axis-aligned box `lo <= q <= hi`.
    AxisBox { lo: DVector<S>, hi: DVector<S> },
    /// Convex polygon in 2D, vertices in counter-clockwise order.
    Polygon { vertices: Vec<DVector<S>> },
}

impl<S: Real> ConvexObstacle<S> {
    pub fn validate(&self) -> Result<(), WorldError> {
        match self {
            Self::Ball { radius, .. } => {
                if *radius <= S::zero() {
                    return Err(WorldError::NonPositiveRadius);
                }
            }
            Self::AxisBox { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(WorldError::DimensionMismatch {
                        expected: lo.len(),
                        got: hi.len(),
                    });
                }
                for i in 0..lo.len() {
                    if lo[i] >= hi[i] {
                        return Err(WorldError::BadBoxCorners { coord: i });
                    }
                }
            }
            Self::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(WorldError::DegeneratePolygon);
                }
                for v in vertices {
                    if v.len() != 2 {
                        return Err(WorldError::DimensionMismatch {
                            expected: 2,
                            got: v.len(),
                        });
                    }
                }
                // Convexity and counter-clockwise orientation: every edge
                // turn must be a left turn (within tolerance).
                let n = vertices.len();
                let tol = S::cast(-1e-12);
                for i in 0..n {
                    let a = &vertices[i];
                    let b = &vertices[(i + 1) % n];
                    let c = &vertices[(i + 2) % n];
                    let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if cross < tol {
                        return Err(WorldError::NonConvexPolygon);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::AxisBox { lo, .. } => lo.len(),
            Self::Polygon { .. } => 2,
        }
    }

    /// Closed containment: boundary points are in collision.
    pub fn contains(&self, q: &DVector<S>) -> bool {
        match self {
            Self::Ball { center, radius } => (q - center).norm_squared() <= *radius * *radius,
            Self::AxisBox { lo, hi } => (0..lo.len()).all(|i| q[i] >= lo[i] && q[i] <= hi[i]),
            Self::Polygon { vertices } => {
                let n = vertices.len();
                for i in 0..n {
                    let a = &vertices[i];
                    let b = &vertices[(i + 1) % n];
                    let cross = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
                    if cross < S::zero() {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, q: &DVector<S>) -> DVector<S> {
        match self {
            Self::Ball { center, radius } => {
                let diff = q - center;
                let dist = diff.norm();
                if dist <= *radius {
                    q.clone()
                } else {
                    center + diff * (*radius / dist)
                }
            }
            Self::AxisBox { lo, hi } => {
                DVector::from_fn(lo.len(), |i, _| q[i].max(lo[i]).min(hi[i]))
            }
            Self::Polygon { vertices } => {
                if self.contains(q) {
                    return q.clone();
                }
                let n = vertices.len();
                let mut best: Option<(S, DVector<S>)> = None;
                for i in 0..n {
                    let a = &vertices[i];
                    let b = &vertices[(i + 1) % n];
                    let p = closest_point_on_segment(q, a, b);
                    let d = (q - &p).norm_squared();
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, p));
                    }
                }
                best.expect("polygon has edges").1
            }
        }
    }

    /// Point of the set closest to the ellipsoid center in the ellipsoid
    /// metric, `argmin (x - c)^T E (x - c)`.
    ///
    /// Balls under an identity metric use the closed form; everything else
    /// runs projected gradient descent to displacement tolerance `1e-9`.
    pub fn closest_point_in_metric(&self, e: &Ellipsoid<S>) -> Result<DVector<S>, WorldError> {
        let c = e.center();
        if let Self::Ball { center, radius } = self {
            if is_identity(e.shape()) {
                let diff = c - center;
                let dist = diff.norm();
                if dist <= *radius {
                    return Ok(c.clone());
                }
                return Ok(center + diff * (*radius / dist));
            }
        }
        // Gradient of the quadratic is 2 E (x - c); a step of 1/(2 L) with
        // L the largest eigenvalue of E keeps projected gradient stable.
        let lmax = e.shape().clone().symmetric_eigen().eigenvalues.amax();
        let step = S::one() / (S::cast(2.0) * lmax);
        let tol = S::cast(1e-9);
        let mut x = self.project(c);
        for _ in 0..200_000 {
            let grad = e.shape() * (&x - c) * S::cast(2.0);
            let next = self.project(&(&x - grad * step));
            let moved = (&next - &x).norm();
            x = next;
            if moved <= tol {
                return Ok(x);
            }
        }
        Err(WorldError::ProjectionDiverged)
    }
}

fn is_identity<S: Real>(m: &nalgebra::DMatrix<S>) -> bool {
    let tol = S::cast(1e-12);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let want = if i == j { S::one() } else { S::zero() };
            if (m[(i, j)] - want).abs() > tol {
                return false;
            }
        }
    }
    true
}

fn closest_point_on_segment<S: Real>(q: &DVector<S>, a: &DVector<S>, b: &DVector<S>) -> DVector<S> {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    if len_sq <= S::cast(1e-30) {
        return a.clone();
    }
    let t = (q - a).dot(&ab) / len_sq;
    a + ab * t.max(S::zero()).min(S::one())
}

/// Robot that is a point in configuration space; obstacles live directly in
/// that space, so exact ground truth is available.
#[derive(Clone, Debug)]
pub struct PointRobotWorld<S: Real> {
    dim: usize,
    obstacles: Vec<ConvexObstacle<S>>,
}

impl<S: Real> PointRobotWorld<S> {
    pub fn new(dim: usize, obstacles: Vec<ConvexObstacle<S>>) -> Result<Self, WorldError> {
        for o in &obstacles {
            o.validate()?;
            if o.dim() != dim {
                return Err(WorldError::DimensionMismatch {
                    expected: dim,
                    got: o.dim(),
                });
            }
        }
        Ok(Self { dim, obstacles })
    }

    pub fn obstacles(&self) -> &[ConvexObstacle<S>] {
        &self.obstacles
    }
}

impl<S: Real> CollisionWorld<S> for PointRobotWorld<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, q: &DVector<S>) -> bool {
        assert_eq!(q.len(), self.dim, "configuration dimension mismatch");
        self.obstacles.iter().any(|o| o.contains(q))
    }

    fn pair_names(&self) -> Vec<String> {
        (0..self.obstacles.len())
            .map(|i| format!("point/obstacle_{i}"))
            .collect()
    }
}

/// Task-space obstacle for the planar arm.
#[derive(Clone, Debug, PartialEq)]
pub enum TaskObstacle<S: Real> {
    Disk {
        center: Vector2<S>,
        radius: S,
    },
    /// Convex polygon, counter-clockwise.
    Polygon {
        vertices: Vec<Vector2<S>>,
    },
}

/// Planar serial arm with capsule links (segment plus radius) among
/// task-space obstacles. Forward kinematics accumulates joint angles; link
/// `i` spans the `i`-th and `i+1`-th joint positions.
#[derive(Clone, Debug)]
pub struct PlanarArmWorld<S: Real> {
    link_lengths: Vec<S>,
    link_radius: S,
    obstacles: Vec<TaskObstacle<S>>,
    joint_limits: Vec<(S, S)>,
    /// Include non-adjacent link/link pairs (adjacent links share a joint
    /// and would always collide).
    self_collision: bool,
}

impl<S: Real> PlanarArmWorld<S> {
    pub fn new(
        link_lengths: Vec<S>,
        link_radius: S,
        obstacles: Vec<TaskObstacle<S>>,
        joint_limits: Vec<(S, S)>,
        self_collision: bool,
    ) -> Result<Self, WorldError> {
        if link_lengths.iter().any(|&l| l <= S::zero()) {
            return Err(WorldError::NonPositiveLinkLength);
        }
        if link_radius < S::zero() {
            return Err(WorldError::NegativeLinkRadius);
        }
        if joint_limits.len() != link_lengths.len() {
            return Err(WorldError::DimensionMismatch {
                expected: link_lengths.len(),
                got: joint_limits.len(),
            });
        }
        for (i, (lo, hi)) in joint_limits.iter().enumerate() {
            if lo >= hi {
                return Err(WorldError::BadJointLimits { joint: i });
            }
        }
        for o in &obstacles {
            if let TaskObstacle::Disk { radius, .. } = o {
                if *radius <= S::zero() {
                    return Err(WorldError::NonPositiveRadius);
                }
            }
            if let TaskObstacle::Polygon { vertices } = o {
                if vertices.len() < 3 {
                    return Err(WorldError::DegeneratePolygon);
                }
            }
        }
        Ok(Self {
            link_lengths,
            link_radius,
            obstacles,
            joint_limits,
            self_collision,
        })
    }

    /// Joint positions in the world frame: `links + 1` points starting at
    /// the origin.
    pub fn joint_positions(&self, q: &DVector<S>) -> Vec<Vector2<S>> {
        assert_eq!(
            q.len(),
            self.link_lengths.len(),
            "configuration dimension mismatch"
        );
        let mut pts = Vec::with_capacity(self.link_lengths.len() + 1);
        let mut p = Vector2::new(S::zero(), S::zero());
        pts.push(p);
        let mut angle = S::zero();
        for (i, &len) in self.link_lengths.iter().enumerate() {
            angle += q[i];
            p += Vector2::new(angle.cos(), angle.sin()) * len;
            pts.push(p);
        }
        pts
    }

    /// The joint-limit box, the natural domain polytope for this world.
    pub fn joint_limit_box(&self) -> HPolytope<S> {
        let lo = DVector::from_iterator(
            self.joint_limits.len(),
            self.joint_limits.iter().map(|l| l.0),
        );
        let hi = DVector::from_iterator(
            self.joint_limits.len(),
            self.joint_limits.iter().map(|l| l.1),
        );
        HPolytope::axis_box(&lo, &hi).expect("joint limits validated at construction")
    }

    fn link_hits_obstacle(&self, a: Vector2<S>, b: Vector2<S>, o: &TaskObstacle<S>) -> bool {
        match o {
            TaskObstacle::Disk { center, radius } => {
                segment_point_dist_sq(a, b, *center)
                    <= (*radius + self.link_radius) * (*radius + self.link_radius)
            }
            TaskObstacle::Polygon { vertices } => {
                segment_polygon_dist_sq(a, b, vertices) <= self.link_radius * self.link_radius
            }
        }
    }
}

impl<S: Real> CollisionWorld<S> for PlanarArmWorld<S> {
    fn dim(&self) -> usize {
        self.link_lengths.len()
    }

    fn check(&self, q: &DVector<S>) -> bool {
        let pts = self.joint_positions(q);
        let links = self.link_lengths.len();
        for i in 0..links {
            for o in &self.obstacles {
                if self.link_hits_obstacle(pts[i], pts[i + 1], o) {
                    return true;
                }
            }
        }
        if self.self_collision {
            let r2 = (self.link_radius + self.link_radius) * (self.link_radius + self.link_radius);
            for i in 0..links {
                for j in (i + 2)..links {
                    if segment_segment_dist_sq(pts[i], pts[i + 1], pts[j], pts[j + 1]) <= r2 {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn pair_names(&self) -> Vec<String> {
        let links = self.link_lengths.len();
        let mut names: Vec<String> = (0..links)
            .flat_map(|i| (0..self.obstacles.len()).map(move |j| format!("link_{i}/obstacle_{j}")))
            .collect();
        if self.self_collision {
            for i in 0..links {
                for j in (i + 2)..links {
                    names.push(format!("link_{i}/link_{j}"));
                }
            }
        }
        names
    }
}

fn segment_point_dist_sq<S: Real>(a: Vector2<S>, b: Vector2<S>, p: Vector2<S>) -> S {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    let t = if len_sq <= S::cast(1e-30) {
        S::zero()
    } else {
        ((p - a).dot(&ab) / len_sq).max(S::zero()).min(S::one())
    };
    (p - (a + ab * t)).norm_squared()
}

fn orient<S: Real>(a: Vector2<S>, b: Vector2<S>, c: Vector2<S>) -> S {
    (b - a).perp(&(c - a))
}

fn segments_intersect<S: Real>(a: Vector2<S>, b: Vector2<S>, c: Vector2<S>, d: Vector2<S>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > S::zero() && o2 < S::zero()) || (o1 < S::zero() && o2 > S::zero()))
        && ((o3 > S::zero() && o4 < S::zero()) || (o3 < S::zero() && o4 > S::zero()))
    {
        return true;
    }
    false
}

fn segment_segment_dist_sq<S: Real>(
    a: Vector2<S>,
    b: Vector2<S>,
    c: Vector2<S>,
    d: Vector2<S>,
) -> S {
    if segments_intersect(a, b, c, d) {
        return S::zero();
    }
    segment_point_dist_sq(a, b, c)
        .min(segment_point_dist_sq(a, b, d))
        .min(segment_point_dist_sq(c, d, a))
        .min(segment_point_dist_sq(c, d, b))
}

fn point_in_polygon<S: Real>(p: Vector2<S>, vertices: &[Vector2<S>]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        if orient(vertices[i], vertices[(i + 1) % n], p) < S::zero() {
            return false;
        }
    }
    true
}

/// Squared distance from a segment to a solid convex polygon; zero when
/// they overlap.
fn segment_polygon_dist_sq<S: Real>(a: Vector2<S>, b: Vector2<S>, vertices: &[Vector2<S>]) -> S {
    if point_in_polygon(a, vertices) || point_in_polygon(b, vertices) {
        return S::zero();
    }
    let n = vertices.len();
    let mut best = S::cast(f64::INFINITY);
    for i in 0..n {
        let c = vertices[i];
        let d = vertices[(i + 1) % n];
        best = best.min(segment_segment_dist_sq(a, b, c, d));
        if best <= S::zero() {
            return S::zero();
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(parts: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(parts)
    }

    fn disk(cx: f64, cy: f64, r: f64) -> ConvexObstacle<f64> {
        ConvexObstacle::Ball {
            center: v(&[cx, cy]),
            radius: r,
        }
    }

    #[test]
    fn point_robot_containment() {
        let w = PointRobotWorld::new(2, vec![disk(3.0, 0.0, 1.0)]).unwrap();
        assert!(w.check(&v(&[3.0, 0.0])));
        assert!(!w.check(&v(&[0.0, 0.0])));
    }

    #[test]
    fn empty_world_is_all_free() {
        let w = PointRobotWorld::new(2, vec![]).unwrap();
        let qs = vec![v(&[0.0, 0.0]), v(&[5.0, -3.0])];
        assert_eq!(check_batch(&w, &qs), vec![false, false]);
    }

    #[test]
    fn batch_matches_sequential_and_order() {
        let w = PointRobotWorld::new(2, vec![disk(0.0, 0.0, 0.5), disk(2.0, 2.0, 0.25)]).unwrap();
        let qs: Vec<_> = (0..100)
            .map(|i| v(&[(i as f64) * 0.05 - 2.0, (i as f64) * 0.04 - 1.0]))
            .collect();
        let batch = check_batch(&w, &qs);
        let seq: Vec<_> = qs.iter().map(|q| w.check(q)).collect();
        assert_eq!(batch, seq);
    }

    #[test]
    fn extended_arm_touches_far_disk() {
        // Two unit links at q = 0 reach exactly (2, 0).
        let w = PlanarArmWorld::new(
            vec![1.0, 1.0],
            0.0,
            vec![TaskObstacle::Disk {
                center: Vector2::new(2.0, 0.0),
                radius: 0.1,
            }],
            vec![(-3.2, 3.2), (-3.2, 3.2)],
            false,
        )
        .unwrap();
        let pts = w.joint_positions(&v(&[0.0, 0.0]));
        assert_relative_eq!(pts[2].x, 2.0);
        assert_relative_eq!(pts[2].y, 0.0);
        assert!(w.check(&v(&[0.0, 0.0])));
        // Folded back, the arm stays near the origin.
        assert!(!w.check(&v(&[0.0, std::f64::consts::PI * 0.9])));
    }

    #[test]
    fn arm_capsule_radius_matters() {
        let obstacle = TaskObstacle::Disk {
            center: Vector2::new(1.0, 0.3),
            radius: 0.1,
        };
        let limits = vec![(-3.2, 3.2)];
        let thin = PlanarArmWorld::new(
            vec![2.0],
            0.05,
            vec![obstacle.clone()],
            limits.clone(),
            false,
        )
        .unwrap();
        let thick = PlanarArmWorld::new(vec![2.0], 0.25, vec![obstacle], limits, false).unwrap();
        let q = v(&[0.0]);
        assert!(!thin.check(&q));
        assert!(thick.check(&q));
    }

    #[test]
    fn self_collision_pairs_are_opt_in() {
        // Three links folded back so links 0 and 2 overlap; adjacent pairs
        // are never checked.
        let q = v(&[
            0.0,
            std::f64::consts::PI * 0.98,
            std::f64::consts::PI * 0.98,
        ]);
        let limits = vec![(-3.2, 3.2); 3];
        let loose =
            PlanarArmWorld::new(vec![1.0, 1.0, 1.0], 0.02, vec![], limits.clone(), false).unwrap();
        assert!(!loose.check(&q));
        let strict = PlanarArmWorld::new(vec![1.0, 1.0, 1.0], 0.02, vec![], limits, true).unwrap();
        assert!(strict.check(&q));
        assert!(strict.pair_names().contains(&"link_0/link_2".to_string()));
    }

    #[test]
    fn polygon_obstacle_contains_and_projects() {
        let poly = ConvexObstacle::Polygon {
            vertices: vec![
                v(&[0.0, 0.0]),
                v(&[1.0, 0.0]),
                v(&[1.0, 1.0]),
                v(&[0.0, 1.0]),
            ],
        };
        poly.validate().unwrap();
        assert!(poly.contains(&v(&[0.5, 0.5])));
        assert!(!poly.contains(&v(&[1.5, 0.5])));
        let p = poly.project(&v(&[2.0, 0.5]));
        assert_relative_eq!(p[0], 1.0);
        assert_relative_eq!(p[1], 0.5);
    }

    #[test]
    fn nonconvex_polygon_rejected() {
        let poly = ConvexObstacle::Polygon {
            vertices: vec![
                v(&[0.0, 0.0]),
                v(&[2.0, 0.0]),
                v(&[1.0, 0.2]),
                v(&[2.0, 2.0]),
            ],
        };
        assert!(matches!(poly.validate(), Err(WorldError::NonConvexPolygon)));
    }

    #[test]
    fn metric_projection_identity_ball_closed_form() {
        let e = Ellipsoid::new(nalgebra::DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let o = disk(3.0, 0.0, 1.0);
        let x = o.closest_point_in_metric(&e).unwrap();
        assert_relative_eq!(x[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(x[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn metric_projection_box() {
        let e = Ellipsoid::new(nalgebra::DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let o = ConvexObstacle::AxisBox {
            lo: v(&[2.0, -1.0]),
            hi: v(&[3.0, 1.0]),
        };
        let x = o.closest_point_in_metric(&e).unwrap();
        assert_relative_eq!(x[0], 2.0, epsilon = 1e-8);
        assert_relative_eq!(x[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn metric_projection_respects_anisotropy() {
        // Metric diag(4, 1) from the origin onto the unit-radius disk at
        // (2, 2): the minimizer trades x-distance for y-distance compared
        // with the Euclidean projection. Verify against a dense boundary
        // scan.
        let e = Ellipsoid::new(
            nalgebra::DMatrix::from_diagonal(&v(&[4.0, 1.0])),
            v(&[0.0, 0.0]),
        )
        .unwrap();
        let o = disk(2.0, 2.0, 1.0);
        let x = o.closest_point_in_metric(&e).unwrap();
        let mut best = f64::INFINITY;
        let mut best_pt = v(&[0.0, 0.0]);
        for i in 0..200_000 {
            let th = 2.0 * std::f64::consts::PI * (i as f64) / 200_000.0;
            let p = v(&[2.0 + th.cos(), 2.0 + th.sin()]);
            let m = e.metric_sq(&p);
            if m < best {
                best = m;
                best_pt = p;
            }
        }
        assert!(e.metric_sq(&x) <= best + 1e-6);
        assert!((x - best_pt).norm() < 1e-3);
    }

    #[test]
    fn fraction_estimate_extremes() {
        let p = HPolytope::axis_box(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        let cfg = SamplerConfig::new(v(&[0.5, 0.5]), 3);
        let empty = PointRobotWorld::new(2, vec![]).unwrap();
        let est = fraction_in_collision(&empty, &p, 1000, &cfg).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.half_width, 0.0);

        let everything = PointRobotWorld::new(
            2,
            vec![ConvexObstacle::AxisBox {
                lo: v(&[-1.0, -1.0]),
                hi: v(&[2.0, 2.0]),
            }],
        )
        .unwrap();
        let est = fraction_in_collision(&everything, &p, 1000, &cfg).unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn fraction_estimate_half_box() {
        let p = HPolytope::axis_box(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        let w = PointRobotWorld::new(
            2,
            vec![ConvexObstacle::AxisBox {
                lo: v(&[0.0, 0.0]),
                hi: v(&[0.5, 1.0]),
            }],
        )
        .unwrap();
        let cfg = SamplerConfig::new(v(&[0.5, 0.5]), 99).with_chains(8);
        let est = fraction_in_collision(&w, &p, 100_000, &cfg).unwrap();
        // Exact area ratio is 0.5; stay within three standard errors.
        let se = (0.25f64 / 100_000.0).sqrt();
        assert!((est.mean - 0.5).abs() <= 3.0 * se, "estimate {}", est.mean);
        assert!(est.half_width < 0.01);
    }
}
