//! Grows large convex polytopes in a robot's configuration space whose
//! fraction in collision is probabilistically bounded by user parameters
//! `(epsilon, delta)`.
//!
//! The crate combines four ingredients:
//!
//! * [`geometry`] — H-polytopes, ellipsoids, and tangent separating planes;
//! * [`sampling`] — deterministic multi-chain hit-and-run sampling;
//! * [`stattest`] — the fixed-sample Bernoulli accept/reject test and the
//!   union-bound uncertainty schedules that make sequential testing sound;
//! * [`mvie`] — the maximum-volume inscribed ellipsoid of a polytope.
//!
//! [`iris`] ties them together: it alternates a zero-order separating-planes
//! step (sample, collision-check, bisect toward the ellipsoid center, place
//! tangent planes) with inscribed-ellipsoid updates, and terminates the
//! plane-adding loop through the statistical test. [`collision`] provides
//! desk-scale environments (point robots among convex obstacles, a planar
//! capsule arm) plus the Monte Carlo fraction-in-collision oracle used for
//! validation.
//!
//! All numeric code is generic over the scalar type via [`Real`]; the
//! `*64` aliases below fix the common double-precision instantiation.

pub mod collision;
pub mod geometry;
pub mod iris;
pub mod mvie;
pub mod real;
pub mod sampling;
pub mod stattest;

pub use real::Real;

/// Dynamically sized configuration vector.
pub type Vector<S> = nalgebra::DVector<S>;
/// Dynamically sized matrix.
pub type Matrix<S> = nalgebra::DMatrix<S>;

pub type HPolytope64 = geometry::HPolytope<f64>;
pub type Ellipsoid64 = geometry::Ellipsoid<f64>;
pub type Hyperplane64 = geometry::Hyperplane<f64>;
pub type IrisOptions64 = iris::IrisOptions<f64>;
pub type RegionReport64 = iris::RegionReport<f64>;
pub type TestSpec64 = stattest::TestSpec<f64>;
