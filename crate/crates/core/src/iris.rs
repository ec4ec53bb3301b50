//! Region growing: the alternation template, the zero-order
//! separating-planes step with its statistical termination test, the ray
//! and greedy candidate generators, and the exact convex-obstacle baseline.
//!
//! The main loop alternates two steps. The separating-planes step draws
//! approximately uniform samples in the current polytope, collision-checks
//! them, and either accepts via the unadaptive test (consuming the
//! schedule budget `delta_{i,k}`) or turns colliding samples into tangent
//! hyperplanes that cut the obstacles away. The inscribed-ellipsoid step
//! recomputes the metric that governs where those planes go. Alternation
//! stops when the seed is cut off, the ellipsoid volume stops growing, an
//! iteration cap is hit, or the polytope is accepted untouched.

use nalgebra::DVector;
use rayon::prelude::*;
use thiserror::Error;

use crate::collision::{check_batch, CollisionWorld, ConvexObstacle, WorldError};
use crate::geometry::{Ellipsoid, GeometryError, HPolytope, Hyperplane};
use crate::mvie::{inscribed_ellipsoid, MvieError};
use crate::real::{derive_seed, Real};
use crate::sampling::{hit_and_run_batch, SamplerConfig, SamplingError, MIXING_STEPS_PER_DIM};
use crate::stattest::{
    delta_schedule_inner, delta_schedule_nested, sample_count, unadaptive_test, StatError,
    TestSpec, Verdict,
};

#[derive(Debug, Error)]
pub enum IrisError {
    #[error("seed configuration is in collision")]
    SeedInCollision,
    #[error("seed configuration is not strictly inside the domain")]
    SeedOutsideDomain,
    #[error("domain polytope is not bounded")]
    UnboundedDomain,
    #[error("ellipsoid center is in collision")]
    CenterInCollision,
    #[error("candidate configuration is not in collision")]
    CandidateNotInCollision,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Mvie(#[from] MvieError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// How colliding samples become hyperplane anchor candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateGenerator {
    /// Bisect from the sample toward the ellipsoid center, keeping the
    /// in-collision endpoint of the final bracket.
    Bisection,
    /// March outward from the center through the sample in discrete steps;
    /// take the first step in collision.
    Ray,
    /// Use the colliding samples themselves.
    Greedy,
}

impl CandidateGenerator {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bisection => "bisection",
            Self::Ray => "ray",
            Self::Greedy => "greedy",
        }
    }
}

/// Algorithm parameters. See the field docs for the roles; `epsilon`,
/// `delta`, `tau` form the statistical test spec.
#[derive(Clone, Debug, PartialEq)]
pub struct IrisOptions<S: Real> {
    /// Admissible fraction of the region in collision.
    pub epsilon: S,
    /// Maximum admissible uncertainty of the guarantee.
    pub delta: S,
    /// Test margin; 0.5 balances power and cost.
    pub tau: S,
    /// Distance a separating plane is shifted toward the center so the
    /// anchoring collision configuration is strictly excluded.
    pub stepback: S,
    /// Collision samples refined into candidates per inner iteration (N_p).
    pub particles: usize,
    /// Bisection steps per candidate (N_b).
    pub bisections: usize,
    /// Maximum hyperplanes added per inner iteration (N_f).
    pub max_faces_per_iter: usize,
    pub max_inner_iterations: usize,
    pub max_outer_iterations: usize,
    /// Relative inscribed-volume growth between outer iterations below
    /// which the alternation stops (T).
    pub termination_threshold: S,
    /// Radius of the initial ball ellipsoid around the seed.
    pub r_start: S,
    pub candidate_generator: CandidateGenerator,
    /// Hit-and-run steps between retained samples; `None` picks
    /// `50 * dim`.
    pub mixing_steps: Option<usize>,
    /// Hit-and-run chains per batch.
    pub chains: usize,
    /// Master seed; every (outer, inner) iteration derives its own stream.
    pub rng_seed: u64,
    /// Relative tolerance of the inscribed-ellipsoid solve.
    pub mvie_tol: S,
}

impl<S: Real> IrisOptions<S> {
    pub fn new(epsilon: S, delta: S) -> Self {
        Self {
            epsilon,
            delta,
            tau: S::cast(0.5),
            stepback: S::cast(1e-2),
            particles: 64,
            bisections: 20,
            max_faces_per_iter: 10,
            max_inner_iterations: 20,
            max_outer_iterations: 10,
            termination_threshold: S::cast(2e-2),
            r_start: S::cast(1e-3),
            candidate_generator: CandidateGenerator::Bisection,
            mixing_steps: None,
            chains: 4,
            rng_seed: 0,
            mvie_tol: S::cast(crate::mvie::DEFAULT_TOL),
        }
    }

    pub fn test_spec(&self) -> Result<TestSpec<S>, StatError> {
        TestSpec::new(self.epsilon, self.delta, self.tau)
    }

    fn mixing_for(&self, dim: usize) -> usize {
        self.mixing_steps
            .unwrap_or(MIXING_STEPS_PER_DIM * dim.max(1))
    }

    /// Per-test uncertainty budget. With a single outer iteration the
    /// one-level schedule `6 delta / (pi^2 k^2)` applies; otherwise the
    /// nested schedule `36 delta / (pi^4 i^2 k^2)` keeps the union bound
    /// valid over an unknown number of alternations.
    pub fn schedule_delta(&self, outer: usize, inner: usize) -> Result<S, StatError> {
        if self.max_outer_iterations == 1 {
            delta_schedule_inner(self.delta, inner)
        } else {
            delta_schedule_nested(self.delta, outer, inner)
        }
    }
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminationReason {
    /// The statistical test accepted the polytope untouched (no hyperplane
    /// added in the final separating-planes call), so further alternation
    /// cannot change the result.
    Accepted,
    /// The seed left the polytope; the excluding polytope is returned.
    SeedExcluded,
    /// Outer-iteration budget exhausted.
    MaxIterations,
    /// Relative inscribed-volume growth fell below the threshold.
    VolumeConverged,
    /// A freshly computed ellipsoid center was in collision; the run stops
    /// with the last valid polytope rather than attempting recovery.
    CenterInCollision,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            Self::Accepted => "accepted",
            Self::SeedExcluded => "seed_excluded",
            Self::MaxIterations => "max_iterations",
            Self::VolumeConverged => "volume_converged",
            Self::CenterInCollision => "center_in_collision",
        }
    }
}

/// One statistical test plus the hyperplanes it triggered.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerIterationLog<S: Real> {
    pub k: usize,
    /// Schedule budget spent on this test.
    pub delta: S,
    /// Samples the test consumed.
    pub m: usize,
    /// Samples drawn (`max(m, particles)`).
    pub batch: usize,
    pub collisions_in_first_m: usize,
    pub collisions_in_batch: usize,
    pub verdict: Verdict,
    pub planes_added: usize,
}

/// One alternation: a separating-planes call and the following ellipsoid
/// update.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterIterationLog<S: Real> {
    pub index: usize,
    pub inner: Vec<InnerIterationLog<S>>,
    pub hyperplanes_added: usize,
    pub mvie_log_volume_proxy: Option<S>,
    pub mvie_converged: Option<bool>,
}

/// Full audit trail of a run; together with the master seed it
/// reconstructs the run exactly.
#[derive(Clone, Debug)]
pub struct RegionReport<S: Real> {
    pub polytope: HPolytope<S>,
    pub final_ellipsoid: Ellipsoid<S>,
    pub seed: DVector<S>,
    pub outer_iterations: usize,
    pub iterations: Vec<OuterIterationLog<S>>,
    pub termination_reason: TerminationReason,
    /// Whether the final separating-planes call ended with the test
    /// accepting, i.e. the returned polytope carries the statistical
    /// guarantee.
    pub certified: bool,
    pub samples_drawn: usize,
    pub collisions_found: usize,
    pub hyperplanes_added: usize,
}

/// Output of one separating-planes call.
#[derive(Clone, Debug)]
pub struct SeparatingPlanesResult<S: Real> {
    pub polytope: HPolytope<S>,
    /// Whether the unadaptive test accepted (budget exhaustion leaves this
    /// false; that is reported, not fatal).
    pub accepted: bool,
    pub hyperplanes_added: usize,
    pub inner: Vec<InnerIterationLog<S>>,
}

/// Steps from `q_col` toward the collision-free `c`, bisecting `n_steps`
/// times, and returns the in-collision endpoint of the final bracket. The
/// bracket width is `|q_col - c| 2^-n_steps`.
///
/// The returned point sits on the boundary bracket of some obstacle along
/// the segment, not necessarily the obstacle containing `q_col` or the one
/// closest to `c`.
pub fn bisect_to_center<S: Real, W: CollisionWorld<S> + ?Sized>(
    q_col: &DVector<S>,
    c: &DVector<S>,
    world: &W,
    n_steps: usize,
) -> Result<DVector<S>, IrisError> {
    if q_col.len() != c.len() {
        return Err(IrisError::DimensionMismatch {
            expected: c.len(),
            got: q_col.len(),
        });
    }
    if !world.check(q_col) {
        return Err(IrisError::CandidateNotInCollision);
    }
    if world.check(c) {
        return Err(IrisError::CenterInCollision);
    }
    Ok(bisect_unchecked(q_col, c, world, n_steps))
}

fn bisect_unchecked<S: Real, W: CollisionWorld<S> + ?Sized>(
    q_col: &DVector<S>,
    c: &DVector<S>,
    world: &W,
    n_steps: usize,
) -> DVector<S> {
    // Parametrize q(t) = c + t (q_col - c); t_free stays collision-free,
    // t_col stays in collision.
    let mut t_free = S::zero();
    let mut t_col = S::one();
    let half = S::cast(0.5);
    let dir = q_col - c;
    for _ in 0..n_steps {
        let mid = (t_free + t_col) * half;
        let q = c + &dir * mid;
        if world.check(&q) {
            t_col = mid;
        } else {
            t_free = mid;
        }
    }
    c + dir * t_col
}

/// Marches outward from `c` through `sample` in steps of
/// `step_fraction * (sample - c)` and returns the first configuration in
/// collision, or `None` once the march leaves the polytope.
pub fn ray_collision_search<S: Real, W: CollisionWorld<S> + ?Sized>(
    sample: &DVector<S>,
    c: &DVector<S>,
    p: &HPolytope<S>,
    world: &W,
    step_fraction: S,
) -> Option<DVector<S>> {
    assert_eq!(sample.len(), c.len(), "configuration dimension mismatch");
    let dir = sample - c;
    let mut j = 1usize;
    loop {
        let q = c + &dir * (step_fraction * S::from_count(j));
        if !p.contains(&q) {
            return None;
        }
        if world.check(&q) {
            return Some(q);
        }
        j += 1;
    }
}

/// Sorts collision samples ascending by squared ellipsoid distance to the
/// center (stable: ties keep input order) and drops any that already left
/// `p`. Consumers skip entries that later planes make redundant.
pub fn greedy_candidates<S: Real>(
    collision_samples: &[DVector<S>],
    e: &Ellipsoid<S>,
    p: &HPolytope<S>,
) -> Vec<DVector<S>> {
    let mut keyed: Vec<(S, usize)> = collision_samples
        .iter()
        .enumerate()
        .filter(|(_, q)| p.contains(q))
        .map(|(i, q)| (e.metric_sq(q), i))
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("metric values are finite"));
    keyed
        .into_iter()
        .map(|(_, i)| collision_samples[i].clone())
        .collect()
}

fn sort_by_metric<S: Real>(mut candidates: Vec<DVector<S>>, e: &Ellipsoid<S>) -> Vec<DVector<S>> {
    let keys: Vec<S> = candidates.iter().map(|q| e.metric_sq(q)).collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .partial_cmp(&keys[b])
            .expect("metric values are finite")
    });
    let mut out = Vec::with_capacity(candidates.len());
    for idx in order {
        out.push(std::mem::replace(&mut candidates[idx], DVector::zeros(0)));
    }
    out
}

/// Walks the metric-sorted candidates, skipping any no longer strictly
/// inside the running polytope, and adds ellipsoid-tangent hyperplanes
/// (shifted by `stepback`) until `max_faces` non-redundant planes are
/// placed or the candidates run out. Returns the updated polytope and the
/// number of planes placed.
pub fn place_tangent_hyperplanes<S: Real>(
    p: &HPolytope<S>,
    e: &Ellipsoid<S>,
    sorted_candidates: &[DVector<S>],
    stepback: S,
    max_faces: usize,
) -> (HPolytope<S>, usize) {
    let mut poly = p.clone();
    let mut placed = 0usize;
    for q_star in sorted_candidates {
        if placed >= max_faces {
            break;
        }
        if !poly.contains_strict(q_star) {
            continue;
        }
        match e.tangent_hyperplane(q_star, stepback) {
            Ok(h) => {
                poly = poly.add_face(&h);
                placed += 1;
            }
            // A candidate exactly at the center has no tangent direction.
            Err(_) => continue,
        }
    }
    (poly, placed)
}

/// The zero-order separating-planes step for outer iteration
/// `outer_index`: repeatedly sample `max(M, particles)` configurations in
/// the current polytope, accept via the unadaptive test on the first `M`
/// flags, otherwise refine colliding samples into candidates and place
/// tangent planes.
pub fn zero_order_separating_planes<S: Real, W: CollisionWorld<S> + ?Sized>(
    domain: &HPolytope<S>,
    e: &Ellipsoid<S>,
    outer_index: usize,
    world: &W,
    opts: &IrisOptions<S>,
) -> Result<SeparatingPlanesResult<S>, IrisError> {
    if world.dim() != domain.dim() || e.dim() != domain.dim() {
        return Err(IrisError::DimensionMismatch {
            expected: domain.dim(),
            got: world.dim(),
        });
    }
    if world.check(e.center()) {
        return Err(IrisError::CenterInCollision);
    }
    let spec = opts.test_spec()?;
    let dim = domain.dim();
    let mut poly = domain.clone();
    let mut inner = Vec::new();
    let mut total_planes = 0usize;
    let outer_stream = derive_seed(opts.rng_seed, outer_index as u64);

    for k in 1..=opts.max_inner_iterations {
        let delta_ik = opts.schedule_delta(outer_index, k)?;
        let m = sample_count(&spec, delta_ik)?;
        let batch = m.max(opts.particles);
        let cfg = SamplerConfig {
            mixing_steps: opts.mixing_for(dim),
            chains: opts.chains,
            rng_seed: derive_seed(outer_stream, k as u64),
            start: e.center().clone(),
        };
        let samples = hit_and_run_batch(&poly, batch, &cfg)?;
        let flags = check_batch(world, &samples);
        let outcome = unadaptive_test(&flags, &spec, m)?;
        let collisions_in_batch = flags.iter().filter(|&&f| f).count();

        if outcome.verdict == Verdict::Accept {
            inner.push(InnerIterationLog {
                k,
                delta: delta_ik,
                m,
                batch,
                collisions_in_first_m: outcome.successes,
                collisions_in_batch,
                verdict: Verdict::Accept,
                planes_added: 0,
            });
            return Ok(SeparatingPlanesResult {
                polytope: poly,
                accepted: true,
                hyperplanes_added: total_planes,
                inner,
            });
        }

        let colliding: Vec<&DVector<S>> = samples
            .iter()
            .zip(flags.iter())
            .filter(|(_, &f)| f)
            .map(|(q, _)| q)
            .collect();
        let candidates: Vec<DVector<S>> = match opts.candidate_generator {
            CandidateGenerator::Bisection => colliding
                .par_iter()
                .take(opts.particles)
                .map(|q| bisect_unchecked(q, e.center(), world, opts.bisections))
                .collect(),
            CandidateGenerator::Ray => {
                let step = S::one() / S::from_count(opts.bisections.max(1));
                colliding
                    .par_iter()
                    .take(opts.particles)
                    .filter_map(|q| ray_collision_search(q, e.center(), &poly, world, step))
                    .collect()
            }
            CandidateGenerator::Greedy => colliding.iter().map(|&q| q.clone()).collect(),
        };
        let sorted = sort_by_metric(candidates, e);
        let (updated, placed) =
            place_tangent_hyperplanes(&poly, e, &sorted, opts.stepback, opts.max_faces_per_iter);
        poly = updated;
        total_planes += placed;
        inner.push(InnerIterationLog {
            k,
            delta: delta_ik,
            m,
            batch,
            collisions_in_first_m: outcome.successes,
            collisions_in_batch,
            verdict: Verdict::Reject,
            planes_added: placed,
        });
    }

    Ok(SeparatingPlanesResult {
        polytope: poly,
        accepted: false,
        hyperplanes_added: total_planes,
        inner,
    })
}

/// Grows a region around `seed` inside `domain`.
///
/// Preconditions: `domain` bounded, `seed` strictly inside it and
/// collision-free. On success the returned polytope is contained in the
/// domain; when the final separating-planes call accepted (see
/// [`RegionReport::certified`]) the polytope carries the
/// fraction-in-collision guarantee for `(epsilon, delta)`.
pub fn iris_grow<S: Real, W: CollisionWorld<S> + ?Sized>(
    domain: &HPolytope<S>,
    seed: &DVector<S>,
    world: &W,
    opts: &IrisOptions<S>,
) -> Result<RegionReport<S>, IrisError> {
    if seed.len() != domain.dim() || world.dim() != domain.dim() {
        return Err(IrisError::DimensionMismatch {
            expected: domain.dim(),
            got: seed.len(),
        });
    }
    if !domain.is_axis_bounded() {
        return Err(IrisError::UnboundedDomain);
    }
    if domain.slacks(seed).min() <= S::zero() {
        return Err(IrisError::SeedOutsideDomain);
    }
    if world.check(seed) {
        return Err(IrisError::SeedInCollision);
    }

    let mut ellipsoid = Ellipsoid::ball(seed.clone(), opts.r_start)?;
    let mut polytope = domain.clone();
    let mut iterations: Vec<OuterIterationLog<S>> = Vec::new();
    let mut reason = TerminationReason::MaxIterations;
    let mut certified = false;
    let mut prev_proxy: Option<S> = None;

    for i in 1..=opts.max_outer_iterations {
        if world.check(ellipsoid.center()) {
            reason = TerminationReason::CenterInCollision;
            break;
        }
        let sep = zero_order_separating_planes(domain, &ellipsoid, i, world, opts)?;
        polytope = sep.polytope;
        certified = sep.accepted;
        let seed_inside = polytope.contains(seed);

        let mvie = match inscribed_ellipsoid(&polytope, opts.mvie_tol) {
            Ok(r) => Some(r),
            Err(err) => {
                if seed_inside {
                    return Err(err.into());
                }
                // Seed already excluded: report with the previous ellipsoid.
                None
            }
        };
        iterations.push(OuterIterationLog {
            index: i,
            inner: sep.inner,
            hyperplanes_added: sep.hyperplanes_added,
            mvie_log_volume_proxy: mvie.as_ref().map(|r| r.log_volume_proxy),
            mvie_converged: mvie.as_ref().map(|r| r.converged),
        });
        let proxy = mvie.as_ref().map(|r| r.log_volume_proxy);
        if let Some(r) = mvie {
            ellipsoid = r.ellipsoid;
        }

        if !seed_inside {
            reason = TerminationReason::SeedExcluded;
            break;
        }
        if sep.accepted && sep.hyperplanes_added == 0 {
            reason = TerminationReason::Accepted;
            break;
        }
        if let (Some(prev), Some(cur)) = (prev_proxy, proxy) {
            // Relative volume growth: exp(proxy difference) - 1.
            let rel = (cur - prev).exp() - S::one();
            if rel < opts.termination_threshold {
                reason = TerminationReason::VolumeConverged;
                break;
            }
        }
        prev_proxy = proxy;
    }

    let samples_drawn = iterations
        .iter()
        .flat_map(|o| o.inner.iter())
        .map(|l| l.batch)
        .sum();
    let collisions_found = iterations
        .iter()
        .flat_map(|o| o.inner.iter())
        .map(|l| l.collisions_in_batch)
        .sum();
    let hyperplanes_added = iterations.iter().map(|o| o.hyperplanes_added).sum();
    Ok(RegionReport {
        polytope,
        final_ellipsoid: ellipsoid,
        seed: seed.clone(),
        outer_iterations: iterations.len(),
        iterations,
        termination_reason: reason,
        certified,
        samples_drawn,
        collisions_found,
        hyperplanes_added,
    })
}

/// Separating-planes step of the convex-obstacle baseline: for each
/// obstacle, the point closest to the center in the ellipsoid metric
/// anchors a hyperplane `a = E (x* - c)`, `b = a . x*` (no stepback),
/// which separates the center from the whole obstacle.
pub fn convex_iris_separating_planes<S: Real>(
    obstacles: &[ConvexObstacle<S>],
    e: &Ellipsoid<S>,
    domain: &HPolytope<S>,
) -> Result<HPolytope<S>, IrisError> {
    for o in obstacles {
        if o.contains(e.center()) {
            return Err(IrisError::CenterInCollision);
        }
    }
    let mut poly = domain.clone();
    for o in obstacles {
        let x_star = o.closest_point_in_metric(e)?;
        let a = e.shape() * (&x_star - e.center());
        let b = a.dot(&x_star);
        let h = Hyperplane::new(a, b)?;
        poly = poly.add_face(&h);
    }
    Ok(poly)
}

/// Result of the convex-obstacle baseline run.
#[derive(Clone, Debug)]
pub struct ConvexIrisResult<S: Real> {
    pub polytope: HPolytope<S>,
    pub ellipsoid: Ellipsoid<S>,
    pub outer_iterations: usize,
    pub termination_reason: TerminationReason,
}

/// Exact baseline for worlds whose obstacles are convex sets in
/// configuration space: alternates [`convex_iris_separating_planes`] with
/// inscribed-ellipsoid updates. The produced regions are exactly
/// collision-free (up to obstacle boundaries).
pub fn convex_iris_grow<S: Real>(
    domain: &HPolytope<S>,
    seed: &DVector<S>,
    obstacles: &[ConvexObstacle<S>],
    opts: &IrisOptions<S>,
) -> Result<ConvexIrisResult<S>, IrisError> {
    if seed.len() != domain.dim() {
        return Err(IrisError::DimensionMismatch {
            expected: domain.dim(),
            got: seed.len(),
        });
    }
    if !domain.is_axis_bounded() {
        return Err(IrisError::UnboundedDomain);
    }
    if domain.slacks(seed).min() <= S::zero() {
        return Err(IrisError::SeedOutsideDomain);
    }
    if obstacles.iter().any(|o| o.contains(seed)) {
        return Err(IrisError::SeedInCollision);
    }

    let mut ellipsoid = Ellipsoid::ball(seed.clone(), opts.r_start)?;
    let mut polytope = domain.clone();
    let mut reason = TerminationReason::MaxIterations;
    let mut prev_proxy: Option<S> = None;
    let mut outer = 0usize;
    for _ in 1..=opts.max_outer_iterations {
        outer += 1;
        polytope = convex_iris_separating_planes(obstacles, &ellipsoid, domain)?;
        if !polytope.contains(seed) {
            reason = TerminationReason::SeedExcluded;
            break;
        }
        let mvie = inscribed_ellipsoid(&polytope, opts.mvie_tol)?;
        ellipsoid = mvie.ellipsoid;
        if let Some(prev) = prev_proxy {
            let rel = (mvie.log_volume_proxy - prev).exp() - S::one();
            if rel < opts.termination_threshold {
                reason = TerminationReason::VolumeConverged;
                break;
            }
        }
        prev_proxy = Some(mvie.log_volume_proxy);
    }
    Ok(ConvexIrisResult {
        polytope,
        ellipsoid,
        outer_iterations: outer,
        termination_reason: reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::PointRobotWorld;

    fn v(parts: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(parts)
    }

    fn interval_world(lo: f64, hi: f64) -> PointRobotWorld<f64> {
        PointRobotWorld::new(
            1,
            vec![ConvexObstacle::AxisBox {
                lo: v(&[lo]),
                hi: v(&[hi]),
            }],
        )
        .unwrap()
    }

    #[test]
    fn bisection_bracket_1d() {
        let world = interval_world(0.5, 1.0);
        let c = v(&[0.0]);
        let q = v(&[0.9]);
        for &n in &[5usize, 10, 20] {
            let q_star = bisect_to_center(&q, &c, &world, n).unwrap();
            let width = 0.9 * 0.5f64.powi(n as i32);
            assert!(world.check(&q_star));
            assert!(
                q_star[0] >= 0.5 && q_star[0] <= 0.5 + width,
                "n={n}: {}",
                q_star[0]
            );
        }
    }

    #[test]
    fn bisection_rejects_bad_inputs() {
        let world = interval_world(0.5, 1.0);
        assert!(matches!(
            bisect_to_center(&v(&[0.2]), &v(&[0.0]), &world, 10),
            Err(IrisError::CandidateNotInCollision)
        ));
        assert!(matches!(
            bisect_to_center(&v(&[0.9]), &v(&[0.7]), &world, 10),
            Err(IrisError::CenterInCollision)
        ));
    }

    #[test]
    fn bisection_with_disconnected_obstacles_lands_on_some_boundary() {
        // Obstacles [0.3, 0.4] and [0.7, 0.8] along the segment from 0 to
        // 0.75: the returned point is in collision and within the bracket
        // width of one of the boundary crossings.
        let world = PointRobotWorld::new(
            1,
            vec![
                ConvexObstacle::AxisBox {
                    lo: v(&[0.3]),
                    hi: v(&[0.4]),
                },
                ConvexObstacle::AxisBox {
                    lo: v(&[0.7]),
                    hi: v(&[0.8]),
                },
            ],
        )
        .unwrap();
        let c = v(&[0.0]);
        let q = v(&[0.75]);
        let n = 16;
        let q_star = bisect_to_center(&q, &c, &world, n).unwrap();
        assert!(world.check(&q_star));
        let width = 0.75 * 0.5f64.powi(n as i32);
        let near_boundary = [0.3, 0.4, 0.7]
            .iter()
            .any(|&b| (q_star[0] - b).abs() <= width);
        assert!(near_boundary, "q* = {}", q_star[0]);
        assert!(q_star.norm() <= q.norm());
    }

    #[test]
    fn ray_search_1d() {
        let world = interval_world(0.7, 1.0);
        let p = HPolytope::axis_box(&v(&[-1.0]), &v(&[1.0])).unwrap();
        let c = v(&[0.0]);
        let hit = ray_collision_search(&v(&[1.0]), &c, &p, &world, 0.1).unwrap();
        assert!((hit[0] - 0.7).abs() < 1e-12);

        let free = interval_world(5.0, 6.0);
        assert!(ray_collision_search(&v(&[1.0]), &c, &p, &free, 0.1).is_none());

        // Obstacle beyond the polytope boundary: the march exits first.
        let outside = interval_world(1.5, 2.0);
        assert!(ray_collision_search(&v(&[1.0]), &c, &p, &outside, 0.1).is_none());
    }

    #[test]
    fn greedy_candidates_sorted_by_metric() {
        let e = Ellipsoid::new(nalgebra::DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let p = HPolytope::axis_box(&v(&[-5.0, -5.0]), &v(&[5.0, 5.0])).unwrap();
        let samples = vec![v(&[2.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 3.0])];
        let sorted = greedy_candidates(&samples, &e, &p);
        assert_eq!(sorted, vec![v(&[1.0, 0.0]), v(&[2.0, 0.0]), v(&[0.0, 3.0])]);
        assert!(greedy_candidates(&[], &e, &p).is_empty());
    }

    #[test]
    fn greedy_ties_keep_input_order() {
        let e = Ellipsoid::new(nalgebra::DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let p = HPolytope::axis_box(&v(&[-5.0, -5.0]), &v(&[5.0, 5.0])).unwrap();
        let samples = vec![v(&[0.0, 1.0]), v(&[1.0, 0.0]), v(&[-1.0, 0.0])];
        let sorted = greedy_candidates(&samples, &e, &p);
        assert_eq!(sorted, samples);
    }

    #[test]
    fn placement_respects_redundancy_and_budget() {
        // Five candidates under the identity metric; the farthest lies
        // behind the first plane placed and must be skipped.
        let e = Ellipsoid::new(nalgebra::DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let p = HPolytope::axis_box(&v(&[-10.0, -10.0]), &v(&[10.0, 10.0])).unwrap();
        let candidates = sort_by_metric(
            vec![
                v(&[1.0, 0.0]),
                v(&[1.5, 0.0]),
                v(&[0.0, 1.2]),
                v(&[-1.3, 0.0]),
                v(&[0.0, -1.4]),
            ],
            &e,
        );
        let (poly, placed) = place_tangent_hyperplanes(&p, &e, &candidates, 0.0, 10);
        assert_eq!(placed, 4);
        assert_eq!(poly.num_faces(), p.num_faces() + 4);

        let (_, capped) = place_tangent_hyperplanes(&p, &e, &candidates, 0.0, 2);
        assert_eq!(capped, 2);
    }

    #[test]
    fn stepback_excludes_candidate() {
        let e = Ellipsoid::new(nalgebra::DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let p = HPolytope::axis_box(&v(&[-10.0, -10.0]), &v(&[10.0, 10.0])).unwrap();
        let q_star = v(&[2.0, 1.0]);
        let (poly, placed) =
            place_tangent_hyperplanes(&p, &e, std::slice::from_ref(&q_star), 0.05, 10);
        assert_eq!(placed, 1);
        assert!(!poly.contains(&q_star));
    }

    #[test]
    fn obstacle_free_grow_returns_domain() {
        let domain = HPolytope::axis_box(&v(&[-1.0, -1.0]), &v(&[1.0, 1.0])).unwrap();
        let world = PointRobotWorld::new(2, vec![]).unwrap();
        let mut opts = IrisOptions::new(0.05, 0.05);
        opts.rng_seed = 17;
        let report = iris_grow(&domain, &v(&[0.0, 0.0]), &world, &opts).unwrap();
        assert_eq!(report.termination_reason, TerminationReason::Accepted);
        assert!(report.certified);
        assert_eq!(report.outer_iterations, 1);
        assert_eq!(report.iterations[0].inner.len(), 1);
        assert_eq!(report.hyperplanes_added, 0);
        assert_eq!(report.polytope, domain);
    }

    #[test]
    fn far_away_obstacle_is_as_good_as_none() {
        let domain = HPolytope::axis_box(&v(&[-1.0, -1.0]), &v(&[1.0, 1.0])).unwrap();
        let world = PointRobotWorld::new(
            2,
            vec![ConvexObstacle::Ball {
                center: v(&[50.0, 50.0]),
                radius: 1.0,
            }],
        )
        .unwrap();
        let mut opts = IrisOptions::new(0.05, 0.05);
        opts.rng_seed = 17;
        let report = iris_grow(&domain, &v(&[0.0, 0.0]), &world, &opts).unwrap();
        assert_eq!(report.termination_reason, TerminationReason::Accepted);
        assert_eq!(report.polytope, domain);
    }

    #[test]
    fn grow_rejects_bad_seeds() {
        let domain = HPolytope::axis_box(&v(&[-1.0, -1.0]), &v(&[1.0, 1.0])).unwrap();
        let world = PointRobotWorld::new(
            2,
            vec![ConvexObstacle::Ball {
                center: v(&[0.0, 0.0]),
                radius: 0.2,
            }],
        )
        .unwrap();
        let opts = IrisOptions::new(0.05, 0.05);
        assert!(matches!(
            iris_grow(&domain, &v(&[0.0, 0.0]), &world, &opts),
            Err(IrisError::SeedInCollision)
        ));
        assert!(matches!(
            iris_grow(&domain, &v(&[2.0, 0.0]), &world, &opts),
            Err(IrisError::SeedOutsideDomain)
        ));
    }

    #[test]
    fn zero_order_1d_obstacle_cut() {
        // Domain [-1, 1], obstacle [0.5, 1]: the accepted polytope must
        // exclude most of the obstacle; with stepback 0.01 its upper face
        // sits near 0.49 once a plane anchors at the obstacle boundary.
        let domain = HPolytope::axis_box(&v(&[-1.0]), &v(&[1.0])).unwrap();
        let world = interval_world(0.5, 1.0);
        let e = Ellipsoid::ball(v(&[0.0]), 0.25).unwrap();
        let mut opts = IrisOptions::new(0.05, 0.05);
        opts.stepback = 0.01;
        opts.bisections = 20;
        opts.rng_seed = 5;
        let res = zero_order_separating_planes(&domain, &e, 1, &world, &opts).unwrap();
        assert!(res.accepted);
        assert!(res.hyperplanes_added >= 1);
        // Upper boundary of the final interval: min over faces with
        // positive normal of b / a.
        let mut upper = f64::INFINITY;
        for i in 0..res.polytope.num_faces() {
            let a = res.polytope.a()[(i, 0)];
            if a > 0.0 {
                upper = upper.min(res.polytope.b()[i] / a);
            }
        }
        let width = 0.5f64.powi(20);
        assert!(
            upper >= 0.49 - 1e-9 && upper <= 0.49 + width + 1e-9,
            "upper = {upper}"
        );
        assert!(res.polytope.contains(&v(&[0.0])));
        assert!(!res.polytope.contains(&v(&[0.6])));
    }

    #[test]
    fn zero_order_monotone_within_call() {
        let domain = HPolytope::axis_box(&v(&[-1.0, -1.0]), &v(&[1.0, 1.0])).unwrap();
        let world = PointRobotWorld::new(
            2,
            vec![ConvexObstacle::Ball {
                center: v(&[0.8, 0.8]),
                radius: 0.3,
            }],
        )
        .unwrap();
        let e = Ellipsoid::ball(v(&[-0.3, -0.3]), 0.1).unwrap();
        let mut opts = IrisOptions::new(0.02, 0.05);
        opts.rng_seed = 23;
        opts.max_inner_iterations = 6;
        let res = zero_order_separating_planes(&domain, &e, 1, &world, &opts).unwrap();
        // Faces only accumulate, so the polytope after the call is a
        // subset of the domain; spot-check membership implication.
        let cfg = SamplerConfig::new(v(&[-0.3, -0.3]), 99);
        let probes = hit_and_run_batch(&domain, 500, &cfg).unwrap();
        for q in &probes {
            if res.polytope.contains(q) {
                assert!(domain.contains(q));
            }
        }
    }

    #[test]
    fn batch_size_is_max_of_test_count_and_particles() {
        let domain = HPolytope::axis_box(&v(&[-1.0, -1.0]), &v(&[1.0, 1.0])).unwrap();
        let world = PointRobotWorld::new(2, vec![]).unwrap();
        let e = Ellipsoid::ball(v(&[0.0, 0.0]), 0.1).unwrap();
        let mut opts = IrisOptions::new(0.05, 0.05);
        opts.rng_seed = 2;
        opts.particles = 5000;
        let res = zero_order_separating_planes(&domain, &e, 1, &world, &opts).unwrap();
        let log = &res.inner[0];
        assert!(log.m < 5000);
        assert_eq!(log.batch, 5000);

        opts.particles = 1;
        let res = zero_order_separating_planes(&domain, &e, 1, &world, &opts).unwrap();
        let log = &res.inner[0];
        assert_eq!(log.batch, log.m);
    }

    #[test]
    fn single_outer_mode_uses_inner_schedule() {
        let mut opts = IrisOptions::<f64>::new(0.1, 0.05);
        opts.max_outer_iterations = 1;
        let d = opts.schedule_delta(1, 3).unwrap();
        assert_eq!(d, delta_schedule_inner(0.05, 3).unwrap());
        opts.max_outer_iterations = 2;
        let d = opts.schedule_delta(1, 3).unwrap();
        assert_eq!(d, delta_schedule_nested(0.05, 1, 3).unwrap());
    }

    #[test]
    fn all_generators_produce_certified_regions() {
        let domain = HPolytope::axis_box(&v(&[-1.0, -1.0]), &v(&[1.0, 1.0])).unwrap();
        let world = PointRobotWorld::new(
            2,
            vec![ConvexObstacle::Ball {
                center: v(&[0.8, 0.8]),
                radius: 0.3,
            }],
        )
        .unwrap();
        let seed = v(&[-0.4, -0.4]);
        for generator in [
            CandidateGenerator::Bisection,
            CandidateGenerator::Ray,
            CandidateGenerator::Greedy,
        ] {
            let mut opts = IrisOptions::new(0.02, 0.05);
            opts.rng_seed = 11;
            opts.candidate_generator = generator;
            let report = iris_grow(&domain, &seed, &world, &opts).unwrap();
            assert!(report.certified, "{} not certified", generator.name());
            assert!(report.polytope.contains(&seed));
            // Obstacle center must be cut away.
            assert!(!report.polytope.contains(&v(&[0.8, 0.8])));
        }
    }

    #[test]
    fn exhausted_inner_budget_is_reported_not_fatal() {
        // Obstacle covering half the domain: the test rejects every
        // iteration, so the run ends uncertified at its budgets.
        let domain = HPolytope::axis_box(&v(&[-1.0, -1.0]), &v(&[1.0, 1.0])).unwrap();
        let world = PointRobotWorld::new(
            2,
            vec![ConvexObstacle::AxisBox {
                lo: v(&[-1.0, 0.2]),
                hi: v(&[1.0, 1.0]),
            }],
        )
        .unwrap();
        let mut opts = IrisOptions::new(0.05, 0.05);
        opts.rng_seed = 4;
        opts.max_inner_iterations = 1;
        opts.max_outer_iterations = 2;
        opts.max_faces_per_iter = 0;
        let report = iris_grow(&domain, &v(&[0.0, -0.5]), &world, &opts).unwrap();
        assert!(!report.certified);
        assert!(matches!(
            report.termination_reason,
            TerminationReason::MaxIterations | TerminationReason::VolumeConverged
        ));
        assert!(report
            .iterations
            .iter()
            .all(|o| o.inner.iter().all(|l| l.verdict == Verdict::Reject)));
    }

    #[test]
    fn grow_on_planar_arm_world() {
        use crate::collision::{PlanarArmWorld, TaskObstacle};
        let world = PlanarArmWorld::new(
            vec![1.0, 1.0],
            0.05,
            vec![TaskObstacle::Disk {
                center: nalgebra::Vector2::new(1.5, 0.5),
                radius: 0.3,
            }],
            vec![(-3.2, 3.2), (-3.2, 3.2)],
            false,
        )
        .unwrap();
        let domain = world.joint_limit_box();
        let seed = v(&[2.0, -2.0]);
        let mut opts = IrisOptions::new(0.05, 0.05);
        opts.rng_seed = 8;
        opts.max_outer_iterations = 4;
        let report = iris_grow(&domain, &seed, &world, &opts).unwrap();
        assert!(report.certified);
        assert!(report.polytope.contains(&seed));
        assert!(report.hyperplanes_added >= 1);
    }

    #[test]
    fn grow_works_in_single_precision() {
        let domain = HPolytope::<f32>::axis_box(
            &DVector::from_row_slice(&[-1.0f32, -1.0]),
            &DVector::from_row_slice(&[1.0f32, 1.0]),
        )
        .unwrap();
        let world = PointRobotWorld::<f32>::new(2, vec![]).unwrap();
        let mut opts = IrisOptions::<f32>::new(0.05, 0.05);
        opts.rng_seed = 17;
        let report = iris_grow(
            &domain,
            &DVector::from_row_slice(&[0.0f32, 0.0]),
            &world,
            &opts,
        )
        .unwrap();
        assert_eq!(report.termination_reason, TerminationReason::Accepted);
    }

    #[test]
    fn convex_baseline_disk_and_box() {
        let e = Ellipsoid::new(nalgebra::DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let domain = HPolytope::axis_box(&v(&[-5.0, -5.0]), &v(&[5.0, 5.0])).unwrap();
        let disk = ConvexObstacle::Ball {
            center: v(&[3.0, 0.0]),
            radius: 1.0,
        };
        let p = convex_iris_separating_planes(&[disk], &e, &domain).unwrap();
        // New face: x <= 2.
        let last = p.num_faces() - 1;
        assert!((p.a()[(last, 0)] - 1.0).abs() < 1e-9);
        assert!(p.a()[(last, 1)].abs() < 1e-9);
        assert!((p.b()[last] - 2.0).abs() < 1e-9);

        let boxo = ConvexObstacle::AxisBox {
            lo: v(&[2.0, -1.0]),
            hi: v(&[3.0, 1.0]),
        };
        let p = convex_iris_separating_planes(&[boxo], &e, &domain).unwrap();
        let last = p.num_faces() - 1;
        assert!((p.a()[(last, 0)] - 1.0).abs() < 1e-6);
        assert!((p.b()[last] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn convex_baseline_separates_whole_obstacle() {
        let e = Ellipsoid::new(nalgebra::DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let domain = HPolytope::axis_box(&v(&[-5.0, -5.0]), &v(&[5.0, 5.0])).unwrap();
        let poly_obstacle = ConvexObstacle::Polygon {
            vertices: vec![v(&[2.0, 1.0]), v(&[4.0, 1.5]), v(&[3.0, 3.0])],
        };
        let p = convex_iris_separating_planes(std::slice::from_ref(&poly_obstacle), &e, &domain)
            .unwrap();
        assert!(p.contains(&v(&[0.0, 0.0])));
        // Every vertex of the obstacle is excluded (strictly outside or on
        // the separating plane).
        if let ConvexObstacle::Polygon { vertices } = &poly_obstacle {
            for vert in vertices {
                assert!(!p.contains_strict(vert));
            }
        }
    }
}
