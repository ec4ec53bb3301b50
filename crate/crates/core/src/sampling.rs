//! Approximately uniform sampling inside a bounded H-polytope via
//! hit-and-run, with deterministic seeding and parallel multi-chain
//! batching.
//!
//! Each chain draws a random direction on the unit sphere, intersects the
//! line through the current point with the polytope, and jumps to a uniform
//! point on that chord. A sample is retained every `mixing_steps` jumps.
//! Chains are seeded independently from the configured seed, so the output
//! is a pure function of `(polytope, n, config)` no matter how many worker
//! threads run the chains.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{HPolytope, MEMBERSHIP_TOL};
use crate::real::{derive_seed, Real};

/// Mixing steps per retained sample default to `MIXING_STEPS_PER_DIM * dim`.
pub const MIXING_STEPS_PER_DIM: usize = 50;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("polytope is unbounded along a sampled direction")]
    Unbounded,
    #[error("start point is not strictly inside the polytope")]
    StartNotInterior,
    #[error("start dimension {got} does not match polytope dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mixing_steps and chains must be at least 1")]
    BadConfig,
}

/// Hit-and-run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig<S: Real> {
    /// Chain steps between retained samples (>= 1).
    pub mixing_steps: usize,
    /// Independent chains the batch is split across (>= 1).
    pub chains: usize,
    /// Master seed; chain `j` uses the derived stream `derive_seed(seed, j)`.
    pub rng_seed: u64,
    /// Common start point; must be strictly inside the polytope.
    pub start: DVector<S>,
}

impl<S: Real> SamplerConfig<S> {
    /// Defaults: `50 * dim` mixing steps, 4 chains.
    pub fn new(start: DVector<S>, rng_seed: u64) -> Self {
        let mixing_steps = MIXING_STEPS_PER_DIM * start.len().max(1);
        Self {
            mixing_steps,
            chains: 4,
            rng_seed,
            start,
        }
    }

    pub fn with_mixing_steps(mut self, mixing_steps: usize) -> Self {
        self.mixing_steps = mixing_steps;
        self
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains;
        self
    }
}

/// Maximal interval `[t_lo, t_hi]` with `q + t * dir` inside `p` for every
/// `t` in the interval; `t_lo <= 0 <= t_hi` for interior `q`.
///
/// `dir` must be unit length. Errors if the line leaves `p` unbounded on
/// either side.
pub fn chord<S: Real>(
    p: &HPolytope<S>,
    q: &DVector<S>,
    dir: &DVector<S>,
) -> Result<(S, S), SamplingError> {
    if q.len() != p.dim() || dir.len() != p.dim() {
        return Err(SamplingError::DimensionMismatch {
            expected: p.dim(),
            got: q.len(),
        });
    }
    let eps = S::cast(1e-14);
    let mut t_lo = S::cast(f64::NEG_INFINITY);
    let mut t_hi = S::cast(f64::INFINITY);
    for i in 0..p.num_faces() {
        let denom = p.face_dot(i, dir);
        let slack = p.b()[i] - p.face_dot(i, q);
        if denom > eps {
            t_hi = t_hi.min(slack / denom);
        } else if denom < -eps {
            t_lo = t_lo.max(slack / denom);
        } else if slack < -S::cast(MEMBERSHIP_TOL) {
            // Line parallel to a violated face: q was outside.
            return Err(SamplingError::StartNotInterior);
        }
    }
    if !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(SamplingError::Unbounded);
    }
    // Rounding can push a boundary-hugging interval just past zero; keep the
    // current point admissible.
    Ok((t_lo.min(S::zero()), t_hi.max(S::zero())))
}

fn random_unit_direction<S: Real>(rng: &mut ChaCha8Rng, buf: &mut DVector<S>) {
    loop {
        for x in buf.iter_mut() {
            *x = S::standard_normal(rng);
        }
        let n = buf.norm();
        if n > S::cast(1e-12) {
            *buf /= n;
            return;
        }
    }
}

fn run_chain<S: Real>(
    p: &HPolytope<S>,
    start: &DVector<S>,
    mixing_steps: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<DVector<S>>, SamplingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = start.clone();
    let mut dir = DVector::zeros(p.dim());
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..mixing_steps {
            random_unit_direction(&mut rng, &mut dir);
            let (t_lo, t_hi) = chord(p, &q, &dir)?;
            let t = t_lo + (t_hi - t_lo) * S::unit_uniform(&mut rng);
            q.axpy(t, &dir, S::one());
        }
        out.push(q.clone());
    }
    Ok(out)
}

/// Draws exactly `n` approximately uniform samples from `p`.
///
/// The result is a deterministic function of `(p, n, cfg)`: samples are
/// produced by `cfg.chains` independent chains (split as evenly as
/// possible, earlier chains take the remainder) and concatenated in chain
/// order, regardless of how the chains are scheduled.
pub fn hit_and_run_batch<S: Real>(
    p: &HPolytope<S>,
    n: usize,
    cfg: &SamplerConfig<S>,
) -> Result<Vec<DVector<S>>, SamplingError> {
    if cfg.mixing_steps < 1 || cfg.chains < 1 {
        return Err(SamplingError::BadConfig);
    }
    if cfg.start.len() != p.dim() {
        return Err(SamplingError::DimensionMismatch {
            expected: p.dim(),
            got: cfg.start.len(),
        });
    }
    if p.slacks(&cfg.start).min() <= S::zero() {
        return Err(SamplingError::StartNotInterior);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let base = n / cfg.chains;
    let rem = n % cfg.chains;
    let plan: Vec<(u64, usize)> = (0..cfg.chains)
        .map(|j| {
            let count = base + usize::from(j < rem);
            (derive_seed(cfg.rng_seed, j as u64), count)
        })
        .filter(|&(_, count)| count > 0)
        .collect();
    let chunks: Result<Vec<Vec<DVector<S>>>, SamplingError> = plan
        .par_iter()
        .map(|&(seed, count)| run_chain(p, &cfg.start, cfg.mixing_steps, count, seed))
        .collect();
    Ok(chunks?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HPolytope;
    use approx::assert_relative_eq;

    fn v(parts: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(parts)
    }

    fn unit_box2() -> HPolytope<f64> {
        HPolytope::axis_box(&v(&[-1.0, -1.0]), &v(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn chord_in_box() {
        let p = unit_box2();
        let (lo, hi) = chord(&p, &v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert_relative_eq!(lo, -1.0);
        assert_relative_eq!(hi, 1.0);

        let (lo, hi) = chord(&p, &v(&[0.5, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert_relative_eq!(lo, -1.5);
        assert_relative_eq!(hi, 0.5);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (lo, hi) = chord(&p, &v(&[0.0, 0.0]), &v(&[s, s])).unwrap();
        assert_relative_eq!(lo, -std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(hi, std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn chord_detects_unbounded() {
        // Single halfspace x <= 1: unbounded along -x and +-y.
        let p = HPolytope::new(
            nalgebra::DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            v(&[1.0]),
        )
        .unwrap();
        assert!(matches!(
            chord(&p, &v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(SamplingError::Unbounded)
        ));
    }

    #[test]
    fn batch_members_and_determinism() {
        let p = unit_box2();
        let cfg = SamplerConfig::new(v(&[0.0, 0.0]), 7).with_chains(3);
        let s1 = hit_and_run_batch(&p, 500, &cfg).unwrap();
        let s2 = hit_and_run_batch(&p, 500, &cfg).unwrap();
        assert_eq!(s1.len(), 500);
        assert_eq!(s1, s2);
        for q in &s1 {
            assert!(p.contains(q));
        }
    }

    #[test]
    fn empty_batch() {
        let p = unit_box2();
        let cfg = SamplerConfig::new(v(&[0.0, 0.0]), 7);
        assert!(hit_and_run_batch(&p, 0, &cfg).unwrap().is_empty());
    }

    #[test]
    fn start_on_boundary_rejected() {
        let p = unit_box2();
        let cfg = SamplerConfig::new(v(&[1.0, 0.0]), 7);
        assert!(matches!(
            hit_and_run_batch(&p, 10, &cfg),
            Err(SamplingError::StartNotInterior)
        ));
    }

    #[test]
    fn mean_converges_to_box_center() {
        let lo = v(&[-1.0, -1.0, -1.0]);
        let hi = v(&[1.0, 1.0, 1.0]);
        let p = HPolytope::axis_box(&lo, &hi).unwrap();
        let cfg = SamplerConfig::new(v(&[0.0, 0.0, 0.0]), 11)
            .with_mixing_steps(50)
            .with_chains(4);
        let samples = hit_and_run_batch(&p, 10_000, &cfg).unwrap();
        let mut mean = DVector::<f64>::zeros(3);
        for q in &samples {
            mean += q;
        }
        mean /= samples.len() as f64;
        assert!(mean.amax() <= 0.05, "mean {mean} drifted from center");
    }
}
