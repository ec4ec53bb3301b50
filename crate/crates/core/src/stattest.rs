//! Sequential statistical machinery for the termination test: Chernoff
//! sample counts, the fixed-sample Bernoulli accept/reject test, and the
//! union-bound uncertainty schedules over inner and outer iterations.
//!
//! The test controls false accepts: if the true collision fraction of a
//! polytope is at least `epsilon`, the test run with `M` samples rejects
//! with probability at least `1 - delta_k`. Spreading `delta` over the
//! schedules keeps the total false-accept probability below `delta` no
//! matter how many tests the algorithm runs.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error)]
pub enum StatError {
    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("iteration index must be at least 1")]
    ZeroIndex,
    #[error("flag list of length {len} shorter than sample count {m}")]
    NotEnoughFlags { len: usize, m: usize },
    #[error("sample count must be at least 1")]
    ZeroSampleCount,
}

fn check_open_unit<S: Real>(name: &'static str, value: S) -> Result<(), StatError> {
    if value <= S::zero() || value >= S::one() {
        return Err(StatError::OutOfRange {
            name,
            value: value.as_f64(),
            range: "(0, 1)",
        });
    }
    Ok(())
}

/// Test parameters: admissible fraction in collision `epsilon`, maximum
/// admissible uncertainty `delta`, and test margin `tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestSpec<S: Real> {
    epsilon: S,
    delta: S,
    tau: S,
}

impl<S: Real> TestSpec<S> {
    /// Requires `epsilon, delta` in `(0, 1)` and `tau` in `(0, 1]`.
    pub fn new(epsilon: S, delta: S, tau: S) -> Result<Self, StatError> {
        check_open_unit("epsilon", epsilon)?;
        check_open_unit("delta", delta)?;
        if tau <= S::zero() || tau > S::one() {
            return Err(StatError::OutOfRange {
                name: "tau",
                value: tau.as_f64(),
                range: "(0, 1]",
            });
        }
        Ok(Self {
            epsilon,
            delta,
            tau,
        })
    }

    /// `tau = 0.5` balances test power against sample cost.
    pub fn with_default_tau(epsilon: S, delta: S) -> Result<Self, StatError> {
        Self::new(epsilon, delta, S::cast(0.5))
    }

    pub fn epsilon(&self) -> S {
        self.epsilon
    }

    pub fn delta(&self) -> S {
        self.delta
    }

    pub fn tau(&self) -> S {
        self.tau
    }

    /// Accept threshold `m (1 - tau) epsilon` on the collision count.
    pub fn accept_threshold(&self, m: usize) -> S {
        S::from_count(m) * (S::one() - self.tau) * self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

/// Result of one test evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestOutcome<S: Real> {
    pub verdict: Verdict,
    /// Samples consumed by the test.
    pub m: usize,
    /// Collisions among the first `m` flags.
    pub successes: usize,
    /// Accept threshold on the count, `m (1 - tau) epsilon`.
    pub threshold: S,
}

/// Number of samples for one test at per-test uncertainty `delta_k`:
/// `ceil(2 ln(1/delta_k) / (epsilon tau^2))`, at least 1.
pub fn sample_count<S: Real>(spec: &TestSpec<S>, delta_k: S) -> Result<usize, StatError> {
    check_open_unit("delta_k", delta_k)?;
    let raw = S::cast(2.0) * (S::one() / delta_k).ln() / (spec.epsilon * spec.tau * spec.tau);
    Ok((raw.ceil().as_f64() as usize).max(1))
}

/// Runs the fixed-sample test on the first `m` entries of `flags`
/// (`true` = in collision). Accepts iff the collision count is at most
/// `m (1 - tau) epsilon`; exact ties accept.
pub fn unadaptive_test<S: Real>(
    flags: &[bool],
    spec: &TestSpec<S>,
    m: usize,
) -> Result<TestOutcome<S>, StatError> {
    if m == 0 {
        return Err(StatError::ZeroSampleCount);
    }
    if flags.len() < m {
        return Err(StatError::NotEnoughFlags {
            len: flags.len(),
            m,
        });
    }
    let successes = flags[..m].iter().filter(|&&f| f).count();
    let threshold = spec.accept_threshold(m);
    // Guard so that a mathematically exact tie is never lost to rounding in
    // the threshold product.
    let guard = threshold.max(S::one()) * S::machine_epsilon() * S::cast(16.0);
    let verdict = if S::from_count(successes) <= threshold + guard {
        Verdict::Accept
    } else {
        Verdict::Reject
    };
    Ok(TestOutcome {
        verdict,
        m,
        successes,
        threshold,
    })
}

/// Per-test uncertainty for the `k`-th test when a single outer iteration
/// is run: `6 delta / (pi^2 k^2)`. Sums to `delta` over all `k`.
pub fn delta_schedule_inner<S: Real>(delta: S, k: usize) -> Result<S, StatError> {
    check_open_unit("delta", delta)?;
    if k < 1 {
        return Err(StatError::ZeroIndex);
    }
    let kf = S::from_count(k);
    Ok(S::cast(6.0) * delta / (S::pi() * S::pi() * kf * kf))
}

/// Per-test uncertainty for inner test `k` of outer iteration `i`:
/// `36 delta / (pi^4 i^2 k^2)`. Sums to `delta` over all `(i, k)`.
pub fn delta_schedule_nested<S: Real>(delta: S, i: usize, k: usize) -> Result<S, StatError> {
    check_open_unit("delta", delta)?;
    if i < 1 || k < 1 {
        return Err(StatError::ZeroIndex);
    }
    let fi = S::from_count(i);
    let fk = S::from_count(k);
    let pi2 = S::pi() * S::pi();
    Ok(S::cast(36.0) * delta / (pi2 * pi2 * fi * fi * fk * fk))
}

/// Suggested `tau_minus` for [`sample_count_two_sided`]. No principled
/// canonical value exists; 0.5 mirrors the default test margin.
pub const DEFAULT_TAU_MINUS: f64 = 0.5;

/// Two-sided sample count
/// `N = (1/p) ln(1/delta) max{ 2/tau^2, (2+tau_-)(1+tau_-) / (tau_-^2 (1-tau)) }`,
/// ceiled, at least 1. Controls the false accept (for rates >= `p`) and the
/// false reject (for rates <= `(1-tau) p / (1+tau_-)`) at level `delta`.
pub fn sample_count_two_sided<S: Real>(
    p: S,
    delta: S,
    tau: S,
    tau_minus: S,
) -> Result<usize, StatError> {
    check_open_unit("p", p)?;
    check_open_unit("delta", delta)?;
    check_open_unit("tau", tau)?;
    check_open_unit("tau_minus", tau_minus)?;
    let two = S::cast(2.0);
    let reject_branch = two / (tau * tau);
    let accept_branch =
        (two + tau_minus) * (S::one() + tau_minus) / (tau_minus * tau_minus * (S::one() - tau));
    let raw = (S::one() / p) * (S::one() / delta).ln() * reject_branch.max(accept_branch);
    Ok((raw.ceil().as_f64() as usize).max(1))
}

/// Sample count from the geometric-trial analysis,
/// `ceil(ln(1 - alpha) / ln(1 - epsilon) - 1)`, clamped at 0. Comparison
/// utility only; the algorithms use [`sample_count`].
pub fn geometric_sample_bound<S: Real>(epsilon: S, alpha: S) -> Result<usize, StatError> {
    check_open_unit("epsilon", epsilon)?;
    check_open_unit("alpha", alpha)?;
    let raw = (S::one() - alpha).ln() / (S::one() - epsilon).ln() - S::one();
    let ceiled = raw.ceil().as_f64();
    Ok(if ceiled <= 0.0 { 0 } else { ceiled as usize })
}
