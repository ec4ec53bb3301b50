//! Maximum-volume inscribed ellipsoid of a bounded H-polytope.
//!
//! Maximizes `log det B` over ellipsoids `{ B u + d : |u| <= 1 }` subject to
//! the per-face containment constraints `|B a_i| + a_i . d <= b_i`, with a
//! log-barrier interior-point method and damped Newton centering steps on
//! the parameters (`B` symmetric positive-definite, `d` the center). The
//! start point comes from a Chebyshev-style inscribed ball solved with the
//! same barrier machinery.
//!
//! The returned shape matrix is `E = B^-2`, so the ellipsoid in the
//! crate-wide convention `(x - c)^T E (x - c) <= 1` has `c = d`.

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::geometry::{Ellipsoid, GeometryError, HPolytope};
use crate::real::Real;

#[derive(Debug, Error)]
pub enum MvieError {
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope must have at least one face")]
    NoFaces,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Default relative tolerance on the volume proxy between barrier stages.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Newton-iteration budget across all barrier stages.
pub const MAX_NEWTON_ITERATIONS: usize = 200;

/// Condition-number threshold beyond which the polytope is reported as
/// degenerately thin.
pub const DEGENERATE_CONDITION: f64 = 1e10;

/// Solver result. `converged = false` flags a degenerate or
/// iteration-capped solve; the best iterate is still returned.
#[derive(Clone, Debug)]
pub struct MvieResult<S: Real> {
    pub ellipsoid: Ellipsoid<S>,
    /// `log det(E^{-1/2})`, a monotone proxy for the ellipsoid volume.
    pub log_volume_proxy: S,
    /// Newton iterations spent.
    pub iterations: usize,
    pub converged: bool,
}

/// Volume proxy of an ellipsoid, `log det(E^{-1/2}) = -0.5 log det E`.
pub fn ellipsoid_volume_proxy<S: Real>(e: &Ellipsoid<S>) -> S {
    let chol = Cholesky::new(e.shape().clone())
        .expect("ellipsoid shape validated positive-definite at construction");
    let mut acc = S::zero();
    let l = chol.l();
    for i in 0..l.nrows() {
        acc += l[(i, i)].ln();
    }
    -acc
}

/// Computes the maximum-volume inscribed ellipsoid of `p`.
///
/// `tol` is the relative volume-proxy change between barrier stages below
/// which the solve is declared converged (see [`DEFAULT_TOL`]).
pub fn inscribed_ellipsoid<S: Real>(p: &HPolytope<S>, tol: S) -> Result<MvieResult<S>, MvieError> {
    if p.num_faces() == 0 {
        return Err(MvieError::NoFaces);
    }
    let d = p.dim();
    let m = p.num_faces();

    // Unit-normal face data; offsets rescale with the rows.
    let mut normals: Vec<DVector<S>> = Vec::with_capacity(m);
    let mut offsets: Vec<S> = Vec::with_capacity(m);
    for i in 0..m {
        let row = p.a().row(i).transpose();
        let n = row.norm();
        normals.push(row / n);
        offsets.push(p.b()[i] / n);
    }
    let offset_scale = offsets.iter().fold(S::one(), |a, &b| a.max(b.abs()));

    // Solve inside a huge axis box so the barrier problem is always
    // bounded; a solution that presses against an artificial face exposes
    // an unbounded input.
    let l_box = S::cast(1e6) * (S::one() + offset_scale);
    for j in 0..d {
        for sign in [S::one(), -S::one()] {
            let mut a = DVector::zeros(d);
            a[j] = sign;
            normals.push(a);
            offsets.push(l_box);
        }
    }

    let center = chebyshev_center(&normals, &offsets, d)?;
    let min_slack = (0..m)
        .map(|i| offsets[i] - normals[i].dot(&center))
        .fold(S::cast(f64::INFINITY), |a, b| a.min(b));
    if min_slack <= S::cast(1e-12) * offset_scale {
        return Err(MvieError::EmptyInterior);
    }

    let result = solve_barrier(&normals, &offsets, center, min_slack, tol)?;
    for j in 0..d {
        let mut dir = DVector::<S>::zeros(d);
        dir[j] = S::one();
        let hi = result.ellipsoid.support(&dir);
        dir[j] = -S::one();
        let lo = result.ellipsoid.support(&dir);
        if hi.max(lo) > S::cast(0.99) * l_box {
            return Err(MvieError::Unbounded);
        }
    }
    Ok(result)
}

// Symmetric basis bookkeeping: parameter k < d(d+1)/2 maps to the matrix
// with ones at (p,q) and (q,p); diagonal entries have a single one.
fn sym_index_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(d * (d + 1) / 2);
    for p in 0..d {
        for q in p..d {
            pairs.push((p, q));
        }
    }
    pairs
}

struct FaceState<S: Real> {
    /// `B a_i`.
    u: DVector<S>,
    /// `|B a_i|`.
    r: S,
    /// `b_i - a_i . d - |B a_i|`.
    slack: S,
}

fn face_states<S: Real>(
    normals: &[DVector<S>],
    offsets: &[S],
    b_mat: &DMatrix<S>,
    center: &DVector<S>,
) -> Option<Vec<FaceState<S>>> {
    let mut states = Vec::with_capacity(normals.len());
    for (a, &b) in normals.iter().zip(offsets.iter()) {
        let u = b_mat * a;
        let r = u.norm();
        let slack = b - a.dot(center) - r;
        if slack <= S::zero() || !slack.is_finite() {
            return None;
        }
        states.push(FaceState { u, r, slack });
    }
    Some(states)
}

fn log_det_chol<S: Real>(chol: &Cholesky<S, nalgebra::Dyn>) -> S {
    let l = chol.l();
    let mut acc = S::zero();
    for i in 0..l.nrows() {
        acc += l[(i, i)].ln();
    }
    acc * S::cast(2.0)
}

/// Barrier objective `t * (-log det B) - sum log slack_i`.
fn barrier_value<S: Real>(t: S, log_det_b: S, states: &[FaceState<S>]) -> S {
    let mut val = -t * log_det_b;
    for st in states {
        val -= st.slack.ln();
    }
    val
}

fn solve_barrier<S: Real>(
    normals: &[DVector<S>],
    offsets: &[S],
    start_center: DVector<S>,
    start_radius: S,
    tol: S,
) -> Result<MvieResult<S>, MvieError> {
    let d = start_center.len();
    let pairs = sym_index_pairs(d);
    let nb = pairs.len();
    let n = nb + d;

    let mut b_mat = DMatrix::<S>::identity(d, d) * (S::cast(0.9) * start_radius);
    let mut center = start_center;
    let mut t = S::one();
    let mu = S::cast(10.0);
    let mut iterations = 0usize;
    let mut converged = false;
    let mut prev_proxy: Option<S> = None;

    'stages: for _stage in 0..64 {
        // Damped Newton centering for the current barrier weight.
        for _ in 0..50 {
            if iterations >= MAX_NEWTON_ITERATIONS {
                break 'stages;
            }
            let chol_b = match Cholesky::new(b_mat.clone()) {
                Some(c) => c,
                None => break 'stages,
            };
            let b_inv = chol_b.inverse();
            let states = match face_states(normals, offsets, &b_mat, &center) {
                Some(s) => s,
                None => break 'stages,
            };

            let mut grad = DVector::<S>::zeros(n);
            let mut hess = DMatrix::<S>::zeros(n, n);

            // -t log det B contributions.
            for (k, &(p, q)) in pairs.iter().enumerate() {
                let g = if p == q {
                    b_inv[(p, p)]
                } else {
                    b_inv[(p, q)] * S::cast(2.0)
                };
                grad[k] -= t * g;
            }
            for (k, &(p, q)) in pairs.iter().enumerate() {
                for (l, &(r, s)) in pairs.iter().enumerate().skip(k) {
                    // tr(B^-1 S_k B^-1 S_l) over the basis index pairs.
                    let mut acc = b_inv[(q, r)] * b_inv[(s, p)];
                    if r != s {
                        acc += b_inv[(q, s)] * b_inv[(r, p)];
                    }
                    if p != q {
                        acc += b_inv[(p, r)] * b_inv[(s, q)];
                        if r != s {
                            acc += b_inv[(p, s)] * b_inv[(r, q)];
                        }
                    }
                    hess[(k, l)] += t * acc;
                    if l != k {
                        hess[(l, k)] += t * acc;
                    }
                }
            }

            // Face barrier contributions.
            let mut dr = vec![S::zero(); nb];
            for (face, st) in states.iter().enumerate() {
                let a = &normals[face];
                let inv_s = S::one() / st.slack;
                let inv_s2 = inv_s * inv_s;
                let inv_r = S::one() / st.r;

                for (k, &(p, q)) in pairs.iter().enumerate() {
                    let mut v = st.u[p] * a[q];
                    if p != q {
                        v += st.u[q] * a[p];
                    }
                    dr[k] = v * inv_r;
                    grad[k] += dr[k] * inv_s;
                }
                for j in 0..d {
                    grad[nb + j] += a[j] * inv_s;
                }

                for (k, &(p, q)) in pairs.iter().enumerate() {
                    for (l, &(r, s)) in pairs.iter().enumerate().skip(k) {
                        // v_k . v_l with v_k = S_k a (sparse: at most two
                        // nonzero entries each).
                        let mut vkvl = S::zero();
                        if p == r {
                            vkvl += a[q] * a[s];
                        }
                        if p == s && r != s {
                            vkvl += a[q] * a[r];
                        }
                        if p != q {
                            if q == r {
                                vkvl += a[p] * a[s];
                            }
                            if q == s && r != s {
                                vkvl += a[p] * a[r];
                            }
                        }
                        let d2r = (vkvl - dr[k] * dr[l]) * inv_r;
                        let h = dr[k] * dr[l] * inv_s2 + d2r * inv_s;
                        hess[(k, l)] += h;
                        if l != k {
                            hess[(l, k)] += h;
                        }
                    }
                    for j in 0..d {
                        let h = dr[k] * a[j] * inv_s2;
                        hess[(k, nb + j)] += h;
                        hess[(nb + j, k)] += h;
                    }
                }
                for j in 0..d {
                    for l in j..d {
                        let h = a[j] * a[l] * inv_s2;
                        hess[(nb + j, nb + l)] += h;
                        if l != j {
                            hess[(nb + l, nb + j)] += h;
                        }
                    }
                }
            }

            let delta = match solve_newton_step(&hess, &grad) {
                Some(x) => x,
                None => break 'stages,
            };
            let decrement_sq = grad.dot(&delta);
            if decrement_sq <= S::cast(1e-11) * (S::one() + t) {
                break;
            }

            let log_det_b = log_det_chol(&chol_b);
            let f0 = barrier_value(t, log_det_b, &states);
            let g_dot_step = -decrement_sq;
            let mut alpha = S::one();
            let mut accepted = false;
            for _ in 0..60 {
                let mut b_try = b_mat.clone();
                for (k, &(p, q)) in pairs.iter().enumerate() {
                    b_try[(p, q)] -= alpha * delta[k];
                    if p != q {
                        b_try[(q, p)] -= alpha * delta[k];
                    }
                }
                let mut c_try = center.clone();
                for j in 0..d {
                    c_try[j] -= alpha * delta[nb + j];
                }
                if let Some(chol_try) = Cholesky::new(b_try.clone()) {
                    if let Some(states_try) = face_states(normals, offsets, &b_try, &c_try) {
                        let f_try = barrier_value(t, log_det_chol(&chol_try), &states_try);
                        if f_try <= f0 + S::cast(0.25) * alpha * g_dot_step {
                            b_mat = b_try;
                            center = c_try;
                            accepted = true;
                            break;
                        }
                    }
                }
                alpha *= S::cast(0.5);
            }
            iterations += 1;
            if !accepted {
                break 'stages;
            }
        }

        let chol_b = match Cholesky::new(b_mat.clone()) {
            Some(c) => c,
            None => break,
        };
        let proxy = log_det_chol(&chol_b);
        if let Some(prev) = prev_proxy {
            let change = (proxy - prev).abs() / (S::one() + prev.abs());
            if change < tol && t >= S::cast(1e6) {
                converged = true;
                break;
            }
        }
        prev_proxy = Some(proxy);
        t *= mu;
    }

    let chol_b = Cholesky::new(b_mat.clone()).ok_or(MvieError::EmptyInterior)?;
    let proxy = log_det_chol(&chol_b);
    let b_inv = chol_b.inverse();
    let e_raw = &b_inv * &b_inv;
    let e_sym = (&e_raw + e_raw.transpose()) * S::cast(0.5);
    let ellipsoid = Ellipsoid::new(e_sym, center).map_err(MvieError::Geometry)?;

    let eig = b_mat.symmetric_eigen().eigenvalues;
    let cond = eig.amax()
        / eig
            .iter()
            .fold(S::cast(f64::INFINITY), |a, &b| a.min(b.abs()));
    if cond > S::cast(DEGENERATE_CONDITION) {
        converged = false;
    }

    Ok(MvieResult {
        ellipsoid,
        log_volume_proxy: proxy,
        iterations,
        converged,
    })
}

fn solve_newton_step<S: Real>(hess: &DMatrix<S>, grad: &DVector<S>) -> Option<DVector<S>> {
    let n = hess.nrows();
    let mut ridge = S::zero();
    let scale = hess.diagonal().amax().max(S::one());
    for _ in 0..24 {
        let h = if ridge > S::zero() {
            hess + DMatrix::identity(n, n) * ridge
        } else {
            hess.clone()
        };
        if let Some(chol) = Cholesky::new(h) {
            return Some(chol.solve(grad));
        }
        ridge = if ridge == S::zero() {
            scale * S::cast(1e-12)
        } else {
            ridge * S::cast(10.0)
        };
    }
    None
}

/// Chebyshev-style center: maximizes the minimum face slack with a small
/// auxiliary barrier. Detects unbounded polytopes (radius diverges) and
/// leaves empty-interior detection to the caller via the returned center's
/// slack.
fn chebyshev_center<S: Real>(
    normals: &[DVector<S>],
    offsets: &[S],
    d: usize,
) -> Result<DVector<S>, MvieError> {
    let m = normals.len();
    let mut center = DVector::<S>::zeros(d);
    let mut radius = (0..m)
        .map(|i| offsets[i] - normals[i].dot(&center))
        .fold(S::cast(f64::INFINITY), |a, b| a.min(b))
        - S::one();

    let mut t = S::one();
    let mu = S::cast(10.0);
    for _stage in 0..24 {
        for _ in 0..50 {
            let slacks: Vec<S> = (0..m)
                .map(|i| offsets[i] - normals[i].dot(&center) - radius)
                .collect();
            if slacks.iter().any(|&s| s <= S::zero()) {
                return Err(MvieError::EmptyInterior);
            }
            let mut grad = DVector::<S>::zeros(d + 1);
            let mut hess = DMatrix::<S>::zeros(d + 1, d + 1);
            grad[d] = -t;
            for i in 0..m {
                let inv_s = S::one() / slacks[i];
                let inv_s2 = inv_s * inv_s;
                for j in 0..d {
                    grad[j] += normals[i][j] * inv_s;
                    for l in j..d {
                        let h = normals[i][j] * normals[i][l] * inv_s2;
                        hess[(j, l)] += h;
                        if l != j {
                            hess[(l, j)] += h;
                        }
                    }
                    let h = normals[i][j] * inv_s2;
                    hess[(j, d)] += h;
                    hess[(d, j)] += h;
                }
                grad[d] += inv_s;
                hess[(d, d)] += inv_s2;
            }
            let delta = match solve_newton_step(&hess, &grad) {
                Some(x) => x,
                None => break,
            };
            let decrement_sq = grad.dot(&delta);
            if decrement_sq <= S::cast(1e-12) * (S::one() + t) {
                break;
            }
            // Backtrack to keep slacks positive and descend.
            let f0 = aux_value(t, radius, &slacks);
            let mut alpha = S::one();
            let mut accepted = false;
            for _ in 0..60 {
                let mut c_try = center.clone();
                for j in 0..d {
                    c_try[j] -= alpha * delta[j];
                }
                let r_try = radius - alpha * delta[d];
                let slacks_try: Vec<S> = (0..m)
                    .map(|i| offsets[i] - normals[i].dot(&c_try) - r_try)
                    .collect();
                if slacks_try.iter().all(|&s| s > S::zero()) {
                    let f_try = aux_value(t, r_try, &slacks_try);
                    if f_try <= f0 - S::cast(0.25) * alpha * decrement_sq {
                        center = c_try;
                        radius = r_try;
                        accepted = true;
                        break;
                    }
                }
                alpha *= S::cast(0.5);
            }
            if !accepted {
                break;
            }
        }
        if radius > S::cast(1e12) {
            return Err(MvieError::Unbounded);
        }
        if S::from_count(m) / t < S::cast(1e-8) * radius.abs().max(S::one()) {
            break;
        }
        t *= mu;
    }
    Ok(center)
}

fn aux_value<S: Real>(t: S, radius: S, slacks: &[S]) -> S {
    let mut val = -t * radius;
    for &s in slacks {
        val -= s.ln();
    }
    val
}
