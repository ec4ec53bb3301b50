//! Region files: the generated polytope with its ellipsoid, the options
//! that produced it, and the audit trail. Round-trips losslessly through
//! JSON; membership is recomputable from `a` and `b` alone.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use cfree_core::geometry::{Ellipsoid, HPolytope};
use cfree_core::iris::{CandidateGenerator, IrisOptions, RegionReport};
use cfree_core::stattest::Verdict;

use crate::CmdError;

pub const REGION_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionFile {
    pub version: u32,
    pub tool_version: String,
    /// Master seed of the invocation; this run used the stream derived
    /// from it with `seed_index`.
    pub rng_seed: u64,
    pub seed_index: usize,
    pub dim: usize,
    /// Face normals, row-major (one row per face).
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub ellipsoid: EllipsoidJson,
    pub seed_point: Vec<f64>,
    pub options: OptionsJson,
    pub report: ReportJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidJson {
    /// Shape matrix, row-major.
    pub e: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionsJson {
    pub epsilon: f64,
    pub delta: f64,
    pub tau: f64,
    pub stepback: f64,
    pub particles: usize,
    pub bisections: usize,
    pub max_faces_per_iter: usize,
    pub max_inner_iterations: usize,
    pub max_outer_iterations: usize,
    pub termination_threshold: f64,
    pub r_start: f64,
    pub candidate_generator: String,
    pub mixing_steps: Option<usize>,
    pub chains: usize,
    pub mvie_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub termination_reason: String,
    pub certified: bool,
    pub outer_iterations: usize,
    pub samples_drawn: usize,
    pub collisions_found: usize,
    pub hyperplanes_added: usize,
    pub iterations: Vec<OuterJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterJson {
    pub outer: usize,
    pub hyperplanes_added: usize,
    pub mvie_log_volume_proxy: Option<f64>,
    pub mvie_converged: Option<bool>,
    pub inner: Vec<InnerJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerJson {
    pub k: usize,
    pub delta: f64,
    pub m: usize,
    pub batch: usize,
    pub collisions_in_first_m: usize,
    pub collisions_in_batch: usize,
    pub verdict: String,
    pub planes_added: usize,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn options_to_json(opts: &IrisOptions<f64>) -> OptionsJson {
    OptionsJson {
        epsilon: opts.epsilon,
        delta: opts.delta,
        tau: opts.tau,
        stepback: opts.stepback,
        particles: opts.particles,
        bisections: opts.bisections,
        max_faces_per_iter: opts.max_faces_per_iter,
        max_inner_iterations: opts.max_inner_iterations,
        max_outer_iterations: opts.max_outer_iterations,
        termination_threshold: opts.termination_threshold,
        r_start: opts.r_start,
        candidate_generator: opts.candidate_generator.name().to_string(),
        mixing_steps: opts.mixing_steps,
        chains: opts.chains,
        mvie_tol: opts.mvie_tol,
    }
}

pub fn generator_from_name(name: &str) -> Result<CandidateGenerator, CmdError> {
    match name {
        "bisection" => Ok(CandidateGenerator::Bisection),
        "ray" => Ok(CandidateGenerator::Ray),
        "greedy" => Ok(CandidateGenerator::Greedy),
        other => Err(CmdError::input(format!(
            "unknown candidate generator {other:?}"
        ))),
    }
}

impl RegionFile {
    pub fn from_report(
        report: &RegionReport<f64>,
        opts: &IrisOptions<f64>,
        master_seed: u64,
        seed_index: usize,
    ) -> Self {
        Self {
            version: REGION_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_seed: master_seed,
            seed_index,
            dim: report.polytope.dim(),
            a: matrix_rows(report.polytope.a()),
            b: report.polytope.b().iter().copied().collect(),
            ellipsoid: EllipsoidJson {
                e: matrix_rows(report.final_ellipsoid.shape()),
                c: report.final_ellipsoid.center().iter().copied().collect(),
            },
            seed_point: report.seed.iter().copied().collect(),
            options: options_to_json(opts),
            report: ReportJson {
                termination_reason: report.termination_reason.name().to_string(),
                certified: report.certified,
                outer_iterations: report.outer_iterations,
                samples_drawn: report.samples_drawn,
                collisions_found: report.collisions_found,
                hyperplanes_added: report.hyperplanes_added,
                iterations: report
                    .iterations
                    .iter()
                    .map(|o| OuterJson {
                        outer: o.index,
                        hyperplanes_added: o.hyperplanes_added,
                        mvie_log_volume_proxy: o.mvie_log_volume_proxy,
                        mvie_converged: o.mvie_converged,
                        inner: o
                            .inner
                            .iter()
                            .map(|l| InnerJson {
                                k: l.k,
                                delta: l.delta,
                                m: l.m,
                                batch: l.batch,
                                collisions_in_first_m: l.collisions_in_first_m,
                                collisions_in_batch: l.collisions_in_batch,
                                verdict: match l.verdict {
                                    Verdict::Accept => "accept".to_string(),
                                    Verdict::Reject => "reject".to_string(),
                                },
                                planes_added: l.planes_added,
                            })
                            .collect(),
                    })
                    .collect(),
            },
        }
    }

    pub fn polytope(&self) -> Result<HPolytope<f64>, CmdError> {
        let rows = self.a.len();
        if rows == 0 || self.a[0].len() != self.dim {
            return Err(CmdError::input("region file has a malformed face matrix"));
        }
        let flat: Vec<f64> = self.a.iter().flatten().copied().collect();
        HPolytope::new(
            DMatrix::from_row_slice(rows, self.dim, &flat),
            DVector::from_row_slice(&self.b),
        )
        .map_err(|e| CmdError::input(format!("region polytope invalid: {e}")))
    }

    pub fn ellipsoid(&self) -> Result<Ellipsoid<f64>, CmdError> {
        let flat: Vec<f64> = self.ellipsoid.e.iter().flatten().copied().collect();
        Ellipsoid::new(
            DMatrix::from_row_slice(self.dim, self.dim, &flat),
            DVector::from_row_slice(&self.ellipsoid.c),
        )
        .map_err(|e| CmdError::input(format!("region ellipsoid invalid: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<(), CmdError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CmdError::Runtime(anyhow::anyhow!("serializing region: {e}")))?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CmdError::Runtime(anyhow::anyhow!("writing {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, CmdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CmdError::input(format!("cannot read region {}: {e}", path.display())))?;
        let region: RegionFile = serde_json::from_str(&text)
            .map_err(|e| CmdError::input(format!("cannot parse region {}: {e}", path.display())))?;
        if region.version != REGION_VERSION {
            return Err(CmdError::input(format!(
                "unsupported region version {} (expected {REGION_VERSION})",
                region.version
            )));
        }
        Ok(region)
    }
}
