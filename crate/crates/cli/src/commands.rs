//! The four subcommands: grow, verify, plot, bench.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use cfree_core::collision::fraction_in_collision;
use cfree_core::iris::{iris_grow, IrisOptions, TerminationReason};
use cfree_core::mvie::ellipsoid_volume_proxy;
use cfree_core::real::derive_seed;
use cfree_core::sampling::SamplerConfig;

use crate::plot::render_svg;
use crate::region::RegionFile;
use crate::scene::SceneFile;
use crate::CmdError;

/// Grows one region per scene seed and writes `region_<idx>.json` files
/// into `out_dir`. Returns exit code 0 when every run terminated with
/// reason `accepted`, 1 otherwise.
pub fn cmd_grow(
    scene_path: &Path,
    opts: &IrisOptions<f64>,
    out_dir: &Path,
) -> Result<i32, CmdError> {
    let scene = SceneFile::load(scene_path)?.realize()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CmdError::Runtime(anyhow::anyhow!("creating {}: {e}", out_dir.display())))?;
    let master_seed = opts.rng_seed;
    let mut all_accepted = true;
    for (index, seed) in scene.seeds.iter().enumerate() {
        let mut run_opts = opts.clone();
        run_opts.rng_seed = derive_seed(master_seed, index as u64);
        let report = iris_grow(&scene.domain, seed, &scene.world, &run_opts)
            .map_err(|e| CmdError::Runtime(anyhow::anyhow!("growing seed {index}: {e}")))?;
        let reason = report.termination_reason;
        if reason != TerminationReason::Accepted {
            all_accepted = false;
        }
        let file = RegionFile::from_report(&report, &run_opts, master_seed, index);
        let path = out_dir.join(format!("region_{index:03}.json"));
        file.save(&path)?;
        println!(
            "seed {index}: {} after {} outer iteration(s), {} faces, certified={}, wrote {}",
            reason.name(),
            report.outer_iterations,
            report.polytope.num_faces(),
            report.certified,
            path.display()
        );
    }
    Ok(if all_accepted { 0 } else { 1 })
}

/// Estimates the collision fraction of a stored region against a scene
/// with `samples` hit-and-run draws. Exit 0 iff
/// `estimate - half_width <= epsilon` recorded in the region file.
pub fn cmd_verify(
    region_path: &Path,
    scene_path: &Path,
    samples: usize,
    rng_seed: u64,
) -> Result<i32, CmdError> {
    let region = RegionFile::load(region_path)?;
    let scene = SceneFile::load(scene_path)?.realize()?;
    if region.dim != scene.domain.dim() {
        return Err(CmdError::input(format!(
            "region dimension {} does not match scene dimension {}",
            region.dim,
            scene.domain.dim()
        )));
    }
    let polytope = region.polytope()?;
    let ellipsoid = region.ellipsoid()?;
    let cfg = SamplerConfig::new(ellipsoid.center().clone(), rng_seed).with_chains(8);
    let est = fraction_in_collision(&scene.world, &polytope, samples, &cfg)
        .map_err(|e| CmdError::Runtime(anyhow::anyhow!("sampling region: {e}")))?;
    let proxy = ellipsoid_volume_proxy(&ellipsoid);
    println!(
        "fraction_in_collision = {:.6} +- {:.6} ({} samples)",
        est.mean, est.half_width, est.samples
    );
    println!("mvie_log_volume_proxy = {proxy:.6}");
    println!("faces = {}", polytope.num_faces());
    let ok = est.mean - est.half_width <= region.options.epsilon;
    println!(
        "epsilon = {} -> {}",
        region.options.epsilon,
        if ok { "PASS" } else { "FAIL" }
    );
    Ok(if ok { 0 } else { 1 })
}

/// Renders regions over their scene into an SVG file. 2D only.
pub fn cmd_plot(
    region_paths: &[PathBuf],
    scene_path: &Path,
    out_path: &Path,
    resolution: usize,
) -> Result<i32, CmdError> {
    let scene = SceneFile::load(scene_path)?.realize()?;
    if scene.domain.dim() != 2 {
        return Err(CmdError::input(format!(
            "plotting requires a 2-dimensional configuration space, scene has {}",
            scene.domain.dim()
        )));
    }
    let mut regions = Vec::new();
    for path in region_paths {
        let region = RegionFile::load(path)?;
        if region.dim != 2 {
            return Err(CmdError::input(format!(
                "region {} has dimension {}, expected 2",
                path.display(),
                region.dim
            )));
        }
        regions.push((
            region.polytope()?,
            region.ellipsoid()?,
            DVector::from_row_slice(&region.seed_point),
        ));
    }
    let svg = render_svg(&scene.world, &scene.domain, &regions, resolution)?;
    std::fs::write(out_path, svg)
        .map_err(|e| CmdError::Runtime(anyhow::anyhow!("writing {}: {e}", out_path.display())))?;
    println!("wrote {}", out_path.display());
    Ok(0)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub scene: String,
    pub seed_index: usize,
    pub trials: usize,
    pub mean_runtime_s: f64,
    pub std_runtime_s: f64,
    pub mean_faces: f64,
    pub std_faces: f64,
    pub mean_log_volume_proxy: f64,
    pub std_log_volume_proxy: f64,
    pub mean_collision_fraction: f64,
    pub accepted_rate: f64,
    /// Fraction of trials whose verified collision fraction exceeded
    /// epsilon: the delta-guarantee audit.
    pub guarantee_violations: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchSummary {
    pub trials_per_seed: usize,
    pub verify_samples: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub rows: Vec<BenchRow>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Repeated-trial benchmark over every scene in a directory: `trials`
/// runs per seed with derived RNG streams, each verified against the
/// Monte Carlo oracle.
pub fn cmd_bench(
    scene_dir: &Path,
    opts: &IrisOptions<f64>,
    trials: usize,
    verify_samples: usize,
    out_path: Option<&Path>,
) -> Result<i32, CmdError> {
    let mut scene_paths: Vec<PathBuf> = std::fs::read_dir(scene_dir)
        .map_err(|e| CmdError::input(format!("cannot read {}: {e}", scene_dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    scene_paths.sort();
    if scene_paths.is_empty() {
        return Err(CmdError::input(format!(
            "no scene files in {}",
            scene_dir.display()
        )));
    }
    if trials == 0 {
        return Err(CmdError::input("--trials must be at least 1"));
    }

    let mut rows = Vec::new();
    for scene_path in &scene_paths {
        let scene_name = scene_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| scene_path.display().to_string());
        let scene = SceneFile::load(scene_path)?.realize()?;
        for (seed_index, seed) in scene.seeds.iter().enumerate() {
            struct Trial {
                runtime_s: f64,
                faces: f64,
                proxy: f64,
                fraction: f64,
                accepted: bool,
            }
            let results: Result<Vec<Trial>, CmdError> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut run_opts = opts.clone();
                    run_opts.rng_seed =
                        derive_seed(derive_seed(opts.rng_seed, seed_index as u64), trial as u64);
                    let start = std::time::Instant::now();
                    let report =
                        iris_grow(&scene.domain, seed, &scene.world, &run_opts).map_err(|e| {
                            CmdError::Runtime(anyhow::anyhow!(
                                "bench {scene_name} seed {seed_index} trial {trial}: {e}"
                            ))
                        })?;
                    let runtime_s = start.elapsed().as_secs_f64();
                    let cfg = SamplerConfig::new(
                        report.final_ellipsoid.center().clone(),
                        derive_seed(run_opts.rng_seed, 0xBE9C),
                    )
                    .with_chains(8);
                    let est =
                        fraction_in_collision(&scene.world, &report.polytope, verify_samples, &cfg)
                            .map_err(|e| {
                                CmdError::Runtime(anyhow::anyhow!("verifying trial: {e}"))
                            })?;
                    Ok(Trial {
                        runtime_s,
                        faces: report.polytope.num_faces() as f64,
                        proxy: ellipsoid_volume_proxy(&report.final_ellipsoid),
                        fraction: est.mean,
                        accepted: report.termination_reason == TerminationReason::Accepted,
                    })
                })
                .collect();
            let results = results?;
            let (mean_runtime_s, std_runtime_s) =
                mean_std(&results.iter().map(|t| t.runtime_s).collect::<Vec<_>>());
            let (mean_faces, std_faces) =
                mean_std(&results.iter().map(|t| t.faces).collect::<Vec<_>>());
            let (mean_proxy, std_proxy) =
                mean_std(&results.iter().map(|t| t.proxy).collect::<Vec<_>>());
            let (mean_fraction, _) =
                mean_std(&results.iter().map(|t| t.fraction).collect::<Vec<_>>());
            let violations =
                results.iter().filter(|t| t.fraction > opts.epsilon).count() as f64 / trials as f64;
            let accepted_rate =
                results.iter().filter(|t| t.accepted).count() as f64 / trials as f64;
            rows.push(BenchRow {
                scene: scene_name.clone(),
                seed_index,
                trials,
                mean_runtime_s,
                std_runtime_s,
                mean_faces,
                std_faces,
                mean_log_volume_proxy: mean_proxy,
                std_log_volume_proxy: std_proxy,
                mean_collision_fraction: mean_fraction,
                accepted_rate,
                guarantee_violations: violations,
            });
        }
    }

    println!(
        "{:<24} {:>4} {:>7} {:>11} {:>9} {:>11} {:>10} {:>9} {:>10}",
        "scene",
        "seed",
        "trials",
        "runtime[s]",
        "faces",
        "log-volume",
        "coll-frac",
        "accepted",
        "violations"
    );
    for r in &rows {
        println!(
            "{:<24} {:>4} {:>7} {:>5.3}+-{:<5.3} {:>4.1}+-{:<4.1} {:>5.2}+-{:<4.2} {:>10.4} {:>9.2} {:>10.2}",
            r.scene,
            r.seed_index,
            r.trials,
            r.mean_runtime_s,
            r.std_runtime_s,
            r.mean_faces,
            r.std_faces,
            r.mean_log_volume_proxy,
            r.std_log_volume_proxy,
            r.mean_collision_fraction,
            r.accepted_rate,
            r.guarantee_violations
        );
    }

    let summary = BenchSummary {
        trials_per_seed: trials,
        verify_samples,
        epsilon: opts.epsilon,
        delta: opts.delta,
        rows,
    };
    if let Some(path) = out_path {
        let mut text = serde_json::to_string_pretty(&summary)
            .map_err(|e| CmdError::Runtime(anyhow::anyhow!("serializing summary: {e}")))?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CmdError::Runtime(anyhow::anyhow!("writing {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}
