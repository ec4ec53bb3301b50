use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cfree_cli::commands::{cmd_bench, cmd_grow, cmd_plot, cmd_verify};
use cfree_cli::CmdError;
use cfree_core::iris::{CandidateGenerator, IrisOptions};

#[derive(Parser)]
#[command(
    name = "cfree",
    version,
    about = "Grow convex regions in configuration space with a probabilistic bound on the fraction in collision"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grow one region per scene seed and write region JSON files.
    Grow {
        /// Scene JSON file.
        scene: PathBuf,
        /// Output directory for region files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        flags: GrowFlags,
    },
    /// Estimate the collision fraction of a stored region.
    Verify {
        /// Region JSON file.
        region: PathBuf,
        /// Scene JSON file the region was grown in.
        scene: PathBuf,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long = "rng-seed", default_value_t = 0)]
        rng_seed: u64,
    },
    /// Render 2D scenes and regions to SVG.
    Plot {
        /// Region JSON files to overlay.
        #[arg(required = true)]
        regions: Vec<PathBuf>,
        /// Scene JSON file.
        #[arg(long)]
        scene: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Obstacle raster resolution (cells per axis).
        #[arg(long, default_value_t = 400)]
        raster: usize,
    },
    /// Repeated-trial statistics over every scene in a directory.
    Bench {
        /// Directory of scene JSON files.
        scene_dir: PathBuf,
        /// Trials per seed (distinct derived RNG streams).
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Monte Carlo samples for the per-trial verification.
        #[arg(long = "verify-samples", default_value_t = 10_000)]
        verify_samples: usize,
        /// Write the machine-readable summary to this JSON file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: GrowFlags,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GeneratorArg {
    Bisection,
    Ray,
    Greedy,
}

#[derive(Args)]
struct GrowFlags {
    /// Admissible fraction of the region in collision.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Maximum admissible uncertainty of the guarantee.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Statistical test margin.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Hyperplane stepback distance.
    #[arg(long, default_value_t = 0.01)]
    stepback: f64,
    /// Collision samples refined into candidates per inner iteration.
    #[arg(long, default_value_t = 64)]
    particles: usize,
    /// Bisection steps per candidate.
    #[arg(long, default_value_t = 20)]
    bisections: usize,
    /// Maximum hyperplanes added per inner iteration.
    #[arg(long = "max-faces", default_value_t = 10)]
    max_faces: usize,
    /// Inner-iteration budget of one separating-planes call.
    #[arg(long = "max-inner", default_value_t = 20)]
    max_inner: usize,
    /// Outer alternation budget.
    #[arg(long = "max-outer", default_value_t = 10)]
    max_outer: usize,
    /// Relative inscribed-volume growth below which alternation stops.
    #[arg(long = "term-threshold", default_value_t = 0.02)]
    term_threshold: f64,
    /// Radius of the initial seed ball.
    #[arg(long = "r-start", default_value_t = 1e-3)]
    r_start: f64,
    /// Candidate generator for hyperplane anchors.
    #[arg(long, value_enum, default_value_t = GeneratorArg::Bisection)]
    generator: GeneratorArg,
    /// Hit-and-run steps between samples (default 50 per dimension).
    #[arg(long = "mixing-steps")]
    mixing_steps: Option<usize>,
    /// Hit-and-run chains per batch.
    #[arg(long, default_value_t = 4)]
    chains: usize,
    /// Master RNG seed.
    #[arg(long = "rng-seed", default_value_t = 0)]
    rng_seed: u64,
}

impl GrowFlags {
    fn to_options(&self) -> IrisOptions<f64> {
        let mut opts = IrisOptions::new(self.epsilon, self.delta);
        opts.tau = self.tau;
        opts.stepback = self.stepback;
        opts.particles = self.particles;
        opts.bisections = self.bisections;
        opts.max_faces_per_iter = self.max_faces;
        opts.max_inner_iterations = self.max_inner;
        opts.max_outer_iterations = self.max_outer;
        opts.termination_threshold = self.term_threshold;
        opts.r_start = self.r_start;
        opts.candidate_generator = match self.generator {
            GeneratorArg::Bisection => CandidateGenerator::Bisection,
            GeneratorArg::Ray => CandidateGenerator::Ray,
            GeneratorArg::Greedy => CandidateGenerator::Greedy,
        };
        opts.mixing_steps = self.mixing_steps;
        opts.chains = self.chains;
        opts.rng_seed = self.rng_seed;
        opts
    }
}

fn run() -> Result<i32, CmdError> {
    // CFREE_THREADS caps the rayon worker count for every parallel stage.
    if let Ok(threads) = std::env::var("CFREE_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| CmdError::input(format!("CFREE_THREADS={threads} is not a number")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CmdError::Runtime(anyhow::anyhow!("thread pool: {e}")))?;
    }
    match Cli::parse().command {
        Command::Grow { scene, out, flags } => cmd_grow(&scene, &flags.to_options(), &out),
        Command::Verify {
            region,
            scene,
            samples,
            rng_seed,
        } => cmd_verify(&region, &scene, samples, rng_seed),
        Command::Plot {
            regions,
            scene,
            out,
            raster,
        } => cmd_plot(&regions, &scene, &out, raster),
        Command::Bench {
            scene_dir,
            trials,
            verify_samples,
            out,
            flags,
        } => cmd_bench(
            &scene_dir,
            &flags.to_options(),
            trials,
            verify_samples,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
