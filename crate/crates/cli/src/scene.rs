//! Scene files: JSON description of a collision world, a bounded domain,
//! and the seed configurations to grow regions from.

use std::path::Path;

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use cfree_core::collision::{
    CollisionWorld, ConvexObstacle, PlanarArmWorld, PointRobotWorld, TaskObstacle,
};
use cfree_core::geometry::HPolytope;

use crate::CmdError;

pub const SCENE_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneFile {
    pub version: u32,
    pub world: WorldSpec,
    /// Optional for planar-arm scenes, where the joint-limit box is the
    /// natural domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    pub seeds: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WorldSpec {
    PointRobot {
        dim: usize,
        obstacles: Vec<ObstacleSpec>,
    },
    PlanarArm {
        link_lengths: Vec<f64>,
        link_radius: f64,
        obstacles: Vec<TaskObstacleSpec>,
        joint_limits: Vec<[f64; 2]>,
        #[serde(default)]
        self_collision: bool,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObstacleSpec {
    Disk { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Polygon { vertices: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TaskObstacleSpec {
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Hpoly { a: Vec<Vec<f64>>, b: Vec<f64> },
}

/// Either built-in world, behind one dispatch enum.
#[derive(Clone, Debug)]
pub enum WorldKind {
    PointRobot(PointRobotWorld<f64>),
    PlanarArm(PlanarArmWorld<f64>),
}

impl CollisionWorld<f64> for WorldKind {
    fn dim(&self) -> usize {
        match self {
            Self::PointRobot(w) => w.dim(),
            Self::PlanarArm(w) => w.dim(),
        }
    }

    fn check(&self, q: &DVector<f64>) -> bool {
        match self {
            Self::PointRobot(w) => w.check(q),
            Self::PlanarArm(w) => w.check(q),
        }
    }

    fn pair_names(&self) -> Vec<String> {
        match self {
            Self::PointRobot(w) => w.pair_names(),
            Self::PlanarArm(w) => w.pair_names(),
        }
    }
}

impl WorldKind {
    /// Obstacles of a point-robot world (the convex-baseline input).
    pub fn point_obstacles(&self) -> Option<&[ConvexObstacle<f64>]> {
        match self {
            Self::PointRobot(w) => Some(w.obstacles()),
            Self::PlanarArm(_) => None,
        }
    }
}

/// A parsed and validated scene.
#[derive(Clone, Debug)]
pub struct LoadedScene {
    pub world: WorldKind,
    pub domain: HPolytope<f64>,
    pub seeds: Vec<DVector<f64>>,
}

fn vec_to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

fn build_obstacle(spec: &ObstacleSpec) -> ConvexObstacle<f64> {
    match spec {
        ObstacleSpec::Disk { center, radius } => ConvexObstacle::Ball {
            center: vec_to_dvector(center),
            radius: *radius,
        },
        ObstacleSpec::Box { lo, hi } => ConvexObstacle::AxisBox {
            lo: vec_to_dvector(lo),
            hi: vec_to_dvector(hi),
        },
        ObstacleSpec::Polygon { vertices } => ConvexObstacle::Polygon {
            vertices: vertices.iter().map(|v| vec_to_dvector(v)).collect(),
        },
    }
}

fn build_domain(spec: &DomainSpec) -> Result<HPolytope<f64>, CmdError> {
    let p = match spec {
        DomainSpec::Box { lo, hi } => HPolytope::axis_box(&vec_to_dvector(lo), &vec_to_dvector(hi))
            .map_err(|e| CmdError::input(format!("bad domain box: {e}")))?,
        DomainSpec::Hpoly { a, b } => {
            let rows = a.len();
            if rows == 0 {
                return Err(CmdError::input("domain polytope needs at least one face"));
            }
            let cols = a[0].len();
            if a.iter().any(|row| row.len() != cols) {
                return Err(CmdError::input("domain matrix rows have differing lengths"));
            }
            let flat: Vec<f64> = a.iter().flatten().copied().collect();
            HPolytope::new(
                DMatrix::from_row_slice(rows, cols, &flat),
                DVector::from_row_slice(b),
            )
            .map_err(|e| CmdError::input(format!("bad domain polytope: {e}")))?
        }
    };
    if !p.is_axis_bounded() {
        return Err(CmdError::input("domain polytope is not bounded"));
    }
    Ok(p)
}

impl SceneFile {
    pub fn load(path: &Path) -> Result<Self, CmdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CmdError::input(format!("cannot read scene {}: {e}", path.display())))?;
        let scene: SceneFile = serde_json::from_str(&text)
            .map_err(|e| CmdError::input(format!("cannot parse scene {}: {e}", path.display())))?;
        if scene.version != SCENE_VERSION {
            return Err(CmdError::input(format!(
                "unsupported scene version {} (expected {SCENE_VERSION})",
                scene.version
            )));
        }
        Ok(scene)
    }

    /// Builds the world and domain and validates every seed: matching
    /// dimension, strictly inside the domain, collision-free.
    pub fn realize(&self) -> Result<LoadedScene, CmdError> {
        let world = match &self.world {
            WorldSpec::PointRobot { dim, obstacles } => {
                let obs: Vec<ConvexObstacle<f64>> = obstacles.iter().map(build_obstacle).collect();
                WorldKind::PointRobot(
                    PointRobotWorld::new(*dim, obs)
                        .map_err(|e| CmdError::input(format!("bad point-robot world: {e}")))?,
                )
            }
            WorldSpec::PlanarArm {
                link_lengths,
                link_radius,
                obstacles,
                joint_limits,
                self_collision,
            } => {
                let obs: Vec<TaskObstacle<f64>> = obstacles
                    .iter()
                    .map(|o| match o {
                        TaskObstacleSpec::Disk { center, radius } => TaskObstacle::Disk {
                            center: Vector2::new(center[0], center[1]),
                            radius: *radius,
                        },
                        TaskObstacleSpec::Polygon { vertices } => TaskObstacle::Polygon {
                            vertices: vertices.iter().map(|v| Vector2::new(v[0], v[1])).collect(),
                        },
                    })
                    .collect();
                let limits: Vec<(f64, f64)> = joint_limits.iter().map(|l| (l[0], l[1])).collect();
                WorldKind::PlanarArm(
                    PlanarArmWorld::new(
                        link_lengths.clone(),
                        *link_radius,
                        obs,
                        limits,
                        *self_collision,
                    )
                    .map_err(|e| CmdError::input(format!("bad planar-arm world: {e}")))?,
                )
            }
        };

        let domain = match (&self.domain, &world) {
            (Some(spec), _) => build_domain(spec)?,
            (None, WorldKind::PlanarArm(arm)) => arm.joint_limit_box(),
            (None, WorldKind::PointRobot(_)) => {
                return Err(CmdError::input("point-robot scenes require a domain"));
            }
        };
        if domain.dim() != world.dim() {
            return Err(CmdError::input(format!(
                "domain dimension {} does not match world dimension {}",
                domain.dim(),
                world.dim()
            )));
        }

        let mut seeds = Vec::with_capacity(self.seeds.len());
        for (index, raw) in self.seeds.iter().enumerate() {
            let seed = vec_to_dvector(raw);
            if seed.len() != domain.dim() {
                return Err(CmdError::input(format!(
                    "seed {index} has dimension {} (domain is {})",
                    seed.len(),
                    domain.dim()
                )));
            }
            if domain.slacks(&seed).min() <= 0.0 {
                return Err(CmdError::input(format!(
                    "seed {index} is not strictly inside the domain"
                )));
            }
            if world.check(&seed) {
                return Err(CmdError::SeedInCollision { index });
            }
            seeds.push(seed);
        }
        if seeds.is_empty() {
            return Err(CmdError::input("scene has no seeds"));
        }
        Ok(LoadedScene {
            world,
            domain,
            seeds,
        })
    }
}
