//! Command-line front end: scene and region file formats, 2D SVG
//! rendering, and the grow/verify/plot/bench commands.

pub mod commands;
pub mod plot;
pub mod region;
pub mod scene;

/// Command failure with its exit-code class: 2 for input problems (parse
/// or validation), 3 for a seed in collision, 1 for runtime failures.
#[derive(Debug)]
pub enum CmdError {
    Input(String),
    SeedInCollision { index: usize },
    Runtime(anyhow::Error),
}

impl CmdError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::SeedInCollision { .. } => 3,
            Self::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Input(msg) => write!(f, "{msg}"),
            Self::SeedInCollision { index } => write!(f, "seed {index} is in collision"),
            Self::Runtime(err) => write!(f, "{err}"),
        }
    }
}

impl std::error::Error for CmdError {}
