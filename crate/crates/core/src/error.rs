use thiserror::Error;

use crate::ale::BridgeError;

#[derive(Debug, Error)]
pub enum CgpError {
    #[error("genome has {actual} genes, expected {expected}")]
    GeneCount { expected: usize, actual: usize },
    #[error("gene {index} = {value} is outside [0, 1)")]
    GeneRange { index: usize, value: f64 },
    #[error("invalid genome structure: {0}")]
    Structure(String),
    #[error("program expects {expected} inputs, got {actual}")]
    InputCount { expected: usize, actual: usize },
    #[error("program has {outputs} outputs but the environment has {actions} actions")]
    ActionCount { outputs: usize, actions: usize },
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called after the episode ended")]
    StepAfterDone,
    #[error("step called before reset")]
    NotReset,
    #[error("action {action} out of range for {n_actions} actions")]
    InvalidAction { action: usize, n_actions: usize },
    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),
    #[error("environment `{0}` needs the `ale_server` and `rom_dir` settings")]
    MissingBridgeConfig(String),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
}

pub type Result<T, E = CgpError> = std::result::Result<T, E>;
