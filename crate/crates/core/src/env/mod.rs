//! Episodic pixel environments.

mod catch;
mod frame_skip;

pub use catch::{Catch, CATCH_BALLS, CATCH_SIZE};
pub use frame_skip::{FrameOutcome, FrameSkip};

use crate::ale::{AleEnvironment, BridgeConfig};
use crate::error::EnvError;
use crate::value::{Matrix, Value};

/// Default cap on counted (non-skipped) frames per episode.
pub const DEFAULT_FRAME_CAP: u64 = 18_000;
/// Default frame-skip probability.
pub const DEFAULT_P_FSKIP: f64 = 0.25;

/// Red, green and blue planes with elements in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub red: Matrix,
    pub green: Matrix,
    pub blue: Matrix,
}

impl Observation {
    pub fn new(red: Matrix, green: Matrix, blue: Matrix) -> Self {
        assert!(
            red.dims() == green.dims() && red.dims() == blue.dims(),
            "observation planes must share dimensions"
        );
        Observation { red, green, blue }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.red.dims()
    }

    /// The three planes as program inputs.
    pub fn to_inputs(&self) -> [Value; 3] {
        [
            self.red.clone().into(),
            self.green.clone().into(),
            self.blue.clone().into(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
}

pub trait Environment {
    /// Size of the legal action subset.
    fn n_actions(&self) -> usize;

    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError>;

    fn step(&mut self, action: usize) -> Result<Transition, EnvError>;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn n_actions(&self) -> usize {
        (**self).n_actions()
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        (**self).reset(seed)
    }

    fn step(&mut self, action: usize) -> Result<Transition, EnvError> {
        (**self).step(action)
    }
}

/// Parsed environment name: `catch` or `ale:<rom>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnvSpec {
    Catch,
    Ale { rom: String },
}

impl EnvSpec {
    pub fn parse(name: &str) -> Result<EnvSpec, EnvError> {
        match name {
            "catch" => Ok(EnvSpec::Catch),
            _ => match name.strip_prefix("ale:") {
                Some(rom) if !rom.is_empty() => Ok(EnvSpec::Ale {
                    rom: rom.to_string(),
                }),
                _ => Err(EnvError::UnknownEnvironment(name.to_string())),
            },
        }
    }

    /// Builds a fresh environment instance. Bridge environments need the
    /// server settings.
    pub fn build(
        &self,
        bridge: Option<&BridgeConfig>,
    ) -> Result<Box<dyn Environment + Send>, EnvError> {
        match self {
            EnvSpec::Catch => Ok(Box::new(Catch::new())),
            EnvSpec::Ale { rom } => {
                let config =
                    bridge.ok_or_else(|| EnvError::MissingBridgeConfig(format!("ale:{rom}")))?;
                Ok(Box::new(AleEnvironment::connect(config, rom)?))
            }
        }
    }
}
