//! Mixed-type Cartesian Genetic Programming for controllers that map pixel
//! observations to discrete actions.
//!
//! * [`value`]: scalar/matrix values and their normalization rules
//! * [`functions`]: the 53-function node set
//! * [`graph`]: genomes, decoding, active-node tracing, stepwise evaluation
//! * [`evolution`]: 1+λ evolution and episode-based fitness
//! * [`env`]: environment trait, frame skipping, the Catch toy game
//! * [`ale`]: client for an external Atari emulator process
//! * [`persist`], [`dot`], [`cli`]: file formats, graph export, commands

pub mod ale;
pub mod cli;
pub mod dot;
pub mod env;
pub mod error;
pub mod evolution;
pub mod functions;
pub mod graph;
pub mod persist;
pub mod value;

pub use error::{CgpError, EnvError};
pub use functions::Function;
pub use graph::{Genome, Program};
pub use value::{Matrix, Value};
