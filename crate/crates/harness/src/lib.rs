//! Configuration loading, experiment drivers and CSV emission for the `wbnf`
//! command-line tool.

pub mod config;
pub mod error;
pub mod experiments;

pub use config::{desk_config, load_config, parse_config, ExperimentConfig};
pub use error::HarnessError;
