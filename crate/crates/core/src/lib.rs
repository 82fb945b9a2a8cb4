//! Adaptive strategies for scenario submodular cover.

pub mod adaptive;
pub mod bench;
pub mod budgeted;
pub mod error;
pub mod generate;
pub mod instance_file;
pub mod minsum;
pub mod mixed;
pub mod model;
pub mod oracle;
pub mod par;
pub mod rational;
pub mod strategy;
pub mod utility;

pub use error::{Error, Result};
