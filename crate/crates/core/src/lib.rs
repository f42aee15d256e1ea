pub mod cli;
pub mod derive;
pub mod error;
pub mod estimation;
pub mod graph;
pub mod interferometer;
pub mod linalg;
pub mod oracle;
pub mod overlap;
pub mod pauli;
pub mod report;
pub mod state;
pub mod statefile;
pub mod sweep;

pub use error::{Error, Result};
