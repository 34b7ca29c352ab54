//! File formats, parameter handling and benchmarking around `sarseg-core`.

pub mod bench;
pub mod config;
pub mod error;
pub mod imageio;
pub mod run;

pub use error::{CliError, CliResult};
pub use run::{run_segmentation, SegmentationResult};
