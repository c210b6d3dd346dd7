pub mod error;
pub mod model;
pub mod radial;
mod assembly;
pub mod quant2d;
pub mod quant5d;
pub mod spectra;
pub mod classical;
pub mod stats;
pub mod config;
pub mod output;
pub mod cli;

pub use assembly::Operator;
pub use error::{GcmError, Result};
pub use model::ModelParams;
