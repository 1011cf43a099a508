//! Independent oracles, exponent fits and property checks.

mod checks;
pub mod oracle;
mod registry;
mod scaling;

pub use checks::*;
pub use oracle::{direct_integrator, direct_integrator_with, eikonal_integrator, OracleOptions};
pub use registry::*;
pub use scaling::*;
