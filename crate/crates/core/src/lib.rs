pub mod cli;
pub mod conv;
pub mod error;
mod fft;
pub mod grid;
pub mod init;
pub mod io;
pub mod kernel;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{forward_transform, inverse_transform, lp_norm, Field, GridSpec, SpectralField};
