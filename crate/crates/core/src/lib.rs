//! Synergistic potential functions on SO(3) built by angular warping of a
//! modified trace function, and a velocity-free hybrid attitude controller
//! that uses them.

pub mod eigen;
pub mod error;
pub mod so3;
pub mod trace_potential;
pub mod warping;

pub use error::{Error, Result};
pub mod controller;
pub mod sim;
pub mod scenario;
pub mod csvio;
pub mod verify;
pub mod cli;
