//! Mixed virtual element solver for Darcy flow in fractured porous media.

pub mod assembly;
pub mod config;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod poly;
pub mod problem;
pub mod runner;
pub mod solve;
pub mod vem;

pub use error::{Error, Result};
