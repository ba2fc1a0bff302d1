//! Diophantine approximation over number fields: heights of `O_K`-module
//! lattices under diagonal flows, the Dani correspondence, and Schmidt games
//! on curves with a constructive strategy for Player B.

pub mod ball;
pub mod cli;
pub mod diophantine;
pub mod error;
pub mod game;
pub mod latticeflow;
pub mod numberfield;

pub use error::{Error, Result};
