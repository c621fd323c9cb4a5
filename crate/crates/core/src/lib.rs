//! Exact solver and strategy workbench for the multiple caching game.

pub mod accumulation;
pub mod error;
pub mod fractional;
pub mod game;
pub mod lp;
pub mod rational;
pub mod solver;
pub mod strategies;
pub mod symmetry;

pub use error::{Error, Result};
pub use game::{Allocation, GameSpec, GameState, Query, Step, Variant};
pub use rational::Rational;
