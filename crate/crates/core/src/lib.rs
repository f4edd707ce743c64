//! Lattice Gaussian free field laboratory.
//!
//! Simulates the discrete 2D Gaussian free field on circle domains,
//! extracts first passage sets and two-valued local sets, and provides the
//! observables and reference laws needed to verify their exact distributional
//! identities by Monte Carlo.

pub mod band;
pub mod dense;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod laws;
pub mod local_sets;
pub mod observables;
pub mod potential;
pub mod sampler;
pub mod subgraph;

pub use error::{Error, Result};
