//! H2 noise-rejection analysis and time-scale design for weighted consensus
//! networks whose agents run on individual time scales.
//!
//! The node dynamics `E ẋ = −L_w x + ω − D v` are rewritten in spanning-tree
//! edge coordinates, where the consensus mode separates out and the remaining
//! states obey a stable system with a well-defined H2 norm. The crate builds
//! that system ([`operators`]), evaluates its H2 norm numerically and in closed
//! form ([`h2`]), brackets it by covariance eigenvalues ([`bounds`]), designs
//! time scales to minimize it ([`design`]) and checks everything by simulation
//! ([`sim`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod design;
pub mod error;
pub mod graph;
pub mod h2;
pub mod lyapunov;
pub mod operators;
pub mod random;
pub mod sim;
pub mod spec_file;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Graph, Network};
pub use operators::{NoiseModel, OutputMode, ScaleWeightPair};
