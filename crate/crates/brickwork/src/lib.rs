//! Low-depth random unitary ensembles and their diagnostics: two-layer
//! brickwork constructions glued from small random unitaries, exact
//! Weingarten calculus, dual-backend simulation, routing onto arbitrary
//! connectivity graphs, classical shadows, and output-distribution
//! statistics.

pub mod circuit;
pub mod clifford;
pub mod diststats;
pub mod ensemble;
pub mod error;
pub mod gates;
pub mod geometry;
pub mod linalg;
pub mod perm;
pub mod pfc;
pub mod protocols;
pub mod rng;
pub mod serialize;
pub mod shadows;
pub mod statevector;
pub mod tableau;
pub mod verifier;

pub use error::{Error, Result};
