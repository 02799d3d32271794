//! Optimal probabilistic mixtures of unitary channels.
//!
//! The crate computes the best classical mixture of implementable unitaries
//! approximating a target unitary in half-diamond distance, a fast
//! single-qubit path through the magic basis, a covering-based single-qubit
//! synthesis pipeline, and the lower/upper bounds on mixing error together
//! with the families that make them tight.

pub mod error;
pub mod fmt;
pub mod linalg;
pub mod channels;
pub mod qubit1;
pub mod sdp;
pub mod synth;
pub mod bounds;
pub mod cli;

pub use error::{Error, Result};
