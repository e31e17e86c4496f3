//! Sparse simulation of noisy quantum random access memory queries.
//!
//! The crate models QRAM query circuits (bucket-brigade, fanout, QROM and hybrids) as
//! sequences of timed gate blocks acting on labeled basis states, samples local Kraus
//! noise exactly along trajectories, and compares the resulting query fidelity with
//! analytic bounds. A dense reference simulator in [`oracle`] cross-checks the engine
//! on small instances.

pub mod bounds;
pub mod channels;
pub mod circuits;
pub mod entropy;
pub mod error;
pub mod fidelity;
pub mod fit;
pub mod gate;
pub mod layout;
pub mod oracle;
pub mod sampler;
pub mod state;
pub mod trajectory;

pub use error::{Result, SimError};
