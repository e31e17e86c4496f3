//! Brute-force reference simulators for small instances.
//!
//! [`dense_unitary_sim`] evolves a full state vector with gate matrices from an
//! independent [`GateTable`]; [`dense_channel_sim`] evolves a density matrix exactly under
//! a Kraus channel; [`enumerate_configs_fidelity`] sums `p(c) F(c)` over every error
//! configuration on a restricted set of locations.

mod dense;
mod density;
mod enumerate;
mod gate_table;

pub use dense::{dense_unitary_sim, DenseState, DENSE_LIMIT};
pub use density::{dense_channel_sim, ChannelSimResult, DenseDensityMatrix, DENSITY_LIMIT};
pub use enumerate::{enumerate_configs_fidelity, EnumerationResult, ENUMERATION_LIMIT};
pub use gate_table::{GateTable, LocalOperator};
