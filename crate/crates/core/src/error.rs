use thiserror::Error;

/// Errors raised by the simulator, circuit builders, channels and oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("label has {got} entries but the layout has {expected} wires")]
    LabelLength { expected: usize, got: usize },

    #[error("value {value} on wire {wire} is outside its dimension {dim}")]
    LabelValue { wire: usize, value: u8, dim: u8 },

    #[error("state has no terms with nonzero amplitude")]
    EmptyState,

    #[error("wire {wire} is out of range for a layout with {wire_count} wires")]
    WireOutOfRange { wire: usize, wire_count: usize },

    #[error("gate uses wire {wire} more than once")]
    DuplicateWire { wire: usize },

    #[error("{gate} is not defined on wire {wire} of dimension {dim}")]
    GateDimension { gate: &'static str, wire: usize, dim: u8 },

    #[error("control value {value} is outside the dimension {dim} of wire {wire}")]
    ControlValue { wire: usize, value: u8, dim: u8 },

    #[error("classically controlled gate for cell {cell} has not been bound to data")]
    UnboundClassicalGate { cell: usize },

    #[error("states or sublayouts do not share a layout: {0}")]
    LayoutMismatch(String),

    #[error("matrix is not Hermitian (max deviation {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel not supported: {0}")]
    UnsupportedChannel(String),

    #[error("Kraus weights K_m^dag K_m are not diagonal; the trajectory sampler cannot handle this channel")]
    NonDiagonalWeights,

    #[error("Kraus probabilities sum to {total}, deviating from 1 by more than 1e-9")]
    ProbabilityDeviation { total: f64 },

    #[error("Kraus operator annihilates the state")]
    ZeroNorm,

    #[error("{what} needs size {size}, above the limit {limit}")]
    Guard { what: String, size: u128, limit: u128 },

    #[error("layers within a block overlap on wire {wire}")]
    LayerOverlap { wire: usize },

    #[error("not enough points for a fit: {got} pass the filter, need at least 2")]
    InsufficientPoints { got: usize },
}

pub type Result<T> = std::result::Result<T, SimError>;
