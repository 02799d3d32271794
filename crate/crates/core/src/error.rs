use thiserror::Error;

use crate::sdp::SdpStatus;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not a density operator: {0}")]
    NotDensity(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed SDP: {0}")]
    MalformedSdp(String),
    #[error("SDP solver failed with status {status:?} (gap {gap:.3e}, infeasibility {infeasibility:.3e})")]
    SdpFailure {
        status: SdpStatus,
        gap: f64,
        infeasibility: f64,
    },
    #[error("candidate list is empty")]
    EmptyCandidates,
    #[error("no candidate within 2*eps = {radius} of the target")]
    EmptySupport { radius: f64 },
    #[error("sequence pool is empty")]
    EmptyPool,
    #[error("sequence enumeration would exceed the budget of {cap} sequences")]
    BudgetExceeded { cap: usize },
    #[error("deterministic synthesis reached radius {achieved:.6} but {required:.6} is required")]
    CoveringUnreachable { achieved: f64, required: f64 },
    #[error("eigenphase {phase:.6} is within the branch margin of pi")]
    BranchCut { phase: f64 },
    #[error("mesh too coarse: slack {slack:.3e} exceeds tolerance {tolerance:.3e}")]
    MeshTooCoarse { slack: f64, tolerance: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
