use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid corridor: {0}")]
    InvalidCorridor(String),
    #[error("invalid demand: {0}")]
    InvalidDemand(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("grid mismatch: expected {expected} points, got {actual}")]
    GridMismatch { expected: usize, actual: usize },
    /// A skip-stop bay window longer than half the loop.
    #[error("bay window of {window_km} km at grid point {point} exceeds half the loop")]
    DegenerateBay { point: usize, window_km: f64 },
    /// Vehicle capacity cannot carry the on-board flow at some grid point.
    #[error("capacity infeasible at grid point {point}")]
    CapacityInfeasible { point: usize },
    /// The headway floor exceeds the capacity ceiling.
    #[error("headway range empty: floor {floor_h} h above capacity ceiling {ceiling_h} h")]
    HeadwayRangeEmpty { floor_h: f64, ceiling_h: f64 },
    #[error("degenerate headway first-order condition (non-positive denominator)")]
    DegenerateHeadway,
    #[error("no feasible design for any line-count pair")]
    Infeasible,
}
