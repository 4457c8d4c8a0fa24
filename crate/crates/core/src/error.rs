use thiserror::Error;

use crate::search::SearchResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("length must be non-negative, got {0}")]
    NegativeLength(f64),
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("collinear segments overlap; split them before intersecting")]
    CollinearOverlap,
    #[error("generator points must lie strictly inside the window")]
    PointsOutsideWindow,
    #[error("cell has fewer than three vertices")]
    DegenerateCell,
    #[error("tube widening did not close the cell (half-width reached {half_width})")]
    NonConvergentWidening { half_width: f64 },
    #[error("quadrature error estimate {achieved:e} exceeds requested tolerance {requested:e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },
    #[error("{what}: ratio {ratio} is not an integer")]
    NonIntegralRatio { what: &'static str, ratio: f64 },
    #[error("nodes {0} and {1} are not connected")]
    Disconnected(usize, usize),
    #[error("no pair of distinct point locations to average over")]
    CoincidentPoints,
    #[error("reference sample size {reference} differs from configuration size {points}")]
    SizeMismatch { points: usize, reference: usize },
    #[error("point ({x}, {y}) is not a node of the network")]
    NodeMismatch { x: f64, y: f64 },
    #[error("no attempt met both thresholds after {} attempts", .0.attempts_used)]
    ExhaustedAttempts(Box<SearchResult>),
}
