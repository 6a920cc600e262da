use thiserror::Error;

/// Errors raised by the geometry, flow, solver and check layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field has {found} values but the grid has {expected} nodes")]
    GridMismatch { expected: usize, found: usize },

    #[error("field lives on a {found} grid, operator was given a {expected} manifold")]
    KindMismatch { expected: &'static str, found: &'static str },

    #[error("non-finite {what} at node {node}")]
    NonFinite { what: &'static str, node: usize },

    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("extinction reached: t = {time} but the round sphere becomes singular at t = {extinction}")]
    Extinction { time: f64, extinction: f64 },

    #[error("CFL violated: dt = {dt:e} exceeds the stable limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("positivity lost in {what} at node {node}, t = {time}")]
    PositivityLost { what: &'static str, node: usize, time: f64 },

    #[error("metric mismatch: {0}")]
    MetricMismatch(String),

    #[error("trajectory has {found} stored states, at least {needed} are required")]
    TrajectoryTooShort { needed: usize, found: usize },

    #[error("curve: {0}")]
    InvalidCurve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
