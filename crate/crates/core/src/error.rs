//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the analysis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A cancel referenced an order id that is not resting in the book.
    #[error("unknown-order: no resting order with id {id:?}")]
    UnknownOrder { id: String },

    /// A cancel asked to remove more quantity than the order has resting.
    #[error(
        "cancel-exceeds-quantity: order {id:?} has {resting} resting, cancel asked for {requested}"
    )]
    CancelExceedsQuantity {
        id: String,
        resting: u64,
        requested: u64,
    },

    /// An event failed basic validation (bad price, duplicate id, ...).
    #[error("invalid-event: {0}")]
    InvalidEvent(String),

    /// An event stream produced no classified submissions.
    #[error("empty-series: event stream contains no submissions")]
    EmptySeries,

    /// Error attributable to a specific event in a stream.
    #[error("event seq {seq}: {source}")]
    AtEvent {
        seq: u64,
        #[source]
        source: Box<Error>,
    },

    /// A series failed its domain invariants.
    #[error("invalid-series: {0}")]
    InvalidSeries(String),

    /// A window scale larger than the series it is applied to.
    #[error("scale-exceeds-length: scale {scale} > series length {len}")]
    ScaleExceedsLength { scale: usize, len: usize },

    /// Not even one full segment fits at the requested scale.
    #[error("insufficient-data: {len} residuals cannot form a segment of size {scale}")]
    InsufficientData { scale: usize, len: usize },

    /// Every segment fluctuation vanished; the series carries no signal.
    #[error("degenerate-series: all segment fluctuations are zero")]
    DegenerateSeries,

    /// Too many zero segments for a non-positive moment order.
    #[error(
        "negative-moment-unstable: {zeros}/{segments} zero segments at scale {scale} for q = {q}"
    )]
    NegativeMomentUnstable {
        q: f64,
        scale: usize,
        zeros: usize,
        segments: usize,
    },

    /// A log-log fit was requested over fewer than three points.
    #[error("insufficient-points: {found} curve points in range, need at least {needed}")]
    InsufficientPoints { found: usize, needed: usize },

    /// No candidate crossover leaves three points on each side.
    #[error("no-admissible-crossover: curve has no candidate with 3 points on each side")]
    NoAdmissibleCrossover,

    /// The design matrix is rank deficient.
    #[error("collinear-design: {0}")]
    CollinearDesign(String),

    /// The Legendre transform needs a uniform q grid.
    #[error("grid-not-uniform: q grid spacing varies by more than {0}")]
    GridNotUniform(f64),

    /// A configuration value failed validation before any computation ran.
    #[error("invalid-config: {0}")]
    InvalidConfig(String),

    /// Generator parameters out of range.
    #[error("invalid-generator: {0}")]
    InvalidGenerator(String),

    /// A file could not be parsed; `line` is 1-based and counts every
    /// physical line including the metadata preamble.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
