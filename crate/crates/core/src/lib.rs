//! Order-aggressiveness series and their scaling analysis.
//!
//! The crate reconstructs limit-order-book state from event streams,
//! classifies each order's aggressiveness (±1..±5), and quantifies the
//! resulting series' linear and nonlinear long-range correlations:
//!
//! * [`orderflow`] — book reconstruction, matching, classification;
//! * [`dma`] — detrending-moving-average fluctuation analysis F2(s);
//! * [`scalingfit`] — power-law and constrained two-segment crossover fits;
//! * [`mfdma`] — the multifractal generalization: h(q), τ(q), f(α);
//! * [`synth`] — seeded oracle generators (fGn, binomial cascades) and
//!   shuffled surrogates;
//! * [`regression`] — stepwise OLS for exponent-vs-covariate studies;
//! * [`io`] / [`report`] — replayable CSV artifacts and summary tables.

pub mod dma;
pub mod error;
pub mod io;
pub mod mfdma;
pub mod orderflow;
pub mod regression;
pub mod report;
pub mod scalingfit;
pub mod synth;

pub use error::{Error, Result};
