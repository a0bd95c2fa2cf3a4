//! Monte Carlo harness: replicate statistics of field windows, distances to
//! reference laws, empirical characteristic functions and the truncation
//! operator diagnostics.

mod convolution;
mod empirical;
mod sums;
mod truncate;

pub use convolution::{convolution_check, convolution_from_composite, limit_cf, ConvolutionReport};
pub use empirical::{ecf, ks_distance, ks_one_sample, ks_two_sample, EmpiricalDist, Moments, Reference};
pub use sums::{
    partial_sum, replicate_statistic, replicate_stats, replicate_stats_with, replicate_values,
    v_statistic, StatisticKind, SumPath, SumReport,
};
pub use truncate::{queue_condition_norm, truncate_fc, truncation_check, TruncationCheck};

use thiserror::Error;

use crate::fields::FieldError;
use crate::limitlaw::LawError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite sample {0}")]
    NonFinite(f64),
    #[error("statistic needs a two-dimensional window, got dimension {0}")]
    NeedsTwoDimensions(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Law(#[from] LawError),
}
