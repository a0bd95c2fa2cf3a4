//! Reproducible realizations of stationary martingale-difference fields over
//! finite lattice windows.
//!
//! A field is described by a [`FieldSpec`]; a realization is a pure
//! function of `(spec, master seed, replicate id)`. Axis driver sequences
//! are counter-based (see [`crate::rng`]), so cell `(i, j[, k])` sees the
//! same drivers regardless of window size or evaluation order. Lattice
//! indices are 1-based, matching sums over `i = 1..l`.

mod export;
mod hermite;
mod local;
mod parity;
mod sampler;
mod spec;
mod window;

pub use export::write_realization_csv;
pub use hermite::{hermite_orthonormal, hermite_table};
pub use local::{LocalCell, Truncation};
pub use parity::{torus_matrix_power, torus_parity, TorusParity};
pub use sampler::{
    sample, sample_chaos_field, sample_iid_field, sample_product_iid, sample_signflip,
    Provenance, Realization, Replicate, Sampler,
};
pub use spec::{ChaosTerm, CoeffTensor, Driver, FieldSpec};
pub use window::Window;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid window: {0}")]
    BadWindow(String),
    #[error("window cell count overflows the address space")]
    WindowOverflow,
    #[error("spec has dimension {spec} but the window has dimension {window}")]
    DimensionMismatch { spec: usize, window: usize },
    #[error("coefficient tensor is empty")]
    EmptyTensor,
    #[error("invalid coefficient tensor: {0}")]
    BadTensor(String),
    #[error("Hermite order 0 is excluded from the martingale-difference basis")]
    HermiteOrderZero,
    #[error("unsupported driver: {0}")]
    UnsupportedDriver(String),
    #[error("composite parts share driver stream {0}")]
    SharedStreams(u64),
    #[error("spec is not local (cell value must depend only on origin drivers): {0}")]
    NonLocal(String),
    #[error("invalid truncation level {0}")]
    BadTruncation(f64),
}
