//! Stationary martingale-difference random fields on `Z^2` and `Z^3`.
//!
//! The crate is split along the lines of the experiments it supports:
//!
//! * [`exactalg`] - exact rational conditional expectations and sigma-algebra
//!   calculus on finite probability spaces (partitions, orbit algebras,
//!   commuting filtrations).
//! * [`fields`] - reproducible samplers for the built-in martingale-difference
//!   fields (products of i.i.d. axis sequences, Gaussian chaos fields, the
//!   sign-flip cocycle, i.i.d. baselines).
//! * [`limitlaw`] - reference limit laws: normal, products of normals (the
//!   Bessel law), Gaussian chaos products and variance mixtures.
//! * [`stats`] - normalized partial sums, the row-variance statistic,
//!   Kolmogorov-Smirnov distances, empirical characteristic functions and the
//!   truncation operator.

pub mod exactalg;
pub mod fields;
pub mod limitlaw;
pub mod quad;
pub mod rng;
pub mod stats;





pub use fields::{ChaosTerm, CoeffTensor, Driver, FieldSpec, Realization, Window};
pub use limitlaw::{CfGrid, LimitLaw};
pub use stats::{EmpiricalDist, StatisticKind, SumReport};
