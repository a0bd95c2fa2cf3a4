//! Exact conditional expectations and sigma-algebra calculus on finite
//! probability spaces.
//!
//! Every finite sigma-algebra is generated by a partition into atoms, so a
//! sub-sigma-algebra is modelled as a [`Partition`] of the points of a
//! [`FiniteSpace`]. Join and meet of sigma-algebras become partition join
//! (common refinement) and meet (finest common coarsening); conditional
//! expectation becomes weighted block averaging. All arithmetic is exact
//! rational so identities either hold or fail, with nothing in between.

mod action;
mod filtration;
pub mod fixture;
mod partition;
mod space;
mod verify;

pub use action::{FiniteAction, Permutation};
pub use filtration::{check_completely_commuting, CommutingReport, CommutingWitness, FiltrationGrid};
pub use partition::{cond_exp, Partition};
pub use space::{parse_rational, FiniteSpace, Q};
pub use verify::{
    generated_past, verify_independence, verify_lemma_class, verify_prop_pro, IdentityReport,
    Status,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("a finite probability space needs at least one point")]
    EmptySpace,
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("cannot parse rational {0:?} (expected \"num/den\" or an integer)")]
    ParseRational(String),
    #[error("objects live on spaces of different size ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("block {block} has zero total weight")]
    ZeroWeightBlock { block: usize },
    #[error("not a permutation: {0}")]
    NotPermutation(String),
    #[error("generators {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("an action needs at least one generator")]
    NoGenerators,
    #[error("empty generator subset")]
    EmptyGeneratorSubset,
    #[error("generator index {0} out of range")]
    GeneratorOutOfRange(usize),
    #[error("malformed filtration grid: {0}")]
    MalformedGrid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}
