//! Computation with finite metric measure spaces: metric-preserving
//! functions, product spaces, concentration invariants and the
//! Prokhorov, Ky Fan and box distances.

// `!(a < b)` comparisons are kept where NaN must fall on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distances;
pub mod experiments;
pub mod gallery;
pub mod invariants;
pub mod mpf;
pub mod optim;
pub mod product;
pub mod rng;
pub mod space;

pub use mpf::{MPFDescriptor, MpfError};
pub use space::{pushforward, validate_space, FiniteMMSpace, LipFunction, RealDistribution, SpaceError};
