//! Explicit constants for Sobolev embeddings and Moser-Trudinger
//! inequalities on groups of exponential growth, with numerical checks of the
//! inequality chains that produce them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod interpolation;
pub mod kernel;
pub mod numeric;
pub mod params;
pub mod quad;
pub mod report;
pub mod series;
pub mod spectral;
mod special;

pub use error::{Error, Result};
pub use params::{ExponentPair, GroupGeometry, KeyValueConfig, ParameterGrid};
pub use report::{Cell, Format, GoldenSnapshot, ResultTable};
pub use special::gamma;
