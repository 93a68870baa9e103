//! Exact symbolic workbench for countable compact ordinal spaces, atomic
//! measure families on them, and the ordinal indices attached to the
//! evaluation operator between the two.
//!
//! Everything is exact: ordinals live in hereditary Cantor normal form and
//! every weight is a big rational.

pub mod construction;
pub mod error;
pub mod exec;
pub mod measure;
pub mod operator;
pub mod ordinal;
pub mod rational;
pub mod rng;
pub mod space;
pub mod wolfe;

#[doc(hidden)]
pub mod cli;

pub use construction::{build_pair, FamilyDescriptor, MeasureIndex, Pair, Truncation};
pub use error::{Error, Result};
pub use exec::Execution;
pub use ordinal::Ordinal;
pub use rational::Rational;
pub use space::{ClopenSet, Point, SpaceDescriptor};
