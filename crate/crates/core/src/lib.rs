//! Parameter-free online linear optimization in Banach spaces via coin betting.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod betting;
pub mod bounds;
pub mod error;
pub mod experts;
pub mod harness;
pub mod learner;
pub mod recipe;
pub mod reductions;
pub mod settings;
pub mod spaces;

pub use error::{OloError, Result};
pub use learner::{Learner, Probe};
pub use settings::NumericSettings;
pub use spaces::{NormKind, NormSpec};
