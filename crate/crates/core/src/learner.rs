//! The predict/update interface shared by every algorithm and reduction.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Online learner for linear losses `⟨g_t, ·⟩`.
///
/// A round is `predict` followed by `update` with the gradient observed at
/// the predicted point. Calling `predict` twice without an update returns
/// the same point.
pub trait Learner {
    fn dim(&self) -> usize;

    fn predict(&mut self) -> Vec<f64>;

    fn update(&mut self, grad: &[f64]) -> Result<()>;

    /// Internal quantities of the most recent round, for trace recording.
    fn probe(&self) -> Probe {
        Probe::default()
    }
}

/// Per-round internals exposed by a learner after `update`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    /// Wealth after the update (betting learners).
    pub wealth: Option<f64>,
    /// Point produced by the wrapped child learner this round (`z_t`).
    pub inner_point: Option<Vec<f64>>,
    /// Surrogate gradient forwarded to the child learner (`g̃_t`).
    pub inner_grad: Option<Vec<f64>>,
    /// Magnitude played by a magnitude × direction reduction.
    pub magnitude: Option<f64>,
    /// Direction played by a magnitude × direction reduction.
    pub direction: Option<Vec<f64>>,
    /// Scalar gradient forwarded to the magnitude learner.
    pub scalar_grad: Option<f64>,
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn predict(&mut self) -> Vec<f64> {
        (**self).predict()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        (**self).update(grad)
    }

    fn probe(&self) -> Probe {
        (**self).probe()
    }
}
