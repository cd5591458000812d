//! JSON descriptions of learner trees and the concrete learner they build.

use serde::{Deserialize, Serialize};

use crate::baselines::{BallFtrl, BallOgd};
use crate::betting::{Coin1d, CoinBanach};
use crate::error::{check_dim, OloError, Result};
use crate::experts::{CoordWise, MultiScale, MultiScaleConfig};
use crate::learner::{Learner, Probe};
use crate::reductions::{ConstraintSet, Constrained, Curvature, DimFree};
use crate::spaces::NormSpec;

/// Constraint set as written in a recipe; norm balls use the run's space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintRecipe {
    NormBall {
        radius: f64,
    },
    ScaledSimplex {
        c: Vec<f64>,
        #[serde(default = "one")]
        k: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ConstraintRecipe {
    pub fn build(&self, spec: &NormSpec) -> Result<ConstraintSet> {
        match self {
            ConstraintRecipe::NormBall { radius } => ConstraintSet::norm_ball(*radius, spec.clone()),
            ConstraintRecipe::ScaledSimplex { c, k } => {
                check_dim(spec.dim(), c.len())?;
                ConstraintSet::scaled_simplex(c.clone(), *k)
            }
        }
    }
}

/// A learner tree. Missing `eps` fields take the run-level default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Recipe {
    Coin1d {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    CoinBanach {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    BallOgd,
    BallFtrl,
    Dimfree {
        magnitude: Box<Recipe>,
        direction: Box<Recipe>,
    },
    Constrained {
        inner: Box<Recipe>,
        constraint: ConstraintRecipe,
    },
    Curvature {
        base: Box<Recipe>,
        constraint: ConstraintRecipe,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xbar0: Option<Vec<f64>>,
    },
    Coordwise {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<Vec<f64>>,
    },
    Multiscale {
        c: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

impl Recipe {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("recipes always serialize")
    }

    /// The `algo` tag of the root node.
    pub fn name(&self) -> &'static str {
        match self {
            Recipe::Coin1d { .. } => "coin1d",
            Recipe::CoinBanach { .. } => "coin-banach",
            Recipe::BallOgd => "ball-ogd",
            Recipe::BallFtrl => "ball-ftrl",
            Recipe::Dimfree { .. } => "dimfree",
            Recipe::Constrained { .. } => "constrained",
            Recipe::Curvature { .. } => "curvature",
            Recipe::Coordwise { .. } => "coordwise",
            Recipe::Multiscale { .. } => "multiscale",
        }
    }

    /// Named configurations. `multiscale` needs the expert scales.
    pub fn preset(name: &str, spec: &NormSpec, scales: Option<&[f64]>) -> Result<Self> {
        let direction = if spec.is_hilbert() { Recipe::BallOgd } else { Recipe::BallFtrl };
        let dimfree = Recipe::Dimfree {
            magnitude: Box::new(Recipe::Coin1d { eps: None }),
            direction: Box::new(direction),
        };
        let unit_ball = ConstraintRecipe::NormBall { radius: 1.0 };
        Ok(match name {
            "coin1d" => Recipe::Coin1d { eps: None },
            "coin-banach" => Recipe::CoinBanach { eps: None },
            "ball-ogd" => Recipe::BallOgd,
            "ball-ftrl" => Recipe::BallFtrl,
            "dimfree" => dimfree,
            "constrained-ball" => Recipe::Constrained {
                inner: Box::new(dimfree),
                constraint: unit_ball,
            },
            "curvature-ball" => Recipe::Curvature {
                base: Box::new(dimfree),
                constraint: unit_ball,
                xbar0: None,
            },
            "coordwise" => Recipe::Coordwise { eps: None, pi: None },
            "multiscale" => match scales {
                Some(c) => Recipe::Multiscale { c: c.to_vec(), pi: None, eps: None },
                None => {
                    return Err(OloError::Config(
                        "the multiscale preset needs expert scales; pass a recipe with \"c\"".into(),
                    ))
                }
            },
            other => return Err(OloError::Config(format!("unknown preset '{other}'"))),
        })
    }

    pub fn build(&self, spec: &NormSpec, default_eps: f64) -> Result<AnyLearner> {
        let eps = |e: &Option<f64>| e.unwrap_or(default_eps);
        Ok(match self {
            Recipe::Coin1d { eps: e } => {
                if spec.dim() != 1 {
                    return Err(OloError::Config(format!(
                        "coin1d is one-dimensional, space has dimension {}",
                        spec.dim()
                    )));
                }
                AnyLearner::Coin1d(Coin1d::new(eps(e))?)
            }
            Recipe::CoinBanach { eps: e } => AnyLearner::CoinBanach(CoinBanach::new(spec.clone(), eps(e))?),
            Recipe::BallOgd => AnyLearner::BallOgd(BallOgd::new(spec.clone())?),
            Recipe::BallFtrl => AnyLearner::BallFtrl(BallFtrl::new(spec.clone())?),
            Recipe::Dimfree { magnitude, direction } => {
                let line = NormSpec::euclidean(1)?;
                AnyLearner::DimFree(DimFree::new(
                    Box::new(magnitude.build(&line, default_eps)?),
                    Box::new(direction.build(spec, default_eps)?),
                    spec.clone(),
                )?)
            }
            Recipe::Constrained { inner, constraint } => {
                let set = constraint.build(spec)?;
                let child = inner.build(&set.spec(), default_eps)?;
                AnyLearner::Constrained(Constrained::new(Box::new(child), set)?)
            }
            Recipe::Curvature { base, constraint, xbar0 } => {
                let set = constraint.build(spec)?;
                let child = base.build(&set.spec(), default_eps)?;
                AnyLearner::Curvature(Curvature::new(Box::new(child), set, xbar0.clone())?)
            }
            Recipe::Coordwise { eps: e, pi } => {
                let pi = pi.clone().unwrap_or_else(|| uniform(spec.dim()));
                check_dim(spec.dim(), pi.len())?;
                AnyLearner::CoordWise(CoordWise::new(eps(e), &pi)?)
            }
            Recipe::Multiscale { c, pi, eps: e } => {
                check_dim(spec.dim(), c.len())?;
                let config = MultiScaleConfig {
                    c: c.clone(),
                    pi: pi.clone().unwrap_or_else(|| uniform(c.len())),
                    eps: eps(e),
                };
                AnyLearner::MultiScale(MultiScale::new(&config)?)
            }
        })
    }

    /// The constraint set of a constrained or curvature root, if any.
    pub fn root_constraint(&self, spec: &NormSpec) -> Result<Option<ConstraintSet>> {
        match self {
            Recipe::Constrained { constraint, .. } | Recipe::Curvature { constraint, .. } => {
                constraint.build(spec).map(Some)
            }
            _ => Ok(None),
        }
    }
}

/// Every learner the harness can build, as one serializable state tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case")]
pub enum AnyLearner {
    Coin1d(Coin1d),
    CoinBanach(CoinBanach),
    BallOgd(BallOgd),
    BallFtrl(BallFtrl),
    DimFree(DimFree<Box<AnyLearner>, Box<AnyLearner>>),
    Constrained(Constrained<Box<AnyLearner>>),
    Curvature(Curvature<Box<AnyLearner>>),
    CoordWise(CoordWise),
    MultiScale(MultiScale),
}

macro_rules! dispatch {
    ($self:expr, $l:ident => $body:expr) => {
        match $self {
            AnyLearner::Coin1d($l) => $body,
            AnyLearner::CoinBanach($l) => $body,
            AnyLearner::BallOgd($l) => $body,
            AnyLearner::BallFtrl($l) => $body,
            AnyLearner::DimFree($l) => $body,
            AnyLearner::Constrained($l) => $body,
            AnyLearner::Curvature($l) => $body,
            AnyLearner::CoordWise($l) => $body,
            AnyLearner::MultiScale($l) => $body,
        }
    };
}

impl Learner for AnyLearner {
    fn dim(&self) -> usize {
        dispatch!(self, l => l.dim())
    }

    fn predict(&mut self) -> Vec<f64> {
        dispatch!(self, l => l.predict())
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        dispatch!(self, l => l.update(grad))
    }

    fn probe(&self) -> Probe {
        dispatch!(self, l => l.probe())
    }
}
