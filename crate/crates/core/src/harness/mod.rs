//! Seeded experiments: adversaries, run loop, traces and bound checks.

pub mod adversary;
pub mod bench;
pub mod check;
pub mod hindsight;
pub mod rng;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{OloError, Result};
use crate::learner::Learner;
use crate::recipe::{AnyLearner, Recipe};
use crate::spaces::NormSpec;

use adversary::{Adversary, AdversarySpec};
use rng::{Stream, RNG_ALGORITHM};
use trace::{RoundRecord, RunTrace, TraceHeader, TRACE_FORMAT};

pub const TRACE_VERSION: u32 = 1;

/// Everything needed to reproduce a run bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub recipe: Recipe,
    pub adversary: AdversarySpec,
    pub space: NormSpec,
    pub rounds: usize,
    pub seed: u64,
    /// Bound on the adversary's gradient dual norm; learners see `g / L`.
    pub lipschitz: f64,
    /// Initial wealth for betting learners that do not set their own.
    pub eps: f64,
}

impl ExperimentConfig {
    pub fn new(recipe: Recipe, adversary: AdversarySpec, space: NormSpec, rounds: usize, seed: u64) -> Self {
        Self { recipe, adversary, space, rounds, seed, lipschitz: 1.0, eps: 1.0 }
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    fn header(&self) -> TraceHeader {
        TraceHeader {
            format: TRACE_FORMAT.into(),
            version: TRACE_VERSION,
            algo: self.recipe.clone(),
            adversary: self.adversary.to_string(),
            space: self.space.clone(),
            rounds: self.rounds,
            seed: self.seed,
            eps: self.eps,
            lipschitz: self.lipschitz,
            rng: RNG_ALGORITHM.into(),
        }
    }
}

/// A run in progress. Serializes to a checkpoint that resumes to the same
/// trace as an uninterrupted run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Runner {
    config: ExperimentConfig,
    learner: AnyLearner,
    adversary: Adversary,
    records: Vec<RoundRecord>,
}

impl Runner {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        if config.rounds == 0 {
            return Err(OloError::Config("rounds must be at least 1".into()));
        }
        if !(config.eps > 0.0 && config.eps.is_finite()) {
            return Err(OloError::Config(format!("eps must be positive, got {}", config.eps)));
        }
        let learner = config.recipe.build(&config.space, config.eps)?;
        if learner.dim() != config.space.dim() {
            return Err(OloError::DimensionMismatch { expected: config.space.dim(), got: learner.dim() });
        }
        let mut root = Stream::new(config.seed);
        let adversary = Adversary::new(config.adversary.clone(), config.space.clone(), config.lipschitz, root.split())?;
        Ok(Self { records: Vec::with_capacity(config.rounds), config, learner, adversary })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn learner(&self) -> &AnyLearner {
        &self.learner
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.records.len()
    }

    pub fn is_finished(&self) -> bool {
        self.records.len() >= self.config.rounds
    }

    /// Plays one round. Errors carry the 1-based round index.
    pub fn step(&mut self) -> Result<()> {
        let t = self.records.len() + 1;
        let at = |e: OloError| OloError::Round { round: t, source: Box::new(e) };
        let w = self.learner.predict();
        let g = self.adversary.gradient(&w).map_err(at)?;
        let l = self.config.lipschitz;
        let g_scaled: Vec<f64> = g.iter().map(|v| v / l).collect();
        self.learner.update(&g_scaled).map_err(at)?;
        let p = self.learner.probe();
        self.records.push(RoundRecord {
            t,
            wealth: p.wealth,
            w,
            g,
            g_scaled,
            inner_point: p.inner_point,
            inner_grad: p.inner_grad,
            magnitude: p.magnitude,
            scalar_grad: p.scalar_grad,
            direction: p.direction,
        });
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    /// Trace of the rounds played so far.
    pub fn trace(&self) -> RunTrace {
        RunTrace { header: self.config.header(), rounds: self.records.clone() }
    }

    pub fn into_trace(self) -> RunTrace {
        RunTrace { header: self.config.header(), rounds: self.records }
    }

    pub fn checkpoint(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn resume(checkpoint: &str) -> Result<Self> {
        Ok(serde_json::from_str(checkpoint)?)
    }
}

/// Runs an experiment to completion.
pub fn run(config: ExperimentConfig) -> Result<RunTrace> {
    let mut runner = Runner::new(config)?;
    runner.run_to_end()?;
    Ok(runner.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(name: &str, adversary: &str, d: usize, rounds: usize) -> ExperimentConfig {
        let space = NormSpec::euclidean(d).unwrap();
        let recipe = Recipe::preset(name, &space, None).unwrap();
        ExperimentConfig::new(recipe, adversary.parse().unwrap(), space, rounds, 42)
    }

    #[test]
    fn same_seed_same_trace() {
        let a = run(config("coin-banach", "rademacher", 3, 300)).unwrap();
        let b = run(config("coin-banach", "rademacher", 3, 300)).unwrap();
        assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
        let mut other = config("coin-banach", "rademacher", 3, 300);
        other.seed = 43;
        assert_ne!(run(other).unwrap().rounds, a.rounds);
    }

    #[test]
    fn checkpoint_resume_matches_uninterrupted_run() {
        let cfg = config("curvature-ball", "drifting", 2, 200);
        let full = run(cfg.clone()).unwrap();
        let mut r = Runner::new(cfg).unwrap();
        for _ in 0..77 {
            r.step().unwrap();
        }
        let mut resumed = Runner::resume(&r.checkpoint().unwrap()).unwrap();
        resumed.run_to_end().unwrap();
        assert_eq!(resumed.into_trace(), full);
    }

    #[test]
    fn lipschitz_scaling_reaches_learner() {
        let cfg = config("coin1d", "rademacher", 1, 20).with_lipschitz(4.0);
        let tr = run(cfg).unwrap();
        for r in &tr.rounds {
            assert_eq!(r.g[0].abs(), 4.0);
            assert_eq!(r.g_scaled[0], r.g[0] / 4.0);
        }
    }

    #[test]
    fn precondition_failure_names_the_round() {
        // the quadratic gradient at the origin has norm 2 > L = 1
        let cfg = config("coin1d", "sc_quadratic:w_star=2.0;mu=1.0", 1, 5);
        let err = run(cfg).unwrap_err();
        assert!(err.is_precondition());
        assert!(matches!(err, OloError::Round { round: 1, .. }));
    }

    #[test]
    fn reduction_columns_are_recorded() {
        let tr = run(config("constrained-ball", "rademacher", 2, 10)).unwrap();
        assert!(tr.rounds.iter().all(|r| r.inner_point.is_some() && r.inner_grad.is_some()));
        let tr = run(config("dimfree", "rademacher", 2, 10)).unwrap();
        assert!(tr.rounds.iter().all(|r| r.magnitude.is_some() && r.scalar_grad.is_some()));
    }
}
