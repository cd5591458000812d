//! Experts with per-expert loss scales, and the geometry of the scaled simplex
//! `{x ≥ 0, Σ x_i / c_i = k}` under the `l1` norm.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::betting::Coin1d;
use crate::error::{check_dim, OloError, Result};
use crate::learner::{Learner, Probe};
use crate::reductions::{ConstraintSet, Constrained};

/// Scaled simplex with its scales sorted once (descending, stable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SimplexRepr", into = "SimplexRepr")]
pub struct ScaledSimplex {
    c: Vec<f64>,
    k: f64,
    order: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SimplexRepr {
    c: Vec<f64>,
    k: f64,
}

impl TryFrom<SimplexRepr> for ScaledSimplex {
    type Error = OloError;

    fn try_from(r: SimplexRepr) -> Result<Self> {
        ScaledSimplex::new(r.c, r.k)
    }
}

impl From<ScaledSimplex> for SimplexRepr {
    fn from(s: ScaledSimplex) -> Self {
        SimplexRepr { c: s.c, k: s.k }
    }
}

/// Output of one greedy pass, indexed in sorted order.
struct GreedyPass {
    y: Vec<f64>,
    budgets: Vec<f64>,
    first_saturated: usize,
}

impl ScaledSimplex {
    pub fn new(c: Vec<f64>, k: f64) -> Result<Self> {
        if c.is_empty() {
            return Err(OloError::Config("scaled simplex needs at least one scale".into()));
        }
        if let Some(i) = c.iter().position(|&ci| !(ci > 0.0 && ci.is_finite())) {
            return Err(OloError::Config(format!("scale c[{i}] = {} is not positive", c[i])));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(OloError::Config(format!("simplex level k = {k} is not positive")));
        }
        let mut order: Vec<usize> = (0..c.len()).collect();
        // sort_by is stable, so ties keep index order
        order.sort_by(|&a, &b| c[b].partial_cmp(&c[a]).unwrap_or(Ordering::Equal));
        Ok(Self { c, k, order })
    }

    pub fn scales(&self) -> &[f64] {
        &self.c
    }

    pub fn level(&self) -> f64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    fn greedy(&self, x: &[f64]) -> GreedyPass {
        let n = self.c.len();
        let mut y = vec![0.0; n];
        let mut budgets = vec![0.0; n];
        let mut first_saturated = n - 1;
        let mut budget = self.k;
        for (pos, &i) in self.order.iter().enumerate() {
            budgets[pos] = budget;
            let cap = budget * self.c[i];
            let yi = if pos == n - 1 || x[i] > cap {
                cap
            } else if x[i] <= 0.0 {
                0.0
            } else {
                x[i]
            };
            y[i] = yi.max(0.0);
            if y[i] == cap && first_saturated == n - 1 && pos < n - 1 {
                first_saturated = pos;
            }
            budget = (budget - y[i] / self.c[i]).max(0.0);
        }
        GreedyPass { y, budgets, first_saturated }
    }

    /// The greedy `l1` projection onto the simplex.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.greedy(x).y)
    }

    /// `l1` distance to the simplex.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let y = self.project(x)?;
        Ok(x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum())
    }

    /// Closed-form subgradient of the `l1` distance, built from the greedy pass.
    pub fn distance_subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let pass = self.greedy(x);
        let m_pos = pass.first_saturated;
        let m = self.order[m_pos];
        let cap_m = pass.budgets[m_pos] * self.c[m];
        let tie = x[m] == cap_m;
        let sign_m = (x[m] - pass.y[m]).signum();
        let mut g = vec![0.0; x.len()];
        for (pos, &i) in self.order.iter().enumerate() {
            let cap = pass.budgets[pos] * self.c[i];
            g[i] = if x[i] <= 0.0 {
                -1.0
            } else if x[i] > cap {
                1.0
            } else if tie {
                self.c[m] / self.c[i]
            } else {
                sign_m * self.c[m] / self.c[i]
            };
        }
        Ok(g)
    }
}

/// Greedy projection of `x` onto `{y ≥ 0, Σ y_i / c_i = k}` under `l1`.
pub fn simplex_project(x: &[f64], c: &[f64], k: f64) -> Result<Vec<f64>> {
    ScaledSimplex::new(c.to_vec(), k)?.project(x)
}

/// Subgradient of the `l1` distance to the scaled simplex at `x`.
pub fn simplex_distance_subgradient(x: &[f64], c: &[f64], k: f64) -> Result<Vec<f64>> {
    ScaledSimplex::new(c.to_vec(), k)?.distance_subgradient(x)
}

/// Independent one-dimensional coin bettors, one per coordinate; bettor `i`
/// starts with wealth `ε·π_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordWise {
    learners: Vec<Coin1d>,
}

impl CoordWise {
    pub fn new(eps: f64, prior: &[f64]) -> Result<Self> {
        if prior.is_empty() {
            return Err(OloError::Config("coordinate-wise learner needs at least one coordinate".into()));
        }
        let learners = prior
            .iter()
            .map(|&p| Coin1d::new(eps * p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { learners })
    }

    pub fn learners(&self) -> &[Coin1d] {
        &self.learners
    }
}

impl Learner for CoordWise {
    fn dim(&self) -> usize {
        self.learners.len()
    }

    fn predict(&mut self) -> Vec<f64> {
        self.learners.iter_mut().map(Coin1d::predict_scalar).collect()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        check_dim(self.learners.len(), grad.len())?;
        if let Some(i) = grad.iter().position(|g| !(g.abs() <= 1.0 + 1e-12)) {
            return Err(OloError::Precondition(format!(
                "coordinate {i}: |g| = {} exceeds 1",
                grad[i].abs()
            )));
        }
        for (l, &g) in self.learners.iter_mut().zip(grad) {
            l.update_scalar(g)?;
        }
        Ok(())
    }

    fn probe(&self) -> Probe {
        Probe {
            wealth: Some(self.learners.iter().map(Coin1d::wealth).sum()),
            ..Probe::default()
        }
    }
}

/// Scales, prior and initial wealth of a multi-scale experts learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiScaleConfig {
    pub c: Vec<f64>,
    pub pi: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    1.0
}

impl MultiScaleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.pi.len() || self.c.is_empty() {
            return Err(OloError::Config(format!(
                "{} scales but {} prior weights",
                self.c.len(),
                self.pi.len()
            )));
        }
        if self.pi.iter().any(|&p| !(p > 0.0)) {
            return Err(OloError::Config("prior weights must be positive".into()));
        }
        let total: f64 = self.pi.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(OloError::Config(format!("prior sums to {total}, not 1")));
        }
        if !(self.eps > 0.0) {
            return Err(OloError::Config("eps must be positive".into()));
        }
        Ok(())
    }
}

/// Experts learner whose losses satisfy `|g_i| ≤ c_i`; plays probability vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiScale {
    c: Vec<f64>,
    inner: Constrained<CoordWise>,
    last_x: Vec<f64>,
    last_scaled: Vec<f64>,
}

impl MultiScale {
    pub fn new(config: &MultiScaleConfig) -> Result<Self> {
        config.validate()?;
        let simplex = ScaledSimplex::new(config.c.clone(), 1.0)?;
        let inner = Constrained::new(
            CoordWise::new(config.eps, &config.pi)?,
            ConstraintSet::ScaledSimplex(simplex),
        )?;
        let n = config.c.len();
        Ok(Self {
            c: config.c.clone(),
            inner,
            last_x: vec![0.0; n],
            last_scaled: vec![0.0; n],
        })
    }

    pub fn scales(&self) -> &[f64] {
        &self.c
    }

    pub fn inner(&self) -> &Constrained<CoordWise> {
        &self.inner
    }
}

impl Learner for MultiScale {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn predict(&mut self) -> Vec<f64> {
        let z = self.inner.predict();
        self.last_x = z.iter().zip(&self.c).map(|(z, c)| z / c).collect();
        self.last_x.clone()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        check_dim(self.c.len(), grad.len())?;
        if let Some(i) = grad
            .iter()
            .zip(&self.c)
            .position(|(g, c)| !(g.abs() <= c + 1e-12))
        {
            return Err(OloError::Precondition(format!(
                "expert {i}: |g| = {} exceeds its scale {}",
                grad[i].abs(),
                self.c[i]
            )));
        }
        self.last_scaled = grad.iter().zip(&self.c).map(|(g, c)| g / c).collect();
        self.inner.update(&self.last_scaled)
    }

    fn probe(&self) -> Probe {
        let mut p = self.inner.probe();
        p.scalar_grad = None;
        p
    }
}
