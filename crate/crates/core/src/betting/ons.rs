//! Online Newton Step over a norm ball of a finite-dimensional space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::projection::generalized_projection;
use crate::error::{check_dim, OloError, Result};
use crate::settings::NumericSettings;
use crate::spaces::NormSpec;

/// Step-size and regularization parameters of ONS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnsConfig {
    pub beta: f64,
    pub tau: f64,
    pub radius: f64,
}

impl OnsConfig {
    pub fn new(beta: f64, tau: f64, radius: f64) -> Result<Self> {
        if !(beta > 0.0 && tau > 0.0 && radius > 0.0) {
            return Err(OloError::Config(format!(
                "ONS needs beta, tau, radius > 0 (got {beta}, {tau}, {radius})"
            )));
        }
        Ok(Self { beta, tau, radius })
    }

    /// Parameters used by coin betting: `β = (2 − ln 3)/2`, `τ = 1`, and the
    /// betting fraction confined to the radius-½ ball.
    pub fn coin_betting() -> Self {
        Self {
            beta: (2.0 - 3f64.ln()) / 2.0,
            tau: 1.0,
            radius: 0.5,
        }
    }

    /// Generic setting for `α`-exp-concave losses with gradients bounded by
    /// `grad_bound` on a ball of diameter `diameter`.
    pub fn exp_concave(alpha: f64, grad_bound: f64, diameter: f64) -> Result<Self> {
        if !(alpha > 0.0 && grad_bound > 0.0 && diameter > 0.0) {
            return Err(OloError::Config("exp-concave ONS parameters must be positive".into()));
        }
        let beta = 0.5 * (1.0 / (4.0 * grad_bound * diameter)).min(alpha);
        Self::new(beta, 1.0 / (beta * beta * diameter * diameter), diameter / 2.0)
    }
}

/// ONS iterate with `A = τI + Σ z zᵀ` and its maintained inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsState {
    spec: NormSpec,
    config: OnsConfig,
    v: Vec<f64>,
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    step_count: usize,
    #[serde(default)]
    settings: NumericSettings,
}

impl OnsState {
    pub fn new(spec: NormSpec, config: OnsConfig) -> Self {
        Self::with_settings(spec, config, NumericSettings::default())
    }

    pub fn with_settings(spec: NormSpec, config: OnsConfig, settings: NumericSettings) -> Self {
        let d = spec.dim();
        Self {
            v: vec![0.0; d],
            a: DMatrix::identity(d, d) * config.tau,
            a_inv: DMatrix::identity(d, d) / config.tau,
            step_count: 0,
            spec,
            config,
            settings,
        }
    }

    pub fn point(&self) -> &[f64] {
        &self.v
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn config(&self) -> &OnsConfig {
        &self.config
    }

    pub fn operator(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn settings(&self) -> &NumericSettings {
        &self.settings
    }

    /// One ONS step with loss gradient `z` at the current point:
    /// `A ← A + z zᵀ`, `v ← Π^A(v − A⁻¹ z / β)`.
    pub fn step(&mut self, z: &[f64]) -> Result<()> {
        check_dim(self.spec.dim(), z.len())?;
        if z.iter().any(|g| !g.is_finite()) {
            return Err(OloError::Precondition("non-finite ONS gradient".into()));
        }
        self.rank_one_update(z)?;
        let zv = DVector::from_column_slice(z);
        let direction = &self.a_inv * zv;
        let raw: Vec<f64> = self
            .v
            .iter()
            .zip(direction.iter())
            .map(|(v, s)| v - s / self.config.beta)
            .collect();
        self.v = generalized_projection(&raw, &self.a, self.config.radius, &self.spec, &self.settings)?;
        Ok(())
    }

    fn rank_one_update(&mut self, z: &[f64]) -> Result<()> {
        self.step_count += 1;
        if z.iter().all(|&g| g == 0.0) {
            return Ok(());
        }
        let zv = DVector::from_column_slice(z);
        self.a.ger(1.0, &zv, &zv, 1.0);
        let u = &self.a_inv * &zv;
        let denom = 1.0 + zv.dot(&u);
        self.a_inv.ger(-1.0 / denom, &u, &u, 1.0);

        let due = self.step_count.is_multiple_of(self.settings.recondition_every);
        if due || self.probe_residual(&zv) > self.settings.inverse_residual_tol {
            self.reinvert()?;
        }
        Ok(())
    }

    /// `‖A (A⁻¹ z) − z‖∞ / max(1, ‖z‖∞)`, an O(d²) drift indicator.
    fn probe_residual(&self, z: &DVector<f64>) -> f64 {
        let r = &self.a * (&self.a_inv * z) - z;
        r.amax() / z.amax().max(1.0)
    }

    fn reinvert(&mut self) -> Result<()> {
        let inv = self
            .a
            .clone()
            .cholesky()
            .ok_or_else(|| OloError::Numeric {
                message: "ONS operator lost positive definiteness".into(),
                residual: self.inverse_residual(),
            })?
            .inverse();
        // symmetrize
        self.a_inv = (&inv + inv.transpose()) * 0.5;
        Ok(())
    }

    /// Max-abs entry of `A·A⁻¹ − I`.
    pub fn inverse_residual(&self) -> f64 {
        let d = self.a.nrows();
        (&self.a * &self.a_inv - DMatrix::<f64>::identity(d, d)).amax()
    }
}
