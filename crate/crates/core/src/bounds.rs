//! Closed-form regret and wealth guarantees, evaluated in the log domain.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, OloError, Result};
use crate::spaces::{dual_norm, inner, norm, NormSpec};

/// Gradient statistics of a run, enough to evaluate every bound for any comparator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub rounds: usize,
    pub spec: NormSpec,
    pub eps: f64,
    /// `Σ ‖g_t‖⋆²`
    pub grad_sq_sum: f64,
    /// `Σ g_t`
    pub grad_sum: Vec<f64>,
    /// `Σ g_t g_tᵀ`, so that `Σ⟨g_t, u⟩² = uᵀ M u` for any `u`.
    pub second_moment: DMatrix<f64>,
}

impl TraceStats {
    pub fn new(spec: NormSpec, eps: f64) -> Self {
        let d = spec.dim();
        Self {
            rounds: 0,
            spec,
            eps,
            grad_sq_sum: 0.0,
            grad_sum: vec![0.0; d],
            second_moment: DMatrix::zeros(d, d),
        }
    }

    pub fn from_gradients<'a, I>(spec: NormSpec, eps: f64, grads: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut s = Self::new(spec, eps);
        for g in grads {
            s.push(g)?;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn push(&mut self, g: &[f64]) -> Result<()> {
        check_dim(self.dim(), g.len())?;
        self.rounds += 1;
        self.grad_sq_sum += dual_norm(g, &self.spec)?.powi(2);
        self.grad_sum.iter_mut().zip(g).for_each(|(s, v)| *s += v);
        let gv = DVector::from_column_slice(g);
        self.second_moment.ger(1.0, &gv, &gv, 1.0);
        Ok(())
    }

    /// `Σ⟨g_t, u⟩²`
    pub fn alignment_sq_sum(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        let uv = DVector::from_column_slice(u);
        Ok((&self.second_moment * &uv).dot(&uv).max(0.0))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(OloError::Domain(format!("initial wealth must be positive, got {eps}")))
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Regret guarantee of the Banach-space coin bettor against `comparator`:
///
/// `ε + max{ d‖ẘ‖/2 − 8‖ẘ‖ + 8‖ẘ‖·ln[8‖ẘ‖(1+4S)^{4.5d}/ε],
///           2√(Σ⟨g,ẘ⟩²·ln(5‖ẘ‖²/ε²·(8S+2)^{9d+1} + 1)) }`, `S = Σ‖g‖⋆²`.
pub fn banach_regret_bound(stats: &TraceStats, comparator: &[f64]) -> Result<f64> {
    check_eps(stats.eps)?;
    let u = norm(comparator, &stats.spec)?;
    if u == 0.0 {
        return Ok(stats.eps);
    }
    let d = stats.dim() as f64;
    let s = stats.grad_sq_sum;
    let ln_eps = stats.eps.ln();
    let log_term = 8f64.ln() + u.ln() + 4.5 * d * (4.0 * s).ln_1p() - ln_eps;
    let first = d * u / 2.0 - 8.0 * u + 8.0 * u * log_term;
    let inside = 5f64.ln() + 2.0 * u.ln() - 2.0 * ln_eps + (9.0 * d + 1.0) * (8.0 * s + 2.0).ln();
    let second = 2.0 * (stats.alignment_sq_sum(comparator)? * softplus(inside)).sqrt();
    Ok(stats.eps + first.max(second))
}

/// Log-loss regret of ONS on the betting fractions: `d(1/17 + 4.5·ln(1 + 4S))`.
pub fn ons_logloss_bound(dim: usize, grad_sq_sum: f64) -> f64 {
    dim as f64 * (1.0 / 17.0 + 4.5 * (4.0 * grad_sq_sum).ln_1p())
}

/// Natural log of the wealth guarantee along a unit direction `u`:
/// `ln ε + ¼⟨G,u⟩²/(Σ⟨g,u⟩² + |⟨G,u⟩|) − d(1/17 + 4.5·ln(1+4S))`.
pub fn log_wealth_lower_bound(stats: &TraceStats, u: &[f64]) -> Result<f64> {
    check_eps(stats.eps)?;
    let gu = inner(&stats.grad_sum, u);
    let denom = stats.alignment_sq_sum(u)? + gu.abs();
    let gain = if denom == 0.0 { 0.0 } else { 0.25 * gu * gu / denom };
    Ok(stats.eps.ln() + gain - ons_logloss_bound(stats.dim(), stats.grad_sq_sum))
}

pub fn wealth_lower_bound(stats: &TraceStats, u: &[f64]) -> Result<f64> {
    Ok(log_wealth_lower_bound(stats, u)?.exp())
}

/// One round of a constrained reduction: the played point, the gradient, and
/// the child's point and surrogate gradient.
#[derive(Debug, Clone, Copy)]
pub struct ReductionRound<'a> {
    pub played: &'a [f64],
    pub grad: &'a [f64],
    pub inner_point: Option<&'a [f64]>,
    pub inner_grad: Option<&'a [f64]>,
}

/// `(Σ⟨g_t, w_t − ẘ⟩, 2·Σ⟨g̃_t, z_t − ẘ⟩)`; the reduction guarantees `lhs ≤ rhs`.
pub fn constrained_factor(rounds: &[ReductionRound<'_>], comparator: &[f64]) -> Result<(f64, f64)> {
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (t, r) in rounds.iter().enumerate() {
        let (z, gt) = match (r.inner_point, r.inner_grad) {
            (Some(z), Some(gt)) => (z, gt),
            _ => {
                return Err(OloError::Precondition(format!(
                    "round {} has no child point or surrogate gradient",
                    t + 1
                )))
            }
        };
        check_dim(comparator.len(), r.played.len())?;
        lhs += inner(r.grad, r.played) - inner(r.grad, comparator);
        rhs += 2.0 * (inner(gt, z) - inner(gt, comparator));
    }
    Ok((lhs, rhs))
}
