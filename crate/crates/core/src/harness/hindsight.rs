//! Best fixed comparators in hindsight and the regret they induce.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, OloError, Result};
use crate::spaces::{dual_map_inverse, inner, NormSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparator {
    pub point: Vec<f64>,
    pub regret: f64,
}

/// Comparator families searched in hindsight.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Exhaustive scan of `lo, lo + step, ..., hi` in one dimension.
    Grid1d { lo: f64, hi: f64, step: f64 },
    /// Best point of the radius-`radius` ball for linear losses.
    UnitBallLinear { radius: f64 },
    /// Best standard basis vector.
    SimplexVertices,
    /// Minimizer of `Σ ½μ‖x − w*_t‖²`, i.e. the mean target.
    ScQuadratic { targets: Vec<Vec<f64>>, mu: f64 },
}

/// `Σ⟨g_t, w_t − u⟩`
pub fn linear_regret<'a, P, G>(plays: P, grads: G, u: &[f64]) -> f64
where
    P: IntoIterator<Item = &'a [f64]>,
    G: IntoIterator<Item = &'a [f64]>,
{
    plays
        .into_iter()
        .zip(grads)
        .map(|(w, g)| inner(g, w) - inner(g, u))
        .sum()
}

/// `Σ ½μ(‖x_t − w*_t‖² − ‖u − w*_t‖²)`
pub fn quadratic_regret<'a, P>(plays: P, targets: &[Vec<f64>], mu: f64, u: &[f64]) -> f64
where
    P: IntoIterator<Item = &'a [f64]>,
{
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    plays
        .into_iter()
        .zip(targets)
        .map(|(x, w)| 0.5 * mu * (sq(x, w) - sq(u, w)))
        .sum()
}

/// Minimizes `loss` over the grid `lo, lo + step, ..., hi`; returns `(argmin, min)`.
pub fn grid_scan_1d(lo: f64, hi: f64, step: f64, loss: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    if !(step > 0.0 && hi >= lo) {
        return Err(OloError::Config("grid needs step > 0 and hi ≥ lo".into()));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut best = (lo, loss(lo));
    for k in 1..=n {
        let u = lo + k as f64 * step;
        let v = loss(u);
        if v < best.1 {
            best = (u, v);
        }
    }
    Ok(best)
}

pub fn hindsight_comparator(
    plays: &[Vec<f64>],
    grads: &[Vec<f64>],
    family: &Family,
    spec: &NormSpec,
) -> Result<Comparator> {
    let d = spec.dim();
    let mut total = vec![0.0; d];
    for g in grads {
        check_dim(d, g.len())?;
        total.iter_mut().zip(g).for_each(|(s, v)| *s += v);
    }
    let regret_at = |u: &[f64]| linear_regret(plays.iter().map(Vec::as_slice), grads.iter().map(Vec::as_slice), u);
    let point = match family {
        Family::Grid1d { lo, hi, step } => {
            check_dim(1, d)?;
            vec![grid_scan_1d(*lo, *hi, *step, |u| total[0] * u)?.0]
        }
        Family::UnitBallLinear { radius } => {
            if total.iter().all(|&v| v == 0.0) {
                vec![0.0; d]
            } else {
                dual_map_inverse(&total, spec)?.into_iter().map(|v| -radius * v).collect()
            }
        }
        Family::SimplexVertices => {
            let best = (0..d).fold(0, |b, i| if total[i] < total[b] { i } else { b });
            let mut e = vec![0.0; d];
            e[best] = 1.0;
            e
        }
        Family::ScQuadratic { targets, mu } => {
            if targets.len() != plays.len() {
                return Err(OloError::Config("one quadratic target per round is required".into()));
            }
            let mut mean = vec![0.0; d];
            for w in targets {
                check_dim(d, w.len())?;
                mean.iter_mut().zip(w).for_each(|(m, v)| *m += v / targets.len() as f64);
            }
            let regret = quadratic_regret(plays.iter().map(Vec::as_slice), targets, *mu, &mean);
            return Ok(Comparator { point: mean, regret });
        }
    };
    Ok(Comparator { regret: regret_at(&point), point })
}
