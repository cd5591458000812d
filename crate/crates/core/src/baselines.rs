//! Unit-ball learners with adaptive step sizes, used as direction learners.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, OloError, Result};
use crate::learner::Learner;
use crate::spaces::{convexity_constant, dual_norm, lp_norm, norm, NormKind, NormSpec};

fn radial_shrink(w: &mut [f64], spec: &NormSpec) -> Result<()> {
    let n = norm(w, spec)?;
    if n > 1.0 {
        w.iter_mut().for_each(|x| *x /= n);
    }
    Ok(())
}

/// Projected online gradient descent on the Euclidean unit ball with
/// `η_t = 1/√(2 Σ_{i≤t} ‖g_i‖²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallOgd {
    spec: NormSpec,
    w: Vec<f64>,
    grad_sq_sum: f64,
}

impl BallOgd {
    pub fn new(spec: NormSpec) -> Result<Self> {
        if !spec.is_hilbert() {
            return Err(OloError::Unsupported("ball-ogd requires a euclidean space".into()));
        }
        Ok(Self {
            w: vec![0.0; spec.dim()],
            spec,
            grad_sq_sum: 0.0,
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.w
    }

    pub fn grad_sq_sum(&self) -> f64 {
        self.grad_sq_sum
    }
}

impl Learner for BallOgd {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn predict(&mut self) -> Vec<f64> {
        self.w.clone()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        check_dim(self.spec.dim(), grad.len())?;
        let gn = dual_norm(grad, &self.spec)?;
        self.grad_sq_sum += gn * gn;
        if self.grad_sq_sum == 0.0 {
            return Ok(());
        }
        let eta = 2f64.sqrt() / (2.0 * self.grad_sq_sum.sqrt());
        for (w, g) in self.w.iter_mut().zip(grad) {
            *w -= eta * g;
        }
        radial_shrink(&mut self.w, &self.spec)
    }
}

/// Follow-the-regularized-leader on the unit ball of an `l_p` space,
/// `p ∈ (1, 2]`, with regularizer `(√Σ‖g‖⋆² / √λ)·½‖w‖_p²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallFtrl {
    spec: NormSpec,
    w: Vec<f64>,
    grad_sq_sum: f64,
    sum_g: Vec<f64>,
    lambda: f64,
}

impl BallFtrl {
    pub fn new(spec: NormSpec) -> Result<Self> {
        match spec.kind() {
            NormKind::Euclidean => {}
            NormKind::PNorm(p) if *p > 1.0 && *p <= 2.0 => {}
            _ => {
                return Err(OloError::Unsupported(
                    "ball-ftrl needs a p-norm space with p in (1, 2]".into(),
                ))
            }
        }
        let d = spec.dim();
        Ok(Self {
            lambda: convexity_constant(&spec)?,
            spec,
            w: vec![0.0; d],
            grad_sq_sum: 0.0,
            sum_g: vec![0.0; d],
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.w
    }

    pub fn gradient_sum(&self) -> &[f64] {
        &self.sum_g
    }

    pub fn grad_sq_sum(&self) -> f64 {
        self.grad_sq_sum
    }

    /// `½‖w‖_p²` regularizer weight in front of the current objective.
    pub fn regularizer_weight(&self) -> f64 {
        self.grad_sq_sum.sqrt() / self.lambda.sqrt()
    }
}

impl Learner for BallFtrl {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn predict(&mut self) -> Vec<f64> {
        self.w.clone()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        check_dim(self.spec.dim(), grad.len())?;
        let gn = dual_norm(grad, &self.spec)?;
        self.grad_sq_sum += gn * gn;
        for (s, g) in self.sum_g.iter_mut().zip(grad) {
            *s += g;
        }
        let q = self.spec.dual_exponent();
        let sq = lp_norm(&self.sum_g, q);
        if sq == 0.0 || self.grad_sq_sum == 0.0 {
            self.w.iter_mut().for_each(|x| *x = 0.0);
            return Ok(());
        }
        let scale = self.lambda.sqrt() / self.grad_sq_sum.sqrt();
        let tail = sq.powf(2.0 - q);
        self.w = self
            .sum_g
            .iter()
            .map(|&s| -s.signum() * s.abs().powf(q - 1.0) * tail * scale)
            .collect();
        radial_shrink(&mut self.w, &self.spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::inner;

    fn signs(seed: u64, n: usize) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                if s & 1 == 0 { 1.0 } else { -1.0 }
            })
            .collect()
    }

    fn ftrl_objective(w: &[f64], s: &[f64], weight: f64, p: f64) -> f64 {
        inner(s, w) + weight * 0.5 * lp_norm(w, p).powi(2)
    }

    #[test]
    fn ogd_zero_gradients_stay_put() {
        let mut l = BallOgd::new(NormSpec::euclidean(3).unwrap()).unwrap();
        for _ in 0..5 {
            l.update(&[0.0; 3]).unwrap();
        }
        assert_eq!(l.predict(), vec![0.0; 3]);
    }

    #[test]
    fn ogd_first_step() {
        let mut l = BallOgd::new(NormSpec::euclidean(2).unwrap()).unwrap();
        l.update(&[1.0, 0.0]).unwrap();
        let w = l.predict();
        assert!((w[0] + 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn ogd_rejects_non_euclidean() {
        assert!(BallOgd::new(NormSpec::p_norm(1.5, 2).unwrap()).is_err());
    }

    #[test]
    fn ogd_regret_against_best_unit_vector() {
        let d = 5;
        let t = 10_000;
        let coords = signs(77, d * t);
        let mut l = BallOgd::new(NormSpec::euclidean(d).unwrap()).unwrap();
        let mut loss = 0.0;
        let mut total = vec![0.0; d];
        let mut sq = 0.0;
        for (k, chunk) in coords.chunks(d).enumerate() {
            // a slowly rotating bias makes the stream non-trivial
            let g: Vec<f64> = chunk
                .iter()
                .enumerate()
                .map(|(i, c)| (c + if i == k % d { 0.5 } else { 0.0 }) / (d as f64 * 2.25).sqrt())
                .collect();
            let n = lp_norm(&g, 2.0);
            let g: Vec<f64> = g.iter().map(|x| x / n).collect();
            let w = l.predict();
            assert!(lp_norm(&w, 2.0) <= 1.0 + 1e-9);
            loss += inner(&g, &w);
            l.update(&g).unwrap();
            total.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            sq += 1.0;
        }
        let regret = loss + lp_norm(&total, 2.0);
        assert!(regret <= 3.0 * f64::sqrt(sq), "regret {regret}");
    }

    #[test]
    fn ftrl_zero_sum_gives_origin() {
        let mut l = BallFtrl::new(NormSpec::p_norm(1.5, 2).unwrap()).unwrap();
        l.update(&[1.0, 0.0]).unwrap();
        l.update(&[-1.0, 0.0]).unwrap();
        assert_eq!(l.predict(), vec![0.0, 0.0]);
    }

    #[test]
    fn ftrl_single_gradient_p15() {
        let mut l = BallFtrl::new(NormSpec::p_norm(1.5, 2).unwrap()).unwrap();
        l.update(&[1.0, 0.0]).unwrap();
        let w = l.predict();
        // ‖s‖_q = 1, Σ = 1, λ = ½: the minimizer sits at distance √λ along −e₁
        assert!((w[0] + 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn ftrl_p2_matches_numeric_minimizer() {
        let spec = NormSpec::euclidean(3).unwrap();
        for seed in 1..30u64 {
            let gs = signs(seed, 3 * 20);
            let mut l = BallFtrl::new(spec.clone()).unwrap();
            for (k, chunk) in gs.chunks(3).enumerate() {
                let g: Vec<f64> = chunk.iter().map(|x| x * (0.2 + 0.03 * k as f64) / 3f64.sqrt()).collect();
                l.update(&g).unwrap();
            }
            let weight = l.regularizer_weight();
            let s = l.gradient_sum().to_vec();
            // slow projected gradient descent as an independent minimizer
            let mut y = vec![0.0; 3];
            let step = 0.05 / weight;
            for _ in 0..20_000 {
                for i in 0..3 {
                    y[i] -= step * (s[i] + weight * y[i]);
                }
                let n = lp_norm(&y, 2.0);
                if n > 1.0 {
                    y.iter_mut().for_each(|v| *v /= n);
                }
            }
            let ours = ftrl_objective(l.point(), &s, weight, 2.0);
            let oracle = ftrl_objective(&y, &s, weight, 2.0);
            assert!((ours - oracle).abs() <= 1e-8, "seed {seed}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn ftrl_p15_beats_polar_grid() {
        let spec = NormSpec::p_norm(1.5, 2).unwrap();
        for seed in 3..13u64 {
            let gs = signs(seed, 2 * 15);
            let mut l = BallFtrl::new(spec.clone()).unwrap();
            for (k, chunk) in gs.chunks(2).enumerate() {
                let g = [chunk[0] * 0.4, chunk[1] * (0.1 + 0.02 * k as f64)];
                l.update(&g).unwrap();
            }
            let weight = l.regularizer_weight();
            let s = l.gradient_sum().to_vec();
            let ours = ftrl_objective(l.point(), &s, weight, 1.5);
            let mut best = f64::INFINITY;
            for a in 0..720 {
                let th = a as f64 * std::f64::consts::PI / 360.0;
                let dir = [th.cos(), th.sin()];
                let n = lp_norm(&dir, 1.5);
                for r in 0..=400 {
                    let rr = r as f64 / 400.0 / n;
                    let y = [dir[0] * rr, dir[1] * rr];
                    best = best.min(ftrl_objective(&y, &s, weight, 1.5));
                }
            }
            assert!(ours <= best + 1e-9, "seed {seed}: {ours} vs grid {best}");
            assert!(norm(l.point(), &spec).unwrap() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn ftrl_rejects_p_above_two() {
        assert!(BallFtrl::new(NormSpec::p_norm(3.0, 2).unwrap()).is_err());
        assert!(BallFtrl::new(NormSpec::l1(2).unwrap()).is_err());
    }
}
