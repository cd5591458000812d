//! Coin-betting learners driven by Online Newton Step.
//!
//! The learner bets a signed fraction `v_t` of its wealth, `w_t = v_t·Wealth_{t−1}`,
//! and picks the next fraction by running ONS on the exp-concave losses
//! `−ln(1 − ⟨g_t, v⟩)` over `{‖v‖ ≤ ½}`.

mod ons;
mod projection;

pub use ons::{OnsConfig, OnsState};
pub use projection::{euclidean_ball_projection, generalized_projection};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, OloError, Result};
use crate::learner::{Learner, Probe};
use crate::settings::NumericSettings;
use crate::spaces::{dual_norm, inner, NormSpec};

/// `1/β` for the betting ONS, `2 / (2 − ln 3)`.
pub fn betting_step_scale() -> f64 {
    2.0 / (2.0 - 3f64.ln())
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(OloError::Config(format!("initial wealth must be positive, got {eps}")))
    }
}

/// Wealth grows geometrically on persistent gradients and can leave the range of `f64`.
fn check_wealth(wealth: f64) -> Result<()> {
    if wealth.is_finite() {
        Ok(())
    } else {
        Err(OloError::Numeric { message: "wealth overflowed the floating-point range".into(), residual: wealth })
    }
}

/// One-dimensional coin betting with a scalar ONS accumulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coin1d {
    epsilon: f64,
    wealth: f64,
    v: f64,
    a: f64,
    last_w: f64,
    #[serde(default)]
    settings: NumericSettings,
}

impl Coin1d {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            wealth: epsilon,
            v: 0.0,
            a: 1.0,
            last_w: 0.0,
            settings: NumericSettings::default(),
        })
    }

    /// Builds a state directly from its fields, checking the invariants.
    pub fn from_parts(epsilon: f64, wealth: f64, v: f64, a: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(wealth > 0.0) || v.abs() > 0.5 || !(a >= 1.0) {
            return Err(OloError::Config(format!(
                "invalid betting state (wealth {wealth}, v {v}, A {a})"
            )));
        }
        Ok(Self {
            epsilon,
            wealth,
            v,
            a,
            last_w: v * wealth,
            settings: NumericSettings::default(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn wealth(&self) -> f64 {
        self.wealth
    }

    pub fn fraction(&self) -> f64 {
        self.v
    }

    pub fn accumulator(&self) -> f64 {
        self.a
    }

    pub fn last_prediction(&self) -> f64 {
        self.last_w
    }

    pub fn predict_scalar(&mut self) -> f64 {
        self.last_w = self.v * self.wealth;
        self.last_w
    }

    pub fn update_scalar(&mut self, g: f64) -> Result<()> {
        if !(g.abs() <= 1.0 + self.settings.grad_tol) {
            return Err(OloError::Precondition(format!("coin outcome |g| = {} exceeds 1", g.abs())));
        }
        let w = self.v * self.wealth;
        self.last_w = w;
        let denom = 1.0 - g * self.v;
        if denom < self.settings.min_denominator {
            return Err(OloError::Numeric {
                message: "betting denominator 1 − g·v too small".into(),
                residual: denom,
            });
        }
        let wealth = self.wealth - g * w;
        check_wealth(wealth)?;
        self.wealth = wealth;
        let z = g / denom;
        self.a += z * z;
        self.v = (self.v - betting_step_scale() * z / self.a).clamp(-0.5, 0.5);
        Ok(())
    }
}

impl Learner for Coin1d {
    fn dim(&self) -> usize {
        1
    }

    fn predict(&mut self) -> Vec<f64> {
        vec![self.predict_scalar()]
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        check_dim(1, grad.len())?;
        self.update_scalar(grad[0])
    }

    fn probe(&self) -> Probe {
        Probe {
            wealth: Some(self.wealth),
            ..Probe::default()
        }
    }
}

/// Coin betting in `R^d` under any supported norm, with a full-matrix ONS
/// choosing the betting fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinBanach {
    epsilon: f64,
    wealth: f64,
    last_w: Vec<f64>,
    ons: OnsState,
}

impl CoinBanach {
    pub fn new(spec: NormSpec, epsilon: f64) -> Result<Self> {
        Self::with_settings(spec, epsilon, NumericSettings::default())
    }

    pub fn with_settings(spec: NormSpec, epsilon: f64, settings: NumericSettings) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            wealth: epsilon,
            last_w: vec![0.0; spec.dim()],
            ons: OnsState::with_settings(spec, OnsConfig::coin_betting(), settings),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn wealth(&self) -> f64 {
        self.wealth
    }

    pub fn fraction(&self) -> &[f64] {
        self.ons.point()
    }

    pub fn ons(&self) -> &OnsState {
        &self.ons
    }

    pub fn step_count(&self) -> usize {
        self.ons.step_count()
    }
}

impl Learner for CoinBanach {
    fn dim(&self) -> usize {
        self.ons.spec().dim()
    }

    fn predict(&mut self) -> Vec<f64> {
        self.last_w = self.ons.point().iter().map(|v| v * self.wealth).collect();
        self.last_w.clone()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        let spec = self.ons.spec();
        check_dim(spec.dim(), grad.len())?;
        let settings = *self.ons.settings();
        let gn = dual_norm(grad, spec)?;
        if !(gn <= 1.0 + settings.grad_tol) {
            return Err(OloError::Precondition(format!("coin outcome ‖g‖⋆ = {gn} exceeds 1")));
        }
        let v = self.ons.point();
        let w: Vec<f64> = v.iter().map(|vi| vi * self.wealth).collect();
        let gv = inner(grad, v);
        let denom = 1.0 - gv;
        if denom < settings.min_denominator {
            return Err(OloError::Numeric {
                message: "betting denominator 1 − ⟨g, v⟩ too small".into(),
                residual: denom,
            });
        }
        let wealth = self.wealth - inner(grad, &w);
        check_wealth(wealth)?;
        self.wealth = wealth;
        self.last_w = w;
        let z: Vec<f64> = grad.iter().map(|g| g / denom).collect();
        self.ons.step(&z)
    }

    fn probe(&self) -> Probe {
        Probe {
            wealth: Some(self.wealth),
            ..Probe::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_stream(seed: u64, n: usize) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn predict_examples() {
        let mut c = Coin1d::new(1.0).unwrap();
        assert_eq!(c.predict_scalar(), 0.0);
        let mut c = Coin1d::from_parts(1.0, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(c.predict_scalar(), 1.0);
        assert_eq!(c.wealth(), 2.0);
        let mut c = Coin1d::from_parts(1.0, 1.0, -0.5, 1.0).unwrap();
        assert_eq!(c.predict_scalar(), -0.5);
    }

    #[test]
    fn zero_outcome_is_noop() {
        let mut c = Coin1d::new(1.0).unwrap();
        c.predict_scalar();
        c.update_scalar(0.0).unwrap();
        assert_eq!((c.wealth(), c.fraction(), c.accumulator()), (1.0, 0.0, 1.0));
    }

    #[test]
    fn first_round_half_outcome() {
        let mut c = Coin1d::new(1.0).unwrap();
        assert_eq!(c.predict_scalar(), 0.0);
        c.update_scalar(0.5).unwrap();
        assert_eq!(c.wealth(), 1.0);
        assert_eq!(c.accumulator(), 1.25);
        // raw step 0 − 2.2188·0.5/1.25 ≈ −0.8875 clips
        assert!((betting_step_scale() - 2.218801049600289).abs() < 1e-14);
        assert_eq!(c.fraction(), -0.5);
    }

    #[test]
    fn two_unit_outcomes() {
        let mut c = Coin1d::new(1.0).unwrap();
        c.predict_scalar();
        c.update_scalar(1.0).unwrap();
        assert_eq!(c.accumulator(), 2.0);
        assert_eq!(c.fraction(), -0.5);
        assert_eq!(c.predict_scalar(), -0.5);
        c.update_scalar(1.0).unwrap();
        assert_eq!(c.wealth(), 1.5);
    }

    #[test]
    fn oversized_outcome_rejected() {
        let mut c = Coin1d::new(1.0).unwrap();
        assert!(matches!(c.update_scalar(1.5), Err(OloError::Precondition(_))));
        assert!(c.update_scalar(1.0 + 1e-13).is_ok());
        assert!(Coin1d::new(0.0).is_err());
    }

    #[test]
    fn wealth_matches_product_of_factors() {
        let gs = lcg_stream(3, 5000);
        let mut c = Coin1d::new(0.7).unwrap();
        let mut prod = 0.7;
        let mut last_a = 1.0;
        for &g in &gs {
            let v = c.fraction();
            c.predict_scalar();
            c.update_scalar(g).unwrap();
            let factor = 1.0 - g * v;
            assert!((0.5..=1.5).contains(&factor));
            prod *= factor;
            assert!(c.wealth() > 0.0 && c.fraction().abs() <= 0.5);
            assert!(c.accumulator() >= last_a);
            last_a = c.accumulator();
        }
        assert!((c.wealth() - prod).abs() <= 1e-9 * prod);
    }

    #[test]
    fn banach_prediction_is_fraction_times_wealth() {
        let spec = NormSpec::euclidean(2).unwrap();
        let mut c = CoinBanach::new(spec, 1.0).unwrap();
        assert_eq!(c.predict(), vec![0.0, 0.0]);
        c.update(&[0.6, -0.3]).unwrap();
        let w = c.predict();
        for (wi, vi) in w.iter().zip(c.fraction()) {
            assert_eq!(*wi, vi * c.wealth());
        }
    }

    #[test]
    fn banach_zero_gradient_only_counts() {
        let spec = NormSpec::euclidean(3).unwrap();
        let mut c = CoinBanach::new(spec, 1.0).unwrap();
        let before = c.clone();
        c.predict();
        c.update(&[0.0; 3]).unwrap();
        assert_eq!(c.step_count(), 1);
        assert_eq!(c.wealth(), before.wealth());
        assert_eq!(c.fraction(), before.fraction());
        assert_eq!(c.ons().operator(), before.ons().operator());
    }

    #[test]
    fn banach_first_step_d2() {
        let spec = NormSpec::euclidean(2).unwrap();
        let mut c = CoinBanach::new(spec, 1.0).unwrap();
        c.predict();
        c.update(&[1.0, 0.0]).unwrap();
        let a = c.ons().operator();
        assert_eq!((a[(0, 0)], a[(1, 1)], a[(0, 1)]), (2.0, 1.0, 0.0));
        assert!((c.fraction()[0] + 0.5).abs() < 1e-10);
        assert!(c.fraction()[1].abs() < 1e-12);
    }

    #[test]
    fn banach_matches_1d_path() {
        let gs = lcg_stream(11, 1000);
        let mut one = Coin1d::new(1.0).unwrap();
        let mut many = CoinBanach::new(NormSpec::euclidean(1).unwrap(), 1.0).unwrap();
        for &g in &gs {
            let a = one.predict_scalar();
            let b = many.predict()[0];
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            one.update_scalar(g).unwrap();
            many.update(&[g]).unwrap();
            assert!((one.fraction() - many.fraction()[0]).abs() <= 1e-12);
            assert!((one.wealth() - many.wealth()).abs() <= 1e-12 * one.wealth());
        }
    }

    #[test]
    fn ons_step_reproduces_betting_fractions() {
        let gs = lcg_stream(5, 500);
        let mut coin = Coin1d::new(1.0).unwrap();
        let mut ons = OnsState::new(NormSpec::euclidean(1).unwrap(), OnsConfig::coin_betting());
        for &g in &gs {
            let v = ons.point()[0];
            assert!((v - coin.fraction()).abs() <= 1e-12);
            ons.step(&[g / (1.0 - g * v)]).unwrap();
            coin.predict_scalar();
            coin.update_scalar(g).unwrap();
        }
    }

    #[test]
    fn banach_rejects_large_dual_norm() {
        let spec = NormSpec::p_norm(1.5, 2).unwrap();
        let mut c = CoinBanach::new(spec, 1.0).unwrap();
        // ‖(1,1)‖_3 = 2^{1/3} > 1
        assert!(matches!(c.update(&[1.0, 1.0]), Err(OloError::Precondition(_))));
    }

    #[test]
    fn banach_p_norm_stays_feasible() {
        let spec = NormSpec::p_norm(1.5, 3).unwrap();
        let mut c = CoinBanach::new(spec.clone(), 1.0).unwrap();
        let gs = lcg_stream(9, 600);
        for chunk in gs.chunks(3).take(200) {
            let n = dual_norm(chunk, &spec).unwrap();
            let g: Vec<f64> = chunk.iter().map(|x| x / n.max(1.0)).collect();
            c.predict();
            c.update(&g).unwrap();
            assert!(crate::spaces::norm(c.fraction(), &spec).unwrap() <= 0.5 + 1e-9);
            assert!(c.wealth() > 0.0);
        }
    }

    #[test]
    fn wealth_overflow_is_reported() {
        let mut c = Coin1d::new(1.0).unwrap();
        let mut err = None;
        for _ in 0..5000 {
            c.predict_scalar();
            if let Err(e) = c.update_scalar(-1.0) {
                err = Some(e);
                break;
            }
        }
        assert!(matches!(err, Some(OloError::Numeric { .. })));
        assert!(c.wealth().is_finite());
    }

    #[test]
    fn log_loss_regret_within_ons_bound() {
        for seed in 0..5u64 {
            let gs = lcg_stream(100 + seed, 2000);
            let mut coin = Coin1d::new(1.0).unwrap();
            let mut loss = 0.0;
            for &g in &gs {
                loss -= (1.0 - g * coin.fraction()).ln();
                coin.predict_scalar();
                coin.update_scalar(g).unwrap();
            }
            let best = (0..=10_000)
                .map(|k| -0.5 + k as f64 * 1e-4)
                .map(|v| gs.iter().map(|g| -(1.0 - g * v).ln()).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let sq: f64 = gs.iter().map(|g| g * g).sum();
            let bound = 1.0 / 17.0 + 4.5 * (1.0 + 4.0 * sq).ln();
            assert!(loss - best <= bound, "seed {seed}: {} > {bound}", loss - best);
        }
    }
}
