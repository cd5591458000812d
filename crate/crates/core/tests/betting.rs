use olo_core::betting::{Coin1d, CoinBanach};
use olo_core::harness::rng::Stream;
use olo_core::{Learner, NormSpec};

/// `ε·exp(¼G²/(Σg² + |G|)) / exp(1/17 + 4.5·ln(1 + 4Σg²))`
fn closed_form_wealth_bound(eps: f64, grads: &[f64]) -> f64 {
    let g: f64 = grads.iter().sum();
    let sq: f64 = grads.iter().map(|v| v * v).sum();
    let gain = if sq + g.abs() == 0.0 { 0.0 } else { 0.25 * g * g / (sq + g.abs()) };
    eps * (gain - 1.0 / 17.0 - 4.5 * (1.0 + 4.0 * sq).ln()).exp()
}

#[test]
fn wealth_beats_closed_form_bound_on_rademacher_streams() {
    let mut stream = Stream::new(11);
    for _ in 0..100 {
        let grads: Vec<f64> = (0..1000).map(|_| stream.sign()).collect();
        let mut coin = Coin1d::new(1.0).unwrap();
        for &g in &grads {
            coin.predict_scalar();
            coin.update_scalar(g).unwrap();
        }
        assert!(coin.wealth() >= closed_form_wealth_bound(1.0, &grads));
    }
}

#[test]
fn biased_streams_grow_wealth() {
    let mut stream = Stream::new(12);
    let grads: Vec<f64> = (0..1000).map(|_| if stream.uniform() < 0.8 { -1.0 } else { 1.0 }).collect();
    let mut coin = Coin1d::new(1.0).unwrap();
    for &g in &grads {
        coin.predict_scalar();
        coin.update_scalar(g).unwrap();
    }
    let bound = closed_form_wealth_bound(1.0, &grads);
    assert!(bound > 1.0);
    assert!(coin.wealth() >= bound);
}

#[test]
fn banach_and_scalar_paths_agree_on_fractional_outcomes() {
    let mut stream = Stream::new(13);
    let mut one = Coin1d::new(2.5).unwrap();
    let mut many = CoinBanach::new(NormSpec::euclidean(1).unwrap(), 2.5).unwrap();
    for _ in 0..5000 {
        let g = stream.range(-1.0, 1.0);
        let a = one.predict_scalar();
        let b = many.predict()[0];
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        one.update_scalar(g).unwrap();
        many.update(&[g]).unwrap();
    }
}

#[test]
fn p_norm_fraction_stays_in_half_ball() {
    let spec = NormSpec::p_norm(1.5, 4).unwrap();
    let mut stream = Stream::new(14);
    let mut coin = CoinBanach::new(spec, 1.0).unwrap();
    for _ in 0..300 {
        let w = coin.predict();
        let v: Vec<f64> = w.iter().map(|x| x / coin.wealth()).collect();
        let n = v.iter().map(|x| x.abs().powf(1.5)).sum::<f64>().powf(1.0 / 1.5);
        assert!(n <= 0.5 + 1e-9, "fraction norm {n}");
        // dual exponent 3: scale so that ‖g‖_3 ≤ 1
        let g: Vec<f64> = (0..4).map(|_| stream.range(-1.0, 1.0) * 0.6).collect();
        coin.update(&g).unwrap();
    }
}
