use olo_core::recipe::Recipe;
use olo_core::reductions::{ConstraintSet, Constrained, Curvature};
use olo_core::spaces::{dual_norm, norm};
use olo_core::{Learner, NormSpec};
use proptest::prelude::*;

fn gradient_stream(d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 1..60)
}

fn unit_dual(g: &[f64], spec: &NormSpec) -> Vec<f64> {
    let n = dual_norm(g, spec).unwrap();
    if n > 1.0 {
        g.iter().map(|v| v / n).collect()
    } else {
        g.to_vec()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constrained_plays_stay_in_the_ball(grads in gradient_stream(3), radius in 0.2f64..3.0, p in 1.3f64..2.0) {
        let spec = NormSpec::p_norm(p, 3).unwrap();
        let child = Recipe::preset("dimfree", &spec, None).unwrap().build(&spec, 1.0).unwrap();
        let set = ConstraintSet::norm_ball(radius, spec.clone()).unwrap();
        let mut l = Constrained::new(child, set).unwrap();
        for g in &grads {
            let g = unit_dual(g, &spec);
            let w = l.predict();
            prop_assert!(norm(&w, &spec).unwrap() <= radius + 1e-9);
            l.update(&g).unwrap();
            let surrogate = l.last_surrogate().to_vec();
            prop_assert!(dual_norm(&surrogate, &spec).unwrap() <= dual_norm(&g, &spec).unwrap() + 1e-9);
        }
    }

    #[test]
    fn constrained_plays_stay_in_the_simplex(grads in gradient_stream(3), c in prop::collection::vec(0.1f64..10.0, 3)) {
        let spec = NormSpec::l1(3).unwrap();
        let child = Recipe::Coordwise { eps: None, pi: None }.build(&spec, 1.0).unwrap();
        let set = ConstraintSet::scaled_simplex(c.clone(), 1.0).unwrap();
        let mut l = Constrained::new(child, set.clone()).unwrap();
        for g in &grads {
            let g = unit_dual(g, &spec);
            let w = l.predict();
            prop_assert!(set.contains(&w, 1e-9).unwrap());
            l.update(&g).unwrap();
            prop_assert!(dual_norm(l.last_surrogate(), &spec).unwrap() <= dual_norm(&g, &spec).unwrap() + 1e-9);
        }
    }

    #[test]
    fn curvature_plays_stay_in_the_ball(grads in gradient_stream(2)) {
        let spec = NormSpec::euclidean(2).unwrap();
        let base = Recipe::preset("dimfree", &spec, None).unwrap().build(&spec, 1.0).unwrap();
        let set = ConstraintSet::norm_ball(1.0, spec.clone()).unwrap();
        let mut l = Curvature::new(base, set, None).unwrap();
        for g in &grads {
            let w = l.predict();
            prop_assert!(norm(&w, &spec).unwrap() <= 1.0 + 1e-9);
            l.update(&unit_dual(g, &spec)).unwrap();
        }
    }
}
