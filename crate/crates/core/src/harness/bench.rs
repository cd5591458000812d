//! A fixed suite of runs reporting regret and wall time.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::adversary::AdversarySpec;
use super::hindsight::{hindsight_comparator, Family};
use super::{run, ExperimentConfig};
use crate::error::{OloError, Result};
use crate::recipe::Recipe;
use crate::spaces::NormSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub label: String,
    pub rounds: usize,
    /// Regret against the best point of the unit ball (or the best quadratic center).
    pub regret: f64,
    pub seconds: f64,
}

fn case(label: &str, preset: &str, adversary: &str, space: NormSpec, rounds: usize) -> Result<(String, ExperimentConfig)> {
    let adversary: AdversarySpec = adversary.parse()?;
    let recipe = Recipe::preset(preset, &space, adversary.scales())?;
    Ok((label.to_string(), ExperimentConfig::new(recipe, adversary, space, rounds, 1)))
}

/// The named suite's configurations, labelled. Betting learners face zero-mean
/// streams; on a persistent mean their wealth grows geometrically and overflows.
pub fn suite(name: &str) -> Result<Vec<(String, ExperimentConfig)>> {
    if name != "default" {
        return Err(OloError::Config(format!("unknown bench suite '{name}'")));
    }
    let e1 = NormSpec::euclidean(1)?;
    let e10 = NormSpec::euclidean(10)?;
    let p = NormSpec::p_norm(1.5, 10)?;
    let t = 10_000;
    vec![
        case("coin1d/rademacher", "coin1d", "rademacher", e1, t),
        case("coin-banach/rademacher/l2", "coin-banach", "rademacher", e10.clone(), t),
        case("coin-banach/rademacher/l1.5", "coin-banach", "rademacher", p.clone(), t),
        case("ball-ogd/drifting", "ball-ogd", "drifting", e10.clone(), t),
        case("ball-ftrl/drifting/l1.5", "ball-ftrl", "drifting", p.clone(), t),
        case("dimfree/rademacher", "dimfree", "rademacher", e10.clone(), t),
        case("constrained-ball/drifting", "constrained-ball", "drifting", e10, t),
        case("constrained-ball/drifting/l1.5", "constrained-ball", "drifting", p, t),
        case("curvature-ball/quadratic", "curvature-ball", "sc_quadratic:w_star=0.3,0.2;mu=1.0;noise=0.3", NormSpec::euclidean(2)?, t),
        case(
            "multiscale/adversarial",
            "multiscale",
            "multiscale_adversarial:c=1.0,10.0,100.0",
            NormSpec::euclidean(3)?,
            t,
        ),
    ]
    .into_iter()
    .collect()
}

/// Runs every configuration of the suite in order.
pub fn run_suite(name: &str) -> Result<Vec<BenchRow>> {
    suite(name)?
        .into_iter()
        .map(|(label, config)| {
            let rounds = config.rounds;
            let adversary = config.adversary.clone();
            let start = Instant::now();
            let trace = run(config)?;
            let seconds = start.elapsed().as_secs_f64();
            let plays: Vec<Vec<f64>> = trace.rounds.iter().map(|r| r.w.clone()).collect();
            let grads: Vec<Vec<f64>> = trace.rounds.iter().map(|r| r.g.clone()).collect();
            let family = match &adversary {
                AdversarySpec::ScQuadratic { mu, .. } => Family::ScQuadratic { targets: quadratic_targets(&trace, *mu), mu: *mu },
                AdversarySpec::MultiscaleAdversarial { .. } => Family::SimplexVertices,
                _ => Family::UnitBallLinear { radius: 1.0 },
            };
            let regret = hindsight_comparator(&plays, &grads, &family, &trace.header.space)?.regret;
            Ok(BenchRow { label, rounds, regret, seconds })
        })
        .collect()
}

/// Per-round quadratic centers recovered from `g_t = μ(w_t − w*_t)`.
pub fn quadratic_targets(trace: &super::trace::RunTrace, mu: f64) -> Vec<Vec<f64>> {
    trace
        .rounds
        .iter()
        .map(|r| r.w.iter().zip(&r.g).map(|(w, g)| w - g / mu).collect())
        .collect()
}

/// Plain-text table of bench rows.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = format!("{:<30} {:>8} {:>14} {:>10}\n", "run", "T", "regret", "seconds");
    for r in rows {
        out.push_str(&format!("{:<30} {:>8} {:>14.4} {:>10.4}\n", r.label, r.rounds, r.regret, r.seconds));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_builds() {
        let cases = suite("default").unwrap();
        assert_eq!(cases.len(), 10);
        assert!(suite("nope").is_err());
    }
}
