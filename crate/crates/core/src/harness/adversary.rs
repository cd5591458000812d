//! Gradient generators for experiments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rng::Stream;
use crate::error::{check_dim, OloError, Result};
use crate::spaces::{dual_norm, NormSpec};

/// Adversary selection as written on the command line: `name[:key=value;key=value]`,
/// vector values comma-separated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AdversarySpec {
    /// Independent `±1` coordinates, rescaled to dual norm `L`.
    Rademacher,
    /// The fixed gradient `L·u/‖u‖⋆`.
    ConstantDirection { u: Vec<f64> },
    /// A bounded random-walk mean plus uniform noise, clipped to dual norm `L`.
    Drifting { step: f64, noise: f64 },
    /// Subgradient `μ(x − w*_t)` of `½μ‖x − w*_t‖²` at the played point, with
    /// `w*_t = w* + noise·U[−1, 1]^d` drawn fresh each round.
    ScQuadratic {
        w_star: Vec<f64>,
        mu: f64,
        #[serde(default)]
        noise: f64,
    },
    /// Expert losses `c_i·s_i` with random signs, except that the expert
    /// holding the most weight always loses `+c_i`.
    MultiscaleAdversarial { c: Vec<f64> },
    Zero,
}

fn parse_vector(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| OloError::Config(format!("{key}: cannot parse '{v}' as a number")))
        })
        .collect()
}

fn parse_scalar(key: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| OloError::Config(format!("{key}: cannot parse '{text}' as a number")))
}

fn fmt_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl FromStr for AdversarySpec {
    type Err = OloError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p),
            None => (s.trim(), ""),
        };
        let mut pairs = Vec::new();
        for item in params.split(';').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| OloError::Config(format!("adversary parameter '{item}' is not key=value")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let take = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let require = |key: &str| {
            take(key).ok_or_else(|| OloError::Config(format!("adversary '{name}' needs parameter '{key}'")))
        };
        let known: &[&str] = match name {
            "rademacher" | "zero" => &[],
            "constant_direction" => &["u"],
            "drifting" => &["step", "noise"],
            "sc_quadratic" => &["w_star", "mu", "noise"],
            "multiscale_adversarial" => &["c"],
            other => return Err(OloError::Config(format!("unknown adversary '{other}'"))),
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(OloError::Config(format!("adversary '{name}' has no parameter '{k}'")));
        }
        Ok(match name {
            "rademacher" => AdversarySpec::Rademacher,
            "zero" => AdversarySpec::Zero,
            "constant_direction" => AdversarySpec::ConstantDirection {
                u: parse_vector("u", require("u")?)?,
            },
            "drifting" => AdversarySpec::Drifting {
                step: take("step").map(|v| parse_scalar("step", v)).transpose()?.unwrap_or(0.05),
                noise: take("noise").map(|v| parse_scalar("noise", v)).transpose()?.unwrap_or(0.5),
            },
            "sc_quadratic" => AdversarySpec::ScQuadratic {
                w_star: parse_vector("w_star", require("w_star")?)?,
                mu: take("mu").map(|v| parse_scalar("mu", v)).transpose()?.unwrap_or(1.0),
                noise: take("noise").map(|v| parse_scalar("noise", v)).transpose()?.unwrap_or(0.0),
            },
            _ => AdversarySpec::MultiscaleAdversarial {
                c: parse_vector("c", require("c")?)?,
            },
        })
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::Rademacher => write!(f, "rademacher"),
            AdversarySpec::Zero => write!(f, "zero"),
            AdversarySpec::ConstantDirection { u } => write!(f, "constant_direction:u={}", fmt_vector(u)),
            AdversarySpec::Drifting { step, noise } => write!(f, "drifting:step={step:?};noise={noise:?}"),
            AdversarySpec::ScQuadratic { w_star, mu, noise } => {
                write!(f, "sc_quadratic:w_star={};mu={mu:?}", fmt_vector(w_star))?;
                if *noise != 0.0 {
                    write!(f, ";noise={noise:?}")?;
                }
                Ok(())
            }
            AdversarySpec::MultiscaleAdversarial { c } => write!(f, "multiscale_adversarial:c={}", fmt_vector(c)),
        }
    }
}

impl AdversarySpec {
    /// Expert scales carried by the adversary, if it has any.
    pub fn scales(&self) -> Option<&[f64]> {
        match self {
            AdversarySpec::MultiscaleAdversarial { c } => Some(c),
            _ => None,
        }
    }
}

/// A running adversary: its description, random stream and internal state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adversary {
    spec: AdversarySpec,
    space: NormSpec,
    lipschitz: f64,
    stream: Stream,
    mean: Vec<f64>,
}

impl Adversary {
    pub fn new(spec: AdversarySpec, space: NormSpec, lipschitz: f64, stream: Stream) -> Result<Self> {
        let d = space.dim();
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(OloError::Config(format!("lipschitz constant must be positive, got {lipschitz}")));
        }
        match &spec {
            AdversarySpec::ConstantDirection { u } => {
                check_dim(d, u.len())?;
                if dual_norm(u, &space)? == 0.0 {
                    return Err(OloError::Config("constant direction must be nonzero".into()));
                }
            }
            AdversarySpec::ScQuadratic { w_star, mu, noise } => {
                check_dim(d, w_star.len())?;
                if !(*mu > 0.0) {
                    return Err(OloError::Config("mu must be positive".into()));
                }
                if !(*noise >= 0.0) {
                    return Err(OloError::Config("target noise must be nonnegative".into()));
                }
            }
            AdversarySpec::MultiscaleAdversarial { c } => {
                check_dim(d, c.len())?;
                if c.iter().any(|&ci| !(ci > 0.0)) {
                    return Err(OloError::Config("expert scales must be positive".into()));
                }
            }
            AdversarySpec::Drifting { step, noise } => {
                if !(*step >= 0.0 && *noise >= 0.0) {
                    return Err(OloError::Config("drift step and noise must be nonnegative".into()));
                }
            }
            AdversarySpec::Rademacher | AdversarySpec::Zero => {}
        }
        Ok(Self {
            spec,
            mean: vec![0.0; d],
            space,
            lipschitz,
            stream,
        })
    }

    pub fn spec(&self) -> &AdversarySpec {
        &self.spec
    }

    fn rescale_to(&self, g: Vec<f64>, target: f64) -> Result<Vec<f64>> {
        let n = dual_norm(&g, &self.space)?;
        if n == 0.0 {
            return Ok(g);
        }
        Ok(g.into_iter().map(|v| v * target / n).collect())
    }

    /// Raw gradient for the point just played.
    pub fn gradient(&mut self, played: &[f64]) -> Result<Vec<f64>> {
        let d = self.space.dim();
        check_dim(d, played.len())?;
        let l = self.lipschitz;
        match &self.spec {
            AdversarySpec::Zero => Ok(vec![0.0; d]),
            AdversarySpec::Rademacher => {
                let g: Vec<f64> = (0..d).map(|_| self.stream.sign()).collect();
                self.rescale_to(g, l)
            }
            AdversarySpec::ConstantDirection { u } => self.rescale_to(u.clone(), l),
            AdversarySpec::Drifting { step, noise } => {
                let (step, noise) = (*step, *noise);
                for m in self.mean.iter_mut() {
                    *m = (*m + step * self.stream.range(-1.0, 1.0)).clamp(-1.0, 1.0);
                }
                let g: Vec<f64> = self
                    .mean
                    .iter()
                    .map(|m| l * (m + noise * self.stream.range(-1.0, 1.0)))
                    .collect();
                let n = dual_norm(&g, &self.space)?;
                if n > l {
                    self.rescale_to(g, l)
                } else {
                    Ok(g)
                }
            }
            AdversarySpec::ScQuadratic { w_star, mu, noise } => {
                let (mu, noise) = (*mu, *noise);
                let target: Vec<f64> = if noise == 0.0 {
                    w_star.clone()
                } else {
                    let w_star = w_star.clone();
                    w_star.iter().map(|w| w + noise * self.stream.range(-1.0, 1.0)).collect()
                };
                let g: Vec<f64> = played.iter().zip(&target).map(|(x, w)| mu * (x - w)).collect();
                let n = dual_norm(&g, &self.space)?;
                if n > l + 1e-12 {
                    return Err(OloError::Precondition(format!(
                        "quadratic gradient norm {n} exceeds lipschitz constant {l}; shrink the domain or raise L"
                    )));
                }
                Ok(g)
            }
            AdversarySpec::MultiscaleAdversarial { c } => {
                let heaviest = played
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, &x)| if x > played[best] { i } else { best });
                let c = c.clone();
                Ok(c.iter()
                    .enumerate()
                    .map(|(i, ci)| if i == heaviest { *ci } else { ci * self.stream.sign() })
                    .collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        for text in [
            "rademacher",
            "zero",
            "constant_direction:u=1.0,-2.0",
            "drifting:step=0.1;noise=0.3",
            "sc_quadratic:w_star=0.3,0.2;mu=1.0",
            "sc_quadratic:w_star=0.3,0.2;mu=2.0;noise=0.25",
            "multiscale_adversarial:c=1.0,10.0",
        ] {
            let spec: AdversarySpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        let d: AdversarySpec = "drifting".parse().unwrap();
        assert_eq!(d, AdversarySpec::Drifting { step: 0.05, noise: 0.5 });
    }

    #[test]
    fn rejects_bad_specs() {
        assert!("gaussian".parse::<AdversarySpec>().is_err());
        assert!("constant_direction".parse::<AdversarySpec>().is_err());
        assert!("rademacher:x=1".parse::<AdversarySpec>().is_err());
        assert!("sc_quadratic:w_star=a".parse::<AdversarySpec>().is_err());
    }

    #[test]
    fn rademacher_is_centered_and_normalized() {
        let space = NormSpec::euclidean(1).unwrap();
        let mut a = Adversary::new(AdversarySpec::Rademacher, space, 1.0, Stream::new(1)).unwrap();
        let t = 100_000;
        let mut sum = 0.0;
        for _ in 0..t {
            let g = a.gradient(&[0.0]).unwrap();
            assert_eq!(g[0].abs(), 1.0);
            sum += g[0];
        }
        assert!((sum / t as f64).abs() <= 3.0 / (t as f64).sqrt());
        let space = NormSpec::p_norm(1.5, 4).unwrap();
        let mut a = Adversary::new(AdversarySpec::Rademacher, space.clone(), 2.0, Stream::new(1)).unwrap();
        let g = a.gradient(&[0.0; 4]).unwrap();
        assert!((dual_norm(&g, &space).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn drifting_respects_lipschitz() {
        let space = NormSpec::euclidean(3).unwrap();
        let spec = AdversarySpec::Drifting { step: 0.2, noise: 1.0 };
        let mut a = Adversary::new(spec, space.clone(), 0.5, Stream::new(9)).unwrap();
        for _ in 0..5000 {
            let g = a.gradient(&[0.0; 3]).unwrap();
            assert!(dual_norm(&g, &space).unwrap() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn quadratic_gradient_and_domain_error() {
        let space = NormSpec::euclidean(2).unwrap();
        let spec = AdversarySpec::ScQuadratic { w_star: vec![0.5, 0.0], mu: 1.0, noise: 0.0 };
        let mut a = Adversary::new(spec, space, 2.0, Stream::new(0)).unwrap();
        assert_eq!(a.gradient(&[1.0, 1.0]).unwrap(), vec![0.5, 1.0]);
        assert!(a.gradient(&[5.0, 0.0]).unwrap_err().is_precondition());
    }

    #[test]
    fn multiscale_penalizes_heaviest_expert() {
        let space = NormSpec::euclidean(3).unwrap();
        let spec = AdversarySpec::MultiscaleAdversarial { c: vec![1.0, 10.0, 100.0] };
        let mut a = Adversary::new(spec, space, 1.0, Stream::new(0)).unwrap();
        for _ in 0..100 {
            let g = a.gradient(&[0.2, 0.7, 0.1]).unwrap();
            assert_eq!(g[1], 10.0);
            assert_eq!(g[0].abs(), 1.0);
            assert_eq!(g[2].abs(), 100.0);
        }
    }
}
