//! Finite-dimensional normed spaces: norms, dual norms, duality maps and
//! uniform-convexity constants.
//!
//! Every space here is `R^d` with the coordinate pairing `⟨g, w⟩ = Σ g_i w_i`,
//! so the standard basis is an Auerbach basis and the ONS operator built
//! from it is the identity.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, OloError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    Euclidean,
    /// `‖x‖_p` with `p ∈ (1, ∞)`.
    PNorm(f64),
    L1,
    /// `‖x‖ = max_i |x_i| / c_i`, whose dual is `Σ c_i |g_i|`.
    WeightedLinf(Vec<f64>),
}

/// Descriptor of a finite-dimensional normed space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormSpecRepr", into = "NormSpecRepr")]
pub struct NormSpec {
    kind: NormKind,
    dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NormSpecRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scales: Option<Vec<f64>>,
    dim: usize,
}

impl TryFrom<NormSpecRepr> for NormSpec {
    type Error = OloError;

    fn try_from(r: NormSpecRepr) -> Result<Self> {
        match r.kind.as_str() {
            "euclidean" => NormSpec::euclidean(r.dim),
            "p_norm" => {
                let p = r
                    .p
                    .ok_or_else(|| OloError::Config("p_norm requires \"p\"".into()))?;
                NormSpec::p_norm(p, r.dim)
            }
            "l1" => NormSpec::l1(r.dim),
            "weighted_linf" => {
                let scales = r
                    .scales
                    .ok_or_else(|| OloError::Config("weighted_linf requires \"scales\"".into()))?;
                if scales.len() != r.dim {
                    return Err(OloError::Config(format!(
                        "weighted_linf: {} scales for dim {}",
                        scales.len(),
                        r.dim
                    )));
                }
                NormSpec::weighted_linf(scales)
            }
            other => Err(OloError::Config(format!("unknown norm kind {other:?}"))),
        }
    }
}

impl From<NormSpec> for NormSpecRepr {
    fn from(s: NormSpec) -> Self {
        let (kind, p, scales) = match s.kind {
            NormKind::Euclidean => ("euclidean", None, None),
            NormKind::PNorm(p) => ("p_norm", Some(p), None),
            NormKind::L1 => ("l1", None, None),
            NormKind::WeightedLinf(c) => ("weighted_linf", None, Some(c)),
        };
        NormSpecRepr {
            kind: kind.to_string(),
            p,
            scales,
            dim: s.dim,
        }
    }
}

fn check_positive_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(OloError::Config("dimension must be positive".into()))
    } else {
        Ok(())
    }
}

impl NormSpec {
    pub fn euclidean(dim: usize) -> Result<Self> {
        check_positive_dim(dim)?;
        Ok(Self {
            kind: NormKind::Euclidean,
            dim,
        })
    }

    pub fn p_norm(p: f64, dim: usize) -> Result<Self> {
        check_positive_dim(dim)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(OloError::Config(format!("p-norm exponent must lie in (1, ∞), got {p}")));
        }
        Ok(Self {
            kind: NormKind::PNorm(p),
            dim,
        })
    }

    pub fn l1(dim: usize) -> Result<Self> {
        check_positive_dim(dim)?;
        Ok(Self {
            kind: NormKind::L1,
            dim,
        })
    }

    pub fn weighted_linf(scales: Vec<f64>) -> Result<Self> {
        check_positive_dim(scales.len())?;
        if scales.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(OloError::Config("weighted_linf scales must be positive".into()));
        }
        Ok(Self {
            dim: scales.len(),
            kind: NormKind::WeightedLinf(scales),
        })
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same norm family in another dimension. Weighted norms keep their
    /// scales and therefore only accept their own dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        match &self.kind {
            NormKind::Euclidean => Self::euclidean(dim),
            NormKind::PNorm(p) => Self::p_norm(*p, dim),
            NormKind::L1 => Self::l1(dim),
            NormKind::WeightedLinf(_) => {
                check_dim(self.dim, dim)?;
                Ok(self.clone())
            }
        }
    }

    /// Hölder conjugate of the primal exponent (`∞` is reported as `f64::INFINITY`).
    pub fn dual_exponent(&self) -> f64 {
        match self.kind {
            NormKind::Euclidean => 2.0,
            NormKind::PNorm(p) => p / (p - 1.0),
            NormKind::L1 => f64::INFINITY,
            NormKind::WeightedLinf(_) => 1.0,
        }
    }

    /// Euclidean, or a p-norm with exponent exactly 2.
    pub fn is_hilbert(&self) -> bool {
        match self.kind {
            NormKind::Euclidean => true,
            NormKind::PNorm(p) => p == 2.0,
            _ => false,
        }
    }
}

pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn two_norm(x: &[f64]) -> f64 {
    // hypot-style scaling keeps huge and tiny entries representable
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return two_norm(x);
    }
    if p.is_infinite() {
        return x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    }
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `‖x‖` in the primal norm of `spec`.
pub fn norm(x: &[f64], spec: &NormSpec) -> Result<f64> {
    check_dim(spec.dim, x.len())?;
    Ok(match &spec.kind {
        NormKind::Euclidean => two_norm(x),
        NormKind::PNorm(p) => lp_norm(x, *p),
        NormKind::L1 => x.iter().map(|v| v.abs()).sum(),
        NormKind::WeightedLinf(c) => x
            .iter()
            .zip(c)
            .fold(0.0_f64, |m, (v, ci)| m.max(v.abs() / ci)),
    })
}

/// `‖g‖⋆ = sup_{‖x‖ ≤ 1} ⟨g, x⟩`.
pub fn dual_norm(g: &[f64], spec: &NormSpec) -> Result<f64> {
    check_dim(spec.dim, g.len())?;
    Ok(match &spec.kind {
        NormKind::Euclidean => two_norm(g),
        NormKind::PNorm(_) => lp_norm(g, spec.dual_exponent()),
        NormKind::L1 => g.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        NormKind::WeightedLinf(c) => g.iter().zip(c).map(|(v, ci)| ci * v.abs()).sum(),
    })
}

/// The unit dual vector `x⋆` with `⟨x⋆, x⟩ = ‖x‖`.
///
/// Only defined where it is unique: Euclidean and p-norm spaces, `x ≠ 0`.
pub fn dual_map(x: &[f64], spec: &NormSpec) -> Result<Vec<f64>> {
    check_dim(spec.dim, x.len())?;
    if x.iter().all(|&v| v == 0.0) {
        return Err(OloError::Domain("duality map of the zero vector".into()));
    }
    match spec.kind {
        NormKind::Euclidean => {
            let n = two_norm(x);
            Ok(x.iter().map(|v| v / n).collect())
        }
        NormKind::PNorm(p) => {
            let n = lp_norm(x, p);
            Ok(x
                .iter()
                .map(|&v| v.signum() * (v.abs() / n).powf(p - 1.0))
                .collect())
        }
        _ => Err(OloError::Unsupported(
            "duality map is only unique for euclidean and p-norm spaces".into(),
        )),
    }
}

/// Inverse duality map: the unit primal vector `u` with `⟨θ, u⟩ = ‖θ‖⋆`.
pub fn dual_map_inverse(theta: &[f64], spec: &NormSpec) -> Result<Vec<f64>> {
    match spec.kind {
        NormKind::Euclidean => dual_map(theta, spec),
        NormKind::PNorm(p) => {
            let q = p / (p - 1.0);
            let dual = NormSpec::p_norm(q, spec.dim)?;
            dual_map(theta, &dual)
        }
        _ => Err(OloError::Unsupported(
            "inverse duality map is only implemented for euclidean and p-norm spaces".into(),
        )),
    }
}

/// `λ` such that `½‖·‖²` is `(2, λ)`-uniformly convex.
pub fn convexity_constant(spec: &NormSpec) -> Result<f64> {
    match spec.kind {
        NormKind::Euclidean => Ok(1.0),
        NormKind::PNorm(p) if p <= 2.0 => Ok(p - 1.0),
        NormKind::PNorm(p) => Err(OloError::Unsupported(format!(
            "no (2, λ) uniform convexity for p = {p} > 2"
        ))),
        _ => Err(OloError::Unsupported(
            "uniform convexity constant needs a euclidean or p-norm space with p ≤ 2".into(),
        )),
    }
}
