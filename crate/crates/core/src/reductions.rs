//! Black-box reductions: magnitude × direction, constrained domains, and
//! curvature adaptation.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, OloError, Result};
use crate::experts::ScaledSimplex;
use crate::learner::{Learner, Probe};
use crate::spaces::{dual_map, dual_norm, inner, norm, NormKind, NormSpec};

/// Below this distance a point counts as a member of the set.
const MEMBERSHIP_TOL: f64 = 1e-12;
const GRAD_TOL: f64 = 1e-12;

/// Closed convex domain with a canonical projection and a distance subgradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet {
    /// Centered ball of a Euclidean or p-norm space.
    NormBall { radius: f64, spec: NormSpec },
    /// `{x ≥ 0, Σ x_i / c_i = k}` measured in `l1`.
    ScaledSimplex(ScaledSimplex),
}

impl ConstraintSet {
    pub fn norm_ball(radius: f64, spec: NormSpec) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(OloError::Config(format!("ball radius must be positive, got {radius}")));
        }
        if !matches!(spec.kind(), NormKind::Euclidean | NormKind::PNorm(_)) {
            return Err(OloError::Unsupported(
                "norm-ball constraints need a euclidean or p-norm space".into(),
            ));
        }
        Ok(ConstraintSet::NormBall { radius, spec })
    }

    pub fn scaled_simplex(c: Vec<f64>, k: f64) -> Result<Self> {
        Ok(ConstraintSet::ScaledSimplex(ScaledSimplex::new(c, k)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::NormBall { spec, .. } => spec.dim(),
            ConstraintSet::ScaledSimplex(s) => s.dim(),
        }
    }

    /// The norm in which distances to the set are measured.
    pub fn spec(&self) -> NormSpec {
        match self {
            ConstraintSet::NormBall { spec, .. } => spec.clone(),
            ConstraintSet::ScaledSimplex(s) => {
                NormSpec::l1(s.dim()).expect("simplex dimension is positive")
            }
        }
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        match self {
            ConstraintSet::NormBall { radius, spec } => Ok((norm(x, spec)? - radius).max(0.0)),
            ConstraintSet::ScaledSimplex(s) => s.distance(x),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            ConstraintSet::NormBall { radius, spec } => {
                let n = norm(x, spec)?;
                Ok(if n > *radius {
                    x.iter().map(|v| v * radius / n).collect()
                } else {
                    x.to_vec()
                })
            }
            ConstraintSet::ScaledSimplex(s) => s.project(x),
        }
    }

    /// A subgradient of the distance function at `x`; zero inside the set.
    pub fn distance_subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        if self.distance(x)? <= MEMBERSHIP_TOL {
            return Ok(vec![0.0; x.len()]);
        }
        match self {
            ConstraintSet::NormBall { spec, .. } => {
                let p = self.project(x)?;
                let diff: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
                dual_map(&diff, spec)
            }
            ConstraintSet::ScaledSimplex(s) => s.distance_subgradient(x),
        }
    }
}

fn check_grad(grad: &[f64], spec: &NormSpec, bound: f64) -> Result<f64> {
    let gn = dual_norm(grad, spec)?;
    if !(gn <= bound + GRAD_TOL) {
        return Err(OloError::Precondition(format!(
            "gradient dual norm {gn} exceeds bound {bound}"
        )));
    }
    Ok(gn)
}

/// Plays `w = z·y` from a one-dimensional magnitude learner and a unit-ball
/// direction learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimFree<M, D> {
    magnitude: M,
    direction: D,
    spec: NormSpec,
    last_z: f64,
    last_y: Vec<f64>,
    last_s: f64,
    predicted: bool,
}

impl<M: Learner, D: Learner> DimFree<M, D> {
    pub fn new(magnitude: M, direction: D, spec: NormSpec) -> Result<Self> {
        check_dim(1, magnitude.dim())?;
        check_dim(spec.dim(), direction.dim())?;
        Ok(Self {
            last_y: vec![0.0; spec.dim()],
            magnitude,
            direction,
            spec,
            last_z: 0.0,
            last_s: 0.0,
            predicted: false,
        })
    }

    pub fn magnitude(&self) -> &M {
        &self.magnitude
    }

    pub fn direction(&self) -> &D {
        &self.direction
    }

    pub fn last_magnitude(&self) -> f64 {
        self.last_z
    }

    pub fn last_direction(&self) -> &[f64] {
        &self.last_y
    }

    pub fn last_scalar_grad(&self) -> f64 {
        self.last_s
    }
}

impl<M: Learner, D: Learner> Learner for DimFree<M, D> {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn predict(&mut self) -> Vec<f64> {
        self.last_z = self.magnitude.predict()[0];
        self.last_y = self.direction.predict();
        self.predicted = true;
        self.last_y.iter().map(|y| self.last_z * y).collect()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        check_dim(self.spec.dim(), grad.len())?;
        let gn = check_grad(grad, &self.spec, 1.0)?;
        if !self.predicted {
            self.predict();
        }
        let s = inner(grad, &self.last_y);
        if s.abs() > gn + 1e-9 {
            return Err(OloError::Numeric {
                message: "scalar gradient exceeds the gradient dual norm".into(),
                residual: s.abs() - gn,
            });
        }
        self.last_s = s;
        self.predicted = false;
        self.magnitude.update(&[s])?;
        self.direction.update(grad)
    }

    fn probe(&self) -> Probe {
        Probe {
            wealth: self.magnitude.probe().wealth,
            magnitude: Some(self.last_z),
            direction: Some(self.last_y.clone()),
            scalar_grad: Some(self.last_s),
            ..Probe::default()
        }
    }
}

/// Plays the projection of an unconstrained child's point onto a convex set
/// and feeds the child the surrogate gradient `½(g + ‖g‖⋆·∂S_W(z))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constrained<L> {
    child: L,
    constraint: ConstraintSet,
    spec: NormSpec,
    grad_bound: f64,
    last_z: Vec<f64>,
    last_w: Vec<f64>,
    last_surrogate: Vec<f64>,
    predicted: bool,
}

impl<L: Learner> Constrained<L> {
    pub fn new(child: L, constraint: ConstraintSet) -> Result<Self> {
        check_dim(constraint.dim(), child.dim())?;
        let d = constraint.dim();
        Ok(Self {
            child,
            spec: constraint.spec(),
            constraint,
            grad_bound: 1.0,
            last_z: vec![0.0; d],
            last_w: vec![0.0; d],
            last_surrogate: vec![0.0; d],
            predicted: false,
        })
    }

    /// Bound on `‖g‖⋆` enforced on incoming gradients.
    pub fn with_grad_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound > 0.0) {
            return Err(OloError::Config("gradient bound must be positive".into()));
        }
        self.grad_bound = bound;
        Ok(self)
    }

    pub fn child(&self) -> &L {
        &self.child
    }

    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    /// Child point `z_t` of the latest round.
    pub fn last_inner(&self) -> &[f64] {
        &self.last_z
    }

    /// Played point `w_t = Π(z_t)` of the latest round.
    pub fn last_projected(&self) -> &[f64] {
        &self.last_w
    }

    pub fn last_surrogate(&self) -> &[f64] {
        &self.last_surrogate
    }
}

impl<L: Learner> Learner for Constrained<L> {
    fn dim(&self) -> usize {
        self.constraint.dim()
    }

    fn predict(&mut self) -> Vec<f64> {
        self.last_z = self.child.predict();
        self.last_w = self
            .constraint
            .project(&self.last_z)
            .expect("child dimension checked at construction");
        self.predicted = true;
        self.last_w.clone()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        check_dim(self.constraint.dim(), grad.len())?;
        let gn = check_grad(grad, &self.spec, self.grad_bound)?;
        if !self.predicted {
            self.predict();
        }
        let sg = self.constraint.distance_subgradient(&self.last_z)?;
        self.last_surrogate = grad.iter().zip(&sg).map(|(g, s)| 0.5 * (g + gn * s)).collect();
        self.predicted = false;
        self.child.update(&self.last_surrogate)
    }

    fn probe(&self) -> Probe {
        Probe {
            wealth: self.child.probe().wealth,
            inner_point: Some(self.last_z.clone()),
            inner_grad: Some(self.last_surrogate.clone()),
            ..Probe::default()
        }
    }
}

/// Centers an unconstrained base learner at a running weighted average of
/// past plays, which yields logarithmic regret on strongly convex losses.
///
/// The surrogate `g + ‖g‖⋆·∂S_W(z)` can reach twice the incoming norm, so the
/// base learner receives it divided by `base_scale` (2 by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curvature<L> {
    base: L,
    constraint: ConstraintSet,
    spec: NormSpec,
    xbar0: Vec<f64>,
    xbar: Vec<f64>,
    weight_sum: f64,
    base_scale: f64,
    last_z: Vec<f64>,
    last_x: Vec<f64>,
    last_surrogate: Vec<f64>,
    predicted: bool,
}

impl<L: Learner> Curvature<L> {
    /// `xbar0` defaults to the projection of the origin.
    pub fn new(base: L, constraint: ConstraintSet, xbar0: Option<Vec<f64>>) -> Result<Self> {
        let d = constraint.dim();
        check_dim(d, base.dim())?;
        let xbar0 = match xbar0 {
            Some(x) => {
                check_dim(d, x.len())?;
                if !constraint.contains(&x, 1e-9)? {
                    return Err(OloError::Config("initial center must lie in the constraint set".into()));
                }
                x
            }
            None => constraint.project(&vec![0.0; d])?,
        };
        Ok(Self {
            base,
            spec: constraint.spec(),
            constraint,
            xbar: xbar0.clone(),
            xbar0,
            weight_sum: 1.0,
            base_scale: 2.0,
            last_z: vec![0.0; d],
            last_x: vec![0.0; d],
            last_surrogate: vec![0.0; d],
            predicted: false,
        })
    }

    pub fn base(&self) -> &L {
        &self.base
    }

    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    pub fn center(&self) -> &[f64] {
        &self.xbar
    }

    pub fn initial_center(&self) -> &[f64] {
        &self.xbar0
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn base_scale(&self) -> f64 {
        self.base_scale
    }
}

impl<L: Learner> Learner for Curvature<L> {
    fn dim(&self) -> usize {
        self.constraint.dim()
    }

    fn predict(&mut self) -> Vec<f64> {
        let w = self.base.predict();
        self.last_z = w.iter().zip(&self.xbar).map(|(a, b)| a + b).collect();
        self.last_x = self
            .constraint
            .project(&self.last_z)
            .expect("base dimension checked at construction");
        self.predicted = true;
        self.last_x.clone()
    }

    fn update(&mut self, grad: &[f64]) -> Result<()> {
        check_dim(self.constraint.dim(), grad.len())?;
        let gn = check_grad(grad, &self.spec, 1.0)?;
        if !self.predicted {
            self.predict();
        }
        let sg = self.constraint.distance_subgradient(&self.last_z)?;
        self.last_surrogate = grad.iter().zip(&sg).map(|(g, s)| g + gn * s).collect();
        let weight = dual_norm(&self.last_surrogate, &self.spec)?.powi(2);
        let total = self.weight_sum + weight;
        for (c, x) in self.xbar.iter_mut().zip(&self.last_x) {
            *c = (*c * self.weight_sum + weight * x) / total;
        }
        self.weight_sum = total;
        self.predicted = false;
        let scaled: Vec<f64> = self.last_surrogate.iter().map(|g| g / self.base_scale).collect();
        self.base.update(&scaled)
    }

    fn probe(&self) -> Probe {
        Probe {
            wealth: self.base.probe().wealth,
            inner_point: Some(self.last_z.clone()),
            inner_grad: Some(self.last_surrogate.clone()),
            ..Probe::default()
        }
    }
}
