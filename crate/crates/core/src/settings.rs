use serde::{Deserialize, Serialize};

/// Tolerances and iteration limits shared by every numeric routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericSettings {
    /// Absolute slack for feasibility and identity checks.
    pub tol: f64,
    /// Slack on gradient-bound preconditions (`‖g‖⋆ ≤ 1 + grad_tol`).
    pub grad_tol: f64,
    /// Target accuracy of the radius constraint in the metric projection.
    pub projection_tol: f64,
    /// Iteration cap of the bisection solvers.
    pub max_iter: usize,
    /// Iteration cap of the projected-gradient solver used for p-norm balls.
    pub pgd_max_iter: usize,
    /// Stop the projected-gradient solver once an iteration improves the
    /// objective by less than this.
    pub pgd_improvement_tol: f64,
    /// Full re-inversion period of the maintained ONS inverse.
    pub recondition_every: usize,
    /// Allowed max-abs residual of `A·A⁻¹ − I`.
    pub inverse_residual_tol: f64,
    /// Smallest admissible `1 − ⟨g, v⟩` in the betting updates.
    pub min_denominator: f64,
}

impl Default for NumericSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            grad_tol: 1e-12,
            projection_tol: 1e-10,
            max_iter: 200,
            pgd_max_iter: 10_000,
            pgd_improvement_tol: 1e-12,
            recondition_every: 512,
            inverse_residual_tol: 1e-6,
            min_denominator: 0.25,
        }
    }
}
