//! Projections onto norm balls, in the Euclidean metric and in the metric
//! induced by a symmetric positive-definite operator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, OloError, Result};
use crate::settings::NumericSettings;
use crate::spaces::{lp_norm, norm, NormKind, NormSpec};

/// `argmin_{‖y‖ ≤ radius} (y − x)ᵀ A (y − x)`.
///
/// Returns `x` unchanged when it is already feasible. In one dimension the
/// ball is an interval and the answer is exact clipping; for Hilbert norms
/// the minimizer is found by bisection on the Lagrange multiplier; other
/// norms fall back to projected gradient descent.
pub fn generalized_projection(
    x: &[f64],
    a: &DMatrix<f64>,
    radius: f64,
    spec: &NormSpec,
    settings: &NumericSettings,
) -> Result<Vec<f64>> {
    let d = spec.dim();
    check_dim(d, x.len())?;
    if a.nrows() != d || a.ncols() != d {
        return Err(OloError::DimensionMismatch {
            expected: d,
            got: a.nrows(),
        });
    }
    if !(radius > 0.0) {
        return Err(OloError::Config("projection radius must be positive".into()));
    }
    let nx = norm(x, spec)?;
    if nx <= radius {
        return Ok(x.to_vec());
    }
    if d == 1 {
        let half_width = radius / norm(&[1.0], spec)?;
        return Ok(vec![x[0].clamp(-half_width, half_width)]);
    }
    if spec.is_hilbert() {
        lagrangian_bisection(x, a, radius, settings)
    } else {
        projected_gradient(x, a, radius, spec, settings)
    }
}

/// Solves `y(μ) = (A + μI)⁻¹ A x` with `‖y(μ)‖₂ = radius` in the eigenbasis of `A`.
fn lagrangian_bisection(
    x: &[f64],
    a: &DMatrix<f64>,
    radius: f64,
    settings: &NumericSettings,
) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::new(a.clone());
    let lambdas = &eig.eigenvalues;
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(OloError::Numeric {
            message: "metric operator is not positive definite".into(),
            residual: lambdas.min(),
        });
    }
    let xhat = eig.eigenvectors.transpose() * DVector::from_column_slice(x);
    let radius_at = |mu: f64| -> f64 {
        lambdas
            .iter()
            .zip(xhat.iter())
            .map(|(l, c)| (l * c / (l + mu)).powi(2))
            .sum::<f64>()
            .sqrt()
    };

    let lmax = lambdas.max();
    let mut lo = 0.0;
    let mut hi = lmax * xhat.norm() / radius;
    let mut iterations = 0;
    while iterations < settings.max_iter && hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if radius_at(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mu = hi;
    let residual = (radius_at(mu) - radius).abs();
    if residual > settings.projection_tol {
        return Err(OloError::Numeric {
            message: format!("metric projection bisection did not converge in {iterations} iterations"),
            residual,
        });
    }
    let yhat = DVector::from_iterator(
        xhat.len(),
        lambdas.iter().zip(xhat.iter()).map(|(l, c)| l * c / (l + mu)),
    );
    let y = &eig.eigenvectors * yhat;
    // `hi` is on the feasible side; rescaling absorbs the last ulp
    let n = y.norm();
    let scale = if n > radius { radius / n } else { 1.0 };
    Ok(y.iter().map(|v| v * scale).collect())
}

fn projected_gradient(
    x: &[f64],
    a: &DMatrix<f64>,
    radius: f64,
    spec: &NormSpec,
    settings: &NumericSettings,
) -> Result<Vec<f64>> {
    let xv = DVector::from_column_slice(x);
    let objective = |y: &DVector<f64>| {
        let diff = y - &xv;
        diff.dot(&(a * &diff))
    };
    // radial shrink is feasible and a good warm start
    let nx = norm(x, spec)?;
    let mut y = DVector::from_iterator(x.len(), x.iter().map(|v| v * radius / nx));
    let mut f = objective(&y);
    // the gradient 2A(y − x) is 2λ_max-Lipschitz and λ_max ≤ ‖A‖_F
    let step = 1.0 / (2.0 * a.norm());
    let mut prev = y.clone();
    let mut momentum = 1.0f64;
    for _ in 0..settings.pgd_max_iter {
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let look = &y + (&y - &prev) * ((momentum - 1.0) / next_momentum);
        let trial = &look - (a * (&look - &xv)) * (2.0 * step);
        let cand = DVector::from_vec(euclidean_ball_projection(trial.as_slice(), radius, spec, settings)?);
        let f_cand = objective(&cand);
        if f_cand > f {
            if momentum == 1.0 {
                // a plain projected step cannot increase f; this is rounding
                return Ok(y.iter().copied().collect());
            }
            // adaptive restart
            prev = y.clone();
            momentum = 1.0;
            continue;
        }
        let improvement = f - f_cand;
        prev = std::mem::replace(&mut y, cand);
        f = f_cand;
        momentum = next_momentum;
        if improvement <= settings.pgd_improvement_tol * f.max(1.0) {
            return Ok(y.iter().copied().collect());
        }
    }
    Err(OloError::Numeric {
        message: format!(
            "projected gradient did not converge in {} iterations",
            settings.pgd_max_iter
        ),
        residual: f,
    })
}

/// Nearest point in the Euclidean sense on `{‖y‖_spec ≤ radius}`.
pub fn euclidean_ball_projection(
    x: &[f64],
    radius: f64,
    spec: &NormSpec,
    settings: &NumericSettings,
) -> Result<Vec<f64>> {
    if norm(x, spec)? <= radius {
        return Ok(x.to_vec());
    }
    match spec.kind() {
        NormKind::Euclidean => {
            let n = norm(x, spec)?;
            Ok(x.iter().map(|v| v * radius / n).collect())
        }
        NormKind::PNorm(p) if *p == 2.0 => {
            let n = norm(x, spec)?;
            Ok(x.iter().map(|v| v * radius / n).collect())
        }
        NormKind::PNorm(p) => Ok(lp_ball_projection(x, *p, radius, settings)),
        NormKind::L1 => Ok(l1_ball_projection(x, radius)),
        NormKind::WeightedLinf(c) => Ok(x
            .iter()
            .zip(c)
            .map(|(v, ci)| v.clamp(-radius * ci, radius * ci))
            .collect()),
    }
}

/// Sort-based projection onto the l1 ball.
fn l1_ball_projection(x: &[f64], radius: f64) -> Vec<f64> {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - radius) / (j as f64 + 1.0);
        if m - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.iter()
        .map(|v| v.signum() * (v.abs() - theta).max(0.0))
        .collect()
}

/// Euclidean projection onto the l_p ball: for a multiplier `λ` each
/// coordinate solves `y + λ y^{p−1} = |x_i|`, and `λ` is chosen by bisection
/// so the result lands on the sphere.
fn lp_ball_projection(x: &[f64], p: f64, radius: f64, settings: &NumericSettings) -> Vec<f64> {
    // safeguarded Newton on [0, a]
    let coord = |a: f64, lambda: f64| -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, a);
        let mut y = a / (1.0 + lambda * a.powf(p - 2.0));
        for _ in 0..settings.max_iter {
            let r = y + lambda * y.powf(p - 1.0) - a;
            if r == 0.0 {
                return y;
            }
            if r > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let slope = 1.0 + lambda * (p - 1.0) * y.powf(p - 2.0);
            let mut next = y - r / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= f64::EPSILON * y || hi - lo <= f64::EPSILON * hi {
                return next.min(hi);
            }
            y = next;
        }
        y
    };
    // Σ y_i^p and its derivative in λ, using dy/dλ = −y^{p−1} / (1 + λ(p−1)y^{p−2})
    let mass = |lambda: f64| -> (f64, f64) {
        x.iter().fold((0.0, 0.0), |(m, dm), v| {
            let y = coord(v.abs(), lambda);
            if y == 0.0 {
                return (m, dm);
            }
            let yp1 = y.powf(p - 1.0);
            let dy = -yp1 / (1.0 + lambda * (p - 1.0) * yp1 / y);
            (m + yp1 * y, dm + p * yp1 * dy)
        })
    };
    let target = radius.powf(p);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while mass(hi).0 > target {
        lo = hi;
        hi *= 2.0;
    }
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..settings.max_iter {
        let (m, dm) = mass(lambda);
        let r = m - target;
        if r > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let mut next = lambda - r / dm;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if r == 0.0 || (next - lambda).abs() <= f64::EPSILON * lambda || hi - lo <= f64::EPSILON * hi {
            lambda = next;
            break;
        }
        lambda = next;
    }
    let y: Vec<f64> = x.iter().map(|v| v.signum() * coord(v.abs(), lambda)).collect();
    let n = lp_norm(&y, p);
    if n > radius {
        y.iter().map(|v| v * radius / n).collect()
    } else {
        y
    }
}
