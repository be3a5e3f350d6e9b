//! Damped Newton-Raphson for small smooth log-likelihoods.

use super::{ErrorCode, FitError, FitSettings};

/// Log-likelihood with gradient and Hessian (row-major, `k * k`).
pub(crate) struct Eval {
    pub loglik: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

#[derive(Debug)]
pub(crate) struct Maximum {
    pub params: Vec<f64>,
    /// Inverse of the observed information at `params`.
    pub covariance: Vec<f64>,
}

const MAX_HALVINGS: usize = 20;

/// Cholesky factor of a symmetric positive-definite matrix, `None` otherwise.
fn cholesky(a: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut sum = a[i * k + j];
            for p in 0..j {
                sum -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i * k + i] = sum.sqrt();
            } else {
                l[i * k + j] = sum / l[j * k + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], k: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut sum = b[i];
        for p in 0..i {
            sum -= l[i * k + p] * y[p];
        }
        y[i] = sum / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut sum = y[i];
        for p in i + 1..k {
            sum -= l[p * k + i] * x[p];
        }
        x[i] = sum / l[i * k + i];
    }
    x
}

/// Inverse of a symmetric positive-definite matrix.
pub(crate) fn spd_inverse(a: &[f64], k: usize) -> Option<Vec<f64>> {
    let l = cholesky(a, k)?;
    let mut inv = vec![0.0; k * k];
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let col = cholesky_solve(&l, k, &e);
        for i in 0..k {
            inv[i * k + j] = col[i];
        }
    }
    Some(inv)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes `f` from `start`, halving steps that lower the log-likelihood.
///
/// Converged means the gradient max-norm fell below `settings.tolerance`
/// within `settings.max_iter` Newton steps.
pub(crate) fn maximize<F>(start: Vec<f64>, settings: &FitSettings, f: F) -> Result<Maximum, FitError>
where
    F: Fn(&[f64]) -> Option<Eval>,
{
    let k = start.len();
    let mut params = start;
    let mut cur = f(&params)
        .ok_or_else(|| FitError::new(ErrorCode::Numeric, "non-finite log-likelihood at start"))?;

    for _ in 0..=settings.max_iter {
        if max_abs(&cur.grad) < settings.tolerance {
            let info: Vec<f64> = cur.hess.iter().map(|h| -h).collect();
            let covariance = spd_inverse(&info, k).ok_or_else(|| {
                FitError::new(ErrorCode::Numeric, "observed information not positive definite")
            })?;
            return Ok(Maximum { params, covariance });
        }

        // Newton direction on the negated Hessian, ridged until positive definite.
        let mut info: Vec<f64> = cur.hess.iter().map(|h| -h).collect();
        let scale = (0..k).map(|i| info[i * k + i].abs()).fold(1e-8, f64::max);
        let mut ridge = 0.0;
        let factor = loop {
            if let Some(l) = cholesky(&info, k) {
                break l;
            }
            ridge = if ridge == 0.0 { 1e-6 * scale } else { ridge * 10.0 };
            if ridge > 1e12 * scale {
                return Err(FitError::new(ErrorCode::Numeric, "cannot regularize information"));
            }
            for i in 0..k {
                info[i * k + i] = -cur.hess[i * k + i] + ridge;
            }
        };
        let step = cholesky_solve(&factor, k, &cur.grad);

        let slack = 1e-12 * (1.0 + cur.loglik.abs());
        let mut scale_step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = params.iter().zip(&step).map(|(p, s)| p + scale_step * s).collect();
            if let Some(e) = f(&trial) {
                if e.loglik >= cur.loglik - slack {
                    accepted = Some((trial, e));
                    break;
                }
            }
            scale_step *= 0.5;
        }
        match accepted {
            Some((p, e)) => {
                params = p;
                cur = e;
            }
            None => {
                return Err(FitError::new(
                    ErrorCode::Nonconvergence,
                    "step halving failed to increase the log-likelihood",
                ))
            }
        }
    }
    Err(FitError::new(
        ErrorCode::Nonconvergence,
        format!("gradient above {} after {} iterations", settings.tolerance, settings.max_iter),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_known_matrix() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let inv = spd_inverse(&a, 2).unwrap();
        let det = 8.0;
        let expect = [3.0 / det, -2.0 / det, -2.0 / det, 4.0 / det];
        for (x, y) in inv.iter().zip(expect) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(spd_inverse(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn maximizes_concave_quadratic() {
        // loglik = -(x-1)^2 - 2(y+3)^2 - x y
        let f = |p: &[f64]| {
            let (x, y) = (p[0], p[1]);
            Some(Eval {
                loglik: -(x - 1.0).powi(2) - 2.0 * (y + 3.0).powi(2) - x * y,
                grad: vec![-2.0 * (x - 1.0) - y, -4.0 * (y + 3.0) - x],
                hess: vec![-2.0, -1.0, -1.0, -4.0],
            })
        };
        let m = maximize(vec![10.0, 10.0], &FitSettings::default(), f).unwrap();
        // Solve 2x + y = 2, x + 4y = -12.
        assert!((m.params[0] - 20.0 / 7.0).abs() < 1e-12);
        assert!((m.params[1] - (-26.0 / 7.0)).abs() < 1e-12);
    }

    #[test]
    fn unbounded_likelihood_does_not_converge() {
        let f = |p: &[f64]| {
            Some(Eval {
                loglik: p[0],
                grad: vec![1.0],
                hess: vec![0.0],
            })
        };
        let err = maximize(vec![0.0], &FitSettings::default(), f).unwrap_err();
        assert_eq!(err.code, ErrorCode::Nonconvergence);
    }
}
