use super::newton::{maximize, Eval};
use super::{ErrorCode, Estimate, FitError, FitResult, FitSettings};
use crate::dgm::SurvivalDataset;

/// Full Weibull proportional-hazards fit, hazard `λ γ t^(γ-1) exp(x θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeibullFit {
    pub log_lambda: f64,
    pub log_gamma: f64,
    pub theta: f64,
    /// Inverse observed information over `(log_lambda, theta, log_gamma)`.
    pub covariance: [[f64; 3]; 3],
    pub estimate: Estimate,
}

/// Log-likelihood of the Weibull PH model at `(log_lambda, theta, log_gamma)`.
#[cfg(test)]
fn weibull_loglik(data: &SurvivalDataset, log_lambda: f64, theta: f64, log_gamma: f64) -> f64 {
    let gamma = log_gamma.exp();
    data.subjects
        .iter()
        .map(|s| {
            let lp = log_lambda + if s.treated { theta } else { 0.0 };
            let lt = s.time.ln();
            let cum = (lp + gamma * lt).exp();
            let log_h = if s.event { lp + log_gamma + (gamma - 1.0) * lt } else { 0.0 };
            log_h - cum
        })
        .sum()
}

fn evaluate(data: &SurvivalDataset, log_times: &[f64], p: &[f64]) -> Option<Eval> {
    let (a, theta, b) = (p[0], p[1], p[2]);
    let gamma = b.exp();
    let mut ll = 0.0;
    let (mut ga, mut gt, mut gb) = (0.0, 0.0, 0.0);
    let (mut haa, mut hat, mut hab, mut htt, mut htb, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (s, &lt) in data.subjects.iter().zip(log_times) {
        let x = if s.treated { 1.0 } else { 0.0 };
        let delta = if s.event { 1.0 } else { 0.0 };
        let glt = gamma * lt;
        let cum = (a + x * theta + glt).exp();
        ll += delta * (a + b + (gamma - 1.0) * lt + x * theta) - cum;
        ga += delta - cum;
        gt += x * (delta - cum);
        gb += delta * (1.0 + glt) - cum * glt;
        haa -= cum;
        hat -= x * cum;
        htt -= x * cum;
        hab -= cum * glt;
        htb -= x * cum * glt;
        hbb += delta * glt - cum * (glt + glt * glt);
    }
    if !ll.is_finite() || !gb.is_finite() || !hbb.is_finite() {
        return None;
    }
    Some(Eval {
        loglik: ll,
        grad: vec![ga, gt, gb],
        hess: vec![haa, hat, hab, hat, htt, htb, hab, htb, hbb],
    })
}

/// Newton-Raphson maximum likelihood for the Weibull PH model.
///
/// Starts from the exponential closed form with `log_gamma = 0`.
pub fn fit_weibull_model(data: &SurvivalDataset, settings: &FitSettings) -> Result<WeibullFit, FitError> {
    let [(d0, t0), (d1, t1)] = data.arm_totals();
    if d0 + d1 < 2 {
        return Err(FitError::new(
            ErrorCode::NoEvents,
            format!("{} events; the Weibull model needs at least 2", d0 + d1),
        ));
    }
    if d0 == 0 || d1 == 0 {
        return Err(FitError::new(ErrorCode::Separation, "all events fall in one arm"));
    }
    if data.subjects.iter().any(|s| !(s.time > 0.0 && s.time.is_finite())) {
        return Err(FitError::new(ErrorCode::Numeric, "Weibull fit needs positive finite times"));
    }
    let log_times: Vec<f64> = data.subjects.iter().map(|s| s.time.ln()).collect();
    let a0 = (d0 as f64 / t0).ln();
    let theta0 = (d1 as f64 / t1).ln() - a0;

    let max = maximize(vec![a0, theta0, 0.0], settings, |p| evaluate(data, &log_times, p))?;
    let c = &max.covariance;
    let covariance = [[c[0], c[1], c[2]], [c[3], c[4], c[5]], [c[6], c[7], c[8]]];
    let se = covariance[1][1].sqrt();
    if !(se > 0.0 && se.is_finite()) {
        return Err(FitError::new(ErrorCode::Numeric, "non-positive variance for theta"));
    }
    Ok(WeibullFit {
        log_lambda: max.params[0],
        theta: max.params[1],
        log_gamma: max.params[2],
        covariance,
        estimate: Estimate::wald(max.params[1], se, f64::INFINITY, settings),
    })
}

/// Weibull PH estimate of the log hazard ratio.
pub fn fit_weibull_ph(data: &SurvivalDataset, settings: &FitSettings) -> FitResult {
    fit_weibull_model(data, settings).map(|f| f.estimate)
}
