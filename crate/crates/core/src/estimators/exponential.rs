use super::{ErrorCode, Estimate, FitError, FitResult, FitSettings};
use crate::dgm::SurvivalDataset;

/// Exponential proportional-hazards fit, in closed form.
///
/// With `d_a` events and `T_a` follow-up in arm `a`, the log hazard ratio is
/// `ln(d1/T1) - ln(d0/T0)` with SE `sqrt(1/d1 + 1/d0)`.
pub fn fit_exponential_ph(data: &SurvivalDataset, settings: &FitSettings) -> FitResult {
    let [(d0, t0), (d1, t1)] = data.arm_totals();
    if d0 == 0 || d1 == 0 {
        return Err(FitError::new(
            ErrorCode::NoEvents,
            format!("events per arm: control {d0}, treated {d1}"),
        ));
    }
    if !(t0 > 0.0 && t1 > 0.0 && t0.is_finite() && t1.is_finite()) {
        return Err(FitError::new(ErrorCode::Numeric, "non-positive total follow-up"));
    }
    let (d0, d1) = (d0 as f64, d1 as f64);
    let theta_hat = (d1 / t1).ln() - (d0 / t0).ln();
    let se = (1.0 / d1 + 1.0 / d0).sqrt();
    Ok(Estimate::wald(theta_hat, se, f64::INFINITY, settings))
}
