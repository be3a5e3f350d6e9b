use super::{ErrorCode, Estimate, FitError, FitResult, FitSettings};
use crate::dgm::NumericDataset;

/// Sample mean with a t-based interval on `n - 1` degrees of freedom.
pub fn fit_normal_mean_t(data: &NumericDataset, settings: &FitSettings) -> FitResult {
    let n = data.len();
    if n < 2 {
        return Err(FitError::new(
            ErrorCode::InsufficientData,
            format!("t-interval needs at least 2 observations, got {n}"),
        ));
    }
    let nf = n as f64;
    let mean = data.values.iter().sum::<f64>() / nf;
    let ss: f64 = data.values.iter().map(|y| (y - mean).powi(2)).sum();
    let se = (ss / (nf - 1.0) / nf).sqrt();
    if !se.is_finite() || !mean.is_finite() {
        return Err(FitError::new(ErrorCode::Numeric, "non-finite data"));
    }
    Ok(Estimate::wald(mean, se, nf - 1.0, settings))
}
