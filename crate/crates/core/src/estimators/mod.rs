//! Analysis methods applied to each simulated dataset.
//!
//! Every fitter returns either a complete [`Estimate`] or a [`FitError`]
//! carrying an [`ErrorCode`]; the engine records the latter as a missing
//! estimate instead of aborting the study.

mod cox;
mod exponential;
mod newton;
mod normal_mean;
mod weibull;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cox::fit_cox_ph;
pub use exponential::fit_exponential_ph;
pub use normal_mean::fit_normal_mean_t;
pub use weibull::{fit_weibull_ph, WeibullFit};

use crate::dist;

/// Reason a method produced no estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    None,
    Nonconvergence,
    Separation,
    NoEvents,
    Numeric,
    InsufficientData,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 6] = [
        ErrorCode::None,
        ErrorCode::Nonconvergence,
        ErrorCode::Separation,
        ErrorCode::NoEvents,
        ErrorCode::Numeric,
        ErrorCode::InsufficientData,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::None => "none",
            ErrorCode::Nonconvergence => "nonconvergence",
            ErrorCode::Separation => "separation",
            ErrorCode::NoEvents => "no_events",
            ErrorCode::Numeric => "numeric",
            ErrorCode::InsufficientData => "insufficient_data",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown error code `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitError {
    pub code: ErrorCode,
    pub detail: String,
}

impl FitError {
    pub fn new(code: ErrorCode, detail: impl Into<String>) -> Self {
        FitError {
            code,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.detail)
    }
}

impl std::error::Error for FitError {}

pub type FitResult = Result<Estimate, FitError>;

/// Settings shared by all fitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSettings {
    /// Confidence level is `1 - alpha`; also the test size.
    pub alpha: f64,
    /// Null value used for the reported p-value.
    pub null_value: f64,
    /// Newton iterations stop once the gradient max-norm is below this.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            alpha: 0.05,
            null_value: 0.0,
            tolerance: 1e-8,
            max_iter: 50,
        }
    }
}

impl FitSettings {
    pub fn with_alpha(alpha: f64) -> Self {
        FitSettings {
            alpha,
            ..Default::default()
        }
    }
}

/// A point estimate with its model-based SE, interval and p-value.
///
/// `df` is infinite for normal-reference inference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub theta_hat: f64,
    pub se_hat: f64,
    pub df: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
}

impl Estimate {
    /// Wald interval and test around `theta_hat`.
    pub fn wald(theta_hat: f64, se_hat: f64, df: f64, settings: &FitSettings) -> Self {
        let crit = dist::t_quantile(1.0 - settings.alpha / 2.0, df);
        let half = crit * se_hat;
        let mut e = Estimate {
            theta_hat,
            se_hat,
            df,
            ci_low: theta_hat - half,
            ci_high: theta_hat + half,
            p_value: f64::NAN,
        };
        e.p_value = wald_test(&e, settings.null_value, settings.alpha).0;
        e
    }
}

/// Two-sided Wald test of `theta = theta0`; rejects when `p <= alpha`.
pub fn wald_test(e: &Estimate, theta0: f64, alpha: f64) -> (f64, bool) {
    let p = if e.se_hat == 0.0 {
        if e.theta_hat == theta0 {
            1.0
        } else {
            0.0
        }
    } else {
        dist::two_sided_p((e.theta_hat - theta0) / e.se_hat, e.df)
    };
    (p, p <= alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(theta_hat: f64, se_hat: f64) -> Estimate {
        Estimate {
            theta_hat,
            se_hat,
            df: f64::INFINITY,
            ci_low: 0.0,
            ci_high: 0.0,
            p_value: 0.0,
        }
    }

    #[test]
    fn wald_at_null_point() {
        let (p, reject) = wald_test(&est(0.3, 0.1), 0.3, 0.05);
        assert_eq!(p, 1.0);
        assert!(!reject);
    }

    #[test]
    fn wald_z_one() {
        let (p, reject) = wald_test(&est(1.0, 1.0), 0.0, 0.05);
        assert!((p - 0.3173).abs() < 5e-5);
        assert!(!reject);
    }

    #[test]
    fn wald_at_critical_value_rejects() {
        let (p, reject) = wald_test(&est(1.96, 1.0), 0.0, 0.05);
        assert_eq!(format!("{p:.4}"), "0.0500");
        assert!(reject);
        // An exact tie with alpha rejects.
        let z = dist::normal_critical(0.05);
        let (p, _) = wald_test(&est(z, 1.0), 0.0, 0.05);
        assert!(wald_test(&est(z, 1.0), 0.0, p).1);
    }

    #[test]
    fn wald_zero_se() {
        assert_eq!(wald_test(&est(0.5, 0.0), 0.5, 0.05), (1.0, false));
        assert_eq!(wald_test(&est(0.4, 0.0), 0.5, 0.05), (0.0, true));
    }

    #[test]
    fn error_codes_round_trip() {
        for c in ErrorCode::ALL {
            assert_eq!(c.as_str().parse::<ErrorCode>().unwrap(), c);
        }
    }
}
