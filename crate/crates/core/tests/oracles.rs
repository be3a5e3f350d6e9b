//! Fitters checked against slow, independent likelihood maximisers.

use simstudy::dgm::{generate_survival, NumericDataset, SurvivalDataset, SurvivalDgmSpec};
use simstudy::estimators::{
    fit_cox_ph, fit_exponential_ph, fit_normal_mean_t, fit_weibull_ph, ErrorCode, FitSettings,
};
use simstudy::rng::Generator;

mod common;
use common::{cox_oracle, exponential_oracle, random_datasets, subj, weibull_oracle};

#[test]
fn exponential_matches_numeric_maximisation() {
    for data in random_datasets(50) {
        let fit = fit_exponential_ph(&data, &FitSettings::default()).unwrap();
        let oracle = exponential_oracle(&data);
        assert!((fit.theta_hat - oracle).abs() < 1e-8, "{} vs {}", fit.theta_hat, oracle);
    }
}

#[test]
fn exponential_200_subjects() {
    let spec = SurvivalDgmSpec {
        n_obs: 200,
        lambda: 0.1,
        gamma: 1.0,
        theta: -0.5,
        allocation_p: 0.5,
        censor_time: Some(3.0),
    };
    let data = generate_survival(&mut Generator::new(5, 0), &spec).unwrap();
    let fit = fit_exponential_ph(&data, &FitSettings::default()).unwrap();
    assert!((fit.theta_hat - exponential_oracle(&data)).abs() < 1e-8);
}

#[test]
fn weibull_matches_grid_search() {
    for data in random_datasets(50) {
        let fit = fit_weibull_ph(&data, &FitSettings::default()).unwrap();
        let oracle = weibull_oracle(&data);
        assert!((fit.theta_hat - oracle).abs() < 1e-6, "{} vs {}", fit.theta_hat, oracle);
    }
}

#[test]
fn weibull_twenty_subject_dataset() {
    let rows = [
        (0, 0.4, 1),
        (1, 0.9, 1),
        (0, 1.3, 1),
        (1, 2.7, 0),
        (0, 0.2, 1),
        (1, 3.1, 1),
        (0, 1.8, 1),
        (1, 5.0, 0),
        (0, 2.2, 0),
        (1, 1.1, 1),
        (0, 0.7, 1),
        (1, 4.4, 1),
        (0, 3.3, 1),
        (1, 2.0, 1),
        (0, 5.0, 0),
        (1, 0.6, 1),
        (0, 1.5, 1),
        (1, 3.8, 1),
        (0, 0.9, 1),
        (1, 5.0, 0),
    ];
    let data = SurvivalDataset::new(rows.iter().map(|&(x, t, e)| subj(x == 1, t, e == 1)).collect());
    let fit = fit_weibull_ph(&data, &FitSettings::default()).unwrap();
    assert!((fit.theta_hat - weibull_oracle(&data)).abs() < 1e-6);
}

#[test]
fn cox_matches_grid_search() {
    for data in random_datasets(50) {
        let fit = fit_cox_ph(&data, &FitSettings::default()).unwrap();
        let oracle = cox_oracle(&data);
        assert!((fit.theta_hat - oracle).abs() < 1e-6, "{} vs {}", fit.theta_hat, oracle);
    }
}

#[test]
fn cox_alternating_arms() {
    let data = SurvivalDataset::new(vec![
        subj(false, 1.0, true),
        subj(true, 2.0, true),
        subj(false, 3.0, true),
        subj(true, 4.0, true),
    ]);
    let fit = fit_cox_ph(&data, &FitSettings::default()).unwrap();
    assert!((fit.theta_hat - cox_oracle(&data)).abs() < 1e-6);
    assert!(fit.se_hat > 0.0);
}

#[test]
fn cox_ties_use_breslow() {
    let data = SurvivalDataset::new(vec![
        subj(false, 1.0, true),
        subj(true, 1.0, true),
        subj(false, 2.0, true),
        subj(true, 2.0, false),
        subj(true, 3.0, true),
        subj(false, 3.0, true),
        subj(false, 4.0, false),
        subj(true, 4.0, true),
    ]);
    let fit = fit_cox_ph(&data, &FitSettings::default()).unwrap();
    assert!((fit.theta_hat - cox_oracle(&data)).abs() < 1e-6);
}

// ---- invariances ----

fn swap_arms(d: &SurvivalDataset) -> SurvivalDataset {
    SurvivalDataset::new(d.subjects.iter().map(|s| subj(!s.treated, s.time, s.event)).collect())
}

fn rescale(d: &SurvivalDataset, c: f64) -> SurvivalDataset {
    SurvivalDataset::new(d.subjects.iter().map(|s| subj(s.treated, s.time * c, s.event)).collect())
}

#[test]
fn swapping_labels_negates_theta() {
    let s = FitSettings::default();
    for data in random_datasets(10) {
        let swapped = swap_arms(&data);
        for fit in [fit_exponential_ph, fit_weibull_ph, fit_cox_ph] {
            let a = fit(&data, &s).unwrap();
            let b = fit(&swapped, &s).unwrap();
            assert!((a.theta_hat + b.theta_hat).abs() < 1e-9);
            assert!((a.se_hat - b.se_hat).abs() < 1e-9 * a.se_hat);
        }
    }
}

#[test]
fn rescaling_time() {
    let s = FitSettings::default();
    for data in random_datasets(10) {
        let scaled = rescale(&data, 7.5);
        let a = fit_cox_ph(&data, &s).unwrap();
        let b = fit_cox_ph(&scaled, &s).unwrap();
        assert_eq!(a.theta_hat, b.theta_hat);
        assert_eq!(a.se_hat, b.se_hat);
        for fit in [fit_exponential_ph, fit_weibull_ph] {
            let a = fit(&data, &s).unwrap();
            let b = fit(&scaled, &s).unwrap();
            assert!((a.theta_hat - b.theta_hat).abs() < 1e-9);
        }
    }
}

#[test]
fn fitted_intervals_contain_estimate() {
    let s = FitSettings::default();
    for data in random_datasets(10) {
        for fit in [fit_exponential_ph, fit_weibull_ph, fit_cox_ph] {
            let e = fit(&data, &s).unwrap();
            assert!(e.se_hat > 0.0);
            assert!(e.ci_low <= e.theta_hat && e.theta_hat <= e.ci_high);
            assert!((0.0..=1.0).contains(&e.p_value));
        }
    }
}

// ---- t interval ----

/// Student-t with 2 df has CDF 1/2 + t / (2 sqrt(2 + t^2)); invert by bisection.
fn t2_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 0.5 + mid / (2.0 * (2.0 + mid * mid).sqrt()) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn t_interval_for_one_two_three() {
    let e = fit_normal_mean_t(&NumericDataset::new(vec![1.0, 2.0, 3.0]), &FitSettings::default()).unwrap();
    let q = t2_quantile(0.975);
    assert!((q - 4.3027).abs() < 5e-5);
    assert_eq!(e.theta_hat, 2.0);
    assert!((e.se_hat - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    assert!((e.ci_low - (2.0 - q / 3f64.sqrt())).abs() < 1e-9);
    assert!((e.ci_high - (2.0 + q / 3f64.sqrt())).abs() < 1e-9);
    assert_eq!(format!("{:.4} {:.4}", e.ci_low, e.ci_high), "-0.4841 4.4841");
    assert_eq!(e.df, 2.0);
}

#[test]
fn failures_carry_codes() {
    let s = FitSettings::default();
    let censored = SurvivalDataset::new(vec![subj(false, 1.0, false), subj(true, 1.0, false)]);
    assert_eq!(fit_exponential_ph(&censored, &s).unwrap_err().code, ErrorCode::NoEvents);
    assert_eq!(fit_weibull_ph(&censored, &s).unwrap_err().code, ErrorCode::NoEvents);
    assert_eq!(fit_cox_ph(&censored, &s).unwrap_err().code, ErrorCode::NoEvents);
    let single = NumericDataset::new(vec![1.0]);
    assert_eq!(fit_normal_mean_t(&single, &s).unwrap_err().code, ErrorCode::InsufficientData);
}
