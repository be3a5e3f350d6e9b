use super::newton::{maximize, Eval};
use super::{ErrorCode, Estimate, FitError, FitResult, FitSettings};
use crate::dgm::SurvivalDataset;

/// One distinct time, processed latest first.
struct TimeGroup {
    /// Subjects entering the risk set at this time, split by arm.
    entering: [usize; 2],
    /// Events at this time, split by arm.
    events: [usize; 2],
}

/// Groups subjects by distinct time in descending order.
fn time_groups(data: &SurvivalDataset) -> Vec<TimeGroup> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&i, &j| data.subjects[j].time.total_cmp(&data.subjects[i].time));
    let mut groups: Vec<TimeGroup> = Vec::new();
    let mut last = f64::NAN;
    for i in order {
        let s = &data.subjects[i];
        if groups.is_empty() || s.time != last {
            groups.push(TimeGroup {
                entering: [0, 0],
                events: [0, 0],
            });
            last = s.time;
        }
        let g = groups.last_mut().unwrap();
        let arm = usize::from(s.treated);
        g.entering[arm] += 1;
        if s.event {
            g.events[arm] += 1;
        }
    }
    groups
}

/// Breslow partial log-likelihood with score and information for binary `x`.
fn evaluate(groups: &[TimeGroup], theta: f64) -> Option<Eval> {
    let w = theta.exp();
    let (mut n0, mut n1) = (0.0f64, 0.0f64);
    let (mut ll, mut score, mut info) = (0.0, 0.0, 0.0);
    for g in groups {
        n0 += g.entering[0] as f64;
        n1 += g.entering[1] as f64;
        let d = (g.events[0] + g.events[1]) as f64;
        if d == 0.0 {
            continue;
        }
        let s0 = n0 + n1 * w;
        let mean = n1 * w / s0;
        ll += g.events[1] as f64 * theta - d * s0.ln();
        score += g.events[1] as f64 - d * mean;
        info += d * mean * (1.0 - mean);
    }
    if !ll.is_finite() || !score.is_finite() {
        return None;
    }
    Some(Eval {
        loglik: ll,
        grad: vec![score],
        hess: vec![-info],
    })
}

/// Cox proportional-hazards estimate of the log hazard ratio.
///
/// Newton-Raphson from `theta = 0` on the Breslow partial likelihood.
/// Datasets where every informative event (risk set containing both arms)
/// falls in one arm have a monotone likelihood and are reported as separation.
pub fn fit_cox_ph(data: &SurvivalDataset, settings: &FitSettings) -> FitResult {
    if data.n_events() == 0 {
        return Err(FitError::new(ErrorCode::NoEvents, "no events"));
    }
    if data.subjects.iter().any(|s| !s.time.is_finite()) {
        return Err(FitError::new(ErrorCode::Numeric, "non-finite time"));
    }
    let groups = time_groups(data);

    let mut informative = [0usize; 2];
    let (mut n0, mut n1) = (0usize, 0usize);
    for g in &groups {
        n0 += g.entering[0];
        n1 += g.entering[1];
        if n0 > 0 && n1 > 0 {
            informative[0] += g.events[0];
            informative[1] += g.events[1];
        }
    }
    if informative[0] == 0 || informative[1] == 0 {
        return Err(FitError::new(
            ErrorCode::Separation,
            format!(
                "monotone partial likelihood: informative events control {}, treated {}",
                informative[0], informative[1]
            ),
        ));
    }

    let max = maximize(vec![0.0], settings, |p| evaluate(&groups, p[0]))?;
    let se = max.covariance[0].sqrt();
    if !(se > 0.0 && se.is_finite()) {
        return Err(FitError::new(ErrorCode::Numeric, "non-positive information"));
    }
    Ok(Estimate::wald(max.params[0], se, f64::INFINITY, settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgm::Subject;

    fn subj(treated: bool, time: f64, event: bool) -> Subject {
        Subject {
            treated,
            time,
            event,
        }
    }

    #[test]
    fn all_censored_is_no_events() {
        let data = SurvivalDataset::new(vec![subj(false, 1.0, false), subj(true, 2.0, false)]);
        assert_eq!(fit_cox_ph(&data, &FitSettings::default()).unwrap_err().code, ErrorCode::NoEvents);
    }

    #[test]
    fn one_sided_events_are_separation() {
        let data = SurvivalDataset::new(vec![
            subj(true, 1.0, true),
            subj(true, 2.0, true),
            subj(false, 3.0, false),
            subj(false, 4.0, true),
        ]);
        // The control event at t=4 has a control-only risk set, so it carries no information.
        assert_eq!(fit_cox_ph(&data, &FitSettings::default()).unwrap_err().code, ErrorCode::Separation);
    }

    #[test]
    fn score_matches_finite_difference() {
        let data = SurvivalDataset::new(vec![
            subj(true, 1.0, true),
            subj(false, 2.0, true),
            subj(true, 2.0, true),
            subj(false, 3.0, false),
            subj(true, 4.0, true),
            subj(false, 5.0, true),
        ]);
        let groups = time_groups(&data);
        let h = 1e-6;
        for &theta in &[-1.0, 0.0, 0.7] {
            let e = evaluate(&groups, theta).unwrap();
            let up = evaluate(&groups, theta + h).unwrap();
            let dn = evaluate(&groups, theta - h).unwrap();
            assert!(((up.loglik - dn.loglik) / (2.0 * h) - e.grad[0]).abs() < 1e-7);
            assert!(((up.grad[0] - dn.grad[0]) / (2.0 * h) - e.hess[0]).abs() < 1e-7);
        }
    }
}
