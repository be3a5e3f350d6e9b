//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use simstudy::dgm::{generate_survival, Subject, SurvivalDataset, SurvivalDgmSpec};
use simstudy::rng::Generator;

pub fn subj(treated: bool, time: f64, event: bool) -> Subject {
    Subject {
        treated,
        time,
        event,
    }
}

/// Small random datasets with plenty of events in both arms.
pub fn random_datasets(count: usize) -> Vec<SurvivalDataset> {
    let mut pick = Generator::new(20240611, 0);
    let mut out = Vec::new();
    let mut stream = 1;
    while out.len() < count {
        let spec = SurvivalDgmSpec {
            n_obs: 30 + pick.index(50),
            lambda: 0.05 + 0.3 * pick.uniform(),
            gamma: 0.7 + 1.3 * pick.uniform(),
            theta: -1.0 + 2.0 * pick.uniform(),
            allocation_p: 0.5,
            censor_time: Some(2.0 + 4.0 * pick.uniform()),
        };
        let data = generate_survival(&mut Generator::new(99, stream), &spec).unwrap();
        stream += 1;
        let [(d0, _), (d1, _)] = data.arm_totals();
        if d0 >= 4 && d1 >= 4 {
            out.push(data);
        }
    }
    out
}

/// Nested bisection on the exponential score equations.
pub fn exponential_oracle(data: &SurvivalDataset) -> f64 {
    let (mut d, mut t) = ([0.0f64; 2], [0.0f64; 2]);
    for s in &data.subjects {
        let a = usize::from(s.treated);
        d[a] += f64::from(u8::from(s.event));
        t[a] += s.time;
    }
    // Score in the log baseline rate, decreasing in `a`.
    let inner = |theta: f64| {
        let (mut lo, mut hi) = (-50.0f64, 50.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let score = d[0] + d[1] - t[0] * mid.exp() - t[1] * (mid + theta).exp();
            if score > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    // Profile score in theta, decreasing.
    let (mut lo, mut hi) = (-20.0f64, 20.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let a = inner(mid);
        if d[1] - t[1] * (a + mid).exp() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn weibull_loglik(data: &SurvivalDataset, log_lambda: f64, theta: f64, log_gamma: f64) -> f64 {
    let lambda = log_lambda.exp();
    let gamma = log_gamma.exp();
    let mut ll = 0.0;
    for s in &data.subjects {
        let x = if s.treated { 1.0 } else { 0.0 };
        if s.event {
            ll += log_lambda + log_gamma + (gamma - 1.0) * s.time.ln() + x * theta;
        }
        ll -= lambda * s.time.powf(gamma) * (x * theta).exp();
    }
    ll
}

/// Refining 3-D grid search over (log λ, θ, log γ).
pub fn weibull_oracle(data: &SurvivalDataset) -> f64 {
    let events = data.subjects.iter().filter(|s| s.event).count() as f64;
    let total: f64 = data.subjects.iter().map(|s| s.time).sum();
    let mut centre = [(events / total).ln(), 0.0, 0.0];
    let mut half = 3.0;
    let steps = 7;
    while half > 1e-9 {
        let spacing = 2.0 * half / (steps - 1) as f64;
        let mut best = (f64::NEG_INFINITY, centre);
        for i in 0..steps {
            for j in 0..steps {
                for k in 0..steps {
                    let p = [
                        centre[0] - half + i as f64 * spacing,
                        centre[1] - half + j as f64 * spacing,
                        centre[2] - half + k as f64 * spacing,
                    ];
                    let ll = weibull_loglik(data, p[0], p[1], p[2]);
                    if ll > best.0 {
                        best = (ll, p);
                    }
                }
            }
        }
        // Stay put while the optimum sits on the box edge, otherwise shrink.
        let on_edge = (0..3).any(|d| (best.1[d] - centre[d]).abs() > half - 0.5 * spacing);
        centre = best.1;
        if !on_edge {
            half *= 0.5;
        }
    }
    centre[1]
}

pub fn cox_partial_loglik(data: &SurvivalDataset, theta: f64) -> f64 {
    let x = |s: &Subject| if s.treated { 1.0 } else { 0.0 };
    data.subjects
        .iter()
        .filter(|s| s.event)
        .map(|s| {
            let risk: f64 = data
                .subjects
                .iter()
                .filter(|r| r.time >= s.time)
                .map(|r| (theta * x(r)).exp())
                .sum();
            theta * x(s) - risk.ln()
        })
        .sum()
}

/// Refining 1-D grid over the Breslow partial likelihood.
pub fn cox_oracle(data: &SurvivalDataset) -> f64 {
    let (mut centre, mut half) = (0.0f64, 5.0f64);
    let steps = 21;
    while half > 1e-10 {
        let spacing = 2.0 * half / (steps - 1) as f64;
        let best = (0..steps)
            .map(|i| centre - half + i as f64 * spacing)
            .map(|t| (cox_partial_loglik(data, t), t))
            .fold((f64::NEG_INFINITY, centre), |a, b| if b.0 > a.0 { b } else { a });
        let on_edge = (best.1 - centre).abs() > half - 0.5 * spacing;
        centre = best.1;
        if !on_edge {
            half *= 0.25;
        }
    }
    centre
}
