//! Ready-made study configurations.

use crate::config::{
    DgmConfig, EstimandConfig, MethodConfig, MethodKind, OutputConfig, StreamPolicy, StudyConfig, Targets,
    TrueValue, TrueValueRule,
};
use crate::dgm::{Design, Factor, FactorGrid, Mechanism, NormalDgmSpec, SurvivalDgmSpec};
use crate::perf::Measure;

fn method(id: &str, kind: MethodKind) -> MethodConfig {
    MethodConfig {
        id: id.into(),
        kind,
        tolerance: None,
        max_iter: None,
    }
}

/// Exponential, Weibull and Cox models for the log hazard ratio of a
/// binary treatment, with Weibull baseline hazard shape 1 and 1.5 and
/// administrative censoring at time 3.
pub fn survival() -> StudyConfig {
    StudyConfig {
        name: "survival".into(),
        seed: 72789,
        n_sim: 1600,
        dgm: DgmConfig {
            base: Mechanism::Survival(SurvivalDgmSpec {
                n_obs: 500,
                lambda: 0.1,
                gamma: 1.0,
                theta: -0.5,
                allocation_p: 0.5,
                censor_time: Some(3.0),
            }),
            grid: Some(FactorGrid {
                factors: vec![Factor {
                    name: "gamma".into(),
                    levels: vec![1.0, 1.5],
                }],
                design: Design::FullFactorial,
                base_case: None,
                points: None,
            }),
        },
        methods: vec![
            method("exponential", MethodKind::ExponentialPh),
            method("weibull", MethodKind::WeibullPh),
            method("cox", MethodKind::CoxPh),
        ],
        estimands: vec![EstimandConfig {
            id: "theta".into(),
            true_value: TrueValue::Rule(TrueValueRule::FromDgm),
            big_n: None,
            truth_method: None,
        }],
        targets: Targets::default(),
        measures: vec![
            Measure::Bias,
            Measure::Coverage,
            Measure::BeCoverage,
            Measure::Empse,
            Measure::RelPrecision,
            Measure::AvgModse,
            Measure::RelErrModse,
        ],
        comparator: Some("weibull".into()),
        streams: StreamPolicy::PerDgm,
        output: OutputConfig::default(),
    }
}

/// t-based 95% intervals for the mean of 30 standard normal observations.
pub fn conditional_coverage() -> StudyConfig {
    StudyConfig {
        name: "conditional-coverage".into(),
        seed: 72789,
        n_sim: 30_000,
        dgm: DgmConfig {
            base: Mechanism::Normal(NormalDgmSpec {
                n_obs: 30,
                mu: 0.0,
                sigma: 1.0,
            }),
            grid: None,
        },
        methods: vec![method("t", MethodKind::NormalMeanT)],
        estimands: vec![EstimandConfig {
            id: "mu".into(),
            true_value: TrueValue::Rule(TrueValueRule::FromDgm),
            big_n: None,
            truth_method: None,
        }],
        targets: Targets::default(),
        measures: vec![Measure::Bias, Measure::Empse, Measure::AvgModse, Measure::Coverage],
        comparator: None,
        streams: StreamPolicy::PerDgm,
        output: OutputConfig::default(),
    }
}
