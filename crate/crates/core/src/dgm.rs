//! Data-generating mechanisms and factor grids.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt_float;
use crate::rng::Generator;

/// Proportional-hazards Weibull survival times with a randomised binary
/// treatment and optional administrative censoring.
///
/// The hazard for a subject with treatment `x` is `λ γ t^(γ-1) exp(x θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurvivalDgmSpec {
    pub n_obs: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub theta: f64,
    #[serde(default = "default_allocation")]
    pub allocation_p: f64,
    /// Follow-up ends here; `None` means every latent time is observed.
    #[serde(default)]
    pub censor_time: Option<f64>,
}

fn default_allocation() -> f64 {
    0.5
}

impl SurvivalDgmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_obs == 0 {
            return Err(Error::InvalidParameter("n_obs must be positive".into()));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be finite".into()));
        }
        if !(self.allocation_p > 0.0 && self.allocation_p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "allocation_p must lie in (0, 1), got {}",
                self.allocation_p
            )));
        }
        if let Some(c) = self.censor_time {
            if !(c > 0.0) {
                return Err(Error::InvalidParameter(format!("censor_time must be > 0, got {c}")));
            }
        }
        Ok(())
    }

    /// Latent event time solving `exp(-λ t^γ e^{xθ}) = u`.
    pub fn latent_time(&self, u: f64, treated: bool) -> f64 {
        let rate = self.lambda * if treated { self.theta.exp() } else { 1.0 };
        (-u.ln() / rate).powf(1.0 / self.gamma)
    }

    /// Survivor function at `t` for the given arm.
    pub fn survivor(&self, t: f64, treated: bool) -> f64 {
        let lp = if treated { self.theta } else { 0.0 };
        (-self.lambda * t.powf(self.gamma) * lp.exp()).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalDgmSpec {
    pub n_obs: usize,
    pub mu: f64,
    pub sigma: f64,
}

impl NormalDgmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_obs == 0 {
            return Err(Error::InvalidParameter("n_obs must be positive".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "normal dgm needs finite mu and sigma > 0, got mu={}, sigma={}",
                self.mu, self.sigma
            )));
        }
        Ok(())
    }
}

/// Draws `n_obs` rows with replacement from a fixed source sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResampleSpec {
    pub n_obs: usize,
    pub source: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subject {
    pub treated: bool,
    pub time: f64,
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurvivalDataset {
    pub subjects: Vec<Subject>,
}

impl SurvivalDataset {
    pub fn new(subjects: Vec<Subject>) -> Self {
        SurvivalDataset { subjects }
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    /// Event count and total follow-up per arm, indexed by treatment.
    pub fn arm_totals(&self) -> [(usize, f64); 2] {
        let mut out = [(0usize, 0.0f64); 2];
        for s in &self.subjects {
            let arm = &mut out[usize::from(s.treated)];
            arm.0 += usize::from(s.event);
            arm.1 += s.time;
        }
        out
    }

    pub fn n_events(&self) -> usize {
        self.subjects.iter().filter(|s| s.event).count()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NumericDataset {
    pub values: Vec<f64>,
}

impl NumericDataset {
    pub fn new(values: Vec<f64>) -> Self {
        NumericDataset { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Survival(SurvivalDataset),
    Numeric(NumericDataset),
}

impl Dataset {
    /// CSV export: `id,x,time,event` for survival data, `id,y` otherwise.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Dataset::Survival(d) => {
                out.push_str("id,x,time,event\n");
                for (i, s) in d.subjects.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        i + 1,
                        u8::from(s.treated),
                        fmt_float(s.time),
                        u8::from(s.event)
                    );
                }
            }
            Dataset::Numeric(d) => {
                out.push_str("id,y\n");
                for (i, y) in d.values.iter().enumerate() {
                    let _ = writeln!(out, "{},{}", i + 1, fmt_float(*y));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Survival(d) => d.len(),
            Dataset::Numeric(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Simulates one survival dataset.
///
/// Each subject consumes exactly two uniforms, treatment first, so a dataset
/// always uses `2 * n_obs` draws.
pub fn generate_survival(g: &mut Generator, spec: &SurvivalDgmSpec) -> Result<SurvivalDataset> {
    spec.validate()?;
    let mut subjects = Vec::with_capacity(spec.n_obs);
    for _ in 0..spec.n_obs {
        let treated = g.bernoulli(spec.allocation_p)? == 1;
        let u = g.uniform();
        let latent = spec.latent_time(u, treated);
        let (time, event) = match spec.censor_time {
            Some(c) if latent > c => (c, false),
            _ => (latent, true),
        };
        subjects.push(Subject {
            treated,
            time,
            event,
        });
    }
    Ok(SurvivalDataset { subjects })
}

pub fn generate_normal(g: &mut Generator, spec: &NormalDgmSpec) -> Result<NumericDataset> {
    spec.validate()?;
    let values = (0..spec.n_obs)
        .map(|_| g.normal(spec.mu, spec.sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(NumericDataset { values })
}

/// Uniform resampling with replacement, one draw per output row.
pub fn resample(g: &mut Generator, source: &NumericDataset, n_obs: usize) -> Result<NumericDataset> {
    if source.is_empty() {
        return Err(Error::EmptySource);
    }
    let values = (0..n_obs).map(|_| source.values[g.index(source.len())]).collect();
    Ok(NumericDataset { values })
}

/// A concrete mechanism, ready to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mechanism", rename_all = "snake_case")]
pub enum Mechanism {
    Survival(SurvivalDgmSpec),
    Normal(NormalDgmSpec),
    Resample(ResampleSpec),
}

impl Mechanism {
    pub fn validate(&self) -> Result<()> {
        match self {
            Mechanism::Survival(s) => s.validate(),
            Mechanism::Normal(s) => s.validate(),
            Mechanism::Resample(s) => {
                if s.source.is_empty() {
                    return Err(Error::EmptySource);
                }
                if s.n_obs == 0 {
                    return Err(Error::InvalidParameter("n_obs must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn generate(&self, g: &mut Generator) -> Result<Dataset> {
        Ok(match self {
            Mechanism::Survival(s) => Dataset::Survival(generate_survival(g, s)?),
            Mechanism::Normal(s) => Dataset::Numeric(generate_normal(g, s)?),
            Mechanism::Resample(s) => {
                Dataset::Numeric(resample(g, &NumericDataset::new(s.source.clone()), s.n_obs)?)
            }
        })
    }

    pub fn n_obs(&self) -> usize {
        match self {
            Mechanism::Survival(s) => s.n_obs,
            Mechanism::Normal(s) => s.n_obs,
            Mechanism::Resample(s) => s.n_obs,
        }
    }

    /// Copy with `n_obs` replaced, used for large truth-finding datasets.
    pub fn with_n_obs(&self, n_obs: usize) -> Self {
        let mut m = self.clone();
        match &mut m {
            Mechanism::Survival(s) => s.n_obs = n_obs,
            Mechanism::Normal(s) => s.n_obs = n_obs,
            Mechanism::Resample(s) => s.n_obs = n_obs,
        }
        m
    }

    /// The parameter value a correctly specified method estimates.
    pub fn natural_estimand(&self) -> f64 {
        match self {
            Mechanism::Survival(s) => s.theta,
            Mechanism::Normal(s) => s.mu,
            Mechanism::Resample(s) => s.source.iter().sum::<f64>() / s.source.len() as f64,
        }
    }

    pub fn is_survival(&self) -> bool {
        matches!(self, Mechanism::Survival(_))
    }

    /// Sets one named parameter, as directed by a factor level.
    pub fn set_factor(&mut self, name: &str, value: f64) -> Result<()> {
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::config(format!("factor `{name}` needs a positive integer, got {v}")))
            }
        };
        match self {
            Mechanism::Survival(s) => match name {
                "n_obs" => s.n_obs = as_count(value)?,
                "lambda" => s.lambda = value,
                "gamma" => s.gamma = value,
                "theta" => s.theta = value,
                "allocation_p" => s.allocation_p = value,
                "censor_time" => s.censor_time = Some(value),
                _ => return Err(Error::config(format!("unknown survival factor `{name}`"))),
            },
            Mechanism::Normal(s) => match name {
                "n_obs" => s.n_obs = as_count(value)?,
                "mu" => s.mu = value,
                "sigma" => s.sigma = value,
                _ => return Err(Error::config(format!("unknown normal factor `{name}`"))),
            },
            Mechanism::Resample(s) => match name {
                "n_obs" => s.n_obs = as_count(value)?,
                _ => return Err(Error::config(format!("unknown resample factor `{name}`"))),
            },
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    #[default]
    FullFactorial,
    OneAtATime,
    ExplicitList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorGrid {
    pub factors: Vec<Factor>,
    #[serde(default)]
    pub design: Design,
    /// Level index per factor; required by the one-at-a-time design.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_case: Option<Vec<usize>>,
    /// One value per factor for each point; required by the explicit-list design.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

/// One cell of an expanded grid: a value for every factor, in factor order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub levels: Vec<(String, f64)>,
}

impl GridPoint {
    /// `name=value` pairs joined by `;`, or `base` for an empty grid.
    pub fn id(&self) -> String {
        if self.levels.is_empty() {
            return "base".to_string();
        }
        self.levels
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Parses a [`GridPoint::id`] back into its factor values.
pub fn parse_dgm_id(id: &str) -> Option<Vec<(String, f64)>> {
    if id == "base" {
        return Some(Vec::new());
    }
    id.split(';')
        .map(|part| {
            let (name, value) = part.split_once('=')?;
            Some((name.to_string(), value.parse().ok()?))
        })
        .collect()
}

impl FactorGrid {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for f in &self.factors {
            if f.levels.is_empty() {
                return Err(Error::config(format!("factor `{}` has no levels", f.name)));
            }
            if f.name.is_empty() || f.name.contains([';', '=', ',', '"', '\n']) {
                return Err(Error::config(format!("invalid factor name `{}`", f.name)));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(Error::config(format!("duplicate factor `{}`", f.name)));
            }
            if f.levels.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("factor `{}` has a non-finite level", f.name)));
            }
        }
        Ok(())
    }
}

/// Expands a grid into concrete points in a deterministic order.
///
/// Full factorial varies the last factor fastest. One-at-a-time starts with
/// the base case, then walks each factor in order through its non-base levels.
pub fn expand_grid(grid: &FactorGrid) -> Result<Vec<GridPoint>> {
    grid.validate()?;
    let point = |idx: &[usize]| GridPoint {
        levels: grid
            .factors
            .iter()
            .zip(idx)
            .map(|(f, &i)| (f.name.clone(), f.levels[i]))
            .collect(),
    };
    match grid.design {
        Design::FullFactorial => {
            let total: usize = grid.factors.iter().map(|f| f.levels.len()).product();
            let mut out = Vec::with_capacity(total);
            let mut idx = vec![0usize; grid.factors.len()];
            for _ in 0..total {
                out.push(point(&idx));
                for k in (0..idx.len()).rev() {
                    idx[k] += 1;
                    if idx[k] < grid.factors[k].levels.len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            Ok(out)
        }
        Design::OneAtATime => {
            let base = grid.base_case.as_ref().ok_or(Error::MissingBaseCase)?;
            if base.len() != grid.factors.len() {
                return Err(Error::config("base_case needs one level index per factor"));
            }
            for (f, &b) in grid.factors.iter().zip(base) {
                if b >= f.levels.len() {
                    return Err(Error::config(format!(
                        "base_case index {b} out of range for factor `{}`",
                        f.name
                    )));
                }
            }
            let mut out = vec![point(base)];
            for (k, f) in grid.factors.iter().enumerate() {
                for level in 0..f.levels.len() {
                    if level == base[k] {
                        continue;
                    }
                    let mut idx = base.clone();
                    idx[k] = level;
                    out.push(point(&idx));
                }
            }
            Ok(out)
        }
        Design::ExplicitList => {
            let points = grid
                .points
                .as_ref()
                .ok_or_else(|| Error::config("explicit_list design requires `points`"))?;
            points
                .iter()
                .map(|values| {
                    if values.len() != grid.factors.len() {
                        return Err(Error::config("each explicit point needs one value per factor"));
                    }
                    Ok(GridPoint {
                        levels: grid
                            .factors
                            .iter()
                            .zip(values)
                            .map(|(f, &v)| (f.name.clone(), v))
                            .collect(),
                    })
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_spec(gamma: f64) -> SurvivalDgmSpec {
        SurvivalDgmSpec {
            n_obs: 500,
            lambda: 0.1,
            gamma,
            theta: -0.5,
            allocation_p: 0.5,
            censor_time: Some(3.0),
        }
    }

    fn bisect_survivor(spec: &SurvivalDgmSpec, u: f64, treated: bool) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while spec.survivor(hi, treated) > u {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spec.survivor(mid, treated) > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn inversion_example_with_censoring() {
        let spec = SurvivalDgmSpec {
            n_obs: 1,
            lambda: 0.1,
            gamma: 1.0,
            theta: -0.5,
            allocation_p: 0.5,
            censor_time: Some(3.0),
        };
        let t = spec.latent_time(0.5, false);
        assert!((t - 6.931_471_805_599_453).abs() < 1e-12);
        assert!((t - bisect_survivor(&spec, 0.5, false)).abs() < 1e-9);
        assert!(t > 3.0);
    }

    #[test]
    fn shape_one_is_exponential() {
        let spec = worked_spec(1.0);
        for &u in &[0.01, 0.3, 0.77] {
            for treated in [false, true] {
                let rate = 0.1 * if treated { (-0.5f64).exp() } else { 1.0 };
                assert_eq!(spec.latent_time(u, treated), -u.ln() / rate);
            }
        }
    }

    #[test]
    fn worked_example_hazard_ratio() {
        assert_eq!(format!("{:.3}", worked_spec(1.0).theta.exp()), "0.607");
    }

    #[test]
    fn survival_inversion_reproduces_uniform() {
        for gamma in [1.0, 1.5, 0.7] {
            let spec = SurvivalDgmSpec {
                censor_time: None,
                ..worked_spec(gamma)
            };
            let mut g = Generator::new(11, 0);
            let mut replay = g.clone();
            let d = generate_survival(&mut g, &spec).unwrap();
            for s in &d.subjects {
                replay.uniform();
                let u = replay.uniform();
                assert!((spec.survivor(s.time, s.treated) - u).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_draw_budget() {
        let spec = worked_spec(1.5);
        let mut g = Generator::new(3, 0);
        generate_survival(&mut g, &spec).unwrap();
        assert_eq!(g.draws_made(), 1000);
    }

    #[test]
    fn raising_censor_time_never_loses_events() {
        let g0 = Generator::new(17, 0);
        let short = generate_survival(&mut g0.clone(), &worked_spec(1.5)).unwrap();
        let long_spec = SurvivalDgmSpec {
            censor_time: Some(6.0),
            ..worked_spec(1.5)
        };
        let long = generate_survival(&mut g0.clone(), &long_spec).unwrap();
        for (a, b) in short.subjects.iter().zip(&long.subjects) {
            assert_eq!(a.treated, b.treated);
            if a.event {
                assert!(b.event);
                assert_eq!(a.time, b.time);
            }
        }
    }

    #[test]
    fn normal_mean_within_band() {
        let spec = NormalDgmSpec {
            n_obs: 1_000_000,
            mu: 10.0,
            sigma: 1.0,
        };
        let d = generate_normal(&mut Generator::new(72789, 0), &spec).unwrap();
        let mean = d.values.iter().sum::<f64>() / d.len() as f64;
        assert!((mean - 10.0).abs() <= 0.0045, "{mean}");
    }

    #[test]
    fn normal_deviates_are_antisymmetric() {
        let spec = NormalDgmSpec {
            n_obs: 1,
            mu: 0.0,
            sigma: 1.0,
        };
        for k in [2, 3, 7, 16, 30] {
            let u = 0.5f64.powi(k);
            let a = crate::dist::normal_quantile(u);
            let b = crate::dist::normal_quantile(1.0 - u);
            assert!((a + b).abs() < 1e-12 * a.abs().max(1.0));
        }
        // Mirrored generator draws give mirrored datasets.
        let mut g = Generator::new(8, 0);
        let mut replay = g.clone();
        let d = generate_normal(&mut g, &spec).unwrap();
        let u = replay.uniform();
        assert_eq!(d.values[0], crate::dist::normal_quantile(u));
    }

    #[test]
    fn resample_single_atom() {
        let src = NumericDataset::new(vec![4.2]);
        let d = resample(&mut Generator::new(1, 0), &src, 25).unwrap();
        assert_eq!(d.values, vec![4.2; 25]);
    }

    #[test]
    fn resample_empty_source_fails() {
        let err = resample(&mut Generator::new(1, 0), &NumericDataset::default(), 3);
        assert!(matches!(err, Err(Error::EmptySource)));
    }

    #[test]
    fn resample_frequencies_within_band() {
        let src = NumericDataset::new(vec![1.0, 2.0, 3.0]);
        let n = 1_000_000;
        let d = resample(&mut Generator::new(5, 0), &src, n).unwrap();
        for v in [1.0, 2.0, 3.0] {
            let freq = d.values.iter().filter(|&&x| x == v).count() as f64 / n as f64;
            assert!((freq - 1.0 / 3.0).abs() <= 0.0021, "{v}: {freq}");
        }
    }

    #[test]
    fn resamples_differ_across_states() {
        let src = NumericDataset::new((0..100).map(f64::from).collect());
        let mut g = Generator::new(5, 0);
        let a = resample(&mut g, &src, 50).unwrap();
        let b = resample(&mut g, &src, 50).unwrap();
        assert_ne!(a, b);
    }

    fn factor(name: &str, n: usize) -> Factor {
        Factor {
            name: name.into(),
            levels: (1..=n).map(|v| v as f64).collect(),
        }
    }

    #[test]
    fn full_factorial_worked_example() {
        let grid = FactorGrid {
            factors: vec![Factor {
                name: "gamma".into(),
                levels: vec![1.0, 1.5],
            }],
            design: Design::FullFactorial,
            base_case: None,
            points: None,
        };
        let pts = expand_grid(&grid).unwrap();
        let ids: Vec<_> = pts.iter().map(GridPoint::id).collect();
        assert_eq!(ids, vec!["gamma=1", "gamma=1.5"]);
    }

    #[test]
    fn full_factorial_last_factor_fastest() {
        let grid = FactorGrid {
            factors: vec![factor("a", 2), factor("b", 3)],
            design: Design::FullFactorial,
            base_case: None,
            points: None,
        };
        let ids: Vec<_> = expand_grid(&grid).unwrap().iter().map(GridPoint::id).collect();
        assert_eq!(ids, vec!["a=1;b=1", "a=1;b=2", "a=1;b=3", "a=2;b=1", "a=2;b=2", "a=2;b=3"]);
    }

    #[test]
    fn one_at_a_time_counts() {
        let grid = FactorGrid {
            factors: vec![factor("A", 8), factor("B", 5)],
            design: Design::OneAtATime,
            base_case: Some(vec![0, 0]),
            points: None,
        };
        let pts = expand_grid(&grid).unwrap();
        assert_eq!(pts.len(), 12);
        assert_eq!(pts[0].id(), "A=1;B=1");
        // Every point differs from the base in at most one factor.
        for p in &pts {
            let moved = p.levels.iter().filter(|(_, v)| *v != 1.0).count();
            assert!(moved <= 1);
        }
    }

    #[test]
    fn one_at_a_time_requires_base() {
        let grid = FactorGrid {
            factors: vec![factor("A", 2)],
            design: Design::OneAtATime,
            base_case: None,
            points: None,
        };
        assert!(matches!(expand_grid(&grid), Err(Error::MissingBaseCase)));
    }

    #[test]
    fn degenerate_grid_under_every_design() {
        for design in [Design::FullFactorial, Design::OneAtATime, Design::ExplicitList] {
            let grid = FactorGrid {
                factors: vec![factor("only", 1)],
                design,
                base_case: Some(vec![0]),
                points: Some(vec![vec![1.0]]),
            };
            assert_eq!(expand_grid(&grid).unwrap().len(), 1);
        }
    }

    #[test]
    fn dgm_ids_round_trip() {
        let p = GridPoint {
            levels: vec![("gamma".into(), 1.5), ("n_obs".into(), 500.0)],
        };
        assert_eq!(parse_dgm_id(&p.id()).unwrap(), p.levels);
        assert_eq!(parse_dgm_id("base").unwrap(), vec![]);
        assert!(parse_dgm_id("nonsense").is_none());
    }

    #[test]
    fn survival_csv_layout() {
        let d = Dataset::Survival(SurvivalDataset::new(vec![Subject {
            treated: true,
            time: 3.0,
            event: false,
        }]));
        assert_eq!(d.to_csv(), "id,x,time,event\n1,1,3.0000000000000000e0,0\n");
    }
}
