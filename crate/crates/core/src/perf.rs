//! Performance measures with Monte Carlo standard errors.
//!
//! Percentages (convergence, coverage, rejection and the two relative
//! measures) are reported on the 0-100 scale, their MCSEs in percentage
//! points.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};
use crate::estimators::ErrorCode;
use crate::fmt_float;
use crate::records::EstimatesRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    ConvergencePct,
    Bias,
    Mean,
    Empse,
    RelPrecision,
    Mse,
    AvgModse,
    RelErrModse,
    Coverage,
    BeCoverage,
    RejectionPct,
}

impl Measure {
    pub const ALL: [Measure; 11] = [
        Measure::ConvergencePct,
        Measure::Bias,
        Measure::Mean,
        Measure::Empse,
        Measure::RelPrecision,
        Measure::Mse,
        Measure::AvgModse,
        Measure::RelErrModse,
        Measure::Coverage,
        Measure::BeCoverage,
        Measure::RejectionPct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::ConvergencePct => "convergence_pct",
            Measure::Bias => "bias",
            Measure::Mean => "mean",
            Measure::Empse => "empse",
            Measure::RelPrecision => "rel_precision",
            Measure::Mse => "mse",
            Measure::AvgModse => "avg_modse",
            Measure::RelErrModse => "rel_err_modse",
            Measure::Coverage => "coverage",
            Measure::BeCoverage => "be_coverage",
            Measure::RejectionPct => "rejection_pct",
        }
    }

    /// Row label for tables and figures.
    pub fn label(self) -> &'static str {
        match self {
            Measure::ConvergencePct => "Convergence",
            Measure::Bias => "Bias",
            Measure::Mean => "Mean",
            Measure::Empse => "Empirical SE",
            Measure::RelPrecision => "Relative precision",
            Measure::Mse => "MSE",
            Measure::AvgModse => "Model SE",
            Measure::RelErrModse => "Relative error in Model SE",
            Measure::Coverage => "Coverage",
            Measure::BeCoverage => "Bias-eliminated coverage",
            Measure::RejectionPct => "Rejection",
        }
    }

    /// Reported on the percent scale.
    pub fn is_percent(self) -> bool {
        matches!(
            self,
            Measure::ConvergencePct
                | Measure::RelPrecision
                | Measure::RelErrModse
                | Measure::Coverage
                | Measure::BeCoverage
                | Measure::RejectionPct
        )
    }

    /// MCSE formula is an approximation.
    pub fn approximate_mcse(self) -> bool {
        matches!(self, Measure::RelPrecision | Measure::AvgModse | Measure::RelErrModse)
    }

    fn needs_truth(self) -> bool {
        matches!(self, Measure::Bias | Measure::Mse | Measure::Coverage)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown measure `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceEstimate {
    pub dgm_id: String,
    pub method_id: String,
    pub estimand_id: String,
    pub measure: Measure,
    pub estimate: f64,
    /// `None` when undefined, e.g. relative precision of the comparator itself.
    pub mcse: Option<f64>,
    pub mcse_approximate: bool,
    pub n_used: usize,
    pub comparator: Option<String>,
}

/// A measure that could not be computed for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub dgm_id: String,
    pub method_id: String,
    pub estimand_id: String,
    pub measure: Measure,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} skipped for dgm `{}`, method `{}`, estimand `{}`: {}",
            self.measure, self.dgm_id, self.method_id, self.estimand_id, self.message
        )
    }
}

/// True estimand values keyed by `(dgm_id, estimand_id)`, with an optional
/// fallback used for every unlisted cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrueValues {
    pub values: BTreeMap<(String, String), f64>,
    pub fallback: Option<f64>,
}

impl TrueValues {
    pub fn constant(theta: f64) -> Self {
        TrueValues {
            values: BTreeMap::new(),
            fallback: Some(theta),
        }
    }

    pub fn insert(&mut self, dgm_id: &str, estimand_id: &str, theta: f64) {
        self.values.insert((dgm_id.to_string(), estimand_id.to_string()), theta);
    }

    pub fn get(&self, dgm_id: &str, estimand_id: &str) -> Option<f64> {
        self.values
            .get(&(dgm_id.to_string(), estimand_id.to_string()))
            .copied()
            .or(self.fallback)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryOptions {
    pub alpha: f64,
    pub measures: Vec<Measure>,
    pub comparator: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub estimates: Vec<PerformanceEstimate>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Summary {
    pub fn find(&self, dgm_id: &str, method_id: &str, measure: Measure) -> Option<&PerformanceEstimate> {
        self.estimates
            .iter()
            .find(|p| p.dgm_id == dgm_id && p.method_id == method_id && p.measure == measure)
    }
}

/// Cells keyed in first-appearance order of dgm, then method, then estimand.
pub(crate) struct Cells<'a> {
    pub dgms: Vec<&'a str>,
    pub methods: Vec<&'a str>,
    pub estimands: Vec<&'a str>,
    pub rows: BTreeMap<(usize, usize, usize), Vec<&'a EstimatesRecord>>,
}

pub(crate) fn cells(records: &[EstimatesRecord]) -> Cells<'_> {
    fn position<'a>(list: &mut Vec<&'a str>, key: &'a str) -> usize {
        match list.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                list.push(key);
                list.len() - 1
            }
        }
    }
    let mut c = Cells {
        dgms: Vec::new(),
        methods: Vec::new(),
        estimands: Vec::new(),
        rows: BTreeMap::new(),
    };
    for r in records {
        let key = (
            position(&mut c.dgms, &r.dgm_id),
            position(&mut c.methods, &r.method_id),
            position(&mut c.estimands, &r.estimand_id),
        );
        c.rows.entry(key).or_default().push(r);
    }
    c
}

/// Sum of squared deviations about the mean, and the mean.
fn centred_ss(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum(), mean)
}

fn binomial_pct(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (100.0 * p, 100.0 * (p * (1.0 - p) / n as f64).sqrt())
}

/// Pearson correlation; `None` if either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ssa, ma) = centred_ss(a);
    let (ssb, mb) = centred_ss(b);
    if ssa == 0.0 || ssb == 0.0 {
        return None;
    }
    let cross: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    Some(cross / (ssa * ssb).sqrt())
}

/// Estimate, MCSE and denominator for one measure, or a reason it is undefined.
type Computed = std::result::Result<(f64, Option<f64>, usize), String>;

fn compute(measure: Measure, rows: &[&EstimatesRecord], theta: Option<f64>, alpha: f64) -> Computed {
    let n_total = rows.len();
    if measure == Measure::ConvergencePct {
        let ok = rows.iter().filter(|r| r.usable()).count();
        let (est, mcse) = binomial_pct(ok, n_total);
        return Ok((est, Some(mcse), n_total));
    }
    let used: Vec<&EstimatesRecord> = rows.iter().copied().filter(|r| r.usable()).collect();
    let n = used.len();
    if n < 2 {
        return Err(format!("{n} converged repetitions, need at least 2"));
    }
    let theta = match (measure.needs_truth(), theta) {
        (true, None) => return Err("no true value for this estimand".into()),
        (_, t) => t.unwrap_or(f64::NAN),
    };
    let nf = n as f64;
    let th: Vec<f64> = used.iter().map(|r| r.theta_hat.unwrap_or(f64::NAN)).collect();
    let (ss, mean) = centred_ss(&th);
    let empse = (ss / (nf - 1.0)).sqrt();
    let variances = || -> std::result::Result<Vec<f64>, String> {
        used.iter()
            .map(|r| r.se_hat.map(|s| s * s).ok_or_else(|| "se_hat missing".to_string()))
            .collect()
    };
    let modse_parts = || -> std::result::Result<(f64, f64), String> {
        let v = variances()?;
        let (ss_v, mean_v) = centred_ss(&v);
        Ok((mean_v.sqrt(), ss_v / (nf - 1.0)))
    };
    let coverage_of = |target: f64| -> std::result::Result<(f64, f64), String> {
        let mut hits = 0;
        for r in &used {
            match r.covers(target) {
                Some(true) => hits += 1,
                Some(false) => {}
                None => return Err("confidence limits missing".into()),
            }
        }
        Ok(binomial_pct(hits, n))
    };
    let (est, mcse) = match measure {
        Measure::Bias => (mean - theta, (ss / (nf * (nf - 1.0))).sqrt()),
        Measure::Mean => (mean, (ss / (nf * (nf - 1.0))).sqrt()),
        Measure::Empse => (empse, empse / (2.0 * (nf - 1.0)).sqrt()),
        Measure::Mse => {
            let sq: Vec<f64> = th.iter().map(|t| (t - theta).powi(2)).collect();
            let mse = sq.iter().sum::<f64>() / nf;
            let dev: f64 = sq.iter().map(|s| (s - mse).powi(2)).sum();
            (mse, (dev / (nf * (nf - 1.0))).sqrt())
        }
        Measure::AvgModse => {
            let (modse, var_var) = modse_parts()?;
            let mcse = if var_var == 0.0 { 0.0 } else { (var_var / (4.0 * nf * modse * modse)).sqrt() };
            (modse, mcse)
        }
        Measure::RelErrModse => {
            let (modse, var_var) = modse_parts()?;
            if empse == 0.0 {
                return Err("empirical SE is zero, relative error undefined".into());
            }
            let ratio = modse / empse;
            let spread = if var_var == 0.0 { 0.0 } else { var_var / (4.0 * nf * modse.powi(4)) };
            (100.0 * (ratio - 1.0), 100.0 * ratio * (spread + 1.0 / (2.0 * (nf - 1.0))).sqrt())
        }
        Measure::Coverage => coverage_of(theta)?,
        Measure::BeCoverage => coverage_of(mean)?,
        Measure::RejectionPct => {
            let mut hits = 0;
            for r in &used {
                match r.p_value {
                    Some(p) if p <= alpha => hits += 1,
                    Some(_) => {}
                    None => return Err("p_value missing".into()),
                }
            }
            binomial_pct(hits, n)
        }
        Measure::ConvergencePct | Measure::RelPrecision => unreachable!("handled by the caller"),
    };
    Ok((est, Some(mcse), n))
}

/// Relative % increase in precision of `method` against `comparator`, over
/// repetitions where both converged.
fn rel_precision(method: &[&EstimatesRecord], comparator: &[&EstimatesRecord]) -> Computed {
    let by_rep: BTreeMap<u64, f64> = comparator
        .iter()
        .filter(|r| r.usable())
        .map(|r| (r.repetition, r.theta_hat.unwrap_or(f64::NAN)))
        .collect();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in method.iter().filter(|r| r.usable()) {
        if let Some(&c) = by_rep.get(&r.repetition) {
            a.push(c);
            b.push(r.theta_hat.unwrap_or(f64::NAN));
        }
    }
    let n = a.len();
    if n < 2 {
        return Err(format!("{n} paired converged repetitions, need at least 2"));
    }
    let nf = n as f64;
    let emp_a = (centred_ss(&a).0 / (nf - 1.0)).sqrt();
    let emp_b = (centred_ss(&b).0 / (nf - 1.0)).sqrt();
    if emp_b == 0.0 {
        return Err("empirical SE of the method is zero".into());
    }
    let ratio_sq = (emp_a / emp_b).powi(2);
    let corr = pearson(&a, &b).unwrap_or(0.0);
    let mcse = 200.0 * ratio_sq * ((1.0 - corr * corr).max(0.0) / (nf - 1.0)).sqrt();
    Ok((100.0 * (ratio_sq - 1.0), Some(mcse), n))
}

/// Computes every requested measure for every (dgm, method, estimand) cell.
///
/// Bias, coverage and the other non-convergence measures use each method's
/// converged rows; relative precision uses repetitions where both the
/// method and the comparator converged.
pub fn summarize(records: &[EstimatesRecord], truths: &TrueValues, opts: &SummaryOptions) -> Result<Summary> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", opts.alpha)));
    }
    let c = cells(records);
    let comparator_idx = match (&opts.comparator, opts.measures.contains(&Measure::RelPrecision)) {
        (Some(id), true) => Some(c.methods.iter().position(|m| m == id).ok_or_else(|| {
            Error::InvalidParameter(format!("comparator `{id}` has no rows in the estimates"))
        })?),
        (None, true) => {
            return Err(Error::InvalidParameter("rel_precision requires a comparator".into()))
        }
        _ => None,
    };
    let mut out = Summary::default();
    for (&(d, m, e), rows) in &c.rows {
        let (dgm_id, method_id, estimand_id) = (c.dgms[d], c.methods[m], c.estimands[e]);
        let theta = truths.get(dgm_id, estimand_id);
        for &measure in &opts.measures {
            let mut comparator = None;
            let result = if measure == Measure::RelPrecision {
                let ci = comparator_idx.expect("checked above");
                comparator = Some(c.methods[ci].to_string());
                if ci == m {
                    let n = rows.iter().filter(|r| r.usable()).count();
                    Ok((0.0, None, n))
                } else {
                    match c.rows.get(&(d, ci, e)) {
                        Some(base) => rel_precision(rows, base),
                        None => Err("comparator has no rows for this cell".into()),
                    }
                }
            } else {
                compute(measure, rows, theta, opts.alpha)
            };
            match result {
                Ok((estimate, mcse, n_used)) => out.estimates.push(PerformanceEstimate {
                    dgm_id: dgm_id.to_string(),
                    method_id: method_id.to_string(),
                    estimand_id: estimand_id.to_string(),
                    measure,
                    estimate,
                    mcse,
                    mcse_approximate: measure.approximate_mcse(),
                    n_used,
                    comparator,
                }),
                Err(message) => out.diagnostics.push(Diagnostic {
                    dgm_id: dgm_id.to_string(),
                    method_id: method_id.to_string(),
                    estimand_id: estimand_id.to_string(),
                    measure,
                    message,
                }),
            }
        }
    }
    Ok(out)
}

/// Correlation of two methods' estimates over repetitions where both converged.
pub fn paired_correlation(
    records: &[EstimatesRecord],
    dgm_id: &str,
    estimand_id: &str,
    method_a: &str,
    method_b: &str,
) -> Option<(f64, usize)> {
    let pick = |m: &str| -> BTreeMap<u64, f64> {
        records
            .iter()
            .filter(|r| r.dgm_id == dgm_id && r.estimand_id == estimand_id && r.method_id == m && r.usable())
            .map(|r| (r.repetition, r.theta_hat.unwrap_or(f64::NAN)))
            .collect()
    };
    let a = pick(method_a);
    let b = pick(method_b);
    let (x, y): (Vec<f64>, Vec<f64>) = a.iter().filter_map(|(k, v)| Some((*v, *b.get(k)?))).unzip();
    Some((pearson(&x, &y)?, x.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinCoverage {
    pub n: usize,
    pub coverage_pct: f64,
    pub mcse: f64,
    pub se_min: f64,
    pub se_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCoverage {
    pub overall: BinCoverage,
    /// Bins in ascending order of model SE.
    pub bins: Vec<BinCoverage>,
}

/// Coverage within equal-size bins of ascending model SE.
///
/// `rows` should belong to a single (dgm, method, estimand) cell. Ties in
/// `se_hat` are broken by repetition index; when the count does not divide
/// evenly, bin sizes differ by at most one.
pub fn conditional_coverage(rows: &[EstimatesRecord], theta: f64, groups: usize) -> Result<ConditionalCoverage> {
    if groups == 0 {
        return Err(Error::InvalidParameter("groups must be at least 1".into()));
    }
    let mut used: Vec<(f64, u64, bool)> = Vec::new();
    for r in rows.iter().filter(|r| r.usable()) {
        let (Some(se), Some(cov)) = (r.se_hat, r.covers(theta)) else {
            return Err(Error::InsufficientData(format!(
                "repetition {} lacks se_hat or confidence limits",
                r.repetition
            )));
        };
        used.push((se, r.repetition, cov));
    }
    let n = used.len();
    if n < groups || n == 0 {
        return Err(Error::InsufficientData(format!("{n} converged rows for {groups} groups")));
    }
    used.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let bin = |part: &[(f64, u64, bool)]| {
        let hits = part.iter().filter(|x| x.2).count();
        let (coverage_pct, mcse) = binomial_pct(hits, part.len());
        BinCoverage {
            n: part.len(),
            coverage_pct,
            mcse,
            se_min: part[0].0,
            se_max: part[part.len() - 1].0,
        }
    };
    let bins = (0..groups)
        .map(|k| bin(&used[k * n / groups..(k + 1) * n / groups]))
        .collect();
    Ok(ConditionalCoverage {
        overall: bin(&used),
        bins,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NsimKind {
    /// Coverage or power, on the percent scale.
    Coverage,
    Bias,
}

/// Smallest `n_sim` whose Monte Carlo SE does not exceed `target_mcse`.
///
/// Coverage kind: `n = E (100 - E) / target^2` with `E` in percent.
/// Bias kind: `n = Var(theta-hat) / target^2`.
pub fn required_nsim(kind: NsimKind, expected: f64, target_mcse: f64, var_theta: Option<f64>) -> Result<u64> {
    if !(target_mcse > 0.0 && target_mcse.is_finite()) {
        return Err(Error::InvalidParameter(format!("target MCSE must be > 0, got {target_mcse}")));
    }
    let raw = match kind {
        NsimKind::Coverage => {
            if !(expected > 0.0 && expected < 100.0) {
                return Err(Error::InvalidParameter(format!(
                    "expected percentage must lie in (0, 100), got {expected}"
                )));
            }
            expected * (100.0 - expected) / (target_mcse * target_mcse)
        }
        NsimKind::Bias => match var_theta {
            Some(v) if v > 0.0 && v.is_finite() => v / (target_mcse * target_mcse),
            _ => {
                return Err(Error::InvalidParameter(
                    "bias kind needs a positive Var(theta-hat)".into(),
                ))
            }
        },
    };
    // Absorb rounding noise such as 0.04 / 0.005^2 = 1600.0000000000002.
    Ok((raw * (1.0 - 1e-12)).ceil().max(1.0) as u64)
}

/// Coverage of a normal interval of correct width when `bias / SE = b`.
pub fn coverage_under_bias(bias_over_se: f64, alpha: f64) -> f64 {
    let z = dist::normal_critical(alpha);
    let b = bias_over_se.abs();
    dist::normal_cdf(z - b) - dist::normal_cdf(-z - b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissingnessRow {
    pub dgm_id: String,
    pub method_id: String,
    pub n_total: usize,
    /// Count per code, in [`ErrorCode::ALL`] order; `none` counts converged fits.
    pub counts: Vec<(ErrorCode, usize)>,
}

/// Failure counts per (dgm, method), one repetition counted once.
pub fn missingness_report(records: &[EstimatesRecord]) -> Vec<MissingnessRow> {
    let c = cells(records);
    let mut out = Vec::new();
    for (d, dgm) in c.dgms.iter().enumerate() {
        for (m, method) in c.methods.iter().enumerate() {
            let mut seen = BTreeMap::new();
            for e in 0..c.estimands.len() {
                for r in c.rows.get(&(d, m, e)).into_iter().flatten() {
                    let code = if r.usable() { ErrorCode::None } else { r.error_code };
                    seen.entry(r.repetition).or_insert(code);
                }
            }
            if seen.is_empty() {
                continue;
            }
            let counts = ErrorCode::ALL
                .iter()
                .map(|&code| (code, seen.values().filter(|&&c| c == code).count()))
                .collect();
            out.push(MissingnessRow {
                dgm_id: dgm.to_string(),
                method_id: method.to_string(),
                n_total: seen.len(),
                counts,
            });
        }
    }
    out
}

pub fn missingness_to_csv(rows: &[MissingnessRow]) -> String {
    let mut out = String::from("dgm_id,method_id,n_total");
    for c in ErrorCode::ALL {
        out.push(',');
        out.push_str(c.as_str());
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}", r.dgm_id, r.method_id, r.n_total));
        for (_, n) in &r.counts {
            out.push_str(&format!(",{n}"));
        }
        out.push('\n');
    }
    out
}

pub const PERFORMANCE_HEADER: [&str; 8] =
    ["dgm_id", "method_id", "estimand_id", "measure", "estimate", "mcse", "n_used", "comparator"];

pub fn performance_to_csv(perf: &[PerformanceEstimate]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(PERFORMANCE_HEADER).expect("in-memory write");
    for p in perf {
        w.write_record([
            p.dgm_id.as_str(),
            &p.method_id,
            &p.estimand_id,
            p.measure.as_str(),
            &fmt_float(p.estimate),
            &p.mcse.map(fmt_float).unwrap_or_default(),
            &p.n_used.to_string(),
            p.comparator.as_deref().unwrap_or(""),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("UTF-8")
}

pub fn performance_to_json(perf: &[PerformanceEstimate]) -> String {
    let mut s = serde_json::to_string_pretty(perf).expect("performance serializes");
    s.push('\n');
    s
}

pub fn performance_from_csv(text: &str, source: &str) -> Result<Vec<PerformanceEstimate>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::parse(source, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != PERFORMANCE_HEADER {
        return Err(Error::parse(source, "unexpected performance header"));
    }
    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::parse(source, e.to_string()))?;
        let bad = |what: &str| Error::parse(source, format!("line {}: bad {what}", k + 2));
        let measure: Measure = row[3].parse().map_err(|_| bad("measure"))?;
        let mcse = match &row[5] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad("mcse"))?),
        };
        out.push(PerformanceEstimate {
            dgm_id: row[0].to_string(),
            method_id: row[1].to_string(),
            estimand_id: row[2].to_string(),
            measure,
            estimate: row[4].parse().map_err(|_| bad("estimate"))?,
            mcse,
            mcse_approximate: measure.approximate_mcse(),
            n_used: row[6].parse().map_err(|_| bad("n_used"))?,
            comparator: (!row[7].is_empty()).then(|| row[7].to_string()),
        });
    }
    Ok(out)
}
