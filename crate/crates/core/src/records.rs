//! Estimates and states datasets and their CSV forms.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::estimators::{ErrorCode, FitResult};
use crate::fmt_float;
use crate::rng::StatesRecord;

pub const ESTIMATES_HEADER: [&str; 12] = [
    "dgm_id",
    "repetition",
    "method_id",
    "estimand_id",
    "theta_hat",
    "se_hat",
    "df",
    "ci_low",
    "ci_high",
    "p_value",
    "converged",
    "error_code",
];

pub const STATES_HEADER: [&str; 3] = ["dgm_id", "repetition", "state_hex"];

/// One row of the estimates dataset.
///
/// Numeric fields are optional so that foreign estimates files lacking, say,
/// p-values can still be analysed.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatesRecord {
    pub dgm_id: String,
    pub repetition: u64,
    pub method_id: String,
    pub estimand_id: String,
    pub theta_hat: Option<f64>,
    pub se_hat: Option<f64>,
    pub df: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub p_value: Option<f64>,
    pub converged: bool,
    pub error_code: ErrorCode,
}

impl EstimatesRecord {
    pub fn from_fit(dgm_id: &str, repetition: u64, method_id: &str, estimand_id: &str, fit: &FitResult) -> Self {
        let mut r = EstimatesRecord {
            dgm_id: dgm_id.to_string(),
            repetition,
            method_id: method_id.to_string(),
            estimand_id: estimand_id.to_string(),
            theta_hat: None,
            se_hat: None,
            df: None,
            ci_low: None,
            ci_high: None,
            p_value: None,
            converged: false,
            error_code: ErrorCode::None,
        };
        match fit {
            Ok(e) => {
                r.theta_hat = Some(e.theta_hat);
                r.se_hat = Some(e.se_hat);
                r.df = Some(e.df);
                r.ci_low = Some(e.ci_low);
                r.ci_high = Some(e.ci_high);
                r.p_value = Some(e.p_value);
                r.converged = true;
            }
            Err(err) => r.error_code = err.code,
        }
        r
    }

    /// Converged with a point estimate present.
    pub fn usable(&self) -> bool {
        self.converged && self.theta_hat.is_some()
    }

    /// Whether the interval contains `theta`, endpoints included.
    pub fn covers(&self, theta: f64) -> Option<bool> {
        Some(self.ci_low? <= theta && theta <= self.ci_high?)
    }
}

fn opt_float(x: Option<f64>) -> String {
    match x {
        Some(v) if !v.is_nan() => fmt_float(v),
        _ => String::new(),
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is UTF-8")
}

pub fn estimates_to_csv(records: &[EstimatesRecord]) -> String {
    let mut w = csv_writer();
    w.write_record(ESTIMATES_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.dgm_id.clone(),
            r.repetition.to_string(),
            r.method_id.clone(),
            r.estimand_id.clone(),
            opt_float(r.theta_hat),
            opt_float(r.se_hat),
            opt_float(r.df),
            opt_float(r.ci_low),
            opt_float(r.ci_high),
            opt_float(r.p_value),
            u8::from(r.converged).to_string(),
            r.error_code.as_str().to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// Column lookup by header name for hand-written or foreign CSV files.
struct Columns {
    index: HashMap<String, usize>,
    source: String,
}

impl Columns {
    fn new(headers: &csv::StringRecord, source: &str) -> Self {
        Columns {
            index: headers.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect(),
            source: source.to_string(),
        }
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::parse(&self.source, format!("missing column `{name}`")))
    }

    fn get<'a>(&self, row: &'a csv::StringRecord, name: &str) -> Option<&'a str> {
        self.index.get(name).and_then(|&i| row.get(i)).map(str::trim)
    }

    fn float(&self, row: &csv::StringRecord, name: &str, line: u64) -> Result<Option<f64>> {
        match self.get(row, name) {
            None | Some("") | Some("NA") | Some(".") => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::parse(&self.source, format!("line {line}: `{name}` is not a number: `{s}`"))),
        }
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().flexible(false).from_reader(text.as_bytes())
}

/// Parses an estimates CSV.
///
/// Only `dgm_id`, `repetition`, `method_id` and `theta_hat` are required.
/// A missing `estimand_id` column defaults to `theta`; a missing `converged`
/// column means converged wherever `theta_hat` is present.
pub fn estimates_from_csv(text: &str, source: &str) -> Result<Vec<EstimatesRecord>> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(|e| Error::parse(source, e.to_string()))?.clone();
    let cols = Columns::new(&headers, source);
    for name in ["dgm_id", "repetition", "method_id", "theta_hat"] {
        cols.require(name)?;
    }
    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let line = k as u64 + 2;
        let row = row.map_err(|e| Error::parse(source, e.to_string()))?;
        let text_field = |name: &str| cols.get(&row, name).unwrap_or("").to_string();
        let repetition = text_field("repetition")
            .parse::<u64>()
            .map_err(|_| Error::parse(source, format!("line {line}: bad repetition")))?;
        let theta_hat = cols.float(&row, "theta_hat", line)?;
        let converged = match cols.get(&row, "converged") {
            None => theta_hat.is_some(),
            Some("1") | Some("true") | Some("TRUE") => true,
            Some("0") | Some("false") | Some("FALSE") | Some("") => false,
            Some(other) => {
                return Err(Error::parse(source, format!("line {line}: bad converged value `{other}`")))
            }
        };
        let error_code = match cols.get(&row, "error_code") {
            None | Some("") => {
                if converged {
                    ErrorCode::None
                } else {
                    ErrorCode::Numeric
                }
            }
            Some(s) => s
                .parse()
                .map_err(|e: String| Error::parse(source, format!("line {line}: {e}")))?,
        };
        if converged && theta_hat.is_none() {
            return Err(Error::parse(source, format!("line {line}: converged row without theta_hat")));
        }
        let estimand_id = match cols.get(&row, "estimand_id") {
            None | Some("") => "theta".to_string(),
            Some(s) => s.to_string(),
        };
        out.push(EstimatesRecord {
            dgm_id: text_field("dgm_id"),
            repetition,
            method_id: text_field("method_id"),
            estimand_id,
            theta_hat,
            se_hat: cols.float(&row, "se_hat", line)?,
            df: cols.float(&row, "df", line)?,
            ci_low: cols.float(&row, "ci_low", line)?,
            ci_high: cols.float(&row, "ci_high", line)?,
            p_value: cols.float(&row, "p_value", line)?,
            converged,
            error_code,
        });
    }
    Ok(out)
}

pub fn states_to_csv(states: &[StatesRecord]) -> String {
    let mut w = csv_writer();
    w.write_record(STATES_HEADER).expect("in-memory write");
    for s in states {
        w.write_record([s.dgm_id.as_str(), &s.repetition.to_string(), &s.state_hex])
            .expect("in-memory write");
    }
    finish(w)
}

pub fn states_from_csv(text: &str, source: &str) -> Result<Vec<StatesRecord>> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(|e| Error::parse(source, e.to_string()))?.clone();
    let cols = Columns::new(&headers, source);
    for name in STATES_HEADER {
        cols.require(name)?;
    }
    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::parse(source, e.to_string()))?;
        let repetition = cols
            .get(&row, "repetition")
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::parse(source, format!("line {}: bad repetition", k + 2)))?;
        out.push(StatesRecord {
            dgm_id: cols.get(&row, "dgm_id").unwrap_or("").to_string(),
            repetition,
            state_hex: cols.get(&row, "state_hex").unwrap_or("").to_string(),
        });
    }
    Ok(out)
}
