use super::svg::Sidecar;
use crate::fmt_float;
use crate::perf::{Measure, PerformanceEstimate};

/// Row and column ordering for [`render_table`]. Empty lists mean
/// first-appearance order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableLayout {
    pub measures: Vec<Measure>,
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub text: String,
    pub csv: String,
}

/// Decimal places so that one unit in the last place does not exceed the
/// MCSE: `ceil(-log10(mcse))`, clamped to `0..=6`.
pub fn mcse_decimals(mcse: f64) -> usize {
    let mut d = (-mcse.log10() - 1e-9).ceil().clamp(0.0, 6.0) as i32;
    while d < 6 && 10f64.powi(-d) > mcse {
        d += 1;
    }
    d as usize
}

fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    // Drop the sign of a value that rounds to zero.
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Printed estimate and MCSE for one cell, plus the decimals used.
///
/// The relative precision of the comparator against itself prints as
/// `0 (--)`. A zero or missing MCSE gives three decimals. Model-SE-like
/// measures with MCSE below 0.0005 show `(<0.001)`.
pub fn format_cell(p: &PerformanceEstimate) -> (String, String, Option<usize>) {
    let pct = if p.measure.is_percent() { "%" } else { "" };
    if p.measure == Measure::RelPrecision && p.comparator.as_deref() == Some(p.method_id.as_str()) {
        return ("0".into(), "(--)".into(), None);
    }
    match p.mcse {
        Some(m) if m > 0.0 && m.is_finite() => {
            let d = mcse_decimals(m);
            let mcse = if !p.measure.is_percent() && m < 0.0005 {
                "(<0.001)".to_string()
            } else {
                format!("({})", fixed(m, d))
            };
            (format!("{}{pct}", fixed(p.estimate, d)), mcse, Some(d))
        }
        Some(m) if m == 0.0 => (format!("{}{pct}", fixed(p.estimate, 3)), "(0)".into(), Some(3)),
        _ => (format!("{}{pct}", fixed(p.estimate, 3)), "(--)".into(), Some(3)),
    }
}

fn ordered<'a>(preferred: &[String], seen: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = preferred.to_vec();
    for s in seen {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

/// Measures stacked vertically, one row per DGM (and estimand), methods
/// side by side with the MCSE in parentheses.
pub fn render_table(perf: &[PerformanceEstimate], layout: &TableLayout) -> Table {
    let measures: Vec<Measure> = {
        let mut m = layout.measures.clone();
        for p in perf {
            if !m.contains(&p.measure) {
                m.push(p.measure);
            }
        }
        m.retain(|x| perf.iter().any(|p| p.measure == *x));
        m
    };
    let methods = ordered(&layout.methods, perf.iter().map(|p| p.method_id.as_str()));
    let methods: Vec<String> = methods
        .into_iter()
        .filter(|m| perf.iter().any(|p| &p.method_id == m))
        .collect();
    let mut rows_key: Vec<(String, String)> = Vec::new();
    for p in perf {
        let k = (p.dgm_id.clone(), p.estimand_id.clone());
        if !rows_key.contains(&k) {
            rows_key.push(k);
        }
    }
    let multi_estimand = rows_key.iter().any(|k| k.1 != rows_key[0].1);

    let mut csv = Sidecar::new(&[
        "measure",
        "dgm_id",
        "estimand_id",
        "method_id",
        "estimate",
        "mcse",
        "decimals",
        "printed_estimate",
        "printed_mcse",
    ]);
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["Performance measure".to_string(), "DGM".to_string()];
    header.extend(methods.iter().cloned());
    grid.push(header);
    let mut group_starts = Vec::new();
    for &measure in &measures {
        group_starts.push(grid.len());
        let mut first = true;
        for (dgm, estimand) in &rows_key {
            let cells: Vec<Option<&PerformanceEstimate>> = methods
                .iter()
                .map(|m| {
                    perf.iter().find(|p| {
                        p.measure == measure && &p.dgm_id == dgm && &p.estimand_id == estimand && &p.method_id == m
                    })
                })
                .collect();
            if cells.iter().all(Option::is_none) {
                continue;
            }
            let label = if first { measure.label().to_string() } else { String::new() };
            first = false;
            let dgm_label = if multi_estimand { format!("{dgm} [{estimand}]") } else { dgm.clone() };
            let mut row = vec![label, dgm_label];
            for cell in cells {
                match cell {
                    Some(p) => {
                        let (est, mcse, d) = format_cell(p);
                        csv.row([
                            measure.as_str().to_string(),
                            dgm.clone(),
                            estimand.clone(),
                            p.method_id.clone(),
                            fmt_float(p.estimate),
                            p.mcse.map(fmt_float).unwrap_or_default(),
                            d.map(|d| d.to_string()).unwrap_or_default(),
                            est.clone(),
                            mcse.clone(),
                        ]);
                        row.push(format!("{est} {mcse}"));
                    }
                    None => row.push(String::new()),
                }
            }
            grid.push(row);
        }
    }

    let ncol = grid[0].len();
    let widths: Vec<usize> = (0..ncol)
        .map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let total: usize = widths.iter().sum::<usize>() + 2 * (ncol - 1);
    let rule = "-".repeat(total);
    let mut text = String::new();
    for (i, row) in grid.iter().enumerate() {
        if i == 0 || group_starts.contains(&i) {
            text.push_str(&rule);
            text.push('\n');
        }
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                let pad = widths[c] - s.chars().count();
                if c < 2 {
                    format!("{s}{}", " ".repeat(pad))
                } else {
                    format!("{}{s}", " ".repeat(pad))
                }
            })
            .collect();
        text.push_str(line.join("  ").trim_end());
        text.push('\n');
    }
    text.push_str(&rule);
    text.push('\n');
    if perf.iter().any(|p| p.mcse_approximate) {
        text.push_str("Monte Carlo SEs in parentheses; those for relative precision and model SE are approximate.\n");
    } else {
        text.push_str("Monte Carlo SEs in parentheses.\n");
    }
    Table {
        text,
        csv: csv.finish(),
    }
}
