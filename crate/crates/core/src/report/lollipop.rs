use super::svg::{escape, num, padded_domain, Scale, Sidecar, Svg};
use super::{Figure, FigureSpec};
use crate::dist;
use crate::error::{Error, Result};
use crate::fmt_float;
use crate::perf::{Measure, PerformanceEstimate};

const LEFT: f64 = 110.0;
const TOP: f64 = 30.0;
const GAP: f64 = 24.0;

/// Where the stems start: the value a measure takes under ideal behaviour.
pub fn reference_value(measure: Measure, alpha: f64) -> Option<f64> {
    match measure {
        Measure::Bias | Measure::Mse | Measure::RelPrecision | Measure::RelErrModse => Some(0.0),
        Measure::Coverage | Measure::BeCoverage => Some(100.0 * (1.0 - alpha)),
        Measure::RejectionPct => Some(100.0 * alpha),
        Measure::ConvergencePct => Some(100.0),
        _ => None,
    }
}

fn first_seen<'a>(it: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<&str> = Vec::new();
    for s in it {
        if !v.contains(&s) {
            v.push(s);
        }
    }
    v
}

/// Lollipop plot: measures are panel rows, DGMs panel columns, one line
/// per method. Each estimate is a stem from the reference value, a point,
/// and brackets at ±1.96 MCSE. Measures without a reference value get
/// points and brackets only.
pub fn render_lollipop(perf: &[PerformanceEstimate], spec: &FigureSpec) -> Result<Figure> {
    let measures: Vec<Measure> = if spec.measures.is_empty() {
        let mut m = Vec::new();
        for p in perf {
            if !m.contains(&p.measure) {
                m.push(p.measure);
            }
        }
        m
    } else {
        spec.measures.clone()
    };
    let rows: Vec<&PerformanceEstimate> = perf
        .iter()
        .filter(|p| measures.contains(&p.measure))
        .filter(|p| spec.estimand_id.as_deref().is_none_or(|e| p.estimand_id == e))
        .collect();
    if rows.is_empty() {
        return Err(Error::InsufficientData("no performance estimates to plot".into()));
    }
    let dgms = first_seen(rows.iter().map(|p| p.dgm_id.as_str()));
    let methods = first_seen(rows.iter().map(|p| p.method_id.as_str()));
    let (w, row_h) = (spec.panel_width, spec.panel_height);
    let panel_h = row_h * methods.len() as f64;
    let width = LEFT + dgms.len() as f64 * (w + GAP) + 10.0;
    let height = TOP + measures.len() as f64 * (panel_h + GAP + 16.0) + 10.0;
    let crit = dist::normal_critical(0.05);
    let mut svg = Svg::new(width, height);
    let mut side = Sidecar::new(&[
        "measure",
        "dgm_id",
        "method_id",
        "estimand_id",
        "estimate",
        "mcse",
        "lower",
        "upper",
        "reference",
        "x",
        "x_lower",
        "x_upper",
        "x_reference",
        "y",
    ]);
    for (d, dgm) in dgms.iter().enumerate() {
        let left = LEFT + d as f64 * (w + GAP);
        svg.text("title", left + w / 2.0, TOP - 10.0, "middle", dgm);
    }
    for (mi, &measure) in measures.iter().enumerate() {
        let top = TOP + mi as f64 * (panel_h + GAP + 16.0) + 16.0;
        svg.text("title", 6.0, top - 4.0, "start", measure.label());
        let in_measure: Vec<&&PerformanceEstimate> = rows.iter().filter(|p| p.measure == measure).collect();
        let reference = reference_value(measure, spec.alpha);
        // One x-scale per measure so DGMs are comparable across a row.
        let xs = padded_domain(
            in_measure
                .iter()
                .flat_map(|p| {
                    let m = p.mcse.unwrap_or(0.0);
                    [p.estimate - crit * m, p.estimate + crit * m]
                })
                .chain(reference),
        );
        for (d, dgm) in dgms.iter().enumerate() {
            let left = LEFT + d as f64 * (w + GAP);
            let xscale = Scale::new(xs, (left, left + w));
            let yscale = Scale::new((0.0, methods.len() as f64), (top, top + panel_h));
            svg.open(
                "panel",
                &format!(
                    " data-measure=\"{}\" data-dgm=\"{}\"{}{}",
                    measure.as_str(),
                    escape(dgm),
                    xscale.attrs("x"),
                    yscale.attrs("y")
                ),
            );
            svg.rect("frame", left, top, w, panel_h);
            if let Some(r) = reference {
                let x = xscale.map(r);
                svg.line("reference", x, top, x, top + panel_h, "");
            }
            for (k, method) in methods.iter().enumerate() {
                let y = yscale.map(k as f64 + 0.5);
                if d == 0 {
                    svg.text("method", LEFT - 6.0, y + 4.0, "end", method);
                }
                let Some(p) = in_measure.iter().find(|p| p.dgm_id == *dgm && p.method_id == *method) else {
                    continue;
                };
                let x = xscale.map(p.estimate);
                let attrs = format!(" data-method=\"{}\"", escape(method));
                let xr = reference.map(|r| xscale.map(r));
                if let Some(xr) = xr {
                    svg.line("stem", xr, y, x, y, &attrs);
                }
                svg.circle("point", x, y, 4.0, &attrs);
                let bounds = p.mcse.filter(|m| m.is_finite() && *m > 0.0).map(|m| {
                    let (lo, hi) = (p.estimate - crit * m, p.estimate + crit * m);
                    svg.text("mcse", xscale.map(lo), y + 4.0, "middle", "(");
                    svg.text("mcse", xscale.map(hi), y + 4.0, "middle", ")");
                    (lo, hi)
                });
                let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
                let optn = |v: Option<f64>| v.map(num).unwrap_or_default();
                side.row([
                    measure.as_str().to_string(),
                    dgm.to_string(),
                    method.to_string(),
                    p.estimand_id.clone(),
                    fmt_float(p.estimate),
                    opt(p.mcse),
                    opt(bounds.map(|b| b.0)),
                    opt(bounds.map(|b| b.1)),
                    opt(reference),
                    num(x),
                    optn(bounds.map(|b| xscale.map(b.0))),
                    optn(bounds.map(|b| xscale.map(b.1))),
                    optn(xr),
                    num(y),
                ]);
            }
            svg.close();
        }
    }
    Ok(Figure {
        svg: svg.finish(),
        sidecar: side.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::FigureKind;

    #[test]
    fn references() {
        assert_eq!(reference_value(Measure::Coverage, 0.05), Some(95.0));
        assert_eq!(reference_value(Measure::RejectionPct, 0.05), Some(5.0));
        assert_eq!(reference_value(Measure::Bias, 0.05), Some(0.0));
        assert_eq!(reference_value(Measure::Empse, 0.05), None);
    }

    #[test]
    fn sidecar_recomputes_positions() {
        let perf: Vec<PerformanceEstimate> = ["a", "b"]
            .iter()
            .enumerate()
            .map(|(i, m)| PerformanceEstimate {
                dgm_id: "base".into(),
                method_id: m.to_string(),
                estimand_id: "theta".into(),
                measure: Measure::Bias,
                estimate: 0.1 * (i as f64 + 1.0),
                mcse: Some(0.01),
                mcse_approximate: false,
                n_used: 100,
                comparator: None,
            })
            .collect();
        let fig = render_lollipop(&perf, &FigureSpec::new(FigureKind::Lollipop)).unwrap();
        assert_eq!(fig.sidecar.lines().count(), 3);
        assert_eq!(fig.svg.matches("class=\"stem\"").count(), 2);
        assert_eq!(fig.svg.matches("class=\"point\"").count(), 2);
    }
}
