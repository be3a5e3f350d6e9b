//! Plots of raw estimates across repetitions.

use std::collections::BTreeMap;

use super::svg::{escape, num, padded_domain, Scale, Sidecar, Svg};
use super::{Figure, FigureSpec};
use crate::error::{Error, Result};
use crate::fmt_float;
use crate::records::EstimatesRecord;

const LEFT: f64 = 100.0;
const TOP: f64 = 30.0;
const GAP: f64 = 20.0;

fn first_seen<'a>(it: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<&str> = Vec::new();
    for s in it {
        if !v.contains(&s) {
            v.push(s);
        }
    }
    v
}

fn usable<'a>(records: &'a [EstimatesRecord], spec: &FigureSpec) -> Vec<&'a EstimatesRecord> {
    records
        .iter()
        .filter(|r| r.usable())
        .filter(|r| spec.estimand_id.as_deref().is_none_or(|e| r.estimand_id == e))
        .collect()
}

/// One row per (DGM, method) with two panels: θ̂ and model SE, each point
/// at its repetition index, the sample mean as a vertical bar.
pub fn render_strip(records: &[EstimatesRecord], spec: &FigureSpec) -> Result<Figure> {
    let rows = usable(records, spec);
    if rows.is_empty() {
        return Err(Error::InsufficientData("no usable estimates to plot".into()));
    }
    let dgms = first_seen(rows.iter().map(|r| r.dgm_id.as_str()));
    let methods = first_seen(rows.iter().map(|r| r.method_id.as_str()));
    let (w, h) = (spec.panel_width, spec.panel_height);
    let width = LEFT + 2.0 * (w + GAP);
    let height = TOP + (dgms.len() * methods.len()) as f64 * h + GAP;
    let max_rep = rows.iter().map(|r| r.repetition).max().unwrap_or(1) as f64;
    let columns: [(&str, fn(&EstimatesRecord) -> Option<f64>); 2] =
        [("theta_hat", |r| r.theta_hat), ("se_hat", |r| r.se_hat)];
    let mut svg = Svg::new(width, height);
    let mut side = Sidecar::new(&["dgm_id", "method_id", "estimand_id", "repetition", "variable", "value", "x", "y"]);
    let mut k = 0usize;
    for dgm in &dgms {
        for method in &methods {
            let top = TOP + k as f64 * h;
            k += 1;
            svg.text("method", LEFT - 6.0, top + h / 2.0 + 4.0, "end", &format!("{dgm} / {method}"));
            let cell: Vec<&&EstimatesRecord> = rows
                .iter()
                .filter(|r| r.dgm_id == *dgm && r.method_id == *method)
                .collect();
            for (c, (variable, get)) in columns.iter().enumerate() {
                let left = LEFT + c as f64 * (w + GAP);
                let xs = padded_domain(rows.iter().filter_map(|r| get(r)));
                if k == 1 {
                    svg.text("title", left + w / 2.0, TOP - 18.0, "middle", variable);
                    svg.text("", left, TOP - 4.0, "start", &format!("{:.3}", xs.0));
                    svg.text("", left + w, TOP - 4.0, "end", &format!("{:.3}", xs.1));
                }
                let xscale = Scale::new(xs, (left, left + w));
                let yscale = Scale::new((0.0, max_rep + 1.0), (top + h, top));
                svg.open(
                    "strip",
                    &format!(
                        " data-dgm=\"{}\" data-method=\"{}\" data-variable=\"{variable}\"{}{}",
                        escape(dgm),
                        escape(method),
                        xscale.attrs("x"),
                        yscale.attrs("y")
                    ),
                );
                svg.rect("frame", left, top, w, h);
                let (mut sum, mut n) = (0.0, 0usize);
                for r in &cell {
                    let Some(v) = get(r) else { continue };
                    sum += v;
                    n += 1;
                    let (x, y) = (xscale.map(v), yscale.map(r.repetition as f64));
                    svg.circle("point", x, y, 1.5, &format!(" data-rep=\"{}\"", r.repetition));
                    side.row([
                        dgm.to_string(),
                        method.to_string(),
                        r.estimand_id.clone(),
                        r.repetition.to_string(),
                        variable.to_string(),
                        fmt_float(v),
                        num(x),
                        num(y),
                    ]);
                }
                if n > 0 {
                    let x = xscale.map(sum / n as f64);
                    svg.line("mean", x, top + 1.0, x, top + h - 1.0, &format!(" data-mean=\"{}\"", num(sum / n as f64)));
                }
                svg.close();
            }
        }
    }
    Ok(Figure {
        svg: svg.finish(),
        sidecar: side.finish(),
    })
}

type ByRep<'a> = BTreeMap<&'a str, BTreeMap<u64, (f64, f64)>>;

/// (θ̂, SE) of one DGM indexed by repetition, per method.
fn paired<'a>(records: &'a [EstimatesRecord], spec: &FigureSpec) -> Result<(String, Vec<&'a str>, ByRep<'a>)> {
    let rows = usable(records, spec);
    let dgm = match &spec.dgm_id {
        Some(d) => d.clone(),
        None => rows
            .first()
            .map(|r| r.dgm_id.clone())
            .ok_or_else(|| Error::InsufficientData("no usable estimates to plot".into()))?,
    };
    let rows: Vec<&EstimatesRecord> = rows.into_iter().filter(|r| r.dgm_id == dgm).collect();
    let methods = first_seen(rows.iter().map(|r| r.method_id.as_str()));
    if methods.len() < 2 {
        return Err(Error::InsufficientMethods(methods.len()));
    }
    let mut by: ByRep<'a> = BTreeMap::new();
    for r in rows {
        if let Some(t) = r.theta_hat {
            let se = r.se_hat.unwrap_or(f64::NAN);
            by.entry(r.method_id.as_str()).or_default().insert(r.repetition, (t, se));
        }
    }
    Ok((dgm, methods, by))
}

/// Method-against-method scatter, one point per repetition. θ̂ pairs fill
/// the upper triangle and SE pairs the lower; each cell has a line of
/// equality.
pub fn render_scatter_matrix(records: &[EstimatesRecord], spec: &FigureSpec) -> Result<Figure> {
    let (dgm, methods, by) = paired(records, spec)?;
    let m = methods.len();
    let s = spec.panel_width;
    let width = 2.0 * GAP + m as f64 * s;
    let height = TOP + GAP + m as f64 * s;
    let theta_dom = padded_domain(by.values().flat_map(|v| v.values().map(|p| p.0)));
    let se_dom = padded_domain(by.values().flat_map(|v| v.values().map(|p| p.1)));
    let mut svg = Svg::new(width, height);
    let mut side = Sidecar::new(&["dgm_id", "variable", "method_x", "method_y", "repetition", "value_x", "value_y", "x", "y"]);
    svg.text("title", GAP, TOP - 10.0, "start", &dgm);
    for (i, my) in methods.iter().enumerate() {
        for (j, mx) in methods.iter().enumerate() {
            let (left, top) = (GAP + j as f64 * s, TOP + i as f64 * s);
            if i == j {
                svg.rect("frame", left, top, s, s);
                svg.text("title", left + s / 2.0, top + s / 2.0, "middle", mx);
                continue;
            }
            let (variable, dom, pick): (&str, (f64, f64), fn(&(f64, f64)) -> f64) =
                if i < j { ("theta_hat", theta_dom, |p| p.0) } else { ("se_hat", se_dom, |p| p.1) };
            let xscale = Scale::new(dom, (left + 4.0, left + s - 4.0));
            let yscale = Scale::new(dom, (top + s - 4.0, top + 4.0));
            svg.open(
                "cell",
                &format!(
                    " data-variable=\"{variable}\" data-method-x=\"{}\" data-method-y=\"{}\"{}{}",
                    escape(mx),
                    escape(my),
                    xscale.attrs("x"),
                    yscale.attrs("y")
                ),
            );
            svg.rect("frame", left, top, s, s);
            svg.line("reference", xscale.map(dom.0), yscale.map(dom.0), xscale.map(dom.1), yscale.map(dom.1), "");
            let (ax, ay) = (&by[mx], &by[my]);
            for (rep, px) in ax {
                let Some(py) = ay.get(rep) else { continue };
                let (vx, vy) = (pick(px), pick(py));
                if !(vx.is_finite() && vy.is_finite()) {
                    continue;
                }
                let (x, y) = (xscale.map(vx), yscale.map(vy));
                svg.circle("point", x, y, 1.5, &format!(" data-rep=\"{rep}\""));
                side.row([
                    dgm.clone(),
                    variable.to_string(),
                    mx.to_string(),
                    my.to_string(),
                    rep.to_string(),
                    fmt_float(vx),
                    fmt_float(vy),
                    num(x),
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

/// Difference against the comparator plotted against the pair mean, one
/// panel per other method, with a reference line at zero.
pub fn render_diff_vs_mean(records: &[EstimatesRecord], spec: &FigureSpec) -> Result<Figure> {
    let (dgm, methods, by) = paired(records, spec)?;
    let reference = spec.comparator.clone().unwrap_or_else(|| methods[0].to_string());
    let Some(base) = by.get(reference.as_str()) else {
        return Err(Error::InvalidParameter(format!("comparator `{reference}` has no estimates in `{dgm}`")));
    };
    let others: Vec<&str> = methods.iter().copied().filter(|m| *m != reference).collect();
    let (w, h) = (spec.panel_width, spec.panel_height);
    let width = 2.0 * GAP + others.len() as f64 * (w + GAP);
    let height = TOP + h + 2.0 * GAP;
    let mut svg = Svg::new(width, height);
    let mut side = Sidecar::new(&["dgm_id", "method_id", "comparator", "repetition", "mean", "difference", "x", "y"]);
    svg.text("title", GAP, TOP - 10.0, "start", &dgm);
    for (k, method) in others.iter().enumerate() {
        let pts: Vec<(u64, f64, f64)> = by[method]
            .iter()
            .filter_map(|(rep, (t, _))| base.get(rep).map(|(b, _)| (*rep, 0.5 * (t + b), t - b)))
            .collect();
        let left = 2.0 * GAP + k as f64 * (w + GAP);
        let xscale = Scale::new(padded_domain(pts.iter().map(|p| p.1)), (left, left + w));
        let yscale = Scale::new(padded_domain(pts.iter().map(|p| p.2).chain([0.0])), (TOP + h, TOP));
        svg.open(
            "panel",
            &format!(
                " data-method=\"{}\" data-comparator=\"{}\"{}{}",
                escape(method),
                escape(&reference),
                xscale.attrs("x"),
                yscale.attrs("y")
            ),
        );
        svg.rect("frame", left, TOP, w, h);
        let y0 = yscale.map(0.0);
        svg.line("reference", left, y0, left + w, y0, "");
        svg.text("", left + w / 2.0, TOP + h + 14.0, "middle", &format!("{method} - {reference}"));
        for (rep, mean, diff) in pts {
            let (x, y) = (xscale.map(mean), yscale.map(diff));
            svg.circle("point", x, y, 1.5, &format!(" data-rep=\"{rep}\""));
            side.row([
                dgm.clone(),
                method.to_string(),
                reference.clone(),
                rep.to_string(),
                fmt_float(mean),
                fmt_float(diff),
                num(x),
                num(y),
            ]);
        }
        svg.close();
    }
    Ok(Figure {
        svg: svg.finish(),
        sidecar: side.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::ErrorCode;
    use crate::report::FigureKind;

    fn rec(method: &str, rep: u64, t: f64) -> EstimatesRecord {
        EstimatesRecord {
            dgm_id: "base".into(),
            repetition: rep,
            method_id: method.into(),
            estimand_id: "theta".into(),
            theta_hat: Some(t),
            se_hat: Some(0.1),
            df: None,
            ci_low: Some(t - 0.2),
            ci_high: Some(t + 0.2),
            p_value: Some(0.5),
            converged: true,
            error_code: ErrorCode::None,
        }
    }

    #[test]
    fn one_method_is_not_enough() {
        let r = vec![rec("a", 1, 0.0), rec("a", 2, 0.1)];
        let err = render_scatter_matrix(&r, &FigureSpec::new(FigureKind::ScatterMatrix)).unwrap_err();
        assert!(matches!(err, Error::InsufficientMethods(1)));
        assert!(render_strip(&r, &FigureSpec::new(FigureKind::Strip)).is_ok());
    }

    #[test]
    fn differences_pair_by_repetition() {
        let r = vec![rec("a", 1, 1.0), rec("b", 1, 1.5), rec("a", 2, 2.0), rec("b", 2, 1.0)];
        let fig = render_diff_vs_mean(&r, &FigureSpec::new(FigureKind::DiffVsMean)).unwrap();
        let lines: Vec<&str> = fig.sidecar.lines().skip(1).collect();
        assert_eq!(lines.len(), 2);
        let diff: f64 = lines[1].split(',').nth(5).unwrap().parse().unwrap();
        assert_eq!(diff, -1.0);
    }
}
