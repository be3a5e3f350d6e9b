use std::collections::BTreeSet;

use super::svg::{escape, num, padded_domain, Scale, Sidecar, Svg};
use super::{Figure, FigureSpec};
use crate::dgm::parse_dgm_id;
use crate::error::{Error, Result};
use crate::fmt_float;
use crate::perf::{Measure, PerformanceEstimate};

const LEFT: f64 = 60.0;
const TOP: f64 = 30.0;
const BAND: f64 = 22.0;
const PALETTE: [&str; 6] = ["#2b6cb0", "#c05621", "#2f855a", "#8e3ea8", "#b7791f", "#4a5568"];

/// Nested loop plot of one measure across a full factorial grid.
///
/// Scenarios are ordered lexicographically by factor level, the first
/// factor in `factor_order` varying slowest. Each method is a step line;
/// below the axis each factor gets a band tracing its level.
pub fn render_nested_loop(perf: &[PerformanceEstimate], spec: &FigureSpec) -> Result<Figure> {
    let measure = spec.measures.first().copied().unwrap_or(Measure::Bias);
    let rows: Vec<&PerformanceEstimate> = perf
        .iter()
        .filter(|p| p.measure == measure)
        .filter(|p| spec.estimand_id.as_deref().is_none_or(|e| p.estimand_id == e))
        .collect();
    if rows.is_empty() {
        return Err(Error::InsufficientData(format!("no `{measure}` estimates to plot")));
    }

    let mut dgms: Vec<(String, Vec<(String, f64)>)> = Vec::new();
    for p in &rows {
        if dgms.iter().any(|(id, _)| *id == p.dgm_id) {
            continue;
        }
        let levels = parse_dgm_id(&p.dgm_id)
            .ok_or_else(|| Error::InvalidParameter(format!("dgm id `{}` has no factor levels", p.dgm_id)))?;
        dgms.push((p.dgm_id.clone(), levels));
    }
    let names: Vec<String> = dgms[0].1.iter().map(|(n, _)| n.clone()).collect();
    let mut order: Vec<String> = spec.factor_order.clone();
    for n in &names {
        if !order.contains(n) {
            order.push(n.clone());
        }
    }
    if order.len() != names.len() || dgms.iter().any(|(_, l)| l.len() != names.len()) {
        return Err(Error::NonFactorialGrid(order));
    }
    let value_of = |levels: &[(String, f64)], name: &str| levels.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
    let mut keyed: Vec<(Vec<f64>, &str)> = Vec::new();
    for (id, levels) in &dgms {
        let key = order
            .iter()
            .map(|n| value_of(levels, n).ok_or_else(|| Error::NonFactorialGrid(order.clone())))
            .collect::<Result<Vec<f64>>>()?;
        keyed.push((key, id.as_str()));
    }
    let level_sets: Vec<Vec<f64>> = (0..order.len())
        .map(|i| {
            let mut v: Vec<f64> = keyed.iter().map(|(k, _)| k[i]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let full: usize = level_sets.iter().map(Vec::len).product();
    let distinct: BTreeSet<Vec<u64>> = keyed.iter().map(|(k, _)| k.iter().map(|v| v.to_bits()).collect()).collect();
    if full != keyed.len() || distinct.len() != keyed.len() {
        return Err(Error::NonFactorialGrid(order));
    }
    keyed.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut methods: Vec<&str> = Vec::new();
    for p in &rows {
        if !methods.contains(&p.method_id.as_str()) {
            methods.push(&p.method_id);
        }
    }
    let (w, h) = (spec.panel_width, spec.panel_height);
    let n = keyed.len();
    let bands_h = BAND * order.len() as f64;
    let width = LEFT + w + 130.0;
    let height = TOP + h + 20.0 + bands_h + 20.0;
    let xscale = Scale::new((0.0, n as f64), (LEFT, LEFT + w));
    let ys = padded_domain(rows.iter().map(|p| p.estimate).chain(super::reference_value(measure, spec.alpha)));
    let yscale = Scale::new(ys, (TOP + h, TOP));
    let mut svg = Svg::new(width, height);
    let mut side = Sidecar::new(&["position", "dgm_id", "method_id", "estimate", "x1", "x2", "y"]);
    svg.text("title", LEFT, TOP - 10.0, "start", measure.label());
    svg.open(
        "panel",
        &format!(" data-measure=\"{}\"{}{}", measure.as_str(), xscale.attrs("x"), yscale.attrs("y")),
    );
    svg.rect("frame", LEFT, TOP, w, h);
    if let Some(r) = super::reference_value(measure, spec.alpha) {
        let y = yscale.map(r);
        svg.line("reference", LEFT, y, LEFT + w, y, "");
    }
    svg.text("", LEFT - 4.0, TOP + h, "end", &format!("{:.3}", ys.0));
    svg.text("", LEFT - 4.0, TOP + 10.0, "end", &format!("{:.3}", ys.1));
    for (mi, method) in methods.iter().enumerate() {
        let colour = PALETTE[mi % PALETTE.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for (pos, (_, id)) in keyed.iter().enumerate() {
            let (x1, x2) = (xscale.map(pos as f64), xscale.map(pos as f64 + 1.0));
            let est = rows.iter().find(|p| p.dgm_id == *id && p.method_id == *method).map(|p| p.estimate);
            match est.filter(|e| e.is_finite()) {
                Some(e) => {
                    let y = yscale.map(e);
                    let cmd = if pen_up { 'M' } else { 'L' };
                    d.push_str(&format!("{cmd}{} {} L{} {} ", num(x1), num(y), num(x2), num(y)));
                    pen_up = false;
                    side.row([
                        pos.to_string(),
                        id.to_string(),
                        method.to_string(),
                        fmt_float(e),
                        num(x1),
                        num(x2),
                        num(y),
                    ]);
                }
                None => pen_up = true,
            }
        }
        svg.path(
            "method",
            d.trim_end(),
            &format!(" stroke=\"{colour}\" data-method=\"{}\"", escape(method)),
        );
        let ly = TOP + 14.0 * mi as f64 + 10.0;
        svg.line("method", LEFT + w + 10.0, ly, LEFT + w + 30.0, ly, &format!(" stroke=\"{colour}\""));
        svg.text("", LEFT + w + 34.0, ly + 4.0, "start", method);
    }
    svg.close();

    let band_top = TOP + h + 20.0;
    for (fi, name) in order.iter().enumerate() {
        let top = band_top + fi as f64 * BAND;
        let levels = &level_sets[fi];
        let bscale = Scale::new((0.0, (levels.len().max(2) - 1) as f64), (top + BAND - 6.0, top + 2.0));
        svg.open(
            "band",
            &format!(" data-factor=\"{}\"{}{}", escape(name), xscale.attrs("x"), bscale.attrs("y")),
        );
        let mut d = String::new();
        for (pos, (key, _)) in keyed.iter().enumerate() {
            let idx = levels.iter().position(|v| *v == key[fi]).unwrap_or(0);
            let y = bscale.map(idx as f64);
            let cmd = if pos == 0 { 'M' } else { 'L' };
            d.push_str(&format!(
                "{cmd}{} {} L{} {} ",
                num(xscale.map(pos as f64)),
                num(y),
                num(xscale.map(pos as f64 + 1.0)),
                num(y)
            ));
        }
        svg.path("factor", d.trim_end(), "");
        let label = format!(
            "{name}: {}",
            levels.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
        );
        svg.text("", LEFT + w + 10.0, top + BAND - 8.0, "start", &label);
        svg.close();
    }
    Ok(Figure {
        svg: svg.finish(),
        sidecar: side.finish(),
    })
}
