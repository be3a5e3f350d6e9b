use super::svg::{escape, num, padded_domain, Scale, Sidecar, Svg};
use super::{Figure, FigureSpec};
use crate::dist;
use crate::error::{Error, Result};
use crate::fmt_float;
use crate::perf::{cells, TrueValues};
use crate::records::EstimatesRecord;

const MARGIN: f64 = 40.0;
const GAP: f64 = 30.0;

struct Ranked<'a> {
    row: &'a EstimatesRecord,
    z: f64,
    covers: bool,
    centile: f64,
    rank: usize,
}

/// Intervals ranked by the fractional centile of `|z|`, `z = (θ̂ - θ)/SE`.
fn rank_rows<'a>(rows: &[&'a EstimatesRecord], theta: f64) -> Vec<Ranked<'a>> {
    let mut v: Vec<Ranked<'a>> = rows
        .iter()
        .filter(|r| r.usable() && r.se_hat.is_some() && r.covers(theta).is_some())
        .map(|&r| {
            let (t, se) = (r.theta_hat.unwrap_or(f64::NAN), r.se_hat.unwrap_or(f64::NAN));
            let z = if se > 0.0 {
                (t - theta) / se
            } else if t == theta {
                0.0
            } else {
                f64::INFINITY.copysign(t - theta)
            };
            Ranked {
                row: r,
                z,
                covers: r.covers(theta) == Some(true),
                centile: 0.0,
                rank: 0,
            }
        })
        .collect();
    v.sort_by(|a, b| a.z.abs().total_cmp(&b.z.abs()).then(a.row.repetition.cmp(&b.row.repetition)));
    let n = v.len() as f64;
    for (i, r) in v.iter_mut().enumerate() {
        r.rank = i + 1;
        r.centile = 100.0 * (i + 1) as f64 / n;
    }
    v
}

/// Zip plot: one facet per (dgm, method, estimand), DGMs down, methods across.
///
/// Each interval is a horizontal segment at the centile of its `|z|`,
/// classed `cover` or `noncover`. Rules of class `mcse` mark the Monte
/// Carlo interval for coverage and a `reference` line marks θ. With
/// `zoom = Some(f)` only the top fraction `f` of ranks is drawn.
pub fn render_zip_plot(records: &[EstimatesRecord], truths: &TrueValues, spec: &FigureSpec) -> Result<Figure> {
    let zoom = spec.zoom.unwrap_or(1.0);
    if !(zoom > 0.0 && zoom <= 1.0) {
        return Err(Error::InvalidParameter(format!("zoom must lie in (0, 1], got {zoom}")));
    }
    let y_floor = 100.0 * (1.0 - zoom);
    let c = cells(records);
    let rows_of_facets: Vec<(usize, usize)> = {
        let mut v = Vec::new();
        for &(d, _, e) in c.rows.keys() {
            if !v.contains(&(d, e)) {
                v.push((d, e));
            }
        }
        v
    };
    let (w, h) = (spec.panel_width, spec.panel_height);
    let width = 2.0 * MARGIN + c.methods.len() as f64 * (w + GAP) - GAP;
    let height = 2.0 * MARGIN + rows_of_facets.len() as f64 * (h + GAP + 14.0) - GAP;
    let mut svg = Svg::new(width, height);
    let mut side = Sidecar::new(&[
        "dgm_id",
        "method_id",
        "estimand_id",
        "repetition",
        "theta_hat",
        "se_hat",
        "ci_low",
        "ci_high",
        "z",
        "rank",
        "centile",
        "covers",
        "plotted",
        "x1",
        "x2",
        "y",
    ]);
    let crit = dist::normal_critical(0.05);

    for (fr, &(d, e)) in rows_of_facets.iter().enumerate() {
        for (m, method) in c.methods.iter().enumerate() {
            let Some(rows) = c.rows.get(&(d, m, e)) else { continue };
            let (dgm, estimand) = (c.dgms[d], c.estimands[e]);
            let left = MARGIN + m as f64 * (w + GAP);
            let top = MARGIN + fr as f64 * (h + GAP + 14.0) + 14.0;
            svg.text("title", left, top - 4.0, "start", &format!("{dgm} / {method}"));
            let Some(theta) = truths.get(dgm, estimand) else {
                return Err(Error::InvalidParameter(format!(
                    "no true value for dgm `{dgm}`, estimand `{estimand}`"
                )));
            };
            let ranked = rank_rows(rows, theta);
            let plotted: Vec<&Ranked> = ranked.iter().filter(|r| r.centile >= y_floor).collect();
            let xs = padded_domain(
                plotted
                    .iter()
                    .flat_map(|r| [r.row.ci_low.unwrap_or(theta), r.row.ci_high.unwrap_or(theta)])
                    .chain([theta]),
            );
            let xscale = Scale::new(xs, (left, left + w));
            let yscale = Scale::new((y_floor, 100.0), (top + h, top));
            let covered = ranked.iter().filter(|r| r.covers).count();
            svg.open(
                "facet",
                &format!(
                    " data-dgm=\"{}\" data-method=\"{}\" data-estimand=\"{}\" data-theta=\"{}\" data-n=\"{}\" data-covered=\"{}\"{}{}",
                    escape(dgm),
                    escape(method),
                    escape(estimand),
                    num(theta),
                    ranked.len(),
                    covered,
                    xscale.attrs("x"),
                    yscale.attrs("y")
                ),
            );
            svg.rect("frame", left, top, w, h);
            if ranked.is_empty() {
                svg.text("", left + w / 2.0, top + h / 2.0, "middle", "no converged repetitions");
                svg.close();
                continue;
            }
            for r in &ranked {
                let shown = r.centile >= y_floor;
                let (x1, x2, y) = if shown {
                    (
                        xscale.map(r.row.ci_low.unwrap_or(f64::NAN)),
                        xscale.map(r.row.ci_high.unwrap_or(f64::NAN)),
                        yscale.map(r.centile),
                    )
                } else {
                    (f64::NAN, f64::NAN, f64::NAN)
                };
                if shown {
                    let class = if r.covers { "cover" } else { "noncover" };
                    svg.line(class, x1, y, x2, y, &format!(" data-rep=\"{}\"", r.row.repetition));
                }
                side.row([
                    dgm.to_string(),
                    method.to_string(),
                    estimand.to_string(),
                    r.row.repetition.to_string(),
                    fmt_float(r.row.theta_hat.unwrap_or(f64::NAN)),
                    fmt_float(r.row.se_hat.unwrap_or(f64::NAN)),
                    fmt_float(r.row.ci_low.unwrap_or(f64::NAN)),
                    fmt_float(r.row.ci_high.unwrap_or(f64::NAN)),
                    fmt_float(r.z),
                    r.rank.to_string(),
                    fmt_float(r.centile),
                    u8::from(r.covers).to_string(),
                    u8::from(shown).to_string(),
                    if shown { num(x1) } else { String::new() },
                    if shown { num(x2) } else { String::new() },
                    if shown { num(y) } else { String::new() },
                ]);
            }
            let n = ranked.len() as f64;
            let p = covered as f64 / n;
            let mcse = 100.0 * (p * (1.0 - p) / n).sqrt();
            for level in [100.0 * p - crit * mcse, 100.0 * p + crit * mcse] {
                if level >= y_floor && level <= 100.0 {
                    let y = yscale.map(level);
                    svg.line("mcse", left, y, left + w, y, &format!(" data-level=\"{}\"", num(level)));
                }
            }
            let x = xscale.map(theta);
            svg.line("reference", x, top, x, top + h, "");
            svg.text("", left, top + h + 12.0, "start", &format!("{:.3}", xs.0));
            svg.text("", left + w, top + h + 12.0, "end", &format!("{:.3}", xs.1));
            svg.close();
        }
    }
    svg.text("", 6.0, height / 2.0, "start", "centile of |z|");
    Ok(Figure {
        svg: svg.finish(),
        sidecar: side.finish(),
    })
}
