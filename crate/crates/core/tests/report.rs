use std::collections::BTreeMap;

use simstudy::config::StudyConfig;
use simstudy::engine::{self, RunOptions, StudyOutput};
use simstudy::perf::{Measure, Summary};
use simstudy::presets;
use simstudy::records::EstimatesRecord;
use simstudy::report::{
    render_diff_vs_mean, render_figure, render_lollipop, render_nested_loop, render_strip, render_zip_plot,
    FigureInput, FigureKind, FigureSpec, Scale,
};

fn small() -> (StudyConfig, StudyOutput, Summary) {
    let mut cfg = presets::survival();
    cfg.n_sim = 120;
    cfg.dgm.base.set_factor("n_obs", 150.0).unwrap();
    let out = engine::run_study(&cfg, &RunOptions::default()).unwrap();
    let summary = out.summarize(&cfg).unwrap();
    (cfg, out, summary)
}

fn attr(tag: &str, name: &str) -> Option<String> {
    let key = format!(" {name}=\"");
    let start = tag.find(&key)? + key.len();
    Some(tag[start..start + tag[start..].find('"')?].to_string())
}

fn pair(s: &str) -> (f64, f64) {
    let mut it = s.split(' ').map(|v| v.parse::<f64>().unwrap());
    (it.next().unwrap(), it.next().unwrap())
}

/// Opening tags of every group with class `class`, with their scales.
fn groups(svg: &str, class: &str) -> Vec<(String, Scale, Scale)> {
    let open = format!("<g class=\"{class}\"");
    svg.split(open.as_str())
        .skip(1)
        .map(|chunk| {
            let tag = chunk[..chunk.find('>').unwrap()].to_string();
            let x = Scale::new(
                pair(&attr(&tag, "data-x-domain").unwrap()),
                pair(&attr(&tag, "data-x-range").unwrap()),
            );
            let y = Scale::new(
                pair(&attr(&tag, "data-y-domain").unwrap()),
                pair(&attr(&tag, "data-y-range").unwrap()),
            );
            (tag, x, y)
        })
        .collect()
}

fn group_bodies<'a>(svg: &'a str, class: &str) -> Vec<(&'a str, &'a str)> {
    let open = format!("<g class=\"{class}\"");
    svg.split(open.as_str())
        .skip(1)
        .map(|chunk| {
            let end = chunk.find('>').unwrap();
            (&chunk[..end], &chunk[end..chunk.find("</g>").unwrap()])
        })
        .collect()
}

fn rows(sidecar: &str) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_reader(sidecar.as_bytes());
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers.iter().map(String::from).zip(rec.iter().map(String::from)).collect()
        })
        .collect()
}

fn f(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

#[test]
fn zip_coordinates_recompute_from_data() {
    let (_, out, _) = small();
    let fig = render_zip_plot(&out.estimates, &out.manifest.true_values(), &FigureSpec::new(FigureKind::Zip)).unwrap();
    let facets = groups(&fig.svg, "facet");
    assert_eq!(facets.len(), 6);
    let side = rows(&fig.sidecar);
    assert_eq!(side.len(), 720);
    for row in &side {
        let (_, x, y) = facets
            .iter()
            .find(|(tag, _, _)| {
                attr(tag, "data-dgm").as_deref() == Some(&row["dgm_id"])
                    && attr(tag, "data-method").as_deref() == Some(&row["method_id"])
            })
            .unwrap();
        assert!(close(x.map(f(row, "ci_low")), f(row, "x1")));
        assert!(close(x.map(f(row, "ci_high")), f(row, "x2")));
        assert!(close(y.map(f(row, "centile")), f(row, "y")));
        let z = (f(row, "theta_hat") + 0.5) / f(row, "se_hat");
        assert!(close(z, f(row, "z")));
    }
}

#[test]
fn zoomed_zip_plots_only_top_ranks() {
    let (_, out, _) = small();
    let mut spec = FigureSpec::new(FigureKind::Zip);
    spec.zoom = Some(0.25);
    let fig = render_zip_plot(&out.estimates, &out.manifest.true_values(), &spec).unwrap();
    for row in rows(&fig.sidecar) {
        assert_eq!(row["plotted"] == "1", f(&row, "centile") >= 75.0);
    }
    spec.zoom = Some(1.5);
    assert!(render_zip_plot(&out.estimates, &out.manifest.true_values(), &spec).is_err());
}

#[test]
fn intervals_that_all_cover_draw_one_class() {
    let (_, out, _) = small();
    let wide: Vec<EstimatesRecord> = out
        .estimates
        .iter()
        .cloned()
        .map(|mut r| {
            r.ci_low = Some(-50.0);
            r.ci_high = Some(50.0);
            r
        })
        .collect();
    let fig = render_zip_plot(&wide, &out.manifest.true_values(), &FigureSpec::new(FigureKind::Zip)).unwrap();
    assert!(!fig.svg.contains("class=\"noncover\""));
    assert_eq!(fig.svg.matches("class=\"cover\"").count(), wide.len());
}

#[test]
fn misspecified_exponential_misses_on_the_null_side() {
    let cfg = presets::survival();
    let out = engine::run_study(&cfg, &RunOptions::default()).unwrap();
    let fig = render_zip_plot(&out.estimates, &out.manifest.true_values(), &FigureSpec::new(FigureKind::Zip)).unwrap();
    let (mut right, mut left) = (0, 0);
    for row in rows(&fig.sidecar) {
        if row["dgm_id"] != "gamma=1.5" || row["method_id"] != "exponential" || row["covers"] == "1" {
            continue;
        }
        if f(&row, "ci_low") > -0.5 {
            right += 1;
        } else {
            left += 1;
        }
    }
    assert!(right > left, "{right} right of theta, {left} left");
}

#[test]
fn lollipop_intervals_span_mcse() {
    let (_, _, summary) = small();
    let mut spec = FigureSpec::new(FigureKind::Lollipop);
    spec.measures = vec![Measure::Bias, Measure::Coverage, Measure::Empse];
    let fig = render_lollipop(&summary.estimates, &spec).unwrap();
    let panels = groups(&fig.svg, "panel");
    let side = rows(&fig.sidecar);
    assert_eq!(side.len(), 18);
    for row in &side {
        let (lo, hi, est, mcse) = (f(row, "lower"), f(row, "upper"), f(row, "estimate"), f(row, "mcse"));
        assert!(close((hi - lo) / 2.0, 1.959963984540054 * mcse));
        assert!(close((hi + lo) / 2.0, est));
        let (_, x, _) = panels
            .iter()
            .find(|(tag, _, _)| {
                attr(tag, "data-measure").as_deref() == Some(&row["measure"])
                    && attr(tag, "data-dgm").as_deref() == Some(&row["dgm_id"])
            })
            .unwrap();
        assert!(close(x.map(est), f(row, "x")));
        assert!(close(x.map(lo), f(row, "x_lower")));
        assert!(close(x.map(hi), f(row, "x_upper")));
    }
    let coverage_ref: Vec<f64> = side.iter().filter(|r| r["measure"] == "coverage").map(|r| f(r, "reference")).collect();
    assert!(coverage_ref.iter().all(|v| *v == 95.0));
}

#[test]
fn nested_loop_reordering_keeps_values() {
    let mut cfg = presets::survival();
    cfg.n_sim = 30;
    cfg.dgm.base.set_factor("n_obs", 120.0).unwrap();
    let grid = cfg.dgm.grid.as_mut().unwrap();
    grid.factors.push(simstudy::dgm::Factor {
        name: "theta".into(),
        levels: vec![-0.5, 0.0, 0.5],
    });
    let out = engine::run_study(&cfg, &RunOptions::default()).unwrap();
    let summary = out.summarize(&cfg).unwrap();
    let values = |order: Vec<String>| {
        let mut spec = FigureSpec::new(FigureKind::NestedLoop);
        spec.factor_order = order;
        let fig = render_nested_loop(&summary.estimates, &spec).unwrap();
        let side = rows(&fig.sidecar);
        let seq: Vec<String> = side.iter().filter(|r| r["method_id"] == "cox").map(|r| r["dgm_id"].clone()).collect();
        let mut all: Vec<(String, String, String)> = side
            .into_iter()
            .map(|r| (r["dgm_id"].clone(), r["method_id"].clone(), r["estimate"].clone()))
            .collect();
        all.sort();
        (seq, all)
    };
    let (a_seq, a) = values(vec!["gamma".into(), "theta".into()]);
    let (b_seq, b) = values(vec!["theta".into(), "gamma".into()]);
    assert_eq!(a, b);
    assert_eq!(a.len(), 18);
    assert_ne!(a_seq, b_seq);
    assert_eq!(b_seq[0], "gamma=1;theta=-0.5");
    assert_eq!(b_seq[1], "gamma=1.5;theta=-0.5");
}

#[test]
fn strip_mean_marker_is_sample_mean() {
    let (_, out, _) = small();
    let fig = render_strip(&out.estimates, &FigureSpec::new(FigureKind::Strip)).unwrap();
    let side = rows(&fig.sidecar);
    let bodies = group_bodies(&fig.svg, "strip");
    assert_eq!(bodies.len(), 12);
    for (tag, body) in bodies {
        let (dgm, method, variable) = (
            attr(tag, "data-dgm").unwrap(),
            attr(tag, "data-method").unwrap(),
            attr(tag, "data-variable").unwrap(),
        );
        let vals: Vec<f64> = side
            .iter()
            .filter(|r| r["dgm_id"] == dgm && r["method_id"] == method && r["variable"] == variable)
            .map(|r| f(r, "value"))
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let marker: f64 = attr(body, "data-mean").unwrap().parse().unwrap();
        assert!(close(marker, mean), "{marker} vs {mean}");
    }
}

#[test]
fn identical_methods_give_zero_differences() {
    let (_, out, _) = small();
    let mut twin: Vec<EstimatesRecord> = out.estimates.iter().filter(|r| r.method_id == "cox").cloned().collect();
    let copy: Vec<EstimatesRecord> = twin
        .iter()
        .cloned()
        .map(|mut r| {
            r.method_id = "cox_again".into();
            r
        })
        .collect();
    twin.extend(copy);
    let fig = render_diff_vs_mean(&twin, &FigureSpec::new(FigureKind::DiffVsMean)).unwrap();
    let (_, _, y) = &groups(&fig.svg, "panel")[0];
    for row in rows(&fig.sidecar) {
        assert_eq!(f(&row, "difference"), 0.0);
        assert!(close(f(&row, "y"), y.map(0.0)));
    }
}

#[test]
fn figures_are_deterministic() {
    let (_, out, summary) = small();
    let truths = out.manifest.true_values();
    for kind in [
        FigureKind::Zip,
        FigureKind::Lollipop,
        FigureKind::NestedLoop,
        FigureKind::Strip,
        FigureKind::ScatterMatrix,
        FigureKind::DiffVsMean,
    ] {
        let input = FigureInput {
            estimates: &out.estimates,
            performance: &summary.estimates,
            truths: &truths,
        };
        let spec = FigureSpec::new(kind);
        let a = render_figure(&spec, input).unwrap();
        let b = render_figure(&spec, input).unwrap();
        assert_eq!(a, b, "{}", kind.as_str());
        assert!(a.svg.starts_with("<?xml") && a.svg.trim_end().ends_with("</svg>"));
    }
}
