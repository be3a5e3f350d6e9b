//! Tables and SVG figures.
//!
//! Every figure comes with a CSV sidecar holding the plotted values and the
//! pixel coordinates derived from them. Coordinates are written in shortest
//! round-trip form, and each panel records its axis domains and ranges as
//! `data-` attributes, so any plotted position can be recomputed.

mod explore;
mod lollipop;
mod nested;
mod svg;
mod table;
mod zip;

use serde::{Deserialize, Serialize};

pub use explore::{render_diff_vs_mean, render_scatter_matrix, render_strip};
pub use lollipop::{reference_value, render_lollipop};
pub use nested::render_nested_loop;
pub use svg::Scale;
pub use table::{format_cell, mcse_decimals, render_table, Table, TableLayout};
pub use zip::render_zip_plot;

use crate::error::{Error, Result};
use crate::perf::{Measure, PerformanceEstimate, TrueValues};
use crate::records::EstimatesRecord;

/// An SVG document and the CSV it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub svg: String,
    pub sidecar: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    Zip,
    Lollipop,
    NestedLoop,
    Strip,
    ScatterMatrix,
    DiffVsMean,
}

impl FigureKind {
    pub const ALL: [FigureKind; 6] = [
        FigureKind::Zip,
        FigureKind::Lollipop,
        FigureKind::NestedLoop,
        FigureKind::Strip,
        FigureKind::ScatterMatrix,
        FigureKind::DiffVsMean,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureKind::Zip => "zip",
            FigureKind::Lollipop => "lollipop",
            FigureKind::NestedLoop => "nested_loop",
            FigureKind::Strip => "strip",
            FigureKind::ScatterMatrix => "scatter_matrix",
            FigureKind::DiffVsMean => "diff_vs_mean",
        }
    }
}

impl std::str::FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        FigureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown figure kind `{s}`")))
    }
}

/// What to draw and how big.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub kind: FigureKind,
    /// Panel size in pixels.
    pub panel_width: f64,
    pub panel_height: f64,
    pub alpha: f64,
    /// Zip plot only: show the top fraction of ranks, e.g. 0.2.
    pub zoom: Option<f64>,
    /// Lollipop: measures to stack, in order. Nested loop: the first one is plotted.
    pub measures: Vec<Measure>,
    /// Nested loop: factor nesting, slowest first.
    pub factor_order: Vec<String>,
    /// Diff-vs-mean reference method.
    pub comparator: Option<String>,
    /// Scatter matrix: which DGM; defaults to the first.
    pub dgm_id: Option<String>,
    pub estimand_id: Option<String>,
}

impl FigureSpec {
    pub fn new(kind: FigureKind) -> Self {
        let (w, h) = match kind {
            FigureKind::Zip => (260.0, 320.0),
            FigureKind::Lollipop => (240.0, 22.0),
            FigureKind::NestedLoop => (640.0, 300.0),
            FigureKind::Strip => (300.0, 60.0),
            FigureKind::ScatterMatrix => (180.0, 180.0),
            FigureKind::DiffVsMean => (240.0, 200.0),
        };
        FigureSpec {
            kind,
            panel_width: w,
            panel_height: h,
            alpha: 0.05,
            zoom: None,
            measures: Vec::new(),
            factor_order: Vec::new(),
            comparator: None,
            dgm_id: None,
            estimand_id: None,
        }
    }
}

/// Data a figure may draw on.
#[derive(Debug, Clone, Copy)]
pub struct FigureInput<'a> {
    pub estimates: &'a [EstimatesRecord],
    pub performance: &'a [PerformanceEstimate],
    pub truths: &'a TrueValues,
}

pub fn render_figure(spec: &FigureSpec, input: FigureInput<'_>) -> Result<Figure> {
    match spec.kind {
        FigureKind::Zip => render_zip_plot(input.estimates, input.truths, spec),
        FigureKind::Lollipop => render_lollipop(input.performance, spec),
        FigureKind::NestedLoop => render_nested_loop(input.performance, spec),
        FigureKind::Strip => render_strip(input.estimates, spec),
        FigureKind::ScatterMatrix => render_scatter_matrix(input.estimates, spec),
        FigureKind::DiffVsMean => render_diff_vs_mean(input.estimates, spec),
    }
}
