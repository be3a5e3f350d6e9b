use std::fmt::Write as _;

const STYLE: &str = "\
.cover{stroke:#2b6cb0;stroke-width:1}\
.noncover{stroke:#8e3ea8;stroke-width:1}\
.mcse{stroke:#d4a017;fill:#d4a017;stroke-width:1.5}\
.reference{stroke:#555;stroke-width:1;stroke-dasharray:4 3}\
.stem{stroke:#333;stroke-width:1.5}\
.point{fill:#2b6cb0;fill-opacity:0.5;stroke:none}\
.mean{stroke:#d4a017;stroke-width:2.5}\
.method{fill:none;stroke-width:1.5}\
.factor{fill:none;stroke:#777;stroke-width:1}\
.frame{fill:none;stroke:#bbb}\
text{font-family:sans-serif;font-size:11px;fill:#222}\
.title{font-size:12px;font-weight:bold}";

/// Shortest round-trip decimal form, without a negative zero.
pub(crate) fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Affine map from a data domain to a pixel range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub d0: f64,
    pub d1: f64,
    pub r0: f64,
    pub r1: f64,
}

impl Scale {
    pub fn new(domain: (f64, f64), range: (f64, f64)) -> Self {
        Scale {
            d0: domain.0,
            d1: domain.1,
            r0: range.0,
            r1: range.1,
        }
    }

    pub fn map(&self, v: f64) -> f64 {
        self.r0 + (v - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)
    }

    /// Pixels per data unit.
    pub fn slope(&self) -> f64 {
        (self.r1 - self.r0) / (self.d1 - self.d0)
    }

    /// `data-<axis>-domain` and `data-<axis>-range` attributes.
    pub(crate) fn attrs(&self, axis: &str) -> String {
        format!(
            " data-{axis}-domain=\"{} {}\" data-{axis}-range=\"{} {}\"",
            num(self.d0),
            num(self.d1),
            num(self.r0),
            num(self.r1)
        )
    }
}

/// Padded domain covering all finite `values`.
pub(crate) fn padded_domain(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.into_iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span == 0.0 {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

pub(crate) struct Svg {
    out: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut out = String::new();
        let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
            w = num(width),
            h = num(height)
        );
        let _ = writeln!(out, "<style>{STYLE}</style>");
        let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#fff\"/>", num(width), num(height));
        Svg { out }
    }

    pub fn open(&mut self, class: &str, attrs: &str) {
        let _ = writeln!(self.out, "<g class=\"{class}\"{attrs}>");
    }

    pub fn close(&mut self) {
        self.out.push_str("</g>\n");
    }

    pub fn line(&mut self, class: &str, x1: f64, y1: f64, x2: f64, y2: f64, attrs: &str) {
        let _ = writeln!(
            self.out,
            "<line class=\"{class}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"{attrs}/>",
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }

    pub fn circle(&mut self, class: &str, cx: f64, cy: f64, r: f64, attrs: &str) {
        let _ = writeln!(
            self.out,
            "<circle class=\"{class}\" cx=\"{}\" cy=\"{}\" r=\"{}\"{attrs}/>",
            num(cx),
            num(cy),
            num(r)
        );
    }

    pub fn rect(&mut self, class: &str, x: f64, y: f64, w: f64, h: f64) {
        let _ = writeln!(
            self.out,
            "<rect class=\"{class}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    pub fn path(&mut self, class: &str, d: &str, attrs: &str) {
        let _ = writeln!(self.out, "<path class=\"{class}\" d=\"{d}\"{attrs}/>");
    }

    pub fn text(&mut self, class: &str, x: f64, y: f64, anchor: &str, content: &str) {
        let cls = if class.is_empty() { String::new() } else { format!(" class=\"{class}\"") };
        let _ = writeln!(
            self.out,
            "<text{cls} x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\">{}</text>",
            num(x),
            num(y),
            escape(content)
        );
    }

    pub fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Builds a CSV sidecar with a fixed header.
pub(crate) struct Sidecar {
    w: csv::Writer<Vec<u8>>,
}

impl Sidecar {
    pub fn new(header: &[&str]) -> Self {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Sidecar { w }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory writer")).expect("UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1 + 0.2, -3.5, 1e-7, 123456.789] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(-0.0), "0");
    }

    #[test]
    fn scale_maps_endpoints() {
        let s = Scale::new((-1.0, 3.0), (100.0, 20.0));
        assert_eq!(s.map(-1.0), 100.0);
        assert_eq!(s.map(3.0), 20.0);
        assert_eq!(s.slope(), -20.0);
    }

    #[test]
    fn degenerate_domains_are_widened() {
        assert_eq!(padded_domain([2.0, 2.0]), (1.8, 2.2));
        assert_eq!(padded_domain([0.0]), (-1.0, 1.0));
        assert_eq!(padded_domain(std::iter::empty()), (0.0, 1.0));
    }

    #[test]
    fn text_is_escaped() {
        let mut s = Svg::new(10.0, 10.0);
        s.text("", 1.0, 2.0, "start", "a<b & \"c\"");
        assert!(s.finish().contains("a&lt;b &amp; &quot;c&quot;"));
    }
}
