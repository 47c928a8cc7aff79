//! Static SVG emission for precision/success curves.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::Curve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One polyline per curve on shared axes. The x axis spans each curve's own
/// threshold range (normalized), the y axis spans [0, 1]; labels carry the
/// summary numbers.
pub fn emit_plot(curves: &[Curve], labels: &[String], out_path: &Path) -> Result<()> {
    assert!(!curves.is_empty(), "emit_plot needs at least one curve");
    assert_eq!(curves.len(), labels.len(), "one label per curve");
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let x_at = |frac: f64| MARGIN_L + frac * pw;
    let y_at = |v: f64| MARGIN_T + (1.0 - v) * ph;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // gridlines and y tick labels
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let y = y_at(v);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n",
            x_at(0.0),
            x_at(1.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{v:.2}</text>\n",
            x_at(0.0) - 6.0,
            y + 4.0
        ));
    }
    // x tick labels as fractions of each curve's max threshold
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{f:.2}</text>\n",
            x_at(f),
            y_at(0.0) + 18.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">threshold (fraction of range)</text>\n",
        x_at(0.5),
        HEIGHT - 12.0
    ));

    // axes
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        x_at(0.0),
        y_at(0.0),
        x_at(1.0),
        y_at(0.0)
    ));
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        x_at(0.0),
        y_at(0.0),
        x_at(0.0),
        y_at(1.0)
    ));

    for (k, (curve, label)) in curves.iter().zip(labels).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let t_max = curve.thresholds.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
        let points: Vec<String> = curve
            .thresholds
            .iter()
            .zip(&curve.values)
            .map(|(t, v)| format!("{:.2},{:.2}", x_at(t / t_max), y_at(*v)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        // legend entry
        let ly = MARGIN_T + 18.0 + 18.0 * k as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            x_at(1.0) - 220.0,
            x_at(1.0) - 190.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{}</text>\n",
            x_at(1.0) - 184.0,
            ly + 4.0,
            escape(label)
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(out_path, svg).map_err(|e| Error::io(out_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_curve(v: f64) -> Curve {
        Curve { thresholds: (0..=50).map(|t| t as f64).collect(), values: vec![v; 51] }
    }

    /// Minimal well-formedness check: every opened tag closes in order and
    /// quotes balance inside tags.
    fn assert_well_formed_xml(text: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = text;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').map(|e| start + e).expect("unclosed tag");
            let tag = &rest[start + 1..end];
            assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes in <{tag}>");
            if let Some(name) = tag.strip_prefix('/') {
                assert_eq!(stack.pop().as_deref(), Some(name.trim()), "mismatched closing tag");
            } else if !tag.ends_with('/') && !tag.starts_with('?') && !tag.starts_with('!') {
                let name = tag.split_whitespace().next().unwrap().to_string();
                stack.push(name);
            }
            rest = &rest[end + 1..];
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    #[test]
    fn flat_curve_renders_at_top_gridline() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.svg");
        emit_plot(&[flat_curve(1.0)], &["flat".to_string()], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<polyline").count(), 1);
        // y(1.0) = MARGIN_T
        assert!(text.contains(&format!("{:.2}", MARGIN_T)));
        assert_well_formed_xml(&text);
    }

    #[test]
    fn two_curves_give_two_polylines_and_two_legend_entries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("two.svg");
        emit_plot(
            &[flat_curve(0.5), flat_curve(0.25)],
            &["a & b".to_string(), "c<d".to_string()],
            &path,
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<polyline").count(), 2);
        assert!(text.contains("a &amp; b"));
        assert!(text.contains("c&lt;d"));
        assert_well_formed_xml(&text);
    }
}
