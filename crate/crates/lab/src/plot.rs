//! Plain SVG line charts for the tables that read well as curves.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::config::Experiment;
use crate::output::{Cell, Table};

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn value(c: Cell) -> f64 {
    match c {
        Cell::F(v) => v,
        Cell::I(v) => v as f64,
    }
}

fn column(t: &Table, name: &str) -> Option<usize> {
    t.columns.iter().position(|c| c.name == name)
}

/// Splits `t` into one series per distinct value of the `group` columns.
fn grouped(t: &Table, x: &str, y: &str, group: &[&str]) -> Vec<Series> {
    let (Some(xi), Some(yi)) = (column(t, x), column(t, y)) else {
        return Vec::new();
    };
    let gi: Vec<usize> = group.iter().filter_map(|g| column(t, g)).collect();
    let mut map: BTreeMap<Vec<i64>, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &t.rows {
        let key = gi.iter().map(|&i| value(row[i]) as i64).collect();
        map.entry(key).or_default().push((value(row[xi]), value(row[yi])));
    }
    map.into_iter()
        .map(|(key, points)| {
            let label = group.iter().zip(&key).map(|(g, v)| format!("{g}={v}")).collect::<Vec<_>>().join(" ");
            Series { label, points }
        })
        .collect()
}

/// SVG files to write next to the tables of `experiment`.
pub fn plots_for(experiment: Experiment, tables: &[Table]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for t in tables {
        let chart = match (experiment, t.file) {
            (Experiment::Bands, "bands.csv") => {
                Some(line_chart("band energies", "g/omega", "energy", &grouped(t, "g_over_omega", "energy", &["n", "sigma"]), false))
            }
            (_, "scaling.csv") => Some(line_chart("scaling", "N", "ratio", &grouped(t, "N", "ratio", &[]), true)),
            (Experiment::Decoherence, "decoherence.csv") => {
                Some(line_chart("time-averaged coherence", "N", "|rho_ud|", &grouped(t, "N", "offdiag", &[]), true))
            }
            (Experiment::Cat, "cat.csv") => Some(line_chart("normalization", "t", "N^2", &grouped(t, "t", "norm_sq", &[]), false)),
            _ => None,
        };
        if let Some(svg) = chart {
            out.push((t.file.replace(".csv", ".svg"), svg));
        }
    }
    out
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log: bool) -> String {
    let tx = |v: f64| if log { v.max(f64::MIN_POSITIVE).log10() } else { v };
    let pts = series.iter().flat_map(|s| s.points.iter().map(|&(x, y)| (tx(x), tx(y))));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts.filter(|p| p.0.is_finite() && p.1.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (tx(y) - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let scale = if log { " (log10)" } else { "" };
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}{scale}</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}{scale}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (v, anchor, x, y) in [
        (x0, "start", MARGIN, H - MARGIN + 16.0),
        (x1, "end", W - MARGIN, H - MARGIN + 16.0),
        (y0, "end", MARGIN - 4.0, H - MARGIN),
        (y1, "end", MARGIN - 4.0, MARGIN + 10.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (k, series) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = series
            .points
            .iter()
            .filter(|p| tx(p.0).is_finite() && tx(p.1).is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#, path.join(" "), series.label);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_well_formed() {
        let svg = line_chart("t", "x", "y", &[Series { label: "a".into(), points: vec![(1.0, 1.0), (2.0, 4.0)] }], true);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("polyline"));
    }
}
