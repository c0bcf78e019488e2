//! Minimal SVG line charts: first column on x, every other numeric column as
//! a series.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::csv::{fmt_g, Table};
use crate::CliError;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

pub fn render_svg(table: &Table) -> String {
    let x = table.column(0);
    let series: Vec<(usize, Vec<f64>)> = (1..table.header.len())
        .map(|i| (i, table.column(i)))
        .filter(|(_, ys)| ys.iter().any(|v| v.is_finite()))
        .collect();
    let xr = range(x.iter().copied()).unwrap_or((0.0, 1.0));
    let yr = range(series.iter().flat_map(|(_, ys)| ys.iter().copied())).unwrap_or((0.0, 1.0));
    let sx = |v: f64| MARGIN + (v - xr.0) / (xr.1 - xr.0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - yr.0) / (yr.1 - yr.0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        table.name
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (v, anchor_x) in [(xr.0, MARGIN), (xr.1, WIDTH - MARGIN)] {
        let _ = writeln!(
            s,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN + 16.0,
            fmt_g(v)
        );
    }
    for (v, anchor_y) in [(yr.0, HEIGHT - MARGIN), (yr.1, MARGIN)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{anchor_y}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            fmt_g(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        table.header[0]
    );

    for (k, (col, ys)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (xv, yv) in x.iter().zip(ys) {
            if !(xv.is_finite() && yv.is_finite()) {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { 'L' } else { 'M' }, sx(*xv), sy(*yv));
            pen_down = true;
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
        let ly = MARGIN + 14.0 * (k as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{colour}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 6.0,
            table.header[*col]
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(table: &Table, dir: &Path) -> Result<PathBuf, CliError> {
    let name = table.name.trim_end_matches(".csv").to_string() + ".svg";
    let path = dir.join(name);
    fs::write(&path, render_svg(table)).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_one_path_per_series() {
        let mut t = Table::new("demo.csv", &["x", "a", "b", "status"]);
        for i in 0..5 {
            let x = i as f64;
            t.push(vec![x.into(), (x * x).into(), (-x).into(), "ok".into()]);
        }
        let svg = render_svg(&t);
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn constant_series_still_renders() {
        let mut t = Table::new("flat.csv", &["x", "y"]);
        t.push(vec![0.0.into(), 1.0.into()]);
        t.push(vec![1.0.into(), 1.0.into()]);
        assert!(!render_svg(&t).contains("NaN"));
    }
}
