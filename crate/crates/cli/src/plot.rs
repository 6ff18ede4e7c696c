//! Self-contained SVG line charts.
//!
//! Output depends only on the input table and options: series keep their
//! first-appearance order, colors come from a fixed palette and all
//! coordinates are printed with two decimals.

use std::fmt::Write as _;

use anyhow::{bail, Result};

use crate::table::Table;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub x: String,
    pub y: String,
    pub series: Option<String>,
    pub log_x: bool,
    pub title: Option<String>,
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round step from {1, 2, 5}·10^k giving about `target` ticks.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

pub fn render(table: &Table, opts: &PlotOptions) -> Result<String> {
    if table.rows.is_empty() {
        bail!("CSV input has no data rows");
    }
    let xi = table.column(&opts.x)?;
    let yi = table.column(&opts.y)?;
    let si = opts.series.as_deref().map(|s| table.column(s)).transpose()?;

    let mut series: Vec<Series> = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let parse = |i: usize, name: &str| -> Result<Option<f64>> {
            let cell = &row[i];
            if cell.is_empty() {
                return Ok(None);
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                Ok(_) => Ok(None),
                Err(_) => bail!("row {}: column `{name}` value `{cell}` is not a number", r + 2),
            }
        };
        let (Some(x), Some(y)) = (parse(xi, &opts.x)?, parse(yi, &opts.y)?) else {
            continue;
        };
        if opts.log_x && x <= 0.0 {
            bail!("row {}: log-x axis needs positive `{}`, got {x}", r + 2, opts.x);
        }
        let label = match si {
            Some(i) => format!("{} = {}", opts.series.as_deref().unwrap_or(""), row[i]),
            None => opts.y.clone(),
        };
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((x, y)),
            None => series.push(Series {
                label,
                points: vec![(x, y)],
            }),
        }
    }
    if series.is_empty() {
        bail!("no finite ({}, {}) pairs to plot", opts.x, opts.y);
    }

    let tx = |x: f64| if opts.log_x { x.log10() } else { x };
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(tx(x));
        x1 = x1.max(tx(x));
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 == x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let px = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#)?;
    if let Some(t) = &opts.title {
        writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(t))?;
    }

    // Axes and ticks.
    writeln!(
        s,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#444"/>"##
    )?;
    let xticks: Vec<(f64, String)> = if opts.log_x {
        let (a, b) = (x0.floor() as i32, x1.ceil() as i32);
        (a..=b)
            .map(|k| k as f64)
            .filter(|k| *k >= x0 - 1e-9 && *k <= x1 + 1e-9)
            .map(|k| (k, tick_label(10f64.powf(k))))
            .collect()
    } else {
        nice_ticks(x0, x1, 6).into_iter().map(|v| (v, tick_label(v))).collect()
    };
    for (v, label) in xticks {
        let x = LEFT + (v - x0) / (x1 - x0) * pw;
        writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0
        )?;
    }
    for v in nice_ticks(y0, y1, 6) {
        let y = py(v);
        writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="#444"/><line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT + pw,
            LEFT - 8.0,
            y + 4.0,
            tick_label(v)
        )?;
    }
    if y0 < 0.0 && y1 > 0.0 {
        let y = py(0.0);
        writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
            LEFT + pw
        )?;
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 15.0,
        escape(&opts.x)
    )?;
    writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&opts.y)
    )?;

    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            pts.join(" ")
        )?;
        let ly = TOP + 10.0 + 20.0 * k as f64;
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + pw + 12.0,
            LEFT + pw + 36.0,
            LEFT + pw + 42.0,
            ly + 4.0,
            escape(&ser.label)
        )?;
    }
    s.push_str("</svg>\n");
    Ok(s)
}
