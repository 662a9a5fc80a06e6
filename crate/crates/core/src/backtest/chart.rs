use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;

use chrono::NaiveDateTime;

use crate::error::Result;
use crate::money::Usd;

use super::BacktestReport;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Cumulative pnl of each series on the shared, sorted set of decision times.
fn aligned(series: &[(&str, &BacktestReport)]) -> (Vec<NaiveDateTime>, Vec<Vec<Usd>>) {
    let times: Vec<NaiveDateTime> = series
        .iter()
        .flat_map(|(_, r)| r.trades.iter().map(|t| t.decision_time))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let curves = series
        .iter()
        .map(|(_, r)| {
            let mut acc = Usd::ZERO;
            let mut next = r.trades.iter().peekable();
            times
                .iter()
                .map(|t| {
                    while let Some(tr) = next.next_if(|tr| tr.decision_time <= *t) {
                        acc += tr.pnl;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    (times, curves)
}

/// `decision_time,<name>...` with cumulative pnl, carried forward between trades.
pub fn write_equity_csv<W: Write>(mut sink: W, series: &[(&str, &BacktestReport)]) -> Result<()> {
    let (times, curves) = aligned(series);
    let names: Vec<&str> = series.iter().map(|(n, _)| *n).collect();
    writeln!(sink, "decision_time,{}", names.join(","))?;
    for (i, t) in times.iter().enumerate() {
        let values: Vec<String> = curves.iter().map(|c| c[i].to_string()).collect();
        writeln!(
            sink,
            "{},{}",
            t.format("%Y-%m-%dT%H:%M:%S"),
            values.join(",")
        )?;
    }
    Ok(())
}

/// Line chart of cumulative pnl, one polyline per series.
pub fn equity_svg(title: &str, series: &[(&str, &BacktestReport)]) -> String {
    let (w, h, pad) = (800.0, 400.0, 50.0);
    let (times, curves) = aligned(series);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{pad}" y="24" font-size="15">{}</text>"#,
        escape(title)
    );
    if times.is_empty() {
        let _ = writeln!(svg, r#"<text x="{pad}" y="{}">no trades</text>"#, h / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }
    let values = curves.iter().flatten().map(|u| u.to_f64());
    let lo = values.clone().fold(0.0_f64, f64::min);
    let hi = values.fold(0.0_f64, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |i: usize| {
        pad + (w - 2.0 * pad)
            * if times.len() > 1 {
                i as f64 / (times.len() - 1) as f64
            } else {
                0.5
            }
    };
    let y = |v: f64| h - pad - (h - 2.0 * pad) * (v - lo) / span;

    let _ = writeln!(
        svg,
        r#"<line x1="{pad}" y1="{y0:.1}" x2="{x1}" y2="{y0:.1}" stroke="grey" stroke-dasharray="4 3"/>"#,
        y0 = y(0.0),
        x1 = w - pad
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#,
        h - pad
    );
    let _ = writeln!(svg, r#"<text x="4" y="{:.1}">{hi:.0}</text>"#, y(hi) + 4.0);
    let _ = writeln!(svg, r#"<text x="4" y="{:.1}">{lo:.0}</text>"#, y(lo) + 4.0);
    let _ = writeln!(
        svg,
        r#"<text x="{pad}" y="{}">{}</text><text x="{}" y="{}" text-anchor="end">{}</text>"#,
        h - pad + 18.0,
        times[0].format("%Y-%m-%d %H:%M"),
        w - pad,
        h - pad + 18.0,
        times[times.len() - 1].format("%Y-%m-%d %H:%M")
    );
    for (k, ((name, _), curve)) in series.iter().zip(&curves).enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = curve
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.1},{:.1}", x(i), y(v.to_f64())))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = pad + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{lx2}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{tx}" y="{ty}">{}</text>"#,
            escape(name),
            lx = w - pad - 120.0,
            lx2 = w - pad - 100.0,
            tx = w - pad - 95.0,
            ty = ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
