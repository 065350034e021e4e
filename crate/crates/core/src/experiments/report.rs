//! Sweep tables as CSV and log-log SVG plots.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{MixingTime, ScalingFit};
use crate::{Error, Result};

pub const SWEEP_COLUMNS: [&str; 6] = ["kappa", "T", "censored", "slope_pred", "slope_fit", "ci_halfwidth"];

/// One CSV row; fit columns are empty when no fit was made.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub t: f64,
    pub censored: bool,
    pub slope_pred: f64,
    pub slope_fit: Option<f64>,
    pub ci_halfwidth: Option<f64>,
}

impl SweepRow {
    pub fn from_result(m: &MixingTime, slope_pred: f64, fit: Option<&ScalingFit>) -> Self {
        Self {
            kappa: m.kappa,
            t: m.t,
            censored: m.censored,
            slope_pred,
            slope_fit: fit.map(|f| f.slope),
            ci_halfwidth: fit.map(|f| f.ci_half_width),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.kappa.to_string(),
            r.t.to_string(),
            r.censored.to_string(),
            r.slope_pred.to_string(),
            opt(r.slope_fit),
            opt(r.ci_halfwidth),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(SWEEP_COLUMNS) {
        return Err(Error::Format(format!(
            "sweep CSV header must be {}, found {:?}",
            SWEEP_COLUMNS.join(","),
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |c: &str| Error::Format(format!("sweep row {}: bad {c}", k + 2));
        let num = |i: usize| -> Result<f64> { rec[i].parse().map_err(|_| bad(SWEEP_COLUMNS[i])) };
        let onum = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        rows.push(SweepRow {
            kappa: num(0)?,
            t: num(1)?,
            censored: rec[2].parse().map_err(|_| bad("censored"))?,
            slope_pred: num(3)?,
            slope_fit: onum(4)?,
            ci_halfwidth: onum(5)?,
        });
    }
    Ok(rows)
}

/// Log-log plot of `T` against `κ`: points (hollow when censored), the
/// fitted line, the predicted-slope guide through the data's centroid, and
/// a banner with `|slope_fit − slope_pred|`.
pub fn render_sweep_svg(rows: &[SweepRow], fit: Option<&ScalingFit>, title: &str) -> String {
    let (w, h, m) = (640.0, 440.0, 60.0);
    let pts: Vec<(f64, f64, bool)> = rows
        .iter()
        .filter(|r| r.kappa > 0.0 && r.t > 0.0)
        .map(|r| (r.kappa.log10(), r.t.log10(), r.censored))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, _) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 0.0, 0.0, 1.0);
    }
    let pad = |a: f64, b: f64| {
        let d = ((b - a) * 0.1).max(0.05);
        (a - d, b + d)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
        b = h - m,
        r = w - m
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">log10 kappa</text>"#,
        w / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">log10 T</text>"#,
        h / 2.0,
        h / 2.0
    );
    for i in 0..=4 {
        let xv = x0 + (x1 - x0) * i as f64 / 4.0;
        let yv = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{:.2}</text>"#,
            sx(xv),
            h - m + 14.0,
            xv
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.2}</text>"#,
            m - 4.0,
            sy(yv) + 3.0,
            yv
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        title.replace('&', "&amp;").replace('<', "&lt;")
    );
    let line = |s: &mut String, slope: f64, icpt: f64, color: &str, dash: &str| {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            sx(x0),
            sy(icpt + slope * x0),
            sx(x1),
            sy(icpt + slope * x1)
        );
    };
    let pred = rows.first().map(|r| r.slope_pred);
    let used: Vec<&(f64, f64, bool)> = pts.iter().filter(|p| !p.2).collect();
    if let (Some(sp), false) = (pred, used.is_empty()) {
        let cx = used.iter().map(|p| p.0).sum::<f64>() / used.len() as f64;
        let cy = used.iter().map(|p| p.1).sum::<f64>() / used.len() as f64;
        line(&mut s, sp, cy - sp * cx, "gray", r#" stroke-dasharray="6 4""#);
    }
    if let Some(f) = fit {
        // the fit lives in natural logs; same slope, intercept / ln 10
        line(&mut s, f.slope, f.intercept / std::f64::consts::LN_10, "crimson", "");
    }
    for &(x, y, c) in &pts {
        let fill = if c { "white" } else { "navy" };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{fill}" stroke="navy"/>"#,
            sx(x),
            sy(y)
        );
    }
    let banner = match (fit, pred) {
        (Some(f), Some(sp)) => format!(
            "slope_fit = {:.4} ± {:.4}, slope_pred = {:.4}, |slope_fit − slope_pred| = {:.4}",
            f.slope,
            f.ci_half_width,
            sp,
            (f.slope - sp).abs()
        ),
        _ => "no fit".to_string(),
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="44" font-size="12" text-anchor="middle">{banner}</text>"#,
        w / 2.0
    );
    s.push_str("</svg>\n");
    s
}
