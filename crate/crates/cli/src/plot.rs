//! Minimal standalone SVG plots for the three CSV series the CLI emits.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// Step plot of `r,F` columns.
    Cdf,
    /// `scale,var` columns, with error bars from `var_se` when present.
    VarianceVsScale,
    /// `r,tail` columns on log-log axes with a least-squares line.
    TailLoglog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub svg: String,
    /// Fitted log-log slope (tail plots only).
    pub slope: Option<f64>,
}

/// Reads the named columns of a CSV document as numbers.
fn columns(csv_text: &str, names: &[&str], optional: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let malformed = |m: String| CliError::Schema(format!("csv: {m}"));
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    let mut idx = Vec::new();
    for name in names {
        let i = header
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| malformed(format!("missing column {name}")))?;
        idx.push(Some(i));
    }
    for name in optional {
        idx.push(header.iter().position(|h| h == *name));
    }
    let mut cols = vec![Vec::new(); idx.len()];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        for (k, i) in idx.iter().enumerate() {
            let Some(i) = i else { continue };
            let field = rec.get(*i).unwrap_or("");
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| malformed(format!("row {}: {field:?} is not a number", line + 1)))?;
            cols[k].push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(malformed("no data rows".into()));
    }
    Ok(cols)
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

struct Frame {
    x: [f64; 2],
    y: [f64; 2],
    log: bool,
}

impl Frame {
    fn new(xs: &[f64], ys: &[f64], log: bool) -> Self {
        let range = |v: &[f64]| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                [lo, hi]
            } else {
                let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
                [lo - pad, hi + pad]
            }
        };
        Self { x: range(xs), y: range(ys), log }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x[0]) / (self.x[1] - self.x[0]) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y[0]) / (self.y[1] - self.y[0]) * (HEIGHT - 2.0 * MARGIN)
    }

    fn label(&self, v: f64) -> String {
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3}")
        }
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (x0, x1) = (MARGIN, WIDTH - MARGIN);
        let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(
            out,
            r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
        );
        for k in 0..TICKS {
            let t = k as f64 / (TICKS - 1) as f64;
            let xv = self.x[0] + t * (self.x[1] - self.x[0]);
            let yv = self.y[0] + t * (self.y[1] - self.y[0]);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                out,
                r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                y0 + 4.0,
                y0 + 18.0,
                self.label(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 4.0,
                x0 - 6.0,
                py + 4.0,
                self.label(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{xlabel}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.2})">{ylabel}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0
        );
    }
}

fn document(body: &str, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n{body}</svg>\n",
        WIDTH / 2.0
    )
}

fn polyline(frame: &Frame, pts: &[(f64, f64)], colour: &str) -> String {
    let mut d = String::new();
    for (k, (x, y)) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, frame.px(*x), frame.py(*y));
    }
    format!("<path d=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\"/>\n", d.trim_end())
}

pub fn emit_plot(csv_text: &str, kind: PlotKind) -> Result<Plot, CliError> {
    match kind {
        PlotKind::Cdf => {
            let cols = columns(csv_text, &["r", "F"], &[])?;
            let (r, f) = (&cols[0], &cols[1]);
            let right = r.iter().cloned().fold(0.0, f64::max) * 1.1 + 1e-9;
            let frame = Frame::new(&[0.0, right], &[0.0, 1.0], false);
            let mut pts = vec![(0.0, 0.0)];
            let mut level = 0.0;
            for (x, y) in r.iter().zip(f) {
                pts.push((*x, level));
                pts.push((*x, *y));
                level = *y;
            }
            pts.push((right, level));
            let mut body = String::new();
            frame.axes(&mut body, "r", "F(r)");
            body.push_str(&polyline(&frame, &pts, "steelblue"));
            Ok(Plot { svg: document(&body, "match distance distribution"), slope: None })
        }
        PlotKind::VarianceVsScale => {
            let cols = columns(csv_text, &["scale", "var"], &["var_se"])?;
            let (s, v) = (&cols[0], &cols[1]);
            let se = &cols[2];
            let mut ys = v.clone();
            for (i, e) in se.iter().enumerate() {
                ys.push(v[i] + e);
                ys.push(v[i] - e);
            }
            let frame = Frame::new(s, &ys, false);
            let mut body = String::new();
            frame.axes(&mut body, "scale", "variance");
            let pts: Vec<(f64, f64)> = s.iter().cloned().zip(v.iter().cloned()).collect();
            body.push_str(&polyline(&frame, &pts, "firebrick"));
            for (i, e) in se.iter().enumerate() {
                let x = frame.px(s[i]);
                let _ = writeln!(
                    body,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="gray"/>"#,
                    frame.py(v[i] - e),
                    frame.py(v[i] + e)
                );
            }
            for (x, y) in &pts {
                let _ = writeln!(
                    body,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="firebrick"/>"#,
                    frame.px(*x),
                    frame.py(*y)
                );
            }
            Ok(Plot { svg: document(&body, "variance of the linear statistic"), slope: None })
        }
        PlotKind::TailLoglog => {
            let cols = columns(csv_text, &["r", "tail"], &[])?;
            let (lx, ly): (Vec<f64>, Vec<f64>) = cols[0]
                .iter()
                .zip(&cols[1])
                .filter(|(r, t)| **r > 0.0 && **t > 0.0)
                .map(|(r, t)| (r.log10(), t.log10()))
                .unzip();
            if lx.is_empty() {
                return Err(CliError::Schema("csv: no positive tail values to plot".into()));
            }
            let slope = fit_slope(&lx, &ly);
            let frame = Frame::new(&lx, &ly, true);
            let mut body = String::new();
            frame.axes(&mut body, "log10 r", "log10 P(X > r)");
            let pts: Vec<(f64, f64)> = lx.iter().cloned().zip(ly.iter().cloned()).collect();
            body.push_str(&polyline(&frame, &pts, "steelblue"));
            if let Some(b) = slope {
                let n = lx.len() as f64;
                let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
                let ends = [frame.x[0], frame.x[1]].map(|x| (x, my + b * (x - mx)));
                body.push_str(&polyline(&frame, &ends, "darkorange"));
                let _ = writeln!(
                    body,
                    r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">fitted slope {b:.3}</text>"#,
                    WIDTH - MARGIN,
                    MARGIN + 14.0
                );
            }
            Ok(Plot { svg: document(&body, "match distance tail"), slope })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_slope_of_inverse_square() {
        let mut csv_text = String::from("r,tail\n");
        for k in 0..8 {
            let r = 2f64.powi(k);
            csv_text.push_str(&format!("{r},{}\n", r.powi(-2)));
        }
        let plot = emit_plot(&csv_text, PlotKind::TailLoglog).unwrap();
        assert!((plot.slope.unwrap() + 2.0).abs() < 0.05);
        assert!(plot.svg.starts_with("<svg"));
    }

    #[test]
    fn cdf_single_jump() {
        let plot = emit_plot("r,F,count\n2,1,1\n", PlotKind::Cdf).unwrap();
        // the step rises at r = 2 from 0 to 1
        let frame = Frame::new(&[0.0, 2.2 + 1e-9], &[0.0, 1.0], false);
        let jump = format!("L{:.2},{:.2} L{:.2},{:.2}", frame.px(2.0), frame.py(0.0), frame.px(2.0), frame.py(1.0));
        assert!(plot.svg.contains(&jump), "{}", plot.svg);
    }

    #[test]
    fn constant_variance_is_flat() {
        let plot = emit_plot("scale,reps,mean,var,var_se\n1,10,0,3,0\n2,10,0,3,0\n4,10,0,3,0\n", PlotKind::VarianceVsScale)
            .unwrap();
        let path = plot.svg.lines().find(|l| l.contains("firebrick") && l.starts_with("<path")).unwrap();
        let ys: Vec<&str> = path.split(' ').filter_map(|t| t.split(',').nth(1)).collect();
        assert!(ys.windows(2).all(|w| w[0].trim_matches('"') == w[1].trim_matches('"')), "{path}");
    }

    #[test]
    fn malformed_csv() {
        assert!(emit_plot("a,b\n1,2\n", PlotKind::Cdf).is_err());
        assert!(emit_plot("r,F\n1,x\n", PlotKind::Cdf).is_err());
        assert!(emit_plot("r,F\n", PlotKind::Cdf).is_err());
    }
}
