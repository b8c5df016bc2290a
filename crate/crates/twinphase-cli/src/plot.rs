//! Minimal SVG charting of a sweep's `metrics.csv`: reconstruction quality
//! and step estimates against the defocus distance, one series per
//! acquisition mode. No plotting dependency; the markup is assembled by
//! hand because two scatter-line panels are all that is needed.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use twinphase::error::{Error, Result};
use twinphase::io::read_csv;

#[derive(Args)]
pub struct PlotCmd {
    /// Sweep output directory containing metrics.csv.
    #[arg(long, value_name = "DIR")]
    run: PathBuf,
    /// Output SVG path (default: <run>/plots.svg).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

struct Series {
    mode: String,
    dz: Vec<f64>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

const PALETTE: [&str; 6] = ["#c44e52", "#4c72b0", "#55a868", "#8172b2", "#ccb974", "#64b5cd"];

fn column(header: &[String], name: &str) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| Error::Format {
        path: "metrics.csv".into(),
        reason: format!("missing column '{name}'"),
    })
}

fn parse(row: &[String], idx: usize) -> Result<f64> {
    row.get(idx)
        .and_then(|s| s.parse::<f64>().ok())
        .ok_or_else(|| Error::Format {
            path: "metrics.csv".into(),
            reason: format!("bad numeric field in column {idx}"),
        })
}

/// Group one (value, spread) pair of columns into per-mode series.
fn collect_series(
    header: &[String],
    rows: &[Vec<String>],
    value_col: &str,
    std_col: &str,
) -> Result<Vec<Series>> {
    let c_mode = column(header, "mode")?;
    let c_dz = column(header, "dz_um")?;
    let c_val = column(header, value_col)?;
    let c_std = column(header, std_col)?;
    let mut series: Vec<Series> = Vec::new();
    for row in rows {
        let mode = row
            .get(c_mode)
            .ok_or_else(|| Error::Format {
                path: "metrics.csv".into(),
                reason: "missing mode field".into(),
            })?
            .clone();
        let dz = parse(row, c_dz)?;
        let val = parse(row, c_val)?;
        let std = parse(row, c_std)?;
        if let Some(s) = series.iter_mut().find(|s| s.mode == mode) {
            s.dz.push(dz);
            s.mean.push(val);
            s.std.push(std);
        } else {
            series.push(Series { mode, dz: vec![dz], mean: vec![val], std: vec![std] });
        }
    }
    Ok(series)
}

/// Round a raw tick interval up to 1, 2 or 5 times a power of ten.
fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.abs().log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(min: f64, max: f64) -> Vec<f64> {
    let step = nice_step((max - min) / 4.0);
    let mut t = (min / step).ceil() * step;
    let mut out = Vec::new();
    while t <= max + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Panel {
    fn sx(&self, x: f64) -> f64 {
        self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.w
    }

    fn sy(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.ymin) / (self.ymax - self.ymin) * self.h
    }

    fn frame(&self, svg: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let _ = write!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333" stroke-width="1"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14" font-weight="bold">{title}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 - 12.0
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 34.0
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
            self.x0 - 46.0,
            self.y0 + self.h / 2.0,
            self.x0 - 46.0,
            self.y0 + self.h / 2.0
        );
        for t in ticks(self.xmin, self.xmax) {
            let x = self.sx(t);
            let _ = write!(
                svg,
                r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#333"/>"##,
                self.y0 + self.h,
                self.y0 + self.h + 4.0
            );
            let _ = write!(
                svg,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="11">{t}</text>"#,
                self.y0 + self.h + 16.0
            );
        }
        for t in ticks(self.ymin, self.ymax) {
            let y = self.sy(t);
            let _ = write!(
                svg,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#333"/>"##,
                self.x0 - 4.0,
                self.x0
            );
            let _ = write!(
                svg,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##,
                self.x0,
                self.x0 + self.w
            );
            let _ = write!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{t:.3}</text>"#,
                self.x0 - 7.0,
                y + 4.0
            );
        }
    }

    fn series(&self, svg: &mut String, s: &Series, color: &str, with_bars: bool) {
        if with_bars {
            for ((&x, &m), &sd) in s.dz.iter().zip(&s.mean).zip(&s.std) {
                if !sd.is_finite() || sd <= 0.0 {
                    continue;
                }
                let (px, y1, y2) = (self.sx(x), self.sy(m - sd), self.sy(m + sd));
                let _ = write!(
                    svg,
                    r#"<line x1="{px:.1}" y1="{y1:.1}" x2="{px:.1}" y2="{y2:.1}" stroke="{color}" stroke-width="1"/>"#
                );
                for y in [y1, y2] {
                    let _ = write!(
                        svg,
                        r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="1"/>"#,
                        px - 3.0,
                        px + 3.0
                    );
                }
            }
        }
        let pts: Vec<String> = s
            .dz
            .iter()
            .zip(&s.mean)
            .filter(|(_, m)| m.is_finite())
            .map(|(&x, &m)| format!("{:.1},{:.1}", self.sx(x), self.sy(m)))
            .collect();
        let _ = write!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            pts.join(" ")
        );
        for p in &pts {
            let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = write!(svg, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
    }
}

fn bounds(series: &[Series], with_bars: bool) -> (f64, f64, f64, f64) {
    let (mut xmin, mut xmax, mut ymin, mut ymax) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for ((&x, &m), &sd) in s.dz.iter().zip(&s.mean).zip(&s.std) {
            if !m.is_finite() {
                continue;
            }
            let spread = if with_bars && sd.is_finite() { sd } else { 0.0 };
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(m - spread);
            ymax = ymax.max(m + spread);
        }
    }
    let pad = 0.06 * (ymax - ymin).max(1e-9);
    (xmin, xmax, ymin - pad, ymax + pad)
}

pub fn cmd_plot(cmd: &PlotCmd) -> Result<()> {
    let csv_path = cmd.run.join("metrics.csv");
    let (header, rows) = crate::named_input(&csv_path, read_csv(&csv_path))?;
    if rows.is_empty() {
        return Err(Error::Format {
            path: csv_path.display().to_string(),
            reason: "no data rows".into(),
        });
    }
    let pearson = collect_series(&header, &rows, "pearson_mean", "pearson_std")?;
    let steps = collect_series(&header, &rows, "step_mean_rad", "step_std_rad")?;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="900" height="430" font-family="sans-serif"><rect width="900" height="430" fill="white"/>"#
    );

    let (xmin, xmax, ymin, ymax) = bounds(&pearson, false);
    let p1 = Panel { x0: 70.0, y0: 40.0, w: 330.0, h: 320.0, xmin, xmax, ymin, ymax };
    p1.frame(&mut svg, "Reconstruction quality", "defocus (um)", "Pearson correlation");
    for (i, s) in pearson.iter().enumerate() {
        p1.series(&mut svg, s, PALETTE[i % PALETTE.len()], false);
    }

    let (xmin, xmax, ymin, ymax) = bounds(&steps, true);
    let p2 = Panel { x0: 520.0, y0: 40.0, w: 330.0, h: 320.0, xmin, xmax, ymin, ymax };
    p2.frame(&mut svg, "Step estimate", "defocus (um)", "step (rad)");
    for (i, s) in steps.iter().enumerate() {
        p2.series(&mut svg, s, PALETTE[i % PALETTE.len()], true);
    }

    for (i, s) in pearson.iter().enumerate() {
        let y = 58.0 + 16.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            svg,
            r#"<line x1="80" y1="{y:.1}" x2="104" y2="{y:.1}" stroke="{color}" stroke-width="2"/><text x="110" y="{:.1}" font-size="11">{}</text>"#,
            y + 4.0,
            s.mode
        );
    }
    svg.push_str("</svg>\n");

    let out = cmd.out.clone().unwrap_or_else(|| cmd.run.join("plots.svg"));
    std::fs::write(&out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
