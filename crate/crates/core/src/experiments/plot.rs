//! SVG line charts of sweep CSV files. Rendering only; no computation
//! beyond axis scaling.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureKind {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FigureKind {
    pub const ALL: [FigureKind; 7] = [
        FigureKind::Fig3,
        FigureKind::Fig4,
        FigureKind::Fig5,
        FigureKind::Fig6,
        FigureKind::Fig7,
        FigureKind::Fig8,
        FigureKind::Fig9,
    ];

    /// Metric columns drawn, one line per scheme and metric.
    pub fn metrics(self) -> &'static [&'static str] {
        match self {
            FigureKind::Fig3 | FigureKind::Fig5 => &["sops"],
            FigureKind::Fig4 => &["sop_alpha", "sop_beta"],
            FigureKind::Fig6 => &["d_beta", "d_alpha"],
            FigureKind::Fig7 => &["lambda_star"],
            FigureKind::Fig8 => &["d_beta"],
            FigureKind::Fig9 => &["offloaded_tasks"],
        }
    }

    fn title(self) -> &'static str {
        match self {
            FigureKind::Fig3 => "System secrecy outage probability",
            FigureKind::Fig4 => "Per-vehicle secrecy outage probability",
            FigureKind::Fig5 => "System secrecy outage probability by pair distance",
            FigureKind::Fig6 => "Task completion delay",
            FigureKind::Fig7 => "Optimal power allocation ratio",
            FigureKind::Fig8 => "Edge vehicle delay",
            FigureKind::Fig9 => "Offloaded tasks",
        }
    }
}

impl FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig3" => Ok(FigureKind::Fig3),
            "fig4" => Ok(FigureKind::Fig4),
            "fig5" => Ok(FigureKind::Fig5),
            "fig6" => Ok(FigureKind::Fig6),
            "fig7" => Ok(FigureKind::Fig7),
            "fig8" => Ok(FigureKind::Fig8),
            "fig9" => Ok(FigureKind::Fig9),
            _ => Err(Error::InvalidArgument(format!("unknown figure kind `{s}`"))),
        }
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const DASHES: [&str; 3] = ["", "6,4", "2,3"];

fn read_series(text: &str, kind: FigureKind) -> Result<(String, Vec<Series>)> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    };
    let (scheme_c, var_c, value_c) = (col("scheme")?, col("variable")?, col("value")?);
    let metric_c: Vec<usize> = kind.metrics().iter().map(|m| col(&format!("{m}_mean"))).collect::<Result<_>>()?;
    let mut series: Vec<Series> = Vec::new();
    let mut variable = String::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |c: usize| -> Result<f64> {
            rec.get(c)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number in column {}", headers.get(c).unwrap_or("?"))))
        };
        variable = rec.get(var_c).unwrap_or("").to_string();
        let scheme = rec.get(scheme_c).unwrap_or("");
        let x = num(value_c)?;
        for (m, &c) in kind.metrics().iter().zip(&metric_c) {
            let label = if kind.metrics().len() > 1 { format!("{scheme} {m}") } else { scheme.to_string() };
            let y = num(c)?;
            match series.iter_mut().find(|s| s.label == label) {
                Some(s) => s.points.push((x, y)),
                None => series.push(Series { label, points: vec![(x, y)] }),
            }
        }
    }
    if series.is_empty() {
        return Err(Error::Parse("sweep CSV has no data rows".into()));
    }
    Ok((variable, series))
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Renders the figure as an SVG document.
pub fn render_svg(csv_text: &str, kind: FigureKind) -> Result<String> {
    let (variable, series) = read_series(csv_text, kind)?;
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, kind.title());
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, escape(&variable));
    for (i, se) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = DASHES[(i / COLORS.len()) % DASHES.len()];
        let pts: Vec<String> = se
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#,
            pts.join(" ")
        );
        for p in &pts {
            let (cx, cy) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#);
        }
        let ly = TOP + 12.0 + 16.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&se.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads `csv_path` and writes the SVG to `out`. Nothing is written on error.
pub fn plot(csv_path: &Path, kind: FigureKind, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv_path)?;
    let svg = render_svg(&text, kind)?;
    std::fs::write(out, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "# nomasec\n# seed = 1\n\
scheme,variable,value,sops_mean,sop_alpha_mean,sop_beta_mean,d_beta_mean,d_alpha_mean,lambda_star_mean,offloaded_tasks_mean\n\
gpm-noma-an-eg,p_beta_dbm,0,0.9,0.2,0.8,1.0,0.5,0.3,6\n\
gpm-noma-an-eg,p_beta_dbm,10,0.7,0.2,0.6,0.8,0.5,0.25,7\n\
rpm-noma-an-eg,p_beta_dbm,0,0.95,0.21,0.9,1.2,0.5,0.35,5\n\
rpm-noma-an-eg,p_beta_dbm,10,0.8,0.2,0.7,0.9,0.5,0.3,6\n";

    #[test]
    fn every_kind_renders_deterministically() {
        for kind in FigureKind::ALL {
            let a = render_svg(CSV, kind).unwrap();
            assert_eq!(a, render_svg(CSV, kind).unwrap());
            assert!(a.starts_with("<svg"));
            assert_eq!(a.matches("<polyline").count(), 2 * kind.metrics().len());
        }
        assert!(render_svg(CSV, FigureKind::Fig3).unwrap().contains("rpm-noma-an-eg"));
    }

    #[test]
    fn empty_csv_is_an_error_and_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("empty.csv");
        let out = dir.path().join("fig.svg");
        std::fs::write(&input, "# only metadata\n").unwrap();
        assert!(plot(&input, FigureKind::Fig3, &out).is_err());
        std::fs::write(&input, "scheme,variable,value,sops_mean\n").unwrap();
        assert!(plot(&input, FigureKind::Fig3, &out).is_err());
        assert!(!out.exists());
    }

    #[test]
    fn missing_column_is_reported() {
        let err = render_svg("scheme,variable,value\nx,p,1\n", FigureKind::Fig7).unwrap_err();
        assert!(err.to_string().contains("lambda_star_mean"));
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("FIG6".parse::<FigureKind>().unwrap(), FigureKind::Fig6);
        assert!("fig10".parse::<FigureKind>().is_err());
    }
}
