//! Scaling fits of sweep CSV files.

use std::path::Path;

use qramsim::fit::{loglog_fit, ScalingFit};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::sweep::{aggregate, SweepPoint, SweepRow, CSV_COLUMNS};

/// One fitted `(variant, channel, epsilon, M)` series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFit {
    pub variant: String,
    pub channel: String,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub points: Vec<SweepPoint>,
    /// `None` when fewer than two points survive the width filter.
    pub fit: Option<ScalingFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub min_log_n: usize,
    pub series: Vec<SeriesFit>,
}

/// Parses a sweep CSV, skipping `#` metadata lines and checking the header.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_sweep_csv(&text).map_err(|message| CliError::Schema { path: path.to_path_buf(), message })
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, String> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(format!("expected columns {}, found {}", CSV_COLUMNS.join(","), header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<SweepRow>().enumerate() {
        rows.push(rec.map_err(|e| format!("row {}: {e}", i + 1))?);
    }
    Ok(rows)
}

/// Groups rows into series and fits each on widths `n >= min_log_n`.
pub fn fit_rows(rows: &[SweepRow], min_log_n: usize) -> FitReport {
    let mut keys: Vec<(String, String, u64, usize)> = Vec::new();
    for r in rows {
        let k = (r.variant.clone(), r.channel.clone(), r.epsilon.to_bits(), r.big_m);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let series = keys
        .into_iter()
        .map(|(variant, channel, eps, big_m)| {
            let group: Vec<SweepRow> = rows
                .iter()
                .filter(|r| r.variant == variant && r.channel == channel && r.epsilon.to_bits() == eps && r.big_m == big_m)
                .cloned()
                .collect();
            let points = aggregate(&group);
            let xy: Vec<(usize, f64)> = points.iter().map(|p| (p.n, p.mean_infidelity)).collect();
            SeriesFit { variant, channel, epsilon: f64::from_bits(eps), big_m, fit: loglog_fit(&xy, min_log_n).ok(), points }
        })
        .collect();
    FitReport { min_log_n, series }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-log chart of infidelity against `log2 N` with fit lines and the
/// `4 eps T n` region shaded.
pub fn render_svg(report: &FitReport) -> String {
    let pts: Vec<(f64, f64)> = report
        .series
        .iter()
        .flat_map(|s| s.points.iter())
        .flat_map(|p| [(p.n as f64, p.mean_infidelity), (p.n as f64, p.bound_eq28)])
        .filter(|&(n, y)| n > 0.0 && y > 0.0)
        .collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if pts.is_empty() {
        svg.push_str("<text x=\"20\" y=\"40\">no positive infidelities to plot</text>\n</svg>\n");
        return svg;
    }
    let lx = |n: f64| n.log10();
    let (mut x0, mut x1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(lx(p.0)), b.max(lx(p.0))));
    let (mut y0, mut y1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1.log10()), b.max(p.1.log10())));
    if x1 - x0 < 1e-9 {
        x0 -= 0.1;
        x1 += 0.1;
    }
    y0 = y0.floor();
    y1 = y1.ceil().max(y0 + 1.0);
    let sx = |n: f64| MARGIN + (lx(n) - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y.log10() - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let bottom = HEIGHT - MARGIN;

    for s in &report.series {
        let b: Vec<(f64, f64)> =
            s.points.iter().filter(|p| p.bound_eq28 > 0.0).map(|p| (sx(p.n as f64), sy(p.bound_eq28))).collect();
        if b.len() >= 2 {
            let mut path = format!("M {:.2} {:.2}", b[0].0, bottom);
            for (x, y) in &b {
                path.push_str(&format!(" L {x:.2} {y:.2}"));
            }
            path.push_str(&format!(" L {:.2} {:.2} Z", b[b.len() - 1].0, bottom));
            svg.push_str(&format!("<path d=\"{path}\" fill=\"#cccccc\" fill-opacity=\"0.5\" stroke=\"none\"/>\n"));
        }
    }
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{bottom}\" x2=\"{}\" y2=\"{bottom}\" stroke=\"black\"/>\n\
         <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{bottom}\" stroke=\"black\"/>\n",
        WIDTH - MARGIN
    ));
    for e in (y0 as i32)..=(y1 as i32) {
        let y = sy(10f64.powi(e));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">1e{e}</text>\n",
            MARGIN - 6.0,
            y + 4.0
        ));
    }
    let mut widths: Vec<usize> = report.series.iter().flat_map(|s| s.points.iter().map(|p| p.n)).collect();
    widths.sort_unstable();
    widths.dedup();
    for n in widths.into_iter().filter(|&n| n > 0) {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{n}</text>\n",
            sx(n as f64),
            bottom + 16.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">log2 N</text>\n\
         <text x=\"16\" y=\"{:.2}\" font-size=\"12\" transform=\"rotate(-90 16 {:.2})\" text-anchor=\"middle\">infidelity</text>\n",
        WIDTH / 2.0,
        HEIGHT - 12.0,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));
    for (i, s) in report.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for p in s.points.iter().filter(|p| p.n > 0 && p.mean_infidelity > 0.0) {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(p.n as f64),
                sy(p.mean_infidelity)
            ));
        }
        if let Some(f) = &s.fit {
            let lo = f.points.first().map(|p| p.0).unwrap_or(1.0);
            let hi = f.points.last().map(|p| p.0).unwrap_or(1.0);
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-dasharray=\"5,4\"/>\n",
                sx(lo),
                sy(f.predict(lo)),
                sx(hi),
                sy(f.predict(hi))
            ));
        }
        let slope = s.fit.as_ref().map(|f| format!(" slope {:.2}", f.slope)).unwrap_or_default();
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"{color}\">{} {}{slope}</text>\n",
            MARGIN + 10.0,
            MARGIN + 14.0 * i as f64,
            s.variant,
            s.channel
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, infid: f64) -> SweepRow {
        SweepRow {
            variant: "bb2".into(),
            n,
            big_m: 1,
            channel: "damping".into(),
            epsilon: 1e-4,
            t: 10,
            dataset_seed: 1,
            samples: 100,
            mean_fidelity: 1.0 - infid,
            std_error: 1e-5,
            bound_eq28: 4e-4 * 10.0 * n as f64,
            bound_twolevel: 0.0,
            bound_general: 0.0,
        }
    }

    #[test]
    fn synthetic_quadratic_data_gives_slope_two() {
        let rows: Vec<SweepRow> = (2..=8).map(|n| row(n, 1e-5 * (n * n) as f64)).collect();
        let report = fit_rows(&rows, 3);
        assert_eq!(report.series.len(), 1);
        let f = report.series[0].fit.as_ref().unwrap();
        assert!((f.slope - 2.0).abs() < 1e-6, "{}", f.slope);
        assert_eq!(f.points.len(), 6);
        let svg = render_svg(&report);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("#cccccc"));
    }

    #[test]
    fn header_mismatch_is_a_schema_error() {
        assert!(parse_sweep_csv("# meta\nvariant,n\nbb2,3\n").is_err());
    }
}
