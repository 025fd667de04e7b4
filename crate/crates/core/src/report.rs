//! Comparison tables and static SVG bar charts.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

/// One row of the comparison table. Ratios are against the random baseline
/// of the same (graph, algorithm, topology) group.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub graph: String,
    pub algorithm: String,
    pub topology: String,
    pub strategy: String,
    pub avg_hop: f64,
    pub serial_latency_ns: f64,
    pub parallel_latency_ns: f64,
    pub energy_pj: f64,
    pub speedup: f64,
    pub energy_ratio: f64,
    pub hop_reduction: f64,
    /// Summary CSV of this row, relative to the output directory.
    pub report: String,
    pub baseline_report: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

const TABLE_HEADER: &str =
    "graph,algorithm,topology,strategy,avg_hop,serial_latency_ns,parallel_latency_ns,energy_pj,speedup,energy_ratio,hop_reduction,report,baseline_report";

impl ComparisonTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{TABLE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.graph,
                r.algorithm,
                r.topology,
                r.strategy,
                r.avg_hop,
                r.serial_latency_ns,
                r.parallel_latency_ns,
                r.energy_pj,
                r.speedup,
                r.energy_ratio,
                r.hop_reduction,
                r.report,
                r.baseline_report
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, String> {
        let mut rows = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if idx == 0 {
                if line.trim() != TABLE_HEADER {
                    return Err("unexpected comparison header".into());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 13 {
                return Err(format!("comparison line {}: expected 13 columns", idx + 1));
            }
            let f = |i: usize| c[i].parse::<f64>().map_err(|_| format!("comparison line {}: bad number {:?}", idx + 1, c[i]));
            rows.push(ComparisonRow {
                graph: c[0].into(),
                algorithm: c[1].into(),
                topology: c[2].into(),
                strategy: c[3].into(),
                avg_hop: f(4)?,
                serial_latency_ns: f(5)?,
                parallel_latency_ns: f(6)?,
                energy_pj: f(7)?,
                speedup: f(8)?,
                energy_ratio: f(9)?,
                hop_reduction: f(10)?,
                report: c[11].into(),
                baseline_report: c[12].into(),
            });
        }
        Ok(Self { rows })
    }
}

/// Grouped bar chart: one cluster per category, one bar per series.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub categories: Vec<String>,
    /// `(series name, one value per category)`.
    pub series: Vec<(String, Vec<f64>)>,
}

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rounds a positive maximum up to 1, 2 or 5 times a power of ten.
fn nice_ceiling(max: f64) -> f64 {
    if !(max > 0.0) || !max.is_finite() {
        return 1.0;
    }
    let base = 10f64.powf(max.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * base).find(|v| *v >= max).unwrap_or(10.0 * base)
}

impl BarChart {
    /// Data block embedded as an SVG comment: `category,series,value`.
    pub fn data_table(&self) -> String {
        let mut s = String::from("category,series,value\n");
        for (ci, cat) in self.categories.iter().enumerate() {
            for (name, values) in &self.series {
                let _ = writeln!(s, "{cat},{name},{}", values[ci]);
            }
        }
        s
    }

    pub fn to_svg(&self) -> String {
        let (width, height) = (720.0, 400.0);
        let (left, right, top, bottom) = (70.0, 150.0, 40.0, 70.0);
        let plot_w = width - left - right;
        let plot_h = height - top - bottom;
        let finite_max = self.series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite()).fold(0.0, f64::max);
        let y_max = nice_ceiling(finite_max);
        let n_cat = self.categories.len().max(1) as f64;
        let n_ser = self.series.len().max(1) as f64;
        let slot = plot_w / n_cat;
        let bar_w = slot * 0.8 / n_ser;

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#);
        let _ = writeln!(s, "<!-- data\n{}-->", self.data_table());
        let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, width / 2.0, escape(&self.title));
        for tick in 0..=5 {
            let v = y_max * tick as f64 / 5.0;
            let y = top + plot_h - plot_h * tick as f64 / 5.0;
            let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, left + plot_w);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, left - 6.0, y + 4.0, format_tick(v));
        }
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            top + plot_h / 2.0,
            top + plot_h / 2.0,
            escape(&self.y_label)
        );
        for (ci, cat) in self.categories.iter().enumerate() {
            let x0 = left + slot * ci as f64 + slot * 0.1;
            for (si, (_, values)) in self.series.iter().enumerate() {
                let v = values[ci];
                let clipped = if v.is_finite() { v.max(0.0).min(y_max) } else { y_max };
                let h = plot_h * clipped / y_max;
                let x = x0 + bar_w * si as f64;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{}"><title>{}</title></rect>"#,
                    top + plot_h - h,
                    bar_w * 0.95,
                    PALETTE[si % PALETTE.len()],
                    v
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                left + slot * (ci as f64 + 0.5),
                top + plot_h + 18.0,
                escape(cat)
            );
        }
        let _ = writeln!(s, r#"<line x1="{left}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#, top + plot_h, left + plot_w, top + plot_h);
        for (si, (name, _)) in self.series.iter().enumerate() {
            let y = top + 14.0 + 20.0 * si as f64;
            let x = left + plot_w + 16.0;
            let _ = writeln!(s, r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#, y - 10.0, PALETTE[si % PALETTE.len()]);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}" font-family="sans-serif" font-size="12">{}</text>"#, x + 18.0, escape(name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn format_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

/// Parses the data block of an SVG written by [`BarChart::to_svg`].
pub fn embedded_data(svg: &str) -> Option<Vec<(String, String, f64)>> {
    let start = svg.find("<!-- data\n")? + "<!-- data\n".len();
    let end = start + svg[start..].find("-->")?;
    let mut out = Vec::new();
    for line in svg[start..end].lines().skip(1) {
        let mut parts = line.rsplitn(2, ',');
        let value = parts.next()?.parse().ok()?;
        let (cat, series) = parts.next()?.split_once(',')?;
        out.push((cat.to_string(), series.to_string(), value));
    }
    Some(out)
}
