//! Writing result records: one CSV per table, a JSON record, or SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentKind;
use super::record::{Cell, ResultRecord, Table};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            _ => Err(HarnessError::Config(format!("unknown format {s:?} (expected csv, json or svg)"))),
        }
    }
}

/// Writes `record` into `out_dir` (created if needed) and returns the paths
/// written. CSV files start with a `#` comment naming the tool version and
/// configuration hash; the JSON record carries the full configuration.
pub fn emit(record: &ResultRecord, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let exp = record.experiment.name();
    let mut written = Vec::new();
    match format {
        OutputFormat::Csv => {
            for table in &record.tables {
                let path = out_dir.join(format!("{exp}_{}.csv", table.name));
                write_csv(record, table, &path)?;
                written.push(path);
            }
        }
        OutputFormat::Json => {
            let path = out_dir.join(format!("{exp}.json"));
            let file = fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, record).map_err(|e| HarnessError::io(&path, e.into()))?;
            w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| HarnessError::io(&path, e))?;
            written.push(path);
        }
        OutputFormat::Svg => {
            for plot in plots_for(record) {
                let path = out_dir.join(format!("{exp}_{}.svg", plot.name));
                fs::write(&path, plot.render()).map_err(|e| HarnessError::io(&path, e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

fn write_csv(record: &ResultRecord, table: &Table, path: &Path) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::io(path, e);
    let file = fs::File::create(path).map_err(io)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# cylwalk {} config={}", record.tool_version, record.config_hash).map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| HarnessError::io(path, e.into());
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::to_string)).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

/// Reads a table written by [`emit`] back, skipping the comment line.
pub fn load_csv_table(path: &Path) -> Result<Table, HarnessError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| HarnessError::io(path, e.into()))?;
    let columns: Vec<String> = r
        .headers()
        .map_err(|e| HarnessError::io(path, e.into()))?
        .iter()
        .map(str::to_string)
        .collect();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    let mut table = Table {
        name,
        columns,
        rows: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| HarnessError::io(path, e.into()))?;
        table.rows.push(rec.iter().map(Cell::parse).collect());
    }
    Ok(table)
}

/// A line plot of one table: `y` against `x`, one series per value of
/// `group`.
struct Plot {
    name: String,
    title: String,
    x_label: String,
    y_label: String,
    series: BTreeMap<String, Vec<(f64, f64)>>,
    log_x: bool,
    log_y: bool,
}

struct PlotSpec {
    table: &'static str,
    x: &'static str,
    y: &'static str,
    group: Option<&'static str>,
    log_x: bool,
    log_y: bool,
}

const fn spec(table: &'static str, x: &'static str, y: &'static str, group: Option<&'static str>) -> PlotSpec {
    PlotSpec {
        table,
        x,
        y,
        group,
        log_x: false,
        log_y: false,
    }
}

fn specs(kind: ExperimentKind) -> Vec<PlotSpec> {
    match kind {
        ExperimentKind::Disconnect | ExperimentKind::Scaling => vec![
            spec("ratio_cdf", "ratio", "F", Some("N")),
            spec("scaling", "log_N", "log_median_T", None),
        ],
        ExperimentKind::Excursions => vec![spec("gamma", "gamma", "P_D", Some("N"))],
        ExperimentKind::Events => vec![
            spec("probabilities", "u", "P_V", Some("N")),
            spec("probabilities", "u", "P_U", Some("N")),
            spec("probabilities", "u", "P_G", Some("N")),
        ],
        ExperimentKind::Expbound => vec![PlotSpec {
            log_y: true,
            ..spec("sizes", "size", "P", Some("N"))
        }],
        ExperimentKind::Localtime => vec![spec("identity", "k", "ks_p", Some("N"))],
        ExperimentKind::Qtable => vec![PlotSpec {
            log_y: true,
            ..spec("qtable", "nu", "q", Some("method"))
        }],
        ExperimentKind::Thresholds => vec![spec("thresholds", "d", "rho", None)],
        ExperimentKind::Peierls => vec![PlotSpec {
            log_y: true,
            ..spec("peierls", "n", "a_n", None)
        }],
    }
}

fn plots_for(record: &ResultRecord) -> Vec<Plot> {
    let mut plots = Vec::new();
    for s in specs(record.experiment) {
        let Some(table) = record.table(s.table) else { continue };
        let (Some(ix), Some(iy)) = (table.column(s.x), table.column(s.y)) else { continue };
        let ig = s.group.and_then(|g| table.column(g));
        let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for row in &table.rows {
            let (Some(x), Some(y)) = (row[ix].as_f64(), row[iy].as_f64()) else { continue };
            if (s.log_x && x <= 0.0) || (s.log_y && y <= 0.0) {
                continue;
            }
            let key = ig.map_or_else(|| s.y.to_string(), |g| format!("{}={}", s.group.unwrap_or(""), row[g]));
            series.entry(key).or_default().push((x, y));
        }
        if series.is_empty() {
            continue;
        }
        plots.push(Plot {
            name: format!("{}_{}", s.table, s.y),
            title: format!("{} — {}", record.experiment, s.table),
            x_label: s.x.into(),
            y_label: if s.log_y { format!("{} (log)", s.y) } else { s.y.into() },
            series,
            log_x: s.log_x,
            log_y: s.log_y,
        });
    }
    plots
}

const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn render(&self) -> String {
        let (w, h) = (640.0, 420.0);
        let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let pts = self.series.values().flatten();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(tx(x));
            x1 = x1.max(tx(x));
            y0 = y0.min(ty(y));
            y1 = y1.max(ty(y));
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let px = |x: f64| left + (tx(x) - x0) / (x1 - x0) * (w - left - right);
        let py = |y: f64| h - bottom - (ty(y) - y0) / (y1 - y0) * (h - top - bottom);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<path d="M{left},{top} V{} H{}" fill="none" stroke="black"/>"#,
            h - bottom,
            w - right
        );
        for i in 0..=4 {
            let f = f64::from(i) / 4.0;
            let (vx, vy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let gx = left + f * (w - left - right);
            let gy = h - bottom - f * (h - top - bottom);
            let lx = if self.log_x { format!("1e{vx:.1}") } else { format!("{vx:.3}") };
            let ly = if self.log_y { format!("1e{vy:.1}") } else { format!("{vy:.3}") };
            let _ = writeln!(s, r#"<text x="{gx}" y="{}" text-anchor="middle">{lx}</text>"#, h - bottom + 16.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{ly}</text>"#, left - 6.0, gy + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (left + w - right) / 2.0, h - 12.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            (top + h - bottom) / 2.0,
            (top + h - bottom) / 2.0,
            escape(&self.y_label)
        );
        for (i, (name, points)) in self.series.iter().enumerate() {
            let colour = COLOURS[i % COLOURS.len()];
            let mut sorted = points.clone();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let d: Vec<String> = sorted.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, d.join(" "));
            let ly = top + 16.0 * i as f64 + 10.0;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                w - right + 10.0,
                w - right + 30.0,
                w - right + 36.0,
                ly + 4.0,
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
