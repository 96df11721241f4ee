use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::report::{Layout, Panel, PlotSeries, Report};

/// Significant digits kept in structured output.
pub const STRUCTURED_DIGITS: usize = 6;
/// Decimals printed in tables.
pub const TABLE_DECIMALS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(Error::Config(format!(
                "unknown output format `{other}` (json, csv, markdown)"
            ))),
        }
    }
}

impl OutputFormat {
    /// Guess from a file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> OutputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => OutputFormat::Csv,
            Some("md") | Some("markdown") => OutputFormat::Markdown,
            _ => OutputFormat::Json,
        }
    }
}

fn cell(v: crate::ext::ExtReal, bold: bool, italic: bool) -> String {
    let s = v.fixed(TABLE_DECIMALS);
    if bold {
        format!("**{s}**")
    } else if italic {
        format!("_{s}_")
    } else {
        s
    }
}

fn markdown_panel(p: &Panel, out: &mut String) {
    let _ = writeln!(out, "### {}\n", p.title);
    match p.layout {
        Layout::MetricsAsRows => {
            let _ = writeln!(out, "| Metric | {} |", p.models.join(" | "));
            let _ = writeln!(out, "|---|{}", "---:|".repeat(p.models.len()));
            for r in &p.rows {
                let cells: Vec<String> = (0..p.models.len())
                    .map(|j| cell(r.values[j], r.best.contains(&j), r.second.contains(&j)))
                    .collect();
                let _ = writeln!(out, "| {} | {} |", r.metric, cells.join(" | "));
            }
        }
        Layout::ModelsAsRows => {
            let names: Vec<&str> = p.rows.iter().map(|r| r.metric.as_str()).collect();
            let _ = writeln!(out, "| Model | {} |", names.join(" | "));
            let _ = writeln!(out, "|---|{}", "---:|".repeat(names.len()));
            for (j, m) in p.models.iter().enumerate() {
                let cells: Vec<String> = p
                    .rows
                    .iter()
                    .map(|r| cell(r.values[j], r.best.contains(&j), r.second.contains(&j)))
                    .collect();
                let _ = writeln!(out, "| {m} | {} |", cells.join(" | "));
            }
        }
    }
    for n in &p.notes {
        let _ = writeln!(out, "\n_{n}_");
    }
    out.push('\n');
}

fn header_lines(report: &Report) -> Vec<String> {
    match report {
        Report::Evaluation(r) => {
            let mut v = vec![
                format!("benchmark: {}", r.benchmark),
                format!("periods: {}", r.periods),
            ];
            if let Some((a, b)) = &r.window {
                v.push(format!("window: {a} to {b}"));
            }
            v.push(format!("hac: {}", r.hac));
            v.push(format!(
                "edge pool: {} ({})",
                r.pool.join(", "),
                r.pool_hash
            ));
            v.extend(r.notes.iter().cloned());
            v
        }
        Report::Meta(r) => {
            let mut v = vec![
                format!("benchmark: {}", r.benchmark),
                format!("normalization: {}", r.normalization),
                format!("edge pool: {} ({})", r.pool.join(", "), r.pool_hash),
            ];
            v.extend(r.notes.iter().cloned());
            v
        }
        Report::Simulation(_) => Vec::new(),
    }
}

fn simulation_rows(report: &Report) -> Vec<(String, String)> {
    let Report::Simulation(s) = report else {
        return Vec::new();
    };
    let n = &s.null_edge;
    let d = &s.dm_penalty;
    let f = |x: crate::ext::ExtReal| x.fixed(4);
    let max_dev = n
        .win_frequency
        .iter()
        .map(|w| (w - 1.0 / n.win_frequency.len() as f64).abs())
        .fold(0.0, f64::max);
    vec![
        ("pool_size".into(), s.config.pool_size.to_string()),
        ("periods".into(), s.config.periods.to_string()),
        ("replications".into(), s.config.replications.to_string()),
        ("seed".into(), s.config.seed.to_string()),
        ("mean_edge".into(), f(n.mean_edge)),
        ("band".into(), format!("[{}, {}]", n.band[0], n.band[1])),
        ("within_band".into(), n.within_band.to_string()),
        (
            "max_win_frequency_deviation".into(),
            format!("{max_dev:.4}"),
        ),
        (
            "win_frequency_tolerance".into(),
            format!("{:.4}", s.win_frequency_tolerance),
        ),
        ("win_frequency_ok".into(), s.win_frequency_ok.to_string()),
        ("bartlett_lag".into(), d.bartlett_lag.to_string()),
        ("mean_dm_k0".into(), f(d.mean_dm_k0)),
        ("mean_dm_bartlett".into(), f(d.mean_dm_bartlett)),
        ("mean_abs_dm_k0".into(), f(d.mean_abs_dm_k0)),
        ("mean_abs_dm_bartlett".into(), f(d.mean_abs_dm_bartlett)),
        ("penalty_observed".into(), s.penalty_observed.to_string()),
    ]
}

fn render_markdown(report: &Report) -> String {
    let mut out = String::new();
    for l in header_lines(report) {
        let _ = writeln!(out, "- {l}");
    }
    if !out.is_empty() {
        out.push('\n');
    }
    for p in report.panels() {
        markdown_panel(p, &mut out);
    }
    let sim = simulation_rows(report);
    if !sim.is_empty() {
        out.push_str("| Quantity | Value |\n|---|---:|\n");
        for (k, v) in sim {
            let _ = writeln!(out, "| {k} | {v} |");
        }
    }
    out
}

fn render_csv(report: &Report) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Validation(format!("csv rendering failed: {e}"));
    if let Report::Simulation(_) = report {
        w.write_record(["quantity", "value"]).map_err(to_err)?;
        for (k, v) in simulation_rows(report) {
            w.write_record([k, v]).map_err(to_err)?;
        }
    } else {
        w.write_record(["panel", "metric", "model", "value", "rank"])
            .map_err(to_err)?;
        for p in report.panels() {
            for r in &p.rows {
                for (j, m) in p.models.iter().enumerate() {
                    let rank = if r.best.contains(&j) {
                        "best"
                    } else if r.second.contains(&j) {
                        "second"
                    } else {
                        ""
                    };
                    w.write_record([
                        p.title.as_str(),
                        r.metric.as_str(),
                        m.as_str(),
                        &r.values[j].fixed(TABLE_DECIMALS),
                        rank,
                    ])
                    .map_err(to_err)?;
                }
            }
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("csv rendering failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Renders `report` as text. Structured output carries every number at six
/// significant digits; tables print two decimals.
pub fn render_report(report: &Report, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report.rounded(STRUCTURED_DIGITS))
                .map_err(|e| Error::Validation(format!("serialization failed: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Markdown => Ok(render_markdown(report)),
    }
}

pub fn write_report(report: &Report, path: &Path, format: OutputFormat) -> Result<()> {
    let text = render_report(report, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a structured (JSON) report.
pub fn load_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

fn file_stem(model: &str) -> String {
    model
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes one `<model>.csv` per series into `dir` with columns
/// `period, cumulative_gain, drawdown`. Returns the written paths.
pub fn write_plot_series(dir: &Path, series: &[PlotSeries]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(series.len());
    for s in series {
        let mut text = String::from("period,cumulative_gain,drawdown\n");
        for ((p, c), d) in s.periods.iter().zip(&s.cumulative_gain).zip(&s.drawdown) {
            let _ = writeln!(text, "{p},{c},{d}");
        }
        let path = dir.join(format!("{}.csv", file_stem(&s.model)));
        if written.contains(&path) {
            return Err(Error::Validation(format!(
                "models map to the same plot file {}",
                path.display()
            )));
        }
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
