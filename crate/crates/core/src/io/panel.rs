use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::edge::LossPanel;
use crate::error::{Error, Result};
use crate::io::manifest::{DatasetManifest, InputKind, SignConvention};
use crate::loss::{compute_losses, ScoringRule};

const ACTUAL_COLUMN: &str = "actual";

/// A wide table: first column period labels, remaining columns numeric.
#[derive(Debug, Clone)]
pub(crate) struct WideTable {
    pub columns: Vec<String>,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

pub(crate) fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

pub(crate) fn parse_error(path: &Path, line: u64, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

pub(crate) fn read_wide(path: &Path) -> Result<WideTable> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    if header.len() < 2 {
        return Err(parse_error(
            path,
            1,
            "header needs a period column and at least one data column".into(),
        ));
    }
    let columns: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut seen = HashMap::new();
    for (i, c) in columns.iter().enumerate() {
        if c.is_empty() {
            return Err(parse_error(
                path,
                1,
                format!("column {} has an empty name", i + 2),
            ));
        }
        if let Some(prev) = seen.insert(c.as_str(), i) {
            return Err(parse_error(
                path,
                1,
                format!(
                    "column `{c}` appears at positions {} and {}",
                    prev + 2,
                    i + 2
                ),
            ));
        }
    }

    let mut labels = Vec::new();
    let mut label_lines: HashMap<String, u64> = HashMap::new();
    let mut values = vec![Vec::new(); columns.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(parse_error(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let label = record[0].to_string();
        if label.is_empty() {
            return Err(parse_error(path, line, "empty period label".into()));
        }
        if let Some(first) = label_lines.insert(label.clone(), line) {
            return Err(Error::DuplicateKey {
                path: path.to_path_buf(),
                key: format!("period `{label}`"),
                first_line: first,
                second_line: line,
            });
        }
        for (j, col) in values.iter_mut().enumerate() {
            let cell = &record[j + 1];
            let v: f64 = cell.parse().map_err(|_| {
                parse_error(
                    path,
                    line,
                    format!("column `{}`: `{cell}` is not a number", columns[j]),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_error(
                    path,
                    line,
                    format!("column `{}`: `{cell}` is not finite", columns[j]),
                ));
            }
            col.push(v);
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    Ok(WideTable {
        columns,
        labels,
        values,
    })
}

/// Point forecasts of several models against one set of actuals.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastTable {
    pub period_labels: Vec<String>,
    pub actual: Vec<f64>,
    pub model_ids: Vec<String>,
    pub forecasts: Vec<Vec<f64>>,
}

impl ForecastTable {
    pub fn loss_panel(&self, rule: ScoringRule) -> Result<LossPanel> {
        let columns = self
            .model_ids
            .iter()
            .zip(&self.forecasts)
            .map(|(id, f)| Ok(compute_losses(id, &self.actual, f, rule)?.values().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        LossPanel::new(
            self.model_ids.clone(),
            rule,
            columns,
            Some(self.period_labels.clone()),
        )
    }

    /// Forecast errors `actual - forecast` of one model.
    pub fn errors(&self, model: &str) -> Result<Vec<f64>> {
        let idx = self
            .model_ids
            .iter()
            .position(|m| m == model)
            .ok_or_else(|| Error::UnknownModel(model.to_string()))?;
        Ok(self
            .actual
            .iter()
            .zip(&self.forecasts[idx])
            .map(|(a, f)| a - f)
            .collect())
    }

    pub fn periods(&self) -> usize {
        self.actual.len()
    }

    /// Rows `start..end` (exclusive end).
    pub fn slice(&self, start: usize, end: usize) -> Result<ForecastTable> {
        if start >= end || end > self.periods() {
            return Err(Error::Validation(format!(
                "empty or out-of-range period window {start}..{end} of {}",
                self.periods()
            )));
        }
        Ok(ForecastTable {
            period_labels: self.period_labels[start..end].to_vec(),
            actual: self.actual[start..end].to_vec(),
            model_ids: self.model_ids.clone(),
            forecasts: self
                .forecasts
                .iter()
                .map(|f| f[start..end].to_vec())
                .collect(),
        })
    }
}

/// A loaded input: either forecasts (losses derived per scoring rule) or
/// ready-made losses under a single rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Forecasts(ForecastTable),
    Losses(LossPanel),
}

impl Dataset {
    pub fn model_ids(&self) -> &[String] {
        match self {
            Dataset::Forecasts(f) => &f.model_ids,
            Dataset::Losses(p) => p.model_ids(),
        }
    }

    pub fn period_labels(&self) -> Vec<String> {
        match self {
            Dataset::Forecasts(f) => f.period_labels.clone(),
            Dataset::Losses(p) => p
                .period_labels()
                .map(<[String]>::to_vec)
                .unwrap_or_default(),
        }
    }

    pub fn periods(&self) -> usize {
        match self {
            Dataset::Forecasts(f) => f.periods(),
            Dataset::Losses(p) => p.periods(),
        }
    }

    pub fn slice(&self, start: usize, end: usize) -> Result<Dataset> {
        Ok(match self {
            Dataset::Forecasts(f) => Dataset::Forecasts(f.slice(start, end)?),
            Dataset::Losses(p) => Dataset::Losses(p.slice(start, end)?),
        })
    }

    /// Scoring rules this dataset can produce losses for.
    pub fn available_rules(&self) -> Vec<ScoringRule> {
        match self {
            Dataset::Forecasts(_) => vec![ScoringRule::SquaredError, ScoringRule::AbsoluteError],
            Dataset::Losses(p) => vec![p.rule()],
        }
    }

    pub fn loss_panel(&self, rule: ScoringRule) -> Result<LossPanel> {
        match self {
            Dataset::Forecasts(f) => f.loss_panel(rule),
            Dataset::Losses(p) if p.rule() == rule => Ok(p.clone()),
            Dataset::Losses(p) => Err(Error::Incompatible(format!(
                "dataset holds {} losses, {rule} requested",
                p.rule()
            ))),
        }
    }
}

fn benchmark_absent(path: &Path, manifest: &DatasetManifest) -> Error {
    Error::BenchmarkAbsent {
        path: PathBuf::from(path),
        benchmark: manifest.benchmark_id.clone(),
    }
}

/// Loads a forecasts or losses table as described by `manifest`.
pub fn load_dataset(path: &Path, manifest: &DatasetManifest) -> Result<Dataset> {
    manifest.validate()?;
    let table = read_wide(path)?;
    match manifest.input_kind {
        InputKind::Forecasts => {
            let actual_idx = table
                .columns
                .iter()
                .position(|c| c.eq_ignore_ascii_case(ACTUAL_COLUMN))
                .ok_or_else(|| {
                    parse_error(
                        path,
                        1,
                        format!("forecast table lacks an `{ACTUAL_COLUMN}` column"),
                    )
                })?;
            let mut model_ids = Vec::new();
            let mut forecasts = Vec::new();
            let mut actual = Vec::new();
            for (j, (c, v)) in table.columns.into_iter().zip(table.values).enumerate() {
                if j == actual_idx {
                    actual = v;
                } else {
                    model_ids.push(c);
                    forecasts.push(v);
                }
            }
            if !model_ids.contains(&manifest.benchmark_id) {
                return Err(benchmark_absent(path, manifest));
            }
            let ft = ForecastTable {
                period_labels: table.labels,
                actual,
                model_ids,
                forecasts,
            };
            // validates label order and loss construction up front
            ft.loss_panel(ScoringRule::SquaredError)?;
            Ok(Dataset::Forecasts(ft))
        }
        InputKind::Losses => {
            if !table.columns.contains(&manifest.benchmark_id) {
                return Err(benchmark_absent(path, manifest));
            }
            let mut values = table.values;
            if manifest.sign_convention == SignConvention::HigherIsBetter {
                values.iter_mut().flatten().for_each(|v| *v = -*v);
            }
            let panel = LossPanel::new(
                table.columns,
                manifest.scoring_rule,
                values,
                Some(table.labels),
            )?
            .with_benchmark(&manifest.benchmark_id)?;
            Ok(Dataset::Losses(panel))
        }
        InputKind::MetaGrid => Err(Error::Config(
            "manifest describes a meta grid; load it with load_meta_grid".into(),
        )),
    }
}

/// Loads a loss panel under the manifest's scoring rule. Forecast tables are
/// converted to losses model by model.
pub fn load_panel(path: &Path, manifest: &DatasetManifest) -> Result<LossPanel> {
    let panel = match load_dataset(path, manifest)? {
        Dataset::Forecasts(f) => f.loss_panel(manifest.scoring_rule)?,
        Dataset::Losses(p) => p,
    };
    panel.with_benchmark(&manifest.benchmark_id)
}
