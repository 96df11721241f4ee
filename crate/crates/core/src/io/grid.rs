use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::manifest::{DatasetManifest, SignConvention};
use crate::io::panel::{csv_error, parse_error, reader};
use crate::meta::{CellKey, MetaCell, MetaGrid};

const REQUIRED: [&str; 5] = ["target", "horizon", "design", "model", "value"];
const DEFAULT_METRIC: &str = "value";

/// Loads a long-format meta grid.
///
/// Columns `target, horizon, design, model, value` are required in any order;
/// an optional `metric` column splits one file into several metrics.
pub fn load_meta_grid(path: &Path, manifest: &DatasetManifest) -> Result<MetaGrid> {
    manifest.validate()?;
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    let find = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = find(name)
            .ok_or_else(|| parse_error(path, 1, format!("missing required column `{name}`")))?;
    }
    let metric_idx = find("metric");
    let negate = manifest.sign_convention == SignConvention::HigherIsBetter;

    let mut cells = Vec::new();
    let mut lines: HashMap<(CellKey, String), u64> = HashMap::new();
    let mut first_line_of_cell: HashMap<CellKey, u64> = HashMap::new();
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
        let field = |i: usize| -> Result<String> {
            let s = &record[i];
            if s.is_empty() {
                Err(parse_error(
                    path,
                    line,
                    format!("empty `{}` field", &header[i]),
                ))
            } else {
                Ok(s.to_string())
            }
        };
        let key = CellKey {
            target: field(idx[0])?,
            horizon: field(idx[1])?,
            design: field(idx[2])?,
            metric: match metric_idx {
                Some(i) => field(i)?,
                None => DEFAULT_METRIC.to_string(),
            },
        };
        let model = field(idx[3])?;
        let raw = &record[idx[4]];
        let value: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_error(path, line, format!("`{raw}` is not a finite number")))?;
        if let Some(first) = lines.insert((key.clone(), model.clone()), line) {
            return Err(Error::DuplicateKey {
                path: path.to_path_buf(),
                key: format!("{key} for model `{model}`"),
                first_line: first,
                second_line: line,
            });
        }
        first_line_of_cell.entry(key.clone()).or_insert(line);
        cells.push(MetaCell {
            key,
            model,
            value: if negate { -value } else { value },
        });
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }

    let benchmark = &manifest.benchmark_id;
    if !cells.iter().any(|c| &c.model == benchmark) {
        return Err(Error::BenchmarkAbsent {
            path: path.to_path_buf(),
            benchmark: benchmark.clone(),
        });
    }
    let covered: BTreeSet<&CellKey> = cells
        .iter()
        .filter(|c| &c.model == benchmark)
        .map(|c| &c.key)
        .collect();
    if let Some(orphan) = cells.iter().find(|c| !covered.contains(&c.key)) {
        return Err(parse_error(
            path,
            first_line_of_cell[&orphan.key],
            format!("orphan cell {}: no `{benchmark}` row", orphan.key),
        ));
    }
    MetaGrid::new(cells, benchmark.clone())
}
