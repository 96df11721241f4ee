//! Cross-sectional meta analysis over a design space of
//! (target, horizon, design) cells.
//!
//! Each cell holds one scalar performance value per model, lower is better.
//! Per-cell percentage returns against the benchmark form a cross-sectional
//! distribution that is summarized with the same Sharpe/Sortino/Omega
//! formulas used for time series, minus drawdown since cells are unordered.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edge::{edge_ratio, LossPanel};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::loss::ScoringRule;
use crate::risk::{self, VarianceConvention};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub target: String,
    pub horizon: String,
    pub design: String,
    pub metric: String,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.target, self.horizon, self.design, self.metric
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaCell {
    pub key: CellKey,
    pub model: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaGrid {
    cells: Vec<MetaCell>,
    benchmark: String,
}

impl MetaGrid {
    pub fn new(cells: Vec<MetaCell>, benchmark: impl Into<String>) -> Result<Self> {
        let benchmark = benchmark.into();
        let mut seen = BTreeSet::new();
        let mut with_benchmark = BTreeSet::new();
        for c in &cells {
            if !c.value.is_finite() {
                return Err(Error::Validation(format!(
                    "non-finite value for `{}` in cell {}",
                    c.model, c.key
                )));
            }
            if !seen.insert((&c.key, &c.model)) {
                return Err(Error::Validation(format!(
                    "duplicate entry for `{}` in cell {}",
                    c.model, c.key
                )));
            }
            if c.model == benchmark {
                with_benchmark.insert(&c.key);
            }
        }
        if let Some(orphan) = cells.iter().find(|c| !with_benchmark.contains(&c.key)) {
            return Err(Error::Validation(format!(
                "cell {} has no `{benchmark}` benchmark value",
                orphan.key
            )));
        }
        Ok(MetaGrid { cells, benchmark })
    }

    pub fn cells(&self) -> &[MetaCell] {
        &self.cells
    }

    pub fn benchmark(&self) -> &str {
        &self.benchmark
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Distinct metric names, sorted.
    pub fn metrics(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.cells.iter().map(|c| c.key.metric.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Distinct model labels, sorted; includes the benchmark.
    pub fn models(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.cells.iter().map(|c| c.model.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// The sub-grid for one metric.
    pub fn for_metric(&self, metric: &str) -> MetaGrid {
        MetaGrid {
            cells: self
                .cells
                .iter()
                .filter(|c| c.key.metric == metric)
                .cloned()
                .collect(),
            benchmark: self.benchmark.clone(),
        }
    }

    /// Model -> value, per cell, in key order.
    fn by_cell(&self) -> BTreeMap<&CellKey, BTreeMap<&str, f64>> {
        let mut out: BTreeMap<&CellKey, BTreeMap<&str, f64>> = BTreeMap::new();
        for c in &self.cells {
            out.entry(&c.key).or_default().insert(&c.model, c.value);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `100 * (P_B - P_M) / P_B`; requires a positive benchmark value.
    #[default]
    RatioPercent,
    /// `P_B - P_M`, for metrics that can be zero or negative (log scores).
    RawDifference,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ratio_percent" | "percent" => Ok(Normalization::RatioPercent),
            "raw_difference" | "raw" => Ok(Normalization::RawDifference),
            other => Err(Error::Config(format!("unknown normalization `{other}`"))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::RatioPercent => "ratio_percent",
            Normalization::RawDifference => "raw_difference",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaReturns {
    pub model: String,
    pub returns: Vec<f64>,
    pub cell_keys: Vec<CellKey>,
}

/// Per-cell returns of `model` against the grid's benchmark, over every cell
/// in which the model appears.
pub fn meta_returns(
    grid: &MetaGrid,
    model: &str,
    normalization: Normalization,
) -> Result<MetaReturns> {
    let mut returns = Vec::new();
    let mut cell_keys = Vec::new();
    for (key, values) in grid.by_cell() {
        let Some(&pm) = values.get(model) else {
            continue;
        };
        let pb = values[grid.benchmark.as_str()];
        let r = match normalization {
            Normalization::RatioPercent => {
                if pb <= 0.0 {
                    return Err(Error::Normalization(format!(
                        "benchmark value {pb} in cell {key} is not positive; \
                         use raw_difference for metrics that can be zero or negative"
                    )));
                }
                (100.0 * pb - 100.0 * pm) / pb
            }
            Normalization::RawDifference => pb - pm,
        };
        returns.push(r);
        cell_keys.push(key.clone());
    }
    if returns.is_empty() {
        return Err(Error::UnknownModel(model.to_string()));
    }
    Ok(MetaReturns {
        model: model.to_string(),
        returns,
        cell_keys,
    })
}

/// Cross-sectional summary of a model's meta returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaMetrics {
    pub cells: usize,
    pub mean: f64,
    /// Standard deviation with divisor `N - 1`.
    pub vol: f64,
    pub downside_deviation: f64,
    pub sharpe: ExtReal,
    pub sortino: ExtReal,
    pub omega: ExtReal,
}

pub fn meta_metrics(ret: &MetaReturns) -> Result<MetaMetrics> {
    let xs = &ret.returns;
    let sharpe = risk::sharpe_of(xs, VarianceConvention::SampleTminus1)?;
    let mean = if xs.iter().all(|x| *x == xs[0]) {
        xs[0]
    } else {
        crate::loss::mean(xs)
    };
    Ok(MetaMetrics {
        cells: xs.len(),
        mean,
        vol: risk::std_dev(xs, VarianceConvention::SampleTminus1),
        downside_deviation: risk::downside_deviation(xs),
        sharpe,
        sortino: risk::sortino_of(xs),
        omega: risk::omega_of(xs),
    })
}

/// Which models form the frontier pool in [`meta_edge`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgePool {
    /// Every model in the grid except the benchmark.
    #[default]
    Competitors,
    /// Every model in the grid, benchmark included.
    AllModels,
}

/// Edge Ratio with cells in place of periods.
///
/// Every cell must carry the same pool of models.
pub fn meta_edge(grid: &MetaGrid, model: &str, pool: EdgePool) -> Result<ExtReal> {
    let panel = meta_loss_panel(grid, pool)?;
    let idx = panel.index_of(model)?;
    edge_ratio(&panel, idx)
}

/// The cell-indexed loss panel behind [`meta_edge`].
pub fn meta_loss_panel(grid: &MetaGrid, pool: EdgePool) -> Result<LossPanel> {
    let metrics = grid.metrics();
    if metrics.len() > 1 {
        return Err(Error::PoolConsistency(format!(
            "grid mixes metrics {metrics:?}; select one first"
        )));
    }
    let cells = grid.by_cell();
    let members: Vec<String> = grid
        .models()
        .into_iter()
        .filter(|m| pool == EdgePool::AllModels || *m != grid.benchmark)
        .collect();
    if members.len() < 2 {
        return Err(Error::PoolTooSmall {
            size: members.len(),
        });
    }
    let mut columns = vec![Vec::with_capacity(cells.len()); members.len()];
    for (key, values) in &cells {
        for (col, m) in columns.iter_mut().zip(&members) {
            let v = values.get(m.as_str()).ok_or_else(|| {
                Error::PoolConsistency(format!("cell {key} lacks a value for `{m}`"))
            })?;
            col.push(*v);
        }
    }
    LossPanel::new(members, ScoringRule::External, columns, None)
}

/// `model_metric / benchmark_metric`, e.g. an RMSE ratio.
pub fn relative_ratio(model_metric: f64, benchmark_metric: f64) -> Result<f64> {
    if !(benchmark_metric.is_finite() && benchmark_metric > 0.0) {
        return Err(Error::Domain(format!(
            "benchmark metric {benchmark_metric} must be positive"
        )));
    }
    if !model_metric.is_finite() {
        return Err(Error::Domain(format!(
            "model metric {model_metric} is not finite"
        )));
    }
    Ok(model_metric / benchmark_metric)
}
