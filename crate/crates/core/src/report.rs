//! Report bundles emitted by the command-line front end.
//!
//! A report is a list of panels; each panel is a list of metric rows with one
//! value per model. Every row carries the direction in which it is ranked and
//! the resulting best / second-best model indices.

use serde::{Deserialize, Serialize};

use crate::ext::{round_sig, ExtReal};
use crate::sim::{DmPenaltyResult, NullEdgeResult, SimConfig};

/// Ranking direction of a metric row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
    /// Smallest absolute value wins.
    SmallestAbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub direction: Direction,
    pub values: Vec<ExtReal>,
    /// Indices tied for best; empty when highlighting is off.
    pub best: Vec<usize>,
    /// Indices tied for second best.
    pub second: Vec<usize>,
}

impl MetricRow {
    pub fn new(metric: impl Into<String>, direction: Direction, values: Vec<ExtReal>) -> Self {
        MetricRow {
            metric: metric.into(),
            direction,
            values,
            best: Vec::new(),
            second: Vec::new(),
        }
    }

    /// Fills `best` and `second` from `values`; undefined entries never rank.
    pub fn highlight(&mut self) {
        let score = |v: ExtReal| -> Option<f64> {
            let x = match self.direction {
                Direction::HigherIsBetter => v.to_f64(),
                Direction::LowerIsBetter => -v.to_f64(),
                Direction::SmallestAbs => -v.abs().to_f64(),
            };
            (!x.is_nan()).then_some(x)
        };
        let mut distinct: Vec<f64> = self.values.iter().filter_map(|v| score(*v)).collect();
        distinct.sort_by(|a, b| b.total_cmp(a));
        distinct.dedup();
        let pick = |target: Option<&f64>| -> Vec<usize> {
            match target {
                Some(t) => (0..self.values.len())
                    .filter(|&i| score(self.values[i]) == Some(*t))
                    .collect(),
                None => Vec::new(),
            }
        };
        self.best = pick(distinct.first());
        self.second = pick(distinct.get(1));
    }

    pub fn clear_highlight(&mut self) {
        self.best.clear();
        self.second.clear();
    }
}

/// Whether a rendered table lists metrics down the side or models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    MetricsAsRows,
    ModelsAsRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub title: String,
    pub models: Vec<String>,
    pub rows: Vec<MetricRow>,
    #[serde(default)]
    pub layout: Layout,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Panel {
    pub fn new(title: impl Into<String>, models: Vec<String>) -> Self {
        Panel {
            title: title.into(),
            models,
            rows: Vec::new(),
            layout: Layout::MetricsAsRows,
            notes: Vec::new(),
        }
    }

    pub fn row(&self, metric: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    /// Value of `metric` for `model`.
    pub fn value(&self, metric: &str, model: &str) -> Option<ExtReal> {
        let j = self.models.iter().position(|m| m == model)?;
        self.row(metric).map(|r| r.values[j])
    }

    pub fn set_highlight(&mut self, on: bool) {
        for r in &mut self.rows {
            if on {
                r.highlight();
            } else {
                r.clear_highlight();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub benchmark: String,
    pub models: Vec<String>,
    pub periods: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(String, String)>,
    pub hac: String,
    /// Hash of the model pool the Edge rows were computed on.
    pub pool_hash: String,
    pub pool: Vec<String>,
    pub panels: Vec<Panel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaReport {
    pub benchmark: String,
    pub normalization: String,
    pub pool_hash: String,
    pub pool: Vec<String>,
    pub panels: Vec<Panel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub null_edge: NullEdgeResult,
    /// Three binomial standard errors around `1 / pool_size`.
    pub win_frequency_tolerance: f64,
    pub win_frequency_ok: bool,
    pub dm_penalty: DmPenaltyResult,
    /// Mean |DM| with Bartlett correction below mean |DM| without.
    pub penalty_observed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Evaluation(EvaluationReport),
    Meta(MetaReport),
    Simulation(SimulationReport),
}

fn round_all(v: &mut [ExtReal], digits: usize) {
    v.iter_mut().for_each(|x| *x = x.round_sig(digits));
}

impl Panel {
    fn round(&mut self, digits: usize) {
        for r in &mut self.rows {
            round_all(&mut r.values, digits);
        }
    }
}

impl Report {
    /// Copy with every computed number rounded to `digits` significant
    /// digits; this is what the structured writer emits.
    pub fn rounded(&self, digits: usize) -> Report {
        let mut out = self.clone();
        match &mut out {
            Report::Evaluation(r) => r.panels.iter_mut().for_each(|p| p.round(digits)),
            Report::Meta(r) => r.panels.iter_mut().for_each(|p| p.round(digits)),
            Report::Simulation(s) => {
                let n = &mut s.null_edge;
                n.mean_edge = n.mean_edge.round_sig(digits);
                round_all(&mut n.per_replication, digits);
                n.win_frequency
                    .iter_mut()
                    .for_each(|x| *x = round_sig(*x, digits));
                s.win_frequency_tolerance = round_sig(s.win_frequency_tolerance, digits);
                let d = &mut s.dm_penalty;
                round_all(&mut d.dm_k0, digits);
                round_all(&mut d.dm_bartlett, digits);
                for m in [
                    &mut d.mean_dm_k0,
                    &mut d.mean_dm_bartlett,
                    &mut d.mean_abs_dm_k0,
                    &mut d.mean_abs_dm_bartlett,
                ] {
                    *m = m.round_sig(digits);
                }
            }
        }
        out
    }

    pub fn panels(&self) -> &[Panel] {
        match self {
            Report::Evaluation(r) => &r.panels,
            Report::Meta(r) => &r.panels,
            Report::Simulation(_) => &[],
        }
    }
}

/// Cumulative gain and drawdown of one model against the benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub model: String,
    pub periods: Vec<String>,
    pub cumulative_gain: Vec<f64>,
    pub drawdown: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExtReal::*;

    fn row(direction: Direction, values: &[ExtReal]) -> MetricRow {
        let mut r = MetricRow::new("m", direction, values.to_vec());
        r.highlight();
        r
    }

    #[test]
    fn higher_is_better() {
        let r = row(
            Direction::HigherIsBetter,
            &[Finite(0.2), Finite(0.9), Undefined, Finite(0.5)],
        );
        assert_eq!(r.best, vec![1]);
        assert_eq!(r.second, vec![3]);
    }

    #[test]
    fn infinity_ranks_first() {
        let r = row(Direction::HigherIsBetter, &[Finite(3.0), PosInf]);
        assert_eq!(r.best, vec![1]);
    }

    #[test]
    fn lower_and_abs() {
        let r = row(
            Direction::LowerIsBetter,
            &[Finite(0.9), Finite(1.1), Finite(0.8)],
        );
        assert_eq!((r.best.clone(), r.second.clone()), (vec![2], vec![0]));
        let r = row(
            Direction::SmallestAbs,
            &[Finite(-0.1), Finite(0.3), Finite(0.05)],
        );
        assert_eq!((r.best.clone(), r.second.clone()), (vec![2], vec![0]));
    }

    #[test]
    fn maxdd_negated_least_negative_wins() {
        let r = row(Direction::HigherIsBetter, &[Finite(-13.63), Finite(-2.0)]);
        assert_eq!(r.best, vec![1]);
    }

    #[test]
    fn ties_share_a_rank() {
        let r = row(
            Direction::HigherIsBetter,
            &[Finite(-0.08), Finite(-0.08), Finite(0.5)],
        );
        assert_eq!(r.best, vec![2]);
        assert_eq!(r.second, vec![0, 1]);
    }

    #[test]
    fn all_undefined() {
        let r = row(Direction::HigherIsBetter, &[Undefined, Undefined]);
        assert!(r.best.is_empty() && r.second.is_empty());
    }
}
