//! The Edge Ratio: performance against a moving frontier.
//!
//! At each period the frontier is the smallest loss among all *other* pool
//! members. A model's edge is `frontier - own loss`; positive edges are wins,
//! negative edges are regrets. The ratio of summed wins to summed regrets is
//! scaled by `pool_size - 1` so that a pool of `K` models is put on a common
//! footing regardless of `K`.
//!
//! Ties with the frontier count as neither a win nor a regret.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::loss::{check_labels_ordered, LossSeries, ScoringRule};

/// `T x K` losses of a model pool over a common set of periods.
#[derive(Debug, Clone, PartialEq)]
pub struct LossPanel {
    model_ids: Vec<String>,
    rule: ScoringRule,
    /// One column per model, each of length `T`.
    columns: Vec<Vec<f64>>,
    benchmark_index: Option<usize>,
    period_labels: Option<Vec<String>>,
}

impl LossPanel {
    /// Builds a panel from per-model columns.
    ///
    /// A single-model panel is allowed here so that benchmark-relative metrics
    /// still work; edge computations reject it with [`Error::PoolTooSmall`].
    pub fn new(
        model_ids: Vec<String>,
        rule: ScoringRule,
        columns: Vec<Vec<f64>>,
        period_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if model_ids.is_empty() {
            return Err(Error::PoolTooSmall { size: 0 });
        }
        if model_ids.len() != columns.len() {
            return Err(Error::Alignment(format!(
                "{} model ids for {} loss columns",
                model_ids.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &model_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Validation(format!("duplicate model id `{id}`")));
            }
        }
        let t = columns[0].len();
        if t == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        for (id, col) in model_ids.iter().zip(&columns) {
            if col.len() != t {
                return Err(Error::Alignment(format!(
                    "column `{id}` has {} periods, expected {t}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "loss of `{id}` at period index {i} is not finite"
                )));
            }
            if rule != ScoringRule::External {
                if let Some(i) = col.iter().position(|v| *v < 0.0) {
                    return Err(Error::Validation(format!(
                        "{rule} loss of `{id}` at period index {i} is negative"
                    )));
                }
            }
        }
        if let Some(labels) = &period_labels {
            if labels.len() != t {
                return Err(Error::Alignment(format!(
                    "{} period labels for {t} periods",
                    labels.len()
                )));
            }
            check_labels_ordered(labels)?;
        }
        Ok(LossPanel {
            model_ids,
            rule,
            columns,
            benchmark_index: None,
            period_labels,
        })
    }

    pub fn with_benchmark(mut self, benchmark: &str) -> Result<Self> {
        self.benchmark_index = Some(self.index_of(benchmark)?);
        Ok(self)
    }

    pub fn index_of(&self, model: &str) -> Result<usize> {
        self.model_ids
            .iter()
            .position(|m| m == model)
            .ok_or_else(|| Error::UnknownModel(model.to_string()))
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn rule(&self) -> ScoringRule {
        self.rule
    }

    pub fn column(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    pub fn benchmark_index(&self) -> Option<usize> {
        self.benchmark_index
    }

    pub fn benchmark_id(&self) -> Option<&str> {
        self.benchmark_index.map(|i| self.model_ids[i].as_str())
    }

    pub fn period_labels(&self) -> Option<&[String]> {
        self.period_labels.as_deref()
    }

    pub fn periods(&self) -> usize {
        self.columns[0].len()
    }

    pub fn pool_size(&self) -> usize {
        self.model_ids.len()
    }

    pub fn loss_series(&self, index: usize) -> Result<LossSeries> {
        LossSeries::new(
            self.model_ids[index].clone(),
            self.rule,
            self.columns[index].clone(),
            self.period_labels.clone(),
        )
    }

    /// Keeps only the named models, in the given order. The benchmark, if
    /// set, is kept only when listed.
    pub fn select(&self, models: &[String]) -> Result<LossPanel> {
        let idx = models
            .iter()
            .map(|m| self.index_of(m))
            .collect::<Result<Vec<_>>>()?;
        let mut out = LossPanel::new(
            models.to_vec(),
            self.rule,
            idx.iter().map(|&i| self.columns[i].clone()).collect(),
            self.period_labels.clone(),
        )?;
        if let Some(b) = self.benchmark_id() {
            out.benchmark_index = out.model_ids.iter().position(|m| m == b);
        }
        Ok(out)
    }

    /// Rows `start..end` (exclusive end).
    pub fn slice(&self, start: usize, end: usize) -> Result<LossPanel> {
        if start >= end || end > self.periods() {
            return Err(Error::Validation(format!(
                "empty or out-of-range period window {start}..{end} of {}",
                self.periods()
            )));
        }
        Ok(LossPanel {
            model_ids: self.model_ids.clone(),
            rule: self.rule,
            columns: self
                .columns
                .iter()
                .map(|c| c[start..end].to_vec())
                .collect(),
            benchmark_index: self.benchmark_index,
            period_labels: self.period_labels.as_ref().map(|l| l[start..end].to_vec()),
        })
    }

    fn check_model(&self, index: usize) -> Result<()> {
        if self.pool_size() < 2 {
            return Err(Error::PoolTooSmall {
                size: self.pool_size(),
            });
        }
        if index >= self.pool_size() {
            return Err(Error::UnknownModel(format!("index {index}")));
        }
        Ok(())
    }
}

/// Per-period minimum loss over every model except `exclude`.
pub fn frontier(panel: &LossPanel, exclude: usize) -> Result<Vec<f64>> {
    panel.check_model(exclude)?;
    let t = panel.periods();
    let mut out = vec![f64::INFINITY; t];
    for (j, col) in panel.columns.iter().enumerate() {
        if j == exclude {
            continue;
        }
        for (best, v) in out.iter_mut().zip(col) {
            if *v < *best {
                *best = *v;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSeries {
    pub model_id: String,
    pub edges: Vec<f64>,
    pub wins: Vec<f64>,
    pub regrets: Vec<f64>,
    pub pool_size: usize,
}

impl EdgeSeries {
    pub fn total_wins(&self) -> f64 {
        self.wins.iter().sum()
    }

    pub fn total_regrets(&self) -> f64 {
        self.regrets.iter().sum()
    }

    /// Scaled ratio; see [`edge_ratio`] for the sentinel rules.
    pub fn ratio(&self) -> ExtReal {
        scaled_edge_ratio(self.total_wins(), self.total_regrets(), self.pool_size)
    }
}

pub fn edge_series(panel: &LossPanel, model: usize) -> Result<EdgeSeries> {
    let front = frontier(panel, model)?;
    let own = &panel.columns[model];
    let edges: Vec<f64> = front.iter().zip(own).map(|(f, l)| f - l).collect();
    let wins = edges.iter().map(|e| e.max(0.0)).collect();
    let regrets = edges.iter().map(|e| (-e).max(0.0)).collect();
    Ok(EdgeSeries {
        model_id: panel.model_ids[model].clone(),
        edges,
        wins,
        regrets,
        pool_size: panel.pool_size(),
    })
}

pub(crate) fn scaled_edge_ratio(wins: f64, regrets: f64, pool_size: usize) -> ExtReal {
    let scale = (pool_size - 1) as f64;
    match (wins > 0.0, regrets > 0.0) {
        (false, false) => ExtReal::Undefined,
        (false, true) => ExtReal::Finite(0.0),
        (true, false) => ExtReal::PosInf,
        (true, true) => ExtReal::from_f64(wins / regrets * scale),
    }
}

/// `(sum of wins / sum of regrets) * (K - 1)` with `K` the full pool size.
///
/// Exactly zero when the model never strictly beats the frontier but does
/// incur regret, `+inf` when it never incurs regret but does win, and
/// undefined when it only ever ties.
pub fn edge_ratio(panel: &LossPanel, model: usize) -> Result<ExtReal> {
    Ok(edge_series(panel, model)?.ratio())
}

/// Short fingerprint of a pool's membership, independent of column order.
pub fn pool_hash(model_ids: &[String]) -> String {
    let mut ids: Vec<&str> = model_ids.iter().map(String::as_str).collect();
    ids.sort_unstable();
    let mut hasher = Sha256::new();
    for id in ids {
        hasher.update(id.as_bytes());
        hasher.update([0u8]);
    }
    hasher
        .finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn panel(ids: &[&str], cols: Vec<Vec<f64>>) -> LossPanel {
        LossPanel::new(
            ids.iter().map(|s| s.to_string()).collect(),
            ScoringRule::External,
            cols,
            None,
        )
        .unwrap()
    }

    #[test]
    fn frontier_examples() {
        // rows t: [1,2,3], [3,2,4], [2,4,1]
        let p = panel(
            &["A", "B", "C"],
            vec![
                vec![1.0, 3.0, 2.0],
                vec![2.0, 2.0, 4.0],
                vec![3.0, 4.0, 1.0],
            ],
        );
        assert_eq!(frontier(&p, 0).unwrap(), vec![2.0, 2.0, 1.0]);

        let two = panel(&["A", "B"], vec![vec![1.0, 5.0], vec![7.0, 0.5]]);
        assert_eq!(frontier(&two, 0).unwrap(), vec![7.0, 0.5]);

        let flat = panel(&["A", "B", "C"], vec![vec![2.0; 4]; 3]);
        assert_eq!(frontier(&flat, 1).unwrap(), vec![2.0; 4]);

        let single = panel(&["A"], vec![vec![1.0]]);
        assert!(matches!(
            frontier(&single, 0),
            Err(Error::PoolTooSmall { size: 1 })
        ));
    }

    fn hand_panel() -> LossPanel {
        panel(
            &["M", "A", "B"],
            vec![
                vec![1.0, 3.0, 2.0],
                vec![2.0, 2.0, 4.0],
                vec![3.0, 4.0, 1.0],
            ],
        )
    }

    #[test]
    fn edge_series_example() {
        let e = edge_series(&hand_panel(), 0).unwrap();
        assert_eq!(e.edges, vec![1.0, -1.0, -1.0]);
        assert_eq!(e.wins, vec![1.0, 0.0, 0.0]);
        assert_eq!(e.regrets, vec![0.0, 1.0, 1.0]);
        assert_eq!(e.pool_size, 3);
        // (1/2) * 2
        assert_eq!(edge_ratio(&hand_panel(), 0).unwrap(), ExtReal::Finite(1.0));
    }

    #[test]
    fn twin_never_wins() {
        let p = panel(
            &["M", "twin", "X"],
            vec![
                vec![1.0, 2.0, 3.0],
                vec![1.0, 2.0, 3.0],
                vec![0.5, 9.0, 9.0],
            ],
        );
        let e = edge_series(&p, 0).unwrap();
        assert!(e.edges.iter().all(|x| *x <= 0.0));
        assert!(e.wins.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn dominant_and_second_place() {
        let p = panel(
            &["best", "second", "third"],
            vec![
                vec![1.0, 1.0, 1.0],
                vec![2.0, 1.5, 3.0],
                vec![4.0, 2.5, 3.5],
            ],
        );
        let best = edge_series(&p, 0).unwrap();
        assert!(best.regrets.iter().all(|x| *x == 0.0));
        assert_eq!(best.ratio(), ExtReal::PosInf);
        assert_eq!(edge_ratio(&p, 1).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn always_tied_is_undefined() {
        let p = panel(&["a", "b"], vec![vec![1.0, 2.0], vec![1.0, 2.0]]);
        assert_eq!(edge_ratio(&p, 0).unwrap(), ExtReal::Undefined);
    }

    #[test]
    fn pool_hash_ignores_order() {
        let a = pool_hash(&["x".into(), "y".into()]);
        let b = pool_hash(&["y".into(), "x".into()]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);
        assert_ne!(a, pool_hash(&["x".into(), "z".into()]));
    }

    #[test]
    fn select_and_slice() {
        let p = hand_panel().with_benchmark("A").unwrap();
        let s = p.select(&["B".into(), "A".into()]).unwrap();
        assert_eq!(s.column(0), &[3.0, 4.0, 1.0]);
        assert_eq!(s.benchmark_id(), Some("A"));
        let w = p.slice(1, 3).unwrap();
        assert_eq!(w.column(0), &[3.0, 2.0]);
        assert!(p.slice(2, 2).is_err());
    }

    fn pool() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..6, 1usize..40).prop_flat_map(|(k, t)| {
            prop::collection::vec(prop::collection::vec(0.0f64..10.0, t), k)
        })
    }

    fn ids(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("m{i}")).collect()
    }

    proptest! {
        #[test]
        fn decomposition(cols in pool()) {
            let p = LossPanel::new(ids(cols.len()), ScoringRule::External, cols, None).unwrap();
            for m in 0..p.pool_size() {
                let e = edge_series(&p, m).unwrap();
                for t in 0..e.edges.len() {
                    prop_assert_eq!(e.edges[t], e.wins[t] - e.regrets[t]);
                    prop_assert_eq!(e.wins[t] * e.regrets[t], 0.0);
                }
            }
        }

        #[test]
        fn at_most_one_strict_winner(cols in pool()) {
            let p = LossPanel::new(ids(cols.len()), ScoringRule::External, cols, None).unwrap();
            let series: Vec<_> = (0..p.pool_size()).map(|m| edge_series(&p, m).unwrap()).collect();
            for t in 0..p.periods() {
                let winners = series.iter().filter(|s| s.wins[t] > 0.0).count();
                prop_assert!(winners <= 1);
            }
        }

        #[test]
        fn invariant_to_common_rescaling_and_shift(cols in pool(), c in 0.1f64..10.0, shifts in prop::collection::vec(-5.0f64..5.0, 40)) {
            let k = cols.len();
            let p = LossPanel::new(ids(k), ScoringRule::External, cols.clone(), None).unwrap();
            // powers of two keep the rescaling exact
            let scale = 2f64.powi(c.log2().round() as i32);
            let scaled: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(|v| v * scale).collect()).collect();
            let ps = LossPanel::new(ids(k), ScoringRule::External, scaled, None).unwrap();
            let shifted: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().zip(&shifts).map(|(v, s)| v + s).collect()).collect();
            let ph = LossPanel::new(ids(k), ScoringRule::External, shifted, None).unwrap();
            for m in 0..k {
                let base = edge_ratio(&p, m).unwrap();
                prop_assert_eq!(base, edge_ratio(&ps, m).unwrap());
                match (base, edge_ratio(&ph, m).unwrap()) {
                    (ExtReal::Finite(a), ExtReal::Finite(b)) => prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs())),
                    // a shift can turn an exact tie into a rounding-sized edge
                    (ExtReal::Undefined, _) | (_, ExtReal::Undefined) => {}
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
        }

        #[test]
        fn duplicating_a_competitor_only_rescales(cols in pool(), pick in any::<prop::sample::Index>()) {
            let k = cols.len();
            let p = LossPanel::new(ids(k), ScoringRule::External, cols.clone(), None).unwrap();
            let dup = 1 + pick.index(k - 1);
            let mut grown = cols.clone();
            grown.push(cols[dup].clone());
            let mut grown_ids = ids(k);
            grown_ids.push("dup".into());
            let pg = LossPanel::new(grown_ids, ScoringRule::External, grown, None).unwrap();
            let before = edge_series(&p, 0).unwrap();
            let after = edge_series(&pg, 0).unwrap();
            prop_assert_eq!(before.total_wins(), after.total_wins());
            prop_assert_eq!(before.total_regrets(), after.total_regrets());
            if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (before.ratio(), after.ratio()) {
                let factor = k as f64 / (k - 1) as f64;
                prop_assert!((b - a * factor).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
