//! Loss series and benchmark-relative return series.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How per-period losses were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringRule {
    SquaredError,
    AbsoluteError,
    /// Externally supplied scores (log score, CRPS, ...), taken verbatim.
    External,
}

impl ScoringRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoringRule::SquaredError => "squared_error",
            ScoringRule::AbsoluteError => "absolute_error",
            ScoringRule::External => "external",
        }
    }

    fn nonnegative(self) -> bool {
        !matches!(self, ScoringRule::External)
    }
}

impl fmt::Display for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoringRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "squared_error" | "squared" | "se" => Ok(ScoringRule::SquaredError),
            "absolute_error" | "absolute" | "ae" => Ok(ScoringRule::AbsoluteError),
            "external" => Ok(ScoringRule::External),
            other => Err(Error::Config(format!("unknown scoring rule `{other}`"))),
        }
    }
}

/// Realized losses of one model under one scoring rule.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSeries {
    model_id: String,
    rule: ScoringRule,
    values: Vec<f64>,
    period_labels: Option<Vec<String>>,
}

impl LossSeries {
    pub fn new(
        model_id: impl Into<String>,
        rule: ScoringRule,
        values: Vec<f64>,
        period_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let model_id = model_id.into();
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(t) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "loss of `{model_id}` at index {t} is not finite"
            )));
        }
        if rule.nonnegative() {
            if let Some(t) = values.iter().position(|v| *v < 0.0) {
                return Err(Error::Validation(format!(
                    "{rule} loss of `{model_id}` at index {t} is negative"
                )));
            }
        }
        if let Some(labels) = &period_labels {
            if labels.len() != values.len() {
                return Err(Error::Alignment(format!(
                    "`{model_id}` has {} period labels for {} values",
                    labels.len(),
                    values.len()
                )));
            }
            check_labels_ordered(labels)?;
        }
        Ok(LossSeries {
            model_id,
            rule,
            values,
            period_labels,
        })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn rule(&self) -> ScoringRule {
        self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period_labels(&self) -> Option<&[String]> {
        self.period_labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Compares period labels numerically when both parse as numbers, else as strings.
pub(crate) fn compare_labels(a: &str, b: &str) -> Ordering {
    match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
        (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        _ => a.cmp(b),
    }
}

pub(crate) fn check_labels_ordered(labels: &[String]) -> Result<()> {
    for (i, w) in labels.windows(2).enumerate() {
        match compare_labels(&w[0], &w[1]) {
            Ordering::Less => {}
            Ordering::Equal => {
                return Err(Error::Alignment(format!(
                    "duplicate period label `{}` at positions {} and {}",
                    w[1],
                    i,
                    i + 1
                )))
            }
            Ordering::Greater => {
                return Err(Error::Alignment(format!(
                    "period labels not increasing: `{}` precedes `{}`",
                    w[0], w[1]
                )))
            }
        }
    }
    Ok(())
}

/// Per-period gains of a model over a benchmark: `benchmark loss - model loss`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    model_id: String,
    benchmark_id: String,
    rule: ScoringRule,
    values: Vec<f64>,
    period_labels: Option<Vec<String>>,
}

impl ReturnSeries {
    pub fn new(
        model_id: impl Into<String>,
        benchmark_id: impl Into<String>,
        rule: ScoringRule,
        values: Vec<f64>,
    ) -> Result<Self> {
        let model_id = model_id.into();
        let benchmark_id = benchmark_id.into();
        if model_id == benchmark_id {
            return Err(Error::Validation(format!(
                "model and benchmark are both `{model_id}`"
            )));
        }
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(t) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "return at index {t} is not finite"
            )));
        }
        Ok(ReturnSeries {
            model_id,
            benchmark_id,
            rule,
            values,
            period_labels: None,
        })
    }

    /// Unlabelled series; handy for tests and synthetic data.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        ReturnSeries::new("model", "benchmark", ScoringRule::External, values)
    }

    pub fn with_period_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.values.len() {
            return Err(Error::Alignment(format!(
                "{} period labels for {} returns",
                labels.len(),
                self.values.len()
            )));
        }
        self.period_labels = Some(labels);
        Ok(self)
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn benchmark_id(&self) -> &str {
        &self.benchmark_id
    }

    pub fn rule(&self) -> ScoringRule {
        self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period_labels(&self) -> Option<&[String]> {
        self.period_labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies every return by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        if out.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("scaled return overflowed".into()));
        }
        Ok(out)
    }
}

/// Per-period losses from actuals and point forecasts.
pub fn compute_losses(
    model_id: &str,
    actuals: &[f64],
    forecasts: &[f64],
    rule: ScoringRule,
) -> Result<LossSeries> {
    if actuals.len() != forecasts.len() {
        return Err(Error::Alignment(format!(
            "{} actuals vs {} forecasts for `{model_id}`",
            actuals.len(),
            forecasts.len()
        )));
    }
    if let Some(t) = actuals
        .iter()
        .zip(forecasts)
        .position(|(a, f)| !a.is_finite() || !f.is_finite())
    {
        return Err(Error::Validation(format!(
            "non-finite actual or forecast for `{model_id}` at index {t}"
        )));
    }
    let values = match rule {
        ScoringRule::SquaredError => actuals
            .iter()
            .zip(forecasts)
            .map(|(a, f)| (a - f).powi(2))
            .collect(),
        ScoringRule::AbsoluteError => actuals
            .iter()
            .zip(forecasts)
            .map(|(a, f)| (a - f).abs())
            .collect(),
        ScoringRule::External => {
            return Err(Error::Unsupported(
                "external losses are ingested directly, not computed from forecasts".into(),
            ))
        }
    };
    LossSeries::new(model_id, rule, values, None)
}

/// Gain of `model` over `benchmark` in each period. Positive means the model won.
pub fn return_series(benchmark: &LossSeries, model: &LossSeries) -> Result<ReturnSeries> {
    if benchmark.len() != model.len() {
        return Err(Error::Alignment(format!(
            "benchmark `{}` has {} periods, model `{}` has {}",
            benchmark.model_id,
            benchmark.len(),
            model.model_id,
            model.len()
        )));
    }
    if benchmark.rule != model.rule {
        return Err(Error::Incompatible(format!(
            "benchmark scored by {}, model by {}",
            benchmark.rule, model.rule
        )));
    }
    if let (Some(a), Some(b)) = (&benchmark.period_labels, &model.period_labels) {
        if a != b {
            return Err(Error::Alignment(format!(
                "period labels of `{}` and `{}` differ",
                benchmark.model_id, model.model_id
            )));
        }
    }
    let values = benchmark
        .values
        .iter()
        .zip(&model.values)
        .map(|(b, m)| b - m)
        .collect();
    let mut out = ReturnSeries::new(&model.model_id, &benchmark.model_id, model.rule, values)?;
    out.period_labels = benchmark
        .period_labels
        .clone()
        .or_else(|| model.period_labels.clone());
    Ok(out)
}

/// Average gain, i.e. the improvement in average loss.
pub fn mean_return(r: &ReturnSeries) -> f64 {
    mean(&r.values)
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ls(id: &str, rule: ScoringRule, v: &[f64]) -> LossSeries {
        LossSeries::new(id, rule, v.to_vec(), None).unwrap()
    }

    #[test]
    fn losses_from_forecasts() {
        let se = compute_losses("m", &[1.0, 2.0], &[1.0, 2.0], ScoringRule::SquaredError).unwrap();
        assert_eq!(se.values(), &[0.0, 0.0]);
        let se = compute_losses("m", &[3.0, 0.0], &[1.0, 2.0], ScoringRule::SquaredError).unwrap();
        assert_eq!(se.values(), &[4.0, 4.0]);
        let ae = compute_losses("m", &[3.0, 0.0], &[1.0, 2.0], ScoringRule::AbsoluteError).unwrap();
        assert_eq!(ae.values(), &[2.0, 2.0]);
    }

    #[test]
    fn loss_errors() {
        assert!(matches!(
            compute_losses("m", &[1.0], &[1.0, 2.0], ScoringRule::SquaredError),
            Err(Error::Alignment(_))
        ));
        assert!(matches!(
            compute_losses("m", &[f64::NAN], &[1.0], ScoringRule::SquaredError),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            compute_losses("m", &[1.0], &[1.0], ScoringRule::External),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            compute_losses("m", &[], &[], ScoringRule::SquaredError),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn series_invariants() {
        assert!(LossSeries::new("m", ScoringRule::SquaredError, vec![-1.0], None).is_err());
        assert!(LossSeries::new("m", ScoringRule::External, vec![-1.0], None).is_ok());
        let dup = vec!["2007Q2".to_string(), "2007Q2".to_string()];
        assert!(LossSeries::new("m", ScoringRule::External, vec![1.0, 2.0], Some(dup)).is_err());
        let numeric = vec!["9".to_string(), "10".to_string()];
        assert!(LossSeries::new("m", ScoringRule::External, vec![1.0, 2.0], Some(numeric)).is_ok());
    }

    #[test]
    fn returns_hand_examples() {
        let rule = ScoringRule::SquaredError;
        let r = return_series(&ls("b", rule, &[4.0, 4.0]), &ls("m", rule, &[4.0, 4.0])).unwrap();
        assert_eq!(r.values(), &[0.0, 0.0]);
        let r = return_series(&ls("b", rule, &[4.0, 1.0]), &ls("m", rule, &[1.0, 3.0])).unwrap();
        assert_eq!(r.values(), &[3.0, -2.0]);
        assert_eq!(mean_return(&r), 0.5);
        let r = return_series(
            &ls("b", rule, &[2.0, 2.0, 2.0]),
            &ls("m", rule, &[1.0, 1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(r.values(), &[1.0, 1.0, 1.0]);
        assert_eq!(mean_return(&r), 1.0);
        let zero = ReturnSeries::from_values(vec![0.0; 4]).unwrap();
        assert_eq!(mean_return(&zero), 0.0);
    }

    #[test]
    fn return_errors() {
        let se = ScoringRule::SquaredError;
        let ae = ScoringRule::AbsoluteError;
        assert!(matches!(
            return_series(&ls("b", se, &[1.0]), &ls("m", se, &[1.0, 2.0])),
            Err(Error::Alignment(_))
        ));
        assert!(matches!(
            return_series(&ls("b", se, &[1.0]), &ls("m", ae, &[1.0])),
            Err(Error::Incompatible(_))
        ));
        let a = LossSeries::new("b", se, vec![1.0], Some(vec!["2001".into()])).unwrap();
        let b = LossSeries::new("m", se, vec![1.0], Some(vec!["2002".into()])).unwrap();
        assert!(matches!(return_series(&a, &b), Err(Error::Alignment(_))));
        assert!(return_series(&ls("m", se, &[1.0]), &ls("m", se, &[1.0])).is_err());
    }

    proptest! {
        #[test]
        fn antisymmetry(pairs in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 1..60)) {
            let (b, m): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let rule = ScoringRule::SquaredError;
            let bm = return_series(&ls("b", rule, &b), &ls("m", rule, &m)).unwrap();
            let mb = return_series(&ls("m", rule, &m), &ls("b", rule, &b)).unwrap();
            for (x, y) in bm.values().iter().zip(mb.values()) {
                prop_assert_eq!(*x, -*y);
            }
            for (r, bl) in bm.values().iter().zip(&b) {
                prop_assert!(*r <= *bl);
            }
        }

        #[test]
        fn self_comparison_is_zero(pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..40)) {
            let (a, f): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            for rule in [ScoringRule::SquaredError, ScoringRule::AbsoluteError] {
                let x = compute_losses("b", &a, &f, rule).unwrap();
                let y = compute_losses("m", &a, &f, rule).unwrap();
                let r = return_series(&x, &y).unwrap();
                prop_assert!(r.values().iter().all(|v| *v == 0.0));
            }
        }

        #[test]
        fn mean_invariant_under_joint_permutation(
            pairs in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 2..30),
            seed in any::<u64>(),
        ) {
            let rule = ScoringRule::AbsoluteError;
            let (b, m): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let base = mean_return(&return_series(&ls("b", rule, &b), &ls("m", rule, &m)).unwrap());
            // rotate both series by the same amount
            let k = (seed as usize) % pairs.len();
            let mut rotated = pairs.clone();
            rotated.rotate_left(k);
            let (b2, m2): (Vec<f64>, Vec<f64>) = rotated.into_iter().unzip();
            let perm = mean_return(&return_series(&ls("b", rule, &b2), &ls("m", rule, &m2)).unwrap());
            prop_assert!((base - perm).abs() <= 1e-12 * (1.0 + base.abs()));
        }
    }
}
