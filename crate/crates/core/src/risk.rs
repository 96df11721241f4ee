//! Risk-adjusted summaries of a return series: Sharpe, Sortino, Omega and
//! drawdowns.
//!
//! Every ratio uses the sentinel policy of [`ExtReal::ratio`]: 0/0 is
//! undefined and x/0 is a signed infinity. Omega is the one exception and
//! maps 0/0 to 1 (upside and downside in balance).
//!
//! Drawdowns are computed on cumulative *sums* of gains, with the running
//! peak seeded at zero, so a series that starts with a loss draws down from
//! the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::loss::{mean, ReturnSeries};

/// Divisor used for the return variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceConvention {
    /// `T - 1`, the usual sample variance.
    #[default]
    SampleTminus1,
    /// `T`; makes `DM(K = 0) = sqrt(T) * Sharpe` an exact identity.
    PopulationT,
}

/// Standard deviation of `xs` under `convention`. Exactly zero for a constant
/// sequence, so zero-dispersion sentinels fire regardless of rounding in the mean.
pub(crate) fn std_dev(xs: &[f64], convention: VarianceConvention) -> f64 {
    let first = xs[0];
    if xs.iter().all(|x| *x == first) {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    let denom = match convention {
        VarianceConvention::SampleTminus1 => (xs.len() - 1) as f64,
        VarianceConvention::PopulationT => xs.len() as f64,
    };
    (ss / denom).sqrt()
}

/// Root mean square of the negative parts, divided by the full length.
pub(crate) fn downside_deviation(xs: &[f64]) -> f64 {
    let ss: f64 = xs.iter().map(|x| x.min(0.0).powi(2)).sum();
    (ss / xs.len() as f64).sqrt()
}

fn center(xs: &[f64]) -> f64 {
    let first = xs[0];
    if xs.iter().all(|x| *x == first) {
        first
    } else {
        mean(xs)
    }
}

pub(crate) fn sharpe_of(xs: &[f64], convention: VarianceConvention) -> Result<ExtReal> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: xs.len(),
        });
    }
    Ok(ExtReal::ratio(center(xs), std_dev(xs, convention)))
}

pub(crate) fn sortino_of(xs: &[f64]) -> ExtReal {
    ExtReal::ratio(center(xs), downside_deviation(xs))
}

/// (upside sum, downside sum); both nonnegative.
pub(crate) fn upside_downside(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((0.0, 0.0), |(up, down), x| {
        (up + x.max(0.0), down + (-x).max(0.0))
    })
}

pub(crate) fn omega_of(xs: &[f64]) -> ExtReal {
    let (up, down) = upside_downside(xs);
    if up == 0.0 && down == 0.0 {
        ExtReal::Finite(1.0)
    } else {
        ExtReal::ratio(up, down)
    }
}

/// Mean gain per unit of gain volatility.
pub fn sharpe_ratio(r: &ReturnSeries, convention: VarianceConvention) -> Result<ExtReal> {
    sharpe_of(r.values(), convention)
}

/// Mean gain per unit of downside deviation.
///
/// The downside deviation divides by the full length `T`, counting
/// non-negative periods as zeros. Many portfolio libraries divide only over
/// losing periods; this one does not.
pub fn sortino_ratio(r: &ReturnSeries) -> ExtReal {
    sortino_of(r.values())
}

/// Total upside over total downside.
pub fn omega_ratio(r: &ReturnSeries) -> ExtReal {
    omega_of(r.values())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drawdown {
    /// Cumulative gains `R_1..R_T`.
    pub cumulative: Vec<f64>,
    /// `DD_t = max(R_0..R_t) - R_t` for `t = 1..T`.
    pub path: Vec<f64>,
    pub max_drawdown: f64,
}

pub fn drawdown(r: &ReturnSeries) -> Drawdown {
    drawdown_of(r.values())
}

pub(crate) fn drawdown_of(xs: &[f64]) -> Drawdown {
    let mut cumulative = Vec::with_capacity(xs.len());
    let mut path = Vec::with_capacity(xs.len());
    let mut level = 0.0_f64;
    let mut peak = 0.0_f64;
    let mut max_dd = 0.0_f64;
    for x in xs {
        level += x;
        peak = peak.max(level);
        let dd = peak - level;
        max_dd = max_dd.max(dd);
        cumulative.push(level);
        path.push(dd);
    }
    Drawdown {
        cumulative,
        path,
        max_drawdown: max_dd,
    }
}

/// All risk metrics of one model against one benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub mean_return: f64,
    /// Sample standard deviation (`T - 1`).
    pub volatility: f64,
    pub downside_deviation: f64,
    pub sharpe: ExtReal,
    pub sortino: ExtReal,
    pub omega: ExtReal,
    pub max_drawdown: f64,
    pub drawdown_path: Vec<f64>,
    /// Mean of the positive parts over all periods.
    pub upside_mean: f64,
    /// Mean of the absolute negative parts over all periods.
    pub downside_mean: f64,
}

pub fn risk_report(r: &ReturnSeries) -> Result<RiskReport> {
    let xs = r.values();
    let sharpe = sharpe_of(xs, VarianceConvention::SampleTminus1)?;
    let dd = drawdown_of(xs);
    let (up, down) = upside_downside(xs);
    let n = xs.len() as f64;
    Ok(RiskReport {
        mean_return: center(xs),
        volatility: std_dev(xs, VarianceConvention::SampleTminus1),
        downside_deviation: downside_deviation(xs),
        sharpe,
        sortino: sortino_of(xs),
        omega: omega_of(xs),
        max_drawdown: dd.max_drawdown,
        drawdown_path: dd.path,
        upside_mean: up / n,
        downside_mean: down / n,
    })
}
