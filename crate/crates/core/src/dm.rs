//! Autocovariances, HAC long-run variance and the Diebold-Mariano statistic.
//!
//! Autocovariances use the `1/T` divisor at every lag, which keeps the
//! Bartlett long-run variance positive semidefinite.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::loss::{mean, ReturnSeries};

/// Relative floor applied to a non-positive long-run variance.
pub const LRV_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// Newey-West weights `1 - k/(K+1)`.
    #[default]
    Bartlett,
    /// Unit weights up to `K`: `gamma_0 + 2 * sum gamma_k`. Can go negative.
    TruncatedUniform,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Bartlett => "bartlett",
            Kernel::TruncatedUniform => "truncated_uniform",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "bartlett" | "newey_west" => Ok(Kernel::Bartlett),
            "truncated_uniform" | "truncated" | "uniform" => Ok(Kernel::TruncatedUniform),
            other => Err(Error::Config(format!("unknown HAC kernel `{other}`"))),
        }
    }
}

/// How the truncation lag `K` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum LagRule {
    Fixed(usize),
    /// `K = h - 1` for direct `h`-step forecasts.
    HorizonMinusOne(usize),
    /// `K = floor(1.5 * T^(1/3))`.
    RuleOfThumb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HacConfig {
    pub kernel: Kernel,
    pub lag_rule: LagRule,
}

impl Default for HacConfig {
    fn default() -> Self {
        HacConfig {
            kernel: Kernel::Bartlett,
            lag_rule: LagRule::RuleOfThumb,
        }
    }
}

impl HacConfig {
    pub fn new(kernel: Kernel, lag_rule: LagRule) -> Self {
        HacConfig { kernel, lag_rule }
    }

    /// Plain `gamma_0`, i.e. no serial-correlation correction.
    pub fn no_correction() -> Self {
        HacConfig::new(Kernel::TruncatedUniform, LagRule::Fixed(0))
    }

    /// Bartlett with `K = h - 1` when a horizon is known, else the rule of thumb.
    pub fn for_horizon(horizon: Option<usize>) -> Self {
        match horizon {
            Some(h) => HacConfig::new(Kernel::Bartlett, LagRule::HorizonMinusOne(h)),
            None => HacConfig::default(),
        }
    }

    /// Resolves the truncation lag for a series of length `len`.
    pub fn max_lag(&self, len: usize) -> Result<usize> {
        let lag = match self.lag_rule {
            LagRule::Fixed(k) => k,
            LagRule::HorizonMinusOne(h) => {
                if h == 0 {
                    return Err(Error::Config("forecast horizon must be positive".into()));
                }
                h - 1
            }
            LagRule::RuleOfThumb => rule_of_thumb_lag(len),
        };
        if lag >= len {
            return Err(Error::LagOutOfRange { lag, len });
        }
        Ok(lag)
    }
}

pub fn rule_of_thumb_lag(len: usize) -> usize {
    (1.5 * (len as f64).cbrt()).floor() as usize
}

/// Sample autocovariance at lag `k` with the `1/T` divisor.
pub fn autocovariance(r: &ReturnSeries, k: usize) -> Result<f64> {
    autocov_of(r.values(), k)
}

pub(crate) fn autocov_of(xs: &[f64], k: usize) -> Result<f64> {
    let n = xs.len();
    if k >= n {
        return Err(Error::LagOutOfRange { lag: k, len: n });
    }
    let m = mean(xs);
    let s: f64 = xs[k..].iter().zip(xs).map(|(a, b)| (a - m) * (b - m)).sum();
    Ok(s / n as f64)
}

/// First-order autocorrelation `gamma_1 / gamma_0`. Undefined for constant input.
pub fn autocorr1(e: &[f64]) -> Result<ExtReal> {
    if e.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: e.len(),
        });
    }
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite value in error series".into()));
    }
    let first = e[0];
    if e.iter().all(|x| *x == first) {
        return Ok(ExtReal::Undefined);
    }
    let g0 = autocov_of(e, 0)?;
    let g1 = autocov_of(e, 1)?;
    Ok(ExtReal::ratio(g1, g0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRunVariance {
    pub value: f64,
    pub kernel: Kernel,
    pub lag: usize,
    /// The kernel sum was non-positive and `value` is the floor `1e-12 * gamma_0`.
    pub floored: bool,
}

pub fn long_run_variance(r: &ReturnSeries, cfg: &HacConfig) -> Result<LongRunVariance> {
    lrv_of(r.values(), cfg)
}

pub(crate) fn lrv_of(xs: &[f64], cfg: &HacConfig) -> Result<LongRunVariance> {
    let lag = cfg.max_lag(xs.len())?;
    let g0 = autocov_of(xs, 0)?;
    let mut sum = g0;
    for k in 1..=lag {
        let w = match cfg.kernel {
            Kernel::Bartlett => 1.0 - k as f64 / (lag as f64 + 1.0),
            Kernel::TruncatedUniform => 1.0,
        };
        sum += 2.0 * w * autocov_of(xs, k)?;
    }
    let floored = sum <= 0.0 && g0 > 0.0;
    if floored && cfg.kernel == Kernel::Bartlett {
        log::warn!("Bartlett long-run variance {sum:e} non-positive at K = {lag}; flooring");
    }
    Ok(LongRunVariance {
        value: if floored {
            LRV_FLOOR * g0
        } else {
            sum.max(0.0)
        },
        kernel: cfg.kernel,
        lag,
        floored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmStatistic {
    pub statistic: ExtReal,
    pub lrv: LongRunVariance,
}

/// `mean / sqrt(LRV / T)`; undefined when the long-run variance is zero.
pub fn dm_statistic(r: &ReturnSeries, cfg: &HacConfig) -> Result<DmStatistic> {
    dm_of(r.values(), cfg)
}

pub(crate) fn dm_of(xs: &[f64], cfg: &HacConfig) -> Result<DmStatistic> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: xs.len(),
        });
    }
    let lrv = lrv_of(xs, cfg)?;
    let statistic = if lrv.value > 0.0 {
        ExtReal::from_f64(mean(xs) / (lrv.value / xs.len() as f64).sqrt())
    } else {
        ExtReal::Undefined
    };
    Ok(DmStatistic { statistic, lrv })
}
