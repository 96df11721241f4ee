//! Monte-Carlo checks on synthetic model pools.
//!
//! Random numbers come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Replication `i` of the edge simulation draws from
//! stream `i`; replication `i` of the DM simulation from stream `2^32 + i`.
//! Replications therefore do not depend on scheduling and run in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dm::{dm_of, rule_of_thumb_lag, HacConfig, Kernel, LagRule};
use crate::edge::{edge_ratio, LossPanel};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::loss::ScoringRule;

const DM_STREAM_OFFSET: u64 = 1 << 32;

/// Marginal law of each simulated loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossLaw {
    /// `|Z|`, `Z` standard normal.
    GaussianAbs,
    /// Unit-rate exponential.
    Exponential,
    /// `|T|` with `T` Student-t.
    StudentTAbs { df: f64 },
}

impl LossLaw {
    fn draw<R: Rng + ?Sized>(&self, t_dist: Option<&StudentT<f64>>, rng: &mut R) -> f64 {
        match self {
            LossLaw::GaussianAbs => {
                let z: f64 = StandardNormal.sample(rng);
                z.abs()
            }
            LossLaw::Exponential => Exp1.sample(rng),
            LossLaw::StudentTAbs { .. } => t_dist
                .expect("student-t distribution prepared")
                .sample(rng)
                .abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub pool_size: usize,
    pub periods: usize,
    pub replications: usize,
    pub loss_law: LossLaw,
    /// AR(1) coefficient of the simulated loss differential (DM simulation).
    pub ar1_coefficient: f64,
    /// Mean of the simulated loss differential (DM simulation).
    pub drift: f64,
    /// Subtracted from model 0's losses to plant a dominant model.
    pub dominant_shift: f64,
    pub seed: u64,
    /// Acceptance band for the mean null edge ratio.
    pub band: [f64; 2],
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            pool_size: 10,
            periods: 10_000,
            replications: 200,
            loss_law: LossLaw::Exponential,
            ar1_coefficient: 0.5,
            drift: 0.05,
            dominant_shift: 0.0,
            seed: 20_240_601,
            band: [0.8, 1.2],
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size < 2 {
            return Err(Error::Config(format!(
                "pool_size must be at least 2, got {}",
                self.pool_size
            )));
        }
        if self.periods < 2 {
            return Err(Error::Config(format!(
                "periods must be at least 2, got {}",
                self.periods
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        if self.ar1_coefficient.is_nan() || self.ar1_coefficient.abs() >= 1.0 {
            return Err(Error::Config(format!(
                "ar1_coefficient must lie in (-1, 1), got {}",
                self.ar1_coefficient
            )));
        }
        if let LossLaw::StudentTAbs { df } = self.loss_law {
            if df.is_nan() || df <= 2.0 {
                return Err(Error::Config(format!(
                    "student-t df must exceed 2, got {df}"
                )));
            }
        }
        if !self.drift.is_finite() || !self.dominant_shift.is_finite() {
            return Err(Error::Config(
                "drift and dominant_shift must be finite".into(),
            ));
        }
        if self.band.iter().any(|b| b.is_nan()) || self.band[0] >= self.band[1] {
            return Err(Error::Config(format!(
                "band [{}, {}] is empty",
                self.band[0], self.band[1]
            )));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullEdgeResult {
    /// Average over replications of model 0's edge ratio.
    pub mean_edge: ExtReal,
    pub per_replication: Vec<ExtReal>,
    /// Fraction of all simulated periods in which each model was the strict minimum.
    pub win_frequency: Vec<f64>,
    pub band: [f64; 2],
    pub within_band: bool,
}

/// Draws `pool_size` exchangeable loss columns per replication and records
/// the edge ratio of model 0.
pub fn simulate_null_edge(cfg: &SimConfig) -> Result<NullEdgeResult> {
    cfg.validate()?;
    let t_dist = match cfg.loss_law {
        LossLaw::StudentTAbs { df } => {
            Some(StudentT::new(df).map_err(|e| Error::Config(e.to_string()))?)
        }
        _ => None,
    };
    let ids: Vec<String> = (0..cfg.pool_size).map(|j| format!("m{j}")).collect();

    let reps: Vec<(ExtReal, Vec<u64>)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = cfg.rng(rep as u64);
            let mut columns = vec![Vec::with_capacity(cfg.periods); cfg.pool_size];
            for _ in 0..cfg.periods {
                for col in columns.iter_mut() {
                    col.push(cfg.loss_law.draw(t_dist.as_ref(), &mut rng));
                }
            }
            if cfg.dominant_shift != 0.0 {
                columns[0].iter_mut().for_each(|v| *v -= cfg.dominant_shift);
            }
            let wins = strict_wins(&columns);
            let panel = LossPanel::new(ids.clone(), ScoringRule::External, columns, None)?;
            Ok((edge_ratio(&panel, 0)?, wins))
        })
        .collect::<Result<_>>()?;

    let total_periods = (cfg.periods * cfg.replications) as f64;
    let mut win_counts = vec![0u64; cfg.pool_size];
    for (_, wins) in &reps {
        for (acc, w) in win_counts.iter_mut().zip(wins) {
            *acc += w;
        }
    }
    let per_replication: Vec<ExtReal> = reps.into_iter().map(|(e, _)| e).collect();
    let mean_edge = mean_ext(&per_replication);
    let within_band = mean_edge
        .finite()
        .is_some_and(|m| m >= cfg.band[0] && m <= cfg.band[1]);
    Ok(NullEdgeResult {
        mean_edge,
        per_replication,
        win_frequency: win_counts
            .into_iter()
            .map(|c| c as f64 / total_periods)
            .collect(),
        band: cfg.band,
        within_band,
    })
}

/// Per-model count of periods with a unique minimum loss.
fn strict_wins(columns: &[Vec<f64>]) -> Vec<u64> {
    let mut wins = vec![0u64; columns.len()];
    for t in 0..columns[0].len() {
        let mut best = 0;
        let mut tied = false;
        for j in 1..columns.len() {
            let v = columns[j][t];
            if v < columns[best][t] {
                best = j;
                tied = false;
            } else if v == columns[best][t] {
                tied = true;
            }
        }
        if !tied {
            wins[best] += 1;
        }
    }
    wins
}

/// Mean of the defined values; `±inf` if any are infinite.
fn mean_ext(xs: &[ExtReal]) -> ExtReal {
    let mut sum = 0.0;
    let mut n = 0usize;
    for x in xs {
        match x {
            ExtReal::Undefined => {}
            other => {
                sum += other.to_f64();
                n += 1;
            }
        }
    }
    if n == 0 {
        ExtReal::Undefined
    } else {
        ExtReal::from_f64(sum / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmPenaltyResult {
    pub dm_k0: Vec<ExtReal>,
    pub dm_bartlett: Vec<ExtReal>,
    pub bartlett_lag: usize,
    pub mean_dm_k0: ExtReal,
    pub mean_dm_bartlett: ExtReal,
    pub mean_abs_dm_k0: ExtReal,
    pub mean_abs_dm_bartlett: ExtReal,
}

/// Simulates `r_t = drift + u_t`, `u_t = phi * u_{t-1} + e_t` with standard
/// normal `e_t` and a stationary start, and records the DM statistic with no
/// correction and with a Bartlett kernel at the rule-of-thumb lag.
pub fn simulate_dm_penalty(cfg: &SimConfig) -> Result<DmPenaltyResult> {
    cfg.validate()?;
    let phi = cfg.ar1_coefficient;
    let lag = rule_of_thumb_lag(cfg.periods);
    let bartlett = HacConfig::new(Kernel::Bartlett, LagRule::Fixed(lag));
    let plain = HacConfig::no_correction();

    let pairs: Vec<(ExtReal, ExtReal)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = cfg.rng(DM_STREAM_OFFSET + rep as u64);
            let mut xs = Vec::with_capacity(cfg.periods);
            let e0: f64 = StandardNormal.sample(&mut rng);
            let mut u = e0 / (1.0 - phi * phi).sqrt();
            xs.push(cfg.drift + u);
            for _ in 1..cfg.periods {
                let e: f64 = StandardNormal.sample(&mut rng);
                u = phi * u + e;
                xs.push(cfg.drift + u);
            }
            Ok((
                dm_of(&xs, &plain)?.statistic,
                dm_of(&xs, &bartlett)?.statistic,
            ))
        })
        .collect::<Result<_>>()?;

    let (dm_k0, dm_bartlett): (Vec<ExtReal>, Vec<ExtReal>) = pairs.into_iter().unzip();
    let abs = |v: &[ExtReal]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
    Ok(DmPenaltyResult {
        mean_dm_k0: mean_ext(&dm_k0),
        mean_dm_bartlett: mean_ext(&dm_bartlett),
        mean_abs_dm_k0: mean_ext(&abs(&dm_k0)),
        mean_abs_dm_bartlett: mean_ext(&abs(&dm_bartlett)),
        dm_k0,
        dm_bartlett,
        bartlett_lag: lag,
    })
}
