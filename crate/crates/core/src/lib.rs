//! Risk-adjusted forecast evaluation.
//!
//! Forecast loss differentials against a benchmark are treated as a return
//! series and summarized with finance-style ratios (Sharpe, Sortino, Omega,
//! maximum drawdown), the Diebold-Mariano statistic with a HAC long-run
//! variance, the moving-frontier Edge Ratio, and cross-sectional meta indices.
//!
//! All losses are oriented lower-is-better. A positive return means the
//! evaluated model beat the benchmark in that period.

pub mod dm;
pub mod edge;
pub mod error;
pub mod ext;
pub mod io;
pub mod loss;
pub mod meta;
pub mod report;
pub mod risk;
pub mod sim;

pub use dm::{
    autocorr1, autocovariance, dm_statistic, long_run_variance, DmStatistic, HacConfig, Kernel,
    LagRule, LongRunVariance,
};
pub use edge::{edge_ratio, edge_series, frontier, pool_hash, EdgeSeries, LossPanel};
pub use error::{Error, Result};
pub use ext::ExtReal;
pub use loss::{compute_losses, mean_return, return_series, LossSeries, ReturnSeries, ScoringRule};
pub use meta::{
    meta_edge, meta_loss_panel, meta_metrics, meta_returns, relative_ratio, CellKey, EdgePool,
    MetaCell, MetaGrid, MetaMetrics, MetaReturns, Normalization,
};
pub use report::{
    Direction, EvaluationReport, Layout, MetaReport, MetricRow, Panel, PlotSeries, Report,
    SimulationReport,
};
pub use risk::{
    drawdown, omega_ratio, risk_report, sharpe_ratio, sortino_ratio, Drawdown, RiskReport,
    VarianceConvention,
};
pub use sim::{
    simulate_dm_penalty, simulate_null_edge, DmPenaltyResult, LossLaw, NullEdgeResult, SimConfig,
};
