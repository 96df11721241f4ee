use std::path::PathBuf;
use std::str::FromStr;

use forecast_risk::io::{load_dataset, load_meta_grid, Dataset, DatasetManifest};
use forecast_risk::{
    autocorr1, dm_statistic, drawdown, edge_ratio, meta_edge, meta_metrics, meta_returns,
    pool_hash, return_series, risk_report, simulate_dm_penalty, simulate_null_edge, Direction,
    EdgePool, Error, EvaluationReport, ExtReal, HacConfig, Kernel, LagRule, Layout, LossPanel,
    MetaReport, MetricRow, Normalization, Panel, PlotSeries, Report, Result, ReturnSeries,
    ScoringRule, SimConfig, SimulationReport,
};

/// Truncation lag requested for the DM statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagChoice {
    Fixed(usize),
    RuleOfThumb,
    /// `h - 1` from the manifest horizon.
    Horizon,
}

impl FromStr for LagChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rule-of-thumb" | "rule_of_thumb" => Ok(LagChoice::RuleOfThumb),
            "horizon" => Ok(LagChoice::Horizon),
            n => n.parse().map(LagChoice::Fixed).map_err(|_| {
                Error::Config(format!(
                    "lag must be an integer, `rule-of-thumb` or `horizon`, got `{n}`"
                ))
            }),
        }
    }
}

/// Which models the Edge rows of `evaluate` compete against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalPool {
    /// Every model in the input file, benchmark included.
    #[default]
    All,
    /// The evaluated models plus the benchmark.
    Selected,
}

impl FromStr for EvalPool {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(EvalPool::All),
            "selected" => Ok(EvalPool::Selected),
            other => Err(Error::Config(format!(
                "unknown edge pool `{other}` for evaluate (all, selected)"
            ))),
        }
    }
}

pub fn parse_meta_pool(s: &str) -> Result<EdgePool> {
    match s {
        "competitors" => Ok(EdgePool::Competitors),
        "all" => Ok(EdgePool::AllModels),
        other => Err(Error::Config(format!(
            "unknown edge pool `{other}` for meta (competitors, all)"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationRequest {
    pub input: PathBuf,
    pub manifest: PathBuf,
    /// Overrides the manifest's benchmark.
    pub benchmark: Option<String>,
    /// `None` means every model except the benchmark.
    pub models: Option<Vec<String>>,
    pub hac_kernel: Option<Kernel>,
    /// `None`: `h - 1` when the manifest has a horizon, else the rule of thumb.
    pub hac_lag: Option<LagChoice>,
    pub loss_rules: Option<Vec<ScoringRule>>,
    pub window_start: Option<String>,
    pub window_end: Option<String>,
    pub edge_pool: EvalPool,
    pub highlight: bool,
}

impl EvaluationRequest {
    pub fn new(input: impl Into<PathBuf>, manifest: impl Into<PathBuf>) -> Self {
        EvaluationRequest {
            input: input.into(),
            manifest: manifest.into(),
            benchmark: None,
            models: None,
            hac_kernel: None,
            hac_lag: None,
            loss_rules: None,
            window_start: None,
            window_end: None,
            edge_pool: EvalPool::All,
            highlight: true,
        }
    }
}

struct Prepared {
    manifest: DatasetManifest,
    dataset: Dataset,
    benchmark: String,
    models: Vec<String>,
    rules: Vec<ScoringRule>,
    window: Option<(String, String)>,
}

fn label_index(labels: &[String], label: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::Validation(format!("window label `{label}` not in the panel")))
}

fn prepare(req: &EvaluationRequest) -> Result<Prepared> {
    let mut manifest = DatasetManifest::load(&req.manifest)?;
    if let Some(b) = &req.benchmark {
        manifest.benchmark_id = b.clone();
    }
    let mut dataset = load_dataset(&req.input, &manifest)?;

    let mut window = None;
    if req.window_start.is_some() || req.window_end.is_some() {
        let labels = dataset.period_labels();
        let start = match &req.window_start {
            Some(l) => label_index(&labels, l)?,
            None => 0,
        };
        let end = match &req.window_end {
            Some(l) => label_index(&labels, l)?,
            None => labels.len() - 1,
        };
        if start > end {
            return Err(Error::Validation(format!(
                "window start `{}` comes after window end `{}`",
                labels[start], labels[end]
            )));
        }
        dataset = dataset.slice(start, end + 1)?;
        window = Some((labels[start].clone(), labels[end].clone()));
    }

    let benchmark = manifest.benchmark_id.clone();
    let all = dataset.model_ids().to_vec();
    let mut models = match &req.models {
        Some(list) => {
            for m in list {
                if !all.contains(m) {
                    return Err(Error::UnknownModel(m.clone()));
                }
            }
            list.clone()
        }
        None => all.iter().filter(|m| **m != benchmark).cloned().collect(),
    };
    models.sort();
    models.dedup();
    if models.is_empty() {
        return Err(Error::Validation("no models to evaluate".into()));
    }

    let available = dataset.available_rules();
    let rules = match &req.loss_rules {
        Some(r) => {
            for rule in r {
                if !available.contains(rule) {
                    return Err(Error::Incompatible(format!(
                        "{rule} losses cannot be derived from this input"
                    )));
                }
            }
            r.clone()
        }
        None => available,
    };
    if rules.is_empty() {
        return Err(Error::Config("no loss rules selected".into()));
    }
    Ok(Prepared {
        manifest,
        dataset,
        benchmark,
        models,
        rules,
        window,
    })
}

/// Gains of `model` over the benchmark; the benchmark against itself is the
/// zero series.
fn returns_of(panel: &LossPanel, benchmark: &str, model: &str) -> Result<ReturnSeries> {
    let b = panel.index_of(benchmark)?;
    if model == benchmark {
        return ReturnSeries::from_values(vec![0.0; panel.periods()]);
    }
    let m = panel.index_of(model)?;
    return_series(&panel.loss_series(b)?, &panel.loss_series(m)?)
}

fn resolve_hac(req: &EvaluationRequest, horizon: Option<usize>) -> Result<HacConfig> {
    let kernel = req.hac_kernel.unwrap_or_default();
    let lag_rule = match (req.hac_lag, horizon) {
        (Some(LagChoice::Fixed(k)), _) => LagRule::Fixed(k),
        (Some(LagChoice::RuleOfThumb), _) | (None, None) => LagRule::RuleOfThumb,
        (Some(LagChoice::Horizon), Some(h)) | (None, Some(h)) => LagRule::HorizonMinusOne(h),
        (Some(LagChoice::Horizon), None) => {
            return Err(Error::Config(
                "lag `horizon` needs a horizon in the manifest".into(),
            ))
        }
    };
    Ok(HacConfig::new(kernel, lag_rule))
}

fn panel_letter(i: usize) -> char {
    (b'A' + (i % 26) as u8) as char
}

fn rule_title(rule: ScoringRule) -> &'static str {
    match rule {
        ScoringRule::SquaredError => "squared error",
        ScoringRule::AbsoluteError => "absolute error",
        ScoringRule::External => "external loss",
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Risk-adjusted metrics per model (Panels A/B) followed by classical
/// accuracy (Panel C).
pub fn cmd_evaluate(req: &EvaluationRequest) -> Result<Report> {
    let prep = prepare(req)?;
    let Prepared {
        manifest,
        dataset,
        benchmark,
        models,
        rules,
        window,
    } = prep;

    let pool: Vec<String> = match req.edge_pool {
        EvalPool::All => dataset.model_ids().to_vec(),
        EvalPool::Selected => {
            let mut p = models.clone();
            if !p.contains(&benchmark) {
                p.push(benchmark.clone());
            }
            p
        }
    };
    let mut sorted_pool = pool.clone();
    sorted_pool.sort();

    let hac = resolve_hac(req, manifest.horizon)?;
    let periods = dataset.periods();
    let lag = hac.max_lag(periods)?;
    let hac_label = format!("{} kernel, lag {lag}", hac.kernel);

    let mut panels = Vec::new();
    let mut notes = Vec::new();
    let mut first_returns: Option<(ScoringRule, Vec<ReturnSeries>)> = None;
    for (i, &rule) in rules.iter().enumerate() {
        let loss = dataset.loss_panel(rule)?.with_benchmark(&benchmark)?;
        let pool_panel = loss.select(&sorted_pool)?;
        let mut returns = Vec::with_capacity(models.len());
        let mut cols: [Vec<ExtReal>; 6] = Default::default();
        for m in &models {
            let r = returns_of(&loss, &benchmark, m)?;
            let rep = risk_report(&r)?;
            let edge = match pool_panel.index_of(m) {
                Ok(j) => edge_ratio(&pool_panel, j)?,
                Err(_) => ExtReal::Undefined,
            };
            for (col, v) in cols.iter_mut().zip([
                ExtReal::Finite(rep.mean_return),
                rep.sharpe,
                rep.sortino,
                rep.omega,
                ExtReal::Finite(-rep.max_drawdown),
                edge,
            ]) {
                col.push(v);
            }
            returns.push(r);
        }
        let mut panel = Panel::new(
            format!("Panel {}: {}", panel_letter(i), rule_title(rule)),
            models.clone(),
        );
        for (name, values) in ["Return", "Sharpe", "Sortino", "Omega", "MaxDD", "Edge"]
            .into_iter()
            .zip(cols)
        {
            panel
                .rows
                .push(MetricRow::new(name, Direction::HigherIsBetter, values));
        }
        panel.set_highlight(req.highlight);
        panels.push(panel);
        if first_returns.is_none() {
            first_returns = Some((rule, returns));
        }
    }

    let mut acc = Panel::new(
        format!("Panel {}: forecast accuracy", panel_letter(rules.len())),
        models.clone(),
    );
    let ratio_row = |name: &str, rule: ScoringRule, root: bool| -> Result<MetricRow> {
        let loss = dataset.loss_panel(rule)?;
        let agg = |i: usize| {
            let m = mean(loss.column(i));
            if root {
                m.sqrt()
            } else {
                m
            }
        };
        let b = agg(loss.index_of(&benchmark)?);
        let values = models
            .iter()
            .map(|m| Ok(ExtReal::ratio(agg(loss.index_of(m)?), b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MetricRow::new(name, Direction::LowerIsBetter, values))
    };
    let available = dataset.available_rules();
    if available.contains(&ScoringRule::SquaredError) {
        acc.rows
            .push(ratio_row("RMSE ratio", ScoringRule::SquaredError, true)?);
    }
    if available.contains(&ScoringRule::AbsoluteError) {
        acc.rows
            .push(ratio_row("MAE ratio", ScoringRule::AbsoluteError, false)?);
    }
    let rho = match &dataset {
        Dataset::Forecasts(f) => {
            let v = models
                .iter()
                .map(|m| autocorr1(&f.errors(m)?))
                .collect::<Result<Vec<_>>>()?;
            MetricRow::new("rho(1)", Direction::SmallestAbs, v)
        }
        Dataset::Losses(p) => {
            let v = models
                .iter()
                .map(|m| autocorr1(p.column(p.index_of(m)?)))
                .collect::<Result<Vec<_>>>()?;
            MetricRow::new("rho(1) of losses", Direction::SmallestAbs, v)
        }
    };
    acc.rows.push(rho);
    if let Some((rule, returns)) = &first_returns {
        let mut v = Vec::with_capacity(returns.len());
        for (m, r) in models.iter().zip(returns) {
            let dm = dm_statistic(r, &hac)?;
            if dm.lrv.floored {
                notes.push(format!(
                    "long-run variance floored for `{m}` ({})",
                    rule_title(*rule)
                ));
            }
            v.push(dm.statistic);
        }
        acc.rows.push(MetricRow::new(
            format!("DM ({})", rule_title(*rule)),
            Direction::HigherIsBetter,
            v,
        ));
    }
    acc.set_highlight(req.highlight);
    panels.push(acc);

    Ok(Report::Evaluation(EvaluationReport {
        benchmark,
        models,
        periods,
        window,
        hac: hac_label,
        pool_hash: pool_hash(&sorted_pool),
        pool: sorted_pool,
        panels,
        notes,
    }))
}

#[derive(Debug, Clone)]
pub struct MetaRequest {
    pub input: PathBuf,
    pub manifest: PathBuf,
    pub benchmark: Option<String>,
    pub models: Option<Vec<String>>,
    pub normalization: Normalization,
    pub edge_pool: EdgePool,
    pub highlight: bool,
}

impl MetaRequest {
    pub fn new(input: impl Into<PathBuf>, manifest: impl Into<PathBuf>) -> Self {
        MetaRequest {
            input: input.into(),
            manifest: manifest.into(),
            benchmark: None,
            models: None,
            normalization: Normalization::default(),
            edge_pool: EdgePool::default(),
            highlight: true,
        }
    }
}

/// Cross-sectional Return, Vol, Sharpe, Sortino, Omega and Edge per model,
/// one panel per metric in the grid.
pub fn cmd_meta(req: &MetaRequest) -> Result<Report> {
    let mut manifest = DatasetManifest::load(&req.manifest)?;
    if let Some(b) = &req.benchmark {
        manifest.benchmark_id = b.clone();
    }
    let grid = load_meta_grid(&req.input, &manifest)?;
    let benchmark = grid.benchmark().to_string();

    let mut panels = Vec::new();
    let mut notes = Vec::new();
    let mut pool_ids: Vec<String> = Vec::new();
    let metrics = grid.metrics();
    for metric in &metrics {
        let sub = grid.for_metric(metric);
        let mut models: Vec<String> = match &req.models {
            Some(list) => {
                let present = sub.models();
                for m in list {
                    if !present.contains(m) {
                        return Err(Error::UnknownModel(m.clone()));
                    }
                }
                list.clone()
            }
            None => sub
                .models()
                .into_iter()
                .filter(|m| *m != benchmark)
                .collect(),
        };
        models.sort();
        models.dedup();
        if models.is_empty() {
            return Err(Error::Validation(format!(
                "metric `{metric}` has no model besides the benchmark"
            )));
        }
        for m in sub.models() {
            if (req.edge_pool == EdgePool::AllModels || m != benchmark) && !pool_ids.contains(&m) {
                pool_ids.push(m);
            }
        }

        let mut cols: [Vec<ExtReal>; 6] = Default::default();
        let mut edge_note = None;
        for m in &models {
            let mm = meta_metrics(&meta_returns(&sub, m, req.normalization)?)?;
            let edge = match meta_edge(&sub, m, req.edge_pool) {
                Ok(e) => e,
                Err(e @ Error::PoolTooSmall { .. }) => {
                    edge_note = Some(format!("Edge ({metric}): {e}"));
                    ExtReal::Undefined
                }
                Err(e) => return Err(e),
            };
            for (col, v) in cols.iter_mut().zip([
                ExtReal::Finite(mm.mean),
                ExtReal::Finite(mm.vol),
                mm.sharpe,
                mm.sortino,
                mm.omega,
                edge,
            ]) {
                col.push(v);
            }
        }
        notes.extend(edge_note);

        let title = if metrics.len() == 1 && metric == "value" {
            "Meta".to_string()
        } else {
            format!("Meta: {metric}")
        };
        let mut panel = Panel::new(title, models);
        panel.layout = Layout::ModelsAsRows;
        let directions = [
            Direction::HigherIsBetter,
            Direction::LowerIsBetter,
            Direction::HigherIsBetter,
            Direction::HigherIsBetter,
            Direction::HigherIsBetter,
            Direction::HigherIsBetter,
        ];
        for ((name, dir), values) in ["Return", "Vol", "Sharpe", "Sortino", "Omega", "Edge"]
            .into_iter()
            .zip(directions)
            .zip(cols)
        {
            panel.rows.push(MetricRow::new(name, dir, values));
        }
        panel.set_highlight(req.highlight);
        panels.push(panel);
    }
    pool_ids.sort();

    Ok(Report::Meta(MetaReport {
        benchmark,
        normalization: req.normalization.to_string(),
        pool_hash: pool_hash(&pool_ids),
        pool: pool_ids,
        panels,
        notes,
    }))
}

/// Cumulative gain and drawdown paths per model under the first selected
/// loss rule.
pub fn cmd_plotdata(req: &EvaluationRequest) -> Result<Vec<PlotSeries>> {
    let prep = prepare(req)?;
    let rule = prep.rules[0];
    let loss = prep
        .dataset
        .loss_panel(rule)?
        .with_benchmark(&prep.benchmark)?;
    let labels = loss
        .period_labels()
        .map(<[String]>::to_vec)
        .unwrap_or_else(|| (1..=loss.periods()).map(|t| t.to_string()).collect());
    prep.models
        .iter()
        .map(|m| {
            let dd = drawdown(&returns_of(&loss, &prep.benchmark, m)?);
            Ok(PlotSeries {
                model: m.clone(),
                periods: labels.clone(),
                cumulative_gain: dd.cumulative,
                drawdown: dd.path,
            })
        })
        .collect()
}

/// Runs the null Edge calibration and the DM penalty simulation.
pub fn cmd_simulate(cfg: &SimConfig) -> Result<Report> {
    let null_edge = simulate_null_edge(cfg)?;
    let dm_penalty = simulate_dm_penalty(cfg)?;
    let p = 1.0 / cfg.pool_size as f64;
    let n = (cfg.periods * cfg.replications) as f64;
    let tol = 3.0 * (p * (1.0 - p) / n).sqrt();
    let win_frequency_ok = null_edge.win_frequency.iter().all(|f| (f - p).abs() <= tol);
    let penalty_observed =
        dm_penalty.mean_abs_dm_bartlett.to_f64() < dm_penalty.mean_abs_dm_k0.to_f64();
    Ok(Report::Simulation(SimulationReport {
        config: cfg.clone(),
        null_edge,
        win_frequency_tolerance: tol,
        win_frequency_ok,
        dm_penalty,
        penalty_observed,
    }))
}
