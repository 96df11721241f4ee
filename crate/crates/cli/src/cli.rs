use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use forecast_risk::io::{render_report, write_plot_series, OutputFormat};
use forecast_risk::{Error, Normalization, Result, ScoringRule, SimConfig};

use crate::commands::{
    cmd_evaluate, cmd_meta, cmd_plotdata, cmd_simulate, parse_meta_pool, EvaluationRequest,
    MetaRequest,
};

#[derive(Parser, Debug)]
#[command(name = "fcrisk", version)]
#[command(about = "Risk-adjusted evaluation of forecast loss differentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Panels A/B (risk-adjusted) and C (accuracy) for a loss or forecast table
    Evaluate,
    /// Cross-sectional metrics over a (target, horizon, design) grid
    Meta,
    /// Cumulative gain and drawdown series per model, one CSV each
    Plotdata,
    /// Null Edge Ratio calibration and DM autocorrelation penalty
    Simulate,
}

/// Every flag may also be given in the `--config` file; flags win.
#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// Data file (loss/forecast table or long-format meta grid)
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Dataset manifest (TOML)
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// Benchmark model; overrides the manifest
    #[arg(long, global = true)]
    pub benchmark: Option<String>,

    /// Comma-separated models to report (default: all but the benchmark)
    #[arg(long, global = true, value_delimiter = ',')]
    pub models: Option<Vec<String>>,

    /// First period label of the evaluation window (inclusive)
    #[arg(long, global = true)]
    pub window_start: Option<String>,

    /// Last period label of the evaluation window (inclusive)
    #[arg(long, global = true)]
    pub window_end: Option<String>,

    /// bartlett or truncated_uniform
    #[arg(long, global = true)]
    pub hac_kernel: Option<String>,

    /// An integer, `rule-of-thumb`, or `horizon` (h - 1 from the manifest)
    #[arg(long, global = true)]
    pub hac_lag: Option<String>,

    /// Output file (plotdata: directory); stdout when omitted
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// json, csv or markdown (default: from the output extension)
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// Seed for simulate
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Options file (TOML); may hold a [simulation] table
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Simulation config (TOML); replaces the [simulation] table of --config
    #[arg(long, global = true)]
    pub sim_config: Option<PathBuf>,

    /// ratio_percent or raw_difference (meta)
    #[arg(long, global = true)]
    pub normalization: Option<String>,

    /// Comma-separated scoring rules for evaluate/plotdata
    #[arg(long, global = true, value_delimiter = ',')]
    pub loss_rules: Option<Vec<String>>,

    /// evaluate: all | selected; meta: competitors | all
    #[arg(long, global = true)]
    pub edge_pool: Option<String>,

    /// Skip best/second-best flags
    #[arg(long, global = true)]
    #[serde(skip)]
    pub no_highlight: bool,

    #[arg(skip)]
    #[serde(rename = "no-highlight")]
    pub no_highlight_config: Option<bool>,

    #[arg(skip)]
    pub simulation: Option<SimConfig>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn parse_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    toml::from_str(&read_text(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

impl Flags {
    /// Fills unset flags from the `--config` file.
    pub fn resolve(self) -> Result<Flags> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file: Flags = parse_toml(&path)?;
        Ok(Flags {
            input: self.input.or(file.input),
            manifest: self.manifest.or(file.manifest),
            benchmark: self.benchmark.or(file.benchmark),
            models: self.models.or(file.models),
            window_start: self.window_start.or(file.window_start),
            window_end: self.window_end.or(file.window_end),
            hac_kernel: self.hac_kernel.or(file.hac_kernel),
            hac_lag: self.hac_lag.or(file.hac_lag),
            output: self.output.or(file.output),
            format: self.format.or(file.format),
            seed: self.seed.or(file.seed),
            config: self.config,
            sim_config: self.sim_config.or(file.sim_config),
            normalization: self.normalization.or(file.normalization),
            loss_rules: self.loss_rules.or(file.loss_rules),
            edge_pool: self.edge_pool.or(file.edge_pool),
            no_highlight: self.no_highlight || file.no_highlight_config.unwrap_or(false),
            no_highlight_config: None,
            simulation: file.simulation,
        })
    }

    fn required(&self, value: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
        value
            .clone()
            .ok_or_else(|| Error::Config(format!("--{name} is required")))
    }

    pub fn evaluation_request(&self) -> Result<EvaluationRequest> {
        let mut req = EvaluationRequest::new(
            self.required(&self.input, "input")?,
            self.required(&self.manifest, "manifest")?,
        );
        req.benchmark = self.benchmark.clone();
        req.models = self.models.clone();
        req.hac_kernel = self.hac_kernel.as_deref().map(str::parse).transpose()?;
        req.hac_lag = self.hac_lag.as_deref().map(str::parse).transpose()?;
        req.loss_rules = self
            .loss_rules
            .as_ref()
            .map(|v| v.iter().map(|s| s.parse::<ScoringRule>()).collect())
            .transpose()?;
        req.window_start = self.window_start.clone();
        req.window_end = self.window_end.clone();
        if let Some(p) = &self.edge_pool {
            req.edge_pool = p.parse()?;
        }
        req.highlight = !self.no_highlight;
        Ok(req)
    }

    pub fn meta_request(&self) -> Result<MetaRequest> {
        let mut req = MetaRequest::new(
            self.required(&self.input, "input")?,
            self.required(&self.manifest, "manifest")?,
        );
        req.benchmark = self.benchmark.clone();
        req.models = self.models.clone();
        if let Some(n) = &self.normalization {
            req.normalization = n.parse::<Normalization>()?;
        }
        if let Some(p) = &self.edge_pool {
            req.edge_pool = parse_meta_pool(p)?;
        }
        req.highlight = !self.no_highlight;
        Ok(req)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let mut cfg = match &self.sim_config {
            Some(p) => parse_toml(p)?,
            None => self.simulation.clone().unwrap_or_default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn output_format(&self) -> Result<OutputFormat> {
        match (&self.format, &self.output) {
            (Some(f), _) => f.parse(),
            (None, Some(p)) => Ok(OutputFormat::from_path(p)),
            (None, None) => Ok(OutputFormat::Markdown),
        }
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })
        }
    }
}

/// Executes one subcommand with already-resolved flags.
pub fn execute(command: Command, flags: &Flags) -> Result<()> {
    let output = flags.output.as_deref();
    match command {
        Command::Evaluate => {
            let req = flags.evaluation_request()?;
            let report = cmd_evaluate(&req)?;
            emit(&render_report(&report, flags.output_format()?)?, output)
        }
        Command::Meta => {
            let report = cmd_meta(&flags.meta_request()?)?;
            emit(&render_report(&report, flags.output_format()?)?, output)
        }
        Command::Plotdata => {
            let dir = flags
                .output
                .clone()
                .ok_or_else(|| Error::Config("plotdata needs --output <directory>".into()))?;
            let series = cmd_plotdata(&flags.evaluation_request()?)?;
            for p in write_plot_series(&dir, &series)? {
                log::info!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Simulate => {
            let report = cmd_simulate(&flags.sim_config()?)?;
            emit(&render_report(&report, flags.output_format()?)?, output)
        }
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = cli.flags.resolve().and_then(|f| execute(cli.command, &f));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
