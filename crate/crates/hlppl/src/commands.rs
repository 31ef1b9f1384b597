//! Implementations behind the CLI subcommands.
//!
//! Each command takes the effective [`RunConfig`], reads its inputs,
//! writes its artifacts under the configured output directory, and echoes
//! the config there so the run is reproducible from the directory alone.
//! All numeric output goes through the fixed 12-significant-digit
//! formatter, so re-running with identical inputs and seed produces
//! byte-identical files.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::backtest::{
    buy_and_hold_benchmark, multi_horizon_backtest, run_backtest, run_backtest_with_reversal,
    BacktestReport, MultiHorizonReport,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::forecast::{
    baseline_forecast_set, load_forecasts, write_forecasts, ForecastSet, DEFAULT_FORECAST_BOUND,
};
use crate::ingest::{
    align_daily, load_features, load_news, load_prices, write_features, write_news, write_prices,
    PriceSeries,
};
use crate::lppl::{fit_lppl, lppl_eval, LpplFit, LpplParams};
use crate::residuals::{compute_residuals, normalize_residuals, write_residuals};
use crate::score::{
    compute_score_series, label_episodes, load_scores, write_episodes, write_plot_data,
    write_scores,
};
use crate::serialize::{fmt_float, round_float};
use crate::signals::{compute_signals, write_signals, SignalSeries};
use crate::synth::{generate, SynthSpec};

/// On-disk form of a fitted window:
/// `{A, B, C, t_c, m, omega, phi, sse, rmse, window_start, window_end}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub t_c: f64,
    pub m: f64,
    pub omega: f64,
    pub phi: f64,
    pub sse: f64,
    pub rmse: f64,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
}

impl FitArtifact {
    pub fn from_fit(fit: &LpplFit) -> FitArtifact {
        FitArtifact {
            a: round_float(fit.params.a),
            b: round_float(fit.params.b),
            c: round_float(fit.params.c),
            t_c: round_float(fit.params.t_c),
            m: round_float(fit.params.m),
            omega: round_float(fit.params.omega),
            phi: round_float(fit.params.phi),
            sse: round_float(fit.sse),
            rmse: round_float(fit.rmse),
            window_start: fit.window.0,
            window_end: fit.window.1,
        }
    }

    /// Rebuild the in-memory fit (validated); `restarts_used` is not part
    /// of the artifact and comes back as 0.
    pub fn to_fit(&self) -> Result<LpplFit> {
        let params = LpplParams {
            a: self.a,
            b: self.b,
            c: self.c,
            t_c: self.t_c,
            m: self.m,
            omega: self.omega,
            phi: self.phi,
        };
        params.validate()?;
        Ok(LpplFit {
            params,
            sse: self.sse,
            rmse: self.rmse,
            window: (self.window_start, self.window_end),
            restarts_used: 0,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<FitArtifact> {
        read_json(path)
    }
}

/// Trade record as serialized in report JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeArtifact {
    pub direction: String,
    pub entry_date: NaiveDate,
    pub entry_price: f64,
    pub exit_date: NaiveDate,
    pub exit_price: f64,
    pub exit_reason: String,
    pub return_net: f64,
}

/// Metric record as serialized in report JSON; an undefined Sharpe ratio
/// is `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsArtifact {
    pub cumulative_return: f64,
    pub annualized_return: f64,
    pub sharpe_ratio: Option<f64>,
    pub max_drawdown: f64,
    pub win_rate: f64,
    pub trade_count: usize,
}

/// One simulated run on disk: metrics plus the trade list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub symbol: String,
    /// "strategy" or "benchmark".
    pub kind: String,
    /// Forecast horizon driving the run; absent for score-driven runs
    /// and the benchmark.
    pub horizon: Option<u8>,
    pub metrics: MetricsArtifact,
    pub trades: Vec<TradeArtifact>,
}

impl ReportArtifact {
    pub fn from_report(
        report: &BacktestReport,
        symbol: &str,
        kind: &str,
        horizon: Option<u8>,
    ) -> ReportArtifact {
        ReportArtifact {
            symbol: symbol.to_string(),
            kind: kind.to_string(),
            horizon,
            metrics: MetricsArtifact {
                cumulative_return: round_float(report.metrics.cumulative_return),
                annualized_return: round_float(report.metrics.annualized_return),
                sharpe_ratio: report.metrics.sharpe_ratio.map(round_float),
                max_drawdown: round_float(report.metrics.max_drawdown),
                win_rate: round_float(report.metrics.win_rate),
                trade_count: report.metrics.trade_count,
            },
            trades: report
                .trades
                .iter()
                .map(|t| TradeArtifact {
                    direction: t.direction.to_string(),
                    entry_date: t.entry_date,
                    entry_price: round_float(t.entry_price),
                    exit_date: t.exit_date,
                    exit_price: round_float(t.exit_price),
                    exit_reason: t.exit_reason.to_string(),
                    return_net: round_float(t.return_net),
                })
                .collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<ReportArtifact> {
        read_json(path)
    }
}

/// Ground truth of a synthetic fixture, written next to its data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthArtifact {
    pub symbol: String,
    pub n: usize,
    pub start_date: NaiveDate,
    pub rng_seed: u64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub t_c: f64,
    pub m: f64,
    pub omega: f64,
    pub phi: f64,
    pub alpha: f64,
    pub noise_std: f64,
    pub with_news: bool,
}

/// Per-horizon outcome summary written by multi-horizon backtests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSummary {
    pub horizon: u8,
    pub cumulative_return: f64,
    pub annualized_return: f64,
    pub trade_count: usize,
}

/// Ex-post horizon ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestHorizonArtifact {
    pub best_horizon: u8,
    pub horizons: Vec<HorizonSummary>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Contract(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

/// Write a `date,equity` CSV.
pub fn write_equity(path: &Path, dates: &[NaiveDate], equity: &[f64]) -> Result<()> {
    let mut out = String::from("date,equity\n");
    for (d, e) in dates.iter().zip(equity) {
        out.push_str(&format!("{d},{}\n", fmt_float(*e)));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn ensure_output_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn load_windowed_prices(config: &RunConfig) -> Result<PriceSeries> {
    let path = config.prices.as_ref().ok_or_else(|| {
        Error::Config("no prices file configured (set prices in the config or pass --prices)".into())
    })?;
    let prices = load_prices(path, &config.symbol)?;
    prices.window(config.window_start, config.window_end)
}

/// Model price path over the fitted window, in price (not log) space.
fn model_price_path(fit: &LpplFit, n: usize) -> Result<Vec<f64>> {
    (0..n)
        .map(|t| lppl_eval(&fit.params, t as f64).map(f64::exp))
        .collect()
}

/// Fit the price window and write `fit.json` plus `residuals.csv`.
pub fn cmd_fit(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let out_dir = ensure_output_dir(config)?;
    let prices = load_windowed_prices(config)?;
    let fit = fit_lppl(&prices, &config.fit_config()?)?;
    let residuals = compute_residuals(&prices, &fit)?;
    let residuals = normalize_residuals(&residuals, config.score.normalization)?;
    FitArtifact::from_fit(&fit).save(&out_dir.join("fit.json"))?;
    write_residuals(&out_dir.join("residuals.csv"), &residuals)?;
    config.echo(&out_dir)?;
    println!(
        "fit {}: {} days, t_c={} m={} omega={} rmse={}",
        config.symbol,
        prices.len(),
        fmt_float(fit.params.t_c),
        fmt_float(fit.params.m),
        fmt_float(fit.params.omega),
        fmt_float(fit.rmse),
    );
    Ok(())
}

/// Options specific to `score`.
#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    /// Fit in-process instead of loading `fit.json` from the output
    /// directory.
    pub fit_inline: bool,
}

/// Score the window and write scores, episodes, and plot data; signal
/// columns are included when news inputs are configured.
pub fn cmd_score(config: &RunConfig, options: &ScoreOptions) -> Result<()> {
    config.validate()?;
    let out_dir = ensure_output_dir(config)?;
    let prices = load_windowed_prices(config)?;
    let fit = if options.fit_inline {
        fit_lppl(&prices, &config.fit_config()?)?
    } else {
        FitArtifact::load(&out_dir.join("fit.json"))?.to_fit()?
    };
    let residuals = compute_residuals(&prices, &fit)?;
    let residuals = normalize_residuals(&residuals, config.score.normalization)?;

    let mut signals = match &config.news {
        Some(news_path) => {
            let news = load_news(news_path)?;
            let features = match &config.features {
                Some(path) => load_features(path)?,
                None => Vec::new(),
            };
            let aligned = align_daily(&prices, &news, &features)?;
            let signals = compute_signals(&aligned)?;
            write_signals(&out_dir.join("signals.csv"), &signals)?;
            signals
        }
        None => {
            eprintln!("warning: no news file configured; hype and sentiment terms are zero");
            SignalSeries::zeros(&config.symbol, &prices.dates)
        }
    };
    signals.sentiment = signals.sentiment_channel(config.score.sentiment_source);

    let scores = compute_score_series(&residuals, &signals, &config.score_params()?)?;
    let episodes = label_episodes(&scores, config.score.tau, config.score.d_min)?;
    write_scores(&out_dir.join("scores.csv"), &scores)?;
    write_episodes(&out_dir.join("episodes.csv"), &episodes)?;
    let model_price = model_price_path(&fit, prices.len())?;
    write_plot_data(
        &out_dir.join("plot_data.csv"),
        &prices,
        &model_price,
        &scores,
        &episodes,
    )?;
    write_residuals(&out_dir.join("residuals.csv"), &residuals)?;
    if options.fit_inline {
        FitArtifact::from_fit(&fit).save(&out_dir.join("fit.json"))?;
    }
    config.echo(&out_dir)?;
    println!(
        "score {}: {} days, {} episode(s), tau={} d_min={}",
        config.symbol,
        scores.len(),
        episodes.len(),
        fmt_float(config.score.tau),
        config.score.d_min,
    );
    Ok(())
}

/// Re-label episodes from an existing `scores.csv`.
pub fn cmd_label(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let out_dir = ensure_output_dir(config)?;
    let scores = load_scores(out_dir.join("scores.csv"))?;
    let episodes = label_episodes(&scores, config.score.tau, config.score.d_min)?;
    write_episodes(&out_dir.join("episodes.csv"), &episodes)?;
    config.echo(&out_dir)?;
    println!(
        "label {}: {} episode(s), tau={} d_min={}",
        config.symbol,
        episodes.len(),
        fmt_float(config.score.tau),
        config.score.d_min,
    );
    Ok(())
}

/// Options specific to `backtest`.
#[derive(Debug, Clone, Default)]
pub struct BacktestOptions {
    /// Run all five horizons and rank them.
    pub multi_horizon: bool,
    /// External forecasts CSV; the built-in AR(1)-decay baseline over
    /// `scores.csv` is used when absent.
    pub forecasts: Option<PathBuf>,
    /// Clamp baseline forecasts to [-1, 1] before thresholding.
    pub strict_range: bool,
}

fn load_or_build_forecasts(options: &BacktestOptions, out_dir: &Path) -> Result<ForecastSet> {
    match &options.forecasts {
        Some(path) => load_forecasts(path, DEFAULT_FORECAST_BOUND),
        None => {
            let scores = load_scores(out_dir.join("scores.csv"))?;
            let set = baseline_forecast_set(&scores, options.strict_range)?;
            write_forecasts(&out_dir.join("forecasts.csv"), &set)?;
            Ok(set)
        }
    }
}

/// Simulate the strategy next to its buy-and-hold benchmark.
///
/// Score-driven by default; a configured horizon (or an external
/// forecasts file) switches to forecast-driven execution with the
/// reversal-exit rule, and `multi_horizon` fans out across all five
/// horizons.
pub fn cmd_backtest(config: &RunConfig, options: &BacktestOptions) -> Result<()> {
    config.validate()?;
    let out_dir = ensure_output_dir(config)?;
    let prices = load_windowed_prices(config)?;
    let strategy = config.strategy_config();

    let benchmark = buy_and_hold_benchmark(&prices, &strategy)?;
    ReportArtifact::from_report(&benchmark, &config.symbol, "benchmark", None)
        .save(&out_dir.join("benchmark.json"))?;
    write_equity(
        &out_dir.join("benchmark_equity.csv"),
        &benchmark.dates,
        &benchmark.equity,
    )?;

    let forecast_driven =
        options.multi_horizon || options.forecasts.is_some() || strategy.horizon > 0;
    if forecast_driven {
        let forecasts = load_or_build_forecasts(options, &out_dir)?;
        if options.multi_horizon {
            let multi = multi_horizon_backtest(&prices, &forecasts, &strategy)?;
            for (h, report) in &multi.reports {
                ReportArtifact::from_report(report, &config.symbol, "strategy", Some(*h))
                    .save(&out_dir.join(format!("report_h{h}.json")))?;
                write_equity(
                    &out_dir.join(format!("equity_h{h}.csv")),
                    &report.dates,
                    &report.equity,
                )?;
            }
            best_horizon_artifact(&multi).save_to(&out_dir.join("best_horizon.json"))?;
            config.echo(&out_dir)?;
            println!(
                "backtest {}: horizons 1-5, best horizon {}",
                config.symbol, multi.best_horizon
            );
        } else {
            let h = strategy.horizon.max(1);
            let driver = forecasts.horizon(h)?;
            let next = if h < 5 {
                Some(forecasts.horizon(h + 1)?)
            } else {
                None
            };
            let report =
                run_backtest_with_reversal(&prices, &forecasts.dates, driver, next, &strategy)?;
            ReportArtifact::from_report(&report, &config.symbol, "strategy", Some(h))
                .save(&out_dir.join("report.json"))?;
            write_equity(&out_dir.join("equity.csv"), &report.dates, &report.equity)?;
            config.echo(&out_dir)?;
            println!(
                "backtest {}: horizon {}, {} trade(s), cumulative {}",
                config.symbol,
                h,
                report.metrics.trade_count,
                fmt_float(report.metrics.cumulative_return),
            );
        }
    } else {
        let scores = load_scores(out_dir.join("scores.csv"))?;
        let report = run_backtest(&prices, &scores.dates, &scores.score, &strategy)?;
        ReportArtifact::from_report(&report, &config.symbol, "strategy", None)
            .save(&out_dir.join("report.json"))?;
        write_equity(&out_dir.join("equity.csv"), &report.dates, &report.equity)?;
        config.echo(&out_dir)?;
        println!(
            "backtest {}: score-driven, {} trade(s), cumulative {}",
            config.symbol,
            report.metrics.trade_count,
            fmt_float(report.metrics.cumulative_return),
        );
    }
    Ok(())
}

fn best_horizon_artifact(multi: &MultiHorizonReport) -> BestHorizonArtifact {
    BestHorizonArtifact {
        best_horizon: multi.best_horizon,
        horizons: multi
            .reports
            .iter()
            .map(|(h, report)| HorizonSummary {
                horizon: *h,
                cumulative_return: round_float(report.metrics.cumulative_return),
                annualized_return: round_float(report.metrics.annualized_return),
                trade_count: report.metrics.trade_count,
            })
            .collect(),
    }
}

impl BestHorizonArtifact {
    pub fn save_to(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<BestHorizonArtifact> {
        read_json(path)
    }
}

// The summary is for human eyes; full precision lives in the JSON.
fn metric_cell(value: f64) -> String {
    format!("{value:.4}")
}

fn sharpe_cell(value: Option<f64>) -> String {
    match value {
        Some(s) => format!("{s:.4}"),
        None => "undefined".to_string(),
    }
}

fn summary_line(label: &str, artifact: &ReportArtifact) -> String {
    let m = &artifact.metrics;
    format!(
        "{label:<12}{:>14}{:>14}{:>12}{:>14}{:>10}{:>8}\n",
        metric_cell(m.cumulative_return),
        metric_cell(m.annualized_return),
        sharpe_cell(m.sharpe_ratio),
        metric_cell(m.max_drawdown),
        metric_cell(m.win_rate),
        m.trade_count,
    )
}

/// Render the performance summary for a completed backtest directory,
/// both to stdout and to `summary.txt`.
pub fn cmd_report(config: &RunConfig) -> Result<()> {
    let out_dir = &config.output_dir;
    let mut rows: Vec<(String, ReportArtifact)> = Vec::new();
    let single = out_dir.join("report.json");
    if single.exists() {
        rows.push(("strategy".into(), ReportArtifact::load(&single)?));
    }
    for h in 1..=5u8 {
        let path = out_dir.join(format!("report_h{h}.json"));
        if path.exists() {
            rows.push((format!("h{h}"), ReportArtifact::load(&path)?));
        }
    }
    let benchmark = out_dir.join("benchmark.json");
    if benchmark.exists() {
        rows.push(("benchmark".into(), ReportArtifact::load(&benchmark)?));
    }
    if rows.is_empty() {
        return Err(Error::Validation(format!(
            "no backtest reports under {}; run backtest first",
            out_dir.display()
        )));
    }

    let mut text = format!("performance summary: {}\n\n", rows[0].1.symbol);
    text.push_str(&format!(
        "{:<12}{:>14}{:>14}{:>12}{:>14}{:>10}{:>8}\n",
        "run", "cumulative", "annualized", "sharpe", "max_drawdown", "win_rate", "trades"
    ));
    for (label, artifact) in &rows {
        text.push_str(&summary_line(label, artifact));
    }
    let best_path = out_dir.join("best_horizon.json");
    if best_path.exists() {
        let best = BestHorizonArtifact::load(&best_path)?;
        text.push_str(&format!("\nbest horizon: {}\n", best.best_horizon));
    }

    let summary_path = out_dir.join("summary.txt");
    std::fs::write(&summary_path, &text).map_err(|e| Error::io(&summary_path, e))?;
    print!("{text}");
    Ok(())
}

/// Options specific to `synth`; defaults describe a fittable bubble with
/// mild mean-reverting noise.
#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Critical time in trading days from the window start; defaults to
    /// n + 25.
    pub t_c: Option<f64>,
    pub m: f64,
    pub omega: f64,
    pub phi: f64,
    pub alpha: f64,
    pub noise_std: f64,
    pub start_date: NaiveDate,
    pub with_news: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        // Roughly doubles the price over 300 days with visible
        // log-periodic wiggles: a strong but plausible bubble.
        SynthOptions {
            n: 300,
            a: 4.6,
            b: -0.045,
            c: 0.015,
            t_c: None,
            m: 0.55,
            omega: 8.0,
            phi: 1.2,
            alpha: 0.10,
            noise_std: 0.01,
            start_date: NaiveDate::from_ymd_opt(2020, 1, 2).expect("valid date"),
            with_news: false,
        }
    }
}

/// Generate a synthetic fixture with known ground truth: `prices.csv`,
/// `truth.json`, and (optionally) `news.csv` + `features.csv`.
pub fn cmd_synth(config: &RunConfig, options: &SynthOptions) -> Result<()> {
    config.validate()?;
    let out_dir = ensure_output_dir(config)?;
    let t_c = options.t_c.unwrap_or(options.n as f64 + 25.0);
    let spec = SynthSpec {
        symbol: config.symbol.clone(),
        n: options.n,
        params: LpplParams {
            a: options.a,
            b: options.b,
            c: options.c,
            t_c,
            m: options.m,
            omega: options.omega,
            phi: options.phi,
        },
        alpha: options.alpha,
        noise_std: options.noise_std,
        start_date: options.start_date,
        rng_seed: config.rng_seed,
        with_news: options.with_news,
    };
    let data = generate(&spec)?;
    write_prices(out_dir.join("prices.csv"), &data.prices)?;
    if let Some(news) = &data.news {
        write_news(out_dir.join("news.csv"), news)?;
    }
    if let Some(features) = &data.features {
        write_features(out_dir.join("features.csv"), features)?;
    }
    let truth = TruthArtifact {
        symbol: spec.symbol.clone(),
        n: spec.n,
        start_date: spec.start_date,
        rng_seed: spec.rng_seed,
        a: spec.params.a,
        b: spec.params.b,
        c: spec.params.c,
        t_c: spec.params.t_c,
        m: spec.params.m,
        omega: spec.params.omega,
        phi: spec.params.phi,
        alpha: spec.alpha,
        noise_std: spec.noise_std,
        with_news: spec.with_news,
    };
    write_json(&out_dir.join("truth.json"), &truth)?;
    config.echo(&out_dir)?;
    println!(
        "synth {}: {} days, t_c={} m={} omega={} alpha={} noise_std={}",
        spec.symbol,
        spec.n,
        fmt_float(t_c),
        fmt_float(spec.params.m),
        fmt_float(spec.params.omega),
        fmt_float(spec.alpha),
        fmt_float(spec.noise_std),
    );
    Ok(())
}
