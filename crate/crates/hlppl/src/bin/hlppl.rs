//! Thin command-line front end over the library's command layer.
//!
//! Precedence is flags > config file > defaults; the effective config is
//! echoed into the output directory by every command. Exit codes: 0
//! success, 2 I/O, 3 validation, 4 numerical failure.

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use hlppl::commands::{
    cmd_backtest, cmd_fit, cmd_label, cmd_report, cmd_score, cmd_synth, BacktestOptions,
    ScoreOptions, SynthOptions,
};
use hlppl::config::RunConfig;
use hlppl::residuals::NormalizationMode;
use hlppl::signals::SentimentSource;

#[derive(Parser)]
#[command(
    name = "hlppl",
    version,
    about = "Log-periodic bubble detection, scoring, and threshold trading"
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Global flags that override the config file.
#[derive(Args)]
struct Overrides {
    /// Run configuration file (TOML); defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Symbol the price file describes.
    #[arg(long, global = true)]
    symbol: Option<String>,
    /// Prices CSV (date,close[,volume]).
    #[arg(long, global = true)]
    prices: Option<PathBuf>,
    /// Pre-scored news CSV.
    #[arg(long, global = true)]
    news: Option<PathBuf>,
    /// Market coverage/cap features CSV.
    #[arg(long, global = true)]
    features: Option<PathBuf>,
    /// Artifact directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Root RNG seed for every randomized stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Inclusive analysis window start (YYYY-MM-DD).
    #[arg(long, global = true)]
    window_start: Option<NaiveDate>,
    /// Inclusive analysis window end (YYYY-MM-DD).
    #[arg(long, global = true)]
    window_end: Option<NaiveDate>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the log-periodic model; writes fit.json and residuals.csv.
    Fit {
        /// Number of random restarts for the multi-start search.
        #[arg(long)]
        restarts: Option<u32>,
    },
    /// Compose bubble scores and label episodes; writes scores.csv,
    /// episodes.csv, and plot_data.csv.
    Score {
        /// Fit in-process instead of reading fit.json.
        #[arg(long)]
        fit_inline: bool,
        /// Hype weight in the score.
        #[arg(long)]
        alpha1: Option<f64>,
        /// Sentiment weight in the score.
        #[arg(long)]
        alpha2: Option<f64>,
        /// Episode threshold on |score|.
        #[arg(long)]
        tau: Option<f64>,
        /// Minimum episode length in trading days.
        #[arg(long)]
        d_min: Option<usize>,
        /// Residual normalization: global or running.
        #[arg(long)]
        normalization: Option<NormalizationMode>,
        /// Sentiment channel: polarity or finbert.
        #[arg(long)]
        sentiment_source: Option<SentimentSource>,
    },
    /// Re-label episodes from an existing scores.csv.
    Label {
        /// Episode threshold on |score|.
        #[arg(long)]
        tau: Option<f64>,
        /// Minimum episode length in trading days.
        #[arg(long)]
        d_min: Option<usize>,
    },
    /// Simulate the threshold strategy next to a buy-and-hold benchmark;
    /// writes report.json and equity.csv (per horizon in multi mode).
    Backtest {
        /// Forecast horizon 1..=5; 0 trades on the current score.
        #[arg(long)]
        horizon: Option<u8>,
        /// Run all five horizons and rank them.
        #[arg(long)]
        multi_horizon: bool,
        /// External forecasts CSV (date,h1..h5); the AR(1)-decay baseline
        /// over scores.csv is used when absent.
        #[arg(long)]
        forecasts: Option<PathBuf>,
        /// Clamp baseline forecasts to [-1, 1] before thresholding.
        #[arg(long)]
        strict_range: bool,
        /// Entry threshold on |score|.
        #[arg(long)]
        theta1: Option<f64>,
        /// Exit threshold on the score's pullback.
        #[arg(long)]
        theta2: Option<f64>,
        /// Adverse move from entry that forces an exit.
        #[arg(long)]
        stop_loss: Option<f64>,
        /// Fraction of equity committed per position.
        #[arg(long)]
        max_position: Option<f64>,
        /// Cost per side on traded notional.
        #[arg(long)]
        transaction_cost: Option<f64>,
        /// Continuous annual discount rate for reporting.
        #[arg(long)]
        discount_rate: Option<f64>,
    },
    /// Print and save the performance summary of a completed run.
    Report,
    /// Generate a synthetic fixture with known ground truth; writes
    /// prices.csv and truth.json (plus news/features with --with-news).
    Synth {
        /// Number of trading days.
        #[arg(long)]
        n: Option<usize>,
        /// Log-price level at the critical time.
        #[arg(long)]
        a: Option<f64>,
        /// Power-law amplitude (negative for a positive bubble).
        #[arg(long)]
        b: Option<f64>,
        /// Oscillation amplitude.
        #[arg(long)]
        c: Option<f64>,
        /// Critical time in trading days from the window start
        /// (default n + 25).
        #[arg(long)]
        t_c: Option<f64>,
        /// Power-law exponent in (0, 1).
        #[arg(long)]
        m: Option<f64>,
        /// Log-periodic angular frequency.
        #[arg(long)]
        omega: Option<f64>,
        /// Oscillation phase.
        #[arg(long)]
        phi: Option<f64>,
        /// Mean-reversion speed of the injected residual.
        #[arg(long)]
        alpha: Option<f64>,
        /// Standard deviation of residual shocks.
        #[arg(long)]
        noise_std: Option<f64>,
        /// First calendar date (YYYY-MM-DD; weekends roll forward).
        #[arg(long)]
        start_date: Option<NaiveDate>,
        /// Also fabricate aligned news.csv and features.csv.
        #[arg(long)]
        with_news: bool,
    },
}

fn apply_overrides(config: &mut RunConfig, overrides: &Overrides) {
    if let Some(symbol) = &overrides.symbol {
        config.symbol = symbol.clone();
    }
    if let Some(path) = &overrides.prices {
        config.prices = Some(path.clone());
    }
    if let Some(path) = &overrides.news {
        config.news = Some(path.clone());
    }
    if let Some(path) = &overrides.features {
        config.features = Some(path.clone());
    }
    if let Some(dir) = &overrides.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(seed) = overrides.seed {
        config.rng_seed = seed;
    }
    if let Some(date) = overrides.window_start {
        config.window_start = Some(date);
    }
    if let Some(date) = overrides.window_end {
        config.window_end = Some(date);
    }
}

fn run(cli: Cli) -> hlppl::Result<()> {
    let mut config = match &cli.overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut config, &cli.overrides);

    match cli.command {
        Command::Fit { restarts } => {
            if let Some(r) = restarts {
                config.fit.restarts = r;
            }
            cmd_fit(&config)
        }
        Command::Score {
            fit_inline,
            alpha1,
            alpha2,
            tau,
            d_min,
            normalization,
            sentiment_source,
        } => {
            if let Some(v) = alpha1 {
                config.score.alpha1 = v;
            }
            if let Some(v) = alpha2 {
                config.score.alpha2 = v;
            }
            if let Some(v) = tau {
                config.score.tau = v;
            }
            if let Some(v) = d_min {
                config.score.d_min = v;
            }
            if let Some(v) = normalization {
                config.score.normalization = v;
            }
            if let Some(v) = sentiment_source {
                config.score.sentiment_source = v;
            }
            cmd_score(&config, &ScoreOptions { fit_inline })
        }
        Command::Label { tau, d_min } => {
            if let Some(v) = tau {
                config.score.tau = v;
            }
            if let Some(v) = d_min {
                config.score.d_min = v;
            }
            cmd_label(&config)
        }
        Command::Backtest {
            horizon,
            multi_horizon,
            forecasts,
            strict_range,
            theta1,
            theta2,
            stop_loss,
            max_position,
            transaction_cost,
            discount_rate,
        } => {
            if let Some(v) = horizon {
                config.strategy.horizon = v;
            }
            if let Some(v) = theta1 {
                config.strategy.theta1 = v;
            }
            if let Some(v) = theta2 {
                config.strategy.theta2 = v;
            }
            if let Some(v) = stop_loss {
                config.strategy.stop_loss = v;
            }
            if let Some(v) = max_position {
                config.strategy.max_position = v;
            }
            if let Some(v) = transaction_cost {
                config.strategy.transaction_cost = v;
            }
            if let Some(v) = discount_rate {
                config.strategy.discount_rate = v;
            }
            cmd_backtest(
                &config,
                &BacktestOptions {
                    multi_horizon,
                    forecasts,
                    strict_range,
                },
            )
        }
        Command::Report => cmd_report(&config),
        Command::Synth {
            n,
            a,
            b,
            c,
            t_c,
            m,
            omega,
            phi,
            alpha,
            noise_std,
            start_date,
            with_news,
        } => {
            let defaults = SynthOptions::default();
            let options = SynthOptions {
                n: n.unwrap_or(defaults.n),
                a: a.unwrap_or(defaults.a),
                b: b.unwrap_or(defaults.b),
                c: c.unwrap_or(defaults.c),
                t_c: t_c.or(defaults.t_c),
                m: m.unwrap_or(defaults.m),
                omega: omega.unwrap_or(defaults.omega),
                phi: phi.unwrap_or(defaults.phi),
                alpha: alpha.unwrap_or(defaults.alpha),
                noise_std: noise_std.unwrap_or(defaults.noise_std),
                start_date: start_date.unwrap_or(defaults.start_date),
                with_news,
            };
            cmd_synth(&config, &options)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
