//! Drive the strategy from multi-horizon score forecasts, compare all
//! five horizons, and watch the reversal-exit rule work.
//!
//! Forecast-driven runs add one exit trigger the score-driven mode lacks:
//! when the forecast for horizon h and the one for h+1 disagree in sign,
//! the expected path crosses zero and the position closes.
//!
//! Run with: cargo run --release --example multi_horizon_trading

use hlppl::backtest::{multi_horizon_backtest, ExitReason, StrategyConfig};
use hlppl::forecast::baseline_forecast_set;
use hlppl::lppl::{fit_lppl, FitConfig, LpplParams};
use hlppl::residuals::{compute_residuals, normalize_residuals, NormalizationMode};
use hlppl::score::{compute_score_series, ScoreParams};
use hlppl::signals::SignalSeries;
use hlppl::synth::{generate, SynthSpec};

fn main() -> hlppl::Result<()> {
    let spec = SynthSpec {
        symbol: "SYN".into(),
        n: 300,
        params: LpplParams {
            a: 4.6,
            b: -0.045,
            c: 0.015,
            t_c: 330.0,
            m: 0.55,
            omega: 8.0,
            phi: 1.2,
        },
        alpha: 0.05,
        noise_std: 0.012,
        start_date: "2020-01-02".parse().expect("date"),
        rng_seed: 21,
        with_news: false,
    };
    let data = generate(&spec)?;

    // Score the window (residual-only here: no news inputs).
    let fit = fit_lppl(&data.prices, &FitConfig::default())?;
    let residuals = compute_residuals(&data.prices, &fit)?;
    let residuals = normalize_residuals(&residuals, NormalizationMode::Global)?;
    let signals = SignalSeries::zeros("SYN", &data.prices.dates);
    let scores = compute_score_series(&residuals, &signals, &ScoreParams::default())?;

    // The baseline forecaster decays today's score at the estimated
    // mean-reversion rate: B(t+h) = B(t) * (1 - alpha)^h.
    let forecasts = baseline_forecast_set(&scores, false)?;
    println!("forecast source: {}", forecasts.source);

    let config = StrategyConfig::default();
    let multi = multi_horizon_backtest(&data.prices, &forecasts, &config)?;

    println!();
    println!(
        "{:<9}{:>12}{:>12}{:>8}{:>18}",
        "horizon", "cumulative", "annualized", "trades", "reversal exits"
    );
    for (h, report) in &multi.reports {
        let reversals = report
            .trades
            .iter()
            .filter(|t| t.exit_reason == ExitReason::Reversal)
            .count();
        println!(
            "{:<9}{:>12.4}{:>12.4}{:>8}{:>18}",
            format!("h={h}"),
            report.metrics.cumulative_return,
            report.metrics.annualized_return,
            report.metrics.trade_count,
            reversals,
        );
    }
    println!();
    println!("best horizon ex post: {}", multi.best_horizon);
    println!(
        "longer horizons shrink forecasts by (1-alpha)^h, so fewer days cross the \
         entry threshold and trade counts fall"
    );
    Ok(())
}
