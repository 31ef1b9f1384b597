//! Trade the bubble score with thresholds, stop-loss, and costs, and walk
//! through the ledger arithmetic of a single round trip.
//!
//! The strategy is contrarian: a deeply negative score signals
//! undervaluation (enter long), a deeply positive one overpricing (enter
//! short); positions close when the score pulls back toward zero, when
//! the price moves 15% against entry, or when data ends.
//!
//! Run with: cargo run --release --example threshold_trading

use hlppl::backtest::{
    buy_and_hold_benchmark, performance_metrics, run_backtest, StrategyConfig,
};
use hlppl::ingest::PriceSeries;
use hlppl::synth::business_days;

fn main() -> hlppl::Result<()> {
    // One long round trip, small enough to check by hand.
    let dates = business_days("2021-01-04".parse().expect("date"), 5);
    let prices = PriceSeries::new(
        "HAND",
        dates.clone(),
        vec![100.0, 102.0, 105.0, 110.0, 110.0],
        None,
    )?;
    let scores = vec![-0.8, -0.5, -0.5, -0.2, 0.0];
    let config = StrategyConfig {
        discount_rate: 0.0,
        ..StrategyConfig::default()
    };

    let report = run_backtest(&prices, &prices.dates, &scores, &config)?;
    let trade = &report.trades[0];
    println!("hand-checkable round trip:");
    println!(
        "  {} {} at {} -> {} at {} ({})",
        trade.direction, trade.entry_date, trade.entry_price, trade.exit_date, trade.exit_price,
        trade.exit_reason
    );
    println!("  half the equity buys at 100:        notional 0.5000, fee 0.0005");
    println!("  exit at 110 sells notional 0.5500:  fee 0.00055");
    println!("  1 + 0.05 - 0.0005 - 0.00055      =  1.04895");
    println!("  simulated final equity           =  {:.5}", report.equity[4]);
    println!("  trade net return                 =  {:.5}", trade.return_net);
    assert!((report.equity[4] - 1.04895).abs() < 1e-10);

    // A stop-loss example: the score keeps demanding a long, but the
    // price falls 16% from entry and risk control overrides the signal.
    let fall = PriceSeries::new(
        "STOP",
        business_days("2021-02-01".parse().expect("date"), 5),
        vec![100.0, 92.0, 84.0, 90.0, 95.0],
        None,
    )?;
    let stubborn = vec![-0.9; 5];
    let stopped = run_backtest(&fall, &fall.dates, &stubborn, &config)?;
    println!();
    println!("stop-loss override:");
    for trade in &stopped.trades {
        println!(
            "  {} {} at {} -> {} at {} ({}), net {:.4}",
            trade.direction,
            trade.entry_date,
            trade.entry_price,
            trade.exit_date,
            trade.exit_price,
            trade.exit_reason,
            trade.return_net,
        );
    }

    // A longer randomized-looking path against its benchmark.
    let n = 120;
    let mut close = Vec::with_capacity(n);
    let mut driver = Vec::with_capacity(n);
    let mut level = 100.0_f64;
    for i in 0..n {
        // A deterministic oscillating path: drifts up, dips mid-way.
        let cycle = (i as f64 / 18.0).sin();
        level *= 1.0 + 0.004 * cycle + 0.0008;
        close.push(level);
        driver.push(-(cycle * 0.9));
    }
    let path = PriceSeries::new("OSC", business_days("2021-03-01".parse().expect("date"), n), close, None)?;
    let strategy = run_backtest(&path, &path.dates, &driver, &config)?;
    let benchmark = buy_and_hold_benchmark(&path, &config)?;
    let strategy_metrics = performance_metrics(&strategy.equity, &strategy.trades, &config)?;

    println!();
    println!("oscillating path, {} trades:", strategy.trades.len());
    println!(
        "  strategy:  cumulative {:>8.4}  max_drawdown {:>7.4}  win_rate {:.2}",
        strategy_metrics.cumulative_return,
        strategy_metrics.max_drawdown,
        strategy_metrics.win_rate
    );
    println!(
        "  buy&hold:  cumulative {:>8.4}  max_drawdown {:>7.4}",
        benchmark.metrics.cumulative_return, benchmark.metrics.max_drawdown
    );
    Ok(())
}
