//! Threshold trading on the Bubble Score: signal generation, daily-bar
//! execution with risk controls, performance metrics, and benchmarks.
//!
//! Entries contrarian to the score: deep negative scores (pronounced
//! undervaluation) open longs, deep positive scores (speculative
//! overpricing) open shorts. Execution is at the same-day close. The
//! ledger holds cash plus at most one open position; costs are charged
//! per side on traded notional, so the one-trade arithmetic is exactly
//! reproducible by hand.

use chrono::NaiveDate;
use std::fmt;

use crate::error::{Error, Result};
use crate::forecast::ForecastSet;
use crate::ingest::PriceSeries;

/// Trading rules and risk controls.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    /// Entry threshold on |score|.
    pub theta1: f64,
    /// Exit threshold on the score's pullback.
    pub theta2: f64,
    /// Adverse price move from entry that forces an exit.
    pub stop_loss: f64,
    /// Fraction of current equity committed per position.
    pub max_position: f64,
    /// Cost per side as a fraction of traded notional.
    pub transaction_cost: f64,
    /// Continuously compounded annual rate for present-value reporting.
    pub discount_rate: f64,
    /// 0 drives on the current score; 1..=5 on that forecast horizon.
    pub horizon: u8,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            theta1: 0.7,
            theta2: 0.3,
            stop_loss: 0.15,
            max_position: 0.5,
            transaction_cost: 0.001,
            discount_rate: 0.02,
            horizon: 0,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta2 > 0.0 && self.theta1 > self.theta2) {
            return Err(Error::Config(format!(
                "thresholds must satisfy 0 < theta2 < theta1, got theta1={} theta2={}",
                self.theta1, self.theta2
            )));
        }
        if !(self.stop_loss > 0.0 && self.stop_loss < 1.0) {
            return Err(Error::Config(format!(
                "stop_loss must be in (0, 1), got {}",
                self.stop_loss
            )));
        }
        if !(self.max_position > 0.0 && self.max_position <= 1.0) {
            return Err(Error::Config(format!(
                "max_position must be in (0, 1], got {}",
                self.max_position
            )));
        }
        if self.transaction_cost < 0.0 {
            return Err(Error::Config(format!(
                "transaction_cost must be >= 0, got {}",
                self.transaction_cost
            )));
        }
        if self.discount_rate < 0.0 {
            return Err(Error::Config(format!(
                "discount_rate must be >= 0, got {}",
                self.discount_rate
            )));
        }
        if self.horizon > 5 {
            return Err(Error::Config(format!(
                "horizon must be 0..=5, got {}",
                self.horizon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Long,
    Short,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Long => write!(f, "long"),
            Direction::Short => write!(f, "short"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitReason {
    Threshold,
    StopLoss,
    Reversal,
    EndOfData,
}

impl fmt::Display for ExitReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExitReason::Threshold => write!(f, "threshold"),
            ExitReason::StopLoss => write!(f, "stop_loss"),
            ExitReason::Reversal => write!(f, "reversal"),
            ExitReason::EndOfData => write!(f, "end_of_data"),
        }
    }
}

/// One closed round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct Trade {
    pub direction: Direction,
    pub entry_date: NaiveDate,
    pub entry_price: f64,
    pub exit_date: NaiveDate,
    pub exit_price: f64,
    pub exit_reason: ExitReason,
    /// Equity after exit over equity before entry, minus one.
    pub return_net: f64,
}

/// Threshold crossings emitted by the stateful scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalEvent {
    LongEntry,
    ShortEntry,
    LongExit,
    ShortExit,
}

/// Scan scores into entry/exit events under the threshold rules alone
/// (no price-dependent stops). At most one position is ever open; an
/// exit and an opposite-direction entry may share a date.
pub fn generate_signals(
    dates: &[NaiveDate],
    scores: &[f64],
    config: &StrategyConfig,
) -> Result<Vec<(NaiveDate, SignalEvent)>> {
    config.validate()?;
    if dates.len() != scores.len() {
        return Err(Error::Contract(format!(
            "{} dates vs {} scores",
            dates.len(),
            scores.len()
        )));
    }
    let mut events = Vec::new();
    let mut position: Option<Direction> = None;
    for (date, &b) in dates.iter().zip(scores) {
        match position {
            Some(Direction::Long) if b >= -config.theta2 => {
                events.push((*date, SignalEvent::LongExit));
                position = None;
            }
            Some(Direction::Short) if b <= config.theta2 => {
                events.push((*date, SignalEvent::ShortExit));
                position = None;
            }
            _ => {}
        }
        if position.is_none() {
            if b <= -config.theta1 {
                events.push((*date, SignalEvent::LongEntry));
                position = Some(Direction::Long);
            } else if b >= config.theta1 {
                events.push((*date, SignalEvent::ShortEntry));
                position = Some(Direction::Short);
            }
        }
    }
    Ok(events)
}

/// Exit when consecutive-horizon forecasts disagree in sign. Skipped when
/// the next horizon is unavailable; a zero product holds.
pub fn apply_reversal_exit(forecast_h: f64, forecast_next: Option<f64>) -> bool {
    forecast_next.is_some_and(|next| forecast_h * next < 0.0)
}

/// Performance summary of an equity curve and its trades.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub cumulative_return: f64,
    /// Computed on terminal wealth discounted at the configured rate.
    pub annualized_return: f64,
    /// None when daily returns have no variance.
    pub sharpe_ratio: Option<f64>,
    pub max_drawdown: f64,
    pub win_rate: f64,
    pub trade_count: usize,
}

/// One simulated run: the daily curve, its trades, and the metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub dates: Vec<NaiveDate>,
    pub equity: Vec<f64>,
    pub trades: Vec<Trade>,
    pub metrics: Metrics,
}

const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Summarize an equity curve and trade list.
pub fn performance_metrics(
    equity: &[f64],
    trades: &[Trade],
    config: &StrategyConfig,
) -> Result<Metrics> {
    if equity.is_empty() {
        return Err(Error::InsufficientData("empty equity curve".into()));
    }
    let gross_terminal = equity[equity.len() - 1] / equity[0];
    let cumulative_return = gross_terminal - 1.0;
    let n_days = equity.len() - 1;

    let annualized_return = if n_days == 0 {
        0.0
    } else {
        let years = n_days as f64 / TRADING_DAYS_PER_YEAR;
        let discounted = gross_terminal * (-config.discount_rate * years).exp();
        discounted.powf(TRADING_DAYS_PER_YEAR / n_days as f64) - 1.0
    };

    let sharpe_ratio = if n_days >= 2 {
        let returns: Vec<f64> = equity.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
        let mean = returns.iter().sum::<f64>() / returns.len() as f64;
        let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / (returns.len() - 1) as f64;
        let std = var.sqrt();
        (std > 0.0).then(|| mean / std * TRADING_DAYS_PER_YEAR.sqrt())
    } else {
        None
    };

    let mut peak = equity[0];
    let mut max_drawdown = 0.0_f64;
    for &e in equity {
        peak = peak.max(e);
        max_drawdown = max_drawdown.max((peak - e) / peak);
    }

    let win_rate = if trades.is_empty() {
        0.0
    } else {
        trades.iter().filter(|t| t.return_net > 0.0).count() as f64 / trades.len() as f64
    };

    Ok(Metrics {
        cumulative_return,
        annualized_return,
        sharpe_ratio,
        max_drawdown,
        win_rate,
        trade_count: trades.len(),
    })
}

struct OpenPosition {
    direction: Direction,
    entry_date: NaiveDate,
    entry_price: f64,
    shares: f64,
    equity_before: f64,
}

struct Ledger {
    cash: f64,
    position: Option<OpenPosition>,
    trades: Vec<Trade>,
}

impl Ledger {
    fn new() -> Self {
        Ledger {
            cash: 1.0,
            position: None,
            trades: Vec::new(),
        }
    }

    fn equity(&self, price: f64) -> f64 {
        match &self.position {
            None => self.cash,
            Some(p) => match p.direction {
                Direction::Long => self.cash + p.shares * price,
                Direction::Short => self.cash - p.shares * price,
            },
        }
    }

    fn open(&mut self, direction: Direction, date: NaiveDate, price: f64, config: &StrategyConfig) {
        let equity_before = self.cash;
        let notional = config.max_position * equity_before;
        let shares = notional / price;
        let fee = config.transaction_cost * notional;
        match direction {
            Direction::Long => self.cash -= notional + fee,
            Direction::Short => self.cash += notional - fee,
        }
        self.position = Some(OpenPosition {
            direction,
            entry_date: date,
            entry_price: price,
            shares,
            equity_before,
        });
    }

    fn close(&mut self, date: NaiveDate, price: f64, reason: ExitReason, config: &StrategyConfig) {
        let pos = self.position.take().expect("close requires an open position");
        let notional = pos.shares * price;
        let fee = config.transaction_cost * notional;
        match pos.direction {
            Direction::Long => self.cash += notional - fee,
            Direction::Short => self.cash -= notional + fee,
        }
        self.trades.push(Trade {
            direction: pos.direction,
            entry_date: pos.entry_date,
            entry_price: pos.entry_price,
            exit_date: date,
            exit_price: price,
            exit_reason: reason,
            return_net: self.cash / pos.equity_before - 1.0,
        });
    }
}

/// Simulate the threshold strategy driven by the current-score series.
pub fn run_backtest(
    prices: &PriceSeries,
    driver_dates: &[NaiveDate],
    driver: &[f64],
    config: &StrategyConfig,
) -> Result<BacktestReport> {
    run_backtest_with_reversal(prices, driver_dates, driver, None, config)
}

/// Simulate with an optional next-horizon forecast enabling the
/// reversal-exit rule.
///
/// Each day, an open position is checked for exit first — stop-loss, then
/// threshold, then reversal, then forced close on the final bar — and
/// only afterwards may a new position open at the same close, so an exit
/// and an opposite entry can share a date. No entry is taken on the final
/// bar. Signals use only same-day values: nothing later than t influences
/// the state at t.
///
/// The equity curve starts at funding capital (1.0) on the first date and
/// records post-execution close marks thereafter, so a first-day entry
/// shows its cost from the second mark onward.
pub fn run_backtest_with_reversal(
    prices: &PriceSeries,
    driver_dates: &[NaiveDate],
    driver: &[f64],
    next_horizon: Option<&[f64]>,
    config: &StrategyConfig,
) -> Result<BacktestReport> {
    config.validate()?;
    if driver_dates != prices.dates.as_slice() {
        return Err(Error::Contract(
            "driver series does not share the price calendar".into(),
        ));
    }
    if driver.len() != prices.len() {
        return Err(Error::Contract(format!(
            "{} driver values vs {} prices",
            driver.len(),
            prices.len()
        )));
    }
    if let Some(next) = next_horizon {
        if next.len() != prices.len() {
            return Err(Error::Contract(format!(
                "{} next-horizon values vs {} prices",
                next.len(),
                prices.len()
            )));
        }
    }

    let n = prices.len();
    let mut ledger = Ledger::new();
    let mut equity = Vec::with_capacity(n);
    for i in 0..n {
        let date = prices.dates[i];
        let price = prices.close[i];
        let b = driver[i];

        // The first mark precedes any execution: the curve begins at
        // funding capital, and day-0 trades surface at the next mark.
        if i == 0 {
            equity.push(ledger.equity(price));
        }

        if let Some(pos) = &ledger.position {
            let adverse = match pos.direction {
                Direction::Long => (pos.entry_price - price) / pos.entry_price,
                Direction::Short => (price - pos.entry_price) / pos.entry_price,
            };
            let threshold_exit = match pos.direction {
                Direction::Long => b >= -config.theta2,
                Direction::Short => b <= config.theta2,
            };
            let reason = if adverse >= config.stop_loss {
                Some(ExitReason::StopLoss)
            } else if threshold_exit {
                Some(ExitReason::Threshold)
            } else if apply_reversal_exit(b, next_horizon.map(|next| next[i])) {
                Some(ExitReason::Reversal)
            } else if i == n - 1 {
                Some(ExitReason::EndOfData)
            } else {
                None
            };
            if let Some(reason) = reason {
                ledger.close(date, price, reason, config);
            }
        }

        if ledger.position.is_none() && i < n - 1 {
            if b <= -config.theta1 {
                ledger.open(Direction::Long, date, price, config);
            } else if b >= config.theta1 {
                ledger.open(Direction::Short, date, price, config);
            }
        }

        if i > 0 {
            equity.push(ledger.equity(price));
        }
    }

    let metrics = performance_metrics(&equity, &ledger.trades, config)?;
    Ok(BacktestReport {
        dates: prices.dates.clone(),
        equity,
        trades: ledger.trades,
        metrics,
    })
}

/// Full-capital long over the whole window, one entry and one exit cost.
/// As in [`run_backtest`], the curve starts at funding capital, so the
/// entry cost first appears at the second mark.
pub fn buy_and_hold_benchmark(
    prices: &PriceSeries,
    config: &StrategyConfig,
) -> Result<BacktestReport> {
    config.validate()?;
    let n = prices.len();
    let entry_price = prices.close[0];
    let shares = 1.0 / entry_price;
    let mut cash = -config.transaction_cost;
    let mut equity = Vec::with_capacity(n);
    equity.push(1.0);
    for i in 1..n.saturating_sub(1) {
        equity.push(cash + shares * prices.close[i]);
    }
    let exit_price = prices.close[n - 1];
    let proceeds = shares * exit_price;
    cash += proceeds - config.transaction_cost * proceeds;
    if n > 1 {
        equity.push(cash);
    }
    let trades = vec![Trade {
        direction: Direction::Long,
        entry_date: prices.dates[0],
        entry_price,
        exit_date: prices.dates[n - 1],
        exit_price,
        exit_reason: ExitReason::EndOfData,
        return_net: cash - 1.0,
    }];
    let metrics = performance_metrics(&equity, &trades, config)?;
    Ok(BacktestReport {
        dates: prices.dates.clone(),
        equity,
        trades,
        metrics,
    })
}

/// Per-horizon reports and the ex-post best horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiHorizonReport {
    /// (horizon, report) for h = 1..=5, in order.
    pub reports: Vec<(u8, BacktestReport)>,
    /// Argmax of annualized return; ties break to the lowest horizon.
    pub best_horizon: u8,
}

/// Run the strategy once per forecast horizon with the reversal rule
/// active (horizon 5 has no successor, so the rule is skipped there).
pub fn multi_horizon_backtest(
    prices: &PriceSeries,
    forecasts: &ForecastSet,
    config: &StrategyConfig,
) -> Result<MultiHorizonReport> {
    let mut reports = Vec::with_capacity(5);
    for h in 1..=5u8 {
        let driver = forecasts.horizon(h)?;
        let next = if h < 5 {
            Some(forecasts.horizon(h + 1)?)
        } else {
            None
        };
        let config_h = StrategyConfig {
            horizon: h,
            ..config.clone()
        };
        let report =
            run_backtest_with_reversal(prices, &forecasts.dates, driver, next, &config_h)?;
        reports.push((h, report));
    }
    let mut best_horizon = reports[0].0;
    let mut best_return = reports[0].1.metrics.annualized_return;
    for (h, report) in &reports[1..] {
        if report.metrics.annualized_return > best_return {
            best_horizon = *h;
            best_return = report.metrics.annualized_return;
        }
    }
    Ok(MultiHorizonReport {
        reports,
        best_horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn days(n: usize) -> Vec<NaiveDate> {
        synth::business_days("2021-01-04".parse().unwrap(), n)
    }

    fn prices_from(close: Vec<f64>) -> PriceSeries {
        PriceSeries::new("T", days(close.len()), close, None).unwrap()
    }

    fn no_cost() -> StrategyConfig {
        StrategyConfig {
            transaction_cost: 0.0,
            discount_rate: 0.0,
            ..StrategyConfig::default()
        }
    }

    #[test]
    fn long_cycle_events() {
        let d = days(3);
        let events =
            generate_signals(&d, &[-0.8, -0.5, -0.2], &StrategyConfig::default()).unwrap();
        assert_eq!(
            events,
            vec![(d[0], SignalEvent::LongEntry), (d[2], SignalEvent::LongExit)]
        );
    }

    #[test]
    fn short_cycle_events() {
        let d = days(3);
        let events =
            generate_signals(&d, &[0.75, 0.4, 0.2], &StrategyConfig::default()).unwrap();
        assert_eq!(
            events,
            vec![
                (d[0], SignalEvent::ShortEntry),
                (d[2], SignalEvent::ShortExit)
            ]
        );
    }

    #[test]
    fn quiet_scores_emit_nothing() {
        let d = days(4);
        let events =
            generate_signals(&d, &[0.5, -0.6, 0.3, 0.0], &StrategyConfig::default()).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn same_day_flip_exits_then_enters() {
        let d = days(3);
        let events =
            generate_signals(&d, &[-0.8, 0.8, 0.2], &StrategyConfig::default()).unwrap();
        assert_eq!(
            events,
            vec![
                (d[0], SignalEvent::LongEntry),
                (d[1], SignalEvent::LongExit),
                (d[1], SignalEvent::ShortEntry),
                (d[2], SignalEvent::ShortExit),
            ]
        );
    }

    #[test]
    fn reversal_rule_boundary_cases() {
        assert!(apply_reversal_exit(0.5, Some(-0.1)));
        assert!(!apply_reversal_exit(0.5, Some(0.4)));
        assert!(!apply_reversal_exit(0.0, Some(-0.5)));
        assert!(!apply_reversal_exit(0.5, None));
    }

    #[test]
    fn flat_prices_no_signals_hold_equity() {
        let prices = prices_from(vec![50.0; 10]);
        let scores = vec![0.0; 10];
        let report =
            run_backtest(&prices, &prices.dates, &scores, &StrategyConfig::default()).unwrap();
        assert!(report.equity.iter().all(|e| *e == 1.0));
        assert!(report.trades.is_empty());
        assert_eq!(report.metrics.trade_count, 0);
        assert_eq!(report.metrics.win_rate, 0.0);
    }

    #[test]
    fn one_trade_ledger_oracle() {
        let prices = prices_from(vec![100.0, 102.0, 105.0, 110.0, 110.0]);
        let scores = vec![-0.8, -0.5, -0.5, -0.2, 0.0];
        let config = StrategyConfig {
            discount_rate: 0.0,
            ..StrategyConfig::default()
        };
        let report = run_backtest(&prices, &prices.dates, &scores, &config).unwrap();
        assert_eq!(report.trades.len(), 1);
        let trade = &report.trades[0];
        assert_eq!(trade.direction, Direction::Long);
        assert_eq!(trade.entry_price, 100.0);
        assert_eq!(trade.exit_price, 110.0);
        assert_eq!(trade.exit_reason, ExitReason::Threshold);
        // 1 + 0.5*0.10 - 0.0005 - 0.00055, every term exact.
        assert!((report.equity[4] - 1.04895).abs() < 1e-10);
        assert!((trade.return_net - 0.04895).abs() < 1e-10);
        // The curve opens at funding capital; the day-0 entry fee and the
        // first mark-to-market gain both land on day 1.
        assert_eq!(report.equity[0], 1.0);
        assert!((report.equity[1] - 1.0095).abs() < 1e-12);
    }

    #[test]
    fn stop_loss_fires_at_first_qualifying_close() {
        let prices = prices_from(vec![100.0, 92.0, 84.0, 90.0, 95.0]);
        let scores = vec![-0.8, -0.8, -0.8, -0.8, -0.8];
        let report =
            run_backtest(&prices, &prices.dates, &scores, &no_cost()).unwrap();
        // Stopped out at 84 (16% adverse), then re-entered at the same
        // close because the score still demands a long.
        assert_eq!(report.trades[0].exit_reason, ExitReason::StopLoss);
        assert_eq!(report.trades[0].exit_price, 84.0);
        assert_eq!(report.trades[0].exit_date, prices.dates[2]);
        assert!(report.trades[0].return_net < 0.0);
    }

    #[test]
    fn stop_loss_boundary_is_inclusive() {
        let prices = prices_from(vec![100.0, 85.0, 85.0]);
        let scores = vec![-0.8, -0.8, -0.8];
        let report = run_backtest(&prices, &prices.dates, &scores, &no_cost()).unwrap();
        assert_eq!(report.trades[0].exit_reason, ExitReason::StopLoss);
        assert_eq!(report.trades[0].exit_date, prices.dates[1]);
    }

    #[test]
    fn short_stop_loss_on_rally() {
        let prices = prices_from(vec![100.0, 108.0, 116.0, 116.0]);
        let scores = vec![0.8, 0.8, 0.8, 0.8];
        let report = run_backtest(&prices, &prices.dates, &scores, &no_cost()).unwrap();
        assert_eq!(report.trades[0].direction, Direction::Short);
        assert_eq!(report.trades[0].exit_reason, ExitReason::StopLoss);
        assert_eq!(report.trades[0].exit_price, 116.0);
    }

    #[test]
    fn open_position_is_forced_closed_at_end() {
        let prices = prices_from(vec![100.0, 101.0, 102.0]);
        let scores = vec![-0.9, -0.9, -0.9];
        let report = run_backtest(&prices, &prices.dates, &scores, &no_cost()).unwrap();
        assert_eq!(report.trades.len(), 1);
        assert_eq!(report.trades[0].exit_reason, ExitReason::EndOfData);
        assert_eq!(report.trades[0].exit_date, prices.dates[2]);
        assert!(report.trades[0].exit_date > report.trades[0].entry_date);
    }

    #[test]
    fn reversal_exit_fires_on_sign_flip() {
        let prices = prices_from(vec![100.0, 101.0, 102.0, 103.0]);
        let driver = vec![-0.8, -0.75, -0.75, -0.75];
        let next = vec![-0.5, 0.3, 0.4, 0.4];
        let report = run_backtest_with_reversal(
            &prices,
            &prices.dates,
            &driver,
            Some(&next),
            &no_cost(),
        )
        .unwrap();
        assert_eq!(report.trades[0].exit_reason, ExitReason::Reversal);
        assert_eq!(report.trades[0].exit_date, prices.dates[1]);
    }

    #[test]
    fn annualized_identity_over_one_year() {
        let n = 253;
        let equity: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * i as f64 / (n - 1) as f64)
            .collect();
        let config = StrategyConfig {
            discount_rate: 0.0,
            ..StrategyConfig::default()
        };
        let m = performance_metrics(&equity, &[], &config).unwrap();
        assert!((m.annualized_return - 0.10).abs() < 1e-12);
        assert!((m.cumulative_return - 0.10).abs() < 1e-12);
    }

    #[test]
    fn discounting_matches_closed_form() {
        let n = 253;
        let equity: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * i as f64 / (n - 1) as f64)
            .collect();
        let config = StrategyConfig {
            discount_rate: 0.02,
            ..StrategyConfig::default()
        };
        let m = performance_metrics(&equity, &[], &config).unwrap();
        let expected = 1.1 * (-0.02_f64).exp() - 1.0;
        assert!((m.annualized_return - expected).abs() < 1e-12);
    }

    #[test]
    fn drawdown_peak_trough_example() {
        let m = performance_metrics(
            &[1.0, 1.2, 0.9, 1.1],
            &[],
            &StrategyConfig::default(),
        )
        .unwrap();
        assert!((m.max_drawdown - 0.25).abs() < 1e-12);
    }

    #[test]
    fn constant_equity_has_undefined_sharpe() {
        let m = performance_metrics(&[1.0; 50], &[], &StrategyConfig::default()).unwrap();
        assert_eq!(m.sharpe_ratio, None);
    }

    #[test]
    fn benchmark_doubling_without_costs() {
        let prices = prices_from((0..10).map(|i| 100.0 + 100.0 * i as f64 / 9.0).collect());
        let report = buy_and_hold_benchmark(&prices, &no_cost()).unwrap();
        assert!((report.metrics.cumulative_return - 1.0).abs() < 1e-12);
        assert_eq!(report.trades.len(), 1);
    }

    #[test]
    fn benchmark_constant_prices_pay_two_costs() {
        let prices = prices_from(vec![40.0; 8]);
        let report =
            buy_and_hold_benchmark(&prices, &StrategyConfig::default()).unwrap();
        assert!((report.equity[7] - 0.998).abs() < 1e-12);
        assert!((report.metrics.cumulative_return + 0.002).abs() < 1e-12);
    }

    #[test]
    fn benchmark_monotone_fall_drawdown() {
        let prices = prices_from(vec![100.0, 90.0, 80.0, 70.0]);
        let report = buy_and_hold_benchmark(&prices, &no_cost()).unwrap();
        assert!((report.metrics.max_drawdown - 0.3).abs() < 1e-12);
        assert!(report.metrics.cumulative_return < 0.0);
    }

    fn random_fixture(seed: u64, n: usize) -> (PriceSeries, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut price = 100.0_f64;
        let mut close = Vec::with_capacity(n);
        let mut scores = Vec::with_capacity(n);
        for _ in 0..n {
            price *= 1.0 + rng.random_range(-0.04..0.04);
            close.push(price);
            scores.push(rng.random_range(-1.2..1.2));
        }
        (prices_from(close), scores)
    }

    #[test]
    fn ledger_conservation_on_random_fixtures() {
        for seed in 0..20 {
            let (prices, scores) = random_fixture(seed, 120);
            let report = run_backtest(
                &prices,
                &prices.dates,
                &scores,
                &StrategyConfig::default(),
            )
            .unwrap();
            let mut replayed = 1.0;
            for trade in &report.trades {
                replayed *= 1.0 + trade.return_net;
            }
            let final_equity = *report.equity.last().unwrap();
            assert!(
                (replayed - final_equity).abs() <= 1e-10 * final_equity.abs().max(1.0),
                "seed {seed}: replayed {replayed} vs {final_equity}"
            );
        }
    }

    #[test]
    fn trades_never_overlap() {
        for seed in 0..20 {
            let (prices, scores) = random_fixture(seed, 150);
            let report = run_backtest(
                &prices,
                &prices.dates,
                &scores,
                &StrategyConfig::default(),
            )
            .unwrap();
            for pair in report.trades.windows(2) {
                assert!(pair[0].exit_date <= pair[1].entry_date);
            }
            for trade in &report.trades {
                assert!(trade.exit_date > trade.entry_date);
            }
        }
    }

    #[test]
    fn truncation_equivalence_no_lookahead() {
        let (prices, scores) = random_fixture(7, 200);
        let full = run_backtest(
            &prices,
            &prices.dates,
            &scores,
            &StrategyConfig::default(),
        )
        .unwrap();
        for k in [30, 75, 120, 199] {
            let sub_prices = PriceSeries::new(
                "T",
                prices.dates[..k].to_vec(),
                prices.close[..k].to_vec(),
                None,
            )
            .unwrap();
            let sub = run_backtest(
                &sub_prices,
                &sub_prices.dates,
                &scores[..k],
                &StrategyConfig::default(),
            )
            .unwrap();
            // All days before the truncated run's final bar agree; the
            // final bar may differ only through its forced close.
            for i in 0..k - 1 {
                assert_eq!(
                    full.equity[i].to_bits(),
                    sub.equity[i].to_bits(),
                    "day {i} of prefix {k}"
                );
            }
            for (a, b) in sub.trades.iter().zip(&full.trades) {
                assert_eq!(a.entry_date, b.entry_date);
                assert_eq!(a.entry_price, b.entry_price);
            }
        }
    }

    #[test]
    fn transaction_costs_never_help() {
        let (prices, scores) = random_fixture(11, 150);
        let mut last = f64::INFINITY;
        for cost in [0.0, 0.0005, 0.001, 0.005, 0.02] {
            let config = StrategyConfig {
                transaction_cost: cost,
                ..StrategyConfig::default()
            };
            let report = run_backtest(&prices, &prices.dates, &scores, &config).unwrap();
            assert!(
                report.metrics.cumulative_return <= last + 1e-12,
                "cost {cost} improved returns"
            );
            last = report.metrics.cumulative_return;
        }
    }

    #[test]
    fn mismatched_calendar_is_a_contract_error() {
        let prices = prices_from(vec![100.0, 101.0, 102.0]);
        let other_dates = days(4);
        let err = run_backtest(
            &prices,
            &other_dates[1..],
            &[0.0, 0.0, 0.0],
            &StrategyConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
    }

    proptest! {
        #[test]
        fn drawdown_matches_brute_force(
            equity in proptest::collection::vec(0.1_f64..10.0, 1..200),
        ) {
            let m = performance_metrics(&equity, &[], &StrategyConfig::default()).unwrap();
            let mut brute = 0.0_f64;
            for i in 0..equity.len() {
                for j in i..equity.len() {
                    brute = brute.max((equity[i] - equity[j]) / equity[i]);
                }
            }
            prop_assert!((m.max_drawdown - brute).abs() < 1e-12);
        }
    }
}
