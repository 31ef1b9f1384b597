//! Extract residuals around a fitted trajectory and estimate their
//! mean-reversion dynamics.
//!
//! The deviation of the log price from the fitted curve is modeled as a
//! discrete Ornstein-Uhlenbeck process: each day it loses a fraction
//! alpha of its level and picks up a fresh shock. Recovering alpha from
//! the residual series tells you how sticky deviations are, and the
//! normalized residual is the first ingredient of the bubble score.
//!
//! Run with: cargo run --release --example residual_dynamics

use hlppl::lppl::{fit_lppl, FitConfig, LpplParams};
use hlppl::residuals::{
    compute_residuals, fit_ar1, normalize_residuals, NormalizationMode,
};
use hlppl::synth::lppl_price_series;

fn main() -> hlppl::Result<()> {
    let truth = LpplParams {
        a: 4.6,
        b: -0.045,
        c: 0.015,
        t_c: 560.0,
        m: 0.55,
        omega: 8.0,
        phi: 1.2,
    };
    // A long window so the slope estimate has plenty of observations.
    let n = 500;
    let true_alpha = 0.10;
    let true_noise = 0.012;

    let prices = lppl_price_series("OU", &truth, n, true_alpha, true_noise, 42)?;
    let fit = fit_lppl(&prices, &FitConfig::default())?;
    let residuals = compute_residuals(&prices, &fit)?;

    let estimate = fit_ar1(&residuals)?;
    println!("injected dynamics:  alpha={true_alpha}  noise_std={true_noise}");
    println!(
        "recovered:          alpha={:.4}  noise_std={:.4}  r_squared={:.3}",
        estimate.alpha, estimate.noise_std, estimate.r_squared
    );
    match estimate.half_life {
        Some(days) => println!("implied half-life:  {days:.1} trading days"),
        None => println!("implied half-life:  none (no mean reversion)"),
    }

    // Global normalization scales by the window-wide extreme, running
    // normalization only by what was known up to each day.
    let global = normalize_residuals(&residuals, NormalizationMode::Global)?;
    let running = normalize_residuals(&residuals, NormalizationMode::Running)?;
    let g = global.epsilon_norm.as_ref().expect("normalized");
    let r = running.epsilon_norm.as_ref().expect("normalized");
    println!();
    println!("{:<12}{:>12}{:>12}{:>12}", "day", "epsilon", "global", "running");
    for t in [50, 150, 250, 350, 499] {
        println!(
            "{:<12}{:>12.5}{:>12.4}{:>12.4}",
            prices.dates[t], residuals.epsilon[t], g[t], r[t]
        );
    }
    let peak = g.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    println!();
    println!("max |global| = {peak} (the window extreme maps to exactly 1)");
    Ok(())
}
