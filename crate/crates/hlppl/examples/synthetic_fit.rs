//! Fit the log-periodic model to synthetic bubbles and compare the
//! recovered parameters against the generating truth.
//!
//! Run with: cargo run --release --example synthetic_fit

use hlppl::lppl::{fit_lppl, FitConfig, LpplParams};
use hlppl::serialize::fmt_float;
use hlppl::synth::lppl_price_series;

fn main() -> hlppl::Result<()> {
    let truth = LpplParams {
        a: 4.6,
        b: -0.045,
        c: 0.015,
        t_c: 330.0,
        m: 0.55,
        omega: 8.0,
        phi: 1.2,
    };
    let n = 300;

    println!("true parameters: t_c={} m={} omega={}", truth.t_c, truth.m, truth.omega);
    println!();
    println!("{:<22}{:>10}{:>10}{:>10}{:>20}", "series", "t_c", "m", "omega", "rmse");

    // A noiseless series first: the optimizer should land almost exactly
    // on the truth, limited only by the search tolerance.
    let clean = lppl_price_series("CLEAN", &truth, n, 0.0, 0.0, 1)?;
    let fit = fit_lppl(&clean, &FitConfig::default())?;
    println!(
        "{:<22}{:>10.2}{:>10.3}{:>10.3}{:>20}",
        "noiseless",
        fit.params.t_c,
        fit.params.m,
        fit.params.omega,
        fmt_float(fit.rmse)
    );

    // Mean-reverting noise at a realistic daily scale blurs the estimate
    // of the critical time by a few trading days, not more.
    for seed in [2, 3, 4] {
        let noisy = lppl_price_series("NOISY", &truth, n, 0.10, 0.01, seed)?;
        let fit = fit_lppl(&noisy, &FitConfig::default())?;
        println!(
            "{:<22}{:>10.2}{:>10.3}{:>10.3}{:>20}",
            format!("ar(1) noise, seed {seed}"),
            fit.params.t_c,
            fit.params.m,
            fit.params.omega,
            fmt_float(fit.rmse)
        );
    }

    // The fit is bitwise reproducible for a fixed seed: rerunning the
    // same configuration yields the identical minimum.
    let again = fit_lppl(&clean, &FitConfig::default())?;
    let repeat = fit_lppl(&clean, &FitConfig::default())?;
    assert_eq!(again.params.t_c.to_bits(), repeat.params.t_c.to_bits());
    println!();
    println!("repeat fit with the same seed is bitwise identical");
    Ok(())
}
