//! Evaluate forecast quality and exercise the five-term training
//! objective with its analytic gradient.
//!
//! The combined loss blends pointwise accuracy (Huber), co-movement
//! (correlation and R^2), day-over-day change agreement (consistency),
//! and a curvature penalty on the predictions (smoothness). Any external
//! forecaster minimizing it needs the gradient; this example checks the
//! analytic one against finite differences and takes a few descent steps.
//!
//! Run with: cargo run --release --example forecast_objectives

use hlppl::forecast::{combined_loss, eval_metrics, loss_gradient, LossWeights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> hlppl::Result<()> {
    // A smooth "actual" score path and two candidate predictions.
    let n = 40;
    let actual: Vec<f64> = (0..n)
        .map(|t| 0.7 * (t as f64 / 9.0).sin() + 0.1)
        .collect();
    let close: Vec<f64> = actual.iter().map(|a| a * 0.9 + 0.03).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noisy: Vec<f64> = actual
        .iter()
        .map(|a| a + rng.random_range(-0.4..0.4))
        .collect();

    println!("{:<18}{:>12}{:>12}{:>12}{:>14}", "prediction", "mse", "mae", "rmse", "correlation");
    for (label, p) in [("close tracker", &close), ("noisy tracker", &noisy)] {
        let m = eval_metrics(p, &actual)?;
        println!(
            "{:<18}{:>12.5}{:>12.5}{:>12.5}{:>14.4}",
            label,
            m.mse,
            m.mae,
            m.rmse,
            m.correlation.expect("non-constant series")
        );
    }

    let weights = LossWeights::default();
    println!();
    println!(
        "{:<18}{:>10}{:>10}{:>10}{:>13}{:>12}{:>10}",
        "prediction", "huber", "corr", "r_sq", "consistency", "smoothness", "total"
    );
    for (label, p) in [("close tracker", &close), ("noisy tracker", &noisy)] {
        let loss = combined_loss(p, &actual, &weights)?;
        println!(
            "{:<18}{:>10.5}{:>10.5}{:>10.5}{:>13.5}{:>12.5}{:>10.5}",
            label, loss.huber, loss.correlation, loss.r_squared, loss.consistency,
            loss.smoothness, loss.total
        );
    }

    // The analytic gradient agrees with central finite differences.
    let grad = loss_gradient(&noisy, &actual, &weights)?;
    let step = 1e-5;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut up = noisy.clone();
        up[i] += step;
        let mut down = noisy.clone();
        down[i] -= step;
        let fd = (combined_loss(&up, &actual, &weights)?.total
            - combined_loss(&down, &actual, &weights)?.total)
            / (2.0 * step);
        worst = worst.max((grad[i] - fd).abs());
    }
    println!();
    println!("max |analytic - finite difference| over {n} components: {worst:.2e}");

    // Plain gradient descent shrinks the loss step after step.
    let mut current = noisy.clone();
    let rate = 0.5;
    println!();
    println!("gradient descent on the noisy tracker:");
    for iteration in 0..6 {
        let loss = combined_loss(&current, &actual, &weights)?;
        println!("  step {iteration}: total {:.5}", loss.total);
        let grad = loss_gradient(&current, &actual, &weights)?;
        for (value, g) in current.iter_mut().zip(&grad) {
            *value -= rate * g;
        }
    }
    Ok(())
}
