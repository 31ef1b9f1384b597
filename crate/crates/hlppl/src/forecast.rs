//! Multi-horizon score forecasts, evaluation metrics, and the five-term
//! combined training objective with an analytic gradient.
//!
//! Any external forecaster can inject predictions through the forecasts
//! CSV (`date,h1..h5`); the built-in baseline is persistence with AR(1)
//! decay, `B(t+h) = score(t) * (1 - alpha)^h`, which exercises the whole
//! multi-horizon machinery deterministically.
//!
//! The combined loss is
//!
//! ```text
//! L = l1*Huber + l2*(1 - corr) + l3*(1 - R^2)
//!   + l4*mean((d pred - d actual)^2) + l5*mean((d^2 pred)^2)
//! ```
//!
//! with first/second differences `d`/`d^2`. The gradient with respect to
//! the predictions is exact and finite-difference-checked in the tests.

use chrono::NaiveDate;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{header_index, open_reader, parse_field};
use crate::residuals::ar1_slope;
use crate::score::ScoreSeries;
use crate::serialize::fmt_float;

/// Default admissible prediction range: the score's attainable span under
/// default component weights, with headroom.
pub const DEFAULT_FORECAST_BOUND: (f64, f64) = (-2.0, 2.0);

/// Predictions for horizons 1..=5 on a shared calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    pub dates: Vec<NaiveDate>,
    /// predictions[h-1][t] = predicted score for date t + h.
    pub predictions: [Vec<f64>; 5],
    /// Identifier of the producing forecaster.
    pub source: String,
    pub bound: (f64, f64),
}

impl ForecastSet {
    pub fn new(
        dates: Vec<NaiveDate>,
        predictions: [Vec<f64>; 5],
        source: &str,
        bound: (f64, f64),
    ) -> Result<ForecastSet> {
        let set = ForecastSet {
            dates,
            predictions,
            source: source.to_string(),
            bound,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bound.0 < self.bound.1) {
            return Err(Error::Config(format!(
                "forecast bound ({}, {}) not ordered",
                self.bound.0, self.bound.1
            )));
        }
        for (h, preds) in self.predictions.iter().enumerate() {
            if preds.len() != self.dates.len() {
                return Err(Error::Contract(format!(
                    "horizon {} has {} predictions for {} dates",
                    h + 1,
                    preds.len(),
                    self.dates.len()
                )));
            }
            for (t, p) in preds.iter().enumerate() {
                if !p.is_finite() || *p < self.bound.0 || *p > self.bound.1 {
                    return Err(Error::Validation(format!(
                        "prediction {p} at {} horizon {} outside [{}, {}]",
                        self.dates[t],
                        h + 1,
                        self.bound.0,
                        self.bound.1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Prediction series for one horizon in 1..=5.
    pub fn horizon(&self, h: u8) -> Result<&[f64]> {
        if !(1..=5).contains(&h) {
            return Err(Error::Contract(format!("horizon {h} outside 1..=5")));
        }
        Ok(&self.predictions[(h - 1) as usize])
    }
}

/// Persistence-with-decay prediction for one horizon:
/// `score(t) * (1 - alpha)^h` with the AR(1) alpha clamped to [0, 1].
///
/// An identically zero score series forecasts zero without needing the
/// (then-degenerate) regression.
pub fn baseline_forecast(scores: &ScoreSeries, h: u8) -> Result<Vec<f64>> {
    if !(1..=5).contains(&h) {
        return Err(Error::Contract(format!("horizon {h} outside 1..=5")));
    }
    if scores.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "baseline forecast needs at least 2 scores, got {}",
            scores.len()
        )));
    }
    let alpha = match ar1_slope(&scores.score) {
        Ok(a) => a.clamp(0.0, 1.0),
        Err(Error::Degenerate(_)) if scores.score.iter().all(|s| s.abs() < 1e-12) => 0.0,
        Err(e) => return Err(e),
    };
    let decay = (1.0 - alpha).powi(h as i32);
    Ok(scores.score.iter().map(|s| s * decay).collect())
}

/// Baseline predictions for all five horizons, optionally clamped to the
/// strict [-1, 1] range before any threshold logic sees them.
pub fn baseline_forecast_set(scores: &ScoreSeries, strict_range: bool) -> Result<ForecastSet> {
    let mut predictions: [Vec<f64>; 5] = Default::default();
    for h in 1..=5u8 {
        let mut preds = baseline_forecast(scores, h)?;
        if strict_range {
            for p in preds.iter_mut() {
                *p = p.clamp(-1.0, 1.0);
            }
        }
        predictions[(h - 1) as usize] = preds;
    }
    let bound = if strict_range {
        (-1.0, 1.0)
    } else {
        DEFAULT_FORECAST_BOUND
    };
    ForecastSet::new(scores.dates.clone(), predictions, "ar1-decay", bound)
}

/// Write `date,h1,h2,h3,h4,h5` rows.
pub fn write_forecasts(path: &Path, set: &ForecastSet) -> Result<()> {
    let mut out = String::from("date,h1,h2,h3,h4,h5\n");
    for t in 0..set.len() {
        out.push_str(&set.dates[t].to_string());
        for h in 0..5 {
            out.push(',');
            out.push_str(&fmt_float(set.predictions[h][t]));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a forecasts CSV produced by [`write_forecasts`] or any external
/// forecaster honoring the same schema.
pub fn load_forecasts(path: impl AsRef<Path>, bound: (f64, f64)) -> Result<ForecastSet> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let date_idx = header_index(&headers, "date", path)?;
    let mut horizon_idx = [0usize; 5];
    for h in 1..=5usize {
        horizon_idx[h - 1] = header_index(&headers, &format!("h{h}"), path)?;
    }
    let mut dates = Vec::new();
    let mut predictions: [Vec<f64>; 5] = Default::default();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        dates.push(parse_field::<NaiveDate>(&record, date_idx, "date", path)?);
        for (h, column) in horizon_idx.iter().enumerate() {
            predictions[h].push(parse_field::<f64>(&record, *column, "forecast", path)?);
        }
    }
    ForecastSet::new(dates, predictions, &format!("csv:{}", path.display()), bound)
}

/// Standard forecast-accuracy metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    /// Pearson correlation; None when either series is constant.
    pub correlation: Option<f64>,
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
}

fn centered(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| v - mean).collect(), mean)
}

fn pearson(predicted: &[f64], actual: &[f64]) -> Option<f64> {
    let (p, _) = centered(predicted);
    let (a, _) = centered(actual);
    let sp = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sa = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if sp == 0.0 || sa == 0.0 {
        return None;
    }
    let cross: f64 = p.iter().zip(&a).map(|(x, y)| x * y).sum();
    Some(cross / (sp * sa))
}

/// Pointwise accuracy of predictions against realized values.
pub fn eval_metrics(predicted: &[f64], actual: &[f64]) -> Result<EvalMetrics> {
    if predicted.len() != actual.len() {
        return Err(Error::Contract(format!(
            "{} predictions vs {} actuals",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.len() < 2 {
        return Err(Error::InsufficientData(
            "evaluation needs at least 2 points".into(),
        ));
    }
    let n = predicted.len() as f64;
    let mse = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum::<f64>()
        / n;
    let mae = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).abs())
        .sum::<f64>()
        / n;
    Ok(EvalMetrics {
        correlation: pearson(predicted, actual),
        mse,
        mae,
        rmse: mse.sqrt(),
    })
}

/// Term weights of the combined objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    pub huber_delta: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda1: 1.0,
            lambda2: 0.5,
            lambda3: 0.5,
            lambda4: 0.5,
            lambda5: 0.1,
            huber_delta: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let lambdas = [
            self.lambda1,
            self.lambda2,
            self.lambda3,
            self.lambda4,
            self.lambda5,
        ];
        if lambdas.iter().any(|l| *l < 0.0) {
            return Err(Error::Config("loss weights must be non-negative".into()));
        }
        if lambdas.iter().all(|l| *l == 0.0) {
            return Err(Error::Config("at least one loss weight must be positive".into()));
        }
        if self.huber_delta <= 0.0 {
            return Err(Error::Config(format!(
                "huber_delta must be > 0, got {}",
                self.huber_delta
            )));
        }
        Ok(())
    }
}

/// Weighted contributions of the five terms; they sum to `total`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub huber: f64,
    pub correlation: f64,
    pub r_squared: f64,
    pub consistency: f64,
    pub smoothness: f64,
    pub total: f64,
    /// True when a constant series zeroed the correlation or R² term.
    pub degenerate: bool,
}

fn huber(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta {
        0.5 * r * r
    } else {
        delta * (r.abs() - 0.5 * delta)
    }
}

fn huber_psi(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta {
        r
    } else {
        delta * r.signum()
    }
}

fn check_loss_inputs(predicted: &[f64], actual: &[f64], weights: &LossWeights) -> Result<()> {
    weights.validate()?;
    if predicted.len() != actual.len() {
        return Err(Error::Contract(format!(
            "{} predictions vs {} actuals",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.len() < 3 {
        return Err(Error::InsufficientData(
            "combined loss needs at least 3 points".into(),
        ));
    }
    Ok(())
}

/// Evaluate the five-term objective with a per-term breakdown.
pub fn combined_loss(
    predicted: &[f64],
    actual: &[f64],
    weights: &LossWeights,
) -> Result<LossBreakdown> {
    check_loss_inputs(predicted, actual, weights)?;
    let n = predicted.len();
    let mut degenerate = false;

    let huber_term = weights.lambda1
        * predicted
            .iter()
            .zip(actual)
            .map(|(p, a)| huber(p - a, weights.huber_delta))
            .sum::<f64>()
        / n as f64;

    let correlation_term = match pearson(predicted, actual) {
        Some(rho) => weights.lambda2 * (1.0 - rho),
        None => {
            degenerate = true;
            0.0
        }
    };

    let (a_centered, _) = centered(actual);
    let sst: f64 = a_centered.iter().map(|x| x * x).sum();
    let r_squared_term = if sst > 0.0 {
        let sse: f64 = predicted
            .iter()
            .zip(actual)
            .map(|(p, a)| (p - a) * (p - a))
            .sum();
        weights.lambda3 * (sse / sst)
    } else {
        degenerate = true;
        0.0
    };

    let m = n - 1;
    let consistency_term = weights.lambda4
        * (1..n)
            .map(|j| {
                let d = (predicted[j] - predicted[j - 1]) - (actual[j] - actual[j - 1]);
                d * d
            })
            .sum::<f64>()
        / m as f64;

    let m2 = n - 2;
    let smoothness_term = weights.lambda5
        * (1..n - 1)
            .map(|j| {
                let s = predicted[j + 1] - 2.0 * predicted[j] + predicted[j - 1];
                s * s
            })
            .sum::<f64>()
        / m2 as f64;

    Ok(LossBreakdown {
        huber: huber_term,
        correlation: correlation_term,
        r_squared: r_squared_term,
        consistency: consistency_term,
        smoothness: smoothness_term,
        total: huber_term + correlation_term + r_squared_term + consistency_term + smoothness_term,
        degenerate,
    })
}

/// Exact gradient of [`combined_loss`] with respect to the predictions.
/// Degenerate correlation/R² terms contribute nothing, matching their
/// zeroed values.
pub fn loss_gradient(predicted: &[f64], actual: &[f64], weights: &LossWeights) -> Result<Vec<f64>> {
    check_loss_inputs(predicted, actual, weights)?;
    let n = predicted.len();
    let mut grad = vec![0.0_f64; n];

    for i in 0..n {
        grad[i] += weights.lambda1 * huber_psi(predicted[i] - actual[i], weights.huber_delta)
            / n as f64;
    }

    let (p_centered, _) = centered(predicted);
    let (a_centered, _) = centered(actual);
    let sp = p_centered.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sa = a_centered.iter().map(|x| x * x).sum::<f64>().sqrt();
    if sp > 0.0 && sa > 0.0 {
        let rho = p_centered
            .iter()
            .zip(&a_centered)
            .map(|(x, y)| x * y)
            .sum::<f64>()
            / (sp * sa);
        for i in 0..n {
            let drho = a_centered[i] / (sp * sa) - rho * p_centered[i] / (sp * sp);
            grad[i] -= weights.lambda2 * drho;
        }
    }

    let sst: f64 = a_centered.iter().map(|x| x * x).sum();
    if sst > 0.0 {
        for i in 0..n {
            grad[i] += weights.lambda3 * 2.0 * (predicted[i] - actual[i]) / sst;
        }
    }

    let scale4 = 2.0 * weights.lambda4 / (n - 1) as f64;
    for j in 1..n {
        let d = (predicted[j] - predicted[j - 1]) - (actual[j] - actual[j - 1]);
        grad[j] += scale4 * d;
        grad[j - 1] -= scale4 * d;
    }

    let scale5 = 2.0 * weights.lambda5 / (n - 2) as f64;
    for j in 1..n - 1 {
        let s = predicted[j + 1] - 2.0 * predicted[j] + predicted[j - 1];
        grad[j + 1] += scale5 * s;
        grad[j] -= 2.0 * scale5 * s;
        grad[j - 1] += scale5 * s;
    }

    Ok(grad)
}
