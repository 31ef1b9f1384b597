//! Residuals around the fitted trajectory: computation, AR(1) dynamics,
//! and normalization to [-1, 1].
//!
//! The residual is `eps(t) = ln p(t) - lppl(t)`. Its dynamics follow the
//! mean-reverting recursion `eps(t+1) = (1 - alpha)*eps(t) + u_t`, i.e.
//! `d_eps(t) = -alpha*eps(t) + u_t`, so `alpha` comes from a no-intercept
//! regression of the one-day change on the negated level.

use chrono::NaiveDate;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::PriceSeries;
use crate::lppl::{lppl_eval, LpplFit};
use crate::serialize::fmt_float;

/// How residuals are scaled into [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// Divide by the maximum |eps| over the whole window (default).
    Global,
    /// Divide eps(t) by the maximum |eps| over s <= t.
    Running,
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizationMode::Global => write!(f, "global"),
            NormalizationMode::Running => write!(f, "running"),
        }
    }
}

impl FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "global" => Ok(NormalizationMode::Global),
            "running" => Ok(NormalizationMode::Running),
            other => Err(Error::Config(format!(
                "unknown normalization mode '{other}' (expected global or running)"
            ))),
        }
    }
}

/// Residuals over a window; `epsilon_norm` is filled by
/// [`normalize_residuals`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub dates: Vec<NaiveDate>,
    pub epsilon: Vec<f64>,
    pub epsilon_norm: Option<Vec<f64>>,
    pub normalization_mode: Option<NormalizationMode>,
}

impl ResidualSeries {
    pub fn len(&self) -> usize {
        self.epsilon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilon.is_empty()
    }
}

/// Mean-reversion diagnostics of the residual path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Estimate {
    /// Mean-reversion rate per day.
    pub alpha: f64,
    /// Standard deviation of the regression shocks u_t.
    pub noise_std: f64,
    /// ln(2)/alpha days; only defined for alpha > 0.
    pub half_life: Option<f64>,
    /// Uncentered R² of the no-intercept regression.
    pub r_squared: f64,
}

/// Observed log price minus the fitted trajectory, day by day.
///
/// The fit must come from the same window (enforced by its recorded
/// calendar bounds), so day indices line up.
pub fn compute_residuals(series: &PriceSeries, fit: &LpplFit) -> Result<ResidualSeries> {
    let n = series.len();
    let window = (series.dates[0], series.dates[n - 1]);
    if fit.window != window {
        return Err(Error::Contract(format!(
            "fit window {} .. {} does not match series window {} .. {}",
            fit.window.0, fit.window.1, window.0, window.1
        )));
    }
    let mut epsilon = Vec::with_capacity(n);
    for (i, lp) in series.log_close().into_iter().enumerate() {
        epsilon.push(lp - lppl_eval(&fit.params, i as f64)?);
    }
    Ok(ResidualSeries {
        dates: series.dates.clone(),
        epsilon,
        epsilon_norm: None,
        normalization_mode: None,
    })
}

/// Threshold below which a max-|eps| scale counts as zero.
const DEGENERATE_SCALE: f64 = 1e-12;

/// Scale residuals into [-1, 1] by the chosen maximum-deviation rule.
///
/// An all-zero residual series has no meaningful scale and is rejected. In
/// running mode, leading days where the running maximum is still zero map
/// to 0.0 (the residual there is itself zero).
pub fn normalize_residuals(
    residuals: &ResidualSeries,
    mode: NormalizationMode,
) -> Result<ResidualSeries> {
    if residuals.is_empty() {
        return Err(Error::InsufficientData("empty residual series".into()));
    }
    let global_max = residuals
        .epsilon
        .iter()
        .fold(0.0_f64, |acc, e| acc.max(e.abs()));
    if global_max < DEGENERATE_SCALE {
        return Err(Error::Degenerate(
            "all residuals are zero; normalization undefined".into(),
        ));
    }
    let epsilon_norm = match mode {
        NormalizationMode::Global => residuals.epsilon.iter().map(|e| e / global_max).collect(),
        NormalizationMode::Running => {
            let mut running_max = 0.0_f64;
            residuals
                .epsilon
                .iter()
                .map(|e| {
                    running_max = running_max.max(e.abs());
                    if running_max < DEGENERATE_SCALE {
                        0.0
                    } else {
                        e / running_max
                    }
                })
                .collect()
        }
    };
    Ok(ResidualSeries {
        dates: residuals.dates.clone(),
        epsilon: residuals.epsilon.clone(),
        epsilon_norm: Some(epsilon_norm),
        normalization_mode: Some(mode),
    })
}

/// No-intercept OLS slope of the one-day change on the negated level:
/// `alpha = -sum(eps * d_eps) / sum(eps^2)` over consecutive pairs.
///
/// Shared by the residual diagnostics and the score-decay forecaster.
pub fn ar1_slope(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "AR(1) regression needs at least 2 observations, got {}",
            values.len()
        )));
    }
    let mut cross = 0.0;
    let mut level_sq = 0.0;
    for pair in values.windows(2) {
        let delta = pair[1] - pair[0];
        cross += pair[0] * delta;
        level_sq += pair[0] * pair[0];
    }
    if level_sq < DEGENERATE_SCALE * DEGENERATE_SCALE {
        return Err(Error::Degenerate(
            "AR(1) regressor has zero variance".into(),
        ));
    }
    Ok(-cross / level_sq)
}

/// Minimum observations for the AR(1) diagnostic fit.
pub const MIN_AR1_OBS: usize = 30;

/// Estimate the residual mean-reversion rate and shock scale.
pub fn fit_ar1(residuals: &ResidualSeries) -> Result<Ar1Estimate> {
    let eps = &residuals.epsilon;
    let n = eps.len();
    if n < MIN_AR1_OBS {
        return Err(Error::InsufficientData(format!(
            "AR(1) fit needs at least {MIN_AR1_OBS} residuals, got {n}"
        )));
    }
    let first = eps[0];
    if eps.iter().all(|e| *e == first) {
        return Err(Error::Degenerate(
            "constant residual series; AR(1) dynamics undefined".into(),
        ));
    }
    let alpha = ar1_slope(eps)?;

    let pairs = n - 1;
    let mut shock_sq = 0.0;
    let mut delta_sq = 0.0;
    for pair in eps.windows(2) {
        let delta = pair[1] - pair[0];
        let u = delta + alpha * pair[0];
        shock_sq += u * u;
        delta_sq += delta * delta;
    }
    // One slope parameter was estimated from `pairs` observations.
    let noise_std = if pairs > 1 {
        (shock_sq / (pairs - 1) as f64).sqrt()
    } else {
        0.0
    };
    let r_squared = if delta_sq > 0.0 {
        1.0 - shock_sq / delta_sq
    } else {
        1.0
    };
    Ok(Ar1Estimate {
        alpha,
        noise_std,
        half_life: (alpha > 0.0).then(|| std::f64::consts::LN_2 / alpha),
        r_squared,
    })
}

/// Write `date,epsilon,epsilon_norm` rows; the series must be normalized.
pub fn write_residuals(path: &Path, residuals: &ResidualSeries) -> Result<()> {
    let norm = residuals.epsilon_norm.as_ref().ok_or_else(|| {
        Error::Contract("residual series must be normalized before serialization".into())
    })?;
    let mut out = String::from("date,epsilon,epsilon_norm\n");
    for ((date, eps), en) in residuals.dates.iter().zip(&residuals.epsilon).zip(norm) {
        out.push_str(&format!("{date},{},{}\n", fmt_float(*eps), fmt_float(*en)));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lppl::LpplParams;
    use crate::synth;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> LpplParams {
        LpplParams {
            a: 3.0,
            b: -0.4,
            c: 0.05,
            t_c: 400.0,
            m: 0.5,
            omega: 8.0,
            phi: 0.5,
        }
    }

    fn fit_for(series: &PriceSeries, p: LpplParams) -> LpplFit {
        LpplFit {
            params: p,
            sse: 0.0,
            rmse: 0.0,
            window: (series.dates[0], series.dates[series.len() - 1]),
            restarts_used: 0,
        }
    }

    fn bare(epsilon: Vec<f64>) -> ResidualSeries {
        let dates = synth::business_days("2020-01-02".parse().unwrap(), epsilon.len());
        ResidualSeries {
            dates,
            epsilon,
            epsilon_norm: None,
            normalization_mode: None,
        }
    }

    #[test]
    fn exact_series_gives_zero_residuals() {
        let p = params();
        let series = synth::lppl_price_series("T", &p, 300, 0.0, 0.0, 1).unwrap();
        let res = compute_residuals(&series, &fit_for(&series, p)).unwrap();
        assert!(res.epsilon.iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn constant_offset_shows_up_unchanged() {
        let p = params();
        let series = synth::lppl_price_series("T", &p, 200, 0.0, 0.0, 1).unwrap();
        let shifted: Vec<f64> = series.close.iter().map(|c| c * 0.1_f64.exp()).collect();
        let shifted = PriceSeries::new("T", series.dates.clone(), shifted, None).unwrap();
        let res = compute_residuals(&shifted, &fit_for(&shifted, p)).unwrap();
        assert!(res.epsilon.iter().all(|e| (e - 0.1).abs() < 1e-12));
    }

    #[test]
    fn single_spike_is_pointwise() {
        let p = params();
        let series = synth::lppl_price_series("T", &p, 150, 0.0, 0.0, 1).unwrap();
        let mut close = series.close.clone();
        close[70] *= 0.3_f64.exp();
        let spiked = PriceSeries::new("T", series.dates.clone(), close, None).unwrap();
        let res = compute_residuals(&spiked, &fit_for(&spiked, p)).unwrap();
        for (i, e) in res.epsilon.iter().enumerate() {
            if i == 70 {
                assert!((e - 0.3).abs() < 1e-12);
            } else {
                assert!(e.abs() < 1e-12, "day {i}: {e}");
            }
        }
    }

    #[test]
    fn window_mismatch_is_a_contract_error() {
        let p = params();
        let series = synth::lppl_price_series("T", &p, 150, 0.0, 0.0, 1).unwrap();
        let mut fit = fit_for(&series, p);
        fit.window.1 = fit.window.1.succ_opt().unwrap();
        let err = compute_residuals(&series, &fit).unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
    }

    #[test]
    fn global_normalization_example() {
        let res = normalize_residuals(&bare(vec![0.5, -1.0, 0.25]), NormalizationMode::Global)
            .unwrap();
        assert_eq!(res.epsilon_norm.unwrap(), vec![0.5, -1.0, 0.25]);
    }

    #[test]
    fn running_normalization_example() {
        let res = normalize_residuals(&bare(vec![0.5, -1.0, 0.25]), NormalizationMode::Running)
            .unwrap();
        assert_eq!(res.epsilon_norm.unwrap(), vec![1.0, -1.0, 0.25]);
    }

    #[test]
    fn single_element_saturates() {
        for mode in [NormalizationMode::Global, NormalizationMode::Running] {
            let res = normalize_residuals(&bare(vec![-0.2]), mode).unwrap();
            assert_eq!(res.epsilon_norm.unwrap(), vec![-1.0]);
        }
    }

    #[test]
    fn all_zero_residuals_are_degenerate() {
        for mode in [NormalizationMode::Global, NormalizationMode::Running] {
            let err = normalize_residuals(&bare(vec![0.0; 10]), mode).unwrap_err();
            assert!(matches!(err, Error::Degenerate(_)), "{err}");
        }
    }

    #[test]
    fn running_mode_zero_prefix_maps_to_zero() {
        let res = normalize_residuals(&bare(vec![0.0, 0.0, 0.4, -0.8]), NormalizationMode::Running)
            .unwrap();
        assert_eq!(res.epsilon_norm.unwrap(), vec![0.0, 0.0, 1.0, -1.0]);
    }

    #[test]
    fn alternating_residuals_give_alpha_two() {
        let eps: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.3 } else { -0.3 }).collect();
        let est = fit_ar1(&bare(eps)).unwrap();
        assert!((est.alpha - 2.0).abs() < 1e-12, "alpha {}", est.alpha);
        assert!(est.noise_std < 1e-12);
        assert!(est.half_life.is_some());
    }

    #[test]
    fn constant_residuals_are_degenerate_for_ar1() {
        let err = fit_ar1(&bare(vec![0.7; 40])).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)), "{err}");
    }

    #[test]
    fn short_series_is_insufficient_for_ar1() {
        let err = fit_ar1(&bare(vec![0.1, -0.2, 0.3])).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)), "{err}");
    }

    #[test]
    fn ar1_recovery_from_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let eps = synth::ar1_residuals(0.10, 0.02, 2000, &mut rng);
        let est = fit_ar1(&bare(eps)).unwrap();
        assert!(
            (0.07..=0.13).contains(&est.alpha),
            "alpha {} outside recovery band",
            est.alpha
        );
        assert!((est.noise_std - 0.02).abs() < 0.005);
        let half_life = est.half_life.unwrap();
        assert!((half_life - std::f64::consts::LN_2 / est.alpha).abs() < 1e-12);
    }

    #[test]
    fn white_noise_gives_alpha_one_r2_half() {
        use rand_distr::Distribution;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let eps: Vec<f64> = (0..20000).map(|_| normal.sample(&mut rng)).collect();
        let est = fit_ar1(&bare(eps)).unwrap();
        assert!((est.alpha - 1.0).abs() < 0.05, "alpha {}", est.alpha);
        assert!((est.r_squared - 0.5).abs() < 0.05, "r2 {}", est.r_squared);
    }

    #[test]
    fn simulated_pipeline_recovers_alpha() {
        let p = LpplParams {
            t_c: 2200.0,
            ..params()
        };
        let series = synth::lppl_price_series("T", &p, 2000, 0.10, 0.02, 23).unwrap();
        let res = compute_residuals(&series, &fit_for(&series, p)).unwrap();
        let est = fit_ar1(&res).unwrap();
        assert!(
            (0.07..=0.13).contains(&est.alpha),
            "alpha {} outside recovery band",
            est.alpha
        );
    }

    proptest! {
        #[test]
        fn normalization_bounds_and_signs(
            eps in proptest::collection::vec(-1e6_f64..1e6, 1..200),
            mode_running in any::<bool>(),
        ) {
            prop_assume!(eps.iter().any(|e| e.abs() >= 1e-9));
            let mode = if mode_running {
                NormalizationMode::Running
            } else {
                NormalizationMode::Global
            };
            let res = normalize_residuals(&bare(eps.clone()), mode).unwrap();
            let norm = res.epsilon_norm.unwrap();
            for (e, n) in eps.iter().zip(&norm) {
                prop_assert!(n.abs() <= 1.0 + 1e-15, "|{n}| > 1");
                prop_assert!(
                    (n.signum() - e.signum()).abs() < f64::EPSILON || *n == 0.0 && *e == 0.0,
                    "sign flip: eps {e} -> norm {n}"
                );
            }
        }

        #[test]
        fn normalization_scale_invariance(
            eps in proptest::collection::vec(-1e3_f64..1e3, 1..100),
            scale in 1e-3_f64..1e3,
            mode_running in any::<bool>(),
        ) {
            prop_assume!(eps.iter().any(|e| e.abs() >= 1e-6));
            let mode = if mode_running {
                NormalizationMode::Running
            } else {
                NormalizationMode::Global
            };
            let base = normalize_residuals(&bare(eps.clone()), mode).unwrap();
            let scaled_eps: Vec<f64> = eps.iter().map(|e| e * scale).collect();
            let scaled = normalize_residuals(&bare(scaled_eps), mode).unwrap();
            let (a, b) = (base.epsilon_norm.unwrap(), scaled.epsilon_norm.unwrap());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9, "{x} vs {y} under scale {scale}");
            }
        }
    }
}
