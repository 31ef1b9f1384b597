//! Log-periodic power law model: evaluation and fitting.
//!
//! The model for the log price is
//!
//! ```text
//! ln p(t) = A + B*(t_c - t)^m + C*(t_c - t)^m * cos(omega*ln(t_c - t) + phi)
//! ```
//!
//! with critical time `t_c`, exponent `m` in (0,1), and angular frequency
//! `omega` > 0. Time is the trading-day index within the fitted window,
//! window start = 0, so calendar gaps cannot distort `ln(t_c - t)`.
//!
//! Fitting decomposes `C*cos(.+phi) = C1*cos(.) + C2*sin(.)`, which makes
//! the model linear in (A, B, C1, C2) once (t_c, m, omega) are fixed. The
//! outer problem over (t_c, m, omega) is solved by multi-start seeding plus
//! bounded Nelder-Mead refinement, deterministic for a given seed.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::PriceSeries;

/// Fitted model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpplParams {
    /// Baseline log-price level.
    pub a: f64,
    /// Power-law amplitude.
    pub b: f64,
    /// Oscillation amplitude.
    pub c: f64,
    /// Critical time as a real-valued day index.
    pub t_c: f64,
    /// Critical exponent, in (0, 1).
    pub m: f64,
    /// Log-periodic angular frequency, > 0.
    pub omega: f64,
    /// Oscillation phase in radians.
    pub phi: f64,
}

impl LpplParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m < 1.0) {
            return Err(Error::Validation(format!("m = {} outside (0,1)", self.m)));
        }
        if self.omega <= 0.0 {
            return Err(Error::Validation(format!("omega = {} not > 0", self.omega)));
        }
        Ok(())
    }

    /// Cosine-basis coefficients: C1 = C*cos(phi), C2 = -C*sin(phi).
    pub fn c1c2(&self) -> (f64, f64) {
        (self.c * self.phi.cos(), -self.c * self.phi.sin())
    }
}

/// Evaluate the model log price at day index `t`.
///
/// Fails with a domain error at or past the singularity (`t >= t_c`).
pub fn lppl_eval(params: &LpplParams, t: f64) -> Result<f64> {
    let dt = params.t_c - t;
    if dt <= 0.0 {
        return Err(Error::Domain(format!(
            "t = {t} at or past critical time t_c = {}",
            params.t_c
        )));
    }
    let dt_m = dt.powf(params.m);
    let osc = (params.omega * dt.ln() + params.phi).cos();
    Ok(params.a + params.b * dt_m + params.c * dt_m * osc)
}

/// Result of the linear subproblem at fixed (t_c, m, omega).
#[derive(Debug, Clone, Copy)]
pub struct LinearSubfit {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    /// Sum of squared log-price residuals of the OLS solution.
    pub sse: f64,
}

impl LinearSubfit {
    pub fn c_amplitude(&self) -> f64 {
        self.c1.hypot(self.c2)
    }

    pub fn phi(&self) -> f64 {
        (-self.c2).atan2(self.c1)
    }
}

/// Ordinary least squares of `log_prices[i]` on the regressors
/// `{1, f, f*cos(omega*ln(t_c - i)), f*sin(omega*ln(t_c - i))}` with
/// `f = (t_c - i)^m`, day index `i` = slice position.
pub fn linear_subfit(t_c: f64, m: f64, omega: f64, log_prices: &[f64]) -> Result<LinearSubfit> {
    let n = log_prices.len();
    if n < 4 {
        return Err(Error::Degenerate(format!(
            "window of {n} rows cannot identify 4 linear coefficients"
        )));
    }
    if t_c <= (n - 1) as f64 {
        return Err(Error::Domain(format!(
            "t_c = {t_c} not beyond the window end {}",
            n - 1
        )));
    }

    let mut design = nalgebra::DMatrix::<f64>::zeros(n, 4);
    let mut y = nalgebra::DVector::<f64>::zeros(n);
    for i in 0..n {
        let dt = t_c - i as f64;
        let f = dt.powf(m);
        let theta = omega * dt.ln();
        design[(i, 0)] = 1.0;
        design[(i, 1)] = f;
        design[(i, 2)] = f * theta.cos();
        design[(i, 3)] = f * theta.sin();
        y[i] = log_prices[i];
    }

    let qr = design.clone().qr();
    let r = qr.r();
    let max_diag = (0..4).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    if max_diag == 0.0 || (0..4).any(|i| r[(i, i)].abs() < 1e-12 * max_diag) {
        return Err(Error::Degenerate("rank-deficient design matrix".into()));
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Degenerate("rank-deficient design matrix".into()))?;

    let residual = &y - design * &beta;
    let sse = residual.dot(&residual);
    Ok(LinearSubfit {
        a: beta[0],
        b: beta[1],
        c1: beta[2],
        c2: beta[3],
        sse,
    })
}

/// Multi-start fitting configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Number of multi-start seeds.
    pub restarts: u32,
    /// (min, max) t_c offsets beyond the window end, in days.
    /// `None` means (1, 0.5 * window length).
    pub t_c_search: Option<(f64, f64)>,
    pub m_bounds: (f64, f64),
    pub omega_bounds: (f64, f64),
    /// Local-search iteration cap per restart.
    pub max_iterations: u32,
    /// Relative sse flatness at which the local search stops.
    pub convergence_tolerance: f64,
    pub rng_seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            restarts: 32,
            t_c_search: None,
            m_bounds: (0.01, 0.99),
            omega_bounds: (2.0, 25.0),
            max_iterations: 500,
            convergence_tolerance: 1e-9,
            rng_seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::Config("restarts must be >= 1".into()));
        }
        if let Some((lo, hi)) = self.t_c_search {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::Config(format!("t_c_search ({lo}, {hi}) not ordered")));
            }
        }
        let (m_lo, m_hi) = self.m_bounds;
        if !(m_lo > 0.0 && m_hi < 1.0 && m_lo < m_hi) {
            return Err(Error::Config(format!(
                "m_bounds ({m_lo}, {m_hi}) must be ordered within (0,1)"
            )));
        }
        let (w_lo, w_hi) = self.omega_bounds;
        if !(w_lo > 0.0 && w_lo < w_hi) {
            return Err(Error::Config(format!(
                "omega_bounds ({w_lo}, {w_hi}) must be positive and ordered"
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        if self.convergence_tolerance <= 0.0 {
            return Err(Error::Config("convergence_tolerance must be > 0".into()));
        }
        Ok(())
    }

    /// Absolute t_c bounds for a window of `n` days (last index n-1).
    pub fn t_c_bounds(&self, n: usize) -> (f64, f64) {
        let end = (n - 1) as f64;
        let (lo, hi) = self.t_c_search.unwrap_or((1.0, 0.5 * n as f64));
        (end + lo, end + hi)
    }
}

/// A fitted window: parameters plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LpplFit {
    pub params: LpplParams,
    /// Sum of squared log-price residuals.
    pub sse: f64,
    /// sqrt(sse / n).
    pub rmse: f64,
    /// Calendar bounds of the fitted window.
    pub window: (NaiveDate, NaiveDate),
    /// Restarts that produced a usable candidate.
    pub restarts_used: u32,
}

/// Minimum window length for fitting eligibility.
pub const MIN_FIT_WINDOW: usize = 100;

struct Candidate {
    sse: f64,
    t_c: f64,
    index: u32,
    sub: LinearSubfit,
    m: f64,
    omega: f64,
}

/// Fit the model to a price window by multi-start local search.
///
/// Each restart draws (t_c, m, omega) uniformly within bounds from a
/// stream derived from `rng_seed` and the restart index, solves the linear
/// subproblem, and refines the triple by bounded Nelder-Mead on the sse.
/// The best restart wins; ties break on lower sse, then lower t_c. The
/// result is bitwise reproducible for a fixed seed.
pub fn fit_lppl(series: &PriceSeries, config: &FitConfig) -> Result<LpplFit> {
    config.validate()?;
    let n = series.len();
    if n < MIN_FIT_WINDOW {
        return Err(Error::InsufficientData(format!(
            "fit window has {n} rows, needs at least {MIN_FIT_WINDOW}"
        )));
    }
    let log_prices = series.log_close();
    let (t_lo, t_hi) = config.t_c_bounds(n);
    let lo = [t_lo, config.m_bounds.0, config.omega_bounds.0];
    let hi = [t_hi, config.m_bounds.1, config.omega_bounds.1];
    let scale = [
        0.1 * (t_hi - t_lo),
        0.1 * (config.m_bounds.1 - config.m_bounds.0),
        0.1 * (config.omega_bounds.1 - config.omega_bounds.0),
    ];

    let objective = |x: &[f64; 3]| -> f64 {
        match linear_subfit(x[0], x[1], x[2], &log_prices) {
            Ok(sub) => sub.sse,
            Err(_) => f64::INFINITY,
        }
    };

    let candidates: Vec<Candidate> = (0..config.restarts)
        .into_par_iter()
        .filter_map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(index as u64);
            let start = [
                rng.random_range(t_lo..t_hi),
                rng.random_range(config.m_bounds.0..config.m_bounds.1),
                rng.random_range(config.omega_bounds.0..config.omega_bounds.1),
            ];
            let (best, sse) = nelder_mead(
                &objective,
                start,
                scale,
                lo,
                hi,
                config.max_iterations,
                config.convergence_tolerance,
            );
            if !sse.is_finite() {
                return None;
            }
            let sub = linear_subfit(best[0], best[1], best[2], &log_prices).ok()?;
            Some(Candidate {
                sse: sub.sse,
                t_c: best[0],
                index,
                sub,
                m: best[1],
                omega: best[2],
            })
        })
        .collect();

    let restarts_used = candidates.len() as u32;
    let winner = candidates
        .into_iter()
        .min_by(|a, b| {
            (a.sse, a.t_c, a.index)
                .partial_cmp(&(b.sse, b.t_c, b.index))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::FitFailure("all restarts failed constraint projection".into()))?;

    let params = LpplParams {
        a: winner.sub.a,
        b: winner.sub.b,
        c: winner.sub.c_amplitude(),
        t_c: winner.t_c,
        m: winner.m,
        omega: winner.omega,
        phi: winner.sub.phi(),
    };
    Ok(LpplFit {
        params,
        sse: winner.sse,
        rmse: (winner.sse / n as f64).sqrt(),
        window: (series.dates[0], series.dates[n - 1]),
        restarts_used,
    })
}

/// Bounded Nelder-Mead over a 3-dimensional box. Points are projected onto
/// the box before evaluation. Returns the best vertex and its value.
fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(
    f: &F,
    start: [f64; 3],
    scale: [f64; 3],
    lo: [f64; 3],
    hi: [f64; 3],
    max_iterations: u32,
    tolerance: f64,
) -> ([f64; 3], f64) {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let clamp = |x: [f64; 3]| -> [f64; 3] {
        [
            x[0].clamp(lo[0], hi[0]),
            x[1].clamp(lo[1], hi[1]),
            x[2].clamp(lo[2], hi[2]),
        ]
    };

    let start = clamp(start);
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((start, f(&start)));
    for dim in 0..3 {
        let mut v = start;
        v[dim] += scale[dim];
        if v[dim] > hi[dim] {
            v[dim] = start[dim] - scale[dim];
        }
        let v = clamp(v);
        simplex.push((v, f(&v)));
    }

    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[3].1;
        if worst.is_finite() && (worst - best).abs() <= tolerance * (best.abs() + 1e-300) {
            break;
        }

        let mut centroid = [0.0; 3];
        for (v, _) in &simplex[..3] {
            for d in 0..3 {
                centroid[d] += v[d] / 3.0;
            }
        }

        let at = |coeff: f64| -> [f64; 3] {
            let w = &simplex[3].0;
            clamp([
                centroid[0] + coeff * (centroid[0] - w[0]),
                centroid[1] + coeff * (centroid[1] - w[1]),
                centroid[2] + coeff * (centroid[2] - w[2]),
            ])
        };

        let reflected = at(ALPHA);
        let f_reflected = f(&reflected);
        if f_reflected < simplex[0].1 {
            let expanded = at(GAMMA);
            let f_expanded = f(&expanded);
            simplex[3] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < simplex[2].1 {
            simplex[3] = (reflected, f_reflected);
            continue;
        }
        let contracted = if f_reflected < simplex[3].1 {
            at(ALPHA * RHO)
        } else {
            at(-RHO)
        };
        let f_contracted = f(&contracted);
        if f_contracted < simplex[3].1.min(f_reflected) {
            simplex[3] = (contracted, f_contracted);
            continue;
        }
        // Shrink toward the best vertex.
        let best_vertex = simplex[0].0;
        for entry in simplex.iter_mut().skip(1) {
            let mut v = [0.0; 3];
            for d in 0..3 {
                v[d] = best_vertex[d] + SIGMA * (entry.0[d] - best_vertex[d]);
            }
            let v = clamp(v);
            *entry = (v, f(&v));
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    (simplex[0].0, simplex[0].1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn sample_params() -> LpplParams {
        LpplParams {
            a: 3.0,
            b: -0.4,
            c: 0.05,
            t_c: 330.0,
            m: 0.5,
            omega: 8.0,
            phi: 1.0,
        }
    }

    #[test]
    fn eval_constant_baseline() {
        let p = LpplParams {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            t_c: 100.0,
            m: 0.5,
            omega: 8.0,
            phi: 0.0,
        };
        assert_eq!(lppl_eval(&p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn eval_power_law_term() {
        let p = LpplParams {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            t_c: 100.0,
            m: 0.5,
            omega: 8.0,
            phi: 0.0,
        };
        assert!((lppl_eval(&p, 96.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eval_oscillation_at_unit_gap() {
        // ln(t_c - t) = ln 1 = 0, so the oscillation is cos(phi) = 1.
        let p = LpplParams {
            a: 0.0,
            b: 0.0,
            c: 1.0,
            t_c: 51.0,
            m: 0.5,
            omega: 13.7,
            phi: 0.0,
        };
        assert!((lppl_eval(&p, 50.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eval_rejects_singularity() {
        let p = sample_params();
        assert!(lppl_eval(&p, p.t_c).is_err());
        assert!(lppl_eval(&p, p.t_c + 5.0).is_err());
    }

    #[test]
    fn eval_derivative_grows_toward_critical_time() {
        let p = LpplParams {
            a: 2.0,
            b: -0.5,
            c: 0.0,
            t_c: 100.0,
            m: 0.5,
            omega: 8.0,
            phi: 0.0,
        };
        let h = 1e-4;
        let mut last = 0.0;
        for k in 1..40 {
            let t = p.t_c - 100.0 * 0.8_f64.powi(k);
            let d = (lppl_eval(&p, t + h).unwrap() - lppl_eval(&p, t - h).unwrap()) / (2.0 * h);
            assert!(
                d.abs() > last,
                "derivative magnitude not growing at t={t}: {} !> {last}",
                d.abs()
            );
            last = d.abs();
        }
    }

    #[test]
    fn subfit_recovers_exact_coefficients() {
        let (t_c, m, omega) = (120.0, 0.4, 9.0);
        let (a, b, c1, c2) = (2.5, -0.3, 0.04, -0.02);
        let log_prices: Vec<f64> = (0..100)
            .map(|i| {
                let dt = t_c - i as f64;
                let f = dt.powf(m);
                let theta = omega * dt.ln();
                a + b * f + c1 * f * theta.cos() + c2 * f * theta.sin()
            })
            .collect();
        let sub = linear_subfit(t_c, m, omega, &log_prices).unwrap();
        assert!((sub.a - a).abs() < 1e-9, "a={}", sub.a);
        assert!((sub.b - b).abs() < 1e-9, "b={}", sub.b);
        assert!((sub.c1 - c1).abs() < 1e-9, "c1={}", sub.c1);
        assert!((sub.c2 - c2).abs() < 1e-9, "c2={}", sub.c2);
        assert!(sub.sse < 1e-18, "sse={}", sub.sse);
    }

    #[test]
    fn subfit_flat_series() {
        let log_prices = vec![1.75; 80];
        let sub = linear_subfit(100.0, 0.5, 8.0, &log_prices).unwrap();
        assert!((sub.a - 1.75).abs() < 1e-8);
        assert!(sub.b.abs() < 1e-8);
        assert!(sub.c1.abs() < 1e-8);
        assert!(sub.c2.abs() < 1e-8);
    }

    #[test]
    fn subfit_rejects_underdetermined_window() {
        let err = linear_subfit(100.0, 0.5, 8.0, &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)), "{err}");
    }

    #[test]
    fn subfit_sse_matches_recomputation() {
        let p = sample_params();
        let mut log_prices = synth::lppl_log_prices(&p, 200).unwrap();
        for (i, v) in log_prices.iter_mut().enumerate() {
            *v += 0.01 * ((i * 7) % 13) as f64 / 13.0;
        }
        let sub = linear_subfit(p.t_c, p.m, p.omega, &log_prices).unwrap();
        let mut sse = 0.0;
        for (i, &y) in log_prices.iter().enumerate() {
            let dt = p.t_c - i as f64;
            let f = dt.powf(p.m);
            let theta = p.omega * dt.ln();
            let fitted = sub.a + sub.b * f + sub.c1 * f * theta.cos() + sub.c2 * f * theta.sin();
            sse += (y - fitted) * (y - fitted);
        }
        assert!(
            (sse - sub.sse).abs() <= 1e-10 * sse.max(1e-30),
            "recomputed {sse} vs reported {}",
            sub.sse
        );
    }

    #[test]
    fn subfit_noise_sse_near_expectation() {
        // Mean sse over seeded replications should track n * sigma^2.
        use rand_distr::Distribution;
        let p = sample_params();
        let n = 150;
        let clean = synth::lppl_log_prices(&p, n).unwrap();
        let sigma = 0.01;
        let mut total = 0.0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
            let noisy: Vec<f64> = clean.iter().map(|v| v + normal.sample(&mut rng)).collect();
            total += linear_subfit(p.t_c, p.m, p.omega, &noisy).unwrap().sse;
        }
        let mean_sse = total / 100.0;
        let expected = n as f64 * sigma * sigma;
        assert!(
            (mean_sse - expected).abs() < 0.2 * expected,
            "mean sse {mean_sse} vs expected {expected}"
        );
    }

    #[test]
    fn phi_reconstruction_identity() {
        let sub = LinearSubfit {
            a: 0.0,
            b: 0.0,
            c1: 0.3,
            c2: -0.4,
            sse: 0.0,
        };
        let c = sub.c_amplitude();
        let phi = sub.phi();
        assert!((sub.c1 - c * phi.cos()).abs() < 1e-9);
        assert!((sub.c2 + c * phi.sin()).abs() < 1e-9);
    }

    fn noiseless_series(params: &LpplParams, n: usize) -> PriceSeries {
        synth::lppl_price_series("TST", params, n, 0.0, 0.0, 7).unwrap()
    }

    #[test]
    fn fit_recovers_noiseless_params() {
        let truth = LpplParams {
            a: 3.0,
            b: -0.5,
            c: 0.04,
            t_c: 330.0,
            m: 0.5,
            omega: 8.0,
            phi: 1.2,
        };
        let series = noiseless_series(&truth, 300);
        let config = FitConfig {
            rng_seed: 11,
            ..FitConfig::default()
        };
        let fit = fit_lppl(&series, &config).unwrap();
        assert!(
            (fit.params.t_c - truth.t_c).abs() <= 2.0,
            "t_c {} vs {}",
            fit.params.t_c,
            truth.t_c
        );
        assert!(
            (fit.params.m - truth.m).abs() <= 0.05,
            "m {} vs {}",
            fit.params.m,
            truth.m
        );
        assert!(
            (fit.params.omega - truth.omega).abs() <= 0.5,
            "omega {} vs {}",
            fit.params.omega,
            truth.omega
        );
    }

    #[test]
    fn fit_is_bitwise_deterministic() {
        let series = noiseless_series(&sample_params(), 150);
        let config = FitConfig {
            restarts: 8,
            rng_seed: 99,
            ..FitConfig::default()
        };
        let fit1 = fit_lppl(&series, &config).unwrap();
        let fit2 = fit_lppl(&series, &config).unwrap();
        assert_eq!(fit1.params.t_c.to_bits(), fit2.params.t_c.to_bits());
        assert_eq!(fit1.params.m.to_bits(), fit2.params.m.to_bits());
        assert_eq!(fit1.params.omega.to_bits(), fit2.params.omega.to_bits());
        assert_eq!(fit1.sse.to_bits(), fit2.sse.to_bits());
    }

    #[test]
    fn fit_never_worsens_initial_seeds() {
        let series = synth::lppl_price_series("TST", &sample_params(), 150, 0.05, 0.01, 3).unwrap();
        let config = FitConfig {
            restarts: 8,
            rng_seed: 5,
            ..FitConfig::default()
        };
        let fit = fit_lppl(&series, &config).unwrap();
        let log_prices = series.log_close();
        let (t_lo, t_hi) = config.t_c_bounds(series.len());
        let mut best_initial = f64::INFINITY;
        for index in 0..config.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(index as u64);
            let t_c = rng.random_range(t_lo..t_hi);
            let m = rng.random_range(config.m_bounds.0..config.m_bounds.1);
            let omega = rng.random_range(config.omega_bounds.0..config.omega_bounds.1);
            if let Ok(sub) = linear_subfit(t_c, m, omega, &log_prices) {
                best_initial = best_initial.min(sub.sse);
            }
        }
        assert!(
            fit.sse <= best_initial + 1e-15,
            "fit sse {} worse than best initial {best_initial}",
            fit.sse
        );
    }

    #[test]
    fn fit_handles_random_walk_without_error() {
        use rand_distr::Distribution;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let normal = rand_distr::Normal::new(0.0, 0.02).unwrap();
        let mut log_price = 2.0_f64;
        let mut close = Vec::with_capacity(150);
        for _ in 0..150 {
            log_price += normal.sample(&mut rng);
            close.push(log_price.exp());
        }
        let dates = synth::business_days("2020-01-02".parse().unwrap(), 150);
        let series = PriceSeries::new("RW", dates, close, None).unwrap();
        let fit = fit_lppl(&series, &FitConfig::default()).unwrap();
        assert!(fit.sse.is_finite());
        assert!(fit.rmse > 0.0);
    }

    #[test]
    fn fit_rejects_short_window() {
        let series = noiseless_series(&sample_params(), 120);
        let short = series
            .window(None, Some(series.dates[80]))
            .unwrap();
        let err = fit_lppl(&short, &FitConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)), "{err}");
    }
}
