//! Synthetic fixture generation with known ground truth.
//!
//! Series are built as `ln p(t) = lppl(t) + eps(t)` on a business-day
//! calendar, where the residual follows the mean-reverting recursion
//! `eps(t+1) = (1 - alpha) * eps(t) + u_t` with Gaussian shocks `u_t`.
//! With `noise_std = 0` the series is the exact model trajectory, which
//! is what the recovery tests lean on.
//!
//! Optionally the generator emits a matching news/feature set: article
//! volume and polarity track the injected residual, so hype and sentiment
//! line up with the planted bubble instead of being independent noise.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ingest::{MarketFeatureRow, NewsArticleRecord, PriceSeries, SentimentClass};
use crate::lppl::{lppl_eval, LpplParams};

/// `n` consecutive business days (Mon-Fri), starting at the first business
/// day on or after `start`.
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(n);
    let mut d = start;
    while dates.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(d);
        }
        d = d.succ_opt().expect("date overflow");
    }
    dates
}

/// Exact model log prices at day indices `0..n`.
pub fn lppl_log_prices(params: &LpplParams, n: usize) -> Result<Vec<f64>> {
    params.validate()?;
    (0..n).map(|i| lppl_eval(params, i as f64)).collect()
}

/// Mean-reverting residual path of length `n`, starting at zero.
pub fn ar1_residuals(alpha: f64, noise_std: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, noise_std.max(0.0)).expect("std is finite");
    let mut eps = Vec::with_capacity(n);
    let mut value = 0.0;
    for i in 0..n {
        if i > 0 {
            value = (1.0 - alpha) * value + if noise_std > 0.0 { normal.sample(rng) } else { 0.0 };
        }
        eps.push(value);
    }
    eps
}

/// Everything needed to generate one synthetic symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub symbol: String,
    pub n: usize,
    pub params: LpplParams,
    /// Mean-reversion speed of the injected residual, in [0, 2).
    pub alpha: f64,
    /// Standard deviation of the residual shocks.
    pub noise_std: f64,
    pub start_date: NaiveDate,
    pub rng_seed: u64,
    /// Also fabricate a news/feature set aligned with the residual.
    pub with_news: bool,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n < 2 {
            return Err(Error::Validation(format!("n = {} too short", self.n)));
        }
        if self.params.t_c <= (self.n - 1) as f64 {
            return Err(Error::Validation(format!(
                "t_c = {} not beyond the last day index {}",
                self.params.t_c,
                self.n - 1
            )));
        }
        if !(0.0..2.0).contains(&self.alpha) {
            return Err(Error::Validation(format!(
                "alpha = {} outside the stationary range [0, 2)",
                self.alpha
            )));
        }
        if self.noise_std < 0.0 {
            return Err(Error::Validation(format!(
                "noise_std = {} negative",
                self.noise_std
            )));
        }
        Ok(())
    }
}

/// A generated fixture: prices, the injected residual path, and the
/// optional news/feature set.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub prices: PriceSeries,
    /// True residual eps(t), before any re-estimation.
    pub residuals: Vec<f64>,
    pub news: Option<Vec<NewsArticleRecord>>,
    pub features: Option<Vec<MarketFeatureRow>>,
}

/// Market cap assigned to the synthetic symbol in the fabricated feature
/// set; the rest of the universe carries nine times as much, so the
/// symbol's cap weight is 0.1.
const SYNTH_MARKET_CAP: f64 = 1.0e9;
const REST_MARKET_CAP: f64 = 9.0e9;
const REST_ARTICLES: u64 = 40;

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let clean = lppl_log_prices(&spec.params, spec.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let residuals = ar1_residuals(spec.alpha, spec.noise_std, spec.n, &mut rng);

    let dates = business_days(spec.start_date, spec.n);
    let close: Vec<f64> = clean
        .iter()
        .zip(&residuals)
        .map(|(lp, eps)| (lp + eps).exp())
        .collect();
    let prices = PriceSeries::new(&spec.symbol, dates.clone(), close, None)?;

    let (news, features) = if spec.with_news {
        let (news, features) = fabricate_news(spec, &dates, &residuals, &mut rng);
        (Some(news), Some(features))
    } else {
        (None, None)
    };

    Ok(SynthData {
        prices,
        residuals,
        news,
        features,
    })
}

/// Article counts and polarities keyed to the residual: more coverage and
/// more positive tone the further the price sits above the trajectory.
fn fabricate_news(
    spec: &SynthSpec,
    dates: &[NaiveDate],
    residuals: &[f64],
    rng: &mut ChaCha8Rng,
) -> (Vec<NewsArticleRecord>, Vec<MarketFeatureRow>) {
    let max_abs = residuals.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()));
    let rest_symbol = if spec.symbol == "MKT" { "MKT2" } else { "MKT" };
    let tone_noise = Normal::new(0.0, 0.15).expect("finite std");

    let mut news = Vec::new();
    let mut features = Vec::new();
    for (date, eps) in dates.iter().zip(residuals) {
        let level = if max_abs > 0.0 { eps / max_abs } else { 0.0 };
        let count = 2 + (6.0 * level.abs()).floor() as u64;
        for _ in 0..count {
            let polarity = (level + tone_noise.sample(rng)).clamp(-1.0, 1.0);
            let class = if polarity > 0.2 {
                SentimentClass::Positive
            } else if polarity < -0.2 {
                SentimentClass::Negative
            } else {
                SentimentClass::Neutral
            };
            news.push(NewsArticleRecord {
                date: *date,
                symbol: spec.symbol.clone(),
                polarity,
                weight: 1.0,
                sentiment_class: class,
                confidence: 0.55 + 0.45 * polarity.abs(),
            });
        }

        let mut counts = BTreeMap::new();
        counts.insert(spec.symbol.clone(), count);
        counts.insert(rest_symbol.to_string(), REST_ARTICLES);
        let mut caps = BTreeMap::new();
        caps.insert(spec.symbol.clone(), SYNTH_MARKET_CAP);
        caps.insert(rest_symbol.to_string(), REST_MARKET_CAP);
        features.push(MarketFeatureRow {
            date: *date,
            article_count_by_symbol: counts,
            market_cap_by_symbol: caps,
        });
    }
    (news, features)
}

/// Convenience wrapper: generate just the price series on the default
/// test calendar.
pub fn lppl_price_series(
    symbol: &str,
    params: &LpplParams,
    n: usize,
    alpha: f64,
    noise_std: f64,
    rng_seed: u64,
) -> Result<PriceSeries> {
    let spec = SynthSpec {
        symbol: symbol.to_string(),
        n,
        params: *params,
        alpha,
        noise_std,
        start_date: NaiveDate::from_ymd_opt(2020, 1, 2).expect("valid date"),
        rng_seed,
        with_news: false,
    };
    Ok(generate(&spec)?.prices)
}
