//! Declarative run configuration.
//!
//! One TOML file drives the whole pipeline; every field has a default, so
//! an empty file is a valid config. Callers layer command-line overrides
//! on top (flags > file > defaults) and the effective result is echoed
//! into the output directory, where it can be re-loaded to reproduce the
//! run byte for byte.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::backtest::StrategyConfig;
use crate::error::{Error, Result};
use crate::lppl::FitConfig;
use crate::residuals::NormalizationMode;
use crate::score::ScoreParams;
use crate::signals::SentimentSource;

/// Everything one run needs: inputs, model knobs, outputs, and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Symbol the price file describes; used in artifacts and signal
    /// attribution.
    pub symbol: String,
    /// Daily close prices, `date,close[,volume]`.
    pub prices: Option<PathBuf>,
    /// Optional pre-scored article file, `date,symbol,polarity,weight,...`.
    pub news: Option<PathBuf>,
    /// Optional market-wide coverage/cap file (long format).
    pub features: Option<PathBuf>,
    /// Where artifacts land; created on demand.
    pub output_dir: PathBuf,
    /// Single root seed for every randomized stage.
    pub rng_seed: u64,
    /// Optional analysis window (inclusive); defaults to the full sample.
    pub window_start: Option<NaiveDate>,
    pub window_end: Option<NaiveDate>,
    pub fit: FitSection,
    pub score: ScoreSection,
    pub strategy: StrategySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            symbol: "ASSET".to_string(),
            prices: None,
            news: None,
            features: None,
            output_dir: PathBuf::from("out"),
            rng_seed: 0,
            window_start: None,
            window_end: None,
            fit: FitSection::default(),
            score: ScoreSection::default(),
            strategy: StrategySection::default(),
        }
    }
}

/// Curve-fitting knobs; mirrors [`FitConfig`] in file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub restarts: u32,
    /// Explicit critical-time search range in trading days from the
    /// window start; both or neither.
    pub t_c_min: Option<f64>,
    pub t_c_max: Option<f64>,
    pub m_min: f64,
    pub m_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub max_iterations: u32,
    pub convergence_tolerance: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        let fit = FitConfig::default();
        FitSection {
            restarts: fit.restarts,
            t_c_min: None,
            t_c_max: None,
            m_min: fit.m_bounds.0,
            m_max: fit.m_bounds.1,
            omega_min: fit.omega_bounds.0,
            omega_max: fit.omega_bounds.1,
            max_iterations: fit.max_iterations,
            convergence_tolerance: fit.convergence_tolerance,
        }
    }
}

/// Scoring and episode-labeling knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreSection {
    /// Hype weight in the composite score.
    pub alpha1: f64,
    /// Sentiment weight in the composite score.
    pub alpha2: f64,
    /// Episode threshold on |score|.
    pub tau: f64,
    /// Minimum run length, in trading days, for an episode.
    pub d_min: usize,
    pub normalization: NormalizationMode,
    pub sentiment_source: SentimentSource,
}

impl Default for ScoreSection {
    fn default() -> Self {
        let params = ScoreParams::default();
        ScoreSection {
            alpha1: params.alpha1,
            alpha2: params.alpha2,
            tau: 0.8,
            d_min: 10,
            normalization: NormalizationMode::Global,
            sentiment_source: SentimentSource::Polarity,
        }
    }
}

/// Trading knobs; mirrors [`StrategyConfig`] in file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySection {
    pub theta1: f64,
    pub theta2: f64,
    pub stop_loss: f64,
    pub max_position: f64,
    pub transaction_cost: f64,
    pub discount_rate: f64,
    /// 0 trades on the current score; 1..=5 on that forecast horizon.
    pub horizon: u8,
}

impl Default for StrategySection {
    fn default() -> Self {
        let s = StrategyConfig::default();
        StrategySection {
            theta1: s.theta1,
            theta2: s.theta2,
            stop_loss: s.stop_loss,
            max_position: s.max_position,
            transaction_cost: s.transaction_cost,
            discount_rate: s.discount_rate,
            horizon: s.horizon,
        }
    }
}

impl RunConfig {
    /// Parse a TOML file over the defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Check every section against its module's invariants.
    pub fn validate(&self) -> Result<()> {
        self.fit_config().and_then(|f| f.validate())?;
        self.score_params().and_then(|p| p.validate())?;
        self.strategy_config().validate()?;
        if !(self.score.tau > 0.0) {
            return Err(Error::Config(format!(
                "episode threshold tau must be > 0, got {}",
                self.score.tau
            )));
        }
        if self.score.d_min == 0 {
            return Err(Error::Config("episode d_min must be >= 1".into()));
        }
        if let (Some(start), Some(end)) = (self.window_start, self.window_end) {
            if start > end {
                return Err(Error::Config(format!(
                    "window_start {start} is after window_end {end}"
                )));
            }
        }
        Ok(())
    }

    pub fn fit_config(&self) -> Result<FitConfig> {
        let t_c_search = match (self.fit.t_c_min, self.fit.t_c_max) {
            (None, None) => None,
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => {
                return Err(Error::Config(
                    "t_c_min and t_c_max must be set together".into(),
                ))
            }
        };
        Ok(FitConfig {
            restarts: self.fit.restarts,
            t_c_search,
            m_bounds: (self.fit.m_min, self.fit.m_max),
            omega_bounds: (self.fit.omega_min, self.fit.omega_max),
            max_iterations: self.fit.max_iterations,
            convergence_tolerance: self.fit.convergence_tolerance,
            rng_seed: self.rng_seed,
        })
    }

    pub fn score_params(&self) -> Result<ScoreParams> {
        Ok(ScoreParams {
            alpha1: self.score.alpha1,
            alpha2: self.score.alpha2,
        })
    }

    pub fn strategy_config(&self) -> StrategyConfig {
        StrategyConfig {
            theta1: self.strategy.theta1,
            theta2: self.strategy.theta2,
            stop_loss: self.strategy.stop_loss,
            max_position: self.strategy.max_position,
            transaction_cost: self.strategy.transaction_cost,
            discount_rate: self.strategy.discount_rate,
            horizon: self.strategy.horizon,
        }
    }

    /// Serialize the effective config; loading the result reproduces it
    /// exactly.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Echo the effective config into the output directory.
    pub fn echo(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("config.toml");
        std::fs::write(&path, self.to_toml()?).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
