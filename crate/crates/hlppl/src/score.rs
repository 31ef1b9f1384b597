//! The Bubble Score: normalized residual plus hype and sentiment terms,
//! and threshold/persistence episode labeling.
//!
//! The composition is sign-aware so that media attention always amplifies
//! whatever the residual already indicates: above the trajectory, hype
//! adds; below it, hype subtracts further. Sentiment enters with its own
//! sign either way. Episodes are maximal same-sign runs of days whose
//! |score| clears a threshold, kept only when they persist long enough.

use chrono::NaiveDate;
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{header_index, open_reader, parse_field, PriceSeries};
use crate::residuals::ResidualSeries;
use crate::serialize::fmt_float;
use crate::signals::SignalSeries;

/// Weights of the hype and sentiment terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams {
            alpha1: 0.2,
            alpha2: 0.2,
        }
    }
}

impl ScoreParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha1 < 0.0 || self.alpha2 < 0.0 {
            return Err(Error::Config(format!(
                "score weights must be non-negative, got alpha1={} alpha2={}",
                self.alpha1, self.alpha2
            )));
        }
        Ok(())
    }
}

/// Combine one day's components into the score.
///
/// Positive residual: `eps + a1*H + a2*S`. Negative: `eps - a1*H + a2*S`.
/// At exactly zero the hype term drops (midpoint of the one-sided limits)
/// and only sentiment remains.
pub fn compose_score(
    epsilon_norm: f64,
    hype: f64,
    sentiment: f64,
    params: &ScoreParams,
) -> Result<f64> {
    params.validate()?;
    if !(-1.0..=1.0).contains(&epsilon_norm) {
        return Err(Error::Contract(format!(
            "epsilon_norm {epsilon_norm} outside [-1, 1]"
        )));
    }
    if !(0.0..=1.0).contains(&hype) {
        return Err(Error::Contract(format!("hype {hype} outside [0, 1]")));
    }
    if !(-1.0..=1.0).contains(&sentiment) {
        return Err(Error::Contract(format!(
            "sentiment {sentiment} outside [-1, 1]"
        )));
    }
    let hype_term = if epsilon_norm > 0.0 {
        params.alpha1 * hype
    } else if epsilon_norm < 0.0 {
        -params.alpha1 * hype
    } else {
        0.0
    };
    Ok(epsilon_norm + hype_term + params.alpha2 * sentiment)
}

/// Daily scores with their recombinable components.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub dates: Vec<NaiveDate>,
    pub score: Vec<f64>,
    pub epsilon_norm: Vec<f64>,
    pub hype: Vec<f64>,
    pub sentiment: Vec<f64>,
}

impl ScoreSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Score every day of a normalized residual series against its signals.
///
/// The two series must cover exactly the same dates; the sentiment column
/// of `signals` is whichever daily aggregate the caller selected.
pub fn compute_score_series(
    residuals: &ResidualSeries,
    signals: &SignalSeries,
    params: &ScoreParams,
) -> Result<ScoreSeries> {
    let epsilon_norm = residuals.epsilon_norm.as_ref().ok_or_else(|| {
        Error::Contract("residuals must be normalized before scoring".into())
    })?;
    if residuals.dates != signals.dates {
        return Err(Error::Contract(format!(
            "residual dates ({} rows) do not match signal dates ({} rows)",
            residuals.dates.len(),
            signals.dates.len()
        )));
    }
    let mut score = Vec::with_capacity(epsilon_norm.len());
    for i in 0..epsilon_norm.len() {
        score.push(compose_score(
            epsilon_norm[i],
            signals.hype[i],
            signals.sentiment[i],
            params,
        )?);
    }
    Ok(ScoreSeries {
        dates: residuals.dates.clone(),
        score,
        epsilon_norm: epsilon_norm.clone(),
        hype: signals.hype.clone(),
        sentiment: signals.sentiment.clone(),
    })
}

/// Direction of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeType {
    /// Score persistently above +tau: speculative overpricing.
    Normal,
    /// Score persistently below -tau: pronounced undervaluation.
    Negative,
}

impl fmt::Display for EpisodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpisodeType::Normal => write!(f, "normal"),
            EpisodeType::Negative => write!(f, "negative"),
        }
    }
}

/// A labeled bubble interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub episode_type: EpisodeType,
    /// Trading days in the interval.
    pub duration: usize,
    /// Maximum |score| observed inside the interval.
    pub intensity: f64,
}

/// Maximal same-sign runs with |score| > tau lasting at least d_min days.
///
/// A sign flip breaks a run even when the magnitude stays above the
/// threshold, so every episode has a single direction.
pub fn label_episodes(scores: &ScoreSeries, tau: f64, d_min: usize) -> Result<Vec<Episode>> {
    if tau <= 0.0 {
        return Err(Error::Config(format!("tau must be > 0, got {tau}")));
    }
    if d_min < 1 {
        return Err(Error::Config("d_min must be >= 1".into()));
    }
    let mut episodes = Vec::new();
    let mut run_start: Option<usize> = None;
    let flush = |start: usize, end: usize, episodes: &mut Vec<Episode>| {
        let duration = end - start + 1;
        if duration >= d_min {
            let slice = &scores.score[start..=end];
            let intensity = slice.iter().fold(0.0_f64, |acc, s| acc.max(s.abs()));
            episodes.push(Episode {
                start: scores.dates[start],
                end: scores.dates[end],
                episode_type: if slice[0] > 0.0 {
                    EpisodeType::Normal
                } else {
                    EpisodeType::Negative
                },
                duration,
                intensity,
            });
        }
    };
    for i in 0..scores.len() {
        let s = scores.score[i];
        let qualifies = s.abs() > tau;
        if let Some(start) = run_start {
            let same_sign = scores.score[start] > 0.0 && s > 0.0
                || scores.score[start] < 0.0 && s < 0.0;
            if !(qualifies && same_sign) {
                flush(start, i - 1, &mut episodes);
                run_start = None;
            }
        }
        if qualifies && run_start.is_none() {
            run_start = Some(i);
        }
    }
    if let Some(start) = run_start {
        flush(start, scores.len() - 1, &mut episodes);
    }
    Ok(episodes)
}

/// Write `date,epsilon_norm,hype,sentiment,bubble_score` rows.
pub fn write_scores(path: &Path, scores: &ScoreSeries) -> Result<()> {
    let mut out = String::from("date,epsilon_norm,hype,sentiment,bubble_score\n");
    for i in 0..scores.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            scores.dates[i],
            fmt_float(scores.epsilon_norm[i]),
            fmt_float(scores.hype[i]),
            fmt_float(scores.sentiment[i]),
            fmt_float(scores.score[i]),
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a scores CSV back into a [`ScoreSeries`].
pub fn load_scores(path: impl AsRef<Path>) -> Result<ScoreSeries> {
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
    let eps_idx = header_index(&headers, "epsilon_norm", path)?;
    let hype_idx = header_index(&headers, "hype", path)?;
    let sent_idx = header_index(&headers, "sentiment", path)?;
    let score_idx = header_index(&headers, "bubble_score", path)?;
    let mut series = ScoreSeries {
        dates: Vec::new(),
        score: Vec::new(),
        epsilon_norm: Vec::new(),
        hype: Vec::new(),
        sentiment: Vec::new(),
    };
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        series
            .dates
            .push(parse_field(&record, date_idx, "date", path)?);
        series
            .epsilon_norm
            .push(parse_field(&record, eps_idx, "epsilon_norm", path)?);
        series
            .hype
            .push(parse_field(&record, hype_idx, "hype", path)?);
        series
            .sentiment
            .push(parse_field(&record, sent_idx, "sentiment", path)?);
        series
            .score
            .push(parse_field(&record, score_idx, "bubble_score", path)?);
    }
    Ok(series)
}

/// Write `start,end,type,duration,intensity` rows.
pub fn write_episodes(path: &Path, episodes: &[Episode]) -> Result<()> {
    let mut out = String::from("start,end,type,duration,intensity\n");
    for e in episodes {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.start,
            e.end,
            e.episode_type,
            e.duration,
            fmt_float(e.intensity),
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Per-date plotting export: price, model trajectory, score, and episode
/// shading flags, one row per trading day.
pub fn write_plot_data(
    path: &Path,
    prices: &PriceSeries,
    model_price: &[f64],
    scores: &ScoreSeries,
    episodes: &[Episode],
) -> Result<()> {
    if prices.len() != scores.len() || model_price.len() != scores.len() {
        return Err(Error::Contract(format!(
            "plot export lengths disagree: {} prices, {} model points, {} scores",
            prices.len(),
            model_price.len(),
            scores.len()
        )));
    }
    let mut out = String::from(
        "date,close,lppl_price,epsilon_norm,bubble_score,in_episode,episode_type\n",
    );
    for i in 0..scores.len() {
        let date = scores.dates[i];
        let shading = episodes
            .iter()
            .find(|e| e.start <= date && date <= e.end)
            .map(|e| e.episode_type);
        out.push_str(&format!(
            "{date},{},{},{},{},{},{}\n",
            fmt_float(prices.close[i]),
            fmt_float(model_price[i]),
            fmt_float(scores.epsilon_norm[i]),
            fmt_float(scores.score[i]),
            u8::from(shading.is_some()),
            shading.map(|t| t.to_string()).unwrap_or_default(),
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use proptest::prelude::*;

    fn unit_params() -> ScoreParams {
        ScoreParams {
            alpha1: 1.0,
            alpha2: 1.0,
        }
    }

    fn series_from(score: Vec<f64>) -> ScoreSeries {
        let n = score.len();
        ScoreSeries {
            dates: synth::business_days("2020-01-02".parse().unwrap(), n),
            score,
            epsilon_norm: vec![0.0; n],
            hype: vec![0.0; n],
            sentiment: vec![0.0; n],
        }
    }

    /// Reference labeling: enumerate every maximal qualifying run directly.
    fn oracle_episodes(scores: &ScoreSeries, tau: f64, d_min: usize) -> Vec<Episode> {
        let n = scores.len();
        let qualifies = |i: usize| scores.score[i].abs() > tau;
        let same_sign = |i: usize, j: usize| {
            scores.score[i] > 0.0 && scores.score[j] > 0.0
                || scores.score[i] < 0.0 && scores.score[j] < 0.0
        };
        let mut out = Vec::new();
        for start in 0..n {
            for end in start..n {
                let run_ok = (start..=end).all(|i| qualifies(i) && same_sign(start, i));
                if !run_ok {
                    continue;
                }
                let left_extendable = start > 0 && qualifies(start - 1) && same_sign(start - 1, start);
                let right_extendable = end + 1 < n && qualifies(end + 1) && same_sign(start, end + 1);
                if left_extendable || right_extendable || end - start + 1 < d_min {
                    continue;
                }
                out.push(Episode {
                    start: scores.dates[start],
                    end: scores.dates[end],
                    episode_type: if scores.score[start] > 0.0 {
                        EpisodeType::Normal
                    } else {
                        EpisodeType::Negative
                    },
                    duration: end - start + 1,
                    intensity: scores.score[start..=end]
                        .iter()
                        .fold(0.0_f64, |acc, s| acc.max(s.abs())),
                });
            }
        }
        out
    }

    #[test]
    fn positive_branch_example() {
        let v = compose_score(0.5, 0.2, -0.1, &unit_params()).unwrap();
        assert!((v - 0.6).abs() < 1e-15);
    }

    #[test]
    fn negative_branch_example() {
        let v = compose_score(-0.5, 0.2, -0.1, &unit_params()).unwrap();
        assert!((v + 0.8).abs() < 1e-15);
    }

    #[test]
    fn no_signals_reduces_to_residual() {
        let v = compose_score(0.3, 0.0, 0.0, &ScoreParams::default()).unwrap();
        assert_eq!(v, 0.3);
    }

    #[test]
    fn zero_residual_keeps_only_sentiment() {
        let v = compose_score(0.0, 0.9, 0.5, &unit_params()).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn out_of_bounds_inputs_are_contract_errors() {
        let p = ScoreParams::default();
        assert!(matches!(
            compose_score(1.5, 0.0, 0.0, &p),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            compose_score(0.0, -0.1, 0.0, &p),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            compose_score(0.0, 0.0, 1.01, &p),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn antisymmetry_on_grid() {
        let grid = [-1.0, -0.6, -0.2, 0.2, 0.6, 1.0];
        let alphas = [0.0, 0.2, 1.0];
        for &a1 in &alphas {
            for &a2 in &alphas {
                let p = ScoreParams {
                    alpha1: a1,
                    alpha2: a2,
                };
                for &eps in &grid {
                    for &h in &[0.0, 0.3, 1.0] {
                        for &s in &grid {
                            let lhs = compose_score(-eps, h, -s, &p).unwrap();
                            let rhs = -compose_score(eps, h, s, &p).unwrap();
                            assert!(
                                (lhs - rhs).abs() < 1e-15,
                                "eps={eps} h={h} s={s}: {lhs} vs {rhs}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hype_monotonicity() {
        let p = ScoreParams {
            alpha1: 0.7,
            alpha2: 0.2,
        };
        let mut last_pos = f64::NEG_INFINITY;
        let mut last_neg = f64::INFINITY;
        for k in 0..=10 {
            let h = k as f64 / 10.0;
            let pos = compose_score(0.4, h, 0.1, &p).unwrap();
            let neg = compose_score(-0.4, h, 0.1, &p).unwrap();
            assert!(pos >= last_pos, "positive branch decreased at h={h}");
            assert!(neg <= last_neg, "negative branch increased at h={h}");
            last_pos = pos;
            last_neg = neg;
        }
    }

    #[test]
    fn twelve_day_run_is_one_episode() {
        let mut score = vec![0.0; 30];
        for s in score.iter_mut().skip(8).take(12) {
            *s = 0.9;
        }
        let series = series_from(score);
        let episodes = label_episodes(&series, 0.8, 10).unwrap();
        assert_eq!(episodes.len(), 1);
        let e = &episodes[0];
        assert_eq!(e.duration, 12);
        assert_eq!(e.episode_type, EpisodeType::Normal);
        assert!((e.intensity - 0.9).abs() < 1e-15);
        assert_eq!(e.start, series.dates[8]);
        assert_eq!(e.end, series.dates[19]);
    }

    #[test]
    fn five_day_run_fails_persistence() {
        let mut score = vec![0.0; 20];
        for s in score.iter_mut().skip(5).take(5) {
            *s = 0.9;
        }
        let episodes = label_episodes(&series_from(score), 0.8, 10).unwrap();
        assert!(episodes.is_empty());
    }

    #[test]
    fn sign_change_splits_runs() {
        let mut score = vec![-0.85; 10];
        score.extend(vec![0.85; 10]);
        let episodes = label_episodes(&series_from(score), 0.8, 10).unwrap();
        assert_eq!(episodes.len(), 2);
        assert_eq!(episodes[0].episode_type, EpisodeType::Negative);
        assert_eq!(episodes[0].duration, 10);
        assert_eq!(episodes[1].episode_type, EpisodeType::Normal);
        assert_eq!(episodes[1].duration, 10);
        assert!(episodes[0].end < episodes[1].start);
    }

    #[test]
    fn appending_quiet_days_preserves_episodes() {
        let mut score = vec![0.9; 15];
        let base = label_episodes(&series_from(score.clone()), 0.8, 10).unwrap();
        score.extend(vec![0.1; 40]);
        let extended = label_episodes(&series_from(score), 0.8, 10).unwrap();
        assert_eq!(base, extended);
    }

    #[test]
    fn invalid_labeling_params_rejected() {
        let series = series_from(vec![0.0; 5]);
        assert!(label_episodes(&series, 0.0, 10).is_err());
        assert!(label_episodes(&series, 0.8, 0).is_err());
    }

    #[test]
    fn score_series_recombines_and_checks_dates() {
        use crate::residuals::{NormalizationMode, ResidualSeries};
        use crate::signals::SignalSeries;
        let dates = synth::business_days("2020-01-02".parse().unwrap(), 4);
        let residuals = ResidualSeries {
            dates: dates.clone(),
            epsilon: vec![0.2, -0.4, 0.0, 0.4],
            epsilon_norm: Some(vec![0.5, -1.0, 0.0, 1.0]),
            normalization_mode: Some(NormalizationMode::Global),
        };
        let mut signals = SignalSeries::zeros("A", &dates);
        signals.hype = vec![0.1, 0.2, 0.3, 0.4];
        signals.sentiment = vec![0.5, -0.5, 0.25, 0.0];
        let params = ScoreParams {
            alpha1: 0.2,
            alpha2: 0.2,
        };
        let scores = compute_score_series(&residuals, &signals, &params).unwrap();
        for i in 0..4 {
            let direct = compose_score(
                residuals.epsilon_norm.as_ref().unwrap()[i],
                signals.hype[i],
                signals.sentiment[i],
                &params,
            )
            .unwrap();
            assert_eq!(scores.score[i], direct);
        }

        let mut shifted = signals.clone();
        shifted.dates[0] = shifted.dates[0].succ_opt().unwrap();
        let err = compute_score_series(&residuals, &shifted, &params).unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
    }

    #[test]
    fn zero_weights_reduce_series_to_epsilon_norm() {
        use crate::residuals::{NormalizationMode, ResidualSeries};
        let dates = synth::business_days("2020-01-02".parse().unwrap(), 3);
        let residuals = ResidualSeries {
            dates: dates.clone(),
            epsilon: vec![0.1, -0.3, 0.3],
            epsilon_norm: Some(vec![1.0 / 3.0, -1.0, 1.0]),
            normalization_mode: Some(NormalizationMode::Global),
        };
        let mut signals = SignalSeries::zeros("A", &dates);
        signals.hype = vec![0.9, 0.9, 0.9];
        signals.sentiment = vec![0.7, 0.7, 0.7];
        let scores = compute_score_series(
            &residuals,
            &signals,
            &ScoreParams {
                alpha1: 0.0,
                alpha2: 0.0,
            },
        )
        .unwrap();
        assert_eq!(scores.score, residuals.epsilon_norm.unwrap());
    }

    proptest! {
        #[test]
        fn labeling_matches_oracle(
            score in proptest::collection::vec(-1.3_f64..1.3, 1..120),
            d_min in 1_usize..15,
        ) {
            let series = series_from(score);
            let fast = label_episodes(&series, 0.8, d_min).unwrap();
            let slow = oracle_episodes(&series, 0.8, d_min);
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn episodes_satisfy_their_invariants(
            score in proptest::collection::vec(-1.3_f64..1.3, 1..150),
        ) {
            let series = series_from(score);
            let episodes = label_episodes(&series, 0.8, 10).unwrap();
            for window in episodes.windows(2) {
                prop_assert!(window[0].end < window[1].start);
            }
            for e in &episodes {
                prop_assert!(e.duration >= 10);
                prop_assert!(e.intensity > 0.8);
                prop_assert!(e.start <= e.end);
            }
        }
    }
}
