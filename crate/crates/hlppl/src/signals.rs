//! Behavioral signals from pre-scored news: the hype index, its
//! capitalization-adjusted variant, and daily sentiment aggregates.
//!
//! Hype is a symbol's share of market-wide article counts on a date, so it
//! sums to 1 across the reference universe. CapH divides that share by the
//! symbol's market-cap weight: above 1 means coverage outruns size
//! (excessive hype), below 1 the opposite. Sentiment is the weighted
//! average of per-article polarity; the classifier-style triple
//! (pos, neu, neg) is carried alongside as auxiliary features.

use chrono::NaiveDate;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::{AlignedData, NewsArticleRecord, SentimentClass};
use crate::serialize::fmt_float;

/// Share of market-wide article counts attributed to `symbol`.
///
/// A date with no coverage anywhere (zero total) yields 0; series-level
/// callers track that through [`SignalSeries::has_news`]-style flags
/// rather than an error, so scores degrade to the residual alone.
pub fn hype_index(counts: &BTreeMap<String, u64>, symbol: &str) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let own = counts.get(symbol).copied().unwrap_or(0);
    own as f64 / total as f64
}

/// Hype divided by the symbol's market-cap weight.
pub fn cap_adjusted_hype(
    hype: f64,
    market_caps: &BTreeMap<String, f64>,
    symbol: &str,
) -> Result<f64> {
    let own = *market_caps.get(symbol).ok_or_else(|| {
        Error::FeatureUnavailable(format!("no market cap recorded for {symbol}"))
    })?;
    if own <= 0.0 {
        return Err(Error::Validation(format!(
            "market cap for {symbol} must be positive, got {own}"
        )));
    }
    let total: f64 = market_caps.values().sum();
    if total <= 0.0 {
        return Err(Error::Validation(format!(
            "total market cap must be positive, got {total}"
        )));
    }
    Ok(hype / (own / total))
}

/// Weighted average polarity of one symbol-date's articles; 0 when the
/// set is empty (no-news days contribute nothing to the score).
pub fn sentiment_score(articles: &[NewsArticleRecord]) -> f64 {
    let weight_sum: f64 = articles.iter().map(|a| a.weight).sum();
    if weight_sum <= 0.0 {
        return 0.0;
    }
    let weighted: f64 = articles.iter().map(|a| a.weight * a.polarity).sum();
    weighted / weight_sum
}

/// Confidence-weighted class fractions (pos, neu, neg) for one date:
/// each article contributes its confidence to its predicted class, and
/// the triple is normalized by total confidence so it sums to 1.
pub fn finbert_daily_aggregate(articles: &[NewsArticleRecord]) -> Result<(f64, f64, f64)> {
    let total: f64 = articles.iter().map(|a| a.confidence).sum();
    if articles.is_empty() || total <= 0.0 {
        return Err(Error::Degenerate(
            "no positive-confidence articles to aggregate".into(),
        ));
    }
    let mut sums = [0.0_f64; 3];
    for article in articles {
        let slot = match article.sentiment_class {
            SentimentClass::Positive => 0,
            SentimentClass::Neutral => 1,
            SentimentClass::Negative => 2,
        };
        sums[slot] += article.confidence;
    }
    Ok((sums[0] / total, sums[1] / total, sums[2] / total))
}

/// Alternative daily sentiment from the class triple.
pub fn finbert_sentiment(s_pos: f64, s_neg: f64) -> f64 {
    s_pos - s_neg
}

/// Which daily sentiment aggregate feeds downstream scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentSource {
    /// Weighted average of per-article polarity (default).
    Polarity,
    /// Positive-minus-negative share from the class triple.
    Finbert,
}

impl fmt::Display for SentimentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentimentSource::Polarity => write!(f, "polarity"),
            SentimentSource::Finbert => write!(f, "finbert"),
        }
    }
}

impl FromStr for SentimentSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "polarity" => Ok(SentimentSource::Polarity),
            "finbert" => Ok(SentimentSource::Finbert),
            other => Err(Error::Config(format!(
                "unknown sentiment source '{other}' (expected polarity or finbert)"
            ))),
        }
    }
}

/// Daily behavioral signals for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    pub symbol: String,
    pub dates: Vec<NaiveDate>,
    /// H in [0, 1]; 0 on dates without any market coverage.
    pub hype: Vec<f64>,
    /// CapH; absent when no market caps were supplied.
    pub cap_hype: Vec<Option<f64>>,
    /// Weighted average polarity in [-1, 1]; 0 on no-news dates.
    pub sentiment: Vec<f64>,
    pub s_pos: Vec<f64>,
    pub s_neu: Vec<f64>,
    pub s_neg: Vec<f64>,
    /// Whether the symbol had any articles that date.
    pub has_news: Vec<bool>,
    /// Whether a features file backed the hype columns at all.
    pub has_features: bool,
}

impl SignalSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// The sentiment vector a given source selects for scoring.
    pub fn sentiment_channel(&self, source: SentimentSource) -> Vec<f64> {
        match source {
            SentimentSource::Polarity => self.sentiment.clone(),
            SentimentSource::Finbert => self
                .s_pos
                .iter()
                .zip(&self.s_neg)
                .map(|(p, n)| finbert_sentiment(*p, *n))
                .collect(),
        }
    }

    /// All-zero signals for callers running without any news inputs.
    pub fn zeros(symbol: &str, dates: &[NaiveDate]) -> SignalSeries {
        let n = dates.len();
        SignalSeries {
            symbol: symbol.to_string(),
            dates: dates.to_vec(),
            hype: vec![0.0; n],
            cap_hype: vec![None; n],
            sentiment: vec![0.0; n],
            s_pos: vec![0.0; n],
            s_neu: vec![0.0; n],
            s_neg: vec![0.0; n],
            has_news: vec![false; n],
            has_features: false,
        }
    }
}

/// Compute the daily signal table from calendar-aligned inputs.
///
/// Dates without articles carry zero sentiment and a zero class triple;
/// dates without feature rows carry zero hype. A features row that lists
/// market caps but omits this symbol is an error, while an entirely
/// cap-free features file just leaves CapH absent.
pub fn compute_signals(aligned: &AlignedData) -> Result<SignalSeries> {
    let n = aligned.rows.len();
    let mut series = SignalSeries {
        symbol: aligned.symbol.clone(),
        dates: Vec::with_capacity(n),
        hype: Vec::with_capacity(n),
        cap_hype: Vec::with_capacity(n),
        sentiment: Vec::with_capacity(n),
        s_pos: Vec::with_capacity(n),
        s_neu: Vec::with_capacity(n),
        s_neg: Vec::with_capacity(n),
        has_news: Vec::with_capacity(n),
        has_features: aligned.has_features,
    };
    for row in &aligned.rows {
        series.dates.push(row.date);
        let hype = row
            .article_counts
            .as_ref()
            .map(|counts| hype_index(counts, &aligned.symbol))
            .unwrap_or(0.0);
        series.hype.push(hype);
        let cap_hype = match &row.market_caps {
            Some(caps) if !caps.is_empty() => Some(cap_adjusted_hype(hype, caps, &aligned.symbol)?),
            _ => None,
        };
        series.cap_hype.push(cap_hype);
        // Rows carry every symbol's articles; sentiment is this symbol's own.
        let own: Vec<NewsArticleRecord> = row
            .articles
            .iter()
            .filter(|a| a.symbol == aligned.symbol)
            .cloned()
            .collect();
        series.sentiment.push(sentiment_score(&own));
        if own.is_empty() {
            series.s_pos.push(0.0);
            series.s_neu.push(0.0);
            series.s_neg.push(0.0);
            series.has_news.push(false);
        } else {
            let (pos, neu, neg) = finbert_daily_aggregate(&own)?;
            series.s_pos.push(pos);
            series.s_neu.push(neu);
            series.s_neg.push(neg);
            series.has_news.push(true);
        }
    }
    Ok(series)
}

/// Write `date,hype,cap_hype,sentiment,s_pos,s_neu,s_neg` rows; CapH is
/// blank where unavailable.
pub fn write_signals(path: &Path, series: &SignalSeries) -> Result<()> {
    let mut out = String::from("date,hype,cap_hype,sentiment,s_pos,s_neu,s_neg\n");
    for i in 0..series.len() {
        let cap = series.cap_hype[i].map(fmt_float).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{cap},{},{},{},{}\n",
            series.dates[i],
            fmt_float(series.hype[i]),
            fmt_float(series.sentiment[i]),
            fmt_float(series.s_pos[i]),
            fmt_float(series.s_neu[i]),
            fmt_float(series.s_neg[i]),
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
    Ok(())
}
