//! Input loading, validation, and daily alignment.
//!
//! Three CSV inputs feed the pipeline:
//! - prices: `date,close,volume` (volume optional), one row per trading day
//! - news: `date,symbol,polarity,weight,sentiment_class,confidence`
//!   (weight optional, defaults to 1)
//! - features: `date,symbol,article_count,market_cap` (market_cap optional),
//!   long format, one row per symbol-date
//!
//! [`align_daily`] projects news and feature records onto the trading
//! calendar of a price series. Records dated on non-trading days roll
//! forward to the next trading date, so weekend news affects Monday.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::serialize::fmt_float;

/// Dated daily closing prices for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub symbol: String,
    pub dates: Vec<NaiveDate>,
    pub close: Vec<f64>,
    pub volume: Option<Vec<f64>>,
}

impl PriceSeries {
    /// Build a series from parallel vectors, enforcing the invariants:
    /// strictly increasing dates, positive closes, at least 2 rows.
    pub fn new(
        symbol: impl Into<String>,
        dates: Vec<NaiveDate>,
        close: Vec<f64>,
        volume: Option<Vec<f64>>,
    ) -> Result<Self> {
        if dates.len() != close.len() {
            return Err(Error::Contract(format!(
                "dates ({}) and close ({}) lengths differ",
                dates.len(),
                close.len()
            )));
        }
        if let Some(v) = &volume {
            if v.len() != dates.len() {
                return Err(Error::Contract("volume length differs from dates".into()));
            }
            if let Some(bad) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::Validation(format!("negative volume {bad}")));
            }
        }
        if dates.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "price series needs at least 2 rows, got {}",
                dates.len()
            )));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                if w[1] == w[0] {
                    return Err(Error::DuplicateDate(w[0]));
                }
                return Err(Error::Validation(format!(
                    "dates not strictly increasing at {}",
                    w[1]
                )));
            }
        }
        for (d, c) in dates.iter().zip(&close) {
            if !c.is_finite() || *c <= 0.0 {
                return Err(Error::Validation(format!("non-positive close {c} on {d}")));
            }
        }
        Ok(PriceSeries {
            symbol: symbol.into(),
            dates,
            close,
            volume,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Natural log of each close.
    pub fn log_close(&self) -> Vec<f64> {
        self.close.iter().map(|c| c.ln()).collect()
    }

    /// Sub-series restricted to `[start, end]` (inclusive, by calendar date).
    /// `None` bounds keep the respective end of the series.
    pub fn window(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Result<PriceSeries> {
        let lo = match start {
            Some(s) => self.dates.partition_point(|d| *d < s),
            None => 0,
        };
        let hi = match end {
            Some(e) => self.dates.partition_point(|d| *d <= e),
            None => self.len(),
        };
        if hi <= lo {
            return Err(Error::InsufficientData("empty date window".into()));
        }
        PriceSeries::new(
            self.symbol.clone(),
            self.dates[lo..hi].to_vec(),
            self.close[lo..hi].to_vec(),
            self.volume.as_ref().map(|v| v[lo..hi].to_vec()),
        )
    }
}

/// FinBERT-style article classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentimentClass {
    Positive,
    Neutral,
    Negative,
}

impl FromStr for SentimentClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "positive" => Ok(SentimentClass::Positive),
            "neutral" => Ok(SentimentClass::Neutral),
            "negative" => Ok(SentimentClass::Negative),
            other => Err(format!("unknown sentiment class '{other}'")),
        }
    }
}

impl fmt::Display for SentimentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SentimentClass::Positive => "positive",
            SentimentClass::Neutral => "neutral",
            SentimentClass::Negative => "negative",
        };
        f.write_str(s)
    }
}

/// One pre-scored news article.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsArticleRecord {
    pub date: NaiveDate,
    pub symbol: String,
    /// Polarity score in [-1, 1].
    pub polarity: f64,
    /// Aggregation weight, > 0. Defaults to 1 when the column is absent.
    pub weight: f64,
    pub sentiment_class: SentimentClass,
    /// Classifier confidence in [0, 1].
    pub confidence: f64,
}

impl NewsArticleRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.polarity.is_finite() || self.polarity.abs() > 1.0 {
            return Err(Error::Validation(format!(
                "polarity {} outside [-1,1]",
                self.polarity
            )));
        }
        if !self.confidence.is_finite() || !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Validation(format!(
                "confidence {} outside [0,1]",
                self.confidence
            )));
        }
        if !self.weight.is_finite() || self.weight <= 0.0 {
            return Err(Error::Validation(format!(
                "non-positive weight {}",
                self.weight
            )));
        }
        Ok(())
    }
}

/// Per-date market features: article counts and market caps by symbol.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarketFeatureRow {
    pub date: NaiveDate,
    pub article_count_by_symbol: BTreeMap<String, u64>,
    pub market_cap_by_symbol: BTreeMap<String, f64>,
}

pub(crate) fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().flexible(false).from_reader(file))
}

pub(crate) fn header_index(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing required column '{name}'"),
        })
}

pub(crate) fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

pub(crate) fn parse_field<T: FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
    path: &Path,
) -> Result<T> {
    let raw = record.get(idx).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: record_line(record),
        message: format!("missing field '{name}'"),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: record_line(record),
        message: format!("cannot parse '{}' as {name}", raw.trim()),
    })
}

/// Load and validate a prices CSV (`date,close,volume`; volume optional).
///
/// Rows are sorted by date; duplicate dates are rejected.
pub fn load_prices(path: impl AsRef<Path>, symbol: &str) -> Result<PriceSeries> {
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
    let close_idx = header_index(&headers, "close", path)?;
    let volume_idx = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("volume"));

    let mut rows: Vec<(NaiveDate, f64, Option<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let date: NaiveDate = parse_field(&record, date_idx, "date", path)?;
        let close: f64 = parse_field(&record, close_idx, "close", path)?;
        let volume = match volume_idx {
            Some(idx) => {
                let raw = record.get(idx).unwrap_or("").trim();
                if raw.is_empty() {
                    None
                } else {
                    Some(parse_field::<f64>(&record, idx, "volume", path)?)
                }
            }
            None => None,
        };
        rows.push((date, close, volume));
    }

    rows.sort_by_key(|r| r.0);
    let has_volume = rows.iter().any(|r| r.2.is_some());
    let dates: Vec<NaiveDate> = rows.iter().map(|r| r.0).collect();
    let close: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let volume = if has_volume {
        Some(rows.iter().map(|r| r.2.unwrap_or(0.0)).collect())
    } else {
        None
    };
    PriceSeries::new(symbol, dates, close, volume)
}

/// Write a prices CSV in the canonical column order.
pub fn write_prices(path: impl AsRef<Path>, series: &PriceSeries) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    match &series.volume {
        Some(vol) => {
            out.push_str("date,close,volume\n");
            for ((d, c), v) in series.dates.iter().zip(&series.close).zip(vol) {
                out.push_str(&format!("{d},{},{}\n", fmt_float(*c), fmt_float(*v)));
            }
        }
        None => {
            out.push_str("date,close\n");
            for (d, c) in series.dates.iter().zip(&series.close) {
                out.push_str(&format!("{d},{}\n", fmt_float(*c)));
            }
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load a news CSV (`date,symbol,polarity,weight,sentiment_class,confidence`).
///
/// The weight column may be absent or blank; such articles get weight 1.
pub fn load_news(path: impl AsRef<Path>) -> Result<Vec<NewsArticleRecord>> {
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
    let symbol_idx = header_index(&headers, "symbol", path)?;
    let polarity_idx = header_index(&headers, "polarity", path)?;
    let class_idx = header_index(&headers, "sentiment_class", path)?;
    let confidence_idx = header_index(&headers, "confidence", path)?;
    let weight_idx = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("weight"));

    let mut articles = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        let class_raw = record.get(class_idx).unwrap_or("").trim();
        let sentiment_class = class_raw.parse().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e,
        })?;
        let weight = match weight_idx {
            Some(idx) if !record.get(idx).unwrap_or("").trim().is_empty() => {
                parse_field::<f64>(&record, idx, "weight", path)?
            }
            _ => 1.0,
        };
        let article = NewsArticleRecord {
            date: parse_field(&record, date_idx, "date", path)?,
            symbol: record.get(symbol_idx).unwrap_or("").trim().to_string(),
            polarity: parse_field(&record, polarity_idx, "polarity", path)?,
            weight,
            sentiment_class,
            confidence: parse_field(&record, confidence_idx, "confidence", path)?,
        };
        article.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        articles.push(article);
    }
    Ok(articles)
}

/// Write a news CSV in the canonical column order.
pub fn write_news(path: impl AsRef<Path>, articles: &[NewsArticleRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("date,symbol,polarity,weight,sentiment_class,confidence\n");
    for a in articles {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            a.date,
            a.symbol,
            fmt_float(a.polarity),
            fmt_float(a.weight),
            a.sentiment_class,
            fmt_float(a.confidence)
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write a long-format features CSV, one row per (date, symbol).
pub fn write_features(path: impl AsRef<Path>, rows: &[MarketFeatureRow]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("date,symbol,article_count,market_cap\n");
    for row in rows {
        for (symbol, count) in &row.article_count_by_symbol {
            out.push_str(&format!("{},{symbol},{count},", row.date));
            if let Some(cap) = row.market_cap_by_symbol.get(symbol) {
                out.push_str(&fmt_float(*cap));
            }
            out.push('\n');
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load a long-format features CSV (`date,symbol,article_count,market_cap`)
/// and group rows by date. `market_cap` may be absent or blank.
pub fn load_features(path: impl AsRef<Path>) -> Result<Vec<MarketFeatureRow>> {
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
    let symbol_idx = header_index(&headers, "symbol", path)?;
    let count_idx = header_index(&headers, "article_count", path)?;
    let cap_idx = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("market_cap"));

    let mut by_date: BTreeMap<NaiveDate, MarketFeatureRow> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        let date: NaiveDate = parse_field(&record, date_idx, "date", path)?;
        let symbol = record.get(symbol_idx).unwrap_or("").trim().to_string();
        let count: u64 = parse_field(&record, count_idx, "article_count", path)?;
        let cap = match cap_idx {
            Some(idx) if !record.get(idx).unwrap_or("").trim().is_empty() => {
                let c: f64 = parse_field(&record, idx, "market_cap", path)?;
                if !c.is_finite() || c <= 0.0 {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: format!("non-positive market_cap {c}"),
                    });
                }
                Some(c)
            }
            _ => None,
        };
        let row = by_date.entry(date).or_insert_with(|| MarketFeatureRow {
            date,
            ..Default::default()
        });
        row.article_count_by_symbol.insert(symbol.clone(), count);
        if let Some(c) = cap {
            row.market_cap_by_symbol.insert(symbol, c);
        }
    }
    Ok(by_date.into_values().collect())
}

/// Why an input record was dropped during alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    /// Dated after the last trading date; there is no next trading day.
    AfterCalendar,
    /// A later feature row rolled onto the same trading date.
    Superseded,
}

/// Log entry for a record that did not land in any aligned row.
#[derive(Debug, Clone)]
pub struct RejectedRecord {
    pub date: NaiveDate,
    pub kind: &'static str,
    pub reason: RejectReason,
}

/// One trading date with everything attributed to it.
#[derive(Debug, Clone)]
pub struct AlignedRow {
    pub date: NaiveDate,
    pub close: f64,
    /// Articles attributed to this trading date (all symbols).
    pub articles: Vec<NewsArticleRecord>,
    pub article_counts: Option<BTreeMap<String, u64>>,
    pub market_caps: Option<BTreeMap<String, f64>>,
}

/// Prices, news, and features joined onto one daily calendar.
#[derive(Debug, Clone)]
pub struct AlignedData {
    pub symbol: String,
    pub rows: Vec<AlignedRow>,
    pub rejected: Vec<RejectedRecord>,
    /// False when no feature rows were supplied; hype inputs are then absent.
    pub has_features: bool,
}

impl AlignedData {
    pub fn dates(&self) -> Vec<NaiveDate> {
        self.rows.iter().map(|r| r.date).collect()
    }
}

/// Align news and features onto the trading calendar of `prices`.
///
/// Every output row corresponds to one trading date. Records dated on
/// non-trading days are attributed to the next trading date; records after
/// the final trading date go to the rejected log. Dates with no news get
/// empty article sets, so hype and sentiment contributions default to 0.
pub fn align_daily(
    prices: &PriceSeries,
    news: &[NewsArticleRecord],
    features: &[MarketFeatureRow],
) -> Result<AlignedData> {
    if prices.is_empty() {
        return Err(Error::InsufficientData("empty price series".into()));
    }
    let mut rows: Vec<AlignedRow> = prices
        .dates
        .iter()
        .zip(&prices.close)
        .map(|(d, c)| AlignedRow {
            date: *d,
            close: *c,
            articles: Vec::new(),
            article_counts: None,
            market_caps: None,
        })
        .collect();
    let mut rejected = Vec::new();

    // First trading date >= d, or None when d is past the calendar.
    let next_trading = |d: NaiveDate| -> Option<usize> {
        let idx = prices.dates.partition_point(|t| *t < d);
        (idx < prices.dates.len()).then_some(idx)
    };

    for article in news {
        article.validate()?;
        match next_trading(article.date) {
            Some(idx) => rows[idx].articles.push(article.clone()),
            None => rejected.push(RejectedRecord {
                date: article.date,
                kind: "article",
                reason: RejectReason::AfterCalendar,
            }),
        }
    }

    // Later-dated feature rows supersede earlier ones on the same trading date.
    let mut feature_source: Vec<Option<NaiveDate>> = vec![None; rows.len()];
    for feature in features {
        match next_trading(feature.date) {
            Some(idx) => {
                if let Some(prev) = feature_source[idx] {
                    rejected.push(RejectedRecord {
                        date: prev.min(feature.date),
                        kind: "feature",
                        reason: RejectReason::Superseded,
                    });
                }
                if feature_source[idx].map_or(true, |prev| feature.date >= prev) {
                    feature_source[idx] = Some(feature.date);
                    rows[idx].article_counts = Some(feature.article_count_by_symbol.clone());
                    rows[idx].market_caps = if feature.market_cap_by_symbol.is_empty() {
                        None
                    } else {
                        Some(feature.market_cap_by_symbol.clone())
                    };
                }
            }
            None => rejected.push(RejectedRecord {
                date: feature.date,
                kind: "feature",
                reason: RejectReason::AfterCalendar,
            }),
        }
    }

    Ok(AlignedData {
        symbol: prices.symbol.clone(),
        rows,
        rejected,
        has_features: !features.is_empty(),
    })
}
