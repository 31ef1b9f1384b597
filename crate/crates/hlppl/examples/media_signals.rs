//! Compute the media-attention signals: hype, capitalization-adjusted
//! hype, and daily sentiment aggregates on a hand-built news set.
//!
//! Run with: cargo run --release --example media_signals

use chrono::NaiveDate;
use hlppl::ingest::{
    align_daily, MarketFeatureRow, NewsArticleRecord, PriceSeries, SentimentClass,
};
use hlppl::signals::{compute_signals, SentimentSource};
use hlppl::synth::business_days;

fn article(
    date: NaiveDate,
    symbol: &str,
    polarity: f64,
    weight: f64,
    confidence: f64,
) -> NewsArticleRecord {
    let sentiment_class = if polarity > 0.2 {
        SentimentClass::Positive
    } else if polarity < -0.2 {
        SentimentClass::Negative
    } else {
        SentimentClass::Neutral
    };
    NewsArticleRecord {
        date,
        symbol: symbol.to_string(),
        polarity,
        weight,
        sentiment_class,
        confidence,
    }
}

fn main() -> hlppl::Result<()> {
    let dates = business_days("2021-03-01".parse().expect("date"), 5);
    let prices = PriceSeries::new(
        "HOUS",
        dates.clone(),
        vec![100.0, 103.0, 108.0, 114.0, 121.0],
        None,
    )?;

    // Coverage ramps up while the market-wide article count stays fixed,
    // so the hype index rises day over day. HOUS is a tenth of total
    // market cap, so any hype share above 0.1 is "excessive" relative to
    // its size (CapH > 1).
    let mut features = Vec::new();
    for (i, date) in dates.iter().enumerate() {
        let mut row = MarketFeatureRow {
            date: *date,
            ..Default::default()
        };
        row.article_count_by_symbol.insert("HOUS".into(), 2 + 3 * i as u64);
        row.article_count_by_symbol.insert("REST".into(), 38 - 3 * i as u64);
        row.market_cap_by_symbol.insert("HOUS".into(), 1.0e9);
        row.market_cap_by_symbol.insert("REST".into(), 9.0e9);
        features.push(row);
    }

    // Tone turns from mixed to euphoric as the ramp proceeds.
    let mut news = Vec::new();
    for (i, date) in dates.iter().enumerate() {
        let polarity = -0.2 + 0.25 * i as f64;
        for k in 0..(2 + 3 * i) {
            news.push(article(
                *date,
                "HOUS",
                (polarity + 0.05 * k as f64).clamp(-1.0, 1.0),
                1.0 + k as f64 * 0.5,
                0.6 + 0.08 * i as f64,
            ));
        }
    }

    let aligned = align_daily(&prices, &news, &features)?;
    let signals = compute_signals(&aligned)?;

    println!(
        "{:<12}{:>8}{:>8}{:>11}{:>8}{:>8}{:>8}{:>10}",
        "date", "hype", "caph", "sentiment", "s_pos", "s_neu", "s_neg", "finbert"
    );
    let finbert = signals.sentiment_channel(SentimentSource::Finbert);
    for i in 0..signals.len() {
        println!(
            "{:<12}{:>8.3}{:>8.3}{:>11.3}{:>8.3}{:>8.3}{:>8.3}{:>10.3}",
            signals.dates[i],
            signals.hype[i],
            signals.cap_hype[i].expect("caps supplied"),
            signals.sentiment[i],
            signals.s_pos[i],
            signals.s_neu[i],
            signals.s_neg[i],
            finbert[i],
        );
    }

    let total_hype: f64 = signals.hype.iter().sum();
    println!();
    println!("hype is a share of market coverage: HOUS total over the week = {total_hype:.3}");
    println!("CapH > 1 marks coverage outrunning market-cap weight (0.1 here)");
    Ok(())
}
