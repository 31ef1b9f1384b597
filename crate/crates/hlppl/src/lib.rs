//! Bubble detection and trading toolkit built on the log-periodic power
//! law, mean-reverting residuals, and news-based behavioral signals.

pub mod backtest;
pub mod commands;
pub mod config;
pub mod error;
pub mod forecast;
pub mod ingest;
pub mod lppl;
pub mod residuals;
pub mod score;
pub mod serialize;
pub mod signals;
pub mod synth;

pub use error::{Error, Result};
