//! Stable text formatting for output artifacts.
//!
//! All floats written to disk go through [`fmt_float`], which renders 12
//! significant digits in `%g` style. Re-running a command with the same
//! inputs and seed then reproduces byte-identical files.

const SIG_DIGITS: usize = 12;

/// Format a float with 12 significant digits, trimming trailing zeros.
///
/// Uses plain decimal notation for moderate exponents and scientific
/// notation otherwise, like C's `%.12g`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let s = format!("{:.*e}", SIG_DIGITS - 1, x);
        trim_exponential(&s)
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_decimal(&s)
    }
}

/// Round a float to 12 significant digits before handing it to a JSON writer.
pub fn round_float(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    fmt_float(x).parse().unwrap_or(x)
}

fn trim_decimal(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

fn trim_exponential(s: &str) -> String {
    // "1.230000000000e5" -> "1.23e5"
    match s.split_once('e') {
        Some((mantissa, exp)) => format!("{}e{}", trim_decimal(mantissa), exp),
        None => s.to_string(),
    }
}
