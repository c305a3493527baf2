//! Number formatting shared by every CSV writer.

/// dB values: four decimals, `-inf` for a zero linear value.
pub fn fmt_db(db: f64) -> String {
    if db == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{db:.4}")
    }
}

/// Linear values in scientific notation.
pub fn fmt_lin(v: f64) -> String {
    format!("{v:.6e}")
}
