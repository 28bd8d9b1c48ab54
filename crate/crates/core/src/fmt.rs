//! Number formatting for diffable text output.

/// Formats `v` with 10 significant digits: fixed notation for moderate
/// magnitudes, scientific otherwise.
pub fn sig10(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.000000000".into();
    }
    let sci = format!("{v:.9e}");
    // exponent after rounding to 10 significant digits
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if !(-6..=15).contains(&exp) {
        return sci;
    }
    let decimals = (9 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::sig10;

    #[test]
    fn examples() {
        assert_eq!(sig10(0.5), "0.5000000000");
        assert_eq!(sig10(1.0), "1.000000000");
        assert_eq!(sig10(-1234.5), "-1234.500000");
        assert_eq!(sig10(0.56009915), "0.5600991500");
        assert_eq!(sig10(9.99999999999), "10.00000000");
        assert_eq!(sig10(1e-9), "1.000000000e-9");
        assert_eq!(sig10(f64::INFINITY), "inf");
        assert_eq!(sig10(0.0), "0.000000000");
    }
}
