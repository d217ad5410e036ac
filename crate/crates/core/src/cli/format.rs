//! Fixed-precision number rendering for text and CSV output.

pub const SIG_DIGITS: usize = 12;

/// Renders `x` in fixed notation with [`SIG_DIGITS`] significant digits.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", SIG_DIGITS - 1, 0.0);
    }
    let decimals = |mag: i32| (SIG_DIGITS as i32 - 1 - mag).max(0) as usize;
    let mag = x.abs().log10().floor() as i32;
    let s = format!("{:.*}", decimals(mag), x);
    // Rounding can carry into the next decade (9.99... -> 10.0...).
    let rounded: f64 = s.parse().unwrap_or(x);
    let new_mag = rounded.abs().log10().floor() as i32;
    if new_mag > mag {
        format!("{:.*}", decimals(new_mag), x)
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.46), "0.460000000000");
        assert_eq!(num(0.1 + 0.2), "0.300000000000");
        assert_eq!(num(0.0), "0.00000000000");
        assert_eq!(num(-2.5), "-2.50000000000");
        assert_eq!(num(123456.0), "123456.000000");
        assert_eq!(num(1e-5), "0.0000100000000000");
        assert_eq!(num(1e15), "1000000000000000");
        assert_eq!(num(9.9999999999999), "10.0000000000");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }
}
