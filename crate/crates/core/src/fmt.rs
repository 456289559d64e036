//! Number formatting shared by every CSV writer.

/// Formats `x` in positional decimal notation with 17 significant digits.
///
/// Non-finite values are written as `nan`, `inf` and `-inf`.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return format!("{:.16}", 0.0);
    }
    // Scientific formatting fixes the decimal exponent after rounding.
    let sci = format!("{:.16e}", x);
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    let decimals = (16 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}
