//! Float formatting for emitted CSV files.

/// Shortest decimal string that parses back to exactly `x`.
///
/// Plain notation is used for moderate magnitudes and scientific notation
/// outside `[1e-5, 1e17)`, in the spirit of C's `%.17g` but without
/// trailing noise digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-5..1e17).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
