//! Number rendering shared by every output format.

/// Renders `x` with 15 significant digits: plain decimal for exponents in
/// `[-5, 15)`, scientific otherwise.
pub fn sig15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.14e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, x)
    } else {
        sci
    }
}

/// `x` rounded to 15 significant digits, for structured output.
pub fn round15(x: f64) -> f64 {
    if x.is_finite() {
        sig15(x).parse().expect("sig15 renders a float")
    } else {
        x
    }
}
