//! Text formatting shared by exports.

/// Scientific notation with 17 significant digits, enough to round-trip any
/// `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}
