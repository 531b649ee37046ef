//! Number formatting shared by the CSV writers.

/// Scientific notation with 17 significant digits, which round-trips every
/// finite `f64` exactly. Infinities print as `inf` / `-inf`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}
