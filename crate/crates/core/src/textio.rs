//! Shared text-serialization helpers for the crate's data files.

/// Format a float as decimal text with 17 significant digits.
///
/// 17 significant digits round-trip every f64 bit pattern, so files written
/// with this formatter reload losslessly. Exact zero abbreviates to `0`
/// (idle-port columns dominate telemetry files; spelling zero out would
/// roughly double file size for no information).
pub(crate) fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        String::from("0")
    } else {
        format!("{x:.16e}")
    }
}
