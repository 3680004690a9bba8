//! Number formatting shared by the JSON and CSV emitters.
//!
//! Floats are written in shortest round-trip form, so parsing an emitted
//! value gives back the identical `f64`.

use serde_json::Value;

use crate::error::Error;
use crate::scalar::Complex;

/// Shortest decimal string that parses back to `x`; `1.0` prints as `1.0`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite floats always serialize")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `[re, im]`.
pub fn complex_pair(z: Complex) -> Value {
    serde_json::json!([z.re, z.im])
}

/// JSON object key for an exponent: `2`, `1.5`, `inf`.
pub fn exponent_key(p: f64) -> String {
    format!("{p}")
}

/// One-line machine-readable error record.
pub fn error_json(err: &Error) -> Value {
    serde_json::json!({"error": err.kind(), "message": err.to_string()})
}
