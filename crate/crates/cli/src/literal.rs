//! Complex literals of the form `a+bi`, `a-bi`, `a`, `bi`.
//!
//! Components are anything `f64::from_str` accepts, so `1e-3+2.5i` works.
//! [`render`] is the inverse of [`parse`] for every finite value, signed
//! zeros included.

use canonical_fock::Complex;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed complex literal {literal:?}: expected a+bi, a-bi, a or bi")]
pub struct LiteralError {
    pub literal: String,
}

pub fn parse(text: &str) -> Result<Complex, LiteralError> {
    let fail = || LiteralError {
        literal: text.to_string(),
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(fail());
    }
    let Some(body) = s.strip_suffix('i') else {
        let re = component(s).ok_or_else(fail)?;
        return Ok(Complex::new(re, 0.0));
    };
    // the imaginary part starts at the last sign that is not a leading sign
    // and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (
            component(&body[..k]).ok_or_else(fail)?,
            imaginary(&body[k..]).ok_or_else(fail)?,
        ),
        None => (0.0, imaginary(body).ok_or_else(fail)?),
    };
    Ok(Complex::new(re, im))
}

fn component(s: &str) -> Option<f64> {
    // reject words such as "inf" and "nan" that f64 parsing accepts
    if !s.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// `+`, `-` and the empty string stand for a unit coefficient.
fn imaginary(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => component(s),
    }
}

/// `re±imi` with both parts in shortest round-trip form.
pub fn render(z: Complex) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", z.re, z.im.abs())
}
