//! Branch-fixed complex scalar functions and special-function primitives.
//!
//! Every square root in the crate goes through [`principal_sqrt`], which uses
//! the argument range `(-π, π]`. On the negative real axis that places the
//! root on the positive imaginary axis, and a negative-zero imaginary part is
//! treated as `+0` so `-4 - 0i` and `-4 + 0i` both give `2i`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Largest index held in the cached log-factorial table.
pub const LOG_TABLE_MAX: usize = 512;

/// The imaginary unit.
pub const I: Complex = Complex::new(0.0, 1.0);

/// Shorthand constructor.
#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Rejects NaN or infinite components.
pub fn ensure_finite(z: Complex, what: &'static str) -> Result<Complex> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Maps a negative-zero imaginary part to `+0`.
#[inline]
pub fn normalize_signed_zero(z: Complex) -> Complex {
    if z.im == 0.0 {
        Complex::new(z.re, 0.0)
    } else {
        z
    }
}

/// Principal square root with `arg z ∈ (-π, π]`.
pub fn principal_sqrt(z: Complex) -> Result<Complex> {
    ensure_finite(z, "principal_sqrt argument")?;
    Ok(psqrt(z))
}

/// [`principal_sqrt`] for arguments already known to be finite.
pub(crate) fn psqrt(z: Complex) -> Complex {
    let z = normalize_signed_zero(z);
    if z.re == 0.0 && z.im == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    let modulus = z.re.hypot(z.im);
    if z.re >= 0.0 {
        let r = ((modulus + z.re) / 2.0).sqrt();
        Complex::new(r, z.im / (2.0 * r))
    } else {
        // im >= +0 maps to the upper half plane, including the negative axis
        let r = ((modulus - z.re) / 2.0).sqrt();
        let im = if z.im >= 0.0 { r } else { -r };
        Complex::new(z.im.abs() / (2.0 * r), im)
    }
}

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite(n: usize, x: Complex) -> Complex {
    let mut prev = Complex::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * (k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Monomial coefficients of `H_n`, lowest degree first.
pub fn hermite_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (i, &a) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * a;
        }
        for (i, &a) in prev.iter().enumerate() {
            next[i] -= 2.0 * (k as f64) * a;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LOG_TABLE_MAX + 1);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..=LOG_TABLE_MAX {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln n!`, tabulated up to [`LOG_TABLE_MAX`] and extended by summation.
pub fn ln_factorial(n: usize) -> f64 {
    let table = log_factorial_table();
    if n <= LOG_TABLE_MAX {
        table[n]
    } else {
        table[LOG_TABLE_MAX]
            + ((LOG_TABLE_MAX + 1)..=n)
                .map(|k| (k as f64).ln())
                .sum::<f64>()
    }
}

/// `ln (2m-1)!!`, with `(-1)!! = 1`.
pub fn ln_odd_double_factorial(m: usize) -> f64 {
    ln_factorial(2 * m) - (m as f64) * std::f64::consts::LN_2 - ln_factorial(m)
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Closed form of `∫_ℝ x^k exp(-ν (x - m)²) dx` for `Re ν > 0`.
pub fn gaussian_moment(k: usize, nu: Complex, m: Complex) -> Result<Complex> {
    ensure_finite(nu, "gaussian_moment nu")?;
    ensure_finite(m, "gaussian_moment shift")?;
    if nu.re <= 0.0 {
        return Err(Error::Divergent(format!(
            "gaussian moment needs Re(nu) > 0, got nu = {nu}"
        )));
    }
    let prefactor = psqrt(PI / nu);
    let inv_two_nu = 1.0 / (2.0 * nu);
    let mut sum = Complex::new(0.0, 0.0);
    for half in 0..=k / 2 {
        let j = 2 * half;
        let coeff = (ln_binomial(k, j) + ln_odd_double_factorial(half)).exp();
        sum += coeff * m.powu((k - j) as u32) * inv_two_nu.powu(half as u32);
    }
    Ok(prefactor * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sqrt_examples() {
        assert_eq!(principal_sqrt(c(4.0, 0.0)).unwrap(), c(2.0, 0.0));
        assert_eq!(principal_sqrt(c(-4.0, 0.0)).unwrap(), c(0.0, 2.0));
        assert_eq!(principal_sqrt(c(-4.0, -0.0)).unwrap(), c(0.0, 2.0));
        let r = principal_sqrt(c(0.0, 2.0)).unwrap();
        assert_relative_eq!(r.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.im, 1.0, epsilon = 1e-15);
        assert_eq!(principal_sqrt(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn sqrt_rejects_non_finite() {
        assert_eq!(
            principal_sqrt(c(f64::NAN, 0.0)).unwrap_err().kind(),
            "non_finite"
        );
        assert!(principal_sqrt(c(1.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn sqrt_lower_half_plane_near_negative_axis() {
        let r = psqrt(c(-4.0, -1e-300));
        assert!(r.im < 0.0);
        assert!(r.re >= 0.0);
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0, c(3.7, -1.0)), c(1.0, 0.0));
        assert_eq!(hermite(2, c(1.0, 0.0)), c(2.0, 0.0));
        assert_eq!(hermite(3, c(2.0, 0.0)), c(40.0, 0.0));
    }

    #[test]
    fn hermite_coefficients_match_recurrence() {
        for n in 0..=12 {
            let coeffs = hermite_coefficients(n);
            assert_eq!(coeffs.len(), n + 1);
            let x = c(0.3, -0.7);
            let via_poly: Complex = coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| a * x.powu(k as u32))
                .sum();
            let direct = hermite(n, x);
            assert!((via_poly - direct).norm() <= 1e-12 * direct.norm().max(1.0));
        }
        assert_eq!(hermite_coefficients(3), vec![0.0, -12.0, 0.0, 8.0]);
    }

    #[test]
    fn moment_examples() {
        let sqrt_pi = PI.sqrt();
        let m0 = gaussian_moment(0, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(m0.re, sqrt_pi, max_relative = 1e-15);
        let m1 = gaussian_moment(1, c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        assert_relative_eq!(m1.re, 3.0 * sqrt_pi, max_relative = 1e-14);
        let m2 = gaussian_moment(2, c(2.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(m2.re, (PI / 2.0).sqrt() / 4.0, max_relative = 1e-14);
        assert_eq!(m2.im, 0.0);
    }

    #[test]
    fn moment_diverges_for_non_positive_real_part() {
        let err = gaussian_moment(2, c(0.0, 1.0), c(0.0, 0.0)).unwrap_err();
        assert_eq!(err.kind(), "divergent");
        assert!(gaussian_moment(0, c(-1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn log_tables() {
        assert_relative_eq!(ln_factorial(5), 120f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(ln_odd_double_factorial(3), 15f64.ln(), max_relative = 1e-14);
        assert_eq!(ln_odd_double_factorial(0), 0.0);
        let beyond = ln_factorial(LOG_TABLE_MAX + 2);
        let expected = ln_factorial(LOG_TABLE_MAX)
            + ((LOG_TABLE_MAX + 1) as f64).ln()
            + ((LOG_TABLE_MAX + 2) as f64).ln();
        assert_relative_eq!(beyond, expected, max_relative = 1e-15);
    }
}
