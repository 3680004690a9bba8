//! Singular values, Schatten norms, trace and eigenfunctions of compact
//! `T^(s,t)`, each available in closed form and by an independent numeric
//! route through the finite section.
//!
//! In the compact regime `|s|² > |t|² + 1` the quadratic
//!
//! ```text
//! conj(st)·γ² + (|s|² + |t|² + 1)·γ + st = 0
//! ```
//!
//! has exactly one root in the unit disk. With `S = |s|² + γ·conj(st)` (a
//! real number larger than `|s|`) and `r = |s|/S`, the eigenvalues of `|T|²`
//! are `λ_n = r^{2n+1}` with eigenfunctions `Q_n(z)·e^{γz²/2}`, and the
//! singular values are `μ_n = r^{n+1/2}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ParameterPair;
use crate::operator::{section, FockCoefficients, TruncatedOperator, MAX_DIM};
use crate::quadrature::{gaussian_quadratic_form_r2, QuadraticForm2};
use crate::scalar::{gaussian_moment, hermite_coefficients, ln_factorial, psqrt, Complex};

/// Largest eigenfunction index supported by [`eigenfunction_coeffs`].
pub const MAX_EIGEN_INDEX: usize = 32;

/// Auto-selected dimensions stop growing once `μ_N / μ_0` falls below this.
pub const AUTO_DIM_TAIL: f64 = 1e-12;

/// The root `γ` in the unit disk and the derived decay ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSolution {
    pub gamma: Complex,
    /// Largest eigenvalue of `|T|²`; equal to `ratio`.
    pub lambda0: f64,
    /// `|s| / (|s|² + γ·conj(st))`.
    pub ratio: f64,
    /// `|s|² + γ·conj(st)`, real by construction.
    pub shifted: f64,
}

impl GammaSolution {
    /// `conj(st)γ² + (|s|²+|t|²+1)γ + st`.
    pub fn residual(&self, p: &ParameterPair) -> Complex {
        let st = p.s() * p.t();
        let b = p.s().norm_sqr() + p.t().norm_sqr() + 1.0;
        st.conj() * self.gamma * self.gamma + b * self.gamma + st
    }
}

/// Solves for `γ`, dividing out the large root so small `|t|` loses no digits.
pub fn gamma_root(p: &ParameterPair) -> Result<GammaSolution> {
    p.require_compact()?;
    let s2 = p.s().norm_sqr();
    let abs_s = p.abs_s();
    let st = p.s() * p.t();
    if st.re == 0.0 && st.im == 0.0 {
        return Ok(GammaSolution {
            gamma: Complex::new(0.0, 0.0),
            lambda0: 1.0 / abs_s,
            ratio: 1.0 / abs_s,
            shifted: s2,
        });
    }
    let b = s2 + p.t().norm_sqr() + 1.0;
    let d = p.discriminant();
    let root_disc = (d * d + 4.0 * s2).sqrt();
    // product of the roots is st / conj(st), of modulus one
    let small = -2.0 * st / (b + root_disc);
    let large = -(b + root_disc) / (2.0 * st.conj());
    if !(small.norm() < 1.0 && large.norm() > 1.0) {
        return Err(Error::Inconsistent(format!(
            "expected exactly one root in the unit disk, got |γ+| = {}, |γ-| = {}",
            small.norm(),
            large.norm()
        )));
    }
    let shifted = s2 + small * st.conj();
    if shifted.im.abs() > 1e-12 * shifted.re.abs() {
        return Err(Error::Inconsistent(format!(
            "γ·conj(st) should be real, got imaginary part {}",
            shifted.im
        )));
    }
    let ratio = abs_s / shifted.re;
    Ok(GammaSolution {
        gamma: small,
        lambda0: ratio,
        ratio,
        shifted: shifted.re,
    })
}

/// `2|s| / (d + √(d² + 4|s|²))` with `d = |s|² − |t|² − 1`: the decay base
/// of the singular values written directly in terms of `(s, t)`.
pub fn singular_value_base(p: &ParameterPair) -> Result<f64> {
    p.require_compact()?;
    let d = p.discriminant();
    let s2 = p.s().norm_sqr();
    Ok(2.0 * p.abs_s() / (d + (d * d + 4.0 * s2).sqrt()))
}

/// The first `count` singular values `μ_n`, in decreasing order.
///
/// Both closed forms (direct, and through [`gamma_root`]) are evaluated and
/// must agree to `1e-13` relative.
pub fn closed_singular_values(p: &ParameterPair, count: usize) -> Result<Vec<f64>> {
    let base = singular_value_base(p)?;
    let via_gamma = gamma_root(p)?.ratio;
    if (base - via_gamma).abs() > 1e-13 * base {
        return Err(Error::Inconsistent(format!(
            "decay ratio mismatch: {base} vs {via_gamma}"
        )));
    }
    Ok((0..count).map(|n| base.powf(n as f64 + 0.5)).collect())
}

/// Sorted (decreasing) eigenvalues of the Hermitian matrix `MᴴM`.
pub fn gram_eigenvalues(op: &TruncatedOperator) -> Vec<f64> {
    let eig = SymmetricEigen::new(op.gram());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// The `count` largest singular values of the finite section.
pub fn numeric_singular_values(op: &TruncatedOperator, count: usize) -> Result<Vec<f64>> {
    if count > op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: count,
        });
    }
    Ok(gram_eigenvalues(op)
        .into_iter()
        .take(count)
        .map(|v| v.max(0.0).sqrt())
        .collect())
}

/// `‖T‖_{S_p}`; `pexp = ∞` gives the operator norm `μ_0`.
pub fn schatten_norm_closed(p: &ParameterPair, pexp: f64) -> Result<f64> {
    check_exponent(pexp)?;
    let mu0 = singular_value_base(p)?.sqrt();
    if pexp.is_infinite() {
        return Ok(mu0);
    }
    Ok(mu0 * (1.0 - mu0.powf(2.0 * pexp)).powf(-1.0 / pexp))
}

/// `(Σ μ_n^p)^{1/p}` of a list of singular values, or its maximum for `p = ∞`.
pub fn schatten_norm_of(singular_values: &[f64], pexp: f64) -> Result<f64> {
    check_exponent(pexp)?;
    if pexp.is_infinite() {
        return Ok(singular_values.iter().copied().fold(0.0, f64::max));
    }
    Ok(singular_values
        .iter()
        .map(|m| m.powf(pexp))
        .sum::<f64>()
        .powf(1.0 / pexp))
}

fn check_exponent(pexp: f64) -> Result<()> {
    if pexp > 0.0 && !pexp.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Schatten exponent must be positive, got {pexp}"
        )))
    }
}

/// Which side of `‖T‖_{S_p}^p` a [`SchattenBound`] controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Upper,
    Lower,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenBound {
    /// Bound on `‖T‖_{S_p}^p`.
    pub value: f64,
    pub side: BoundSide,
}

/// `2|s| / (p (|s|²−|t|²−1) (|s|²−|t|²)^{(p−2)/4})`, an upper bound on
/// `‖T‖_{S_p}^p` for `p ≤ 2` and a lower bound for `p ≥ 2`.
pub fn schatten_bounds(p: &ParameterPair, pexp: f64) -> Result<SchattenBound> {
    p.require_compact()?;
    if !(pexp > 0.0 && pexp.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Schatten exponent must be positive and finite, got {pexp}"
        )));
    }
    let value = 2.0 * p.abs_s() / (pexp * p.discriminant() * p.gap().powf((pexp - 2.0) / 4.0));
    let side = if pexp < 2.0 {
        BoundSide::Upper
    } else if pexp > 2.0 {
        BoundSide::Lower
    } else {
        BoundSide::Both
    };
    Ok(SchattenBound { value, side })
}

/// `tr T = s^{-1/2} √(s² / ((s−1)² + |t|²))`.
pub fn trace_closed(p: &ParameterPair) -> Result<Complex> {
    p.require_compact()?;
    let s = p.s();
    let inner = s * s / ((s - 1.0) * (s - 1.0) + p.t().norm_sqr());
    Ok(psqrt(inner) / psqrt(s))
}

/// The symmetric matrix `A` with `(1/π)∫ Berezin dA = (π√s)^{-1} ∫∫ e^{-uᵀAu} du`.
pub fn trace_quadratic_form(p: &ParameterPair) -> QuadraticForm2 {
    let s = p.s();
    let t = p.t();
    let tc = t.conj();
    let i = Complex::new(0.0, 1.0);
    QuadraticForm2::new(
        -(t - tc - 2.0 * s + 2.0) / (2.0 * s),
        -(t + tc) * i / (2.0 * s),
        -(-t + tc - 2.0 * s + 2.0) / (2.0 * s),
    )
}

/// The trace by the real Gaussian integral `π/√det A`.
pub fn trace_via_quadratic_form(p: &ParameterPair) -> Result<Complex> {
    p.require_compact()?;
    let integral = gaussian_quadratic_form_r2(&trace_quadratic_form(p))?;
    Ok(integral / (PI * psqrt(p.s())))
}

/// Smallest power-of-two dimension (from 16, at most [`MAX_DIM`]) whose
/// first discarded singular value is below `AUTO_DIM_TAIL·μ_0` and whose last
/// half of the diagonal has total modulus below than `AUTO_DIM_TAIL·max(1, |trace|)`.
///
/// The diagonal decays more slowly than `μ_n`, so the second test usually
/// decides; without it the diagonal trace can be off by `1e-9`.
pub fn auto_dimension(p: &ParameterPair) -> Result<usize> {
    let base = singular_value_base(p)?;
    let mut dim = 16;
    while dim < MAX_DIM && base.powi(dim as i32) >= AUTO_DIM_TAIL {
        dim *= 2;
    }
    while dim < MAX_DIM {
        let diag = section(*p, dim, dim)?;
        let total: Complex = diag.diagonal().iter().sum();
        let window: f64 = diag.diagonal().iter().skip(dim / 2).map(|z| z.norm()).sum();
        if window < AUTO_DIM_TAIL * total.norm().max(1.0) {
            break;
        }
        dim *= 2;
    }
    Ok(dim.min(MAX_DIM))
}

/// Data describing the eigenfunction `Q_n(z)·e^{γz²/2}` of `|T|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionSpec {
    pub params: ParameterPair,
    pub n: usize,
    pub gamma: Complex,
    pub nu: Complex,
    pub b: Complex,
    /// `λ_n = ratio^{2n+1}`.
    pub lambda: f64,
    /// Monomial coefficients of `Q_n`, lowest degree first.
    pub q_poly: Vec<Complex>,
    /// Unit-norm coefficients of `Q_n(z)e^{γz²/2}` in the basis `e_m`.
    pub fock_coeffs: FockCoefficients,
    /// Largest modulus among the last two coefficients after normalisation;
    /// a proxy for the truncation error of `fock_coeffs`.
    pub tail: f64,
}

/// `ν` for the Hermite eigenfunction construction.
pub fn eigen_nu(p: &ParameterPair, g: &GammaSolution) -> Complex {
    let s2 = p.s().norm_sqr();
    let s4 = s2 * s2;
    let sh = g.shifted;
    let sh2 = sh * sh;
    let stc = (p.s() * p.t()).conj();
    let num = sh2 * (sh2 + (g.gamma + 1.0) * stc * (-p.discriminant()) / 2.0) - s4;
    num / (sh2 * sh2 - s4)
}

/// Builds `Q_n(z) = ∫_ℝ H_n(x) e^{-ν(x − bz)²} dx` term by term and expands
/// `Q_n(z)·e^{γz²/2}` in the orthonormal basis up to `dim` entries.
pub fn eigenfunction_coeffs(p: &ParameterPair, n: usize, dim: usize) -> Result<EigenfunctionSpec> {
    if n > MAX_EIGEN_INDEX {
        return Err(Error::InvalidParameter(format!(
            "eigenfunction index must be at most {MAX_EIGEN_INDEX}, got {n}"
        )));
    }
    if dim <= n || dim > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} must exceed n = {n} and be at most {MAX_DIM}"
        )));
    }
    let g = gamma_root(p)?;
    let nu = eigen_nu(p, &g);
    if nu.re <= 0.0 {
        return Err(Error::Inconsistent(format!(
            "Re(nu) = {} must be positive",
            nu.re
        )));
    }
    let b = psqrt(g.gamma + 1.0) / (2.0 * psqrt(nu));
    let q_poly = q_polynomial(n, nu, b)?;

    // Q_n(z)·e^{γz²/2}: coefficient of z^m is Σ_{i+2k=m} q_i (γ/2)^k/k!,
    // and z^m = √(m!)·e_m.
    let half_gamma = g.gamma / 2.0;
    let gamma_is_zero = half_gamma.re == 0.0 && half_gamma.im == 0.0;
    let (ln_hg, arg_hg) = (half_gamma.norm().ln(), half_gamma.arg());
    let mut coeffs = vec![Complex::new(0.0, 0.0); dim];
    for (m, slot) in coeffs.iter_mut().enumerate() {
        let half_ln_fact = 0.5 * ln_factorial(m);
        let mut acc = Complex::new(0.0, 0.0);
        for (i, q) in q_poly.iter().enumerate().take(m + 1) {
            if (m - i) % 2 == 1 || (q.re == 0.0 && q.im == 0.0) {
                continue;
            }
            let k = (m - i) / 2;
            if gamma_is_zero && k > 0 {
                continue;
            }
            let mut ln_mag = q.norm().ln() + half_ln_fact - ln_factorial(k);
            let mut phase = q.arg();
            if k > 0 {
                ln_mag += k as f64 * ln_hg;
                phase += k as f64 * arg_hg;
            }
            acc += Complex::from_polar(ln_mag.exp(), phase);
        }
        *slot = acc;
    }
    let fock_coeffs = FockCoefficients::new(coeffs)?.normalized();
    let tail = fock_coeffs.coeffs()[dim.saturating_sub(2)..]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    Ok(EigenfunctionSpec {
        params: *p,
        n,
        gamma: g.gamma,
        nu,
        b,
        lambda: g.ratio.powi(2 * n as i32 + 1),
        q_poly,
        fock_coeffs,
        tail,
    })
}

/// Monomial coefficients of `∫ H_n(x) e^{-ν(x − bz)²} dx` in `z`.
fn q_polynomial(n: usize, nu: Complex, b: Complex) -> Result<Vec<Complex>> {
    let hermite = hermite_coefficients(n);
    let mut q = vec![Complex::new(0.0, 0.0); n + 1];
    // ∫ x^k e^{-ν(x−m)²} dx is a polynomial in m; its coefficient of m^{k−j}
    // is recovered by evaluating gaussian_moment's terms one j at a time.
    for (k, &h) in hermite.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        for (power, coeff) in moment_polynomial(k, nu)?.into_iter().enumerate() {
            q[power] += h * coeff * b.powu(power as u32);
        }
    }
    Ok(q)
}

/// Coefficients in `m` of `∫ x^k e^{-ν(x − m)²} dx`, lowest degree first.
fn moment_polynomial(k: usize, nu: Complex) -> Result<Vec<Complex>> {
    // The constant term at m = 0 fixes the prefactor √(π/ν) and its branch.
    let base = gaussian_moment(0, nu, Complex::new(0.0, 0.0))?;
    let inv_two_nu = 1.0 / (2.0 * nu);
    let mut out = vec![Complex::new(0.0, 0.0); k + 1];
    for half in 0..=k / 2 {
        let j = 2 * half;
        let ln_c = ln_factorial(k) - ln_factorial(j) - ln_factorial(k - j)
            + crate::scalar::ln_odd_double_factorial(half);
        out[k - j] = base * ln_c.exp() * inv_two_nu.powu(half as u32);
    }
    Ok(out)
}

/// Relative residual `‖MᴴM v − λ_n v‖ / ‖v‖` of an eigenfunction.
pub fn verify_eigenpair(op: &TruncatedOperator, spec: &EigenfunctionSpec) -> Result<f64> {
    if op.params() != &spec.params {
        return Err(Error::InvalidParameter(format!(
            "eigenfunction built for {} but operator is {}",
            spec.params,
            op.params()
        )));
    }
    if spec.fock_coeffs.dim() > op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: spec.fock_coeffs.dim(),
        });
    }
    let mut padded = spec.fock_coeffs.coeffs().to_vec();
    padded.resize(op.dim(), Complex::new(0.0, 0.0));
    let v = nalgebra::DVector::from_vec(padded);
    let gv = op.gram() * &v;
    let residual = (gv - &v * Complex::new(spec.lambda, 0.0)).norm();
    Ok(residual / v.norm())
}

/// One row of the singular-value comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularValueRow {
    pub n: usize,
    pub closed: f64,
    pub numeric: f64,
}

impl SingularValueRow {
    pub fn abs_err(&self) -> f64 {
        (self.closed - self.numeric).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedNumeric<T> {
    pub closed: T,
    pub numeric: T,
}

/// Closed-form spectral data next to its finite-section counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub params: ParameterPair,
    pub dim: usize,
    pub gamma: GammaSolution,
    pub singular_values: Vec<SingularValueRow>,
    /// Keyed by the exponent; `f64::INFINITY` is the operator norm.
    pub schatten: Vec<(f64, ClosedNumeric<f64>)>,
    pub trace: ClosedNumeric<Complex>,
    /// Eigen-residuals of `Q_n e^{γz²/2}` for `n = 0, 1, …`.
    pub residuals: Vec<f64>,
    pub notes: Vec<String>,
}

impl SpectralReport {
    /// `dim = None` selects [`auto_dimension`].
    pub fn compute(
        p: &ParameterPair,
        count: usize,
        dim: Option<usize>,
        schatten_exponents: &[f64],
    ) -> Result<Self> {
        let gamma = gamma_root(p)?;
        let dim = match dim {
            Some(d) => d,
            None => auto_dimension(p)?,
        };
        let op = TruncatedOperator::build(*p, dim)?;
        if count == 0 || count > dim {
            return Err(Error::InvalidParameter(format!(
                "count must be in 1..={dim}, got {count}"
            )));
        }
        let closed = closed_singular_values(p, dim)?;
        let numeric = numeric_singular_values(&op, dim)?;
        let singular_values = (0..count)
            .map(|n| SingularValueRow {
                n,
                closed: closed[n],
                numeric: numeric[n],
            })
            .collect();
        let mut schatten = Vec::with_capacity(schatten_exponents.len());
        for &pexp in schatten_exponents {
            schatten.push((
                pexp,
                ClosedNumeric {
                    closed: schatten_norm_closed(p, pexp)?,
                    numeric: schatten_norm_of(&numeric, pexp)?,
                },
            ));
        }
        let trace = ClosedNumeric {
            closed: trace_closed(p)?,
            numeric: op.trace_diagonal(),
        };
        let residuals = (0..count.min(MAX_EIGEN_INDEX + 1).min(dim))
            .map(|n| verify_eigenpair(&op, &eigenfunction_coeffs(p, n, dim)?))
            .collect::<Result<Vec<_>>>()?;
        let mut notes = Vec::new();
        let t = p.t();
        if t.re == 0.0 && t.im == 0.0 {
            notes.push(format!(
                "t = 0: gamma = 0 and lambda0 = 1/|s| = {}; a value of 1 for lambda0 here would contradict the diagonal action s^-(n+1/2)",
                gamma.lambda0
            ));
        }
        Ok(Self {
            params: *p,
            dim,
            gamma,
            singular_values,
            schatten,
            trace,
            residuals,
            notes,
        })
    }

    /// Largest `|closed − numeric|` over the reported singular values.
    pub fn max_abs_error(&self) -> f64 {
        self.singular_values
            .iter()
            .map(SingularValueRow::abs_err)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        use crate::report::complex_pair;
        let schatten: BTreeMap<String, serde_json::Value> = self
            .schatten
            .iter()
            .map(|(pexp, v)| {
                (
                    crate::report::exponent_key(*pexp),
                    serde_json::json!({"closed": v.closed, "numeric": v.numeric}),
                )
            })
            .collect();
        let mut value = serde_json::json!({
            "s": complex_pair(self.params.s()),
            "t": complex_pair(self.params.t()),
            "dim": self.dim,
            "gamma": complex_pair(self.gamma.gamma),
            "singular_values": self.singular_values,
            "schatten": schatten,
            "trace": {
                "closed": complex_pair(self.trace.closed),
                "numeric": complex_pair(self.trace.numeric),
            },
            "residuals": self.residuals,
        });
        if !self.notes.is_empty() {
            value["notes"] = serde_json::json!(self.notes);
        }
        value
    }

    /// `n,closed,numeric,abs_err` with a header line.
    pub fn to_csv(&self) -> String {
        use crate::report::fmt_f64;
        let mut out = String::from("n,closed,numeric,abs_err\n");
        for row in &self.singular_values {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.n,
                fmt_f64(row.closed),
                fmt_f64(row.numeric),
                fmt_f64(row.abs_err())
            ));
        }
        out
    }
}
