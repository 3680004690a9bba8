//! The two-parameter kernel
//!
//! ```text
//! K^(s,t)(z, w) = s^{-1/2} exp[(t z² − conj(t w²) + 2 z conj(w)) / (2s)]
//! ```
//!
//! together with regime classification, the adjoint phase, the pointwise
//! kernel bound, and closed-form `F^p` / `F^∞` norms of `K_w = K(·, w)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, ensure_finite, normalize_signed_zero, psqrt, Complex};

/// Default tolerance on `|s|² − |t|² − 1` for detecting the unitary boundary.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-12;

/// Largest real part of the exponent [`kernel_eval`] will exponentiate.
pub const EXPONENT_LIMIT: f64 = 700.0;

/// A pair `(s, t)` with `s ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterPair {
    s: Complex,
    t: Complex,
}

impl ParameterPair {
    pub fn new(s: Complex, t: Complex) -> Result<Self> {
        let s = normalize_signed_zero(ensure_finite(s, "parameter s")?);
        let t = normalize_signed_zero(ensure_finite(t, "parameter t")?);
        if s.re == 0.0 && s.im == 0.0 {
            return Err(Error::InvalidParameter("s must be nonzero".into()));
        }
        Ok(Self { s, t })
    }

    /// Real-valued convenience constructor.
    pub fn real(s: f64, t: f64) -> Result<Self> {
        Self::new(c(s, 0.0), c(t, 0.0))
    }

    /// A pair on the unitary boundary: `s = √(|t|²+1)·e^{iθ}`.
    pub fn unitary_boundary(t: Complex, theta: f64) -> Result<Self> {
        let modulus = (t.norm_sqr() + 1.0).sqrt();
        Self::new(Complex::from_polar(modulus, theta), t)
    }

    pub fn s(&self) -> Complex {
        self.s
    }

    pub fn t(&self) -> Complex {
        self.t
    }

    pub fn abs_s(&self) -> f64 {
        self.s.norm()
    }

    pub fn abs_t(&self) -> f64 {
        self.t.norm()
    }

    /// `|s|² − |t|² − 1`.
    pub fn discriminant(&self) -> f64 {
        self.s.norm_sqr() - self.t.norm_sqr() - 1.0
    }

    /// `|s|² − |t|²`.
    pub fn gap(&self) -> f64 {
        self.s.norm_sqr() - self.t.norm_sqr()
    }

    /// The pair `(conj s, −t)` whose operator is, up to phase, the adjoint.
    pub fn adjoint_pair(&self) -> Self {
        Self {
            s: normalize_signed_zero(self.s.conj()),
            t: normalize_signed_zero(-self.t),
        }
    }

    pub fn classify(&self, tol: f64) -> OperatorClass {
        classify(self, tol)
    }

    pub(crate) fn require_kernel_in_f2(&self) -> Result<()> {
        if self.abs_s() > self.abs_t() {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!(
                "requires |s| > |t|, got |s| = {}, |t| = {}",
                self.abs_s(),
                self.abs_t()
            )))
        }
    }

    pub(crate) fn require_bounded(&self) -> Result<()> {
        self.require_kernel_in_f2()?;
        if self.discriminant() >= 0.0 {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!(
                "requires |s|^2 >= |t|^2 + 1, got |s|^2 - |t|^2 - 1 = {}",
                self.discriminant()
            )))
        }
    }

    pub(crate) fn require_compact(&self) -> Result<()> {
        let d = self.discriminant();
        if d > 0.0 && self.abs_s() > self.abs_t() {
            Ok(())
        } else {
            Err(Error::NotCompact { discriminant: d })
        }
    }
}

impl fmt::Display for ParameterPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s = {}, t = {})", self.s, self.t)
    }
}

/// Behaviour of the operator on `F²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `|s| ≤ |t|`: `K_w ∉ F²`.
    KernelNotInF2,
    /// `|t| < |s|` and `|s|² < |t|² + 1`.
    DenselyDefinedUnbounded,
    /// `|s|² = |t|² + 1`.
    Unitary,
    /// `|s|² > |t|² + 1`.
    Compact,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::KernelNotInF2 => "kernel_not_in_f2",
            Regime::DenselyDefinedUnbounded => "densely_defined_unbounded",
            Regime::Unitary => "unitary",
            Regime::Compact => "compact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorClass {
    pub regime: Regime,
    /// `|s|² − |t|² − 1`.
    pub discriminant: f64,
}

/// Classifies `(s, t)`; `|discriminant| ≤ tol` counts as the unitary boundary.
pub fn classify(p: &ParameterPair, tol: f64) -> OperatorClass {
    let discriminant = p.discriminant();
    let regime = if p.abs_s() <= p.abs_t() {
        Regime::KernelNotInF2
    } else if discriminant.abs() <= tol {
        Regime::Unitary
    } else if discriminant > tol {
        Regime::Compact
    } else {
        Regime::DenselyDefinedUnbounded
    };
    OperatorClass {
        regime,
        discriminant,
    }
}

/// The exponent of `K^(s,t)(z, w)` (without the `s^{-1/2}` prefactor).
pub fn kernel_exponent(p: &ParameterPair, z: Complex, w: Complex) -> Complex {
    (p.t * z * z - (p.t * w * w).conj() + 2.0 * z * w.conj()) / (2.0 * p.s)
}

/// Evaluates `K^(s,t)(z, w)`.
///
/// Refuses to exponentiate when the real part of the exponent exceeds
/// [`EXPONENT_LIMIT`] and reports [`Error::Overflow`] instead.
pub fn kernel_eval(p: &ParameterPair, z: Complex, w: Complex) -> Result<Complex> {
    ensure_finite(z, "kernel argument z")?;
    ensure_finite(w, "kernel argument w")?;
    Ok(exp_checked(kernel_exponent(p, z, w))? / psqrt(p.s))
}

/// `exp(e)`, or an overflow diagnostic when `Re e` is too large.
pub(crate) fn exp_checked(e: Complex) -> Result<Complex> {
    if e.re > EXPONENT_LIMIT || !e.re.is_finite() {
        Err(Error::Overflow {
            exponent_re: e.re,
            limit: EXPONENT_LIMIT,
        })
    } else {
        Ok(e.exp())
    }
}

/// `√(conj s) / conj(√s)`: `+1` except on the negative real axis, where it is `−1`.
pub fn adjoint_phase(s: Complex) -> Complex {
    let s = normalize_signed_zero(s);
    psqrt(normalize_signed_zero(s.conj())) / psqrt(s).conj()
}

/// Upper bound on `|K^(s,t)(z, w)|` and the constant `C` it scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBound {
    pub bound: f64,
    pub constant: f64,
}

/// The constant `C = |s|^{-1/2} [2|s| / √(4|s|² − |t|²)]^{2(4|s|²−|t|²)/(3|s|²−|t|²+1)}`.
pub fn kernel_bound_constant(p: &ParameterPair) -> Result<f64> {
    p.require_kernel_in_f2()?;
    let s2 = p.s.norm_sqr();
    let t2 = p.t.norm_sqr();
    let a = 4.0 * s2 - t2;
    let base = 2.0 * p.abs_s() / a.sqrt();
    let power = 2.0 * a / (3.0 * s2 - t2 + 1.0);
    Ok(base.powf(power) / p.abs_s().sqrt())
}

/// Pointwise upper bound for `|K^(s,t)(z, w)|`, valid whenever `|s| > |t|`.
pub fn kernel_bound(p: &ParameterPair, z: Complex, w: Complex) -> Result<KernelBound> {
    let constant = kernel_bound_constant(p)?;
    let s2 = p.s.norm_sqr();
    let t2 = p.t.norm_sqr();
    let denom = 3.0 * s2 - t2 + 1.0;
    let cross = (p.s * z.conj() * w).re;
    let exponent = (s2 + 1.0) * (z.norm_sqr() + w.norm_sqr()) / denom
        - p.discriminant() * cross / (s2 * denom);
    Ok(KernelBound {
        bound: constant * exponent.exp(),
        constant,
    })
}

/// Closed-form `‖K_w‖_p` in `F^p`, `0 < p < ∞`.
pub fn fp_kernel_norm(p: &ParameterPair, w: Complex, pnorm: f64) -> Result<f64> {
    Ok(ln_fp_kernel_norm(p, w, pnorm)?.exp())
}

/// Natural logarithm of [`fp_kernel_norm`], finite even where the norm overflows.
pub fn ln_fp_kernel_norm(p: &ParameterPair, w: Complex, pnorm: f64) -> Result<f64> {
    if !(pnorm > 0.0 && pnorm.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "F^p exponent must be positive and finite, got {pnorm}"
        )));
    }
    p.require_kernel_in_f2()
        .map_err(|_| Error::OutOfDomain("K_w belongs to F^p only when |s| > |t|".into()))?;
    let gap = p.gap();
    let ln_abs_s = p.abs_s().ln();
    let quad = p.t * (-p.discriminant()) * w * w / (2.0 * p.s.conj() * gap);
    Ok((1.0 / pnorm - 0.5) * ln_abs_s - gap.ln() / (2.0 * pnorm)
        + w.norm_sqr() / (2.0 * gap)
        + quad.re)
}

/// `ln ‖K_w‖_∞ = ln sup_z |K(z, w)| e^{-|z|²/2}`, computed exactly.
///
/// `ln |K(z, w)| − |z|²/2` is a concave quadratic in `z` when `|t| < |s|`;
/// its maximiser solves a 2×2 linear system in closed form.
pub fn ln_sup_norm_kernel(p: &ParameterPair, w: Complex) -> Result<f64> {
    p.require_kernel_in_f2()?;
    let alpha = p.t / (2.0 * p.s);
    let beta = w.conj() / p.s;
    let z_star = (2.0 * alpha.conj() * beta + beta.conj()) / (1.0 - 4.0 * alpha.norm_sqr());
    Ok(ln_weighted_kernel_modulus(p, z_star, w))
}

/// `ln(|K(z, w)| e^{-|z|²/2})`.
pub(crate) fn ln_weighted_kernel_modulus(p: &ParameterPair, z: Complex, w: Complex) -> f64 {
    kernel_exponent(p, z, w).re - 0.5 * p.abs_s().ln() - 0.5 * z.norm_sqr()
}

/// Lower and upper estimates for `‖K_w‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNormBounds {
    pub lower: f64,
    /// Only defined when `|s|² ≥ |t|² + 1`.
    pub upper: Option<f64>,
    /// The `ε` used for the lower estimate.
    pub epsilon: f64,
}

/// The lower-estimate parameter that is optimal along `s t w² ≥ 0`.
pub fn optimal_epsilon(p: &ParameterPair) -> f64 {
    1.0 / (p.abs_s() * (p.abs_s() - p.abs_t()))
}

/// Bounds on `‖K_w‖_∞`. A negative `eps` selects [`optimal_epsilon`].
pub fn finfty_norm_bounds(p: &ParameterPair, w: Complex, eps: f64) -> Result<SupNormBounds> {
    if p.abs_s() < p.abs_t() {
        return Err(Error::OutOfDomain(
            "K_w is not in F^inf when |s| < |t|".into(),
        ));
    }
    let eps = if eps < 0.0 { optimal_epsilon(p) } else { eps };
    let s2 = p.s.norm_sqr();
    let w2 = w.norm_sqr();
    let phase_term = ((eps * eps * s2 - 1.0) * p.s * p.t * w * w / (2.0 * s2)).re;
    let lower = (phase_term + (2.0 * eps - eps * eps * s2) * w2 / 2.0).exp() / p.abs_s().sqrt();
    let upper = if p.discriminant() >= 0.0 && p.abs_s() > p.abs_t() {
        let constant = kernel_bound_constant(p)?;
        let t2 = p.t.norm_sqr();
        let decay = p.discriminant() * (s2 - 1.0) * w2 / (2.0 * s2 * (3.0 * s2 - t2 + 1.0));
        Some((w2 / 2.0 - decay).exp() * constant)
    } else {
        None
    };
    Ok(SupNormBounds {
        lower,
        upper,
        epsilon: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair(s: Complex, t: Complex) -> ParameterPair {
        ParameterPair::new(s, t).unwrap()
    }

    #[test]
    fn classify_examples() {
        let tol = DEFAULT_CLASSIFY_TOL;
        assert_eq!(
            ParameterPair::real(1.0, 0.0).unwrap().classify(tol).regime,
            Regime::Unitary
        );
        assert_eq!(
            ParameterPair::real(2.0, 0.0).unwrap().classify(tol).regime,
            Regime::Compact
        );
        assert_eq!(
            ParameterPair::real(1.0, 1.0).unwrap().classify(tol).regime,
            Regime::KernelNotInF2
        );
        assert_eq!(
            ParameterPair::real(1.2, 0.9).unwrap().classify(tol).regime,
            Regime::DenselyDefinedUnbounded
        );
        let c = ParameterPair::real(2.0, 1.0).unwrap().classify(tol);
        assert_eq!(c.discriminant, 2.0);
    }

    #[test]
    fn zero_s_rejected() {
        let err = ParameterPair::real(0.0, 1.0).unwrap_err();
        assert_eq!(err.kind(), "invalid_parameter");
        assert!(ParameterPair::new(c(f64::NAN, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn unitary_constructor_hits_boundary() {
        for (t, theta) in [(c(1.0, 0.0), 0.0), (c(0.3, -2.0), 1.1), (c(0.0, 0.0), -2.5)] {
            let p = ParameterPair::unitary_boundary(t, theta).unwrap();
            assert_eq!(p.classify(DEFAULT_CLASSIFY_TOL).regime, Regime::Unitary);
        }
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_eval(
            &ParameterPair::real(1.0, 0.0).unwrap(),
            c(1.0, 0.0),
            c(0.0, 1.0),
        )
        .unwrap();
        assert_relative_eq!(k.re, 1f64.cos(), max_relative = 1e-15);
        assert_relative_eq!(k.im, -1f64.sin(), max_relative = 1e-15);
        for t in [c(0.0, 0.0), c(3.0, -1.0), c(0.0, 2.5)] {
            let k = kernel_eval(&pair(c(4.0, 0.0), t), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
            assert_eq!(k, c(0.5, 0.0));
        }
        let k = kernel_eval(
            &ParameterPair::real(2.0, 1.0).unwrap(),
            c(1.0, 0.0),
            c(0.0, 0.0),
        )
        .unwrap();
        assert_relative_eq!(k.re, 0.25f64.exp() / 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn kernel_overflow_is_reported() {
        let p = ParameterPair::real(1.0, 0.0).unwrap();
        let err = kernel_eval(&p, c(30.0, 0.0), c(30.0, 0.0)).unwrap_err();
        match err {
            Error::Overflow { exponent_re, .. } => assert_eq!(exponent_re, 900.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adjoint_phase_examples() {
        assert_eq!(adjoint_phase(c(1.0, 0.0)), c(1.0, 0.0));
        let neg = adjoint_phase(c(-2.0, 0.0));
        assert_relative_eq!(neg.re, -1.0, max_relative = 1e-15);
        assert_relative_eq!(neg.im, 0.0, epsilon = 1e-15);
        let i = adjoint_phase(c(0.0, 1.0));
        assert_relative_eq!(i.re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(i.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bound_constant_examples() {
        let c20 = kernel_bound_constant(&ParameterPair::real(2.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(c20, 0.5f64.sqrt(), max_relative = 1e-15);
        let c10 = kernel_bound_constant(&ParameterPair::real(1.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(c10, 1.0, max_relative = 1e-15);
        let c21 = kernel_bound_constant(&ParameterPair::real(2.0, 1.0).unwrap()).unwrap();
        let expected = 0.5f64.sqrt() * (4.0 / 15f64.sqrt()).powf(2.5);
        assert_relative_eq!(c21, expected, max_relative = 1e-14);
        assert!((c21 - 0.766_510).abs() < 1e-5);
        assert!(kernel_bound_constant(&ParameterPair::real(1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn fp_norm_examples() {
        let one =
            fp_kernel_norm(&ParameterPair::real(1.0, 0.0).unwrap(), c(0.0, 0.0), 3.0).unwrap();
        assert_relative_eq!(one, 1.0, max_relative = 1e-15);
        let v = fp_kernel_norm(&ParameterPair::real(2.0, 1.0).unwrap(), c(0.0, 0.0), 2.0).unwrap();
        assert_relative_eq!(v, 3f64.powf(-0.25), max_relative = 1e-15);
        let v = fp_kernel_norm(&ParameterPair::real(2.0, 0.0).unwrap(), c(1.0, 0.0), 2.0).unwrap();
        assert_relative_eq!(v, 4f64.powf(-0.25) * (0.125f64).exp(), max_relative = 1e-15);
        assert!(fp_kernel_norm(&ParameterPair::real(1.0, 1.0).unwrap(), c(0.0, 0.0), 2.0).is_err());
        assert!(fp_kernel_norm(&ParameterPair::real(2.0, 0.0).unwrap(), c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn sup_norm_bounds_examples() {
        let p = ParameterPair::real(2.0, 0.0).unwrap();
        let b = finfty_norm_bounds(&p, c(0.0, 0.0), 0.0).unwrap();
        assert_relative_eq!(b.lower, 0.5f64.sqrt(), max_relative = 1e-15);

        let b = finfty_norm_bounds(&p, c(1.0, 0.0), 0.0).unwrap();
        let scaled_upper = (-0.5f64).exp() * b.upper.unwrap();
        assert_relative_eq!(
            scaled_upper,
            0.5f64.sqrt() * (-9.0f64 / 104.0).exp(),
            max_relative = 1e-14
        );

        // the optimal epsilon 1/(|s|(|s|-|t|)) = 1/4 for (2, 0)
        let b = finfty_norm_bounds(&p, c(1.0, 0.0), -1.0).unwrap();
        assert_eq!(b.epsilon, 0.25);
        let scaled_lower = (-0.5f64).exp() * b.lower;
        assert_relative_eq!(
            scaled_lower,
            0.5f64.sqrt() * (-0.375f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn sup_norm_bounds_domain() {
        let p = ParameterPair::real(1.0, 2.0).unwrap();
        assert!(finfty_norm_bounds(&p, c(1.0, 0.0), 0.0).is_err());
        let unbounded = ParameterPair::real(1.2, 0.9).unwrap();
        let b = finfty_norm_bounds(&unbounded, c(1.0, 0.0), 0.0).unwrap();
        assert!(b.upper.is_none());
    }

    #[test]
    fn exact_sup_matches_optimal_lower_bound_for_t_zero() {
        let p = ParameterPair::real(2.0, 0.0).unwrap();
        let sup = ln_sup_norm_kernel(&p, c(1.0, 0.0)).unwrap().exp();
        let b = finfty_norm_bounds(&p, c(1.0, 0.0), -1.0).unwrap();
        assert_relative_eq!(sup, b.lower, max_relative = 1e-14);
        assert!(sup <= b.upper.unwrap());
    }
}
