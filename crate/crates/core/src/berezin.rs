//! Berezin transforms of `T^(s,t)`, their Gaussian bounds, and the `F^p`
//! quantities `‖T k_w‖_p` that separate the bounded and compact regimes.
//!
//! The bivariate Berezin transform is `⟨T k_w, k_z⟩`, where
//! `k_w(z) = e^{z w̄ − |w|²/2}` is the normalised reproducing kernel. It
//! equals `e^{-(|z|²+|w|²)/2} K^(s,t)(z, w)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    exp_checked, kernel_bound_constant, kernel_exponent, ln_fp_kernel_norm, ln_sup_norm_kernel,
    ParameterPair,
};
use crate::quadrature::{integrate_area_scaled, QuadratureGrid};
use crate::scalar::{ensure_finite, psqrt, Complex};

/// `⟨T k_w, k_z⟩`; `z = w` gives the Berezin transform.
pub fn berezin(p: &ParameterPair, z: Complex, w: Complex) -> Result<Complex> {
    p.require_kernel_in_f2()?;
    ensure_finite(z, "berezin argument z")?;
    ensure_finite(w, "berezin argument w")?;
    let exponent = kernel_exponent(p, z, w) - 0.5 * (z.norm_sqr() + w.norm_sqr());
    Ok(exp_checked(exponent)? / psqrt(p.s()))
}

/// Smallest of the available Gaussian bounds on `|⟨T k_w, k_z⟩|`.
///
/// The general bound holds whenever `|s| > |t|`. When `|s|² ≥ |t|² + 1` a
/// second form with `|z + s w|²` in the exponent is also available.
pub fn berezin_bound(p: &ParameterPair, z: Complex, w: Complex) -> Result<f64> {
    let constant = kernel_bound_constant(p)?;
    let s2 = p.s().norm_sqr();
    let t2 = p.t().norm_sqr();
    let d = p.discriminant();
    let rate = d / (2.0 * s2 * (3.0 * s2 - t2 + 1.0));
    let bracket = s2 * (z.norm_sqr() + w.norm_sqr()) + 2.0 * (p.s() * z.conj() * w).re;
    let mut bound = constant * (-rate * bracket).exp();
    if d >= 0.0 {
        bound = bound.min(constant * (-rate * (z + p.s() * w).norm_sqr()).exp());
    }
    Ok(bound)
}

/// A Berezin value next to its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerezinSample {
    pub z: Complex,
    pub w: Complex,
    pub value: Complex,
    pub bound: f64,
}

impl BerezinSample {
    pub fn compute(p: &ParameterPair, z: Complex, w: Complex) -> Result<Self> {
        Ok(Self {
            z,
            w,
            value: berezin(p, z, w)?,
            bound: berezin_bound(p, z, w)?,
        })
    }

    /// `|value| ≤ bound`, with slack for the last few bits of rounding.
    pub fn within_bound(&self) -> bool {
        self.value.norm() <= self.bound * (1.0 + 1e-12)
    }
}

/// Berezin transform of `|T|²` at `z`: `e^{-|z|²}‖K_z‖₂²`.
pub fn berezin_modsq_pointwise(p: &ParameterPair, z: Complex) -> Result<f64> {
    Ok((2.0 * ln_fp_kernel_norm(p, z, 2.0)? - z.norm_sqr()).exp())
}

/// `‖Berezin(|T|²)‖_{L^{p/2}(ℂ, dA)}` in closed form.
pub fn berezin_modsq_lp_norm(p: &ParameterPair, pexp: f64) -> Result<f64> {
    p.require_compact()?;
    if !(pexp > 0.0 && pexp.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "exponent must be positive and finite, got {pexp}"
        )));
    }
    let inner = 2.0 * PI * p.abs_s() / (pexp * p.discriminant() * p.gap().powf((pexp - 2.0) / 4.0));
    Ok(inner.powf(2.0 / pexp))
}

/// Quadrature counterpart of [`berezin_modsq_lp_norm`].
///
/// `(e^{-|z|²}‖K_z‖₂²)^{p/2}` is a Gaussian in `z` whose decay rate depends
/// on direction; the grid is scaled to the mean rate.
pub fn berezin_modsq_lp_norm_quadrature(
    p: &ParameterPair,
    pexp: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    p.require_compact()?;
    let gap = p.gap();
    let mean_rate = 0.5 * pexp * (1.0 - 1.0 / gap);
    let scale = 1.0 / mean_rate.sqrt();
    let failure = RefCell::new(None);
    let integral = integrate_area_scaled(
        |z| match berezin_modsq_pointwise(p, z) {
            Ok(v) => Complex::new(v.powf(pexp / 2.0), 0.0),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex::new(0.0, 0.0)
            }
        },
        grid,
        scale,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(integral.re.powf(2.0 / pexp))
}

/// `(1/π) ∫_ℂ ⟨T k_z, k_z⟩ dA(z)`, the trace as an integral of the Berezin
/// transform, by scaled Gauss–Hermite quadrature.
pub fn trace_via_berezin_quadrature(p: &ParameterPair, grid: &QuadratureGrid) -> Result<Complex> {
    p.require_compact()?;
    // isotropic part of the exponent is −(1 − 1/s)|z|²; pick the scale that
    // best matches it against the e^{-|u|²} weight
    let a = 1.0 - 1.0 / p.s();
    if a.re <= 0.0 {
        return Err(Error::Divergent(format!(
            "Berezin transform does not decay: Re(1 - 1/s) = {}",
            a.re
        )));
    }
    let scale = (a.norm_sqr() / a.re).sqrt().recip();
    let failure = RefCell::new(None);
    let integral = integrate_area_scaled(
        |z| match berezin(p, z, z) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex::new(0.0, 0.0)
            }
        },
        grid,
        scale,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(integral / PI)
}

/// `‖T k_w‖_p` in `F^p`; `pnorm = ∞` uses the exact supremum.
pub fn tkw_fp_norm(p: &ParameterPair, w: Complex, pnorm: f64) -> Result<f64> {
    ensure_finite(w, "tkw argument w")?;
    Ok(ln_tkw_fp_norm(p, w, pnorm)?.exp())
}

/// Natural logarithm of [`tkw_fp_norm`].
pub fn ln_tkw_fp_norm(p: &ParameterPair, w: Complex, pnorm: f64) -> Result<f64> {
    let ln_norm = if pnorm == f64::INFINITY {
        ln_sup_norm_kernel(p, w)?
    } else {
        ln_fp_kernel_norm(p, w, pnorm)?
    };
    Ok(ln_norm - 0.5 * w.norm_sqr())
}

/// `∫_ℂ |K(z, w)| e^{-(|z|²+|w|²)/2} dA(z) = 2π e^{-|w|²/2} ‖K_w‖₁`.
pub fn kernel_l1_profile(p: &ParameterPair, w: Complex) -> Result<f64> {
    p.require_bounded()?;
    Ok(2.0 * PI * tkw_fp_norm(p, w, 1.0)?)
}

/// Uniform bound `2π√|s| / √(|s|² − |t|²)` on [`kernel_l1_profile`].
pub fn kernel_l1_bound(p: &ParameterPair) -> f64 {
    2.0 * PI * p.abs_s().sqrt() / p.gap().sqrt()
}

/// Bound `2√|s| / √(|s|² − |t|²)` on the operator norm.
pub fn operator_norm_bound(p: &ParameterPair) -> f64 {
    2.0 * p.abs_s().sqrt() / p.gap().sqrt()
}

/// Radii used by the decay profiles.
pub const PROFILE_RADII: [f64; 5] = [0.0, 1.0, 2.0, 4.0, 8.0];

/// Number of equally spaced rays in a profile sweep.
pub const PROFILE_RAYS: usize = 8;

/// Quantity swept by [`profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    TkwNorm { pnorm: f64 },
    KernelL1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub absw: f64,
    pub arg: f64,
    pub value: f64,
}

/// Samples `kind` at `|w| ∈ PROFILE_RADII` along `PROFILE_RAYS` rays,
/// ray-major.
pub fn profile(p: &ParameterPair, kind: ProfileKind) -> Result<Vec<ProfileRow>> {
    let mut rows = Vec::with_capacity(PROFILE_RADII.len() * PROFILE_RAYS);
    for ray in 0..PROFILE_RAYS {
        let arg = ray as f64 * 2.0 * PI / PROFILE_RAYS as f64;
        for &absw in &PROFILE_RADII {
            let w = Complex::from_polar(absw, arg);
            let value = match kind {
                ProfileKind::TkwNorm { pnorm } => tkw_fp_norm(p, w, pnorm)?,
                ProfileKind::KernelL1 => kernel_l1_profile(p, w)?,
            };
            rows.push(ProfileRow { absw, arg, value });
        }
    }
    Ok(rows)
}

/// `absw,arg,value` with a header line.
pub fn profile_csv(rows: &[ProfileRow]) -> String {
    use crate::report::fmt_f64;
    let mut out = String::from("absw,arg,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(r.absw),
            fmt_f64(r.arg),
            fmt_f64(r.value)
        ));
    }
    out
}

/// Whether the values along every ray strictly decrease with `|w|`.
pub fn strictly_decreasing_along_rays(rows: &[ProfileRow]) -> bool {
    rows.chunks(PROFILE_RADII.len())
        .all(|ray| ray.windows(2).all(|pair| pair[1].value < pair[0].value))
}

/// The normalised reproducing kernel `k_u(z) = e^{z ū − |u|²/2}`.
pub fn normalized_kernel(u: Complex, z: Complex) -> Complex {
    (z * u.conj() - 0.5 * u.norm_sqr()).exp()
}

/// The Weyl operator `W_u f(z) = k_u(z) f(z − u)`.
pub fn weyl_apply<F>(u: Complex, f: F) -> impl Fn(Complex) -> Complex
where
    F: Fn(Complex) -> Complex,
{
    move |z| normalized_kernel(u, z) * f(z - u)
}

/// `ln |W_u f(z)|` from `ln |f|`, for functions whose modulus overflows.
pub fn weyl_apply_ln<F>(u: Complex, ln_modulus: F) -> impl Fn(Complex) -> f64
where
    F: Fn(Complex) -> f64,
{
    move |z| (z * u.conj()).re - 0.5 * u.norm_sqr() + ln_modulus(z - u)
}

/// Result of [`sup_norm_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSup {
    /// `sup |f(z)| e^{-|z|²/2}`.
    pub value: f64,
    pub argmax: Complex,
    /// Radius of the last disk that was scanned.
    pub radius: f64,
}

/// Points per axis in each scan of [`sup_norm_grid`].
pub const SUP_GRID_POINTS: usize = 161;

/// `‖f‖_∞ = sup_z |f(z)| e^{-|z|²/2}` by grid scan plus local refinement.
///
/// Scans the square `[-R, R]²` and doubles `R` (from 4, up to 256) until
/// everything outside the disk of radius `R/2` stays below `1e-10` times the
/// running supremum. The best grid point is then polished by compass search.
pub fn sup_norm_grid<F>(f: F) -> Result<GridSup>
where
    F: Fn(Complex) -> Complex,
{
    sup_norm_grid_ln(|z| f(z).norm().ln())
}

/// [`sup_norm_grid`] for a function given by `ln |f(z)|`. The weight is
/// applied in the exponent, so `|f|` itself may exceed `f64::MAX`.
pub fn sup_norm_grid_ln<F>(ln_modulus: F) -> Result<GridSup>
where
    F: Fn(Complex) -> f64,
{
    let weighted = |z: Complex| {
        let e = ln_modulus(z) - 0.5 * z.norm_sqr();
        if e == f64::NEG_INFINITY {
            0.0
        } else {
            e.exp()
        }
    };
    let mut radius = 4.0;
    let (mut best, mut argmax);
    loop {
        let h = 2.0 * radius / (SUP_GRID_POINTS - 1) as f64;
        best = f64::NEG_INFINITY;
        argmax = Complex::new(0.0, 0.0);
        let mut outer = 0.0f64;
        for i in 0..SUP_GRID_POINTS {
            for j in 0..SUP_GRID_POINTS {
                let z = Complex::new(-radius + i as f64 * h, -radius + j as f64 * h);
                let v = weighted(z);
                if !v.is_finite() {
                    return Err(Error::NonFinite("sup_norm_grid sample"));
                }
                if v > best {
                    best = v;
                    argmax = z;
                }
                if z.norm() > radius / 2.0 {
                    outer = outer.max(v);
                }
            }
        }
        if outer <= 1e-10 * best || radius >= 256.0 {
            break;
        }
        radius *= 2.0;
    }
    // compass search on the smooth weighted modulus
    let mut step = 2.0 * radius / (SUP_GRID_POINTS - 1) as f64;
    while step > 1e-12 {
        let mut improved = false;
        for dir in [
            Complex::new(1.0, 0.0),
            Complex::new(-1.0, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, -1.0),
        ] {
            let z = argmax + step * dir;
            let v = weighted(z);
            if v > best {
                best = v;
                argmax = z;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(GridSup {
        value: best,
        argmax,
        radius,
    })
}
