//! Gauss–Hermite integration against the Gaussian measure of the plane, and
//! the closed-form Gaussian integrals it is used to check.
//!
//! The normalised measure is `dλ(z) = π⁻¹ e^{-|z|²} dA(z)`. A tensor rule of
//! order `n` evaluates the integrand on `n²` points `x_i + i y_j`; sums are
//! formed by pairwise reduction in a fixed order, so results do not depend on
//! how the caller schedules work.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ensure_finite, psqrt, Complex};

/// Default number of nodes per axis.
pub const DEFAULT_ORDER: usize = 96;

/// Largest order the node generator accepts. Beyond this the unweighted
/// orthonormal polynomials overflow at the outermost nodes.
pub const MAX_ORDER: usize = 256;

/// Gauss–Hermite nodes and weights for `∫_ℝ g(x) e^{-x²} dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Returns the cached rule of the given order, building it on first use.
    pub fn gauss_hermite(order: usize) -> Result<Arc<QuadratureGrid>> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidParameter(format!(
                "quadrature order must be in 1..={MAX_ORDER}, got {order}"
            )));
        }
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner());
        let grid = guard
            .entry(order)
            .or_insert_with(|| Arc::new(build_gauss_hermite(order)));
        Ok(Arc::clone(grid))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_ℝ g(x) e^{-x²} dx`.
    pub fn integrate_line<F>(&self, g: F) -> Complex
    where
        F: Fn(f64) -> Complex,
    {
        let terms: Vec<Complex> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .collect();
        pairwise_sum(&terms)
    }
}

fn build_gauss_hermite(order: usize) -> QuadratureGrid {
    // Golub–Welsch: eigenvalues of the Jacobi matrix give the nodes.
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let off = (k as f64 / 2.0).sqrt();
        jacobi[(k, k - 1)] = off;
        jacobi[(k - 1, k)] = off;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    // Newton polish on the orthonormal recurrence, then Christoffel weights.
    let mut weights = vec![0.0; order];
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        for _ in 0..3 {
            let (p, dp, _) = orthonormal_hermite(order, *x);
            if dp != 0.0 {
                *x -= p / dp;
            }
        }
        let (_, _, sum_sq) = orthonormal_hermite(order, *x);
        *w = 1.0 / sum_sq;
    }

    // Enforce exact symmetry about the origin.
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    let total: f64 = pairwise_sum_real(&weights);
    let scale = PI.sqrt() / total;
    for w in &mut weights {
        *w *= scale;
    }
    QuadratureGrid {
        order,
        nodes,
        weights,
    }
}

/// Orthonormal Hermite polynomial `p̃_n(x)`, its derivative, and
/// `Σ_{k<n} p̃_k(x)²`.
fn orthonormal_hermite(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += cur * cur;
        let next =
            (2.0 / (k as f64 + 1.0)).sqrt() * x * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    // p̃_n' = sqrt(2n) p̃_{n-1}
    (cur, (2.0 * n as f64).sqrt() * prev, sum_sq)
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[Complex]) -> Complex {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        values.iter().fold(Complex::new(0.0, 0.0), |acc, v| acc + v)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

pub(crate) fn pairwise_sum_real(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum_real(&values[..mid]) + pairwise_sum_real(&values[mid..])
    }
}

/// `∫_ℂ f dλ` by the tensor Gauss–Hermite rule.
pub fn integrate_gaussian_plane<F>(f: F, grid: &QuadratureGrid) -> Complex
where
    F: Fn(Complex) -> Complex,
{
    let n = grid.order();
    let mut terms = Vec::with_capacity(n * n);
    for (&x, &wx) in grid.nodes.iter().zip(&grid.weights) {
        for (&y, &wy) in grid.nodes.iter().zip(&grid.weights) {
            terms.push(wx * wy * f(Complex::new(x, y)));
        }
    }
    pairwise_sum(&terms) / PI
}

/// `∫_ℂ f dA` for integrands with Gaussian decay of width roughly `scale`.
///
/// Substitutes `z = scale·u` and integrates `f(scale·u) e^{|u|²}` against the
/// Gauss–Hermite weight.
pub fn integrate_area_scaled<F>(f: F, grid: &QuadratureGrid, scale: f64) -> Complex
where
    F: Fn(Complex) -> Complex,
{
    let n = grid.order();
    let mut terms = Vec::with_capacity(n * n);
    for (&x, &wx) in grid.nodes.iter().zip(&grid.weights) {
        for (&y, &wy) in grid.nodes.iter().zip(&grid.weights) {
            let u = Complex::new(x, y);
            // in log form: at high order the outer weights underflow while e^{x²} overflows
            let weight = (wx.ln() + wy.ln() + (x * x + y * y)).exp();
            terms.push(weight * f(scale * u));
        }
    }
    scale * scale * pairwise_sum(&terms)
}

/// `∫∫_{ℝ²} g(x, y) e^{-x²-y²} dx dy` on the tensor rule.
pub fn integrate_gaussian_r2<F>(g: F, grid: &QuadratureGrid) -> Complex
where
    F: Fn(f64, f64) -> Complex,
{
    let mut terms = Vec::with_capacity(grid.order() * grid.order());
    for (&x, &wx) in grid.nodes.iter().zip(&grid.weights) {
        for (&y, &wy) in grid.nodes.iter().zip(&grid.weights) {
            terms.push(wx * wy * g(x, y));
        }
    }
    pairwise_sum(&terms)
}

/// Parameters of `∫ e^{γw²/2 + aw} e^{conj(δw²)/2 + conj(bw)} dλ(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianIntegralParams {
    pub gamma: Complex,
    pub delta: Complex,
    pub a: Complex,
    pub b: Complex,
}

impl GaussianIntegralParams {
    pub fn new(gamma: Complex, delta: Complex, a: Complex, b: Complex) -> Self {
        Self { gamma, delta, a, b }
    }

    /// Whether `|γ + δ|² < 4`.
    pub fn converges(&self) -> bool {
        (self.gamma + self.delta).norm_sqr() < 4.0
    }

    /// The integrand itself, for checking against quadrature.
    pub fn integrand(&self, w: Complex) -> Complex {
        let holo = self.gamma * w * w / 2.0 + self.a * w;
        let anti = (self.delta * w * w).conj() / 2.0 + (self.b * w).conj();
        (holo + anti).exp()
    }
}

/// Closed form of the Gaussian integral described by [`GaussianIntegralParams`].
pub fn gaussian_integral_closed(p: &GaussianIntegralParams) -> Result<Complex> {
    for (z, what) in [
        (p.gamma, "gamma"),
        (p.delta, "delta"),
        (p.a, "a"),
        (p.b, "b"),
    ] {
        ensure_finite(z, what)?;
    }
    if !p.converges() {
        return Err(Error::Divergent(format!(
            "|gamma + delta|^2 = {} >= 4",
            (p.gamma + p.delta).norm_sqr()
        )));
    }
    let denom = 1.0 - p.gamma * p.delta.conj();
    if denom.re <= 0.0 {
        return Err(Error::Inconsistent(format!(
            "Re(1 - gamma conj(delta)) = {} must be positive inside the convergence domain",
            denom.re
        )));
    }
    let bc = p.b.conj();
    let exponent =
        (p.delta.conj() * p.a * p.a + p.gamma * bc * bc + 2.0 * p.a * bc) / (2.0 * denom);
    Ok(exponent.exp() / psqrt(denom))
}

/// Symmetric complex 2×2 matrix `A` of the form `uᵀ A u` on `ℝ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm2 {
    pub a11: Complex,
    pub a12: Complex,
    pub a22: Complex,
}

impl QuadraticForm2 {
    pub fn new(a11: Complex, a12: Complex, a22: Complex) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn det(&self) -> Complex {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    /// Positive definiteness of the real part.
    pub fn real_part_positive_definite(&self) -> bool {
        self.a11.re > 0.0 && self.a11.re * self.a22.re - self.a12.re * self.a12.re > 0.0
    }

    /// `uᵀ A u` at `u = (x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> Complex {
        self.a11 * x * x + 2.0 * self.a12 * x * y + self.a22 * y * y
    }
}

/// `∫∫_{ℝ²} e^{-uᵀAu} du = π / √det A`.
///
/// With `Re A` positive definite `det A` never lies on `(-∞, 0]`, so the
/// principal root is the analytic continuation from real symmetric `A`.
pub fn gaussian_quadratic_form_r2(a: &QuadraticForm2) -> Result<Complex> {
    for (z, what) in [(a.a11, "a11"), (a.a12, "a12"), (a.a22, "a22")] {
        ensure_finite(z, what)?;
    }
    if !a.real_part_positive_definite() {
        return Err(Error::Divergent(
            "real part of the quadratic form is not positive definite".into(),
        ));
    }
    let det = a.det();
    if det.im == 0.0 && det.re <= 0.0 {
        return Err(Error::Inconsistent(format!(
            "det A = {det} on the branch cut despite Re A > 0"
        )));
    }
    Ok(PI / psqrt(det))
}

/// `‖f‖_p` of the Fock space `F^p` by quadrature.
///
/// Uses `‖f‖_p^p = (p/2π) ∫ |f(z)|^p e^{-p|z|²/2} dA(z)`, which after
/// `z = √(2/p)·u` becomes `∫ |f(√(2/p) u)|^p dλ(u)`.
pub fn fp_norm_numeric<F>(f: F, p: f64, grid: &QuadratureGrid) -> f64
where
    F: Fn(Complex) -> Complex,
{
    let scale = (2.0 / p).sqrt();
    let integral =
        integrate_gaussian_plane(|u| Complex::new(f(scale * u).norm().powf(p), 0.0), grid);
    integral.re.powf(1.0 / p)
}

/// Kronrod nodes on `[0, 1]`; odd indices are the 7-point Gauss nodes.
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod estimate and its distance from the embedded
/// 7-point Gauss estimate.
fn kronrod15<F>(f: &F, a: f64, b: f64) -> (Complex, f64)
where
    F: Fn(f64) -> Complex,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS7_WEIGHTS[3] * fc;
    for (i, (&x, &w)) in KRONROD_NODES[..7]
        .iter()
        .zip(&KRONROD_WEIGHTS[..7])
        .enumerate()
    {
        let pair = f(center - half * x) + f(center + half * x);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// `∫_a^b f(x) dx` by adaptive Gauss–Kronrod (7/15) bisection.
///
/// An interval is accepted once its error estimate is below its share of
/// `rel_tol·|∫|`, or after 30 bisections.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Complex
where
    F: Fn(f64) -> Complex,
{
    let (coarse, _) = kronrod15(&f, a, b);
    // a floor so an integral that cancels to zero still terminates
    let scale = coarse.norm().max(f64::MIN_POSITIVE);
    kronrod_step(&f, a, b, rel_tol * scale / (b - a), 30)
}

fn kronrod_step<F>(f: &F, a: f64, b: f64, density: f64, depth: u32) -> Complex
where
    F: Fn(f64) -> Complex,
{
    let (value, err) = kronrod15(f, a, b);
    if depth == 0 || err <= density * (b - a) || err <= 64.0 * f64::EPSILON * value.norm() {
        return value;
    }
    let m = 0.5 * (a + b);
    kronrod_step(f, a, m, density, depth - 1) + kronrod_step(f, m, b, density, depth - 1)
}

#[cfg(test)]
mod tests {

    #[test]
    fn adaptive_kronrod_examples() {
        let v = integrate_adaptive(|x| Complex::new((-x * x).exp(), 0.0), -10.0, 10.0, 1e-13);
        assert_relative_eq!(v.re, PI.sqrt(), max_relative = 1e-13);
        let v = integrate_adaptive(|x| Complex::new(0.0, x.cos()), 0.0, PI / 2.0, 1e-13);
        assert_relative_eq!(v.im, 1.0, max_relative = 1e-13);
        let v = integrate_adaptive(
            |x| Complex::new(x.powi(10) * (-x * x).exp(), 0.0),
            -12.0,
            12.0,
            1e-13,
        );
        // Γ(11/2)
        assert_relative_eq!(v.re, 945.0 / 32.0 * PI.sqrt(), max_relative = 1e-12);
    }
    use super::*;
    use crate::scalar::c;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn grid_invariants() {
        for order in [1, 2, 7, 32, 96, 192] {
            let g = QuadratureGrid::gauss_hermite(order).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert_relative_eq!(total, PI.sqrt(), max_relative = 1e-12);
            assert!(g.weights().iter().all(|&w| w > 0.0));
            assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
            for (a, b) in g.nodes().iter().zip(g.nodes().iter().rev()) {
                assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn grid_rejects_bad_order() {
        assert!(QuadratureGrid::gauss_hermite(0).is_err());
        assert!(QuadratureGrid::gauss_hermite(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn grid_is_cached() {
        let a = QuadratureGrid::gauss_hermite(40).unwrap();
        let b = QuadratureGrid::gauss_hermite(40).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn line_rule_is_exact_for_polynomials() {
        let g = QuadratureGrid::gauss_hermite(10).unwrap();
        let v = g.integrate_line(|x| c(x.powi(2), 0.0));
        assert_relative_eq!(v.re, PI.sqrt() / 2.0, max_relative = 1e-14);
        let v = g.integrate_line(|x| c(x.powi(18), 0.0));
        // (17)!! sqrt(pi) / 2^9
        let exact = 34_459_425.0 * PI.sqrt() / 512.0;
        assert_relative_eq!(v.re, exact, max_relative = 1e-12);
    }

    #[test]
    fn plane_examples() {
        let g = QuadratureGrid::gauss_hermite(DEFAULT_ORDER).unwrap();
        let one = integrate_gaussian_plane(|_| c(1.0, 0.0), &g);
        assert_relative_eq!(one.re, 1.0, max_relative = 1e-13);
        let second = integrate_gaussian_plane(|z| c(z.norm_sqr(), 0.0), &g);
        assert_relative_eq!(second.re, 1.0, max_relative = 1e-13);
        let e = integrate_gaussian_plane(|z| (z + z.conj()).exp(), &g);
        assert_relative_eq!(e.re, E, max_relative = 1e-12);
        assert!(e.im.abs() < 1e-12);
    }

    #[test]
    fn closed_gaussian_examples() {
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let v =
            gaussian_integral_closed(&GaussianIntegralParams::new(zero, zero, zero, zero)).unwrap();
        assert_eq!(v, one);
        let v =
            gaussian_integral_closed(&GaussianIntegralParams::new(zero, zero, one, one)).unwrap();
        assert_relative_eq!(v.re, E, max_relative = 1e-15);
        let v =
            gaussian_integral_closed(&GaussianIntegralParams::new(one, zero, zero, one)).unwrap();
        assert_relative_eq!(v.re, 1.648_721_270_700_128, max_relative = 1e-14);
    }

    #[test]
    fn closed_gaussian_divergence() {
        let p = GaussianIntegralParams::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(
            gaussian_integral_closed(&p).unwrap_err().kind(),
            "divergent"
        );
    }

    #[test]
    fn quadratic_form_examples() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let v = gaussian_quadratic_form_r2(&QuadraticForm2::new(one, zero, one)).unwrap();
        assert_relative_eq!(v.re, PI, max_relative = 1e-15);
        let v =
            gaussian_quadratic_form_r2(&QuadraticForm2::new(2.0 * one, zero, 2.0 * one)).unwrap();
        assert_relative_eq!(v.re, PI / 2.0, max_relative = 1e-15);
        let v = gaussian_quadratic_form_r2(&QuadraticForm2::new(one, c(0.0, 0.5), one)).unwrap();
        assert_relative_eq!(v.re, 2.809_925_892_416_290_4, max_relative = 1e-12);
        let bad = QuadraticForm2::new(one, c(2.0, 0.0), one);
        assert_eq!(
            gaussian_quadratic_form_r2(&bad).unwrap_err().kind(),
            "divergent"
        );
    }

    #[test]
    fn quadratic_form_uses_continued_branch() {
        // Re A > 0 but det A has negative real part.
        let a = QuadraticForm2::new(c(1.0, 5.0), c(0.0, 0.0), c(1.0, 5.0));
        let v = gaussian_quadratic_form_r2(&a).unwrap();
        let expected = PI / c(1.0, 5.0);
        assert_relative_eq!((v - expected).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn fp_norm_examples() {
        let g = QuadratureGrid::gauss_hermite(DEFAULT_ORDER).unwrap();
        assert_relative_eq!(
            fp_norm_numeric(|_| c(1.0, 0.0), 2.0, &g),
            1.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(fp_norm_numeric(|z| z, 2.0, &g), 1.0, max_relative = 1e-13);
        // e_0 has unit norm in every F^p
        assert_relative_eq!(
            fp_norm_numeric(|_| c(1.0, 0.0), 1.0, &g),
            1.0,
            max_relative = 1e-13
        );
    }
}
