//! Named invariant suites. Each invariant compares a closed form against an
//! independent oracle over fixed or seeded-random inputs and reports the
//! worst error it saw next to its tolerance.
//!
//! Two suites exist. `fast` keeps matrices at `N ≤ 64`, and `full` goes up
//! to `N = 128` with larger samples. Both are deterministic for a given seed.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::berezin::{
    berezin, berezin_bound, berezin_modsq_lp_norm, berezin_modsq_lp_norm_quadrature,
    kernel_l1_bound, kernel_l1_profile, operator_norm_bound, profile,
    strictly_decreasing_along_rays, sup_norm_grid_ln, tkw_fp_norm, trace_via_berezin_quadrature,
    weyl_apply_ln, ProfileKind,
};
use crate::error::{Error, Result};
use crate::kernel::{
    adjoint_phase, classify, finfty_norm_bounds, fp_kernel_norm, kernel_bound, kernel_eval,
    kernel_exponent, ParameterPair, DEFAULT_CLASSIFY_TOL,
};
use crate::operator::{modsq_kernel_eval, section, TruncatedOperator};
use crate::quadrature::{
    gaussian_integral_closed, gaussian_quadratic_form_r2, integrate_adaptive,
    integrate_gaussian_plane, integrate_gaussian_r2, GaussianIntegralParams, QuadraticForm2,
    QuadratureGrid, DEFAULT_ORDER,
};
use crate::scalar::{gaussian_moment, hermite, principal_sqrt, Complex};
use crate::spectral::{
    closed_singular_values, eigenfunction_coeffs, gamma_root, numeric_singular_values,
    schatten_bounds, schatten_norm_closed, singular_value_base, trace_closed,
    trace_via_quadratic_form, verify_eigenpair, BoundSide,
};

/// Default seed for the random draws.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Gauss–Hermite order used for the area integrals of the trace and the
/// `L^{p/2}` norm.
pub const AREA_ORDER: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Fast,
    Full,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Fast => "fast",
            Suite::Full => "full",
        }
    }
}

/// Deliberate defects used to confirm that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Flips the sign of the phase in the kernel conjugate-symmetry check.
    NegateConjugatePhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suite: Suite::Fast,
            seed: DEFAULT_SEED,
            fault: None,
        }
    }
}

/// Outcome of one named invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    pub worst_error: f64,
    pub tolerance: f64,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub results: Vec<InvariantResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &InvariantResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.all_passed(),
            "invariants": self.results,
        })
    }
}

/// Running worst-case for one invariant.
struct Tracker {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    checked: usize,
    detail: Option<String>,
    failed: bool,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            worst: 0.0,
            checked: 0,
            detail: None,
            failed: false,
        }
    }

    /// Records an error measurement; NaN counts as a failure.
    fn record(&mut self, err: f64, context: impl FnOnce() -> String) {
        self.checked += 1;
        let bad = err.is_nan() || err > self.tolerance;
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
        if bad && !self.failed {
            self.failed = true;
            self.detail = Some(context());
        }
    }

    /// Records a yes/no condition as error 0 or 1 against tolerance 0.
    fn require(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { 1.0 }, context);
    }

    fn fail(&mut self, err: &Error, context: impl FnOnce() -> String) {
        self.checked += 1;
        self.worst = f64::NAN;
        if !self.failed {
            self.failed = true;
            self.detail = Some(format!("{}: {err}", context()));
        }
    }

    fn finish(self) -> InvariantResult {
        InvariantResult {
            name: self.name.to_string(),
            passed: !self.failed && self.checked > 0,
            worst_error: self.worst,
            tolerance: self.tolerance,
            checked: self.checked,
            detail: self.detail,
        }
    }
}

fn rel_err(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn rel_err_real(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// The four compact pairs the acceptance checks run on.
pub fn acceptance_pairs() -> Vec<ParameterPair> {
    [
        (Complex::new(2.0, 0.0), Complex::new(0.0, 0.0)),
        (Complex::new(2.0, 0.0), Complex::new(1.0, 0.0)),
        (Complex::new(2.0, 0.0), Complex::new(0.0, 1.0)),
        (Complex::new(3.0, 0.0), Complex::new(1.0, 1.0)),
    ]
    .into_iter()
    .map(|(s, t)| ParameterPair::new(s, t).expect("nonzero s"))
    .collect()
}

/// Three pairs exactly on the unitary boundary.
pub fn unitary_pairs() -> Vec<ParameterPair> {
    vec![
        ParameterPair::real(1.0, 0.0).expect("nonzero s"),
        ParameterPair::real(2f64.sqrt(), 1.0).expect("nonzero s"),
        ParameterPair::unitary_boundary(Complex::new(1.0, 1.0), 0.7).expect("nonzero s"),
    ]
}

/// Three compact pairs whose `‖T k_w‖_p` falls below `1e-6` by `|w| = 8`.
///
/// `(2, 1)` and `(2, i)` are compact too, but there the slowest direction
/// decays like `e^{-|w|²/6}`, which only reaches about `2e-5` at `|w| = 8`.
pub fn decay_pairs() -> Vec<ParameterPair> {
    vec![
        ParameterPair::real(2.0, 0.0).expect("nonzero s"),
        ParameterPair::new(Complex::new(3.0, 0.0), Complex::new(1.0, 1.0)).expect("nonzero s"),
        ParameterPair::real(3.0, 1.0).expect("nonzero s"),
    ]
}

fn random_complex_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex {
    let r = radius * rng.random::<f64>().sqrt();
    Complex::from_polar(r, rng.random_range(-PI..PI))
}

/// `|s| ∈ [0.5, 3]` and `|t| < 0.95|s|`, any phases.
pub fn random_kernel_pair(rng: &mut ChaCha8Rng) -> ParameterPair {
    let abs_s = rng.random_range(0.5..3.0);
    let abs_t = abs_s * rng.random_range(0.0..0.95);
    let s = Complex::from_polar(abs_s, rng.random_range(-PI..PI));
    let t = Complex::from_polar(abs_t, rng.random_range(-PI..PI));
    ParameterPair::new(s, t).expect("nonzero s")
}

/// A compact pair with `|s| ∈ [1.2, 4]`.
pub fn random_compact_pair(rng: &mut ChaCha8Rng) -> ParameterPair {
    let abs_s: f64 = rng.random_range(1.2..4.0);
    let abs_t = (rng.random_range(0.0..0.9) * (abs_s * abs_s - 1.0)).sqrt();
    let s = Complex::from_polar(abs_s, rng.random_range(-PI..PI));
    let t = Complex::from_polar(abs_t, rng.random_range(-PI..PI));
    ParameterPair::new(s, t).expect("nonzero s")
}

struct Ctx {
    rng: ChaCha8Rng,
    suite: Suite,
    fault: Option<Fault>,
}

impl Ctx {
    fn full(&self) -> bool {
        self.suite == Suite::Full
    }

    fn pick(&self, fast: usize, full: usize) -> usize {
        if self.full() {
            full
        } else {
            fast
        }
    }
}

type Check = fn(&mut Ctx, &mut Tracker);

/// Name, tolerance and body of every invariant, in run order.
const CHECKS: &[(&str, f64, Check)] = &[
    ("sqrt_squares_back", 4.0 * f64::EPSILON, sqrt_squares_back),
    ("sqrt_conjugate_symmetry", 0.0, sqrt_conjugate_symmetry),
    ("hermite_derivative", 1e-6, hermite_derivative),
    ("gaussian_moment_oracle", 1e-9, gaussian_moment_oracle),
    (
        "gaussian_integral_identity",
        1e-8,
        gaussian_integral_identity,
    ),
    ("quadratic_form_identity", 1e-8, quadratic_form_identity),
    ("quadrature_order_doubling", 1e-6, quadrature_order_doubling),
    (
        "kernel_conjugate_symmetry",
        1e-12,
        kernel_conjugate_symmetry,
    ),
    ("kernel_bound_validity", 1e-12, kernel_bound_validity),
    ("fp_norm_consistency", 1e-10, fp_norm_consistency),
    ("finfty_bounds_ordered", 1e-12, finfty_bounds_ordered),
    ("classify_symmetry", 0.0, classify_symmetry),
    ("matrix_parity", 0.0, matrix_parity),
    ("matrix_adjoint_relation", 1e-12, matrix_adjoint_relation),
    ("generating_function", 1e-8, generating_function),
    ("unitary_block_identity", 1e-8, unitary_block_identity),
    ("modsq_generating_function", 1e-8, modsq_generating_function),
    ("two_formula_agreement", 1e-13, two_formula_agreement),
    ("gamma_positivity", 1e-12, gamma_positivity),
    (
        "finite_section_convergence",
        1e-10,
        finite_section_convergence,
    ),
    ("singular_values_match", 1e-8, singular_values_match),
    ("lambda_is_mu_squared", 1e-12, lambda_is_mu_squared),
    ("hilbert_schmidt_norm", 1e-8, hilbert_schmidt_norm),
    ("schatten_bound_sides", 1e-12, schatten_bound_sides),
    ("trace_diagonal", 1e-10, trace_diagonal),
    ("trace_quadratic_form", 1e-12, trace_quadratic_form),
    ("trace_quadrature", 1e-6, trace_quadrature),
    ("singular_value_simplicity", 0.0, singular_value_simplicity),
    ("eigen_residuals", 1e-6, eigen_residuals),
    ("berezin_bound_validity", 1e-12, berezin_bound_validity),
    ("berezin_diagonal_decay", 1e-12, berezin_diagonal_decay),
    (
        "berezin_lp_norm_quadrature",
        1e-6,
        berezin_lp_norm_quadrature,
    ),
    ("tkw_compact_decay", 1e-6, tkw_compact_decay),
    ("tkw_unitary_constant", 1e-10, tkw_unitary_constant),
    ("l1_profile_bound", 1e-12, l1_profile_bound),
    ("operator_norm_bound", 1e-12, operator_norm_bound_holds),
    ("weyl_isometry", 1e-6, weyl_isometry),
];

/// Runs every invariant of the chosen suite.
pub fn run_suite(opts: VerifyOptions) -> VerifyReport {
    let mut ctx = Ctx {
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        suite: opts.suite,
        fault: opts.fault,
    };
    let results = CHECKS
        .iter()
        .map(|&(name, tolerance, check)| {
            let mut tr = Tracker::new(name, tolerance);
            check(&mut ctx, &mut tr);
            tr.finish()
        })
        .collect();
    VerifyReport {
        suite: opts.suite,
        seed: opts.seed,
        results,
    }
}

/// Names of the invariants, in run order.
pub fn invariant_names() -> Vec<&'static str> {
    CHECKS.iter().map(|&(name, _, _)| name).collect()
}

// ---- scalar ----

fn sqrt_squares_back(ctx: &mut Ctx, tr: &mut Tracker) {
    // 4 ulp of |z|
    for _ in 0..ctx.pick(2000, 20000) {
        let scale = 10f64.powf(ctx.rng.random_range(-6.0..6.0));
        let z = random_complex_disk(&mut ctx.rng, scale);
        if z.norm() == 0.0 {
            continue;
        }
        let r = principal_sqrt(z).expect("finite input");
        tr.record((r * r - z).norm() / z.norm(), || format!("z = {z}"));
    }
}

fn sqrt_conjugate_symmetry(ctx: &mut Ctx, tr: &mut Tracker) {
    for k in 0..ctx.pick(1000, 10000) {
        let z = if k % 10 == 0 {
            Complex::new(-ctx.rng.random_range(0.01..100.0), 0.0)
        } else {
            random_complex_disk(&mut ctx.rng, 100.0)
        };
        let r = principal_sqrt(z).expect("finite input");
        let rc = principal_sqrt(z.conj()).expect("finite input");
        let on_negative_axis = z.im == 0.0 && z.re < 0.0;
        let expected = if on_negative_axis {
            -r.conj()
        } else {
            r.conj()
        };
        tr.record((rc - expected).norm() / r.norm(), || format!("z = {z}"));
    }
}

fn hermite_derivative(ctx: &mut Ctx, tr: &mut Tracker) {
    let points = ctx.pick(21, 81);
    for n in 1..=20usize {
        let xs: Vec<f64> = (0..points)
            .map(|i| -3.0 + 6.0 * i as f64 / (points - 1) as f64)
            .collect();
        // errors are measured against the size of H_n' on the sampled grid,
        // since a pointwise ratio is meaningless at the roots
        let scale = xs
            .iter()
            .map(|&x| (2.0 * n as f64 * hermite(n - 1, Complex::new(x, 0.0))).norm())
            .fold(0.0, f64::max);
        for &x in &xs {
            let h = 1e-5;
            let fd = (hermite(n, Complex::new(x + h, 0.0)) - hermite(n, Complex::new(x - h, 0.0)))
                / (2.0 * h);
            let exact = 2.0 * n as f64 * hermite(n - 1, Complex::new(x, 0.0));
            tr.record((fd - exact).norm() / scale, || format!("n = {n}, x = {x}"));
        }
    }
}

fn gaussian_moment_oracle(ctx: &mut Ctx, tr: &mut Tracker) {
    for _ in 0..ctx.pick(40, 200) {
        let nu = Complex::new(
            ctx.rng.random_range(0.5..2.0),
            ctx.rng.random_range(-1.0..1.0),
        );
        let m = random_complex_disk(&mut ctx.rng, 1.0);
        let k = ctx.rng.random_range(0..=10usize);
        let closed = match gaussian_moment(k, nu, m) {
            Ok(v) => v,
            Err(e) => {
                tr.fail(&e, || format!("k = {k}, nu = {nu}, m = {m}"));
                continue;
            }
        };
        let half_width = 4.0 + 12.0 / nu.re.sqrt();
        let center = m.re;
        let integrand =
            |x: f64| Complex::new(x, 0.0).powu(k as u32) * (-nu * (x - m) * (x - m)).exp();
        let numeric =
            integrate_adaptive(integrand, center - half_width, center + half_width, 1e-13);
        tr.record(rel_err(numeric, closed), || {
            format!("k = {k}, nu = {nu}, m = {m}")
        });
    }
}

// ---- quadrature ----

/// `|γ|, |δ| ≤ 0.6`, `|a|, |b| ≤ 1`: well inside `|γ + δ|² < 4`, where the
/// order-96 rule resolves the integrand.
fn random_gaussian_params(rng: &mut ChaCha8Rng) -> GaussianIntegralParams {
    GaussianIntegralParams::new(
        random_complex_disk(rng, 0.6),
        random_complex_disk(rng, 0.6),
        random_complex_disk(rng, 1.0),
        random_complex_disk(rng, 1.0),
    )
}

fn gaussian_integral_identity(ctx: &mut Ctx, tr: &mut Tracker) {
    let grid = QuadratureGrid::gauss_hermite(DEFAULT_ORDER).expect("order in range");
    for _ in 0..ctx.pick(200, 400) {
        let params = random_gaussian_params(&mut ctx.rng);
        match gaussian_integral_closed(&params) {
            Ok(closed) => {
                let numeric = integrate_gaussian_plane(|w| params.integrand(w), &grid);
                tr.record(rel_err(numeric, closed), || format!("{params:?}"));
            }
            Err(e) => tr.fail(&e, || format!("{params:?}")),
        }
    }
}

/// Real part with eigenvalues in `[0.6, 1.6]`, imaginary entries `≤ 0.3`.
fn random_quadratic_form(rng: &mut ChaCha8Rng) -> QuadraticForm2 {
    let l1 = rng.random_range(0.6..1.6);
    let l2 = rng.random_range(0.6..1.6);
    let th: f64 = rng.random_range(0.0..PI);
    let (c, s) = (th.cos(), th.sin());
    let re11 = l1 * c * c + l2 * s * s;
    let re22 = l1 * s * s + l2 * c * c;
    let re12 = (l1 - l2) * c * s;
    QuadraticForm2::new(
        Complex::new(re11, rng.random_range(-0.3..0.3)),
        Complex::new(re12, rng.random_range(-0.3..0.3)),
        Complex::new(re22, rng.random_range(-0.3..0.3)),
    )
}

fn quadratic_form_identity(ctx: &mut Ctx, tr: &mut Tracker) {
    let grid = QuadratureGrid::gauss_hermite(DEFAULT_ORDER).expect("order in range");
    for _ in 0..ctx.pick(100, 300) {
        let a = random_quadratic_form(&mut ctx.rng);
        match gaussian_quadratic_form_r2(&a) {
            Ok(closed) => {
                let numeric =
                    integrate_gaussian_r2(|x, y| (-a.eval(x, y) + x * x + y * y).exp(), &grid);
                tr.record(rel_err(numeric, closed), || format!("{a:?}"));
            }
            Err(e) => tr.fail(&e, || format!("{a:?}")),
        }
    }
}

fn quadrature_order_doubling(ctx: &mut Ctx, tr: &mut Tracker) {
    let low = QuadratureGrid::gauss_hermite(DEFAULT_ORDER).expect("order in range");
    let high = QuadratureGrid::gauss_hermite(2 * DEFAULT_ORDER).expect("order in range");
    for _ in 0..ctx.pick(5, 20) {
        let params = random_gaussian_params(&mut ctx.rng);
        let a = integrate_gaussian_plane(|w| params.integrand(w), &low);
        let b = integrate_gaussian_plane(|w| params.integrand(w), &high);
        tr.record(rel_err(a, b), || format!("{params:?}"));
    }
    let area_low = QuadratureGrid::gauss_hermite(AREA_ORDER).expect("order in range");
    let area_high = QuadratureGrid::gauss_hermite(2 * AREA_ORDER).expect("order in range");
    for p in acceptance_pairs() {
        let pair = (
            trace_via_berezin_quadrature(&p, &area_low),
            trace_via_berezin_quadrature(&p, &area_high),
        );
        match pair {
            (Ok(a), Ok(b)) => tr.record(rel_err(a, b), || format!("trace {p}")),
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("trace {p}")),
        }
        if ctx.full() {
            let pair = (
                berezin_modsq_lp_norm_quadrature(&p, 2.0, &area_low),
                berezin_modsq_lp_norm_quadrature(&p, 2.0, &area_high),
            );
            match pair {
                (Ok(a), Ok(b)) => tr.record(rel_err_real(a, b), || format!("L^1 norm {p}")),
                (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("L^1 norm {p}")),
            }
        }
    }
}

// ---- kernel ----

fn kernel_conjugate_symmetry(ctx: &mut Ctx, tr: &mut Tracker) {
    let mut pairs: Vec<ParameterPair> = vec![
        ParameterPair::real(-2.0, 0.5).expect("nonzero s"),
        ParameterPair::new(Complex::new(-1.5, -0.0), Complex::new(0.3, 2.0)).expect("nonzero s"),
    ];
    for _ in 0..ctx.pick(6, 30) {
        pairs.push(random_kernel_pair(&mut ctx.rng));
    }
    let sign = if ctx.fault == Some(Fault::NegateConjugatePhase) {
        -1.0
    } else {
        1.0
    };
    let grid: Vec<Complex> = (0..20)
        .map(|k| {
            let x = -1.5 + 3.0 * (k % 5) as f64 / 4.0;
            let y = -1.5 + 3.0 * (k / 5) as f64 / 3.0;
            Complex::new(x, y)
        })
        .collect();
    for p in &pairs {
        let adj = p.adjoint_pair();
        let phase = sign * adjoint_phase(p.s());
        for &z in &grid {
            for &w in &grid {
                let pair = (kernel_eval(p, z, w), kernel_eval(&adj, w, z));
                match pair {
                    (Ok(a), Ok(b)) => tr.record(rel_err(phase * b, a.conj()), || {
                        format!("{p}, z = {z}, w = {w}")
                    }),
                    (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
                }
            }
        }
    }
}

fn kernel_bound_validity(ctx: &mut Ctx, tr: &mut Tracker) {
    // relative excess of |K| over the bound
    let points = ctx.pick(1000, 1000);
    for _ in 0..ctx.pick(50, 200) {
        let p = random_kernel_pair(&mut ctx.rng);
        for _ in 0..points {
            let z = random_complex_disk(&mut ctx.rng, 4.0);
            let w = random_complex_disk(&mut ctx.rng, 4.0);
            match (kernel_eval(&p, z, w), kernel_bound(&p, z, w)) {
                (Ok(v), Ok(b)) => tr.record((v.norm() / b.bound - 1.0).max(0.0), || {
                    format!("{p}, z = {z}, w = {w}")
                }),
                (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
            }
        }
    }
}

/// `‖K_w‖₂² = |s|^{-1} |e^{-conj(t w²)/(2s)}|² ∫ |e^{t z²/(2s) + z w̄/s}|² dλ`.
fn kernel_norm_via_gaussian_integral(p: &ParameterPair, w: Complex) -> Result<f64> {
    let gamma = p.t() / p.s();
    let a = w.conj() / p.s();
    let integral = gaussian_integral_closed(&GaussianIntegralParams::new(gamma, gamma, a, a))?;
    let constant = (-(p.t() * w * w).conj() / (2.0 * p.s())).exp().norm_sqr();
    Ok((constant * integral.re / p.abs_s()).sqrt())
}

fn fp_norm_consistency(ctx: &mut Ctx, tr: &mut Tracker) {
    for _ in 0..ctx.pick(100, 500) {
        let p = random_kernel_pair(&mut ctx.rng);
        let w = random_complex_disk(&mut ctx.rng, 3.0);
        match (
            fp_kernel_norm(&p, w, 2.0),
            kernel_norm_via_gaussian_integral(&p, w),
        ) {
            (Ok(a), Ok(b)) => tr.record(rel_err_real(a, b), || format!("{p}, w = {w}")),
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}, w = {w}")),
        }
    }
}

fn finfty_bounds_ordered(ctx: &mut Ctx, tr: &mut Tracker) {
    for _ in 0..ctx.pick(200, 1000) {
        let p = random_compact_pair(&mut ctx.rng);
        let w = random_complex_disk(&mut ctx.rng, 4.0);
        let eps = if ctx.rng.random::<bool>() {
            -1.0
        } else {
            ctx.rng.random_range(0.0..1.0)
        };
        match finfty_norm_bounds(&p, w, eps) {
            Ok(b) => {
                if let Some(upper) = b.upper {
                    tr.record((b.lower / upper - 1.0).max(0.0), || {
                        format!("{p}, w = {w}, eps = {eps}")
                    });
                }
            }
            Err(e) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn classify_symmetry(ctx: &mut Ctx, tr: &mut Tracker) {
    let mut pairs = unitary_pairs();
    for _ in 0..ctx.pick(200, 1000) {
        let s = random_complex_disk(&mut ctx.rng, 3.0);
        let t = random_complex_disk(&mut ctx.rng, 3.0);
        if let Ok(p) = ParameterPair::new(s, t) {
            pairs.push(p);
        }
    }
    for p in pairs {
        let a = classify(&p, DEFAULT_CLASSIFY_TOL);
        let b = classify(&p.adjoint_pair(), DEFAULT_CLASSIFY_TOL);
        tr.require(a.regime == b.regime, || format!("{p}: {a:?} vs {b:?}"));
    }
}

// ---- operator matrix ----

fn matrix_pairs(ctx: &mut Ctx) -> Vec<ParameterPair> {
    let mut pairs = acceptance_pairs();
    pairs.extend(unitary_pairs());
    pairs.push(
        ParameterPair::new(Complex::new(-2.0, 0.0), Complex::new(0.5, 0.5)).expect("nonzero s"),
    );
    for _ in 0..ctx.pick(4, 16) {
        pairs.push(random_kernel_pair(&mut ctx.rng));
    }
    pairs
}

fn matrix_parity(ctx: &mut Ctx, tr: &mut Tracker) {
    let dim = ctx.pick(64, 128);
    for p in matrix_pairs(ctx) {
        match TruncatedOperator::build(p, dim) {
            Ok(op) => {
                let mut worst = 0.0f64;
                for m in 0..dim {
                    for n in ((m + 1) % 2..dim).step_by(2) {
                        worst = worst.max(op.entry(m, n).norm());
                    }
                }
                tr.record(worst, || format!("{p}"));
            }
            Err(e) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn matrix_adjoint_relation(ctx: &mut Ctx, tr: &mut Tracker) {
    let dim = ctx.pick(64, 128);
    for p in matrix_pairs(ctx) {
        let built = (
            TruncatedOperator::build(p, dim),
            TruncatedOperator::build(p.adjoint_pair(), dim),
        );
        match built {
            (Ok(op), Ok(adj)) => {
                // entrywise, relative once an entry exceeds 1 (unbounded pairs grow fast)
                let phase = adjoint_phase(p.s());
                let target = op.matrix().adjoint();
                let diff = (adj.matrix() * phase - &target)
                    .iter()
                    .zip(target.iter())
                    .map(|(d, e)| d.norm() / e.norm().max(1.0))
                    .fold(0.0, f64::max);
                tr.record(diff, || format!("{p}"));
            }
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn unit_disk_samples(ctx: &mut Ctx, count: usize) -> Vec<(Complex, Complex)> {
    (0..count)
        .map(|_| {
            (
                random_complex_disk(&mut ctx.rng, 1.0),
                random_complex_disk(&mut ctx.rng, 1.0),
            )
        })
        .collect()
}

fn generating_function(ctx: &mut Ctx, tr: &mut Tracker) {
    let samples = unit_disk_samples(ctx, ctx.pick(20, 100));
    for p in matrix_pairs(ctx) {
        let op = match TruncatedOperator::build(p, 64) {
            Ok(op) => op,
            Err(e) => {
                tr.fail(&e, || format!("{p}"));
                continue;
            }
        };
        for &(z, w) in &samples {
            match kernel_eval(&p, z, w) {
                Ok(k) => tr.record((op.generating_function(z, w) - k).norm(), || {
                    format!("{p}, z = {z}, w = {w}")
                }),
                Err(e) => tr.fail(&e, || format!("{p}")),
            }
        }
    }
}

/// Rows of the tall sections used for Gram identities. Column `n` of the
/// infinite matrix keeps mass far below the diagonal, so a square section
/// loses it; 256 rows hold the first 8 columns to within `1e-13`.
const TALL_ROWS: usize = 256;

fn tall_gram(p: ParameterPair, cols: usize) -> Result<DMatrix<Complex>> {
    section(p, TALL_ROWS, cols).map(|a| a.adjoint() * a)
}

fn unitary_block_identity(_ctx: &mut Ctx, tr: &mut Tracker) {
    let cols = 8;
    for p in unitary_pairs() {
        match tall_gram(p, cols) {
            Ok(gram) => {
                let mut worst = 0.0f64;
                for m in 0..cols {
                    for n in 0..cols {
                        let target = if m == n { 1.0 } else { 0.0 };
                        worst = worst.max((gram[(m, n)] - target).norm());
                    }
                }
                tr.record(worst, || format!("{p}"));
            }
            Err(e) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn modsq_generating_function(ctx: &mut Ctx, tr: &mut Tracker) {
    let samples = unit_disk_samples(ctx, ctx.pick(20, 100));
    let mut pairs = acceptance_pairs();
    pairs.extend(unitary_pairs());
    for p in pairs {
        let gram = match tall_gram(p, 64) {
            Ok(g) => g,
            Err(e) => {
                tr.fail(&e, || format!("{p}"));
                continue;
            }
        };
        for &(z, w) in &samples {
            match modsq_kernel_eval(&p, z, w) {
                Ok(k) => {
                    let g = TruncatedOperator::generating_function_of(&gram, z, w);
                    tr.record((g - k).norm(), || format!("{p}, z = {z}, w = {w}"))
                }
                Err(e) => tr.fail(&e, || format!("{p}")),
            }
        }
    }
}

// ---- spectral ----

fn two_formula_agreement(ctx: &mut Ctx, tr: &mut Tracker) {
    for _ in 0..ctx.pick(100, 1000) {
        let p = random_compact_pair(&mut ctx.rng);
        match (singular_value_base(&p), gamma_root(&p)) {
            (Ok(base), Ok(g)) => tr.record(rel_err_real(g.ratio, base), || format!("{p}")),
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn gamma_positivity(ctx: &mut Ctx, tr: &mut Tracker) {
    for _ in 0..ctx.pick(100, 1000) {
        let p = random_compact_pair(&mut ctx.rng);
        match gamma_root(&p) {
            Ok(g) => {
                tr.require(g.shifted * p.discriminant() > 0.0, || format!("{p}"));
                let st = p.s() * p.t();
                let scale =
                    (p.s().norm_sqr() + p.t().norm_sqr() + 1.0) * g.gamma.norm() + st.norm();
                tr.record(g.residual(&p).norm() / scale.max(1.0), || {
                    format!("residual {p}")
                });
            }
            Err(e) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn finite_section_convergence(_ctx: &mut Ctx, tr: &mut Tracker) {
    // N = 32 is too small for (2, 1): the top values still move by 7e-8
    let dim = 64;
    for p in acceptance_pairs() {
        let pair = (
            TruncatedOperator::build(p, dim).and_then(|op| numeric_singular_values(&op, 8)),
            TruncatedOperator::build(p, 2 * dim).and_then(|op| numeric_singular_values(&op, 8)),
        );
        match pair {
            (Ok(a), Ok(b)) => {
                let worst = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                tr.record(worst, || format!("{p}, N = {dim} vs {}", 2 * dim));
            }
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn singular_values_match(ctx: &mut Ctx, tr: &mut Tracker) {
    let dim = ctx.pick(64, 128);
    for p in acceptance_pairs() {
        let numeric =
            TruncatedOperator::build(p, dim).and_then(|op| numeric_singular_values(&op, 8));
        match (numeric, closed_singular_values(&p, 8)) {
            (Ok(a), Ok(b)) => {
                let worst = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                tr.record(worst, || format!("{p}"));
            }
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn lambda_is_mu_squared(ctx: &mut Ctx, tr: &mut Tracker) {
    let mut pairs = acceptance_pairs();
    for _ in 0..ctx.pick(10, 50) {
        pairs.push(random_compact_pair(&mut ctx.rng));
    }
    for p in pairs {
        match (gamma_root(&p), closed_singular_values(&p, 17)) {
            (Ok(g), Ok(mu)) => {
                for (n, m) in mu.iter().enumerate() {
                    let lambda = g.ratio.powi(2 * n as i32 + 1);
                    tr.record(rel_err_real(m * m, lambda), || format!("{p}, n = {n}"));
                }
            }
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn hilbert_schmidt_norm(_ctx: &mut Ctx, tr: &mut Tracker) {
    for p in acceptance_pairs() {
        let closed = p.abs_s() / p.discriminant();
        let geometric = closed_singular_values(&p, 1).map(|mu| {
            // μ_0² = r and Σ μ_n² = Σ r^{2n+1}
            let r = mu[0] * mu[0];
            r / (1.0 - r * r)
        });
        let s2 = schatten_norm_closed(&p, 2.0).map(|v| v * v);
        let frob = TruncatedOperator::build(p, 64).map(|op| op.frobenius_sq());
        match (geometric, s2, frob) {
            (Ok(g), Ok(s2), Ok(f)) => {
                tr.record((g - closed).abs(), || format!("geometric sum {p}"));
                tr.record((s2 - closed).abs(), || format!("S_2 norm {p}"));
                tr.record((f - closed).abs(), || format!("Frobenius {p}"));
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn schatten_bound_sides(ctx: &mut Ctx, tr: &mut Tracker) {
    // relative violation of the non-strict inequality
    let mut pairs = acceptance_pairs();
    for _ in 0..ctx.pick(20, 100) {
        pairs.push(random_compact_pair(&mut ctx.rng));
    }
    for p in pairs {
        for pexp in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 8.0] {
            match (schatten_norm_closed(&p, pexp), schatten_bounds(&p, pexp)) {
                (Ok(norm), Ok(bound)) => {
                    let value = norm.powf(pexp);
                    let excess = match bound.side {
                        BoundSide::Upper => value / bound.value - 1.0,
                        BoundSide::Lower => bound.value / value - 1.0,
                        BoundSide::Both => (value / bound.value - 1.0).abs(),
                    };
                    tr.record(excess.max(0.0), || format!("{p}, p = {pexp}"));
                }
                (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
            }
        }
    }
}

fn trace_diagonal(_ctx: &mut Ctx, tr: &mut Tracker) {
    for p in acceptance_pairs() {
        let numeric = crate::spectral::auto_dimension(&p)
            .and_then(|dim| TruncatedOperator::build(p, dim))
            .map(|op| op.trace_diagonal());
        match (numeric, trace_closed(&p)) {
            (Ok(a), Ok(b)) => tr.record((a - b).norm(), || format!("{p}")),
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn trace_quadratic_form(ctx: &mut Ctx, tr: &mut Tracker) {
    let mut pairs = acceptance_pairs();
    for _ in 0..ctx.pick(50, 500) {
        pairs.push(random_compact_pair(&mut ctx.rng));
    }
    for p in pairs {
        match (trace_via_quadratic_form(&p), trace_closed(&p)) {
            (Ok(a), Ok(b)) => tr.record(rel_err(a, b), || format!("{p}")),
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn trace_quadrature(_ctx: &mut Ctx, tr: &mut Tracker) {
    let grid = QuadratureGrid::gauss_hermite(AREA_ORDER).expect("order in range");
    for p in acceptance_pairs() {
        match (trace_via_berezin_quadrature(&p, &grid), trace_closed(&p)) {
            (Ok(a), Ok(b)) => tr.record((a - b).norm(), || format!("{p}")),
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn singular_value_simplicity(ctx: &mut Ctx, tr: &mut Tracker) {
    // error = shortfall of the smallest gap relative to the required gap
    let dim = ctx.pick(64, 128);
    for p in acceptance_pairs() {
        let numeric =
            TruncatedOperator::build(p, dim).and_then(|op| numeric_singular_values(&op, 8));
        match (numeric, singular_value_base(&p)) {
            (Ok(mu), Ok(ratio)) => {
                let required = (1.0 - ratio) * mu[7] / 2.0;
                let smallest = mu
                    .windows(2)
                    .map(|w| w[0] - w[1])
                    .fold(f64::INFINITY, f64::min);
                tr.record(((required - smallest) / required).max(0.0), || {
                    format!("{p}: gap {smallest} < {required}")
                });
            }
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn eigen_residuals(ctx: &mut Ctx, tr: &mut Tracker) {
    let p = ParameterPair::real(2.0, 1.0).expect("nonzero s");
    let op = match TruncatedOperator::build(p, 64) {
        Ok(op) => op,
        Err(e) => {
            tr.fail(&e, || format!("{p}"));
            return;
        }
    };
    let top = ctx.pick(4, 8);
    for n in 0..top {
        match eigenfunction_coeffs(&p, n, 64).and_then(|spec| verify_eigenpair(&op, &spec)) {
            Ok(r) => tr.record(r, || format!("{p}, n = {n}")),
            Err(e) => tr.fail(&e, || format!("{p}, n = {n}")),
        }
    }
}

// ---- Berezin and F^p ----

fn berezin_bound_validity(ctx: &mut Ctx, tr: &mut Tracker) {
    for _ in 0..ctx.pick(50, 200) {
        let p = random_kernel_pair(&mut ctx.rng);
        for _ in 0..1000 {
            let z = random_complex_disk(&mut ctx.rng, 4.0);
            let w = random_complex_disk(&mut ctx.rng, 4.0);
            match (berezin(&p, z, w), berezin_bound(&p, z, w)) {
                (Ok(v), Ok(b)) => tr.record((v.norm() / b - 1.0).max(0.0), || {
                    format!("{p}, z = {z}, w = {w}")
                }),
                (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}")),
            }
        }
    }
}

fn berezin_diagonal_decay(ctx: &mut Ctx, tr: &mut Tracker) {
    let side = ctx.pick(9, 21);
    for s in [1.1, 1.5, 2.0, 3.0, 7.5] {
        let p = ParameterPair::real(s, 0.0).expect("nonzero s");
        for i in 0..side {
            for j in 0..side {
                let z = Complex::new(
                    -3.0 + 6.0 * i as f64 / (side - 1) as f64,
                    -3.0 + 6.0 * j as f64 / (side - 1) as f64,
                );
                let expected = s.powf(-0.5) * ((1.0 / s - 1.0) * z.norm_sqr()).exp();
                match berezin(&p, z, z) {
                    Ok(v) => tr.record(rel_err_real(v.norm(), expected), || {
                        format!("s = {s}, z = {z}")
                    }),
                    Err(e) => tr.fail(&e, || format!("s = {s}")),
                }
            }
        }
    }
}

fn berezin_lp_norm_quadrature(_ctx: &mut Ctx, tr: &mut Tracker) {
    let grid = QuadratureGrid::gauss_hermite(AREA_ORDER).expect("order in range");
    for p in acceptance_pairs() {
        for pexp in [1.0, 2.0, 4.0] {
            let pair = (
                berezin_modsq_lp_norm(&p, pexp),
                berezin_modsq_lp_norm_quadrature(&p, pexp, &grid),
            );
            match pair {
                (Ok(a), Ok(b)) => tr.record(rel_err_real(b, a), || format!("{p}, p = {pexp}")),
                (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}, p = {pexp}")),
            }
        }
    }
}

fn tkw_compact_decay(_ctx: &mut Ctx, tr: &mut Tracker) {
    // 0/1 for monotonicity, and the value at |w| = 8 against 1e-6
    for pnorm in [1.0, 2.0, f64::INFINITY] {
        for p in acceptance_pairs() {
            match profile(&p, ProfileKind::TkwNorm { pnorm }) {
                Ok(rows) => tr.require(strictly_decreasing_along_rays(&rows), || {
                    format!("not decreasing: {p}, p = {pnorm}")
                }),
                Err(e) => tr.fail(&e, || format!("{p}")),
            }
        }
        for p in decay_pairs() {
            match profile(&p, ProfileKind::TkwNorm { pnorm }) {
                Ok(rows) => {
                    let tail = rows
                        .iter()
                        .filter(|r| r.absw == 8.0)
                        .map(|r| r.value)
                        .fold(0.0, f64::max);
                    tr.record(tail, || {
                        format!("{p}, p = {pnorm}: |T k_w| = {tail} at |w| = 8")
                    });
                }
                Err(e) => tr.fail(&e, || format!("{p}")),
            }
        }
    }
}

fn tkw_unitary_constant(ctx: &mut Ctx, tr: &mut Tracker) {
    let samples: Vec<Complex> = (0..20)
        .map(|_| random_complex_disk(&mut ctx.rng, 6.0))
        .collect();
    for p in unitary_pairs() {
        for pnorm in [1.0, 2.0, f64::INFINITY] {
            let expected = p.abs_s().powf(1.0 / pnorm - 0.5);
            for &w in &samples {
                match tkw_fp_norm(&p, w, pnorm) {
                    Ok(v) => tr.record(rel_err_real(v, expected), || {
                        format!("{p}, p = {pnorm}, w = {w}")
                    }),
                    Err(e) => tr.fail(&e, || format!("{p}")),
                }
            }
        }
    }
}

fn l1_profile_bound(ctx: &mut Ctx, tr: &mut Tracker) {
    let mut pairs = acceptance_pairs();
    pairs.extend(unitary_pairs());
    for _ in 0..ctx.pick(20, 100) {
        pairs.push(random_compact_pair(&mut ctx.rng));
    }
    for p in pairs {
        match profile(&p, ProfileKind::KernelL1) {
            Ok(rows) => {
                let bound = kernel_l1_bound(&p);
                for r in rows {
                    tr.record((r.value / bound - 1.0).max(0.0), || {
                        format!("{p}, |w| = {}", r.absw)
                    });
                }
            }
            Err(e) => tr.fail(&e, || format!("{p}")),
        }
        match kernel_l1_profile(&p, Complex::new(0.0, 0.0)) {
            Ok(_) => {}
            Err(e) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn operator_norm_bound_holds(ctx: &mut Ctx, tr: &mut Tracker) {
    let mut pairs = acceptance_pairs();
    pairs.extend(unitary_pairs());
    for _ in 0..ctx.pick(5, 20) {
        pairs.push(random_compact_pair(&mut ctx.rng));
    }
    for p in pairs {
        match TruncatedOperator::build(p, 64).and_then(|op| numeric_singular_values(&op, 1)) {
            Ok(mu) => tr.record((mu[0] / operator_norm_bound(&p) - 1.0).max(0.0), || {
                format!("{p}")
            }),
            Err(e) => tr.fail(&e, || format!("{p}")),
        }
    }
}

fn weyl_isometry(ctx: &mut Ctx, tr: &mut Tracker) {
    let mut cases = vec![(
        ParameterPair::real(2.0, 0.0).expect("nonzero s"),
        Complex::new(1.0, 0.0),
        Complex::new(1.0, 1.0),
    )];
    for _ in 0..ctx.pick(2, 8) {
        cases.push((
            random_compact_pair(&mut ctx.rng),
            random_complex_disk(&mut ctx.rng, 1.5),
            random_complex_disk(&mut ctx.rng, 2.0),
        ));
    }
    for (p, w, u) in cases {
        // ln |K(z, w)| directly, since K itself overflows far from the origin
        let ln_k = move |z: Complex| kernel_exponent(&p, z, w).re - 0.5 * p.abs_s().ln();
        match (
            sup_norm_grid_ln(ln_k),
            sup_norm_grid_ln(weyl_apply_ln(u, ln_k)),
        ) {
            (Ok(a), Ok(b)) => tr.record(rel_err_real(b.value, a.value), || {
                format!("{p}, w = {w}, u = {u}")
            }),
            (Err(e), _) | (_, Err(e)) => tr.fail(&e, || format!("{p}, w = {w}, u = {u}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names = invariant_names();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), CHECKS.len());
    }

    #[test]
    fn tracker_semantics() {
        let mut tr = Tracker::new("x", 1e-3);
        tr.record(1e-4, || "a".into());
        assert!(tr.finish().passed);
        let mut tr = Tracker::new("x", 1e-3);
        tr.record(f64::NAN, || "nan".into());
        let r = tr.finish();
        assert!(!r.passed);
        assert_eq!(r.detail.as_deref(), Some("nan"));
        assert!(!Tracker::new("empty", 1.0).finish().passed);
    }

    #[test]
    fn decay_pairs_are_compact() {
        for p in decay_pairs().into_iter().chain(acceptance_pairs()) {
            assert!(p.discriminant() > 0.0);
        }
        for p in unitary_pairs() {
            assert!(p.discriminant().abs() < 1e-12);
        }
    }
}
