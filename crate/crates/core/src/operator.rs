//! Finite sections of `T^(s,t)` in the orthonormal basis `e_n(z) = zⁿ/√(n!)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{exp_checked, ParameterPair};
use crate::scalar::{ln_factorial, psqrt, Complex, LOG_TABLE_MAX};

/// Default truncation dimension.
pub const DEFAULT_DIM: usize = 64;

/// Largest truncation dimension; bounded by the log-factorial table.
pub const MAX_DIM: usize = LOG_TABLE_MAX / 2;

/// Longest side of a rectangular [`section`].
pub const MAX_SECTION: usize = LOG_TABLE_MAX;

/// Coefficients `⟨f, e_n⟩` of an entire function in the monomial basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockCoefficients {
    coeffs: Vec<Complex>,
}

impl FockCoefficients {
    pub fn new(coeffs: Vec<Complex>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "coefficient vector must be non-empty".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// The basis vector `e_n` padded to `dim` entries.
    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: n + 1,
            });
        }
        let mut coeffs = vec![Complex::new(0.0, 0.0); dim];
        coeffs[n] = Complex::new(1.0, 0.0);
        Self::new(coeffs)
    }

    /// Truncated coefficients of the normalised kernel `k_w = K_w/‖K_w‖`,
    /// `⟨k_w, e_n⟩ = e^{-|w|²/2} conj(w)ⁿ/√(n!)`.
    pub fn normalized_kernel(w: Complex, dim: usize) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(dim);
        let mut cur = Complex::new((-0.5 * w.norm_sqr()).exp(), 0.0);
        for n in 0..dim {
            if n > 0 {
                cur *= w.conj() / (n as f64).sqrt();
            }
            coeffs.push(cur);
        }
        Self::new(coeffs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<Complex> {
        self.coeffs
    }

    /// `‖f‖₂` of the truncated expansion.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescales to unit norm; a zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            for c in &mut self.coeffs {
                *c /= norm;
            }
        }
        self
    }

    /// Evaluates `Σ cₙ zⁿ/√(n!)`.
    pub fn eval(&self, z: Complex) -> Complex {
        let mut basis = Complex::new(1.0, 0.0);
        let mut acc = Complex::new(0.0, 0.0);
        for (n, c) in self.coeffs.iter().enumerate() {
            if n > 0 {
                basis *= z / (n as f64).sqrt();
            }
            acc += c * basis;
        }
        acc
    }
}

/// `N×N` matrix `M[m][n] = ⟨T^(s,t) e_n, e_m⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    params: ParameterPair,
    matrix: DMatrix<Complex>,
}

impl TruncatedOperator {
    /// Builds the finite section from the triple power series of the kernel.
    ///
    /// With `K = s^{-1/2} e^{(t/2s)z²} e^{(−conj t/2s) conj(w)²} e^{z conj(w)/s}`,
    ///
    /// ```text
    /// M[m][n] = √(m! n!)/√s · Σ_{2j+l=m, 2k+l=n} (t/2s)^j/j! · (−conj t/2s)^k/k! · (1/s)^l/l!
    /// ```
    ///
    /// Every term is formed from its logarithmic magnitude and its phase, so
    /// the factorials never overflow. Entries with `m + n` odd are exact zeros.
    pub fn build(params: ParameterPair, dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "truncation dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        let matrix = section(params, dim, dim)?;
        Ok(Self { params, matrix })
    }

    /// Wraps an explicit matrix, e.g. for testing the numeric routines.
    pub fn from_matrix(params: ParameterPair, matrix: DMatrix<Complex>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(
                "matrix must be square and non-empty".into(),
            ));
        }
        Ok(Self { params, matrix })
    }

    pub fn params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex> {
        &self.matrix
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex {
        self.matrix[(m, n)]
    }

    /// Applies the matrix to `f`; shorter inputs are zero-padded.
    pub fn apply(&self, f: &FockCoefficients) -> Result<FockCoefficients> {
        if f.dim() > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.dim(),
            });
        }
        let mut padded = f.coeffs().to_vec();
        padded.resize(self.dim(), Complex::new(0.0, 0.0));
        let out = &self.matrix * DVector::from_vec(padded);
        FockCoefficients::new(out.iter().copied().collect())
    }

    /// `MᴴM`, the finite-section Gram matrix of `|T|²`.
    pub fn gram(&self) -> DMatrix<Complex> {
        self.matrix.adjoint() * &self.matrix
    }

    /// `Σ_n M[n][n]`.
    pub fn trace_diagonal(&self) -> Complex {
        self.matrix.diagonal().iter().sum()
    }

    /// `Σ |M[m][n]|²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_{m,n} A[m][n] zᵐ conj(w)ⁿ/√(m!n!)` for any matrix `A` in this basis.
    pub fn generating_function_of(a: &DMatrix<Complex>, z: Complex, w: Complex) -> Complex {
        let basis = |x: Complex, len: usize| {
            let mut out = Vec::with_capacity(len);
            let mut cur = Complex::new(1.0, 0.0);
            for n in 0..len {
                if n > 0 {
                    cur *= x / (n as f64).sqrt();
                }
                out.push(cur);
            }
            out
        };
        let ez = basis(z, a.nrows());
        let ew = basis(w.conj(), a.ncols());
        let mut acc = Complex::new(0.0, 0.0);
        for n in 0..a.ncols() {
            let mut col = Complex::new(0.0, 0.0);
            for m in 0..a.nrows() {
                col += a[(m, n)] * ez[m];
            }
            acc += col * ew[n];
        }
        acc
    }

    /// Kernel reconstructed from the finite section.
    pub fn generating_function(&self, z: Complex, w: Complex) -> Complex {
        Self::generating_function_of(&self.matrix, z, w)
    }

    /// Rows `m,n,re,im` for every nonzero entry, with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n,re,im\n");
        for m in 0..self.dim() {
            for n in 0..self.dim() {
                let v = self.matrix[(m, n)];
                if v.re != 0.0 || v.im != 0.0 {
                    out.push_str(&format!(
                        "{m},{n},{},{}\n",
                        crate::report::fmt_f64(v.re),
                        crate::report::fmt_f64(v.im)
                    ));
                }
            }
        }
        out
    }

    /// `{"s":[re,im],"t":[re,im],"dim":N}`.
    pub fn header_json(&self) -> serde_json::Value {
        serde_json::json!({
            "s": crate::report::complex_pair(self.params.s()),
            "t": crate::report::complex_pair(self.params.t()),
            "dim": self.dim(),
        })
    }
}

/// Rectangular `rows × cols` section of the same matrix.
///
/// Each term is `exp(ln magnitude) · phase` where the phase is a product of
/// unit-vector powers built by repeated multiplication. Swapping `(s, t)` for
/// `(conj s, −t)` conjugates every intermediate exactly, so the two sections
/// mirror each other bit for bit and the adjoint identity survives cancellation.
pub fn section(params: ParameterPair, rows: usize, cols: usize) -> Result<DMatrix<Complex>> {
    for (name, n) in [("rows", rows), ("cols", cols)] {
        if n == 0 || n > MAX_SECTION {
            return Err(Error::InvalidParameter(format!(
                "section {name} must be in 1..={MAX_SECTION}, got {n}"
            )));
        }
    }
    let s = params.s();
    let t = params.t();
    let holo = t / (2.0 * s);
    let anti = -t.conj() / (2.0 * s);
    let diag = 1.0 / s;
    let t_is_zero = t.re == 0.0 && t.im == 0.0;
    let prefactor = 1.0 / psqrt(s);

    let unit = |z: Complex| {
        let r = z.norm();
        if r == 0.0 {
            Complex::new(1.0, 0.0)
        } else {
            z.unscale(r)
        }
    };
    let powers = |u: Complex, len: usize| {
        let mut out = Vec::with_capacity(len);
        let mut cur = Complex::new(1.0, 0.0);
        for i in 0..len {
            if i > 0 {
                cur *= u;
            }
            out.push(cur);
        }
        out
    };
    // |holo| = |anti|, so one log table serves both.
    // from |t| and |s| so both sides of the adjoint pair get identical bits
    let ln_half = (t.norm() / (2.0 * s.norm())).ln();
    let ln_d = -s.norm().ln();
    let half_len = rows.max(cols) / 2 + 1;
    let half_log: Vec<f64> = (0..half_len)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                i as f64 * ln_half - ln_factorial(i)
            }
        })
        .collect();
    let diag_log: Vec<f64> = (0..rows.min(cols))
        .map(|l| l as f64 * ln_d - ln_factorial(l))
        .collect();
    let pow_h = powers(unit(holo), half_len);
    let pow_a = powers(unit(anti), half_len);
    let pow_d = powers(unit(diag), rows.min(cols));

    let mut matrix = DMatrix::<Complex>::zeros(rows, cols);
    for n in 0..cols {
        for m in (n % 2..rows).step_by(2) {
            let ln_norm = 0.5 * (ln_factorial(m) + ln_factorial(n));
            let mut acc = Complex::new(0.0, 0.0);
            for l in (0..=m.min(n)).filter(|l| (m - l) % 2 == 0) {
                let j = (m - l) / 2;
                let k = (n - l) / 2;
                if t_is_zero && (j > 0 || k > 0) {
                    continue;
                }
                let ln_mag = ln_norm + diag_log[l] + (half_log[j] + half_log[k]);
                acc += (pow_d[l] * (pow_h[j] * pow_a[k])).scale(ln_mag.exp());
            }
            matrix[(m, n)] = prefactor * acc;
        }
    }
    Ok(matrix)
}

/// Integral kernel of `|T^(s,t)|² = (T^(s,t))* T^(s,t)`:
///
/// ```text
/// (|s|²−|t|²)^{-1/2} exp[z conj(w)/(|s|²−|t|²)
///     + ((|t|²+1−|s|²)/(|s|²−|t|²)) ((t/2 conj s) z² + (conj t/2s) conj(w)²)]
/// ```
pub fn modsq_kernel_eval(p: &ParameterPair, z: Complex, w: Complex) -> Result<Complex> {
    p.require_bounded()?;
    let gap = p.gap();
    let factor = -p.discriminant() / gap;
    let quad =
        p.t() / (2.0 * p.s().conj()) * z * z + p.t().conj() / (2.0 * p.s()) * w.conj() * w.conj();
    let exponent = z * w.conj() / gap + factor * quad;
    Ok(exp_checked(exponent)? / gap.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::adjoint_phase;
    use crate::scalar::c;
    use approx::assert_relative_eq;

    #[test]
    fn identity_for_projection() {
        let t = TruncatedOperator::build(ParameterPair::real(1.0, 0.0).unwrap(), 8).unwrap();
        for m in 0..8 {
            for n in 0..8 {
                let expected = if m == n { 1.0 } else { 0.0 };
                assert_relative_eq!(t.entry(m, n).re, expected, epsilon = 1e-14);
                assert_eq!(t.entry(m, n).im, 0.0);
            }
        }
    }

    #[test]
    fn diagonal_for_real_s_and_zero_t() {
        let t = TruncatedOperator::build(ParameterPair::real(2.0, 0.0).unwrap(), 8).unwrap();
        for m in 0..8 {
            for n in 0..8 {
                if m == n {
                    let expected = 2f64.powf(-(n as f64 + 0.5));
                    assert_relative_eq!(t.entry(m, n).re, expected, max_relative = 1e-14);
                } else {
                    assert_eq!(t.entry(m, n), c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn leading_entries_for_2_1() {
        let t = TruncatedOperator::build(ParameterPair::real(2.0, 1.0).unwrap(), 8).unwrap();
        assert_relative_eq!(t.entry(0, 0).re, 0.5f64.sqrt(), max_relative = 1e-15);
        // √(2!)/√2 · (1/4) = 1/4
        assert_relative_eq!(t.entry(2, 0).re, 0.25, max_relative = 1e-14);
        assert_eq!(t.entry(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn parity_zeros_are_exact() {
        let p = ParameterPair::new(c(1.3, -2.1), c(0.4, 0.9)).unwrap();
        let t = TruncatedOperator::build(p, 17).unwrap();
        for m in 0..17 {
            for n in 0..17 {
                if (m + n) % 2 == 1 {
                    assert_eq!(t.entry(m, n), c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn adjoint_relation_small() {
        let p = ParameterPair::new(c(-2.0, 0.0), c(0.5, 1.0)).unwrap();
        let t = TruncatedOperator::build(p, 12).unwrap();
        let adj = TruncatedOperator::build(p.adjoint_pair(), 12).unwrap();
        let phase = adjoint_phase(p.s());
        let diff = (adj.matrix() * phase - t.matrix().adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "diff {diff}");
    }

    #[test]
    fn apply_examples() {
        let id = TruncatedOperator::build(ParameterPair::real(1.0, 0.0).unwrap(), 6).unwrap();
        let f = FockCoefficients::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)]).unwrap();
        let out = id.apply(&f).unwrap();
        for (a, b) in out.coeffs().iter().zip(f.coeffs()) {
            assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
        assert_eq!(out.dim(), 6);

        let t = TruncatedOperator::build(ParameterPair::real(2.0, 0.0).unwrap(), 6).unwrap();
        let out = t.apply(&FockCoefficients::basis(1, 6).unwrap()).unwrap();
        assert_relative_eq!(out.coeffs()[1].re, 2f64.powf(-1.5), max_relative = 1e-14);

        let p = ParameterPair::new(c(2.0, 0.5), c(-1.0, 0.3)).unwrap();
        let t = TruncatedOperator::build(p, 6).unwrap();
        let out = t.apply(&FockCoefficients::basis(0, 6).unwrap()).unwrap();
        for m in 0..6 {
            assert_eq!(out.coeffs()[m], t.entry(m, 0));
        }

        let too_long = FockCoefficients::basis(0, 7).unwrap();
        assert_eq!(t.apply(&too_long).unwrap_err().kind(), "dimension_mismatch");
    }

    #[test]
    fn build_rejects_bad_dimension() {
        let p = ParameterPair::real(2.0, 0.0).unwrap();
        assert!(TruncatedOperator::build(p, 0).is_err());
        assert!(TruncatedOperator::build(p, MAX_DIM + 1).is_err());
        assert!(TruncatedOperator::build(p, MAX_DIM).is_ok());
    }

    #[test]
    fn modsq_examples() {
        let v = modsq_kernel_eval(
            &ParameterPair::real(2.0, 1.0).unwrap(),
            c(0.0, 0.0),
            c(0.0, 0.0),
        )
        .unwrap();
        assert_relative_eq!(v.re, 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        let v = modsq_kernel_eval(
            &ParameterPair::real(2.0, 0.0).unwrap(),
            c(1.0, 0.0),
            c(1.0, 0.0),
        )
        .unwrap();
        assert_relative_eq!(v.re, 0.5 * 0.25f64.exp(), max_relative = 1e-15);
        let z = c(0.3, -1.2);
        let w = c(-0.7, 0.4);
        let v = modsq_kernel_eval(&ParameterPair::real(1.0, 0.0).unwrap(), z, w).unwrap();
        assert_relative_eq!((v - (z * w.conj()).exp()).norm(), 0.0, epsilon = 1e-14);
        assert!(modsq_kernel_eval(&ParameterPair::real(1.2, 0.9).unwrap(), z, w).is_err());
    }

    #[test]
    fn trace_examples() {
        let id = TruncatedOperator::build(ParameterPair::real(1.0, 0.0).unwrap(), 8).unwrap();
        assert_relative_eq!(id.trace_diagonal().re, 8.0, max_relative = 1e-14);
        let t = TruncatedOperator::build(ParameterPair::real(2.0, 0.0).unwrap(), 64).unwrap();
        assert!((t.trace_diagonal() - c(2f64.sqrt(), 0.0)).norm() < 1e-12);
        let t = TruncatedOperator::build(ParameterPair::real(2.0, 1.0).unwrap(), 64).unwrap();
        assert!((t.trace_diagonal() - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn csv_lists_only_nonzero_entries() {
        let t = TruncatedOperator::build(ParameterPair::real(2.0, 0.0).unwrap(), 3).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "m,n,re,im");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0,0.7071067811865"));
        let header = t.header_json();
        assert_eq!(header["dim"], 3);
        assert_eq!(header["s"][0], 2.0);
    }

    #[test]
    fn normalized_kernel_has_unit_norm() {
        let k = FockCoefficients::normalized_kernel(c(1.0, -0.5), 64).unwrap();
        assert_relative_eq!(k.norm(), 1.0, max_relative = 1e-13);
        let w = c(1.0, -0.5);
        let z = c(0.2, 0.3);
        let expected = (z * w.conj() - 0.5 * w.norm_sqr()).exp();
        assert_relative_eq!((k.eval(z) - expected).norm(), 0.0, epsilon = 1e-13);
    }
}
