//! Cross-checks against reference values computed independently at 50
//! significant digits (SVD and diagonal sum of a 90 x 90 section).

use canonical_fock::spectral::{
    closed_singular_values, numeric_singular_values, trace_closed, SpectralReport,
};
use canonical_fock::{Complex, ParameterPair, TruncatedOperator};

struct Reference {
    s: Complex,
    t: Complex,
    mu: [f64; 4],
    trace: Complex,
}

fn references() -> Vec<Reference> {
    vec![
        Reference {
            s: Complex::new(3.0, 0.0),
            t: Complex::new(1.0, 1.0),
            mu: [
                0.643_594_252_905_582_6,
                0.266_585_468_218_872,
                0.110_423_316_467_838_51,
                0.045_738_835_283_195_04,
            ],
            trace: Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        },
        Reference {
            s: Complex::new(2.0, 0.0),
            t: Complex::new(0.0, 1.0),
            mu: [
                0.786_151_377_757_423_3,
                0.485_868_271_756_645_7,
                0.300_283_106_000_777_6,
                0.185_585_165_755_868_07,
            ],
            trace: Complex::new(1.0, 0.0),
        },
        // rotating s leaves the singular values alone but not the trace
        Reference {
            s: Complex::new(0.0, 2.0),
            t: Complex::new(1.0, 0.0),
            mu: [
                0.786_151_377_757_423_3,
                0.485_868_271_756_645_7,
                0.300_283_106_000_777_6,
                0.185_585_165_755_868_07,
            ],
            trace: Complex::new(0.153_645_038_156_066_87, -0.650_850_826_034_645_4),
        },
    ]
}

#[test]
fn closed_singular_values_match_reference() {
    for r in references() {
        let p = ParameterPair::new(r.s, r.t).unwrap();
        let mu = closed_singular_values(&p, 4).unwrap();
        for (got, want) in mu.iter().zip(r.mu) {
            assert!((got - want).abs() < 1e-14, "{p}: {got} vs {want}");
        }
    }
}

#[test]
fn numeric_singular_values_match_reference() {
    for r in references() {
        let p = ParameterPair::new(r.s, r.t).unwrap();
        let op = TruncatedOperator::build(p, 96).unwrap();
        let mu = numeric_singular_values(&op, 4).unwrap();
        for (got, want) in mu.iter().zip(r.mu) {
            assert!((got - want).abs() < 1e-13, "{p}: {got} vs {want}");
        }
    }
}

#[test]
fn trace_matches_reference() {
    for r in references() {
        let p = ParameterPair::new(r.s, r.t).unwrap();
        let tr = trace_closed(&p).unwrap();
        assert!((tr - r.trace).norm() < 1e-12, "{p}: {tr} vs {}", r.trace);
    }
}

#[test]
fn report_is_self_consistent() {
    let p = ParameterPair::new(Complex::new(3.0, 0.0), Complex::new(1.0, 1.0)).unwrap();
    let report = SpectralReport::compute(&p, 8, None, &[1.0, 2.0]).unwrap();
    assert!(report.max_abs_error() < 1e-12);
    assert!((report.trace.closed - report.trace.numeric).norm() < 1e-12);
    // numeric values are square roots of Gram eigenvalues, so each of the
    // ~N negligible ones carries ~√eps of noise; S_1 sums them linearly
    for (pexp, norm) in &report.schatten {
        let tol = if *pexp < 2.0 { 1e-8 } else { 1e-10 };
        let err = (norm.closed - norm.numeric).abs() / norm.closed;
        assert!(err < tol, "p = {pexp}: {norm:?} at N = {}", report.dim);
    }
    assert!(report.residuals.iter().all(|&r| r < 1e-10));
    let json = report.to_json();
    assert_eq!(json["dim"], report.dim);
    assert_eq!(report.to_csv().lines().count(), 9);
}
