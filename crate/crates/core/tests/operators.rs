use std::f64::consts::PI;

use weightlab_core::norms::SampledFunction;
use weightlab_core::operators::{apply_operator, Kernel};
use weightlab_core::{Ball, QuadratureSpec};

fn tight() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-11,
        ..QuadratureSpec::default()
    }
}

fn chi() -> SampledFunction {
    SampledFunction::indicator(&Ball::interval(0.0, 1.0).unwrap())
}

/// `∫_{-1}^{1} |x - y|^{α-1} dy`.
fn riesz_chi(alpha: f64, x: f64) -> f64 {
    if x.abs() < 1.0 {
        ((1.0 + x).powf(alpha) + (1.0 - x).powf(alpha)) / alpha
    } else {
        ((x.abs() + 1.0).powf(alpha) - (x.abs() - 1.0).powf(alpha)) / alpha
    }
}

#[test]
fn riesz_potential_of_an_interval() {
    for alpha in [0.1, 0.5, 0.9] {
        let k = Kernel::fractional(alpha, 1).unwrap();
        for x in [-3.0, -1.0, -0.7, 0.0, 0.2, 0.999, 1.0, 1.5, 10.0] {
            let got = apply_operator(&k, &chi(), &[x], &tight()).unwrap().value;
            let want = riesz_chi(alpha, x);
            assert!(
                (got / want - 1.0).abs() < 1e-9,
                "α={alpha} x={x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn hilbert_transform_of_an_interval() {
    for x in [-4.0, -1.5, 1.2, 3.0] {
        let got = apply_operator(&Kernel::Hilbert, &chi(), &[x], &tight()).unwrap();
        let want = ((x + 1.0) / (x - 1.0)).abs().ln();
        assert!(!got.principal_value);
        assert!(
            (got.value / want - 1.0).abs() < 1e-9,
            "x={x}: {} vs {want}",
            got.value
        );
    }
    for x in [-0.6, 0.0, 0.3, 0.75] {
        let got = apply_operator(&Kernel::Hilbert, &chi(), &[x], &tight()).unwrap();
        let want = ((x + 1.0) / (x - 1.0)).abs().ln();
        assert!(got.principal_value && got.warning.is_none());
        assert!(
            (got.value - want).abs() < 1e-7 * (1.0 + want.abs()),
            "x={x}: {} vs {want}",
            got.value
        );
        assert!(got.error < 1e-6);
    }
}

#[test]
fn planar_riesz_potential_at_the_center() {
    for alpha in [0.5, 1.0, 1.5] {
        let k = Kernel::fractional(alpha, 2).unwrap();
        let disc = SampledFunction::indicator(&Ball::centered(2, 1.0).unwrap());
        let got = apply_operator(&k, &disc, &[0.0, 0.0], &tight())
            .unwrap()
            .value;
        let want = 2.0 * PI / alpha;
        assert!(
            (got / want - 1.0).abs() < 1e-8,
            "α={alpha}: {got} vs {want}"
        );
    }
}
