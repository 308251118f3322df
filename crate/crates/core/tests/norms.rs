use proptest::prelude::*;

use weightlab_core::norms::{luxemburg, oscillation, SampledFunction, YoungFunction};
use weightlab_core::params::q;
use weightlab_core::{Ball, QuadratureSpec, Weight};

fn poly(c: [f64; 3]) -> SampledFunction {
    SampledFunction::new("poly", move |x: &[f64]| c[0] + x[0] * (c[1] + x[0] * c[2]))
}

fn coeffs() -> impl Strategy<Value = [f64; 3]> {
    [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64]
}

fn spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-10,
        ..QuadratureSpec::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oscillation_is_a_seminorm(
        f in coeffs(),
        g in coeffs(),
        c in -3.0..3.0f64,
        shift in -5.0..5.0f64,
        center in -3.0..3.0f64,
        radius in 0.05..3.0f64,
        a in -0.5..1.5f64,
    ) {
        let b = Ball::interval(center, radius).unwrap();
        let w = Weight::power(weightlab_core::params::rationalize(a).unwrap().0);
        let s = spec();
        let (f, g) = (poly(f), poly(g));
        let osc = |h: &SampledFunction| oscillation(h, &w, 0.2, &b, &s).unwrap();
        let (of, og) = (osc(&f), osc(&g));
        let tol = 1e-8 * (of + og + 1e-12);
        prop_assert!(osc(&f.sum(&g)) <= of + og + tol);
        prop_assert!((osc(&f.scaled(c)) - c.abs() * of).abs() <= tol * (1.0 + c.abs()));
        // constants are invisible
        prop_assert!((osc(&f.shifted(shift)) - of).abs() <= tol);
    }

    #[test]
    fn luxemburg_is_a_norm(
        f in coeffs(),
        g in coeffs(),
        c in -3.0..3.0f64,
        center in -2.0..2.0f64,
        radius in 0.1..2.0f64,
        which in 0usize..4,
    ) {
        let phi = match which {
            0 => YoungFunction::power(2.5),
            1 => YoungFunction::power_over_p(1.5),
            2 => YoungFunction::l_log_l(),
            _ => YoungFunction::exponential(),
        }
        .unwrap();
        let b = Ball::interval(center, radius).unwrap();
        let s = spec();
        let (f, g) = (poly(f), poly(g));
        let lux = |h: &SampledFunction| luxemburg(h, &phi, &b, &s).unwrap();
        let (nf, ng) = (lux(&f), lux(&g));
        let tol = 1e-8 * (nf + ng + 1e-12);
        prop_assert!((lux(&f.scaled(c)) - c.abs() * nf).abs() <= tol * (1.0 + c.abs()));
        prop_assert!(lux(&f.sum(&g)) <= nf + ng + tol);
    }
}

#[test]
fn oscillation_of_constants_vanishes() {
    let b = Ball::interval(0.5, 2.0).unwrap();
    let o = oscillation(
        &SampledFunction::constant(4.0),
        &Weight::power(q(1, 3)),
        0.1,
        &b,
        &spec(),
    )
    .unwrap();
    assert!(o.abs() < 1e-14);
}
