use proptest::prelude::*;

use weightlab_core::params::{classify_region, q, Exponent, RegionTag};
use weightlab_core::weights::{check_membership_symbolic, Functionals, MembershipStatus};
use weightlab_core::{Ball, QuadratureSpec, Setting, WeightPair, Q};

/// Closed-form membership of `(|x|^a, |x|^b)` for `1 < r < ∞`, from the
/// power asymptotics of the local and global parts on centered and far balls.
fn power_oracle(s: &Setting, a: Q, b: Q) -> bool {
    let n = Q::from_integer(s.n() as i128);
    let nr = s.n_over_r();
    let nq = n - nr;
    let conj = n / nq;
    let gamma = n - s.alpha_tilde() + s.delta();
    let (delta, dt) = (*s.delta(), *s.delta_tilde());
    b * conj > -n
        && a - b == s.alpha_tilde() - dt - nr
        && b <= a
        && b < gamma - nq
        && dt <= delta
        && !(dt == delta && gamma == nq)
}

fn setting(n: u32, alpha: Q, delta: Q, r_inv: Q, dt: Q) -> Option<Setting> {
    Setting::exact(n, alpha, delta, 1, q(1, 1), Exponent::from_inv(r_inv), dt).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn symbolic_matches_power_oracle(
        n in 1u32..=2,
        alpha in 0i128..10,
        delta in 1i128..10,
        r_inv in 1i128..12,
        dt in -30i128..12,
        a in -19i128..40,
        b_free in -40i128..40,
        on_scaling_line in any::<bool>(),
    ) {
        let s = setting(n, q(alpha, 10), q(delta, 20), q(r_inv, 12), q(dt, 20));
        prop_assume!(s.is_some());
        let s = s.unwrap();
        let a = q(a, 20) * Q::from_integer(n as i128);
        prop_assume!(a > -Q::from_integer(n as i128));
        let b = if on_scaling_line { a - (s.alpha_tilde() - *s.delta_tilde() - s.n_over_r()) } else { q(b_free, 20) };
        let verdict = check_membership_symbolic(&WeightPair::powers(a, b), &s).unwrap();
        let want = power_oracle(&s, a, b);
        prop_assert_eq!(
            verdict.status == MembershipStatus::Member,
            want,
            "(|x|^{}, |x|^{}) at {}: {:?} {}", a, b, s, verdict.status, verdict.witness
        );
    }

    #[test]
    fn admissibility_is_monotone_in_delta_tilde(
        alpha in 0i128..10,
        delta in 1i128..10,
        r_inv in 0i128..=12,
        dt in -40i128..20,
        drop in 1i128..20,
    ) {
        let hi = setting(1, q(alpha, 10), q(delta, 20), q(r_inv, 12), q(dt, 20));
        prop_assume!(hi.is_some());
        let hi = hi.unwrap();
        let lo = hi.with_delta_tilde(q(dt - drop, 20));
        let admits = |s: &Setting| matches!(classify_region(s).tag, RegionTag::NontrivialAdmissible | RegionTag::OneWeightBoundary);
        if admits(&hi) {
            prop_assert_eq!(classify_region(&lo).tag, RegionTag::NontrivialAdmissible);
        }
    }
}

#[test]
fn functionals_scale_covariantly() {
    let s = Setting::exact(
        1,
        q(1, 2),
        q(3, 10),
        1,
        q(1, 1),
        Exponent::Finite(q(4, 1)),
        q(1, 5),
    )
    .unwrap();
    let spec = QuadratureSpec {
        rel_tol: 1e-10,
        ..QuadratureSpec::default()
    };
    // dilation by λ multiplies both parts by λ^e; e = 0 on the scaling line
    for (a, b) in [
        (q(0, 1), q(-7, 20)),
        (q(1, 5), q(-1, 4)),
        (q(-1, 5), q(-3, 5)),
    ] {
        let pair = WeightPair::powers(a, b);
        let f = Functionals::new(&pair, &s.class_params(), spec.clone()).unwrap();
        let e = weightlab_core::params::to_f64(
            &(s.alpha_tilde() - *s.delta_tilde() - s.n_over_r() + b - a),
        );
        for (c, r) in [(0.0, 1.0), (3.0, 0.5), (-2.0, 4.0)] {
            let base = Ball::interval(c, r).unwrap();
            let m = 1e6;
            let l0 = f.local(&base).unwrap();
            let g0 = f.global(&base, m).unwrap().truncated();
            for lambda in [0.25, 8.0] {
                let scaled = base.scale(lambda);
                let k = lambda.powf(e);
                let l = f.local(&scaled).unwrap();
                let g = f.global(&scaled, lambda * m).unwrap().truncated();
                assert!(
                    (l / (k * l0) - 1.0).abs() < 1e-8,
                    "local at λ={lambda}: {l} vs {}",
                    k * l0
                );
                assert!(
                    (g / (k * g0) - 1.0).abs() < 1e-6,
                    "global at λ={lambda}: {g} vs {}",
                    k * g0
                );
            }
        }
    }
}

#[test]
fn power_oracle_sweep_covers_members() {
    let (mut members, mut total) = (0, 0);
    for r_inv in 1..12 {
        for dt in -20..8 {
            let Some(s) = setting(1, q(1, 2), q(3, 10), q(r_inv, 12), q(dt, 20)) else {
                continue;
            };
            for a in -19..30 {
                let a = q(a, 20);
                let b = a - (s.alpha_tilde() - *s.delta_tilde() - s.n_over_r());
                let v = check_membership_symbolic(&WeightPair::powers(a, b), &s).unwrap();
                let want = power_oracle(&s, a, b);
                assert_eq!(
                    v.status == MembershipStatus::Member,
                    want,
                    "(|x|^{a}, |x|^{b}) at {s}"
                );
                members += want as usize;
                total += 1;
            }
        }
    }
    assert!(members > total / 10, "{members} members of {total}");
}
