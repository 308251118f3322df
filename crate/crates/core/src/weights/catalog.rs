//! Example and counterexample pairs instantiated at a setting.
//!
//! Notation: `A = α̃`, `ν = n/r`, `d = δ`, `t = δ̃`. Each constructor checks
//! its own parameter window exactly and is omitted (with the reason) when the
//! window does not contain the setting.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{classify_region, q, Exponent, RegionTag, Setting, Q};

use super::weight::{FailingCondition, MembershipStatus, Weight, WeightPair};

/// Verdict a catalog pair is known to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Expectation {
    pub status: MembershipStatus,
    pub failing_condition: FailingCondition,
    /// Membership in the infimum-normalized class, when it is part of the claim.
    pub old_class: Option<MembershipStatus>,
}

impl Expectation {
    fn member() -> Self {
        Expectation {
            status: MembershipStatus::Member,
            failing_condition: FailingCondition::None,
            old_class: None,
        }
    }

    fn global_failure() -> Self {
        Expectation {
            status: MembershipStatus::Nonmember,
            failing_condition: FailingCondition::Global,
            old_class: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub key: String,
    pub pair: WeightPair,
    pub expected: Expectation,
    pub provenance: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Omission {
    pub key: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    pub omitted: Vec<Omission>,
}

impl Catalog {
    pub fn get(&self, key: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

struct Ctx {
    n: Q,
    a: Q,
    nu: Q,
    d: Q,
    t: Q,
    r_is_one: bool,
    r_conj: Exponent,
}

const MAX_K: i128 = 10_000;

fn half(x: Q) -> Q {
    x / Q::from_integer(2)
}

/// `|x|^{kd}`, `|x|^{ν - A + t + kd}` on `A - n - kd < t ≤ min(A - ν - kd, A - n - (k-1)d)`.
fn tooth(c: &Ctx, out: &mut Catalog) {
    if c.r_is_one {
        out.omitted.push(Omission {
            key: "power-tooth".into(),
            reason: "requires r > 1".into(),
        });
        return;
    }
    let window = |k: Q| {
        let lo = c.a - c.n - k * c.d;
        let hi = (c.a - c.nu - k * c.d).min(c.a - c.n - (k - Q::one()) * c.d);
        lo < c.t && c.t <= hi
    };
    let mut found = false;
    for k in 1..=MAX_K {
        let kq = Q::from_integer(k);
        if c.a - c.n - kq * c.d >= c.t && k > 1 && c.a - c.n - (kq - Q::one()) * c.d < c.t {
            break;
        }
        if window(kq) {
            found = true;
            out.entries.push(CatalogEntry {
                key: format!("power-tooth,k={k}"),
                pair: WeightPair::powers(kq * c.d, c.nu - c.a + c.t + kq * c.d),
                expected: Expectation::member(),
                provenance: "power pair on the tooth windows below the line t = A - n",
            });
        }
        if c.a - c.n - kq * c.d < c.t - c.d * Q::from_integer(2) {
            break;
        }
    }
    if !found {
        out.omitted.push(Omission {
            key: "power-tooth".into(),
            reason: format!("no k ≥ 1 whose window contains δ̃ = {}", c.t),
        });
    }
}

/// `|x|^θ`, `|x|^β` with `θ = A - ν - kd - 2t`, `β = -kd - t` on
/// `A - ν - (k+1)d < t ≤ A - n - kd`.
fn triangle(c: &Ctx, out: &mut Catalog) -> Result<()> {
    if c.r_is_one {
        out.omitted.push(Omission {
            key: "power-triangle".into(),
            reason: "requires r > 1".into(),
        });
        return Ok(());
    }
    let mut found = false;
    for k in 0..=MAX_K {
        let kq = Q::from_integer(k);
        let lo = c.a - c.nu - (kq + Q::one()) * c.d;
        let hi = c.a - c.n - kq * c.d;
        if hi < c.t && lo < c.t {
            break;
        }
        if !(lo < c.t && c.t <= hi) {
            continue;
        }
        let theta = c.a - c.nu - kq * c.d - Q::from_integer(2) * c.t;
        let beta = -kq * c.d - c.t;
        // identity used by the scaling argument, and positivity of θ
        if !(-c.t - theta + beta - c.nu + c.a).is_zero() {
            return Err(Error::Verification(format!(
                "triangle identity fails at k={k}"
            )));
        }
        if !theta.is_positive() {
            out.omitted.push(Omission {
                key: format!("power-triangle,k={k}"),
                reason: format!("θ = {theta} is not positive"),
            });
            continue;
        }
        found = true;
        out.entries.push(CatalogEntry {
            key: format!("power-triangle,k={k}"),
            pair: WeightPair::powers(theta, beta),
            expected: Expectation::member(),
            provenance: "power pair on the triangle windows below the line t = A - n",
        });
    }
    if !found {
        out.omitted.push(Omission {
            key: "power-triangle".into(),
            reason: format!("no k ≥ 0 whose window contains δ̃ = {}", c.t),
        });
    }
    Ok(())
}

fn endpoint(c: &Ctx, out: &mut Catalog) {
    if !c.r_is_one {
        out.omitted.push(Omission {
            key: "endpoint-r1".into(),
            reason: "requires r = 1".into(),
        });
        out.omitted.push(Omission {
            key: "constant-r1".into(),
            reason: "requires r = 1".into(),
        });
        return;
    }
    if c.t < c.a - c.n {
        out.entries.push(CatalogEntry {
            key: "endpoint-r1".into(),
            pair: WeightPair::powers(-c.t, c.n - c.a),
            expected: Expectation::member(),
            provenance: "r = 1 pair (|x|^{-δ̃}, |x|^{n-α̃}) below t = A - n",
        });
    } else {
        out.omitted.push(Omission {
            key: "endpoint-r1".into(),
            reason: "requires δ̃ < α̃ - n".into(),
        });
    }
    if c.t == c.a - c.n {
        out.entries.push(CatalogEntry {
            key: "constant-r1".into(),
            pair: WeightPair::powers(Q::zero(), Q::zero()),
            expected: Expectation::member(),
            provenance: "r = 1 constant pair on t = A - n",
        });
    } else {
        out.omitted.push(Omission {
            key: "constant-r1".into(),
            reason: "requires δ̃ = α̃ - n".into(),
        });
    }
}

/// `(1, |x|^{ν - A + t})` on `A - n < t < d`, `t ≤ A - ν`.
fn power_v(c: &Ctx, out: &mut Catalog) {
    if !c.r_is_one && c.a - c.n < c.t && c.t < c.d && c.t <= c.a - c.nu {
        out.entries.push(CatalogEntry {
            key: "power-v".into(),
            pair: WeightPair::powers(Q::zero(), c.nu - c.a + c.t),
            expected: Expectation::member(),
            provenance: "constant w with a negative power v between t = A - n and t = δ",
        });
    } else {
        out.omitted.push(Omission {
            key: "power-v".into(),
            reason: "requires r > 1, α̃ - n < δ̃ < δ, δ̃ ≤ α̃ - n/r".into(),
        });
    }
}

/// On `t = d < A - ν`: `v = |x|^{-θ}` with `θ` mid-window in `(A - ν - d, n - ν)`,
/// `w = |x|^{A - ν - d - θ}`.
fn boundary_delta(c: &Ctx, out: &mut Catalog) {
    let nr_conj = c.n - c.nu;
    if !c.r_is_one && c.t == c.d && c.d < c.a - c.nu {
        let theta = half((c.a - c.nu - c.d) + nr_conj);
        out.entries.push(CatalogEntry {
            key: "boundary-delta".into(),
            pair: WeightPair::powers(c.a - c.nu - c.d - theta, -theta),
            expected: Expectation::member(),
            provenance: "power pair on the edge δ̃ = δ below the one-weight line",
        });
    } else {
        out.omitted.push(Omission {
            key: "boundary-delta".into(),
            reason: "requires r > 1 and δ̃ = δ < α̃ - n/r".into(),
        });
    }
}

fn local_not_global(c: &Ctx, out: &mut Catalog) {
    if c.t == c.d && c.d < c.a - c.nu {
        out.entries.push(CatalogEntry {
            key: "local-not-global".into(),
            pair: WeightPair::powers(Q::zero(), c.nu - c.a + c.d),
            expected: Expectation::global_failure(),
            provenance: "satisfies the local but not the global condition (δ̃ = δ < α̃ - n/r)",
        });
    } else {
        out.omitted.push(Omission {
            key: "local-not-global".into(),
            reason: "requires δ̃ = δ < α̃ - n/r".into(),
        });
    }
    if c.t < c.d && c.d <= c.a - c.nu {
        out.entries.push(CatalogEntry {
            key: "local-not-global-w".into(),
            pair: WeightPair::powers(c.a - c.t - c.nu, Q::zero()),
            expected: Expectation::global_failure(),
            provenance: "satisfies the local but not the global condition (δ̃ < δ ≤ α̃ - n/r)",
        });
    } else {
        out.omitted.push(Omission {
            key: "local-not-global-w".into(),
            reason: "requires δ̃ < δ ≤ α̃ - n/r".into(),
        });
    }
    let corner = c.t == c.d && c.d == c.a - c.nu;
    if c.t <= c.a - c.nu && c.a - c.nu <= c.d && !corner {
        let theta = c.nu - c.a + c.d + q(1, 10);
        out.entries.push(CatalogEntry {
            key: "local-not-global-theta".into(),
            pair: WeightPair::powers(theta + c.a - c.t - c.nu, theta),
            expected: Expectation::global_failure(),
            provenance: "satisfies the local but not the global condition (δ̃ ≤ α̃ - n/r ≤ δ)",
        });
    } else {
        out.omitted.push(Omission {
            key: "local-not-global-theta".into(),
            reason: "requires δ̃ ≤ α̃ - n/r ≤ δ off the corner".into(),
        });
    }
}

/// Piecewise `w` (exponent θ inside the unit ball, θ + t outside) with
/// `v = |x|^t`, for `n/α̃ < r < n/(α̃ - δ)`.
fn piecewise_separating(c: &Ctx, out: &mut Catalog) -> Result<()> {
    let gap = c.a - c.nu;
    let reason = |why: &str| Omission {
        key: "piecewise-separating".into(),
        reason: why.into(),
    };
    let finite_r = matches!(c.r_conj, Exponent::Finite(_)) && !c.r_is_one;
    if !(finite_r && gap.is_positive() && (c.nu - c.a + c.d).is_positive()) {
        out.omitted.push(reason("requires n/α̃ < r < n/(α̃ - δ)"));
        return Ok(());
    }
    if !(c.t < gap && c.t < c.nu - c.a + c.d) {
        out.omitted
            .push(reason("requires δ̃ < min(α̃ - n/r, n/r - α̃ + δ)"));
        return Ok(());
    }
    let floor = (Q::from_integer(2) * gap - c.d).max(Q::zero());
    let lo = (gap - c.t).max(floor);
    if !(lo < gap) {
        out.omitted.push(reason("empty θ window"));
        return Ok(());
    }
    let theta = half(lo + gap);
    let w = Weight::piecewise(theta, theta + c.t, Q::one())?;
    out.entries.push(CatalogEntry {
        key: "piecewise-separating".into(),
        pair: WeightPair::new(w, Weight::power(c.t)),
        expected: Expectation {
            old_class: Some(MembershipStatus::Nonmember),
            ..Expectation::member()
        },
        provenance: "piecewise w separating the averaged class from the infimum-normalized class",
    });
    Ok(())
}

/// Every example pair whose window contains `s`.
pub fn catalog(s: &Setting) -> Result<Catalog> {
    let region = classify_region(s);
    let mut out = Catalog {
        entries: vec![],
        omitted: vec![],
    };
    if !matches!(
        region.tag,
        RegionTag::NontrivialAdmissible | RegionTag::OneWeightBoundary
    ) {
        out.omitted.push(Omission {
            key: "*".into(),
            reason: format!("{}: {}", region.tag, region.reason),
        });
        return Ok(out);
    }
    let c = Ctx {
        n: Q::from_integer(s.n() as i128),
        a: s.alpha_tilde(),
        nu: s.n_over_r(),
        d: *s.delta(),
        t: *s.delta_tilde(),
        r_is_one: *s.r() == Exponent::Finite(Q::one()),
        r_conj: s.r_conj(),
    };
    tooth(&c, &mut out);
    triangle(&c, &mut out)?;
    endpoint(&c, &mut out);
    power_v(&c, &mut out);
    boundary_delta(&c, &mut out);
    local_not_global(&c, &mut out);
    piecewise_separating(&c, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::symbolic::{analyze, ClassKind};

    fn setting(r: Exponent, dt: Q) -> Setting {
        Setting::exact(1, q(1, 2), q(3, 10), 1, q(1, 1), r, dt).unwrap()
    }

    fn fin(a: i128, b: i128) -> Exponent {
        Exponent::Finite(q(a, b))
    }

    #[test]
    fn tooth_example_present() {
        let c = catalog(&setting(fin(4, 1), q(-3, 10))).unwrap();
        let e = c.get("power-tooth,k=1").expect("tooth k=1");
        assert_eq!(e.pair, WeightPair::powers(q(3, 10), q(-11, 20)));
    }

    #[test]
    fn local_not_global_example_present() {
        let c = catalog(&setting(fin(4, 1), q(3, 10))).unwrap();
        let e = c.get("local-not-global").unwrap();
        assert_eq!(e.pair, WeightPair::powers(q(0, 1), q(-1, 4)));
        assert_eq!(e.expected.failing_condition, FailingCondition::Global);
    }

    #[test]
    fn trivial_setting_is_empty() {
        let c = catalog(&setting(fin(4, 1), q(2, 5))).unwrap();
        assert!(c.entries.is_empty());
        assert!(c.omitted[0].reason.contains("TrivialOnly"));
    }

    #[test]
    fn r1_pairs() {
        let c = catalog(&setting(fin(1, 1), q(-1, 2))).unwrap();
        assert_eq!(
            c.get("endpoint-r1").unwrap().pair,
            WeightPair::powers(q(1, 2), q(1, 5))
        );
        let c = catalog(&setting(fin(1, 1), q(-1, 5))).unwrap();
        assert!(c.get("constant-r1").is_some());
    }

    #[test]
    fn every_entry_matches_the_exact_decider() {
        let mut checked = 0;
        for r in [
            fin(1, 1),
            fin(5, 4),
            fin(8, 5),
            fin(4, 1),
            Exponent::Infinite,
        ] {
            for k in -40..=10 {
                let s = setting(r.clone(), q(k, 40));
                for e in catalog(&s).unwrap().entries {
                    let rep = analyze(&e.pair, &s.class_params(), ClassKind::Averaged).unwrap();
                    assert_eq!(
                        rep.status, e.expected.status,
                        "{} at {s}: {}",
                        e.key, rep.witness
                    );
                    assert_eq!(
                        rep.failing_condition, e.expected.failing_condition,
                        "{} at {s}",
                        e.key
                    );
                    if let Some(old) = e.expected.old_class {
                        let rep = analyze(&e.pair, &s.class_params(), ClassKind::Infimum).unwrap();
                        assert_eq!(rep.status, old, "{} old class at {s}", e.key);
                    }
                    checked += 1;
                }
            }
        }
        assert!(checked > 100, "{checked}");
    }
}
