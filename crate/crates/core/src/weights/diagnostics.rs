//! Finite-constant diagnostics: the doubled-ball bound for `v`, reverse
//! Hölder and doubling constants of `w`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Ball, QuadratureSpec};
use crate::params::Setting;

use super::plan::BallSamplePlan;
use super::weight::{Weight, WeightPair};

/// Supremum of a ball quantity over a plan, with per-radius-decade maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub sup: f64,
    /// `(lower radius of the decade, sup over balls with radius in it)`.
    pub decades: Vec<(f64, f64)>,
    pub plan_digest: String,
}

impl ConstantEstimate {
    /// Ratio between the larger and smaller of the sups over the first and
    /// last radius decades.
    pub fn end_spread(&self) -> f64 {
        match (self.decades.first(), self.decades.last()) {
            (Some(a), Some(b)) if a.1 > 0.0 && b.1 > 0.0 => a.1.max(b.1) / a.1.min(b.1),
            (Some(a), Some(b)) if a.1 == 0.0 && b.1 == 0.0 => 1.0,
            _ => f64::INFINITY,
        }
    }
}

fn sup_over_plan(
    n: u32,
    plan: &BallSamplePlan,
    f: impl Fn(&Ball) -> Result<f64> + Sync,
) -> Result<ConstantEstimate> {
    let balls = plan.expand(n)?;
    let vals: Vec<f64> = balls
        .par_iter()
        .map(|b| f(&b.ball))
        .collect::<Result<_>>()?;
    let lo = plan.r_min.log10();
    let mut decades: Vec<(f64, f64)> = Vec::new();
    for (b, v) in balls.iter().zip(&vals) {
        // tolerate rounding of the grid at decade boundaries
        let d = (b.ball.radius.log10() - lo + 1e-9).floor();
        let start = 10f64.powf(lo + d);
        let idx = d as usize;
        if decades.len() <= idx {
            decades.resize(idx + 1, (0.0, 0.0));
        }
        decades[idx].0 = start;
        decades[idx].1 = decades[idx].1.max(*v);
    }
    // the top grid point opens a decade of its own; merge it into the last full one
    if decades.len() > 1 && plan.r_max.log10() - lo == (decades.len() - 1) as f64 {
        let top = decades.pop().expect("non-empty").1;
        let last = decades.last_mut().expect("non-empty");
        last.1 = last.1.max(top);
    }
    let sup = vals.iter().cloned().fold(0.0, f64::max);
    Ok(ConstantEstimate {
        sup,
        decades,
        plan_digest: plan.digest(n)?,
    })
}

/// `sup_B ‖v χ_{2B}‖_{r'} |B|^{(α̃-δ̃)/n} / w(B)`.
pub fn double_ball_check(
    pair: &WeightPair,
    s: &Setting,
    plan: &BallSamplePlan,
) -> Result<ConstantEstimate> {
    let n = s.n();
    pair.validate(n)?;
    let p = s.class_params().to_f64();
    let spec = QuadratureSpec::default();
    sup_over_plan(n, plan, |b| {
        if pair.v.is_zero() {
            return Ok(0.0);
        }
        let big = b.dilate(2.0);
        let norm = if p.q.is_infinite() {
            pair.v.range_on(&big).0
        } else {
            pair.v.integral(&big, p.q, &spec)?.powf(1.0 / p.q)
        };
        let lead = b.measure().powf((p.alpha_tilde - p.delta_tilde) / n as f64);
        Ok(norm * lead / pair.w.mass(b, &spec)?)
    })
}

/// `sup_B (⨍_B w^s)^{1/s} / ⨍_B w` for the reverse Hölder exponent `s`.
pub fn reverse_holder_check(
    w: &Weight,
    s: f64,
    n: u32,
    plan: &BallSamplePlan,
) -> Result<ConstantEstimate> {
    w.validate_w(n)?;
    let spec = QuadratureSpec::default();
    sup_over_plan(n, plan, |b| {
        let m = b.measure();
        let top = if s.is_infinite() {
            w.range_on(b).0
        } else {
            (w.integral(b, s, &spec)? / m).powf(1.0 / s)
        };
        Ok(top / (w.mass(b, &spec)? / m))
    })
}

/// `sup_B w(2B) / w(B)`.
pub fn doubling_check(w: &Weight, n: u32, plan: &BallSamplePlan) -> Result<ConstantEstimate> {
    w.validate_w(n)?;
    let spec = QuadratureSpec::default();
    sup_over_plan(n, plan, |b| {
        Ok(w.mass(&b.dilate(2.0), &spec)? / w.mass(b, &spec)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::params::{q, Exponent};
    use approx::assert_relative_eq;

    fn plan() -> BallSamplePlan {
        BallSamplePlan::decades(1e-3, 1e3, 2)
    }

    #[test]
    fn constant_weight_constants() {
        let one = Weight::constant();
        assert_relative_eq!(
            reverse_holder_check(&one, 4.0 / 3.0, 1, &plan())
                .unwrap()
                .sup,
            1.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            doubling_check(&one, 1, &plan()).unwrap().sup,
            2.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            doubling_check(&one, 2, &plan()).unwrap().sup,
            4.0,
            max_relative = 1e-8
        );
    }

    #[test]
    fn power_weight_reverse_holder_is_finite() {
        let c = reverse_holder_check(&Weight::power(q(3, 10)), 4.0 / 3.0, 1, &plan()).unwrap();
        assert!(c.sup.is_finite() && c.sup >= 1.0);
        assert!(c.end_spread() < 10.0);
        assert_eq!(c.decades.len(), 6);
    }

    #[test]
    fn non_integrable_power_flagged() {
        let e = reverse_holder_check(&Weight::power(q(-9, 10)), 4.0 / 3.0, 1, &plan());
        assert!(matches!(e, Err(Error::LocalIntegrability(_))), "{e:?}");
    }

    #[test]
    fn zero_v_double_ball() {
        let s = Setting::exact(
            1,
            q(1, 2),
            q(3, 10),
            1,
            q(1, 1),
            Exponent::Finite(q(4, 1)),
            q(-3, 10),
        )
        .unwrap();
        let p = WeightPair::new(Weight::constant(), Weight::Zero);
        assert_eq!(double_ball_check(&p, &s, &plan()).unwrap().sup, 0.0);
        let p = WeightPair::powers(q(3, 10), q(-11, 20));
        let c = double_ball_check(&p, &s, &plan()).unwrap();
        assert!(c.sup.is_finite() && c.end_spread() < 10.0);
    }
}
