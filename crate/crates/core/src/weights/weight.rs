//! Weight representations, pairs and membership reports.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{integrate, power_integral, Ball, QuadratureSpec, Region, Singularity};
use crate::params::{q_serde, to_f64, Q};

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A user supplied weight with optional singularity annotations.
#[derive(Clone)]
pub struct CallableWeight {
    pub name: String,
    eval: Evaluator,
    pub singularities: Vec<Singularity>,
}

impl CallableWeight {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CallableWeight {
            name: name.into(),
            eval: Arc::new(eval),
            singularities: vec![],
        }
    }

    pub fn with_singularity(mut self, point: Vec<f64>, exponent: f64) -> Self {
        self.singularities.push(Singularity { point, exponent });
        self
    }
}

impl fmt::Debug for CallableWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallableWeight")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CallableWeight {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && Arc::ptr_eq(&self.eval, &other.eval)
    }
}

/// Nonnegative weight on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    /// `|x|^exponent`.
    Power {
        #[serde(with = "q_serde")]
        exponent: Q,
    },
    /// `|x|^inner` for `|x| ≤ break_radius`, `c·|x|^outer` beyond, with `c`
    /// chosen so the weight is continuous.
    PiecewisePower {
        #[serde(with = "q_serde")]
        inner: Q,
        #[serde(with = "q_serde")]
        outer: Q,
        #[serde(with = "q_serde")]
        break_radius: Q,
    },
    #[serde(skip)]
    Callable(CallableWeight),
    Zero,
}

/// Radial profile `g(t)` of a power-type weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Profile {
    pub inner: f64,
    pub outer: f64,
    pub brk: f64,
}

impl Profile {
    pub fn at(&self, t: f64) -> f64 {
        if t <= self.brk {
            t.powf(self.inner)
        } else {
            self.brk.powf(self.inner - self.outer) * t.powf(self.outer)
        }
    }

    /// Supremum and infimum of `g` over `t ∈ [lo, hi]`.
    pub fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut vals = vec![self.at(lo), self.at(hi)];
        if lo < self.brk && self.brk < hi {
            vals.push(self.at(self.brk));
        }
        let sup = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let inf = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        (sup, inf)
    }
}

impl Weight {
    pub fn power(exponent: Q) -> Self {
        Weight::Power { exponent }
    }

    pub fn constant() -> Self {
        Weight::Power {
            exponent: Q::zero(),
        }
    }

    pub fn piecewise(inner: Q, outer: Q, break_radius: Q) -> Result<Self> {
        if break_radius <= Q::zero() {
            return Err(Error::InvalidArgument(format!(
                "break radius {break_radius} must be positive"
            )));
        }
        Ok(Weight::PiecewisePower {
            inner,
            outer,
            break_radius,
        })
    }

    pub fn callable(c: CallableWeight) -> Self {
        Weight::Callable(c)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Weight::Zero)
    }

    pub fn is_radial_power(&self) -> bool {
        matches!(self, Weight::Power { .. } | Weight::PiecewisePower { .. })
    }

    pub(crate) fn profile(&self) -> Option<Profile> {
        match self {
            Weight::Power { exponent } => {
                let a = to_f64(exponent);
                Some(Profile {
                    inner: a,
                    outer: a,
                    brk: 1.0,
                })
            }
            Weight::PiecewisePower {
                inner,
                outer,
                break_radius,
            } => Some(Profile {
                inner: to_f64(inner),
                outer: to_f64(outer),
                brk: to_f64(break_radius),
            }),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Weight::Zero => 0.0,
            Weight::Callable(c) => (c.eval)(x),
            _ => self
                .profile()
                .map(|p| p.at(crate::geometry::norm(x)))
                .unwrap_or(0.0),
        }
    }

    /// Annotations describing the singular behaviour of `self^p`.
    pub fn singularities(&self, n: u32, p: f64) -> Vec<Singularity> {
        let origin = vec![0.0; n as usize];
        match self {
            Weight::Zero => vec![],
            Weight::Callable(c) => c
                .singularities
                .iter()
                .map(|s| Singularity {
                    point: s.point.clone(),
                    exponent: s.exponent * p,
                })
                .collect(),
            _ => {
                let prof = self.profile().expect("power weight");
                let mut out = vec![Singularity {
                    point: origin,
                    exponent: prof.inner * p,
                }];
                if n == 1 && prof.inner != prof.outer {
                    // kinks at ±break radius
                    out.push(Singularity {
                        point: vec![prof.brk],
                        exponent: 0.0,
                    });
                    out.push(Singularity {
                        point: vec![-prof.brk],
                        exponent: 0.0,
                    });
                }
                out
            }
        }
    }

    /// Reject weights that cannot serve as the `w` of a pair.
    pub fn validate_w(&self, n: u32) -> Result<()> {
        let nq = Q::from_integer(n as i128);
        match self {
            Weight::Zero => Err(Error::InvalidArgument(
                "the zero weight is only admitted as v".into(),
            )),
            Weight::Power { exponent } if *exponent <= -nq => Err(Error::LocalIntegrability(
                format!("|x|^{exponent} is not locally integrable in dimension {n}"),
            )),
            Weight::PiecewisePower { inner, .. } if *inner <= -nq => {
                Err(Error::LocalIntegrability(format!(
                    "inner exponent {inner} is not locally integrable"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `∫_B self^p`.
    pub fn integral(&self, b: &Ball, p: f64, spec: &QuadratureSpec) -> Result<f64> {
        match self {
            Weight::Zero => Ok(0.0),
            Weight::Power { exponent } if to_f64(exponent) * p > -(b.dim() as f64) => {
                power_integral(b, to_f64(exponent) * p)
            }
            Weight::Power { .. } if b.center_norm() <= b.radius => {
                Err(Error::LocalIntegrability(format!(
                    "{} raised to {p} is not integrable near the origin",
                    self.label()
                )))
            }
            _ => {
                let spec = spec
                    .clone()
                    .with_singularities(self.singularities(b.dim(), p));
                let f = |x: &[f64]| self.eval(x).powf(p);
                Ok(integrate(&f, &Region::Ball(b.clone()), &spec)?.value)
            }
        }
    }

    /// `w(B)` (the measure of `B` under the weight).
    pub fn mass(&self, b: &Ball, spec: &QuadratureSpec) -> Result<f64> {
        self.integral(b, 1.0, spec)
    }

    /// `(sup_B self, inf_B self)`; exact for radial powers, sampled otherwise.
    pub fn range_on(&self, b: &Ball) -> (f64, f64) {
        let rho = b.center_norm();
        let lo = (rho - b.radius).max(0.0);
        let hi = rho + b.radius;
        match self {
            Weight::Zero => (0.0, 0.0),
            Weight::Callable(_) => sampled_range(self, b),
            _ => self.profile().expect("power weight").range(lo, hi),
        }
    }

    /// Compact label used in reports and tables.
    pub fn label(&self) -> String {
        match self {
            Weight::Zero => "0".into(),
            Weight::Power { exponent } if exponent.is_zero() => "1".into(),
            Weight::Power { exponent } => format!("|x|^{exponent}"),
            Weight::PiecewisePower {
                inner,
                outer,
                break_radius,
            } => {
                format!("|x|^{inner}[|x|<={break_radius}] + c|x|^{outer}[|x|>{break_radius}]")
            }
            Weight::Callable(c) => c.name.clone(),
        }
    }

    /// Pointwise power `self^t` for radial power weights.
    pub fn pow(&self, t: &Q) -> Option<Weight> {
        match self {
            Weight::Power { exponent } => Some(Weight::power(exponent * t)),
            Weight::PiecewisePower {
                inner,
                outer,
                break_radius,
            } => Some(Weight::PiecewisePower {
                inner: inner * t,
                outer: outer * t,
                break_radius: *break_radius,
            }),
            Weight::Zero if t.is_positive() => Some(Weight::Zero),
            _ => None,
        }
    }
}

const SAMPLES_PER_AXIS: usize = 257;

fn sampled_range(w: &Weight, b: &Ball) -> (f64, f64) {
    let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut visit = |x: &[f64]| {
        let v = w.eval(x);
        sup = sup.max(v);
        inf = inf.min(v);
    };
    let k = SAMPLES_PER_AXIS;
    match b.dim() {
        1 => {
            for i in 0..k {
                let s = -1.0 + 2.0 * (i as f64 + 0.5) / k as f64;
                visit(&[b.center[0] + s * b.radius]);
            }
        }
        _ => {
            for i in 0..k {
                for j in 0..k {
                    let sx = -1.0 + 2.0 * (i as f64 + 0.5) / k as f64;
                    let sy = -1.0 + 2.0 * (j as f64 + 0.5) / k as f64;
                    if sx * sx + sy * sy < 1.0 {
                        visit(&[b.center[0] + sx * b.radius, b.center[1] + sy * b.radius]);
                    }
                }
            }
        }
    }
    (sup, inf)
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A pair `(w, v)` of weights on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightPair {
    pub w: Weight,
    pub v: Weight,
}

impl WeightPair {
    pub fn new(w: Weight, v: Weight) -> Self {
        WeightPair { w, v }
    }

    pub fn powers(a: Q, b: Q) -> Self {
        WeightPair {
            w: Weight::power(a),
            v: Weight::power(b),
        }
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        self.w.validate_w(n)?;
        for s in self
            .w
            .singularities(n, 1.0)
            .iter()
            .chain(self.v.singularities(n, 1.0).iter())
        {
            if s.point.len() != n as usize {
                return Err(Error::InvalidArgument(format!(
                    "annotation at {:?} does not live in dimension {n}",
                    s.point
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("({}, {})", self.w.label(), self.v.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MembershipStatus {
    Member,
    Nonmember,
    MemberConsistent,
    NonmemberConsistent,
    Undecided,
}

impl MembershipStatus {
    /// Whether `self` and `other` assert opposite outcomes.
    pub fn contradicts(self, other: MembershipStatus) -> bool {
        use MembershipStatus::*;
        let pos = |s| matches!(s, Member | MemberConsistent);
        let neg = |s| matches!(s, Nonmember | NonmemberConsistent);
        (pos(self) && neg(other)) || (neg(self) && pos(other))
    }

    pub fn is_positive(self) -> bool {
        matches!(
            self,
            MembershipStatus::Member | MembershipStatus::MemberConsistent
        )
    }

    pub fn is_negative(self) -> bool {
        matches!(
            self,
            MembershipStatus::Nonmember | MembershipStatus::NonmemberConsistent
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailingCondition {
    None,
    Local,
    Global,
    LocalIntegrability,
}

impl fmt::Display for FailingCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailingCondition::None => "none",
            FailingCondition::Local => "local",
            FailingCondition::Global => "global",
            FailingCondition::LocalIntegrability => "local-integrability",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Symbolic,
    Numeric,
}

/// Outcome of a membership test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub pair: String,
    pub setting: String,
    pub method: Method,
    pub status: MembershipStatus,
    pub failing_condition: FailingCondition,
    /// For nonmembers the regime and blowing-up exponent; for members the
    /// exponent table.
    pub witness: serde_json::Value,
    pub sup_estimate: Option<f64>,
    pub plan_digest: Option<String>,
}
