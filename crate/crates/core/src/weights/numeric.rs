//! Sampling-based membership check, the numeric counterpart of the symbolic
//! decider.
//!
//! A finite sampled supremum never proves membership, so the positive outcome
//! is reported as member-consistent. Blow-up is detected from log-log slopes
//! at the ends of one-parameter ball families extracted from the plan:
//! centered balls, far balls at fixed `|x_B|` (R → 0), at fixed `R`
//! (`|x_B|` → ∞) and at a fixed ratio `|x_B|/R` (both ends).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::QuadratureSpec;
use crate::params::{ClassParams, Setting};
use crate::quadrature::linear_fit;

use super::functionals::{FunctionalValue, Functionals, DEFAULT_DOUBLINGS};
use super::plan::{BallSamplePlan, PlanBall};
use super::symbolic::{analyze, ClassKind};
use super::weight::{FailingCondition, MembershipStatus, MembershipVerdict, Method, WeightPair};

/// Calibration of the numeric classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericOptions {
    /// Log-log slope beyond which a family is considered to blow up.
    pub slope_tol: f64,
    /// Points fitted at each end of a family.
    pub fit_points: usize,
    /// Minimal `|x_B|/R` for a ball to count as far.
    pub far_ratio: f64,
    /// Exterior truncation `2^doublings · max(R, |x_B|)`.
    pub doublings: i32,
    pub quadrature: QuadratureSpec,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            slope_tol: 0.05,
            fit_points: 5,
            far_ratio: 16.0,
            doublings: DEFAULT_DOUBLINGS,
            quadrature: QuadratureSpec {
                rel_tol: 1e-7,
                ..QuadratureSpec::default()
            },
        }
    }
}

/// Functional values on one plan ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallValues {
    pub radius_index: usize,
    pub center_index: Option<usize>,
    pub local: f64,
    pub global: FunctionalValue,
    pub full: FunctionalValue,
}

/// Evaluate all three functionals over the plan (parallel, order preserving).
pub fn evaluate_plan(
    pair: &WeightPair,
    params: &ClassParams,
    plan: &BallSamplePlan,
    opts: &NumericOptions,
) -> Result<Vec<BallValues>> {
    let f = Functionals::new(pair, params, opts.quadrature.clone())?;
    let balls = plan.expand(params.n)?;
    balls
        .par_iter()
        .map(
            |PlanBall {
                 ball,
                 radius_index,
                 center_index,
                 ..
             }| {
                let m = ball.radius.max(ball.center_norm()) * 2f64.powi(opts.doublings);
                Ok(BallValues {
                    radius_index: *radius_index,
                    center_index: *center_index,
                    local: f.local(ball)?,
                    global: f.global(ball, m)?,
                    full: f.full(ball, m)?,
                })
            },
        )
        .collect()
}

/// Grid of per-(center, radius) maxima over directions; row 0 is centered.
struct Table {
    radii: Vec<f64>,
    centers: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn build(
        plan: &BallSamplePlan,
        vals: &[BallValues],
        pick: impl Fn(&BallValues) -> f64,
    ) -> Table {
        let radii = plan.radius_grid();
        let centers = plan.center_grid();
        let mut rows = vec![vec![0.0f64; radii.len()]; centers.len() + 1];
        for v in vals {
            let row = v.center_index.map_or(0, |j| j + 1);
            let cell = &mut rows[row][v.radius_index];
            *cell = cell.max(pick(v));
        }
        Table {
            radii,
            centers,
            rows,
        }
    }
}

/// One family's end slope exceeding the threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Blowup {
    pub family: String,
    pub end: &'static str,
    pub slope: f64,
}

fn end_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|y| !(*y > 0.0) || !y.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Some(linear_fit(&lx, &ly).0)
}

/// Scan every family; `growth_small` / `growth_large` are the slope signs
/// that indicate blow-up toward the small / large end of the parameter.
fn scan(t: &Table, opts: &NumericOptions) -> Vec<Blowup> {
    let k = opts.fit_points;
    let tol = opts.slope_tol;
    let mut out = Vec::new();
    let mut check = |family: String, xs: Vec<f64>, ys: Vec<f64>, small: bool, large: bool| {
        if xs.len() < k {
            return;
        }
        if small {
            if let Some(s) = end_slope(&xs[..k], &ys[..k]) {
                if s < -tol {
                    out.push(Blowup {
                        family: family.clone(),
                        end: "small",
                        slope: s,
                    });
                }
            }
        }
        if large {
            let n = xs.len();
            if let Some(s) = end_slope(&xs[n - k..], &ys[n - k..]) {
                if s > tol {
                    out.push(Blowup {
                        family,
                        end: "large",
                        slope: s,
                    });
                }
            }
        }
    };
    check(
        "centered balls".into(),
        t.radii.clone(),
        t.rows[0].clone(),
        true,
        true,
    );
    for (j, &rho) in t.centers.iter().enumerate() {
        let idx: Vec<usize> = (0..t.radii.len())
            .filter(|&i| t.radii[i] * opts.far_ratio <= rho)
            .collect();
        check(
            format!("far balls at |x_B|={rho:.3e}, R→0"),
            idx.iter().map(|&i| t.radii[i]).collect(),
            idx.iter().map(|&i| t.rows[j + 1][i]).collect(),
            true,
            false,
        );
    }
    for (i, &r) in t.radii.iter().enumerate() {
        let idx: Vec<usize> = (0..t.centers.len())
            .filter(|&j| t.centers[j] >= opts.far_ratio * r)
            .collect();
        check(
            format!("far balls at R={r:.3e}, |x_B|→∞"),
            idx.iter().map(|&j| t.centers[j]).collect(),
            idx.iter().map(|&j| t.rows[j + 1][i]).collect(),
            false,
            true,
        );
    }
    // fixed ratio: pairs (R_i, ρ_j) with ρ_j / R_i constant on the shared grid
    if t.centers.len() == t.radii.len()
        && t.centers
            .iter()
            .zip(&t.radii)
            .all(|(c, r)| (c / r - 1.0).abs() < 1e-12)
    {
        if let Some(shift) =
            (1..t.radii.len()).find(|&s| t.centers[s] / t.radii[0] >= opts.far_ratio)
        {
            let idx: Vec<usize> = (0..t.radii.len() - shift).collect();
            check(
                format!("far balls at |x_B|/R={:.3}", t.centers[shift] / t.radii[0]),
                idx.iter().map(|&i| t.radii[i]).collect(),
                idx.iter().map(|&i| t.rows[i + shift + 1][i]).collect(),
                true,
                true,
            );
        }
    }
    out
}

fn verdict_of(
    pair: &WeightPair,
    setting: String,
    status: MembershipStatus,
    failing: FailingCondition,
    witness: serde_json::Value,
    sup: Option<f64>,
    digest: String,
) -> MembershipVerdict {
    MembershipVerdict {
        pair: pair.label(),
        setting,
        method: Method::Numeric,
        status,
        failing_condition: failing,
        witness,
        sup_estimate: sup,
        plan_digest: Some(digest),
    }
}

/// Numeric membership for arbitrary class parameters.
pub fn numeric_membership(
    pair: &WeightPair,
    params: &ClassParams,
    setting_label: String,
    plan: &BallSamplePlan,
    opts: &NumericOptions,
) -> Result<MembershipVerdict> {
    let digest = plan.digest(params.n)?;
    let vals = match evaluate_plan(pair, params, plan, opts) {
        Ok(v) => v,
        Err(Error::LocalIntegrability(why)) => {
            return Ok(verdict_of(
                pair,
                setting_label,
                MembershipStatus::NonmemberConsistent,
                FailingCondition::LocalIntegrability,
                json!({ "reason": why }),
                None,
                digest,
            ))
        }
        Err(Error::ToleranceNotMet { estimate, error }) => {
            return Ok(verdict_of(
                pair,
                setting_label,
                MembershipStatus::Undecided,
                FailingCondition::None,
                json!({ "reason": "quadrature tolerance not met", "estimate": estimate, "error": error }),
                None,
                digest,
            ))
        }
        Err(e) => return Err(e),
    };
    let sup = vals
        .iter()
        .filter_map(|v| v.full.finite())
        .fold(0.0, f64::max);
    let local = Table::build(plan, &vals, |v| v.local);
    let blow = scan(&local, opts);
    if let Some(b) = blow.first() {
        return Ok(verdict_of(
            pair,
            setting_label,
            MembershipStatus::NonmemberConsistent,
            FailingCondition::Local,
            json!({ "functional": "local", "family": b.family, "end": b.end, "slope": b.slope }),
            Some(sup),
            digest,
        ));
    }
    if let Some(v) = vals.iter().find(|v| v.global.is_divergent()) {
        return Ok(verdict_of(
            pair,
            setting_label,
            MembershipStatus::NonmemberConsistent,
            FailingCondition::Global,
            json!({ "functional": "global", "reason": "exterior integral grows with the truncation", "value": v.global }),
            Some(sup),
            digest,
        ));
    }
    let global = Table::build(plan, &vals, |v| v.global.truncated());
    if let Some(b) = scan(&global, opts).first() {
        return Ok(verdict_of(
            pair,
            setting_label,
            MembershipStatus::NonmemberConsistent,
            FailingCondition::Global,
            json!({ "functional": "global", "family": b.family, "end": b.end, "slope": b.slope }),
            Some(sup),
            digest,
        ));
    }
    let max_local = vals.iter().map(|v| v.local).fold(0.0, f64::max);
    let max_global = vals
        .iter()
        .map(|v| v.global.truncated())
        .fold(0.0, f64::max);
    Ok(verdict_of(
        pair,
        setting_label,
        MembershipStatus::MemberConsistent,
        FailingCondition::None,
        json!({ "max_local": max_local, "max_global": max_global, "max_full": sup, "balls": vals.len() }),
        Some(sup),
        digest,
    ))
}

pub fn check_membership_numeric(
    pair: &WeightPair,
    s: &Setting,
    plan: &BallSamplePlan,
    opts: &NumericOptions,
) -> Result<MembershipVerdict> {
    numeric_membership(pair, &s.class_params(), s.to_string(), plan, opts)
}

/// Membership in the class with conjugate exponent `r'·t`; exact for power
/// pairs, sampled otherwise.
pub fn perturbed_membership(
    pair: &WeightPair,
    s: &Setting,
    t: &crate::params::Q,
    plan: &BallSamplePlan,
    opts: &NumericOptions,
) -> Result<MembershipVerdict> {
    let params = s.class_params().perturbed(t)?;
    let label = format!("{s} perturbed: r' -> r'*{t} = {}", params.conj);
    if pair.w.is_radial_power() && (pair.v.is_radial_power() || pair.v.is_zero()) {
        let rep = analyze(pair, &params, ClassKind::Averaged)?;
        return Ok(MembershipVerdict {
            pair: pair.label(),
            setting: label,
            method: Method::Symbolic,
            status: rep.status,
            failing_condition: rep.failing_condition,
            witness: rep.witness,
            sup_estimate: None,
            plan_digest: None,
        });
    }
    numeric_membership(pair, &params, label, plan, opts)
}
