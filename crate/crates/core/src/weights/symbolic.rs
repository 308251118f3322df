//! Exact membership decision for radial (piecewise) power pairs.
//!
//! Work in logarithmic coordinates `x = ln R`, `y = ln |x_B|`. Up to
//! constants, every functional restricted to a regime is a finite maximum of
//! terms `e^{e·(x,y)} · Π (1 + ℓ_k(x,y))^{p_k}` obtained from dyadic sums
//! `Σ_{A ≤ 2^i ≤ B} 2^{ie} ≈ max(A^e, B^e)` (or `log(B/A)` when `e = 0`).
//! Regimes are cones in the `(x, y)` plane; a term is bounded on a cone iff it
//! does not grow along any of its extreme rays.
//!
//! Regimes (with `c` the break radius of the profiles):
//! centered balls (`|x_B| ≲ R`) split at `R = c`; far balls (`|x_B| ≥ 2R`)
//! split into `x < y < c`, `x < c < y` and `c < x < y`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::params::{ClassParams, Exponent, Setting, Q};

use super::weight::{
    FailingCondition, MembershipStatus, MembershipVerdict, Method, Weight, WeightPair,
};

type V2 = [Q; 2];

fn v2(a: Q, b: Q) -> V2 {
    [a, b]
}

fn zero2() -> V2 {
    [Q::zero(), Q::zero()]
}

fn dot(a: &V2, b: &V2) -> Q {
    a[0] * b[0] + a[1] * b[1]
}

/// `e^{e·(x,y)} Π (1 + ℓ_k)^{p_k}`; logs are stored as `(∇ℓ_k, p_k)`.
#[derive(Debug, Clone, PartialEq)]
struct Term {
    e: V2,
    logs: Vec<(V2, Q)>,
}

impl Term {
    fn one() -> Self {
        Term {
            e: zero2(),
            logs: vec![],
        }
    }

    fn mono(e: V2) -> Self {
        Term { e, logs: vec![] }
    }

    fn mul(&self, o: &Term) -> Term {
        let mut logs = self.logs.clone();
        logs.extend(o.logs.iter().cloned());
        Term {
            e: [self.e[0] + o.e[0], self.e[1] + o.e[1]],
            logs,
        }
    }

    fn pow(&self, p: &Q) -> Term {
        Term {
            e: [self.e[0] * p, self.e[1] * p],
            logs: self.logs.iter().map(|(l, k)| (*l, k * p)).collect(),
        }
    }

    /// Growth along `d`: (power exponent, net power of growing logarithms).
    fn along(&self, d: &V2) -> (Q, Q) {
        let s = dot(&self.e, d);
        let lp = self
            .logs
            .iter()
            .filter(|(l, _)| dot(l, d).is_positive())
            .map(|(_, k)| *k)
            .sum::<Q>();
        (s, lp)
    }
}

/// Endpoint of a dyadic sum: `0`, `∞`, or `e^{ℓ(x,y)}` for a linear `ℓ`.
#[derive(Debug, Clone, Copy)]
enum End {
    Zero,
    Inf,
    At(V2),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Sum,
    Sup,
}

/// Where a sum fails to converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Blowup {
    AtZero,
    AtInfinity,
}

/// `Σ_{A ≤ t ≤ B} t^e` over dyadic `t` (or `sup` of `t^e`).
fn geo(mode: Mode, e: Q, a: End, b: End) -> std::result::Result<Term, Blowup> {
    match e.signum() {
        s if s.is_positive() => match b {
            End::At(l) => Ok(Term::mono([l[0] * e, l[1] * e])),
            End::Inf => Err(Blowup::AtInfinity),
            End::Zero => Ok(Term::one()),
        },
        s if s.is_negative() => match a {
            End::At(l) => Ok(Term::mono([l[0] * e, l[1] * e])),
            End::Zero => Err(Blowup::AtZero),
            End::Inf => Ok(Term::one()),
        },
        _ => match mode {
            Mode::Sup => Ok(Term::one()),
            Mode::Sum => match (a, b) {
                (End::Zero, _) => Err(Blowup::AtZero),
                (_, End::Inf) => Err(Blowup::AtInfinity),
                (End::At(la), End::At(lb)) => Ok(Term {
                    e: zero2(),
                    logs: vec![(v2(lb[0] - la[0], lb[1] - la[1]), Q::one())],
                }),
                _ => Ok(Term::one()),
            },
        },
    }
}

/// A maximum of terms.
type Expr = Vec<Term>;

fn scale(expr: Expr, t: &Term) -> Expr {
    expr.into_iter().map(|x| x.mul(t)).collect()
}

fn product(a: &Expr, b: &Expr) -> Expr {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x.mul(y)))
        .collect()
}

fn root(expr: Expr, q: &Exponent) -> Expr {
    match q {
        Exponent::Infinite => expr,
        Exponent::Finite(q) => expr.into_iter().map(|t| t.pow(&q.recip())).collect(),
    }
}

/// Piece of a sum: integrand exponent between two endpoints.
struct Piece(Q, End, End);

fn sum_pieces(mode: Mode, pieces: Vec<Piece>) -> std::result::Result<Expr, Blowup> {
    pieces
        .into_iter()
        .map(|Piece(e, a, b)| geo(mode, e, a, b))
        .collect()
}

const R: V2 = [Q::new_raw(1, 1), Q::new_raw(0, 1)];
const RHO: V2 = [Q::new_raw(0, 1), Q::new_raw(1, 1)];

fn at_r() -> End {
    End::At(R)
}
fn at_rho() -> End {
    End::At(RHO)
}
fn at_c() -> End {
    End::At(zero2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Region {
    CenteredBelowBreak,
    CenteredAboveBreak,
    FarBelowBreak,
    FarStraddling,
    FarAboveBreak,
}

impl Region {
    const ALL: [Region; 5] = [
        Region::CenteredBelowBreak,
        Region::CenteredAboveBreak,
        Region::FarBelowBreak,
        Region::FarStraddling,
        Region::FarAboveBreak,
    ];

    fn centered(self) -> bool {
        matches!(
            self,
            Region::CenteredBelowBreak | Region::CenteredAboveBreak
        )
    }

    /// `R` below the break.
    fn r_inner(self) -> bool {
        matches!(
            self,
            Region::CenteredBelowBreak | Region::FarBelowBreak | Region::FarStraddling
        )
    }

    /// `|x_B|` below the break (far regimes).
    fn rho_inner(self) -> bool {
        matches!(self, Region::FarBelowBreak)
    }

    fn rays(self) -> Vec<V2> {
        let q = |a: i128, b: i128| v2(Q::from_integer(a), Q::from_integer(b));
        match self {
            Region::CenteredBelowBreak => vec![q(-1, 0)],
            Region::CenteredAboveBreak => vec![q(1, 0)],
            Region::FarBelowBreak => vec![q(-1, 0), q(-1, -1)],
            Region::FarStraddling => vec![q(-1, 0), q(0, 1)],
            Region::FarAboveBreak => vec![q(0, 1), q(1, 1)],
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Region::CenteredBelowBreak => "centered balls, R below the break radius",
            Region::CenteredAboveBreak => "centered balls, R above the break radius",
            Region::FarBelowBreak => "far balls, R < |x_B| below the break radius",
            Region::FarStraddling => "far balls, R below and |x_B| above the break radius",
            Region::FarAboveBreak => "far balls, break radius < R < |x_B|",
        }
    }
}

fn describe_ray(region: Region, d: &V2) -> String {
    let s = |v: &Q| v.signum().to_integer();
    match (region.centered(), s(&d[0]), s(&d[1])) {
        (true, -1, _) => "R→0".into(),
        (true, 1, _) => "R→∞".into(),
        (false, -1, 0) => "R→0 at fixed |x_B|".into(),
        (false, 0, 1) => "|x_B|→∞ at fixed R".into(),
        (false, -1, -1) => "R,|x_B|→0 at fixed |x_B|/R".into(),
        (false, 1, 1) => "R,|x_B|→∞ at fixed |x_B|/R".into(),
        _ => format!("direction ({}, {}) in (ln R, ln |x_B|)", d[0], d[1]),
    }
}

/// Which class is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    /// Normalization by `w(B)/|B|`.
    Averaged,
    /// Normalization by `inf_B w` (the older, smaller class).
    Infimum,
}

/// Exponents of a radial profile split at the common break radius.
#[derive(Debug, Clone, Copy)]
struct Prof {
    inner: Q,
    outer: Q,
}

impl Prof {
    fn at(&self, inner: bool) -> Q {
        if inner {
            self.inner
        } else {
            self.outer
        }
    }
}

fn profile(w: &Weight) -> Result<Option<(Prof, Option<Q>)>> {
    match w {
        Weight::Power { exponent } => Ok(Some((
            Prof {
                inner: *exponent,
                outer: *exponent,
            },
            None,
        ))),
        Weight::PiecewisePower {
            inner,
            outer,
            break_radius,
        } => Ok(Some((
            Prof {
                inner: *inner,
                outer: *outer,
            },
            Some(*break_radius),
        ))),
        Weight::Zero => Ok(None),
        Weight::Callable(c) => Err(Error::Unsupported(format!(
            "callable weight {} has no exact profile; use the numeric check",
            c.name
        ))),
    }
}

/// One examined (functional, regime, direction) combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEntry {
    pub functional: &'static str,
    pub region: &'static str,
    pub direction: String,
    /// Growth exponent along the direction (in `e^{t}` units of the log scale).
    pub exponent: String,
    /// Net power of logarithms growing along the direction.
    pub log_power: String,
    pub bounded: bool,
    #[serde(skip)]
    exact: (Q, Q),
}

/// Full outcome of the symbolic analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolicReport {
    pub status: MembershipStatus,
    pub failing_condition: FailingCondition,
    pub witness: serde_json::Value,
    pub table: Vec<ExponentEntry>,
}

impl SymbolicReport {
    /// Smallest positive growth exponent found (a robustness margin for
    /// numeric cross-checks); `None` when nothing grows polynomially.
    pub fn min_positive_exponent(&self) -> Option<Q> {
        self.table
            .iter()
            .map(|e| e.exact.0)
            .filter(|s| s.is_positive())
            .min()
    }

    /// A functional sits exactly on a logarithmic borderline.
    pub fn log_borderline(&self) -> bool {
        self.table
            .iter()
            .any(|e| e.exact.0.is_zero() && !e.exact.1.is_zero())
    }
}

impl fmt::Display for SymbolicReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} ({})", self.status, self.failing_condition)
    }
}

struct Analysis<'a> {
    params: &'a ClassParams,
    w: Prof,
    v: Prof,
    kind: ClassKind,
}

enum Outcome {
    Terms(Expr),
    Blowup(Blowup),
}

impl Analysis<'_> {
    fn n(&self) -> Q {
        self.params.nq()
    }

    /// `1 / (w(B)/|B|)`, or `1/inf_B w` for the older class.
    fn normalization(&self, region: Region) -> std::result::Result<Expr, Blowup> {
        let n = self.n();
        let w = self.w;
        if !region.centered() {
            let a = w.at(region.rho_inner());
            return Ok(vec![Term::mono(v2(Q::zero(), -a))]);
        }
        match self.kind {
            ClassKind::Averaged => {
                // average over B(0,R) is a single dominant term
                let pieces = if region.r_inner() {
                    vec![Piece(n + w.inner, End::Zero, at_r())]
                } else {
                    vec![
                        Piece(n + w.inner, End::Zero, at_c()),
                        Piece(n + w.outer, at_c(), at_r()),
                    ]
                };
                let terms = sum_pieces(Mode::Sum, pieces)?;
                let dominant = if region.r_inner() {
                    terms[0].clone()
                } else {
                    dominant_above_break(&terms, n + w.outer)
                };
                let avg = dominant.mul(&Term::mono(v2(-n, Q::zero())));
                Ok(vec![avg.pow(&-Q::one())])
            }
            ClassKind::Infimum => {
                let pieces = if region.r_inner() {
                    vec![Piece(-w.inner, End::Zero, at_r())]
                } else {
                    vec![
                        Piece(-w.inner, End::Zero, at_c()),
                        Piece(-w.outer, at_c(), at_r()),
                    ]
                };
                sum_pieces(Mode::Sup, pieces)
            }
        }
    }

    fn mode(&self) -> Mode {
        if self.params.conj.is_infinite() {
            Mode::Sup
        } else {
            Mode::Sum
        }
    }

    /// Exponent of the integrand `t^n v^q` (sum) or `v` (sup).
    fn v_exp(&self, b: Q, extra: Q) -> Q {
        match &self.params.conj {
            Exponent::Infinite => b + extra,
            Exponent::Finite(q) => self.n() + q * (b + extra),
        }
    }

    fn local(&self, region: Region) -> std::result::Result<Expr, Blowup> {
        let p = self.params;
        let lead = Term::mono(v2(p.alpha_tilde - p.delta_tilde - p.n_over_r(), Q::zero()));
        let v_part: Expr = if region.centered() {
            let pieces = if region.r_inner() {
                vec![Piece(
                    self.v_exp(self.v.inner, Q::zero()),
                    End::Zero,
                    at_r(),
                )]
            } else {
                vec![
                    Piece(self.v_exp(self.v.inner, Q::zero()), End::Zero, at_c()),
                    Piece(self.v_exp(self.v.outer, Q::zero()), at_c(), at_r()),
                ]
            };
            let s = sum_pieces(self.mode(), pieces)?;
            let s = match self.mode() {
                Mode::Sum => scale(s, &Term::mono(v2(-self.n(), Q::zero()))),
                Mode::Sup => s,
            };
            root(s, &p.conj)
        } else {
            vec![Term::mono(v2(Q::zero(), self.v.at(region.rho_inner())))]
        };
        Ok(product(&scale(v_part, &lead), &self.normalization(region)?))
    }

    fn global(&self, region: Region) -> std::result::Result<Expr, Blowup> {
        let p = self.params;
        let gamma = p.gamma();
        let mode = self.mode();
        let lead = Term::mono(v2(p.delta - p.delta_tilde, Q::zero()));
        // exponent of t^{n-qγ} v^q (sum) or t^{-γ} v (sup)
        let kern = |b: Q| self.v_exp(b, -gamma);
        let inner_sum: Expr = if region.centered() {
            let pieces = if region.r_inner() {
                vec![
                    Piece(kern(self.v.inner), at_r(), at_c()),
                    Piece(kern(self.v.outer), at_c(), End::Inf),
                ]
            } else {
                vec![Piece(kern(self.v.outer), at_r(), End::Inf)]
            };
            sum_pieces(mode, pieces)?
        } else {
            let rho_in = region.rho_inner();
            let b_rho = self.v.at(rho_in);
            let (vq, near_scale) = match &p.conj {
                Exponent::Infinite => (b_rho, -gamma),
                Exponent::Finite(q) => (q * b_rho, -q * gamma),
            };
            // |x_B - y| between R and |x_B|: v ≈ v(x_B)
            let near_ball = scale(
                sum_pieces(mode, vec![Piece(kern(Q::zero()), at_r(), at_rho())])?,
                &Term::mono(v2(Q::zero(), vq)),
            );
            // y near the origin: |x_B - y| ≈ |x_B|
            let origin_pieces = if rho_in {
                vec![Piece(
                    self.v_exp(self.v.inner, Q::zero()),
                    End::Zero,
                    at_rho(),
                )]
            } else {
                vec![
                    Piece(self.v_exp(self.v.inner, Q::zero()), End::Zero, at_c()),
                    Piece(self.v_exp(self.v.outer, Q::zero()), at_c(), at_rho()),
                ]
            };
            let near_origin = scale(
                sum_pieces(mode, origin_pieces)?,
                &Term::mono(v2(Q::zero(), near_scale)),
            );
            // |y| ≳ |x_B|
            let far_pieces = if rho_in {
                vec![
                    Piece(kern(self.v.inner), at_rho(), at_c()),
                    Piece(kern(self.v.outer), at_c(), End::Inf),
                ]
            } else {
                vec![Piece(kern(self.v.outer), at_rho(), End::Inf)]
            };
            let far = sum_pieces(mode, far_pieces)?;
            near_ball
                .into_iter()
                .chain(near_origin)
                .chain(far)
                .collect()
        };
        Ok(product(
            &scale(root(inner_sum, &p.conj), &lead),
            &self.normalization(region)?,
        ))
    }
}

/// The dominant term of `Σ_{(0,c]} + Σ_{(c,R]}` for `R > c`: the second piece
/// when it grows, otherwise the constant (times a log at the borderline).
fn dominant_above_break(terms: &[Term], e_outer: Q) -> Term {
    if e_outer.is_negative() {
        terms[0].clone()
    } else {
        terms[1].clone()
    }
}

fn outcome(r: std::result::Result<Expr, Blowup>) -> Outcome {
    match r {
        Ok(t) => Outcome::Terms(t),
        Err(b) => Outcome::Blowup(b),
    }
}

/// Decide membership of `pair` in the class with parameters `params`.
pub fn analyze(pair: &WeightPair, params: &ClassParams, kind: ClassKind) -> Result<SymbolicReport> {
    pair.validate(params.n)?;
    let (w, wb) = profile(&pair.w)?.expect("w validated as nonzero");
    let Some((v, vb)) = profile(&pair.v)? else {
        return Ok(SymbolicReport {
            status: MembershipStatus::Member,
            failing_condition: FailingCondition::None,
            witness: json!({"reason": "v vanishes identically, every functional is zero"}),
            table: vec![],
        });
    };
    match (wb, vb) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Unsupported(format!(
                "profiles break at different radii {a} and {b}"
            )));
        }
        _ => {}
    }
    let an = Analysis { params, w, v, kind };
    let mut table = Vec::new();
    let mut li: Option<serde_json::Value> = None;
    let mut local_fail: Option<serde_json::Value> = None;
    let mut global_fail: Option<serde_json::Value> = None;
    for region in Region::ALL {
        for (name, res) in [("local", an.local(region)), ("global", an.global(region))] {
            match outcome(res) {
                Outcome::Blowup(b) => {
                    let why = match b {
                        Blowup::AtZero => "integrand not integrable at the origin",
                        Blowup::AtInfinity => "integral diverges at infinity",
                    };
                    let wit =
                        json!({"functional": name, "region": region.describe(), "reason": why});
                    match (b, kind, name) {
                        // a vanishing infimum of w makes the older functional infinite
                        (Blowup::AtZero, ClassKind::Infimum, _)
                            if an.normalization(region).is_err() =>
                        {
                            local_fail.get_or_insert(json!({"functional": name, "region": region.describe(), "reason": "inf of w over centered balls vanishes"}));
                        }
                        (Blowup::AtZero, _, _) => {
                            li.get_or_insert(wit);
                        }
                        (Blowup::AtInfinity, _, "local") => {
                            local_fail.get_or_insert(wit);
                        }
                        (Blowup::AtInfinity, _, _) => {
                            global_fail.get_or_insert(wit);
                        }
                    }
                }
                Outcome::Terms(terms) => {
                    let rays = region.rays();
                    let mut dirs = rays.clone();
                    if rays.len() == 2 {
                        dirs.push(v2(rays[0][0] + rays[1][0], rays[0][1] + rays[1][1]));
                    }
                    for d in &dirs {
                        // the worst term along this direction
                        let worst = terms
                            .iter()
                            .map(|t| t.along(d))
                            .max_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)))
                            .unwrap_or((-Q::one(), Q::zero()));
                        let bounded =
                            worst.0.is_negative() || (worst.0.is_zero() && !worst.1.is_positive());
                        let entry = ExponentEntry {
                            functional: name,
                            region: region.describe(),
                            direction: describe_ray(region, d),
                            exponent: worst.0.to_string(),
                            log_power: worst.1.to_string(),
                            bounded,
                            exact: worst,
                        };
                        if !bounded {
                            let wit = json!({
                                "functional": name,
                                "region": region.describe(),
                                "direction": entry.direction,
                                "exponent": entry.exponent,
                                "log_power": entry.log_power,
                            });
                            if name == "local" {
                                local_fail.get_or_insert(wit);
                            } else {
                                global_fail.get_or_insert(wit);
                            }
                        }
                        table.push(entry);
                    }
                }
            }
        }
    }
    let (status, failing_condition, witness) = if let Some(w) = li {
        (
            MembershipStatus::Nonmember,
            FailingCondition::LocalIntegrability,
            w,
        )
    } else if let Some(w) = local_fail {
        (MembershipStatus::Nonmember, FailingCondition::Local, w)
    } else if let Some(w) = global_fail {
        (MembershipStatus::Nonmember, FailingCondition::Global, w)
    } else {
        (
            MembershipStatus::Member,
            FailingCondition::None,
            serde_json::to_value(&table).expect("serializable table"),
        )
    };
    Ok(SymbolicReport {
        status,
        failing_condition,
        witness,
        table,
    })
}

fn verdict(pair: &WeightPair, setting_label: String, rep: SymbolicReport) -> MembershipVerdict {
    MembershipVerdict {
        pair: pair.label(),
        setting: setting_label,
        method: Method::Symbolic,
        status: rep.status,
        failing_condition: rep.failing_condition,
        witness: rep.witness,
        sup_estimate: None,
        plan_digest: None,
    }
}

/// Exact membership of a power pair in the averaged class.
pub fn check_membership_symbolic(pair: &WeightPair, s: &Setting) -> Result<MembershipVerdict> {
    let rep = analyze(pair, &s.class_params(), ClassKind::Averaged)?;
    Ok(verdict(pair, s.to_string(), rep))
}

/// Exact membership in the older (infimum-normalized) class.
pub fn check_membership_old_symbolic(pair: &WeightPair, s: &Setting) -> Result<MembershipVerdict> {
    let rep = analyze(pair, &s.class_params(), ClassKind::Infimum)?;
    Ok(verdict(pair, s.to_string(), rep))
}

/// Scaling exponent `e` with `F(λB) = λ^e F(B)` for pure power pairs.
pub fn scaling_exponent(pair: &WeightPair, params: &ClassParams) -> Option<Q> {
    match (&pair.w, &pair.v) {
        (Weight::Power { exponent: a }, Weight::Power { exponent: b }) => {
            Some(params.alpha_tilde - params.delta_tilde - params.n_over_r() + b - a)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::q;

    fn setting(r: Exponent, dt: Q) -> Setting {
        Setting::exact(1, q(1, 2), q(3, 10), 1, q(1, 1), r, dt).unwrap()
    }

    fn fin(a: i128, b: i128) -> Exponent {
        Exponent::Finite(q(a, b))
    }

    #[test]
    fn geometric_sums() {
        assert_eq!(
            geo(Mode::Sum, q(1, 2), End::Zero, at_r()).unwrap(),
            Term::mono(v2(q(1, 2), q(0, 1)))
        );
        assert_eq!(
            geo(Mode::Sum, q(-1, 2), End::Zero, at_r()),
            Err(Blowup::AtZero)
        );
        assert_eq!(
            geo(Mode::Sum, q(0, 1), at_r(), End::Inf),
            Err(Blowup::AtInfinity)
        );
        assert_eq!(
            geo(Mode::Sup, q(0, 1), at_r(), End::Inf).unwrap(),
            Term::one()
        );
        let t = geo(Mode::Sum, q(0, 1), at_r(), at_rho()).unwrap();
        assert_eq!(t.logs, vec![(v2(q(-1, 1), q(1, 1)), q(1, 1))]);
    }

    #[test]
    fn tooth_pair_is_member() {
        let s = setting(fin(4, 1), q(-3, 10));
        let p = WeightPair::powers(q(3, 10), q(-11, 20));
        let v = check_membership_symbolic(&p, &s).unwrap();
        assert_eq!(v.status, MembershipStatus::Member, "{}", v.witness);
    }

    #[test]
    fn endpoint_pair_r1_is_member() {
        let s = setting(fin(1, 1), q(-1, 2));
        let p = WeightPair::powers(q(1, 2), q(1, 5));
        assert_eq!(
            check_membership_symbolic(&p, &s).unwrap().status,
            MembershipStatus::Member
        );
    }

    #[test]
    fn one_weight_off_boundary_fails_locally() {
        // δ̃ < α̃ - n/r: the local exponent α̃ - δ̃ - n/r > 0 grows as R → ∞
        let s = setting(fin(4, 1), q(1, 10));
        for a in [q(-1, 2), q(0, 1), q(1, 2)] {
            let v = check_membership_symbolic(&WeightPair::powers(a, a), &s).unwrap();
            assert_eq!(v.status, MembershipStatus::Nonmember);
            assert_eq!(v.failing_condition, FailingCondition::Local);
            assert_eq!(v.witness["exponent"], "9/20");
        }
    }

    #[test]
    fn borderline_pair_fails_globally() {
        let s = setting(fin(4, 1), q(3, 10));
        let v = check_membership_symbolic(&WeightPair::powers(q(0, 1), q(-1, 4)), &s).unwrap();
        assert_eq!(v.status, MembershipStatus::Nonmember);
        assert_eq!(v.failing_condition, FailingCondition::Global);
    }

    #[test]
    fn perturbation_breaks_membership() {
        let s = setting(fin(4, 1), q(1, 5));
        let p = WeightPair::powers(q(0, 1), q(-7, 20));
        let base = s.class_params();
        assert_eq!(
            analyze(&p, &base, ClassKind::Averaged).unwrap().status,
            MembershipStatus::Member
        );
        for t in [q(2, 1), q(1, 2)] {
            let rep = analyze(&p, &base.perturbed(&t).unwrap(), ClassKind::Averaged).unwrap();
            assert_eq!(rep.status, MembershipStatus::Nonmember, "t={t}");
        }
    }

    #[test]
    fn piecewise_pair_separates_the_classes() {
        let s = Setting::exact(1, q(1, 2), q(3, 10), 1, q(1, 1), fin(8, 5), q(1, 10)).unwrap();
        let w = Weight::piecewise(q(1, 10), q(1, 5), q(1, 1)).unwrap();
        let p = WeightPair::new(w, Weight::power(q(1, 10)));
        assert_eq!(
            check_membership_symbolic(&p, &s).unwrap().status,
            MembershipStatus::Member
        );
        assert_eq!(
            check_membership_old_symbolic(&p, &s).unwrap().status,
            MembershipStatus::Nonmember
        );
    }

    #[test]
    fn non_integrable_v_flagged() {
        let s = setting(fin(4, 1), q(1, 5));
        let v = check_membership_symbolic(&WeightPair::powers(q(0, 1), q(-4, 5)), &s).unwrap();
        assert_eq!(v.failing_condition, FailingCondition::LocalIntegrability);
    }

    #[test]
    fn zero_v_is_member() {
        let s = setting(fin(4, 1), q(1, 5));
        let v = check_membership_symbolic(&WeightPair::new(Weight::constant(), Weight::Zero), &s)
            .unwrap();
        assert_eq!(v.status, MembershipStatus::Member);
    }
}
