//! Parameter tuple `(n, α, δ, m, η, r, δ̃)` and the classification of the
//! `(1/r, δ̃)` plane.
//!
//! All boundary decisions are made in exact rational arithmetic. Floating
//! inputs are converted with [`rationalize`], which snaps values lying within
//! `1e-12` (relative) of a short fraction onto that fraction.

use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational used for every exponent decision.
pub type Q = Ratio<i128>;

const SNAP_TOL: f64 = 1e-12;
const MAX_DENOM: i128 = 1_000_000_000_000;

/// Best rational approximation of `x` within `1e-12 · max(1, |x|)`.
///
/// The second component is `true` when the fraction converts back to exactly
/// the same `f64`, i.e. no snapping took place.
pub fn rationalize(x: f64) -> Result<(Q, bool)> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite value {x}")));
    }
    let tol = SNAP_TOL * x.abs().max(1.0);
    let sign: i128 = if x < 0.0 { -1 } else { 1 };
    let y = x.abs();
    // continued fraction convergents
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut rem = y;
    for _ in 0..64 {
        let a = rem.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > MAX_DENOM {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let approx = p1 as f64 / q1 as f64;
        if (approx - y).abs() <= tol {
            let q = Q::new(sign * p1, q1);
            let exact = q.to_f64() == Some(x);
            return Ok((q, exact));
        }
        let frac = rem - a;
        if frac <= 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    if q1 == 0 {
        return Err(Error::InvalidArgument(format!("cannot rationalize {x}")));
    }
    let q = Q::new(sign * p1, q1);
    Ok((q, false))
}

/// Shorthand used throughout the crate and its tests.
pub fn q(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Lebesgue exponent in `[1, ∞]` (or, for conjugate exponents of perturbed
/// classes, any positive value). Infinity is a first-class value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Q),
    Infinite,
}

impl Exponent {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_infinite() && value > 0.0 {
            return Ok(Exponent::Infinite);
        }
        Ok(Exponent::Finite(rationalize(value)?.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `1/r`, with `1/∞ = 0`.
    pub fn inv(&self) -> Q {
        match self {
            Exponent::Finite(v) => v.recip(),
            Exponent::Infinite => Q::zero(),
        }
    }

    /// Exponent with the given reciprocal; `0 ↦ ∞`.
    pub fn from_inv(inv: Q) -> Self {
        if inv.is_zero() {
            Exponent::Infinite
        } else {
            Exponent::Finite(inv.recip())
        }
    }

    /// Hölder conjugate `r'` with `1' = ∞` and `∞' = 1`. Defined for `r ≥ 1`.
    pub fn conjugate(&self) -> Self {
        Exponent::from_inv(Q::from_integer(1) - self.inv())
    }

    /// Multiply by a positive rational; `∞ · t = ∞`.
    pub fn scale(&self, t: &Q) -> Self {
        match self {
            Exponent::Finite(v) => Exponent::Finite(v * t),
            Exponent::Infinite => Exponent::Infinite,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(v) => to_f64(v),
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => s.serialize_str(&v.to_string()),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = RatInput::deserialize(d)?;
        match v {
            RatInput::Text(t) if t.trim().eq_ignore_ascii_case("inf") => Ok(Exponent::Infinite),
            other => other
                .into_q()
                .map(Exponent::Finite)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// Accepts either a JSON number or a string such as `"3/10"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum RatInput {
    Num(f64),
    Text(String),
}

impl RatInput {
    fn into_q(self) -> Result<Q> {
        match self {
            RatInput::Num(x) => Ok(rationalize(x)?.0),
            RatInput::Text(t) => parse_q(&t),
        }
    }
}

/// Parse `"a/b"`, `"a"` or a decimal literal.
pub fn parse_q(text: &str) -> Result<Q> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once('/') {
        let a: i128 = a
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(t.into()))?;
        let b: i128 = b
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(t.into()))?;
        if b == 0 {
            return Err(Error::InvalidArgument(format!("zero denominator in {t}")));
        }
        return Ok(Q::new(a, b));
    }
    let x: f64 = t.parse().map_err(|_| Error::InvalidArgument(t.into()))?;
    Ok(rationalize(x)?.0)
}

/// Serde helpers so that rationals appear as `"p/q"` strings in JSON.
pub mod q_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        RatInput::deserialize(d)?
            .into_q()
            .map_err(serde::de::Error::custom)
    }
}

/// The parameter tuple of the weight class, with the derived `α̃ = mδ + α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SettingRepr", into = "SettingRepr")]
pub struct Setting {
    n: u32,
    alpha: Q,
    delta: Q,
    m: u32,
    eta: Q,
    r: Exponent,
    delta_tilde: Q,
    /// Some input had to be snapped onto a rational.
    inexact: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SettingRepr {
    n: u32,
    #[serde(with = "q_serde")]
    alpha: Q,
    #[serde(with = "q_serde")]
    delta: Q,
    m: u32,
    #[serde(with = "q_serde", default = "one")]
    eta: Q,
    r: Exponent,
    #[serde(with = "q_serde")]
    delta_tilde: Q,
}

fn one() -> Q {
    Q::from_integer(1)
}

impl TryFrom<SettingRepr> for Setting {
    type Error = Error;
    fn try_from(v: SettingRepr) -> Result<Self> {
        Setting::exact(v.n, v.alpha, v.delta, v.m, v.eta, v.r, v.delta_tilde)
    }
}

impl From<Setting> for SettingRepr {
    fn from(s: Setting) -> Self {
        SettingRepr {
            n: s.n,
            alpha: s.alpha,
            delta: s.delta,
            m: s.m,
            eta: s.eta,
            r: s.r,
            delta_tilde: s.delta_tilde,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} alpha={} delta={} m={} eta={} r={} delta_tilde={}",
            self.n, self.alpha, self.delta, self.m, self.eta, self.r, self.delta_tilde
        )
    }
}

impl Setting {
    /// Build from floating inputs; each value is rationalized.
    pub fn new(
        n: u32,
        alpha: f64,
        delta: f64,
        m: u32,
        eta: f64,
        r: Exponent,
        delta_tilde: f64,
    ) -> Result<Self> {
        let mut inexact = false;
        let mut conv = |x: f64| -> Result<Q> {
            let (v, exact) = rationalize(x)?;
            inexact |= !exact;
            Ok(v)
        };
        let (a, d, e, dt) = (conv(alpha)?, conv(delta)?, conv(eta)?, conv(delta_tilde)?);
        let mut s = Setting::exact(n, a, d, m, e, r, dt)?;
        s.inexact = inexact;
        Ok(s)
    }

    /// Build from exact rationals.
    pub fn exact(
        n: u32,
        alpha: Q,
        delta: Q,
        m: u32,
        eta: Q,
        r: Exponent,
        delta_tilde: Q,
    ) -> Result<Self> {
        let s = Setting {
            n,
            alpha,
            delta,
            m,
            eta,
            r,
            delta_tilde,
            inexact: false,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let zero = Q::zero();
        let n = Q::from_integer(self.n as i128);
        if !(1..=2).contains(&self.n) {
            return Err(Error::InvalidSetting(format!(
                "dimension {} not in {{1,2}}",
                self.n
            )));
        }
        if self.alpha < zero || self.alpha >= n {
            return Err(Error::InvalidSetting(format!(
                "alpha={} outside [0,n)",
                self.alpha
            )));
        }
        if self.eta <= zero || self.eta > one() {
            return Err(Error::InvalidSetting(format!(
                "eta={} outside (0,1]",
                self.eta
            )));
        }
        if self.delta <= zero || self.delta >= one() || self.delta >= self.eta {
            return Err(Error::InvalidSetting(format!(
                "delta={} must satisfy 0 < delta < min(1, eta={})",
                self.delta, self.eta
            )));
        }
        if self.m >= 1 {
            let bound = (n - self.alpha) / Q::from_integer(self.m as i128);
            if self.delta >= bound {
                return Err(Error::InvalidSetting(format!(
                    "delta={} must be below (n-alpha)/m={}",
                    self.delta, bound
                )));
            }
        }
        if let Exponent::Finite(r) = &self.r {
            if *r < one() {
                return Err(Error::InvalidSetting(format!("r={r} below 1")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn alpha(&self) -> &Q {
        &self.alpha
    }
    pub fn delta(&self) -> &Q {
        &self.delta
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn eta(&self) -> &Q {
        &self.eta
    }
    pub fn r(&self) -> &Exponent {
        &self.r
    }
    pub fn delta_tilde(&self) -> &Q {
        &self.delta_tilde
    }
    pub fn is_inexact(&self) -> bool {
        self.inexact
    }

    pub fn alpha_tilde(&self) -> Q {
        Q::from_integer(self.m as i128) * self.delta + self.alpha
    }

    pub fn r_conj(&self) -> Exponent {
        self.r.conjugate()
    }

    /// `n/r` with `n/∞ = 0`.
    pub fn n_over_r(&self) -> Q {
        Q::from_integer(self.n as i128) * self.r.inv()
    }

    pub fn with_r(&self, r: Exponent) -> Result<Self> {
        let mut s = self.clone();
        s.r = r;
        s.validate()?;
        Ok(s)
    }

    pub fn with_delta_tilde(&self, delta_tilde: Q) -> Self {
        let mut s = self.clone();
        s.delta_tilde = delta_tilde;
        s
    }

    /// Parameters entering the class functionals.
    pub fn class_params(&self) -> ClassParams {
        ClassParams {
            n: self.n,
            alpha_tilde: self.alpha_tilde(),
            delta: self.delta,
            delta_tilde: self.delta_tilde,
            conj: self.r_conj(),
        }
    }
}

/// What the class functionals depend on: `n`, `α̃`, `δ`, `δ̃` and the
/// conjugate exponent `q = r'`.
///
/// `q` may be any positive value; values below one arise when the exponent is
/// perturbed to `(r't)'` with `r't < 1`, in which case `‖·‖_q` is the usual
/// quasi-norm and `n/r` is read as `n(1 - 1/q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub n: u32,
    #[serde(with = "q_serde")]
    pub alpha_tilde: Q,
    #[serde(with = "q_serde")]
    pub delta: Q,
    #[serde(with = "q_serde")]
    pub delta_tilde: Q,
    pub conj: Exponent,
}

impl ClassParams {
    pub fn nq(&self) -> Q {
        Q::from_integer(self.n as i128)
    }

    /// `n/r = n(1 - 1/q)`.
    pub fn n_over_r(&self) -> Q {
        self.nq() * (one() - self.conj.inv())
    }

    /// Decay exponent `γ = n - α̃ + δ` of the class kernel.
    pub fn gamma(&self) -> Q {
        self.nq() - self.alpha_tilde + self.delta
    }

    /// Same parameters with the conjugate exponent multiplied by `t`, i.e. the
    /// class `H((r't)', α̃, δ̃)`.
    pub fn perturbed(&self, t: &Q) -> Result<Self> {
        if *t <= Q::zero() {
            return Err(Error::InvalidArgument(format!(
                "perturbation t={t} must be positive"
            )));
        }
        let mut p = self.clone();
        p.conj = self.conj.scale(t);
        Ok(p)
    }

    pub fn to_f64(&self) -> ClassParamsF64 {
        ClassParamsF64 {
            n: self.n,
            alpha_tilde: to_f64(&self.alpha_tilde),
            delta: to_f64(&self.delta),
            delta_tilde: to_f64(&self.delta_tilde),
            q: self.conj.to_f64(),
        }
    }
}

/// Floating copy of [`ClassParams`] for the numeric path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassParamsF64 {
    pub n: u32,
    pub alpha_tilde: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    /// Conjugate exponent; `f64::INFINITY` for `r = 1`.
    pub q: f64,
}

impl ClassParamsF64 {
    pub fn n_over_r(&self) -> f64 {
        if self.q.is_infinite() {
            self.n as f64
        } else {
            self.n as f64 * (1.0 - 1.0 / self.q)
        }
    }
    pub fn gamma(&self) -> f64 {
        self.n as f64 - self.alpha_tilde + self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    NontrivialAdmissible,
    OneWeightBoundary,
    TrivialOnly,
    TrivialCorner,
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionTag::NontrivialAdmissible => "NontrivialAdmissible",
            RegionTag::OneWeightBoundary => "OneWeightBoundary",
            RegionTag::TrivialOnly => "TrivialOnly",
            RegionTag::TrivialCorner => "TrivialCorner",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionClass {
    pub tag: RegionTag,
    pub reason: String,
    /// The point sits on a boundary only after snapping floating inputs.
    pub snapped: bool,
}

/// `α̃ - n/r`, the only `δ̃` at which a single nontrivial weight can satisfy
/// the class condition.
pub fn one_weight_delta(s: &Setting) -> Q {
    s.alpha_tilde() - s.n_over_r()
}

/// Tag a point of the parameter plane.
pub fn classify_region(s: &Setting) -> RegionClass {
    let dt = *s.delta_tilde();
    let delta = *s.delta();
    let edge = one_weight_delta(s);
    let (tag, reason) = if dt > delta {
        (
            RegionTag::TrivialOnly,
            "delta_tilde > delta forces v = 0 a.e.",
        )
    } else if dt > edge {
        (
            RegionTag::TrivialOnly,
            "delta_tilde > alpha_tilde - n/r forces v = 0 a.e.",
        )
    } else if dt == delta && dt == edge {
        (
            RegionTag::TrivialCorner,
            "delta_tilde = delta = alpha_tilde - n/r forces v = 0 a.e.",
        )
    } else if dt == edge {
        (
            RegionTag::OneWeightBoundary,
            "delta_tilde = alpha_tilde - n/r < delta admits single weights",
        )
    } else {
        (
            RegionTag::NontrivialAdmissible,
            "delta_tilde <= min(delta, alpha_tilde - n/r) admits nontrivial pairs",
        )
    };
    let on_boundary = matches!(tag, RegionTag::OneWeightBoundary | RegionTag::TrivialCorner)
        || dt == delta
        || dt == edge;
    RegionClass {
        tag,
        reason: reason.to_string(),
        snapped: on_boundary && s.is_inexact(),
    }
}

/// Everything of a [`Setting`] except `r` and `δ̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBase {
    pub n: u32,
    #[serde(with = "q_serde")]
    pub alpha: Q,
    #[serde(with = "q_serde")]
    pub delta: Q,
    pub m: u32,
    #[serde(with = "q_serde", default = "one")]
    pub eta: Q,
}

impl GridBase {
    pub fn alpha_tilde(&self) -> Q {
        Q::from_integer(self.m as i128) * self.delta + self.alpha
    }

    pub fn setting(&self, r_inv: Q, delta_tilde: Q) -> Result<Setting> {
        Setting::exact(
            self.n,
            self.alpha,
            self.delta,
            self.m,
            self.eta,
            Exponent::from_inv(r_inv),
            delta_tilde,
        )
    }

    /// Default window: `1/r ∈ [0,1]`, `δ̃ ∈ [α̃ - n - 3δ, max(δ, α̃) + δ]`.
    pub fn default_window(&self) -> GridWindow {
        let at = self.alpha_tilde();
        let n = Q::from_integer(self.n as i128);
        let three = Q::from_integer(3);
        let top = if at > self.delta { at } else { self.delta };
        GridWindow {
            r_inv: (Q::zero(), one()),
            delta_tilde: (at - n - three * self.delta, top + self.delta),
            resolution: (100, 100),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridWindow {
    #[serde(with = "pair_q")]
    pub r_inv: (Q, Q),
    #[serde(with = "pair_q")]
    pub delta_tilde: (Q, Q),
    pub resolution: (usize, usize),
}

mod pair_q {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Pair(#[serde(with = "q_serde")] Q, #[serde(with = "q_serde")] Q);

    pub fn serialize<S: Serializer>(v: &(Q, Q), s: S) -> std::result::Result<S::Ok, S::Error> {
        Pair(v.0, v.1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<(Q, Q), D::Error> {
        let Pair(a, b) = Pair::deserialize(d)?;
        Ok((a, b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub r_inv: Q,
    pub delta_tilde: Q,
    pub class: RegionClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub resolution: (usize, usize),
    /// Row-major: `δ̃` index outer, `1/r` index inner.
    pub points: Vec<GridPoint>,
}

fn axis(range: &(Q, Q), count: usize) -> Vec<Q> {
    if count == 1 {
        return vec![range.0];
    }
    let step = (range.1 - range.0) / Q::from_integer(count as i128 - 1);
    (0..count)
        .map(|i| range.0 + step * Q::from_integer(i as i128))
        .collect()
}

/// Classify every point of a rectangular `(1/r, δ̃)` grid.
///
/// A resolution of 1 along an axis yields the single point at the lower end
/// of that axis' range.
pub fn region_grid(base: &GridBase, window: &GridWindow) -> Result<RegionGrid> {
    let (nr, nd) = window.resolution;
    if nr == 0 || nd == 0 {
        return Err(Error::InvalidArgument(
            "grid resolution must be positive".into(),
        ));
    }
    if window.r_inv.0 > window.r_inv.1 || window.delta_tilde.0 > window.delta_tilde.1 {
        return Err(Error::InvalidArgument("empty grid range".into()));
    }
    if (nr > 1 && window.r_inv.0 == window.r_inv.1)
        || (nd > 1 && window.delta_tilde.0 == window.delta_tilde.1)
    {
        return Err(Error::InvalidArgument(
            "degenerate range with resolution > 1".into(),
        ));
    }
    if window.r_inv.0 < Q::zero() || window.r_inv.1 > one() {
        return Err(Error::InvalidArgument("1/r must lie in [0,1]".into()));
    }
    // validates the base parameters once
    base.setting(window.r_inv.0, window.delta_tilde.0)?;
    let r_axis = axis(&window.r_inv, nr);
    let d_axis = axis(&window.delta_tilde, nd);
    let points = (0..nr * nd)
        .into_par_iter()
        .map(|k| {
            let (j, i) = (k / nr, k % nr);
            let s = base.setting(r_axis[i], d_axis[j])?;
            Ok(GridPoint {
                r_inv: r_axis[i],
                delta_tilde: d_axis[j],
                class: classify_region(&s),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionGrid {
        resolution: window.resolution,
        points,
    })
}

impl RegionGrid {
    pub const CSV_HEADER: &'static str = "r_inv,delta_tilde,class,reason";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 80);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},\"{}\"\n",
                fmt_f64(to_f64(&p.r_inv)),
                fmt_f64(to_f64(&p.delta_tilde)),
                p.class.tag,
                p.class.reason
            ));
        }
        out
    }
}

/// Shortest round-trip formatting, with `-0` normalised.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// `|x|` for rationals, re-exported for callers that avoid `num_traits`.
pub fn q_abs(v: &Q) -> Q {
    v.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_setting(r: Exponent, dt: f64) -> Setting {
        Setting::new(1, 0.5, 0.3, 1, 1.0, r, dt).unwrap()
    }

    #[test]
    fn rationalize_snaps_decimals() {
        assert_eq!(rationalize(0.3).unwrap(), (q(3, 10), true));
        assert_eq!(rationalize(-0.55).unwrap().0, q(-11, 20));
        let (v, exact) = rationalize(0.55 + 1e-14).unwrap();
        assert_eq!(v, q(11, 20));
        assert!(!exact);
    }

    #[test]
    fn exponent_conjugates() {
        assert_eq!(Exponent::Finite(q(1, 1)).conjugate(), Exponent::Infinite);
        assert_eq!(Exponent::Infinite.conjugate(), Exponent::Finite(q(1, 1)));
        assert_eq!(
            Exponent::Finite(q(4, 1)).conjugate(),
            Exponent::Finite(q(4, 3))
        );
    }

    #[test]
    fn setting_rejects_invalid() {
        assert!(Setting::new(1, 1.0, 0.3, 0, 1.0, Exponent::Infinite, 0.0).is_err());
        assert!(Setting::new(1, 0.5, 0.6, 1, 1.0, Exponent::Infinite, 0.0).is_err());
        assert!(Setting::new(1, 0.5, 0.3, 1, 0.2, Exponent::Infinite, 0.0).is_err());
        assert!(Setting::new(3, 0.5, 0.3, 1, 1.0, Exponent::Infinite, 0.0).is_err());
        assert!(Setting::new(1, 0.5, 0.3, 1, 1.0, Exponent::Finite(q(1, 2)), 0.0).is_err());
    }

    #[test]
    fn alpha_tilde_and_conjugate() {
        let s = base_setting(Exponent::finite(4.0).unwrap(), 0.2);
        assert_eq!(s.alpha_tilde(), q(4, 5));
        assert_eq!(s.r_conj(), Exponent::Finite(q(4, 3)));
    }

    #[test]
    fn classify_examples() {
        let r4 = Exponent::finite(4.0).unwrap();
        assert_eq!(
            classify_region(&base_setting(r4.clone(), 0.2)).tag,
            RegionTag::NontrivialAdmissible
        );
        assert_eq!(
            classify_region(&base_setting(r4, 0.4)).tag,
            RegionTag::TrivialOnly
        );
        let corner = classify_region(&base_setting(Exponent::finite(2.0).unwrap(), 0.3));
        assert_eq!(corner.tag, RegionTag::TrivialCorner);
        assert!(!corner.snapped);
        let s = Setting::new(1, 0.5, 0.3, 0, 1.0, Exponent::finite(4.0).unwrap(), 0.25).unwrap();
        assert_eq!(classify_region(&s).tag, RegionTag::OneWeightBoundary);
    }

    #[test]
    fn snapped_boundary_is_flagged() {
        let s = Setting::new(
            1,
            0.5,
            0.3,
            0,
            1.0,
            Exponent::finite(4.0).unwrap(),
            0.25 + 1e-14,
        )
        .unwrap();
        let c = classify_region(&s);
        assert_eq!(c.tag, RegionTag::OneWeightBoundary);
        assert!(c.snapped);
    }

    #[test]
    fn one_weight_delta_examples() {
        let s = base_setting(Exponent::finite(4.0).unwrap(), 0.0);
        assert_eq!(one_weight_delta(&s), q(11, 20));
        let s = base_setting(Exponent::Infinite, 0.0);
        assert_eq!(one_weight_delta(&s), q(4, 5));
        let s = Setting::new(2, 0.5, 0.3, 0, 1.0, Exponent::finite(2.0).unwrap(), 0.0).unwrap();
        assert_eq!(one_weight_delta(&s), q(-1, 2));
    }

    #[test]
    fn grid_dominated_region_is_trivial() {
        let base = GridBase {
            n: 1,
            alpha: q(1, 2),
            delta: q(3, 10),
            m: 1,
            eta: q(1, 1),
        };
        let w = GridWindow {
            r_inv: (q(0, 1), q(1, 1)),
            delta_tilde: (q(13, 10), q(14, 10)),
            resolution: (2, 2),
        };
        let g = region_grid(&base, &w).unwrap();
        assert_eq!(g.points.len(), 4);
        assert!(g
            .points
            .iter()
            .all(|p| p.class.tag == RegionTag::TrivialOnly));
    }

    #[test]
    fn grid_errors() {
        let base = GridBase {
            n: 1,
            alpha: q(1, 2),
            delta: q(3, 10),
            m: 1,
            eta: q(1, 1),
        };
        let mut w = base.default_window();
        w.resolution = (0, 3);
        assert!(region_grid(&base, &w).is_err());
        let mut w = base.default_window();
        w.delta_tilde = (q(1, 1), q(0, 1));
        assert!(region_grid(&base, &w).is_err());
    }

    #[test]
    fn grid_boundary_point_is_one_weight() {
        // 1/r = 1/2 gives α̃ - n/r = 0.3 with α̃ = 0.8; pick δ = 0.4 so the edge sits below δ
        let base = GridBase {
            n: 1,
            alpha: q(2, 5),
            delta: q(2, 5),
            m: 1,
            eta: q(1, 1),
        };
        let w = GridWindow {
            r_inv: (q(1, 2), q(1, 2)),
            delta_tilde: (q(3, 10), q(3, 10)),
            resolution: (1, 1),
        };
        let g = region_grid(&base, &w).unwrap();
        assert_eq!(g.points[0].class.tag, RegionTag::OneWeightBoundary);
    }

    #[test]
    fn setting_json_roundtrip() {
        let s = base_setting(Exponent::Infinite, -0.3);
        let text = serde_json::to_string(&s).unwrap();
        let back: Setting = serde_json::from_str(&text).unwrap();
        assert_eq!(s.class_params(), back.class_params());
        assert!(serde_json::from_str::<Setting>(
            r#"{"n":1,"alpha":0.5,"delta":0.3,"m":1,"r":"inf","delta_tilde":0,"bogus":1}"#
        )
        .is_err());
    }
}
