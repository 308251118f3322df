//! Balls, dyadic dilates, radial power integrals and region quadrature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{
    self, endpoint_singular, fit_tail, integrate_union, integrate_with_singularities, pairwise_sum,
    Singular1d, TailBehavior, Tolerance,
};

/// Euclidean ball `B(x_B, R)` in dimension 1 or 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(1..=2).contains(&center.len()) {
            return Err(Error::InvalidArgument(format!(
                "dimension {} not supported",
                center.len()
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "radius {radius} must be positive"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite center".into()));
        }
        Ok(Ball { center, radius })
    }

    /// Ball on the real line `(c - R, c + R)`.
    pub fn interval(center: f64, radius: f64) -> Result<Self> {
        Ball::new(vec![center], radius)
    }

    pub fn centered(n: u32, radius: f64) -> Result<Self> {
        Ball::new(vec![0.0; n as usize], radius)
    }

    pub fn dim(&self) -> u32 {
        self.center.len() as u32
    }

    /// `|x_B|`.
    pub fn center_norm(&self) -> f64 {
        norm(&self.center)
    }

    pub fn measure(&self) -> f64 {
        measure(self)
    }

    /// `|B|^{1/n}`.
    pub fn side(&self) -> f64 {
        self.measure().powf(1.0 / self.dim() as f64)
    }

    /// Same center, radius multiplied by `k`.
    pub fn dilate(&self, k: f64) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius * k,
        }
    }

    /// Center and radius multiplied by `k`.
    pub fn scale(&self, k: f64) -> Ball {
        Ball {
            center: self.center.iter().map(|c| c * k).collect(),
            radius: self.radius * k,
        }
    }

    /// Closed: integrands with a pole on the sphere sample points that round
    /// onto it, and there the value from inside is the one that carries mass.
    pub fn contains(&self, x: &[f64]) -> bool {
        dist(x, &self.center) <= self.radius
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Lebesgue measure: `2R` on the line, `πR²` in the plane.
pub fn measure(b: &Ball) -> f64 {
    match b.dim() {
        1 => 2.0 * b.radius,
        _ => PI * b.radius * b.radius,
    }
}

/// Dilates `2^i B` of a base ball, with the split index `N₁` when the ball
/// does not contain the origin's neighbourhood (`|x_B| > R`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicFamily {
    pub base: Ball,
    pub split_index: Option<u32>,
}

impl DyadicFamily {
    pub fn new(base: Ball) -> Self {
        let split_index = dyadic_split(&base).ok();
        DyadicFamily { base, split_index }
    }

    pub fn member(&self, i: u32) -> Ball {
        self.base.dilate(2f64.powi(i as i32))
    }
}

/// The unique `N₁` with `2^{N₁} R ≤ |x_B| < 2^{N₁+1} R`.
pub fn dyadic_split(b: &Ball) -> Result<u32> {
    let d = b.center_norm();
    if d <= b.radius {
        return Err(Error::InvalidArgument(format!(
            "|x_B|={d} <= R={}: no split",
            b.radius
        )));
    }
    let mut n = (d / b.radius).log2().floor().max(0.0) as u32;
    // correct for rounding in the logarithm
    while n > 0 && 2f64.powi(n as i32) * b.radius > d {
        n -= 1;
    }
    while 2f64.powi(n as i32 + 1) * b.radius <= d {
        n += 1;
    }
    Ok(n)
}

/// Regime of a ball relative to the origin; `|x_B| = R` counts as centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Centered,
    Far,
}

/// Order of `∫_B |x|^γ` without constants: `R^{r_power} |x_B|^{center_power}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOrder {
    pub regime: Regime,
    pub r_power: f64,
    pub center_power: f64,
}

pub fn power_integral_order(b: &Ball, gamma: f64) -> Result<PowerOrder> {
    let n = b.dim() as f64;
    if gamma <= -n {
        return Err(Error::Divergent(format!(
            "|x|^{gamma} not integrable near 0 in dimension {n}"
        )));
    }
    Ok(if b.center_norm() <= b.radius {
        PowerOrder {
            regime: Regime::Centered,
            r_power: gamma + n,
            center_power: 0.0,
        }
    } else {
        PowerOrder {
            regime: Regime::Far,
            r_power: n,
            center_power: gamma,
        }
    })
}

/// Exact `∫_B |x|^γ dx`.
pub fn power_integral(b: &Ball, gamma: f64) -> Result<f64> {
    let n = b.dim();
    if gamma <= -(n as f64) {
        return Err(Error::Divergent(format!(
            "|x|^{gamma} not integrable near 0 in dimension {n}"
        )));
    }
    if n == 1 {
        let anti = |x: f64| x.signum() * x.abs().powf(gamma + 1.0) / (gamma + 1.0);
        let c = b.center[0];
        return Ok(anti(c + b.radius) - anti(c - b.radius));
    }
    let rho = b.center_norm();
    let r = b.radius;
    if rho == 0.0 {
        return Ok(2.0 * PI * r.powf(gamma + 2.0) / (gamma + 2.0));
    }
    // polar about the origin: s^{γ+1} times the angular measure of the circle
    // of radius s inside B
    let theta = |s: f64| -> f64 {
        if s <= 0.0 {
            return if rho < r { 2.0 * PI } else { 0.0 };
        }
        if rho < r && s <= r - rho {
            return 2.0 * PI;
        }
        // 2·acos((s² + ρ² - r²)/(2sρ)) written without cancellation for r ≪ ρ
        let num = ((r - s + rho) * (r + s - rho)).max(0.0);
        4.0 * (num / (4.0 * s * rho)).sqrt().min(1.0).asin()
    };
    let f = |s: f64| s.powf(gamma + 1.0) * theta(s);
    let lo = (rho - r).max(0.0);
    let hi = rho + r;
    let mut sing = vec![
        Singular1d {
            point: (rho - r).abs(),
            exponent: 0.5,
        },
        Singular1d {
            point: hi,
            exponent: 0.5,
        },
    ];
    if lo == 0.0 {
        sing.push(Singular1d {
            point: 0.0,
            exponent: gamma + 1.0,
        });
    }
    let tol = Tolerance {
        rel: 1e-10,
        ..Tolerance::default()
    };
    Ok(integrate_with_singularities(&f, lo, hi, &sing, &tol)?.value)
}

/// An algebraic singularity `|x - point|^exponent` of an integrand on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub point: Vec<f64>,
    pub exponent: f64,
}

/// Quadrature controls shared by every numeric routine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default = "default_rel")]
    pub rel_tol: f64,
    #[serde(default = "default_subdiv")]
    pub max_subdivisions: usize,
    #[serde(default)]
    pub singularities: Vec<Singularity>,
}

fn default_rel() -> f64 {
    1e-8
}
fn default_subdiv() -> usize {
    2000
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: default_rel(),
            max_subdivisions: default_subdiv(),
            singularities: vec![],
        }
    }
}

impl QuadratureSpec {
    pub fn with_singularity(mut self, point: Vec<f64>, exponent: f64) -> Self {
        self.singularities.push(Singularity { point, exponent });
        self
    }

    pub fn with_singularities(mut self, s: impl IntoIterator<Item = Singularity>) -> Self {
        self.singularities.extend(s);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {} must be positive",
                self.rel_tol
            )));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: 1e-300,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Integration domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball(Ball),
    /// `{ inner ≤ |x - center| < outer }`.
    Annulus {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
    },
    /// `{ R ≤ |x - x_B| < M }`, integrated as dyadic annuli `2^{i+1}B ∖ 2^iB`.
    Exterior {
        ball: Ball,
        truncation: f64,
    },
}

/// Truncated exterior integral with its dyadic shell contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorTail {
    pub shells: Vec<f64>,
    pub behavior: TailBehavior,
    /// Sum over all shells up to the truncation.
    pub truncated: f64,
}

impl ExteriorTail {
    /// Truncated value plus the geometric tail extrapolation when the shells
    /// decay; `None` when the integral grows with the truncation.
    pub fn extrapolated(&self) -> Option<f64> {
        match self.behavior {
            TailBehavior::Convergent { tail, .. } => Some(self.truncated + tail),
            TailBehavior::Indeterminate => Some(self.truncated),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub tail: Option<ExteriorTail>,
}

/// Integrate `f` over a region. Singularities are taken from `spec`.
pub fn integrate(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    match region {
        Region::Ball(b) => ring(f, &b.center, 0.0, b.radius, spec).map(plain),
        Region::Annulus {
            center,
            inner,
            outer,
        } => {
            if !(*inner >= 0.0 && outer >= inner) {
                return Err(Error::InvalidArgument(format!(
                    "bad annulus {inner}..{outer}"
                )));
            }
            ring(f, center, *inner, *outer, spec).map(plain)
        }
        Region::Exterior { ball, truncation } => {
            let r = ball.radius;
            if !(*truncation > r) {
                return Err(Error::InvalidArgument(format!(
                    "truncation {truncation} must exceed R={r}"
                )));
            }
            let mut shells = Vec::new();
            let mut error = 0.0;
            let mut inner = r;
            let mut partial = false;
            while inner < *truncation {
                let outer = (2.0 * inner).min(*truncation);
                partial = outer < 2.0 * inner;
                let est = ring(f, &ball.center, inner, outer, spec)?;
                shells.push(est.value);
                error += est.error;
                inner = outer;
            }
            let truncated = pairwise_sum(&shells);
            // a short final shell would distort the decay fit
            let full = if partial {
                &shells[..shells.len() - 1]
            } else {
                &shells[..]
            };
            let behavior = fit_tail(full);
            let tail = ExteriorTail {
                shells,
                behavior,
                truncated,
            };
            let value = tail.extrapolated().unwrap_or(truncated);
            Ok(Integral {
                value,
                error,
                tail: Some(tail),
            })
        }
    }
}

fn plain(e: quadrature::Estimate) -> Integral {
    Integral {
        value: e.value,
        error: e.error,
        tail: None,
    }
}

/// `∫_{inner ≤ |x-c| < outer} f`.
fn ring(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    c: &[f64],
    inner: f64,
    outer: f64,
    spec: &QuadratureSpec,
) -> Result<quadrature::Estimate> {
    let tol = spec.tolerance();
    match c.len() {
        1 => {
            let c0 = c[0];
            let sing: Vec<Singular1d> = spec
                .singularities
                .iter()
                .map(|s| Singular1d {
                    point: s.point[0],
                    exponent: s.exponent,
                })
                .collect();
            let g = |x: f64| f(&[x]);
            integrate_union(
                &g,
                &[(c0 - outer, c0 - inner), (c0 + inner, c0 + outer)],
                &sing,
                &tol,
            )
        }
        2 => polar_ring(f, c, inner, outer, spec),
        n => Err(Error::Unsupported(format!("dimension {n}"))),
    }
}

/// Parameter interval of the ray `pole + t·u`, `t ≥ 0`, inside the circle
/// `|x - c| < rad`.
fn ray_disc(pole: [f64; 2], c: &[f64], u: [f64; 2], rad: f64) -> Option<(f64, f64)> {
    let d = [pole[0] - c[0], pole[1] - c[1]];
    let ud = u[0] * d[0] + u[1] * d[1];
    let disc = ud * ud - (d[0] * d[0] + d[1] * d[1]) + rad * rad;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let (t0, t1) = (-ud - s, -ud + s);
    if t1 <= 0.0 {
        return None;
    }
    Some((t0.max(0.0), t1))
}

/// Polar quadrature about a pole: the first annotated singularity, else the
/// ring center. The radial integrand carries the Jacobian `t`.
fn polar_ring(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    c: &[f64],
    inner: f64,
    outer: f64,
    spec: &QuadratureSpec,
) -> Result<quadrature::Estimate> {
    let tol = spec.tolerance();
    let inner_tol = Tolerance {
        rel: tol.rel * 0.1,
        ..tol
    };
    let (pole, pole_exp) = match spec.singularities.first() {
        Some(s) => ([s.point[0], s.point[1]], Some(s.exponent + 1.0)),
        None => ([c[0], c[1]], None),
    };
    if let Some(e) = pole_exp {
        let pd = dist(&pole, c);
        if e <= -1.0 && pd >= inner && pd < outer {
            return Err(Error::LocalIntegrability(format!(
                "singular exponent {} at the pole",
                e - 1.0
            )));
        }
    }
    let failure = std::cell::Cell::new(None::<Error>);
    let angular = |phi: f64| -> f64 {
        let u = [phi.cos(), phi.sin()];
        let Some((a, b)) = ray_disc(pole, c, u, outer) else {
            return 0.0;
        };
        let mut segs = vec![(a, b)];
        if inner > 0.0 {
            if let Some((ia, ib)) = ray_disc(pole, c, u, inner) {
                segs.clear();
                if ia > a {
                    segs.push((a, ia.min(b)));
                }
                if ib < b {
                    segs.push((ib.max(a), b));
                }
            }
        }
        let radial = |t: f64| t * f(&[pole[0] + t * u[0], pole[1] + t * u[1]]);
        let mut total = 0.0;
        for (s0, s1) in segs {
            if s1 <= s0 {
                continue;
            }
            let ea = if s0 == 0.0 { pole_exp } else { None };
            match endpoint_singular(&radial, s0, s1, ea, None, &inner_tol) {
                Ok(e) => total += e.value,
                Err(Error::ToleranceNotMet { estimate, .. }) => total += estimate,
                Err(e) => {
                    failure.set(Some(e));
                    return 0.0;
                }
            }
        }
        total
    };
    let est = quadrature::adaptive(&angular, 0.0, 2.0 * PI, &tol)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn measure_examples() {
        assert_eq!(Ball::interval(0.0, 2.0).unwrap().measure(), 4.0);
        assert_relative_eq!(Ball::centered(2, 1.0).unwrap().measure(), PI);
        assert_eq!(Ball::interval(3.0, 0.5).unwrap().measure(), 1.0);
    }

    #[test]
    fn power_integral_examples() {
        assert_relative_eq!(
            power_integral(&Ball::interval(0.0, 1.0).unwrap(), -0.5).unwrap(),
            4.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            power_integral(&Ball::interval(10.0, 1.0).unwrap(), 1.0).unwrap(),
            20.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            power_integral(&Ball::interval(0.0, 3.5).unwrap(), 0.0).unwrap(),
            7.0,
            max_relative = 1e-14
        );
        assert!(power_integral(&Ball::interval(0.0, 1.0).unwrap(), -1.0).is_err());
    }

    #[test]
    fn power_integral_plane() {
        // centered disc, and an off-center disc against brute-force polar quadrature
        let b = Ball::centered(2, 2.0).unwrap();
        assert_relative_eq!(
            power_integral(&b, 0.0).unwrap(),
            b.measure(),
            max_relative = 1e-12
        );
        let off = Ball::new(vec![3.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(power_integral(&off, 0.0).unwrap(), PI, max_relative = 1e-9);
        // x-linear moment: ∫_B |x|² over disc at (3,0) radius 1 is π(9 + 1/2)
        assert_relative_eq!(
            power_integral(&off, 2.0).unwrap(),
            PI * 9.5,
            max_relative = 1e-9
        );
    }

    #[test]
    fn order_regimes() {
        let o = power_integral_order(&Ball::interval(0.0, 3.0).unwrap(), 0.7).unwrap();
        assert_eq!(
            o,
            PowerOrder {
                regime: Regime::Centered,
                r_power: 1.7,
                center_power: 0.0
            }
        );
        let o = power_integral_order(&Ball::interval(10.0, 1.0).unwrap(), 0.7).unwrap();
        assert_eq!(
            o,
            PowerOrder {
                regime: Regime::Far,
                r_power: 1.0,
                center_power: 0.7
            }
        );
        let o = power_integral_order(&Ball::interval(1.0, 1.0).unwrap(), 0.7).unwrap();
        assert_eq!(o.regime, Regime::Centered);
    }

    #[test]
    fn split_examples() {
        assert_eq!(
            dyadic_split(&Ball::interval(10.0, 1.0).unwrap()).unwrap(),
            3
        );
        assert_eq!(dyadic_split(&Ball::interval(1.5, 1.0).unwrap()).unwrap(), 0);
        assert_eq!(
            dyadic_split(&Ball::interval(100.0, 0.1).unwrap()).unwrap(),
            9
        );
        assert!(dyadic_split(&Ball::interval(1.0, 1.0).unwrap()).is_err());
        let fam = DyadicFamily::new(Ball::interval(10.0, 1.0).unwrap());
        assert_eq!(fam.split_index, Some(3));
        assert_eq!(fam.member(3).radius, 8.0);
    }

    #[test]
    fn integrate_examples() {
        let spec = QuadratureSpec::default().with_singularity(vec![0.0], -0.5);
        let b = Region::Ball(Ball::interval(0.0, 1.0).unwrap());
        let v = integrate(&|x: &[f64]| x[0].abs().powf(-0.5), &b, &spec).unwrap();
        assert!((v.value - 4.0).abs() <= 4e-8);

        let m = 1024.0;
        let ext = Region::Exterior {
            ball: Ball::interval(0.0, 1.0).unwrap(),
            truncation: m,
        };
        let v = integrate(&|x: &[f64]| x[0].powi(-2), &ext, &QuadratureSpec::default()).unwrap();
        let tail = v.tail.unwrap();
        assert_relative_eq!(tail.truncated, 2.0 * (1.0 - 1.0 / m), max_relative = 1e-9);
        assert_eq!(tail.shells.len(), 10);
        // extrapolation recovers the full integral 2
        assert_relative_eq!(v.value, 2.0, max_relative = 1e-9);

        let zero = integrate(&|_: &[f64]| 0.0, &b, &QuadratureSpec::default()).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn plane_regions() {
        let spec = QuadratureSpec::default();
        let disc = Region::Ball(Ball::new(vec![0.5, -1.0], 2.0).unwrap());
        let v = integrate(&|_: &[f64]| 1.0, &disc, &spec).unwrap();
        assert_relative_eq!(v.value, 4.0 * PI, max_relative = 1e-8);
        // off-center pole: ∫_B |x|^{-1} over the unit disc centered at (0.5, 0)
        let spec = QuadratureSpec::default().with_singularity(vec![0.0, 0.0], -1.0);
        let b = Ball::new(vec![0.5, 0.0], 1.0).unwrap();
        let v = integrate(&|x: &[f64]| 1.0 / norm(x), &Region::Ball(b.clone()), &spec).unwrap();
        assert_relative_eq!(
            v.value,
            power_integral(&b, -1.0).unwrap(),
            max_relative = 1e-7
        );
        let ann = Region::Annulus {
            center: vec![0.0, 0.0],
            inner: 1.0,
            outer: 2.0,
        };
        let v = integrate(&|_: &[f64]| 1.0, &ann, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(v.value, 3.0 * PI, max_relative = 1e-8);
    }
}
