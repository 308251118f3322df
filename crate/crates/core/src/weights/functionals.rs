//! Numeric evaluation of the class functionals on a single ball.
//!
//! With `q = r'`, `γ = n - α̃ + δ` and `|B|` the Lebesgue measure:
//!
//! * full:   `|B|^{(δ-δ̃)/n} ‖v / (|B|^{1/n} + |x_B - ·|)^γ‖_q · |B|/w(B)`
//! * local:  `|B|^{(α̃-δ̃)/n - 1/r} (⨍_B v^q)^{1/q} · |B|/w(B)`
//! * global: `|B|^{(δ-δ̃)/n} (∫_{B^c} v^q |x_B - ·|^{-qγ})^{1/q} · |B|/w(B)`
//!
//! For `q = ∞` the norms become essential suprema. The older class replaces
//! `w(B)/|B|` by `inf_B w`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{integrate, Ball, QuadratureSpec, Region};
use crate::params::{ClassParams, ClassParamsF64, Setting};
use crate::quadrature::{linear_fit, TailBehavior, TAIL_SLOPE_TOL};

use super::weight::{Weight, WeightPair};

/// Truncated exterior integrals extend to `2^DEFAULT_DOUBLINGS · max(R, |x_B|)`.
pub const DEFAULT_DOUBLINGS: i32 = 30;

const SUP_SAMPLES_PER_SHELL: usize = 48;
const SUP_ANGLES: usize = 64;

/// Value of a functional that may grow with the truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FunctionalValue {
    Finite {
        value: f64,
    },
    /// The truncated value keeps growing with `M`; `tail` records the law.
    Divergent {
        truncated: f64,
        tail: TailBehavior,
    },
    /// Infinite for a structural reason (vanishing infimum of `w`).
    Infinite,
}

impl FunctionalValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            FunctionalValue::Finite { value } => Some(*value),
            _ => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, FunctionalValue::Divergent { .. })
    }

    /// Finite value, or the truncated value for a divergent one.
    pub fn truncated(&self) -> f64 {
        match self {
            FunctionalValue::Finite { value } => *value,
            FunctionalValue::Divergent { truncated, .. } => *truncated,
            FunctionalValue::Infinite => f64::INFINITY,
        }
    }

    fn scale(self, k: f64) -> Self {
        match self {
            FunctionalValue::Finite { value } => FunctionalValue::Finite { value: value * k },
            FunctionalValue::Divergent { truncated, tail } => FunctionalValue::Divergent {
                truncated: truncated * k,
                tail,
            },
            FunctionalValue::Infinite => FunctionalValue::Infinite,
        }
    }
}

pub fn default_truncation(b: &Ball) -> f64 {
    b.radius.max(b.center_norm()) * 2f64.powi(DEFAULT_DOUBLINGS)
}

/// Evaluator of the functionals of one pair under one parameter set.
#[derive(Debug, Clone)]
pub struct Functionals<'a> {
    pair: &'a WeightPair,
    params: ClassParamsF64,
    spec: QuadratureSpec,
}

impl<'a> Functionals<'a> {
    pub fn new(pair: &'a WeightPair, params: &ClassParams, spec: QuadratureSpec) -> Result<Self> {
        pair.validate(params.n)?;
        spec.validate()?;
        Ok(Functionals {
            pair,
            params: params.to_f64(),
            spec,
        })
    }

    pub fn from_setting(pair: &'a WeightPair, s: &Setting) -> Result<Self> {
        Self::new(pair, &s.class_params(), QuadratureSpec::default())
    }

    pub fn params(&self) -> &ClassParamsF64 {
        &self.params
    }

    fn check_dim(&self, b: &Ball) -> Result<()> {
        if b.dim() != self.params.n {
            return Err(Error::InvalidArgument(format!(
                "ball in dimension {} for n={}",
                b.dim(),
                self.params.n
            )));
        }
        Ok(())
    }

    /// `|B| / w(B)`.
    fn inverse_density(&self, b: &Ball) -> Result<f64> {
        let mass = self.pair.w.mass(b, &self.spec)?;
        if !(mass > 0.0) {
            return Err(Error::InvalidArgument(format!("w(B) = {mass} on {b:?}")));
        }
        Ok(b.measure() / mass)
    }

    fn v(&self) -> &Weight {
        &self.pair.v
    }

    /// Local functional on `B`.
    pub fn local(&self, b: &Ball) -> Result<f64> {
        self.check_dim(b)?;
        if self.v().is_zero() {
            return Ok(0.0);
        }
        let p = &self.params;
        let n = p.n as f64;
        let lead = b
            .measure()
            .powf((p.alpha_tilde - p.delta_tilde - p.n_over_r()) / n);
        let mean = if p.q.is_infinite() {
            let (sup, _) = self.v().range_on(b);
            if !sup.is_finite() {
                return Err(Error::LocalIntegrability(format!(
                    "{} is unbounded on {b:?}",
                    self.v()
                )));
            }
            sup
        } else {
            (self.v().integral(b, p.q, &self.spec)? / b.measure()).powf(1.0 / p.q)
        };
        Ok(lead * mean * self.inverse_density(b)?)
    }

    /// Global functional on `B`, integrating the exterior up to `|x_B - y| < m`.
    pub fn global(&self, b: &Ball, m: f64) -> Result<FunctionalValue> {
        self.check_dim(b)?;
        if self.v().is_zero() {
            return Ok(FunctionalValue::Finite { value: 0.0 });
        }
        let p = &self.params;
        let n = p.n as f64;
        let gamma = p.gamma();
        let lead = b.measure().powf((p.delta - p.delta_tilde) / n) * self.inverse_density(b)?;
        let xb = b.center.clone();
        let norm = if p.q.is_infinite() {
            let kernel = move |_: &[f64], d: f64| d.powf(-gamma);
            self.exterior_sup(b, m, &kernel)?
        } else {
            let q = p.q;
            let v = self.v();
            let f = move |y: &[f64]| {
                let d = crate::geometry::dist(y, &xb);
                v.eval(y).powf(q) * d.powf(-q * gamma)
            };
            self.exterior_integral(b, m, &f)?.map_root(q)
        };
        Ok(norm.scale(lead))
    }

    /// Full functional on `B` (both parts at once), truncated at `m`.
    pub fn full(&self, b: &Ball, m: f64) -> Result<FunctionalValue> {
        self.check_dim(b)?;
        if self.v().is_zero() {
            return Ok(FunctionalValue::Finite { value: 0.0 });
        }
        let p = &self.params;
        let n = p.n as f64;
        let gamma = p.gamma();
        let side = b.side();
        let lead = b.measure().powf((p.delta - p.delta_tilde) / n) * self.inverse_density(b)?;
        let xb = b.center.clone();
        let norm = if p.q.is_infinite() {
            let kernel = move |_: &[f64], d: f64| (side + d).powf(-gamma);
            let inside = self.ball_sup(b, &kernel)?;
            match self.exterior_sup(b, m, &kernel)? {
                FunctionalValue::Finite { value } => FunctionalValue::Finite {
                    value: value.max(inside),
                },
                other => other,
            }
        } else {
            let q = p.q;
            let v = self.v();
            let f = move |y: &[f64]| {
                let d = crate::geometry::dist(y, &xb);
                v.eval(y).powf(q) * (side + d).powf(-q * gamma)
            };
            let spec = self
                .spec
                .clone()
                .with_singularities(v.singularities(p.n, q));
            let inside = integrate(&f, &Region::Ball(b.clone()), &spec)?.value;
            match self.exterior_integral(b, m, &f)? {
                RawIntegral::Finite(x) => RawIntegral::Finite(x + inside),
                RawIntegral::Divergent { truncated, tail } => RawIntegral::Divergent {
                    truncated: truncated + inside,
                    tail,
                },
            }
            .map_root(q)
        };
        Ok(norm.scale(lead))
    }

    /// Older-class functional: `w(B)/|B|` replaced by `inf_B w`.
    pub fn old_class(&self, b: &Ball, m: f64) -> Result<FunctionalValue> {
        let full = self.full(b, m)?;
        let (_, inf) = self.pair.w.range_on(b);
        if !(inf > 0.0) {
            return Ok(FunctionalValue::Infinite);
        }
        let density = 1.0 / self.inverse_density(b)?;
        Ok(full.scale(density / inf))
    }

    fn exterior_integral(
        &self,
        b: &Ball,
        m: f64,
        f: &(dyn Fn(&[f64]) -> f64 + Sync),
    ) -> Result<RawIntegral> {
        let spec = self
            .spec
            .clone()
            .with_singularities(self.v().singularities(self.params.n, self.params.q));
        let res = integrate(
            f,
            &Region::Exterior {
                ball: b.clone(),
                truncation: m,
            },
            &spec,
        )?;
        let tail = res.tail.expect("exterior integrals carry their shells");
        Ok(if tail.behavior.is_divergent() {
            RawIntegral::Divergent {
                truncated: tail.truncated,
                tail: tail.behavior,
            }
        } else {
            RawIntegral::Finite(res.value)
        })
    }

    /// `sup_{y ∈ B} v(y) k(y, |x_B - y|)` by sampling plus the radial critical points.
    fn ball_sup(&self, b: &Ball, k: &dyn Fn(&[f64], f64) -> f64) -> Result<f64> {
        let mut best = 0.0f64;
        let pts = sample_annulus(b, 0.0, b.radius, self.critical_points(b));
        for y in pts {
            let val = self.v().eval(&y);
            if val.is_infinite() {
                return Err(Error::LocalIntegrability(format!(
                    "{} is unbounded on {b:?}",
                    self.v()
                )));
            }
            best = best.max(val * k(&y, crate::geometry::dist(&y, &b.center)));
        }
        Ok(best)
    }

    /// Shell-wise suprema of `v · k` outside `B`; growth of the shell maxima
    /// signals divergence.
    fn exterior_sup(
        &self,
        b: &Ball,
        m: f64,
        k: &dyn Fn(&[f64], f64) -> f64,
    ) -> Result<FunctionalValue> {
        let mut shell_max = Vec::new();
        let mut inner = b.radius;
        while inner < m {
            let outer = (2.0 * inner).min(m);
            let mut best = 0.0f64;
            for y in sample_annulus(b, inner, outer, self.critical_points(b)) {
                let val = self.v().eval(&y);
                if val.is_infinite() {
                    return Err(Error::LocalIntegrability(format!(
                        "{} is unbounded near {y:?}",
                        self.v()
                    )));
                }
                best = best.max(val * k(&y, crate::geometry::dist(&y, &b.center)));
            }
            shell_max.push(best);
            inner = outer;
        }
        let overall = shell_max.iter().cloned().fold(0.0, f64::max);
        let k = shell_max.len().min(6);
        let last = &shell_max[shell_max.len() - k..];
        if k >= 3 && last.iter().all(|x| *x > 0.0) {
            let xs: Vec<f64> = (0..k).map(|i| i as f64).collect();
            let ys: Vec<f64> = last.iter().map(|x| x.log2()).collect();
            let (slope, _, _) = linear_fit(&xs, &ys);
            if slope > TAIL_SLOPE_TOL {
                return Ok(FunctionalValue::Divergent {
                    truncated: overall,
                    tail: TailBehavior::Power { order: slope },
                });
            }
        }
        Ok(FunctionalValue::Finite { value: overall })
    }

    /// Points where a radial profile changes monotonicity: the origin and the
    /// break sphere, along the axis through `x_B`.
    fn critical_points(&self, b: &Ball) -> Vec<Vec<f64>> {
        let n = self.params.n as usize;
        let mut out = vec![vec![0.0; n]];
        if let Some(prof) = self.v().profile() {
            let rho = b.center_norm();
            let u: Vec<f64> = if rho > 0.0 {
                b.center.iter().map(|c| c / rho).collect()
            } else {
                (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
            };
            for s in [prof.brk, -prof.brk] {
                out.push(u.iter().map(|c| c * s).collect());
            }
        }
        for s in &self.v().singularities(self.params.n, 1.0) {
            out.push(s.point.clone());
        }
        out
    }
}

enum RawIntegral {
    Finite(f64),
    Divergent { truncated: f64, tail: TailBehavior },
}

impl RawIntegral {
    fn map_root(self, q: f64) -> FunctionalValue {
        match self {
            RawIntegral::Finite(x) => FunctionalValue::Finite {
                value: x.max(0.0).powf(1.0 / q),
            },
            RawIntegral::Divergent { truncated, tail } => FunctionalValue::Divergent {
                truncated: truncated.max(0.0).powf(1.0 / q),
                tail,
            },
        }
    }
}

/// Sample points of `{inner ≤ |y - x_B| < outer}` (log-spaced in the radial
/// variable) together with those `extra` points that fall inside.
fn sample_annulus(b: &Ball, inner: f64, outer: f64, extra: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let c = &b.center;
    let lo = if inner > 0.0 { inner } else { outer * 1e-9 };
    let k = SUP_SAMPLES_PER_SHELL;
    let radii: Vec<f64> = (0..k)
        .map(|i| lo * (outer / lo).powf((i as f64 + 0.5) / k as f64))
        .collect();
    let mut pts = Vec::new();
    match c.len() {
        1 => {
            for s in &radii {
                pts.push(vec![c[0] + s]);
                pts.push(vec![c[0] - s]);
            }
        }
        _ => {
            for s in &radii {
                for a in 0..SUP_ANGLES {
                    let t = 2.0 * std::f64::consts::PI * a as f64 / SUP_ANGLES as f64;
                    pts.push(vec![c[0] + s * t.cos(), c[1] + s * t.sin()]);
                }
            }
        }
    }
    for e in extra {
        let d = crate::geometry::dist(&e, c);
        if d >= inner && d < outer {
            pts.push(e);
        }
    }
    pts
}

/// Global functional on `B` truncated at `M = 2^j R`, `j = 1..=doublings`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub j: u32,
    pub truncation: f64,
    pub truncated: f64,
    /// Truncated value plus the fitted geometric tail; `None` while the
    /// shells do not decay.
    pub extrapolated: Option<f64>,
}

impl<'a> Functionals<'a> {
    /// The whole truncation sequence from one dyadic decomposition of `B^c`.
    pub fn global_scan(&self, b: &Ball, doublings: u32) -> Result<Vec<ScanPoint>> {
        self.check_dim(b)?;
        let ms: Vec<f64> = (1..=doublings)
            .map(|j| b.radius * 2f64.powi(j as i32))
            .collect();
        if self.v().is_zero() {
            return Ok(ms
                .iter()
                .enumerate()
                .map(|(i, &m)| ScanPoint {
                    j: i as u32 + 1,
                    truncation: m,
                    truncated: 0.0,
                    extrapolated: Some(0.0),
                })
                .collect());
        }
        let p = &self.params;
        if p.q.is_infinite() {
            return ms
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let g = self.global(b, m)?;
                    Ok(ScanPoint {
                        j: i as u32 + 1,
                        truncation: m,
                        truncated: g.truncated(),
                        extrapolated: g.finite(),
                    })
                })
                .collect();
        }
        let n = p.n as f64;
        let (q, gamma) = (p.q, p.gamma());
        let lead = b.measure().powf((p.delta - p.delta_tilde) / n) * self.inverse_density(b)?;
        let xb = b.center.clone();
        let v = self.v();
        let f = move |y: &[f64]| v.eval(y).powf(q) * crate::geometry::dist(y, &xb).powf(-q * gamma);
        let spec = self
            .spec
            .clone()
            .with_singularities(v.singularities(p.n, q));
        let whole = integrate(
            &f,
            &Region::Exterior {
                ball: b.clone(),
                truncation: ms[ms.len() - 1],
            },
            &spec,
        )?;
        let shells = whole
            .tail
            .expect("exterior integrals carry their shells")
            .shells;
        let mut out = Vec::with_capacity(ms.len());
        let mut acc = Vec::new();
        for (i, &m) in ms.iter().enumerate() {
            acc.push(shells[i]);
            let truncated = crate::quadrature::pairwise_sum(&acc);
            let extrapolated = match crate::quadrature::fit_tail(&acc) {
                TailBehavior::Convergent { tail, .. } => Some(truncated + tail),
                _ => None,
            };
            let root = |x: f64| lead * x.max(0.0).powf(1.0 / q);
            out.push(ScanPoint {
                j: i as u32 + 1,
                truncation: m,
                truncated: root(truncated),
                extrapolated: extrapolated.map(root),
            });
        }
        Ok(out)
    }
}

/// Full functional (the defining condition) on `B`.
pub fn h_functional(p: &WeightPair, s: &Setting, b: &Ball, m: f64) -> Result<FunctionalValue> {
    Functionals::from_setting(p, s)?.full(b, m)
}

pub fn local_functional(p: &WeightPair, s: &Setting, b: &Ball) -> Result<f64> {
    Functionals::from_setting(p, s)?.local(b)
}

pub fn global_functional(p: &WeightPair, s: &Setting, b: &Ball, m: f64) -> Result<FunctionalValue> {
    Functionals::from_setting(p, s)?.global(b, m)
}

pub fn old_class_functional(
    p: &WeightPair,
    s: &Setting,
    b: &Ball,
    m: f64,
) -> Result<FunctionalValue> {
    Functionals::from_setting(p, s)?.old_class(b, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{q, Exponent};
    use approx::assert_relative_eq;

    fn setting(r: Exponent, dt: crate::params::Q) -> Setting {
        Setting::exact(1, q(1, 2), q(3, 10), 1, q(1, 1), r, dt).unwrap()
    }

    fn unit() -> Ball {
        Ball::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn scan_matches_single_truncations() {
        let s = setting(Exponent::Finite(q(4, 1)), q(1, 5));
        let p = WeightPair::powers(q(0, 1), q(-7, 20));
        let f = Functionals::from_setting(&p, &s).unwrap();
        let scan = f.global_scan(&unit(), 12).unwrap();
        assert_eq!(scan.len(), 12);
        let direct = f.global(&unit(), 2f64.powi(12)).unwrap().finite().unwrap();
        assert_relative_eq!(scan[11].extrapolated.unwrap(), direct, max_relative = 1e-9);
        assert!(scan.windows(2).all(|w| w[1].truncated >= w[0].truncated));
    }

    #[test]
    fn zero_v_gives_zero() {
        let s = setting(Exponent::Finite(q(4, 1)), q(1, 5));
        let p = WeightPair::new(Weight::constant(), Weight::Zero);
        assert_eq!(
            h_functional(&p, &s, &unit(), 1e6).unwrap(),
            FunctionalValue::Finite { value: 0.0 }
        );
        assert_eq!(local_functional(&p, &s, &unit()).unwrap(), 0.0);
    }

    #[test]
    fn borderline_global_diverges_logarithmically() {
        let s = setting(Exponent::Finite(q(4, 1)), q(3, 10));
        let p = WeightPair::powers(q(0, 1), q(-1, 4));
        let g = global_functional(&p, &s, &unit(), default_truncation(&unit())).unwrap();
        assert!(
            matches!(
                g,
                FunctionalValue::Divergent {
                    tail: TailBehavior::Logarithmic { .. },
                    ..
                }
            ),
            "{g:?}"
        );
        assert!(local_functional(&p, &s, &unit()).unwrap().is_finite());
        let h = h_functional(&p, &s, &unit(), 1e9).unwrap();
        assert!(h.is_divergent(), "{h:?}");
    }

    #[test]
    fn local_matches_closed_form() {
        // v = |x|^{-0.35}, q = 4/3, B = B(0,1): ⨍ v^q = 1/(1 - 7/15)
        let s = setting(Exponent::Finite(q(4, 1)), q(1, 5));
        let p = WeightPair::powers(q(0, 1), q(-7, 20));
        let mean: f64 = 1.0 / (1.0 - 7.0 / 15.0);
        let expect = 2f64.powf(0.35) * mean.powf(0.75);
        assert_relative_eq!(
            local_functional(&p, &s, &unit()).unwrap(),
            expect,
            max_relative = 1e-10
        );
    }

    #[test]
    fn global_matches_closed_form() {
        // centered: ∫_{|y|>1} |y|^{-7/15 - 2/3} = 2/(2/15), exponent q·γ = 2/3
        let s = setting(Exponent::Finite(q(4, 1)), q(1, 5));
        let p = WeightPair::powers(q(0, 1), q(-7, 20));
        let g = global_functional(&p, &s, &unit(), default_truncation(&unit())).unwrap();
        let expect = 2f64.powf(0.1) * 15f64.powf(0.75);
        assert_relative_eq!(g.finite().unwrap(), expect, max_relative = 1e-3);
    }

    #[test]
    fn constant_w_old_class_equals_full() {
        let s = setting(Exponent::Finite(q(4, 1)), q(1, 5));
        let p = WeightPair::powers(q(0, 1), q(-7, 20));
        let b = Ball::interval(3.0, 0.5).unwrap();
        let m = default_truncation(&b);
        let h = h_functional(&p, &s, &b, m).unwrap().finite().unwrap();
        let o = old_class_functional(&p, &s, &b, m)
            .unwrap()
            .finite()
            .unwrap();
        assert_relative_eq!(h, o, max_relative = 1e-12);
    }

    #[test]
    fn essential_sup_forms() {
        // r = 1: w = |x|^{1/2}, v = |x|^{1/5} member pair; all three finite
        let s = setting(Exponent::Finite(q(1, 1)), q(-1, 2));
        let p = WeightPair::powers(q(1, 2), q(1, 5));
        for b in [unit(), Ball::interval(10.0, 0.1).unwrap()] {
            let m = default_truncation(&b);
            assert!(local_functional(&p, &s, &b).unwrap().is_finite());
            assert!(global_functional(&p, &s, &b, m).unwrap().finite().is_some());
            assert!(h_functional(&p, &s, &b, m).unwrap().finite().is_some());
        }
        // an unbounded v fails local integrability in the sup form
        let bad = WeightPair::powers(q(1, 2), q(-1, 5));
        assert!(matches!(
            local_functional(&bad, &s, &unit()),
            Err(Error::LocalIntegrability(_))
        ));
    }
}
