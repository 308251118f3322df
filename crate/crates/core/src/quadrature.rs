//! One-dimensional adaptive Gauss–Kronrod quadrature.
//!
//! Algebraic endpoint singularities `|x - a|^e` (with `e > -1`) are removed
//! by the substitution `x = a + (b - a) u^{1/(1+e)}`, after which the
//! integrand is bounded and the 7/15-point rule converges quickly.
//! Subdivision is deterministic: the interval with the largest error
//! estimate is bisected, ties broken by position.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances and limits for [`adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-8,
            abs: 1e-300,
            max_subdivisions: 2000,
        }
    }
}

/// Single 15-point Kronrod panel with the embedded 7-point Gauss estimate.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut absk = kron.abs();
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        fv1[j] = f1;
        fv2[j] = f2;
        kron += WGK[j] * (f1 + f2);
        absk += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = h.abs();
    let value = kron * (0.5 * (b - a));
    let resasc = asc * h;
    let resabs = absk * h;
    let mut err = ((kron - gauss) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive bisection of `[a, b]` until the summed error estimate meets the
/// tolerance. Returns [`Error::ToleranceNotMet`] with the best estimate when
/// the subdivision budget is exhausted.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: &Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "infinite interval [{a}, {b}]"
        )));
    }
    let (value, error) = gk15(f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut subdivisions = 0;
    loop {
        if !total.is_finite() {
            return Err(Error::Divergent(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            break;
        }
        if subdivisions >= tol.max_subdivisions {
            let (value, error) = resum(&heap);
            return Err(Error::ToleranceNotMet {
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval below machine resolution; keep it and stop refining
            heap.push(worst);
            let (value, error) = resum(&heap);
            if error <= 1e3 * tol.abs.max(tol.rel * value.abs()) {
                return Ok(Estimate {
                    value,
                    error,
                    evaluations,
                });
            }
            return Err(Error::ToleranceNotMet {
                estimate: value,
                error,
            });
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        evaluations += 30;
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        if subdivisions % 64 == 0 {
            // guard against drift in the running sums
            let (v, e) = resum(&heap);
            total = v;
            total_err = e;
        }
    }
    let (value, error) = resum(&heap);
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Deterministic summation in interval order.
fn resum(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = pairwise_sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
    let error = panels.iter().map(|p| p.error).sum();
    (value, error)
}

/// Pairwise summation, independent of any thread schedule.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// An algebraic singularity `|x - point|^exponent` of a 1-D integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular1d {
    pub point: f64,
    pub exponent: f64,
}

/// Integrate over `[a, b]` where the integrand may behave like
/// `|x - a|^ea` and `|x - b|^eb` at the endpoints.
pub fn endpoint_singular<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    ea: Option<f64>,
    eb: Option<f64>,
    tol: &Tolerance,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    for e in [ea, eb].into_iter().flatten() {
        if e <= -1.0 {
            return Err(Error::LocalIntegrability(format!(
                "endpoint exponent {e} <= -1"
            )));
        }
    }
    match (ea, eb) {
        (None, None) => adaptive(f, a, b, tol),
        (Some(e), None) => from_left(f, a, b, e, tol),
        (None, Some(e)) => from_left(&|x: f64| f(x), b, a, e, tol).map(negate),
        (Some(e1), Some(e2)) => {
            let mid = 0.5 * (a + b);
            let l = from_left(f, a, mid, e1, tol)?;
            let r = from_left(&|x: f64| f(x), b, mid, e2, tol).map(negate)?;
            Ok(Estimate {
                value: l.value + r.value,
                error: l.error + r.error,
                evaluations: l.evaluations + r.evaluations,
            })
        }
    }
}

fn negate(e: Estimate) -> Estimate {
    Estimate {
        value: -e.value,
        ..e
    }
}

/// `∫_a^b f` with `f ~ |x-a|^e` near `a`; `b` may lie on either side of `a`.
fn from_left<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    e: f64,
    tol: &Tolerance,
) -> Result<Estimate> {
    let p = 1.0 / (1.0 + e);
    let len = b - a;
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = a + len * u.powf(p);
        let v = f(x) * len * p * u.powf(p - 1.0);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive(&g, 0.0, 1.0, tol)
}

/// Integrate over `[a, b]` splitting at every annotated singular point inside
/// the interval and treating the pieces with [`endpoint_singular`].
pub fn integrate_with_singularities<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    singular: &[Singular1d],
    tol: &Tolerance,
) -> Result<Estimate> {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut est = integrate_union(f, &[(lo, hi)], singular, tol)?;
    est.value *= sign;
    Ok(est)
}

/// Pieces of `[lo, hi]` between annotated points, with the exponent at each end.
fn pieces(lo: f64, hi: f64, singular: &[Singular1d]) -> Vec<(f64, f64, Option<f64>, Option<f64>)> {
    let mut cuts: Vec<(f64, f64)> = singular
        .iter()
        .filter(|s| s.point >= lo && s.point <= hi)
        .map(|s| (s.point, s.exponent))
        .collect();
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
    cuts.dedup_by(|x, y| {
        if x.0 == y.0 {
            y.1 = y.1.min(x.1);
            true
        } else {
            false
        }
    });
    let mut knots: Vec<(f64, Option<f64>)> = vec![(lo, None)];
    for (p, e) in cuts {
        if p == lo {
            knots[0].1 = Some(e);
        } else {
            knots.push((p, Some(e)));
        }
    }
    if knots.last().map(|k| k.0) != Some(hi) {
        knots.push((hi, None));
    }
    knots
        .windows(2)
        .map(|w| (w[0].0, w[1].0, w[0].1, w[1].1))
        .collect()
}

/// Integral over a union of disjoint increasing intervals `[lo, hi]`.
///
/// The relative tolerance refers to the whole integral: pieces that cancel
/// against each other only need an absolute accuracy derived from a rough
/// first pass. The summed error is checked against the summed piece sizes,
/// so when the total itself cancels accuracy is relative to the pieces.
pub fn integrate_union<F: Fn(f64) -> f64>(
    f: &F,
    intervals: &[(f64, f64)],
    singular: &[Singular1d],
    tol: &Tolerance,
) -> Result<Estimate> {
    let parts: Vec<_> = intervals
        .iter()
        .filter(|(lo, hi)| hi > lo)
        .flat_map(|&(lo, hi)| pieces(lo, hi, singular))
        .collect();
    if parts.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    for &(_, _, ea, eb) in &parts {
        for e in [ea, eb].into_iter().flatten() {
            if e <= -1.0 {
                return Err(Error::LocalIntegrability(format!(
                    "endpoint exponent {e} <= -1"
                )));
            }
        }
    }
    let mut evaluations = 0;
    let local = if parts.len() > 1 {
        let rough: Vec<f64> = parts
            .iter()
            .map(|&(a, b, ea, eb)| {
                evaluations += 15;
                let tol = Tolerance {
                    max_subdivisions: 0,
                    ..*tol
                };
                match endpoint_singular(f, a, b, ea, eb, &tol) {
                    Ok(e) => e.value,
                    Err(Error::ToleranceNotMet { estimate, .. }) => estimate,
                    Err(_) => 0.0,
                }
            })
            .collect();
        let scale: f64 = rough.iter().map(|v| v.abs()).sum();
        let floor = 0.1 * tol.rel * scale / parts.len() as f64;
        Tolerance {
            abs: tol.abs.max(if floor.is_finite() { floor } else { 0.0 }),
            ..*tol
        }
    } else {
        *tol
    };
    let mut values = Vec::with_capacity(parts.len());
    let mut error = 0.0;
    for &(a, b, ea, eb) in &parts {
        let est = endpoint_singular(f, a, b, ea, eb, &local)?;
        values.push(est.value);
        error += est.error;
        evaluations += est.evaluations;
    }
    let value = pairwise_sum(&values);
    let scale: f64 = values.iter().map(|v| v.abs()).sum();
    if error > tol.abs.max(tol.rel * scale) {
        return Err(Error::ToleranceNotMet {
            estimate: value,
            error,
        });
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Behaviour of dyadic shell contributions `c_i` as the truncation grows.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailBehavior {
    /// Geometric decay with ratio `2^slope` per doubling; `tail` is the
    /// extrapolated remainder beyond the last shell.
    Convergent { slope: f64, tail: f64 },
    /// Contributions roughly constant: growth linear in `log M`.
    Logarithmic { per_doubling: f64 },
    /// Contributions grow like `M^order`.
    Power { order: f64 },
    /// Not enough shells, or all contributions vanish.
    Indeterminate,
}

impl TailBehavior {
    pub fn is_divergent(&self) -> bool {
        matches!(
            self,
            TailBehavior::Logarithmic { .. } | TailBehavior::Power { .. }
        )
    }
}

/// Slope threshold (log2 of shell ratio) separating decay from log growth.
pub const TAIL_SLOPE_TOL: f64 = 0.02;
const TAIL_FIT_SHELLS: usize = 6;

/// Fit the last shells of a dyadic decomposition.
pub fn fit_tail(shells: &[f64]) -> TailBehavior {
    let k = shells.len().min(TAIL_FIT_SHELLS);
    if k < 3 {
        return TailBehavior::Indeterminate;
    }
    let last = &shells[shells.len() - k..];
    if last.iter().all(|c| *c == 0.0) {
        return TailBehavior::Convergent {
            slope: f64::NEG_INFINITY,
            tail: 0.0,
        };
    }
    if last.iter().any(|c| *c <= 0.0 || !c.is_finite()) {
        return TailBehavior::Indeterminate;
    }
    let ys: Vec<f64> = last.iter().map(|c| c.log2()).collect();
    let (slope, _, _) = linear_fit(&(0..k).map(|i| i as f64).collect::<Vec<_>>(), &ys);
    if slope < -TAIL_SLOPE_TOL {
        let ratio = 2f64.powf(slope);
        let tail = last[k - 1] * ratio / (1.0 - ratio);
        TailBehavior::Convergent { slope, tail }
    } else if slope <= TAIL_SLOPE_TOL {
        TailBehavior::Logarithmic {
            per_doubling: last.iter().sum::<f64>() / k as f64,
        }
    } else {
        TailBehavior::Power { order: slope }
    }
}

/// Least-squares line `y = slope·x + intercept`; also returns R².
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, my - slope * mx, r2)
}
