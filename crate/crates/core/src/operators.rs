//! Kernels, Lipschitz symbols and higher-order commutators
//! `T^m_{α,b} f(x) = ∫ (b(x) - b(y))^m K(x - y) f(y) dy`.
//!
//! For `mδ + α > 0` the integrand is absolutely integrable near `y = x` and
//! is handed to quadrature with an algebraic singularity annotation. The
//! remaining case `m = 0, α = 0` is a principal value, computed from
//! symmetric ε-truncations combined by Richardson extrapolation.

use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, integrate, norm, Ball, QuadratureSpec, Region, Singularity};
use crate::norms::{lr_norm, seminorm, OscillationReport, SampledFunction};
use crate::params::{to_f64, Setting};
use crate::quadrature::{integrate_with_singularities, Singular1d, Tolerance};
use crate::weights::{BallSamplePlan, WeightPair};

pub type KernelFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Samples used to verify declared constants at construction.
pub const CONSTRUCTION_SAMPLES: usize = 10_000;

/// A user kernel with declared size and smoothness constants.
#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    eval: KernelFn,
    n: u32,
    alpha: f64,
    eta: f64,
    size_constant: f64,
    smoothness_constant: f64,
}

impl CustomKernel {
    /// Verifies `|K(x)| |x|^{n-α} ≤ size_constant` on log-uniform samples.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        n: u32,
        alpha: f64,
        eta: f64,
        size_constant: f64,
        smoothness_constant: f64,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..n as f64).contains(&alpha) || !(eta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel needs 0 ≤ α < n and η > 0 (α={alpha}, η={eta})"
            )));
        }
        let k = CustomKernel {
            name: name.into(),
            eval: Arc::new(eval),
            n,
            alpha,
            eta,
            size_constant,
            smoothness_constant,
        };
        let report = size_check(&Kernel::Custom(k.clone()), n, CONSTRUCTION_SAMPLES, seed)?;
        if let Some(w) = report.violation {
            return Err(Error::Verification(format!(
                "size condition fails for {}: |K(z)||z|^(n-α) = {} > {} at z = {w:?}",
                k.name, report.worst, size_constant
            )));
        }
        Ok(k)
    }
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("eta", &self.eta)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Kernel {
    /// `|x|^{α-n}`, `0 < α < n`.
    Fractional {
        alpha: f64,
    },
    /// `1/x` on the line.
    Hilbert,
    Custom(CustomKernel),
}

impl Kernel {
    pub fn fractional(alpha: f64, n: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < n as f64) {
            return Err(Error::InvalidArgument(format!(
                "fractional order {alpha} outside (0, {n})"
            )));
        }
        Ok(Kernel::Fractional { alpha })
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Fractional { alpha } => format!("I_{alpha}"),
            Kernel::Hilbert => "H".into(),
            Kernel::Custom(c) => c.name.clone(),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Kernel::Fractional { alpha } => *alpha,
            Kernel::Hilbert => 0.0,
            Kernel::Custom(c) => c.alpha,
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            Kernel::Custom(c) => c.eta,
            _ => 1.0,
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            Kernel::Fractional { alpha } => norm(z).powf(alpha - z.len() as f64),
            Kernel::Hilbert => 1.0 / z[0],
            Kernel::Custom(c) => (c.eval)(z),
        }
    }

    /// Declared `C` in `|K(z)| ≤ C |z|^{α-n}`.
    pub fn size_constant(&self) -> f64 {
        match self {
            Kernel::Custom(c) => c.size_constant,
            _ => 1.0,
        }
    }

    /// Declared smoothness constant. For the built-in kernels it is the
    /// mean-value bound `2(n-α) 2^{n-α+1}` with `η = 1`.
    pub fn smoothness_constant(&self, n: u32) -> f64 {
        match self {
            Kernel::Custom(c) => c.smoothness_constant,
            _ => {
                let e = n as f64 - self.alpha();
                2.0 * e * 2f64.powf(e + 1.0)
            }
        }
    }

    fn check_dimension(&self, n: u32) -> Result<()> {
        match self {
            Kernel::Hilbert if n != 1 => Err(Error::InvalidArgument(
                "the Hilbert kernel lives on the line".into(),
            )),
            Kernel::Fractional { alpha } if !(*alpha > 0.0 && *alpha < n as f64) => Err(
                Error::InvalidArgument(format!("fractional order {alpha} outside (0, {n})")),
            ),
            Kernel::Custom(c) if c.n != n => Err(Error::InvalidArgument(format!(
                "kernel declared for n = {}",
                c.n
            ))),
            _ => Ok(()),
        }
    }
}

/// Point with log-uniform norm in `[lo, hi]` and uniform direction.
fn sample_point(rng: &mut ChaCha8Rng, n: u32, lo: f64, hi: f64) -> Vec<f64> {
    let r = (rng.gen_range(lo.ln()..hi.ln())).exp();
    unit(rng, n).into_iter().map(|u| r * u).collect()
}

fn unit(rng: &mut ChaCha8Rng, n: u32) -> Vec<f64> {
    if n == 1 {
        vec![if rng.gen_bool(0.5) { 1.0 } else { -1.0 }]
    } else {
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        vec![t.cos(), t.sin()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    /// `max |K(z)| |z|^{n-α}` over the samples.
    pub worst: f64,
    pub declared: f64,
    pub samples: usize,
    /// Sample exceeding the declared constant, if any.
    pub violation: Option<Vec<f64>>,
}

/// Size-condition sampler on `|z|` log-uniform in `[1e-6, 1e6]`.
pub fn size_check(k: &Kernel, n: u32, samples: usize, seed: u64) -> Result<SizeReport> {
    k.check_dimension(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let declared = k.size_constant();
    let mut worst: f64 = 0.0;
    let mut violation = None;
    for _ in 0..samples {
        let z = sample_point(&mut rng, n, 1e-6, 1e6);
        let v = k.eval(&z).abs() * norm(&z).powf(n as f64 - k.alpha());
        if v > worst {
            worst = v;
        }
        if v > declared * (1.0 + 1e-9) && violation.is_none() {
            violation = Some(z);
        }
    }
    Ok(SizeReport {
        worst,
        declared,
        samples,
        violation,
    })
}

/// Whether `(x, x′, y)` is admissible for the smoothness condition:
/// `|x - y| ≥ 2|x - x′|` with `x ≠ x′`.
pub fn admissible_triple(x: &[f64], xp: &[f64], y: &[f64]) -> bool {
    let h = dist(x, xp);
    h > 0.0 && dist(x, y) >= 2.0 * h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessTriple {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    /// Worst sampled constant.
    pub constant: f64,
    pub declared: f64,
    pub samples: usize,
    pub worst: Option<SmoothnessTriple>,
    /// Set when the worst constant exceeds 1.01 × the declared one.
    pub violated: bool,
}

impl SmoothnessReport {
    pub fn ensure(&self) -> Result<()> {
        if self.violated {
            return Err(Error::Verification(format!(
                "smoothness constant {} exceeds declared {} at {:?}",
                self.constant, self.declared, self.worst
            )));
        }
        Ok(())
    }
}

/// Worst `(|K(x-y) - K(x′-y)| + |K(y-x) - K(y-x′)|) |x-y|^{n-α+η} / |x-x′|^η`
/// over sampled admissible triples.
pub fn check_smoothness(k: &Kernel, n: u32, samples: usize, seed: u64) -> Result<SmoothnessReport> {
    k.check_dimension(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (alpha, eta) = (k.alpha(), k.eta());
    let declared = k.smoothness_constant(n);
    let mut worst: Option<SmoothnessTriple> = None;
    let mut taken = 0;
    while taken < samples {
        let x = sample_point(&mut rng, n, 1e-3, 1e3);
        let d = (rng.gen_range((1e-3f64).ln()..(1e3f64).ln())).exp();
        let y: Vec<f64> = x
            .iter()
            .zip(unit(&mut rng, n))
            .map(|(a, u)| a + d * u)
            .collect();
        let h = d * (rng.gen_range((1e-4f64).ln()..(0.75f64).ln())).exp();
        let xp: Vec<f64> = x
            .iter()
            .zip(unit(&mut rng, n))
            .map(|(a, u)| a + h * u)
            .collect();
        if !admissible_triple(&x, &xp, &y) {
            continue;
        }
        taken += 1;
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<f64>>();
        let diff = (k.eval(&sub(&x, &y)) - k.eval(&sub(&xp, &y))).abs()
            + (k.eval(&sub(&y, &x)) - k.eval(&sub(&y, &xp))).abs();
        let hh = dist(&x, &xp);
        let value = diff * dist(&x, &y).powf(n as f64 - alpha + eta) / hh.powf(eta);
        if worst.as_ref().is_none_or(|w| value > w.value) {
            worst = Some(SmoothnessTriple {
                x,
                x_prime: xp,
                y,
                value,
            });
        }
    }
    let constant = worst.as_ref().map_or(0.0, |w| w.value);
    Ok(SmoothnessReport {
        constant,
        declared,
        samples,
        worst,
        violated: constant > 1.01 * declared,
    })
}

/// A symbol `b` in `Λ(δ)` with an upper bound for its seminorm.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    eval: KernelFn,
    delta: f64,
    seminorm: f64,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Symbol({}, δ={}, ‖b‖={})",
            self.name, self.delta, self.seminorm
        )
    }
}

impl Symbol {
    /// Verifies `|b(x) - b(y)| ≤ ‖b‖ |x - y|^δ` on sampled pairs.
    pub fn new(
        name: impl Into<String>,
        n: u32,
        delta: f64,
        seminorm: f64,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        seed: u64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) || !(seminorm >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "symbol needs δ ∈ (0,1), seminorm ≥ 0 (δ={delta})"
            )));
        }
        let s = Symbol {
            name: name.into(),
            eval: Arc::new(eval),
            delta,
            seminorm,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2000 {
            let x = sample_point(&mut rng, n, 1e-3, 1e3);
            let y = if rng.gen_bool(0.5) {
                sample_point(&mut rng, n, 1e-3, 1e3)
            } else {
                let h = (rng.gen_range((1e-4f64).ln()..(1e2f64).ln())).exp();
                x.iter()
                    .zip(unit(&mut rng, n))
                    .map(|(a, u)| a + h * u)
                    .collect()
            };
            let lhs = (s.eval(&x) - s.eval(&y)).abs();
            let rhs = seminorm * dist(&x, &y).powf(delta);
            if lhs > rhs * (1.0 + 1e-9) + 1e-300 {
                return Err(Error::Verification(format!(
                    "{}: |b(x)-b(y)| = {lhs} > {rhs} at x={x:?}, y={y:?}",
                    s.name
                )));
            }
        }
        Ok(s)
    }

    /// `|x|^δ`, with seminorm 1.
    pub fn power(n: u32, delta: f64) -> Result<Self> {
        Symbol::new(
            format!("|x|^{delta}"),
            n,
            delta,
            1.0,
            move |x| norm(x).powf(delta),
            0,
        )
    }

    /// `sin(x₁)`, smooth, with seminorm bound `2^{1-δ}`.
    pub fn sine(n: u32, delta: f64) -> Result<Self> {
        Symbol::new(
            "sin(x1)",
            n,
            delta,
            2f64.powf(1.0 - delta),
            |x| x[0].sin(),
            0,
        )
    }

    /// The constant symbol `c`.
    pub fn constant(c: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("δ = {delta} outside (0,1)")));
        }
        Ok(Symbol {
            name: format!("{c}"),
            eval: Arc::new(move |_| c),
            delta,
            seminorm: 0.0,
        })
    }

    /// `c·b`, seminorm `|c|·‖b‖`.
    pub fn scaled(&self, c: f64) -> Self {
        let g = self.eval.clone();
        Symbol {
            name: format!("{c}*{}", self.name),
            eval: Arc::new(move |x| c * g(x)),
            delta: self.delta,
            seminorm: c.abs() * self.seminorm,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seminorm(&self) -> f64 {
        self.seminorm
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

/// `T^m_{α,b}` with the invariant `mδ + α < n`.
#[derive(Debug, Clone)]
pub struct CommutatorSpec {
    kernel: Kernel,
    symbol: Symbol,
    m: u32,
    n: u32,
}

impl CommutatorSpec {
    pub fn new(kernel: Kernel, symbol: Symbol, m: u32, n: u32) -> Result<Self> {
        kernel.check_dimension(n)?;
        let order = m as f64 * symbol.delta + kernel.alpha();
        if !(order < n as f64) {
            return Err(Error::InvalidArgument(format!(
                "mδ + α = {order} must be below n = {n}"
            )));
        }
        Ok(CommutatorSpec {
            kernel,
            symbol,
            m,
            n,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The same operator with symbol `c·b`.
    pub fn with_symbol(&self, symbol: Symbol) -> Result<Self> {
        CommutatorSpec::new(self.kernel.clone(), symbol, self.m, self.n)
    }

    /// Principal value needed: no symbol factor and no fractional gain.
    pub fn is_singular(&self) -> bool {
        self.m == 0 && self.kernel.alpha() == 0.0
    }

    /// Reject settings whose `(n, α, δ, m)` disagree with this operator.
    pub fn check_setting(&self, s: &Setting) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs());
        if s.n() != self.n
            || s.m() != self.m
            || !close(to_f64(s.alpha()), self.kernel.alpha())
            || !close(to_f64(s.delta()), self.symbol.delta)
        {
            return Err(Error::InvalidSetting(format!(
                "operator (n={}, α={}, δ={}, m={}) does not match setting {s}",
                self.n,
                self.kernel.alpha(),
                self.symbol.delta,
                self.m
            )));
        }
        Ok(())
    }
}

/// Point value of an operator with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub error: f64,
    pub principal_value: bool,
    pub warning: Option<String>,
}

/// `T^m_{α,b} f(x)`.
pub fn apply_commutator(
    spec: &CommutatorSpec,
    f: &SampledFunction,
    x: &[f64],
    q: &QuadratureSpec,
) -> Result<f64> {
    Ok(apply_commutator_detailed(spec, f, x, q)?.value)
}

pub fn apply_commutator_detailed(
    spec: &CommutatorSpec,
    f: &SampledFunction,
    x: &[f64],
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    evaluate(&spec.kernel, Some(&spec.symbol), spec.m, f, x, q)
}

/// The plain operator `T f(x)`; the `m = 0` path of [`apply_commutator`].
pub fn apply_operator(
    kernel: &Kernel,
    f: &SampledFunction,
    x: &[f64],
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    evaluate(kernel, None, 0, f, x, q)
}

fn evaluate(
    kernel: &Kernel,
    symbol: Option<&Symbol>,
    m: u32,
    f: &SampledFunction,
    x: &[f64],
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    let n = x.len() as u32;
    kernel.check_dimension(n)?;
    let Some(support) = f.support() else {
        return Err(Error::Unsupported(format!(
            "{} must have compact support",
            f.name()
        )));
    };
    let bx = symbol.map(|b| b.eval(x));
    let factor = |y: &[f64]| -> f64 {
        match (m, symbol, bx) {
            (0, _, _) => 1.0,
            (_, Some(b), Some(bx)) => (bx - b.eval(y)).powi(m as i32),
            _ => 1.0,
        }
    };
    let inside = dist(x, &support.center) <= support.radius * (1.0 + 1e-12);
    let singular = m == 0 && kernel.alpha() == 0.0;
    if singular && inside {
        return principal_value(kernel, f, x, support, q);
    }
    // integrate in z = x - y so that nodes near the pole resolve |z| to full
    // relative precision instead of to the spacing of floats around x
    let shift = |p: &[f64]| -> Vec<f64> { x.iter().zip(p).map(|(a, b)| a - b).collect() };
    let mut sing = Vec::new();
    if inside {
        let delta = symbol.map_or(0.0, |b| b.delta());
        // the pole comes first: planar quadrature centers on it
        sing.push(Singularity {
            point: vec![0.0; n as usize],
            exponent: m as f64 * delta + kernel.alpha() - n as f64,
        });
    }
    sing.extend(f.singularities().iter().map(|s| Singularity {
        point: shift(&s.point),
        exponent: s.exponent,
    }));
    let spec = q.clone().with_singularities(sing);
    let g = |z: &[f64]| -> f64 {
        let y = shift(z);
        let fy = f.eval(&y);
        if fy == 0.0 {
            return 0.0;
        }
        factor(&y) * kernel.eval(z) * fy
    };
    let region = Region::Ball(Ball::new(shift(&support.center), support.radius)?);
    let est = integrate(&g, &region, &spec)?;
    Ok(Evaluation {
        value: est.value,
        error: est.error,
        principal_value: false,
        warning: None,
    })
}

/// `lim_{ε→0} ∫_{|x-y|>ε} K(x-y) f(y) dy` on the line.
fn principal_value(
    kernel: &Kernel,
    f: &SampledFunction,
    x: &[f64],
    support: &Ball,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    if x.len() != 1 {
        return Err(Error::Unsupported(
            "principal values are implemented on the line".into(),
        ));
    }
    let x0 = x[0];
    let reach = (x0 - support.center[0]).abs() + support.radius;
    let nearest = f
        .singularities()
        .iter()
        .map(|s| (s.point[0] - x0).abs())
        .fold(f64::INFINITY, f64::min);
    let smooth = nearest > 1e-12 * (1.0 + x0.abs());
    let h = if smooth {
        0.5 * nearest.min(reach)
    } else {
        reach / 8.0
    };
    // breakpoints of t ↦ f(x ∓ t)
    let cuts: Vec<Singular1d> = f
        .singularities()
        .iter()
        .map(|s| Singular1d {
            point: (s.point[0] - x0).abs(),
            exponent: s.exponent.min(0.0),
        })
        .collect();
    let tol = Tolerance {
        rel: q.rel_tol,
        abs: 1e-300,
        max_subdivisions: q.max_subdivisions,
    };
    let g = |t: f64| kernel.eval(&[t]) * f.eval(&[x0 - t]) + kernel.eval(&[-t]) * f.eval(&[x0 + t]);
    let mut quad_err = 0.0;
    let mut trunc = |eps: f64| -> Result<f64> {
        let e = integrate_with_singularities(&g, eps, reach, &cuts, &tol)?;
        quad_err += e.error;
        Ok(e.value)
    };
    let (t1, t2, t4) = (trunc(h)?, trunc(h / 2.0)?, trunc(h / 4.0)?);
    let r1 = 2.0 * t4 - t2;
    let r2 = (8.0 * t4 - 6.0 * t2 + t1) / 3.0;
    let error = (r2 - r1).abs() + quad_err;
    let warning = (!smooth)
        .then(|| format!("f is not smooth at x = {x0}; principal value error estimate {error:e}"));
    Ok(Evaluation {
        value: r2,
        error,
        principal_value: true,
        warning,
    })
}

/// `T^m_{α,b} f` as a sampled function. Evaluation failures are recorded in
/// the returned slot and surface as NaN.
pub fn commutator_image(
    spec: &CommutatorSpec,
    f: &SampledFunction,
    q: &QuadratureSpec,
) -> (SampledFunction, Arc<Mutex<Option<Error>>>) {
    let slot: Arc<Mutex<Option<Error>>> = Arc::new(Mutex::new(None));
    let (sp, ff, qq, sl) = (spec.clone(), f.clone(), q.clone(), slot.clone());
    let img = SampledFunction::new(format!("T({})", f.name()), move |x| match apply_commutator(
        &sp, &ff, x, &qq,
    ) {
        Ok(v) => v,
        Err(e) => {
            sl.lock().expect("error slot").get_or_insert(e);
            f64::NAN
        }
    })
    .with_singularities(f.singularities().iter().map(|s| Singularity {
        point: s.point.clone(),
        exponent: 0.0,
    }));
    (img, slot)
}

fn take_error(slot: &Mutex<Option<Error>>) -> Result<()> {
    match slot.lock().expect("error slot").take() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// One side of a bounded-ratio experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    /// Right-hand side without the implicit constant.
    pub rhs: f64,
    /// `lhs/rhs`, defined as 0 when `lhs = 0`.
    pub ratio: f64,
}

impl LemmaCheck {
    fn new(lhs: f64, rhs: f64) -> Result<Self> {
        if !lhs.is_finite() {
            return Err(Error::Divergent(format!("left-hand side {lhs}")));
        }
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Ok(LemmaCheck { lhs, rhs, ratio })
    }
}

fn rhs_factor(
    spec: &CommutatorSpec,
    pair: &WeightPair,
    s: &Setting,
    f: &SampledFunction,
    q: &QuadratureSpec,
) -> Result<f64> {
    let r = s.r().to_f64();
    Ok(spec.symbol.seminorm.powi(spec.m as i32) * lr_norm(f, &pair.v, r, q)?)
}

/// Off-diagonal smoothness estimate for `x, y ∈ B`:
/// `∫_{(2B)^c} |b(x)-b(z)|^m |K(x-z) - K(y-z)| |f(z)| dz` against
/// `‖b‖^m w(B) |B|^{δ̃/n - 1} ‖f/v‖_r`.
#[allow(clippy::too_many_arguments)]
pub fn tail_lemma_check(
    spec: &CommutatorSpec,
    pair: &WeightPair,
    s: &Setting,
    b: &Ball,
    f: &SampledFunction,
    x: &[f64],
    y: &[f64],
    q: &QuadratureSpec,
) -> Result<LemmaCheck> {
    spec.check_setting(s)?;
    let tol = 1.0 + 1e-12;
    if dist(x, &b.center) > b.radius * tol || dist(y, &b.center) > b.radius * tol {
        return Err(Error::InvalidArgument("x and y must lie in B".into()));
    }
    let Some(support) = f.support() else {
        return Err(Error::Unsupported(format!(
            "{} must have compact support",
            f.name()
        )));
    };
    let inner = 2.0 * b.radius;
    let outer = dist(&b.center, &support.center) + support.radius;
    let lhs = if outer <= inner {
        0.0
    } else {
        let bx = spec.symbol.eval(x);
        let g = |z: &[f64]| -> f64 {
            let fz = f.eval(z);
            if fz == 0.0 {
                return 0.0;
            }
            let zx: Vec<f64> = x.iter().zip(z).map(|(a, c)| a - c).collect();
            let zy: Vec<f64> = y.iter().zip(z).map(|(a, c)| a - c).collect();
            (bx - spec.symbol.eval(z)).abs().powi(spec.m as i32)
                * (spec.kernel.eval(&zx) - spec.kernel.eval(&zy)).abs()
                * fz.abs()
        };
        let region = Region::Annulus {
            center: b.center.clone(),
            inner,
            outer,
        };
        integrate(&g, &region, &f.spec(q))?.value
    };
    let n = s.n() as f64;
    let dt = to_f64(s.delta_tilde());
    let wb = pair.w.mass(b, q)?;
    let rhs = rhs_factor(spec, pair, s, f, q)? * wb * b.measure().powf(dt / n - 1.0);
    LemmaCheck::new(lhs, rhs)
}

/// Local estimate `(1/w(B)) ∫_B |T^m_{α,b}(f χ_{2B})|` against
/// `‖b‖^m |B|^{δ̃/n} ‖f/v‖_r`.
pub fn local_lemma_check(
    spec: &CommutatorSpec,
    pair: &WeightPair,
    s: &Setting,
    b: &Ball,
    f: &SampledFunction,
    q: &QuadratureSpec,
) -> Result<LemmaCheck> {
    spec.check_setting(s)?;
    let local = f.restricted(&b.dilate(2.0));
    let (img, slot) = commutator_image(spec, &local, q);
    let outer = QuadratureSpec {
        rel_tol: q.rel_tol.max(1e-6),
        ..img.spec(&QuadratureSpec::default())
    };
    let total = integrate(&|x| img.eval(x).abs(), &Region::Ball(b.clone()), &outer)?.value;
    take_error(&slot)?;
    let lhs = total / pair.w.mass(b, q)?;
    let n = s.n() as f64;
    let dt = to_f64(s.delta_tilde());
    let rhs = rhs_factor(spec, pair, s, f, q)? * b.measure().powf(dt / n);
    LemmaCheck::new(lhs, rhs)
}

/// `seminorm(T f, w, δ̃/n)` against `‖b‖^m ‖f/v‖_r` for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRatio {
    pub function: String,
    pub oscillation: OscillationReport,
    pub rhs: f64,
    /// Defined as 0 for `f ≡ 0`.
    pub ratio: f64,
}

pub fn theorem_ratio(
    spec: &CommutatorSpec,
    pair: &WeightPair,
    s: &Setting,
    f: &SampledFunction,
    plan: &BallSamplePlan,
    q: &QuadratureSpec,
) -> Result<TheoremRatio> {
    spec.check_setting(s)?;
    let rhs = rhs_factor(spec, pair, s, f, q)?;
    let (img, slot) = commutator_image(spec, f, q);
    let beta = to_f64(s.delta_tilde()) / s.n() as f64;
    let outer = QuadratureSpec {
        rel_tol: q.rel_tol.max(1e-6),
        ..QuadratureSpec::default()
    };
    let oscillation = seminorm(&img, &pair.w, beta, s.n(), plan, &outer);
    take_error(&slot)?;
    let oscillation = oscillation?;
    if oscillation.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergent(format!(
            "oscillation of T({}) is not finite",
            f.name()
        )));
    }
    let ratio = if oscillation.sup == 0.0 {
        0.0
    } else {
        oscillation.sup / rhs
    };
    Ok(TheoremRatio {
        function: f.name().to_string(),
        oscillation,
        rhs,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{q as rq, Exponent};
    use approx::assert_relative_eq;

    fn chi() -> SampledFunction {
        SampledFunction::indicator(&Ball::interval(0.0, 1.0).unwrap())
    }

    fn tight() -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: 1e-10,
            ..Default::default()
        }
    }

    #[test]
    fn fractional_point_value() {
        let k = Kernel::fractional(0.5, 1).unwrap();
        let v = apply_operator(&k, &chi(), &[0.0], &tight()).unwrap();
        assert_relative_eq!(v.value, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn hilbert_off_support() {
        let v = apply_operator(&Kernel::Hilbert, &chi(), &[2.0], &tight()).unwrap();
        assert!(!v.principal_value);
        assert_relative_eq!(v.value, 3f64.ln(), max_relative = 1e-9);
    }

    #[test]
    fn hilbert_principal_value_inside() {
        // H χ_{[-1,1]}(x) = ln|(x+1)/(x-1)|
        for x in [0.0, 0.3, -0.6] {
            let v = apply_operator(&Kernel::Hilbert, &chi(), &[x], &tight()).unwrap();
            assert!(v.principal_value && v.warning.is_none());
            assert_relative_eq!(
                v.value,
                ((x + 1.0) / (x - 1.0f64)).abs().ln(),
                epsilon = 1e-8
            );
        }
        let v = apply_operator(&Kernel::Hilbert, &chi(), &[1.0], &tight()).unwrap();
        assert!(v.warning.is_some());
    }

    #[test]
    fn hilbert_of_even_function_is_odd() {
        let g = SampledFunction::new("bump", |x| (1.0 - x[0] * x[0]).powi(2))
            .with_support(Ball::interval(0.0, 1.0).unwrap());
        for x in [0.2, 0.7, 1.5] {
            let a = apply_operator(&Kernel::Hilbert, &g, &[x], &tight())
                .unwrap()
                .value;
            let b = apply_operator(&Kernel::Hilbert, &g, &[-x], &tight())
                .unwrap()
                .value;
            assert!((a + b).abs() < 1e-8 * (1.0 + a.abs()), "{a} {b}");
        }
    }

    #[test]
    fn constant_symbol_kills_commutator() {
        let spec = CommutatorSpec::new(
            Kernel::fractional(0.5, 1).unwrap(),
            Symbol::constant(3.0, 0.3).unwrap(),
            1,
            1,
        )
        .unwrap();
        for x in [-0.5, 0.0, 2.0] {
            assert_eq!(
                apply_commutator(&spec, &chi(), &[x], &tight()).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn m_zero_is_the_plain_operator() {
        let k = Kernel::fractional(0.5, 1).unwrap();
        let spec = CommutatorSpec::new(k.clone(), Symbol::power(1, 0.3).unwrap(), 0, 1).unwrap();
        for x in [-0.7, 0.1, 3.0] {
            let a = apply_commutator(&spec, &chi(), &[x], &tight()).unwrap();
            assert_eq!(a, apply_operator(&k, &chi(), &[x], &tight()).unwrap().value);
        }
    }

    #[test]
    fn symbol_scaling() {
        let base = Symbol::power(1, 0.3).unwrap();
        for m in [1, 2] {
            let spec = CommutatorSpec::new(Kernel::fractional(0.2, 1).unwrap(), base.clone(), m, 1)
                .unwrap();
            let x = [0.4];
            let v = apply_commutator(&spec, &chi(), &x, &tight()).unwrap();
            for c in [2.0, -1.0] {
                let scaled = spec.with_symbol(base.scaled(c)).unwrap();
                let w = apply_commutator(&scaled, &chi(), &x, &tight()).unwrap();
                assert_relative_eq!(w, c.powi(m as i32) * v, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn invariant_enforced() {
        let k = Kernel::fractional(0.8, 1).unwrap();
        assert!(CommutatorSpec::new(k, Symbol::power(1, 0.3).unwrap(), 1, 1).is_err());
        assert!(
            CommutatorSpec::new(Kernel::Hilbert, Symbol::power(2, 0.3).unwrap(), 1, 2).is_err()
        );
    }

    #[test]
    fn declared_constants_hold() {
        for k in [Kernel::fractional(0.5, 1).unwrap(), Kernel::Hilbert] {
            let s = size_check(&k, 1, 10_000, 1).unwrap();
            assert!(s.violation.is_none() && s.worst <= 1.0 + 1e-9);
            let a = check_smoothness(&k, 1, 4000, 2).unwrap();
            a.ensure().unwrap();
            let b = check_smoothness(&k, 1, 16000, 2).unwrap();
            assert!(b.constant >= a.constant && b.constant < 1.5 * a.constant);
        }
        let k = Kernel::fractional(0.7, 2).unwrap();
        check_smoothness(&k, 2, 4000, 3).unwrap().ensure().unwrap();
    }

    #[test]
    fn inadmissible_triples_excluded() {
        assert!(!admissible_triple(&[0.0], &[1.0], &[1.5]));
        assert!(admissible_triple(&[0.0], &[0.5], &[1.0]));
        assert!(!admissible_triple(&[0.0], &[0.0], &[1.0]));
    }

    #[test]
    fn custom_kernel_size_verified() {
        let ok = CustomKernel::new("odd", 1, 0.0, 1.0, 1.0, 8.0, |z| 1.0 / z[0], 4);
        assert!(ok.is_ok());
        let bad = CustomKernel::new("fat", 1, 0.0, 1.0, 1.0, 8.0, |z| 2.0 / z[0], 4);
        assert!(matches!(bad, Err(Error::Verification(_))));
    }

    #[test]
    fn symbol_verification() {
        assert!(Symbol::new("x", 1, 0.3, 1.0, |x| x[0], 0).is_err());
        assert!(Symbol::sine(1, 0.5).is_ok());
        assert!(Symbol::power(2, 0.4).is_ok());
    }

    fn baseline() -> (CommutatorSpec, WeightPair, Setting) {
        let spec = CommutatorSpec::new(
            Kernel::fractional(0.5, 1).unwrap(),
            Symbol::power(1, 0.3).unwrap(),
            1,
            1,
        )
        .unwrap();
        let pair = WeightPair::powers(rq(0, 1), rq(-7, 20));
        let s = Setting::exact(
            1,
            rq(1, 2),
            rq(3, 10),
            1,
            rq(1, 1),
            Exponent::Finite(rq(4, 1)),
            rq(1, 5),
        )
        .unwrap();
        (spec, pair, s)
    }

    #[test]
    fn lemma_checks_on_the_baseline() {
        let (spec, pair, s) = baseline();
        let q = QuadratureSpec {
            rel_tol: 1e-7,
            ..Default::default()
        };
        let f = SampledFunction::weighted_box(&pair.v, 1, 8.0, |_| 1.0, "1").unwrap();
        let mut tails = vec![];
        for lam in [1.0, 4.0] {
            let b = Ball::interval(0.0, 0.25 * lam).unwrap();
            let t = tail_lemma_check(&spec, &pair, &s, &b, &f, &[0.1 * lam], &[-0.2 * lam], &q)
                .unwrap();
            assert!(t.ratio.is_finite() && t.ratio > 0.0);
            tails.push(t.ratio);
            let l = local_lemma_check(&spec, &pair, &s, &b, &f, &q).unwrap();
            assert!(l.ratio.is_finite() && l.ratio > 0.0);
        }
        assert!(
            tails[0] / tails[1] < 3.0 && tails[1] / tails[0] < 3.0,
            "{tails:?}"
        );
        let zero = SampledFunction::zero().with_support(Ball::interval(0.0, 1.0).unwrap());
        let b = Ball::interval(0.0, 1.0).unwrap();
        assert_eq!(
            tail_lemma_check(&spec, &pair, &s, &b, &zero, &[0.0], &[0.5], &q)
                .unwrap()
                .lhs,
            0.0
        );
    }

    #[test]
    fn setting_mismatch_rejected() {
        let (spec, pair, _) = baseline();
        let other = Setting::exact(
            1,
            rq(1, 4),
            rq(3, 10),
            1,
            rq(1, 1),
            Exponent::Finite(rq(4, 1)),
            rq(1, 5),
        )
        .unwrap();
        let f = chi();
        let b = Ball::interval(0.0, 1.0).unwrap();
        assert!(matches!(
            local_lemma_check(&spec, &pair, &other, &b, &f, &QuadratureSpec::default()),
            Err(Error::InvalidSetting(_))
        ));
    }
}
