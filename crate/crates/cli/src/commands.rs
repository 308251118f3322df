//! The five experiment commands. Each writes its artifacts into an output
//! directory and reports whether the experiment passed.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use weightlab_core::geometry::{Ball, QuadratureSpec};
use weightlab_core::norms::SampledFunction;
use weightlab_core::operators::{
    check_smoothness, local_lemma_check, size_check, tail_lemma_check, theorem_ratio, LemmaCheck,
};
use weightlab_core::params::{fmt_f64, region_grid, GridBase};
use weightlab_core::quadrature::{fit_tail, linear_fit};
use weightlab_core::weights::{
    catalog, check_membership_numeric, check_membership_old_symbolic, check_membership_symbolic,
    Functionals, MembershipStatus, MembershipVerdict,
};
use weightlab_core::Error as CoreError;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "weightlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Result of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    Agree,
    /// The numeric side could not decide; not a contradiction.
    Undecided,
    Contradiction,
}

/// Exact verdicts against sampled ones: member ↔ member-consistent,
/// nonmember ↔ nonmember-consistent with the same failing condition.
pub fn compare_verdicts(exact: &MembershipVerdict, sampled: &MembershipVerdict) -> Agreement {
    use MembershipStatus::*;
    // a sampled witness may expose a different failing functional than the
    // exact one; only the outcome is compared
    match (exact.status, sampled.status) {
        (_, Undecided) | (Undecided, _) => Agreement::Undecided,
        (a, b) if a.contradicts(b) => Agreement::Contradiction,
        _ => Agreement::Agree,
    }
}

fn header(cfg: &ExperimentConfig, command: &str) -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "config_digest": cfg.digest(),
        "seed": cfg.seed,
    })
}

fn write_json(path: &Path, v: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| CliError::Failed(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn report(cfg: &ExperimentConfig, command: &str, passed: bool, result: Value) -> Value {
    let mut v = header(cfg, command);
    v["passed"] = json!(passed);
    v["result"] = result;
    v
}

fn prepare(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

/// Classify the `(1/r, δ̃)` window and write `region_map.csv`.
pub fn run_region_map(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    prepare(out)?;
    let s = &cfg.setting;
    let base = GridBase {
        n: s.n(),
        alpha: *s.alpha(),
        delta: *s.delta(),
        m: s.m(),
        eta: *s.eta(),
    };
    let window = cfg
        .region_map
        .window
        .clone()
        .unwrap_or_else(|| base.default_window());
    let grid = region_grid(&base, &window)?;
    let csv_path = out.join("region_map.csv");
    fs::write(&csv_path, grid.to_csv())?;
    let mut meta = header(cfg, "region-map");
    meta["columns"] = json!(weightlab_core::params::RegionGrid::CSV_HEADER
        .split(',')
        .collect::<Vec<_>>());
    meta["rows"] = json!(grid.points.len());
    meta["window"] = to_value(&window);
    let meta_path = out.join("region_map.csv.meta.json");
    write_json(&meta_path, &meta)?;
    Ok(Outcome {
        passed: true,
        files: vec![csv_path, meta_path],
        summary: format!("region-map: {} rows", grid.points.len()),
    })
}

fn symbolic_or_flag(
    r: weightlab_core::Result<MembershipVerdict>,
) -> CliResult<(Option<MembershipVerdict>, Option<String>)> {
    match r {
        Ok(v) => Ok((Some(v), None)),
        Err(CoreError::Unsupported(why)) => Ok((None, Some(why))),
        Err(e) => Err(e.into()),
    }
}

/// Symbolic and numeric membership of the configured pair.
pub fn run_check_pair(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    prepare(out)?;
    let s = &cfg.setting;
    let (pair, entry) = cfg.pair()?;
    let (symbolic, unsupported) = symbolic_or_flag(check_membership_symbolic(&pair, s))?;
    let (old, _) = symbolic_or_flag(check_membership_old_symbolic(&pair, s))?;
    let numeric = check_membership_numeric(&pair, s, &cfg.plan, &cfg.numeric)?;
    let agreement = symbolic.as_ref().map(|sym| compare_verdicts(sym, &numeric));
    let mut problems = Vec::new();
    if agreement == Some(Agreement::Contradiction) {
        problems.push("symbolic and numeric verdicts contradict each other".to_string());
    }
    let condition_note = symbolic.as_ref().and_then(|sym| {
        (agreement == Some(Agreement::Agree) && sym.failing_condition != numeric.failing_condition)
            .then(|| {
                format!(
                    "sampled witness fails {} where the exact decision names {}",
                    numeric.failing_condition, sym.failing_condition
                )
            })
    });
    if let (Some(e), Some(sym)) = (&entry, &symbolic) {
        if sym.status != e.expected.status || sym.failing_condition != e.expected.failing_condition
        {
            problems.push(format!(
                "catalog expects {:?}/{}",
                e.expected.status, e.expected.failing_condition
            ));
        }
        if let (Some(want), Some(o)) = (e.expected.old_class, &old) {
            if o.status != want {
                problems.push(format!(
                    "catalog expects {want:?} in the infimum-normalized class"
                ));
            }
        }
    }
    let passed = problems.is_empty();
    let result = json!({
        "pair": pair.label(),
        "weights": to_value(&pair),
        "setting": to_value(s),
        "catalog": entry.as_ref().map(to_value),
        "symbolic": symbolic.as_ref().map(to_value),
        "symbolic_unsupported": unsupported,
        "old_class_symbolic": old.as_ref().map(to_value),
        "numeric": to_value(&numeric),
        "agreement": agreement.map(|a| to_value(&a)),
        "condition_note": condition_note,
        "problems": problems,
    });
    let path = out.join("check_pair.json");
    write_json(&path, &report(cfg, "check-pair", passed, result))?;
    let status = symbolic.as_ref().map_or(numeric.status, |v| v.status);
    Ok(Outcome {
        passed,
        files: vec![path],
        summary: format!("check-pair {}: {status:?}", pair.label()),
    })
}

/// Smooth factors `g(x) = 1 + 0.25 sin(ω x₁ + φ)`.
fn smooth_factors(seed: u64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

/// `max/min` over positive values; 1 when there are none.
fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let pos: Vec<f64> = values.into_iter().filter(|v| *v > 0.0).collect();
    if pos.is_empty() {
        return 1.0;
    }
    let hi = pos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = pos.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

#[derive(Debug, Clone, Serialize)]
struct TheoremRow {
    half_side: f64,
    omega: f64,
    phi: f64,
    function: String,
    seminorm: f64,
    rhs: f64,
    ratio: f64,
    argmax_ball: Option<Ball>,
    tail_lemma: LemmaCheck,
    local_lemma: LemmaCheck,
}

/// Seminorm ratios of `T^m_{α,b} f` over a family of test functions.
pub fn run_verify_theorem(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    prepare(out)?;
    let s = &cfg.setting;
    let n = s.n();
    let (pair, _) = cfg.pair()?;
    if let Ok(v) = check_membership_symbolic(&pair, s) {
        if !v.status.is_positive() {
            return Err(CliError::Config(format!(
                "{} is not a member pair at {s}: {}",
                pair.label(),
                v.witness
            )));
        }
    }
    let spec = cfg.commutator()?;
    spec.check_setting(s)?;
    // singular kernels are run only with verified size and smoothness bounds
    let size = size_check(spec.kernel(), n, 10_000, cfg.seed)?;
    let smooth = check_smoothness(spec.kernel(), n, 10_000, cfg.seed)?;
    if size.violation.is_some() || smooth.violated {
        return Err(CliError::Failed(format!(
            "kernel {} fails its declared bounds",
            spec.kernel().name()
        )));
    }
    let t = &cfg.theorem;
    let q = &QuadratureSpec {
        rel_tol: t.rel_tol,
        ..cfg.quadrature.clone()
    };
    let factors = if t.zero_function {
        vec![(0.0, 0.0)]
    } else {
        smooth_factors(cfg.seed, t.functions)
    };
    let mut rows = Vec::new();
    for &a in &t.boxes {
        for &(omega, phi) in &factors {
            let f = if t.zero_function {
                SampledFunction::zero().with_support(Ball::centered(n, a * (n as f64).sqrt())?)
            } else {
                let name = format!("1+0.25sin({omega}x+{phi})");
                SampledFunction::weighted_box(
                    &pair.v,
                    n,
                    a,
                    move |x| 1.0 + 0.25 * (omega * x[0] + phi).sin(),
                    &name,
                )?
            };
            let tr = theorem_ratio(&spec, &pair, s, &f, &t.plan, q)?;
            let b = Ball::centered(n, t.lemma_ball * a)?;
            let r = b.radius;
            let mut x = vec![0.0; n as usize];
            let mut y = vec![0.0; n as usize];
            x[0] = 0.3 * r;
            y[0] = -0.6 * r;
            let tail = tail_lemma_check(&spec, &pair, s, &b, &f, &x, &y, q)?;
            let local = local_lemma_check(&spec, &pair, s, &b, &f, q)?;
            rows.push(TheoremRow {
                half_side: a,
                omega,
                phi,
                function: tr.function.clone(),
                seminorm: tr.oscillation.sup,
                rhs: tr.rhs,
                ratio: tr.ratio,
                argmax_ball: tr.oscillation.argmax_ball.clone(),
                tail_lemma: tail,
                local_lemma: local,
            });
        }
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let theorem_spread = spread(ratios.iter().cloned());
    let tail_spread = spread(rows.iter().map(|r| r.tail_lemma.ratio));
    let local_spread = spread(rows.iter().map(|r| r.local_lemma.ratio));
    let passed =
        theorem_spread <= t.bound && tail_spread <= t.lemma_bound && local_spread <= t.lemma_bound;
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let result = json!({
        "pair": pair.label(),
        "operator": { "kernel": spec.kernel().name(), "symbol": spec.symbol().name(), "m": spec.m(),
                      "symbol_seminorm": spec.symbol().seminorm() },
        "kernel_checks": { "size": to_value(&size), "smoothness": to_value(&smooth) },
        "plan_digest": t.plan.digest(n)?,
        "rows": to_value(&rows),
        "ratio_max": max,
        "ratio_min": min,
        "ratio_spread": theorem_spread,
        "tail_lemma_spread": tail_spread,
        "local_lemma_spread": local_spread,
        "bound": t.bound,
        "lemma_bound": t.lemma_bound,
    });
    let path = out.join("verify_theorem.json");
    write_json(&path, &report(cfg, "verify-theorem", passed, result))?;
    Ok(Outcome {
        passed,
        files: vec![path],
        summary: format!(
            "verify-theorem: ratio spread {theorem_spread:.3}, tail lemma spread {tail_spread:.3}, local lemma spread {local_spread:.3}"
        ),
    })
}

/// Fit and classification of a truncation scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    /// `"convergent"`, `"divergent"`, `"zero"` or `"inconclusive"`.
    pub behavior: String,
    /// Fit of `functional^{r'}` against `ln M`.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Relative gap between the last two tail-extrapolated values.
    pub cauchy_gap: Option<f64>,
}

/// Global functional on `B(0, R)` at truncations `M = 2^j R`.
pub fn run_scan_global(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    prepare(out)?;
    let s = &cfg.setting;
    let (pair, _) = cfg.pair()?;
    let params = s.class_params();
    let f = Functionals::new(&pair, &params, cfg.quadrature.clone())?;
    let b = Ball::centered(s.n(), cfg.scan.radius)?;
    let points = f.global_scan(&b, cfg.scan.doublings)?;
    let csv_path = out.join("scan_global.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::Failed(e.to_string()))?;
    w.write_record(["j", "truncation", "truncated", "extrapolated"])
        .map_err(|e| CliError::Failed(e.to_string()))?;
    for p in &points {
        w.write_record([
            p.j.to_string(),
            fmt_f64(p.truncation),
            fmt_f64(p.truncated),
            p.extrapolated.map(fmt_f64).unwrap_or_default(),
        ])
        .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    w.flush()?;
    let qexp = f.params().q;
    let power = |x: f64| if qexp.is_infinite() { x } else { x.powf(qexp) };
    let xs: Vec<f64> = points.iter().map(|p| p.truncation.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| power(p.truncated)).collect();
    let (slope, intercept, r2) = if points.len() >= 2 {
        linear_fit(&xs, &ys)
    } else {
        (0.0, ys[0], 1.0)
    };
    let cauchy_gap = match points.as_slice() {
        [.., a, b] => match (a.extrapolated, b.extrapolated) {
            (Some(x), Some(y)) => Some(if y == 0.0 {
                (x - y).abs()
            } else {
                ((x - y) / y).abs()
            }),
            _ => None,
        },
        _ => None,
    };
    let increments: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
    let behavior = if pair.v.is_zero() {
        "zero"
    } else if cauchy_gap.is_some_and(|g| g <= cfg.scan.cauchy_tol) {
        "convergent"
    } else if fit_tail(&increments).is_divergent() && slope > 0.0 && r2 > cfg.scan.min_r2 {
        "divergent"
    } else {
        "inconclusive"
    };
    let summary = ScanSummary {
        behavior: behavior.to_string(),
        slope,
        intercept,
        r2,
        cauchy_gap,
    };
    let passed = behavior != "inconclusive";
    let mut meta = header(cfg, "scan-global");
    meta["columns"] = json!(["j", "truncation", "truncated", "extrapolated"]);
    meta["rows"] = json!(points.len());
    meta["pair"] = json!(pair.label());
    meta["ball_radius"] = json!(cfg.scan.radius);
    meta["conjugate_exponent"] = json!(if qexp.is_infinite() {
        "inf".to_string()
    } else {
        fmt_f64(qexp)
    });
    meta["summary"] = to_value(&summary);
    meta["passed"] = json!(passed);
    let meta_path = out.join("scan_global.csv.meta.json");
    write_json(&meta_path, &meta)?;
    Ok(Outcome {
        passed,
        files: vec![csv_path, meta_path],
        summary: format!(
            "scan-global {}: {behavior} (slope {slope:.4e}, R² {r2:.5})",
            pair.label()
        ),
    })
}

/// The example catalog at the configured setting, each entry checked
/// against the exact decider.
pub fn run_catalog(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    prepare(out)?;
    let s = &cfg.setting;
    let cat = catalog::catalog(s)?;
    let mut entries = Vec::new();
    let mut mismatches = 0;
    for e in &cat.entries {
        let v = check_membership_symbolic(&e.pair, s)?;
        let mut ok =
            v.status == e.expected.status && v.failing_condition == e.expected.failing_condition;
        let old = match e.expected.old_class {
            Some(want) => {
                let o = check_membership_old_symbolic(&e.pair, s)?;
                ok &= o.status == want;
                Some(o.status)
            }
            None => None,
        };
        if !ok {
            mismatches += 1;
        }
        entries.push(json!({
            "key": e.key,
            "pair": e.pair.label(),
            "weights": to_value(&e.pair),
            "expected": to_value(&e.expected),
            "provenance": e.provenance,
            "symbolic_status": to_value(&v.status),
            "symbolic_failing_condition": to_value(&v.failing_condition),
            "old_class_status": old.map(|o| to_value(&o)),
            "consistent": ok,
        }));
    }
    let passed = mismatches == 0;
    let result = json!({
        "setting": to_value(s),
        "entries": entries,
        "omitted": to_value(&cat.omitted),
    });
    let path = out.join("catalog.json");
    write_json(&path, &report(cfg, "catalog", passed, result))?;
    Ok(Outcome {
        passed,
        files: vec![path],
        summary: format!(
            "catalog: {} entries, {} omitted, {mismatches} mismatches",
            cat.entries.len(),
            cat.omitted.len()
        ),
    })
}
