//! Versioned JSON experiment configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use weightlab_core::geometry::QuadratureSpec;
use weightlab_core::operators::{CommutatorSpec, Kernel, Symbol};
use weightlab_core::params::{to_f64, GridWindow};
use weightlab_core::weights::{catalog, BallSamplePlan, NumericOptions};
use weightlab_core::{Setting, Weight, WeightPair};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Which weight pair an experiment runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PairSpec {
    /// Key of the example catalog instantiated at the configured setting.
    Catalog(String),
    Explicit {
        w: Weight,
        v: Weight,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    /// `|x|^{α-n}` with `α` from the setting.
    Fractional,
    Hilbert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolSpec {
    /// `|x|^δ`.
    #[default]
    Power,
    /// `sin(x₁)`.
    Sine,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionMapSpec {
    /// Defaults to the window derived from the setting.
    pub window: Option<GridWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoremSpec {
    /// Half-sides `A` of the boxes `[-A, A]ⁿ` supporting the test functions.
    pub boxes: Vec<f64>,
    /// Number of random smooth factors `g` per box.
    pub functions: usize,
    /// Largest admissible max/min of the seminorm ratios.
    pub bound: f64,
    /// Largest admissible max/min of each lemma ratio.
    pub lemma_bound: f64,
    /// Balls on which the oscillation seminorm is sampled.
    pub plan: BallSamplePlan,
    /// Lemma balls are `B(0, lemma_ball · A)`.
    pub lemma_ball: f64,
    /// Run with `f ≡ 0` instead of the function family.
    pub zero_function: bool,
    /// Relative tolerance of the operator evaluations and of the integrals
    /// over plan balls; ratios are compared up to a factor, so this is loose.
    pub rel_tol: f64,
}

impl Default for TheoremSpec {
    fn default() -> Self {
        TheoremSpec {
            boxes: vec![1.0, 4.0, 16.0],
            functions: 5,
            bound: 5.0,
            lemma_bound: 3.0,
            plan: BallSamplePlan {
                r_min: 0.1,
                r_max: 10.0,
                radii: 5,
                center_min: 0.1,
                center_max: 10.0,
                centers: 5,
                ..BallSamplePlan::default()
            },
            lemma_ball: 0.125,
            zero_function: false,
            rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSpec {
    /// Radius of the centered ball `B(0, R)`.
    pub radius: f64,
    /// Truncations `M = 2^j R` for `j = 1..=doublings`.
    pub doublings: u32,
    /// Required R² of the divergence fit.
    pub min_r2: f64,
    /// Cauchy tolerance for convergent sequences.
    pub cauchy_tol: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            radius: 1.0,
            doublings: 40,
            min_r2: 0.99,
            cauchy_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub setting: Setting,
    #[serde(default)]
    pub pair: Option<PairSpec>,
    /// Defaults to fractional when `α > 0`, Hilbert otherwise.
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub plan: BallSamplePlan,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub numeric: NumericOptions,
    #[serde(default)]
    pub region_map: RegionMapSpec,
    #[serde(default)]
    pub theorem: TheoremSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(setting: Setting) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            setting,
            pair: None,
            kernel: None,
            symbol: SymbolSpec::default(),
            plan: BallSamplePlan::default(),
            quadrature: QuadratureSpec::default(),
            numeric: NumericOptions::default(),
            region_map: RegionMapSpec::default(),
            theorem: TheoremSpec::default(),
            scan: ScanSpec::default(),
            seed: 0,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Canonical serialization: field order is fixed by the type.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }

    /// Hex sha256 of the canonical serialization.
    pub fn digest(&self) -> String {
        let d = Sha256::digest(self.canonical().as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn pair(&self) -> CliResult<(WeightPair, Option<catalog::CatalogEntry>)> {
        match &self.pair {
            None => Err(CliError::Config("this command needs a `pair`".into())),
            Some(PairSpec::Explicit { w, v }) => Ok((WeightPair::new(w.clone(), v.clone()), None)),
            Some(PairSpec::Catalog(key)) => {
                let cat = catalog::catalog(&self.setting)?;
                match cat.get(key) {
                    Some(e) => Ok((e.pair.clone(), Some(e.clone()))),
                    None => {
                        let family = key.split(',').next().unwrap_or(key);
                        let why = cat
                            .omitted
                            .iter()
                            .find(|o| o.key == *key || o.key == family || o.key == "*")
                            .map(|o| o.reason.clone());
                        Err(CliError::Config(match why {
                            Some(r) => format!("catalog entry {key} is not available here: {r}"),
                            None => format!("unknown catalog key {key}"),
                        }))
                    }
                }
            }
        }
    }

    pub fn kernel(&self) -> CliResult<Kernel> {
        let s = &self.setting;
        let alpha = to_f64(s.alpha());
        let spec = self.kernel.unwrap_or(if alpha > 0.0 {
            KernelSpec::Fractional
        } else {
            KernelSpec::Hilbert
        });
        Ok(match spec {
            KernelSpec::Fractional => Kernel::fractional(alpha, s.n())?,
            KernelSpec::Hilbert => {
                if alpha != 0.0 {
                    return Err(CliError::Config(
                        "the Hilbert kernel needs alpha = 0".into(),
                    ));
                }
                Kernel::Hilbert
            }
        })
    }

    pub fn symbol(&self) -> CliResult<Symbol> {
        let s = &self.setting;
        let delta = to_f64(s.delta());
        Ok(match self.symbol {
            SymbolSpec::Power => Symbol::power(s.n(), delta)?,
            SymbolSpec::Sine => Symbol::sine(s.n(), delta)?,
        })
    }

    pub fn commutator(&self) -> CliResult<CommutatorSpec> {
        Ok(CommutatorSpec::new(
            self.kernel()?,
            self.symbol()?,
            self.setting.m(),
            self.setting.n(),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use weightlab_core::params::{q, Exponent};

    fn base() -> ExperimentConfig {
        let s = Setting::exact(
            1,
            q(1, 2),
            q(3, 10),
            1,
            q(1, 1),
            Exponent::Finite(q(4, 1)),
            q(1, 5),
        )
        .unwrap();
        let mut c = ExperimentConfig::new(s);
        c.pair = Some(PairSpec::Explicit {
            w: Weight::constant(),
            v: Weight::power(q(-7, 20)),
        });
        c
    }

    #[test]
    fn round_trip_is_lossless() {
        let c = base();
        let back = ExperimentConfig::from_json(&c.canonical()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.digest(), c.digest());
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&base().canonical()).unwrap();
        v["surprise"] = serde_json::json!(1);
        assert!(matches!(
            ExperimentConfig::from_json(&v.to_string()),
            Err(CliError::Config(_))
        ));
        let mut v: serde_json::Value = serde_json::from_str(&base().canonical()).unwrap();
        v["schema_version"] = serde_json::json!(2);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn minimal_config_parses() {
        let text = r#"{"schema_version": 1,
            "setting": {"n": 1, "alpha": "1/2", "delta": "3/10", "m": 1, "r": "4", "delta_tilde": "1/5"},
            "pair": {"catalog": "power-v"}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert!(c.pair().is_ok());
        assert!(matches!(c.kernel().unwrap(), Kernel::Fractional { .. }));
    }

    #[test]
    fn digest_tracks_content() {
        let a = base();
        let mut b = base();
        b.seed = 7;
        assert_ne!(a.digest(), b.digest());
    }
}
