//! Deterministic families of test balls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Ball;

/// Log-uniform radii crossed with `{0} ∪` log-uniform center magnitudes along
/// fixed directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallSamplePlan {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub center_min: f64,
    pub center_max: f64,
    pub centers: usize,
    /// Relative jitter applied to center magnitudes (0 disables).
    pub jitter: f64,
    pub seed: u64,
}

impl Default for BallSamplePlan {
    fn default() -> Self {
        BallSamplePlan {
            r_min: 1e-4,
            r_max: 1e4,
            radii: 33,
            center_min: 1e-4,
            center_max: 1e4,
            centers: 33,
            jitter: 0.0,
            seed: 0,
        }
    }
}

/// One ball of an expanded plan with its grid coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanBall {
    pub ball: Ball,
    pub radius_index: usize,
    /// `None` for centered balls.
    pub center_index: Option<usize>,
    pub direction_index: usize,
}

pub fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

/// `±e₁` on the line, the eight compass directions in the plane.
pub fn directions(n: u32) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => (0..8)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_4 * k as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
    }
}

impl BallSamplePlan {
    /// Plan spanning `[lo, hi]` for both radii and centers with
    /// `per_decade` points per decade.
    pub fn decades(lo: f64, hi: f64, per_decade: usize) -> Self {
        let k = ((hi / lo).log10() * per_decade as f64).round() as usize + 1;
        BallSamplePlan {
            r_min: lo,
            r_max: hi,
            radii: k,
            center_min: lo,
            center_max: hi,
            centers: k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64, k: usize| lo > 0.0 && hi >= lo && hi.is_finite() && k >= 1;
        if !ok(self.r_min, self.r_max, self.radii)
            || !(self.centers == 0 || ok(self.center_min, self.center_max, self.centers))
        {
            return Err(Error::InvalidArgument(
                "plan ranges must be positive and increasing".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return Err(Error::InvalidArgument(format!(
                "jitter {} outside [0, 0.5)",
                self.jitter
            )));
        }
        Ok(())
    }

    pub fn radius_grid(&self) -> Vec<f64> {
        log_grid(self.r_min, self.r_max, self.radii)
    }

    pub fn center_grid(&self) -> Vec<f64> {
        if self.centers == 0 {
            return vec![];
        }
        let mut g = log_grid(self.center_min, self.center_max, self.centers);
        if self.jitter > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for c in g.iter_mut() {
                *c *= 1.0 + rng.gen_range(-self.jitter..self.jitter);
            }
        }
        g
    }

    /// Explicit ball list; identical for identical plans.
    pub fn expand(&self, n: u32) -> Result<Vec<PlanBall>> {
        self.validate()?;
        let radii = self.radius_grid();
        let centers = self.center_grid();
        let dirs = directions(n);
        let mut out = Vec::with_capacity(radii.len() * (1 + centers.len() * dirs.len()));
        for (j, &c) in std::iter::once(&0.0).chain(centers.iter()).enumerate() {
            let dir_list: &[Vec<f64>] = if j == 0 { &dirs[..1] } else { &dirs };
            for (d, u) in dir_list.iter().enumerate() {
                for (i, &r) in radii.iter().enumerate() {
                    let center = if j == 0 {
                        vec![0.0; n as usize]
                    } else {
                        u.iter().map(|x| x * c).collect()
                    };
                    out.push(PlanBall {
                        ball: Ball::new(center, r)?,
                        radius_index: i,
                        center_index: j.checked_sub(1),
                        direction_index: d,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Hex sha256 of the expanded ball list.
    pub fn digest(&self, n: u32) -> Result<String> {
        let balls = self.expand(n)?;
        let bytes =
            serde_json::to_vec(&balls).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(hex(&Sha256::digest(bytes)))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_shape() {
        let p = BallSamplePlan::default();
        let r = p.radius_grid();
        assert_eq!(r.len(), 33);
        assert!((r[0] - 1e-4).abs() < 1e-18 && (r[32] / 1e4 - 1.0).abs() < 1e-12);
        let balls = p.expand(1).unwrap();
        assert_eq!(balls.len(), 33 * (1 + 33 * 2));
        assert_eq!(p.expand(2).unwrap().len(), 33 * (1 + 33 * 8));
    }

    #[test]
    fn expansion_is_deterministic() {
        let p = BallSamplePlan {
            jitter: 0.1,
            seed: 7,
            ..Default::default()
        };
        assert_eq!(p.expand(1).unwrap(), p.expand(1).unwrap());
        assert_eq!(p.digest(1).unwrap(), p.digest(1).unwrap());
        let q = BallSamplePlan {
            seed: 8,
            ..p.clone()
        };
        assert_ne!(p.digest(1).unwrap(), q.digest(1).unwrap());
    }

    #[test]
    fn decade_plan() {
        let p = BallSamplePlan::decades(1e-3, 1e3, 4);
        assert_eq!(p.radii, 25);
    }
}
