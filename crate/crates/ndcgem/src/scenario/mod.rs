//! Wind availability scenarios: beta sampling and fast-forward reduction.
//!
//! Sampling uses ChaCha8 seeded from a `u64`, so scenario sets are
//! reproducible across runs and platforms. Hours are drawn independently.

mod reduce;

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::JointSystem;

pub use reduce::{fast_forward_reduce, Reduction};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("beta parameters infeasible: variance {variance} must lie in (0, {limit}) for mean {mean}")]
    InfeasibleBeta { mean: f64, variance: f64, limit: f64 },
    #[error("cannot reduce {n} samples to {k} scenarios")]
    BadReduction { n: usize, k: usize },
    #[error("wind farm {0} has no hourly mean/variance for sampling")]
    MissingForecast(String),
    #[error("scenario file: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Method-of-moments beta shape parameters for a given mean and variance.
pub fn fit_beta(mean: f64, variance: f64) -> Result<(f64, f64), ScenarioError> {
    let limit = mean * (1.0 - mean);
    if !(mean > 0.0 && mean < 1.0 && variance > 0.0 && variance < limit) {
        return Err(ScenarioError::InfeasibleBeta {
            mean,
            variance,
            limit,
        });
    }
    let k = limit / variance - 1.0;
    Ok((mean * k, (1.0 - mean) * k))
}

/// Hourly beta distribution of the availability fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSpec {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl BetaSpec {
    pub fn shapes(&self) -> Result<Vec<(f64, f64)>, ScenarioError> {
        self.mean
            .iter()
            .zip(&self.variance)
            .map(|(&m, &v)| fit_beta(m, v))
            .collect()
    }
}

fn draw(rng: &mut ChaCha8Rng, dists: &[Beta<f64>], capacity: f64) -> Vec<f64> {
    dists
        .iter()
        .map(|d| (capacity * d.sample(rng)).clamp(0.0, capacity))
        .collect()
}

fn distributions(spec: &BetaSpec) -> Result<Vec<Beta<f64>>, ScenarioError> {
    spec.shapes()?
        .into_iter()
        .map(|(a, b)| {
            Beta::new(a, b).map_err(|e| ScenarioError::Invalid(format!("beta({a}, {b}): {e}")))
        })
        .collect()
}

/// `n` hourly profiles in MW, each value `capacity` times a beta draw.
pub fn sample_profiles(
    spec: &BetaSpec,
    capacity: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ScenarioError> {
    let dists = distributions(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| draw(&mut rng, &dists, capacity)).collect())
}

/// One weighted wind outcome: `profiles[farm][hour]` in MW.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub weight: f64,
    pub profiles: Vec<Vec<f64>>,
}

/// DA forecast plus weighted RT scenarios. Farms follow system order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub da_forecast: Vec<Vec<f64>>,
    pub rt: Vec<Scenario>,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioEntryFile {
    weight: f64,
    profiles: BTreeMap<String, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioSetFile {
    da_forecast: BTreeMap<String, Vec<f64>>,
    rt_scenarios: Vec<ScenarioEntryFile>,
}

fn farm_specs(sys: &JointSystem) -> Result<Vec<BetaSpec>, ScenarioError> {
    sys.windfarms
        .iter()
        .map(|w| {
            if w.mean_fraction.is_empty() {
                Err(ScenarioError::MissingForecast(w.id.clone()))
            } else {
                Ok(BetaSpec {
                    mean: w.mean_fraction.clone(),
                    variance: w.variance_fraction.clone(),
                })
            }
        })
        .collect()
}

/// Draws `n` joint samples `[sample][farm][hour]` for every farm in the
/// system from one seeded stream.
pub fn sample_system(
    sys: &JointSystem,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>, ScenarioError> {
    let dists: Vec<Vec<Beta<f64>>> = farm_specs(sys)?
        .iter()
        .map(distributions)
        .collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            dists
                .iter()
                .zip(&sys.windfarms)
                .map(|(d, w)| draw(&mut rng, d, w.capacity))
                .collect()
        })
        .collect())
}

impl ScenarioSet {
    /// DA forecast at the hourly mean; RT scenarios from `n_samples` draws
    /// reduced to `k` by fast-forward selection.
    pub fn generate(
        sys: &JointSystem,
        n_samples: usize,
        k: usize,
        seed: u64,
    ) -> Result<Self, ScenarioError> {
        if k == 0 || k > n_samples {
            return Err(ScenarioError::BadReduction { n: n_samples, k });
        }
        let specs = farm_specs(sys)?;
        let da_forecast = specs
            .iter()
            .zip(&sys.windfarms)
            .map(|(s, w)| s.mean.iter().map(|m| m * w.capacity).collect())
            .collect();
        let samples = sample_system(sys, n_samples, seed)?;
        let flat: Vec<Vec<f64>> = samples.iter().map(|s| s.concat()).collect();
        let weights = vec![1.0 / n_samples as f64; n_samples];
        let red = fast_forward_reduce(&flat, &weights, k)?;
        let rt = red
            .selected
            .iter()
            .zip(&red.weights)
            .map(|(&i, &w)| Scenario {
                weight: w,
                profiles: samples[i].clone(),
            })
            .collect();
        Ok(Self {
            da_forecast,
            rt,
            seed: Some(seed),
        })
    }

    /// A set whose DA forecast is also its only RT scenario.
    pub fn deterministic(da_forecast: Vec<Vec<f64>>) -> Self {
        Self {
            rt: vec![Scenario {
                weight: 1.0,
                profiles: da_forecast.clone(),
            }],
            da_forecast,
            seed: None,
        }
    }

    pub fn load(path: impl AsRef<Path>, sys: &JointSystem) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, sys)
    }

    pub fn from_json(text: &str, sys: &JointSystem) -> Result<Self, ScenarioError> {
        let file: ScenarioSetFile = serde_json::from_str(text)?;
        let pick = |m: &BTreeMap<String, Vec<f64>>, what: &str| -> Result<Vec<Vec<f64>>, ScenarioError> {
            if let Some(extra) = m.keys().find(|k| !sys.windfarms.iter().any(|w| &&w.id == k)) {
                return Err(ScenarioError::Invalid(format!("{what}: unknown wind farm {extra}")));
            }
            sys.windfarms
                .iter()
                .map(|w| {
                    m.get(&w.id).cloned().ok_or_else(|| {
                        ScenarioError::Invalid(format!("{what}: missing wind farm {}", w.id))
                    })
                })
                .collect()
        };
        let set = ScenarioSet {
            da_forecast: pick(&file.da_forecast, "da_forecast")?,
            rt: file
                .rt_scenarios
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    Ok(Scenario {
                        weight: s.weight,
                        profiles: pick(&s.profiles, &format!("rt_scenarios[{i}]"))?,
                    })
                })
                .collect::<Result<_, ScenarioError>>()?,
            seed: None,
        };
        set.validate(sys)?;
        Ok(set)
    }

    pub fn to_json(&self, sys: &JointSystem) -> String {
        let named = |p: &[Vec<f64>]| -> BTreeMap<String, Vec<f64>> {
            sys.windfarms.iter().map(|w| w.id.clone()).zip(p.iter().cloned()).collect()
        };
        let file = ScenarioSetFile {
            da_forecast: named(&self.da_forecast),
            rt_scenarios: self
                .rt
                .iter()
                .map(|s| ScenarioEntryFile {
                    weight: s.weight,
                    profiles: named(&s.profiles),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("scenario set serializes")
    }

    pub fn validate(&self, sys: &JointSystem) -> Result<(), ScenarioError> {
        let t = sys.horizon;
        let check = |p: &[Vec<f64>], what: &str| -> Result<(), ScenarioError> {
            for (w, prof) in sys.windfarms.iter().zip(p) {
                if prof.len() != t {
                    return Err(ScenarioError::Invalid(format!(
                        "{what}: {} has {} hours, horizon is {t}",
                        w.id,
                        prof.len()
                    )));
                }
                if prof.iter().any(|&v| !(v >= 0.0 && v <= w.capacity + 1e-9)) {
                    return Err(ScenarioError::Invalid(format!(
                        "{what}: {} outside [0, {}]",
                        w.id, w.capacity
                    )));
                }
            }
            Ok(())
        };
        check(&self.da_forecast, "da_forecast")?;
        if self.rt.is_empty() {
            return Err(ScenarioError::Invalid("no RT scenarios".into()));
        }
        for (i, s) in self.rt.iter().enumerate() {
            check(&s.profiles, &format!("rt_scenarios[{i}]"))?;
            if !(s.weight > 0.0) {
                return Err(ScenarioError::Invalid(format!(
                    "rt_scenarios[{i}]: weight must be positive"
                )));
            }
        }
        let total: f64 = self.rt.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ScenarioError::Invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_beta_examples() {
        let (a, b) = fit_beta(0.5, 0.05).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        assert!(fit_beta(0.5, 0.25).is_err());
        let (a, b) = fit_beta(0.2, 0.02).unwrap();
        let m = a / (a + b);
        let v = a * b / ((a + b).powi(2) * (a + b + 1.0));
        assert!((m - 0.2).abs() < 1e-12 && (v - 0.02).abs() < 1e-12);
    }

    #[test]
    fn sample_mean_within_three_standard_errors() {
        let spec = BetaSpec {
            mean: vec![0.4, 0.6],
            variance: vec![0.03, 0.01],
        };
        let n = 5000;
        let s = sample_profiles(&spec, 100.0, n, 7).unwrap();
        assert_eq!(s.len(), n);
        for h in 0..2 {
            let mean = s.iter().map(|p| p[h]).sum::<f64>() / n as f64;
            let se = 100.0 * (spec.variance[h] / n as f64).sqrt();
            assert!((mean - 100.0 * spec.mean[h]).abs() < 3.0 * se, "hour {h}: {mean}");
        }
    }

    #[test]
    fn degenerate_variance_collapses_to_mean() {
        let spec = BetaSpec {
            mean: vec![0.3],
            variance: vec![1e-9],
        };
        for p in sample_profiles(&spec, 80.0, 200, 3).unwrap() {
            assert!((p[0] - 24.0).abs() < 1e-3 * 80.0);
        }
    }

    #[test]
    fn same_seed_same_samples() {
        let spec = BetaSpec {
            mean: vec![0.5; 24],
            variance: vec![0.02; 24],
        };
        assert_eq!(
            sample_profiles(&spec, 50.0, 100, 42).unwrap(),
            sample_profiles(&spec, 50.0, 100, 42).unwrap()
        );
        assert_ne!(
            sample_profiles(&spec, 50.0, 100, 42).unwrap(),
            sample_profiles(&spec, 50.0, 100, 43).unwrap()
        );
    }
}
