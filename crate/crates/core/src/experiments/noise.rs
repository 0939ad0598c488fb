//! Readout-error model: asymmetric assignment fidelities plus optional shot
//! noise.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derived_rng, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    /// P(read 0 | state 0).
    pub f00: f64,
    /// P(read 1 | state 1).
    pub f11: f64,
    /// Measurement shots per estimate; 0 keeps exact probabilities.
    pub shots: u64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            f00: 0.971,
            f11: 0.937,
            shots: 0,
            seed: 0,
        }
    }
}

impl NoiseModel {
    /// Perfect readout, exact probabilities.
    pub fn ideal() -> Self {
        NoiseModel {
            f00: 1.0,
            f11: 1.0,
            shots: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, f) in [("noise.f00", self.f00), ("noise.f11", self.f11)] {
            if !(f > 0.5 && f <= 1.0) {
                return Err(Error::Config {
                    key: key.into(),
                    message: format!("must lie in (0.5, 1], got {f}"),
                });
            }
        }
        Ok(())
    }

    /// Excitation probability seen through the confusion matrix.
    pub fn measured_probability(&self, p: f64) -> f64 {
        p * self.f11 + (1.0 - p) * (1.0 - self.f00)
    }

    /// Noisy estimate for output `index`, drawn from the stream
    /// `(seed, "readout", index)`.
    pub fn observe(&self, p: f64, index: u64) -> Result<f64> {
        apply_readout_noise(p, self, &mut derived_rng(self.seed, "readout", index))
    }

    pub fn observe_all(&self, probs: &[f64]) -> Result<Vec<f64>> {
        probs
            .iter()
            .enumerate()
            .map(|(i, &p)| self.observe(p, i as u64))
            .collect()
    }
}

pub fn apply_readout_noise(p: f64, model: &NoiseModel, rng: &mut Rng) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    model.validate()?;
    let pm = model.measured_probability(p).clamp(0.0, 1.0);
    if model.shots == 0 {
        return Ok(pm);
    }
    let dist = Binomial::new(model.shots, pm)
        .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?;
    Ok(dist.sample(rng) as f64 / model.shots as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn confusion_endpoints() {
        let m = NoiseModel::default();
        let mut rng = rng_from_seed(0);
        assert!((apply_readout_noise(0.0, &m, &mut rng).unwrap() - 0.029).abs() < 1e-15);
        assert!((apply_readout_noise(1.0, &m, &mut rng).unwrap() - 0.937).abs() < 1e-15);
    }

    #[test]
    fn ideal_is_identity() {
        let m = NoiseModel::ideal();
        let mut rng = rng_from_seed(0);
        for p in [0.0, 0.123, 0.5, 1.0] {
            assert_eq!(apply_readout_noise(p, &m, &mut rng).unwrap(), p);
        }
    }

    #[test]
    fn shots_are_unbiased() {
        let m = NoiseModel {
            shots: 100,
            seed: 9,
            ..NoiseModel::ideal()
        };
        let n = 4000;
        let mean: f64 = (0..n).map(|i| m.observe(0.3, i).unwrap()).sum::<f64>() / n as f64;
        // σ of the mean ≈ sqrt(0.21/100/4000) ≈ 7e-4
        assert!((mean - 0.3).abs() < 4e-3, "{mean}");
        assert_eq!(m.observe(0.3, 5).unwrap(), m.observe(0.3, 5).unwrap());
    }

    #[test]
    fn rejects_bad_fidelity() {
        let m = NoiseModel {
            f00: 0.4,
            ..NoiseModel::default()
        };
        assert!(matches!(m.validate(), Err(Error::Config { key, .. }) if key == "noise.f00"));
    }
}
