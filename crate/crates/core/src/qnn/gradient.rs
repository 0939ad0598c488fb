use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::StateVector;

use super::circuit::Qnn;
use super::loss::{bce_loss, bce_loss_derivative, sample_loss, Label};
use super::params::QnnParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    /// `½ [L(x + π/2) − L(x − π/2)]` on the loss, for every angle.
    PaperShift,
    /// Exact two-point shift on `p` for `φ`, central differences on `p` for
    /// `θ`, chained through the analytic `∂L/∂p`.
    #[default]
    ChainShift,
    /// Central differences of the loss.
    FiniteDifference,
}

/// A batch of prepared input states with labels and loss weights, bound to one
/// circuit. The loss is the mean weighted cross-entropy over the batch.
#[derive(Debug, Clone, Copy)]
pub struct SamplePipeline<'a> {
    pub qnn: &'a Qnn,
    pub states: &'a [StateVector],
    pub labels: &'a [Label],
    pub weights: &'a [f64],
}

impl<'a> SamplePipeline<'a> {
    pub fn new(
        qnn: &'a Qnn,
        states: &'a [StateVector],
        labels: &'a [Label],
        weights: &'a [f64],
    ) -> Result<Self> {
        if states.len() != labels.len() || states.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: labels.len().min(weights.len()),
            });
        }
        if states.is_empty() {
            return Err(Error::InvalidArgument("empty sample batch".into()));
        }
        Ok(SamplePipeline {
            qnn,
            states,
            labels,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Single-sample view.
    pub fn sample(&self, i: usize) -> SamplePipeline<'a> {
        SamplePipeline {
            qnn: self.qnn,
            states: &self.states[i..=i],
            labels: &self.labels[i..=i],
            weights: &self.weights[i..=i],
        }
    }

    pub fn probabilities(&self, params: &QnnParams) -> Result<Vec<f64>> {
        self.states
            .par_iter()
            .map(|s| self.qnn.forward(s, params))
            .collect()
    }

    pub fn loss(&self, params: &QnnParams) -> Result<f64> {
        bce_loss(&self.probabilities(params)?, self.labels, self.weights)
    }

    /// `(p(x_j + δ), p(x_j − δ))` for every sample and angle, in
    /// sample-major order. Evaluated concurrently, assembled in fixed order.
    fn shifted_probabilities(
        &self,
        params: &QnnParams,
        delta: impl Fn(usize) -> f64 + Sync,
    ) -> Result<Vec<(f64, f64)>> {
        let dim = params.dim();
        (0..self.len() * dim)
            .into_par_iter()
            .map(|task| {
                let (i, j) = (task / dim, task % dim);
                let d = delta(j);
                let plus = self.qnn.forward(&self.states[i], &params.shifted(j, d))?;
                let minus = self.qnn.forward(&self.states[i], &params.shifted(j, -d))?;
                Ok((plus, minus))
            })
            .collect()
    }
}

/// Gradient by shift rules (`PaperShift` or `ChainShift`). `FiniteDifference`
/// is forwarded to [`gradient_fd`] with `fd_step`. In chain-shift mode
/// `fd_step` is also the central-difference step for the `θ` angles.
pub fn gradient_shift(
    pipeline: &SamplePipeline<'_>,
    params: &QnnParams,
    mode: GradientMode,
    fd_step: f64,
) -> Result<Vec<f64>> {
    let n = pipeline.len() as f64;
    let dim = params.dim();
    match mode {
        GradientMode::FiniteDifference => gradient_fd(pipeline, params, fd_step),
        GradientMode::PaperShift => {
            let pairs = pipeline.shifted_probabilities(params, |_| FRAC_PI_2)?;
            let mut grad = vec![0.0; dim];
            for (task, (plus, minus)) in pairs.into_iter().enumerate() {
                let (i, j) = (task / dim, task % dim);
                let (y, w) = (pipeline.labels[i], pipeline.weights[i]);
                grad[j] += 0.5 * (sample_loss(plus, y, w) - sample_loss(minus, y, w)) / n;
            }
            Ok(grad)
        }
        GradientMode::ChainShift => {
            check_step(fd_step)?;
            let probs = pipeline.probabilities(params)?;
            let pairs = pipeline.shifted_probabilities(params, |j| {
                if params.is_phi(j) {
                    FRAC_PI_2
                } else {
                    fd_step
                }
            })?;
            let mut grad = vec![0.0; dim];
            for (task, (plus, minus)) in pairs.into_iter().enumerate() {
                let (i, j) = (task / dim, task % dim);
                let dp = if params.is_phi(j) {
                    0.5 * (plus - minus)
                } else {
                    (plus - minus) / (2.0 * fd_step)
                };
                let dl = bce_loss_derivative(probs[i], pipeline.labels[i], pipeline.weights[i]);
                grad[j] += dl * dp / n;
            }
            Ok(grad)
        }
    }
}

/// Central-difference gradient of the exact loss.
pub fn gradient_fd(pipeline: &SamplePipeline<'_>, params: &QnnParams, step: f64) -> Result<Vec<f64>> {
    check_step(step)?;
    let n = pipeline.len() as f64;
    let dim = params.dim();
    let pairs = pipeline.shifted_probabilities(params, |_| step)?;
    let mut grad = vec![0.0; dim];
    for (task, (plus, minus)) in pairs.into_iter().enumerate() {
        let (i, j) = (task / dim, task % dim);
        let (y, w) = (pipeline.labels[i], pipeline.weights[i]);
        grad[j] += (sample_loss(plus, y, w) - sample_loss(minus, y, w)) / (2.0 * step) / n;
    }
    Ok(grad)
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "difference step must be positive, got {step}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::statevec::basis_state;

    #[test]
    fn readout_phi_is_stationary_on_vacuum() {
        let l = LatticeSpec::grid(2, 2, 2.185).unwrap();
        let qnn = Qnn::new(&l, 200.0).unwrap();
        let states = vec![basis_state(&l, 0).unwrap()];
        let pipe = SamplePipeline::new(&qnn, &states, &[Label::Ergodic], &[1.0]).unwrap();
        let p = QnnParams::zeros(4, 1, 0).unwrap();
        let g = gradient_shift(&pipe, &p, GradientMode::ChainShift, 1e-5).unwrap();
        assert_eq!(g.len(), 10);
        assert!(g[p.dim() - 1].abs() < 1e-12);
    }

    #[test]
    fn fd_is_symmetric_in_step_sign() {
        let l = LatticeSpec::grid(1, 2, 2.185).unwrap();
        let qnn = Qnn::new(&l, 100.0).unwrap();
        let states = vec![basis_state(&l, 1).unwrap()];
        let pipe = SamplePipeline::new(&qnn, &states, &[Label::Localized], &[1.0]).unwrap();
        let mut rng = crate::seed::rng_from_seed(4);
        let p = QnnParams::random(2, 1, 0, &mut rng).unwrap();
        let a = gradient_fd(&pipe, &p, 1e-4).unwrap();
        // flipping the sign of the step swaps plus/minus: identical estimate
        let pairs = pipe.shifted_probabilities(&p, |_| -1e-4).unwrap();
        for (j, (plus, minus)) in pairs.into_iter().enumerate() {
            let b = (sample_loss(plus, Label::Localized, 1.0) - sample_loss(minus, Label::Localized, 1.0))
                / (2.0 * -1e-4);
            assert!((a[j] - b).abs() < 1e-12);
        }
        assert!(gradient_fd(&pipe, &p, 0.0).is_err());
    }

    #[test]
    fn flat_loss_has_zero_gradient() {
        // vacuum with every φ = 0 except none: p ≡ 0 for any θ; θ-gradient is zero
        let l = LatticeSpec::grid(1, 2, 2.185).unwrap();
        let qnn = Qnn::new(&l, 50.0).unwrap();
        let states = vec![basis_state(&l, 0).unwrap()];
        let pipe = SamplePipeline::new(&qnn, &states, &[Label::Ergodic], &[1.0]).unwrap();
        let p = QnnParams::zeros(2, 1, 0).unwrap();
        let g = gradient_fd(&pipe, &p, 1e-4).unwrap();
        for j in 0..p.num_rotations() {
            assert!(g[j].abs() < 1e-12);
        }
    }
}
