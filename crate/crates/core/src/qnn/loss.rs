use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities are clipped to `[PROB_CLIP, 1 - PROB_CLIP]` inside the loss.
pub const PROB_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Localized,
    Ergodic,
}

impl Label {
    /// `1` for ergodic, `0` for localized.
    pub fn y(self) -> f64 {
        match self {
            Label::Ergodic => 1.0,
            Label::Localized => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ergodic => "ergodic",
            Label::Localized => "localized",
        }
    }
}

fn clip(p: f64) -> f64 {
    p.clamp(PROB_CLIP, 1.0 - PROB_CLIP)
}

/// Weighted cross-entropy of one sample, `-w [y ln p + (1-y) ln(1-p)]`.
pub fn sample_loss(p: f64, label: Label, weight: f64) -> f64 {
    let p = clip(p);
    let y = label.y();
    -(y * weight * p.ln() + (1.0 - y) * weight * (1.0 - p).ln())
}

/// `∂ sample_loss / ∂p` evaluated at the clipped probability.
pub fn bce_loss_derivative(p: f64, label: Label, weight: f64) -> f64 {
    let p = clip(p);
    let y = label.y();
    -y * weight / p + (1.0 - y) * weight / (1.0 - p)
}

/// Mean weighted binary cross-entropy over the batch.
pub fn bce_loss(probs: &[f64], labels: &[Label], weights: &[f64]) -> Result<f64> {
    if probs.len() != labels.len() || probs.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: if labels.len() != probs.len() {
                labels.len()
            } else {
                weights.len()
            },
        });
    }
    if probs.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let total: f64 = probs
        .iter()
        .zip(labels)
        .zip(weights)
        .map(|((&p, &y), &w)| sample_loss(p, y, w))
        .sum();
    Ok(total / probs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let l = bce_loss(&[0.5], &[Label::Ergodic], &[1.0]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        let l = bce_loss(&[0.5], &[Label::Ergodic], &[3.0]).unwrap();
        assert!((l - 3.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let l = bce_loss(&[1.0], &[Label::Ergodic], &[3.0]).unwrap();
        assert!(l.abs() < 1e-10);
        assert!(bce_loss(&[0.5, 0.2], &[Label::Ergodic], &[1.0]).is_err());
        assert!(bce_loss(&[0.0], &[Label::Ergodic], &[1.0]).unwrap().is_finite());
    }

    proptest! {
        #[test]
        fn derivative_sign(p in 0.001f64..0.999, w in 0.1f64..5.0) {
            prop_assert!(bce_loss_derivative(p, Label::Ergodic, w) < 0.0);
            prop_assert!(bce_loss_derivative(p, Label::Localized, w) > 0.0);
        }

        #[test]
        fn permutation_invariant(
            rows in prop::collection::vec((0.0f64..1.0, any::<bool>(), 0.5f64..3.0), 1..20),
            rot in 0usize..20,
        ) {
            let unpack = |r: &[(f64, bool, f64)]| {
                let p: Vec<f64> = r.iter().map(|x| x.0).collect();
                let y: Vec<Label> = r
                    .iter()
                    .map(|x| if x.1 { Label::Ergodic } else { Label::Localized })
                    .collect();
                let w: Vec<f64> = r.iter().map(|x| x.2).collect();
                (p, y, w)
            };
            let (p, y, w) = unpack(&rows);
            let mut shuffled = rows.clone();
            shuffled.rotate_left(rot % rows.len());
            shuffled.reverse();
            let (p2, y2, w2) = unpack(&shuffled);
            let a = bce_loss(&p, &y, &w).unwrap();
            let b = bce_loss(&p2, &y2, &w2).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn analytic_derivative_matches_difference(p in 0.01f64..0.99, w in 0.5f64..3.0, erg in any::<bool>()) {
            let y = if erg { Label::Ergodic } else { Label::Localized };
            let h = 1e-6;
            let fd = (sample_loss(p + h, y, w) - sample_loss(p - h, y, w)) / (2.0 * h);
            prop_assert!((fd - bce_loss_derivative(p, y, w)).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }
}
