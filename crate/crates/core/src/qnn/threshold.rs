use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{mean, std_dev};

use super::loss::Label;

/// Ergodic when `p >= threshold`, localized otherwise.
pub fn classify(p: f64, threshold: f64) -> Label {
    if p < threshold {
        Label::Localized
    } else {
        Label::Ergodic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub std: f64,
}

/// Sample mean and standard deviation.
pub fn gaussian_fit(values: &[f64]) -> Result<GaussianFit> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot fit an empty sample".into()));
    }
    Ok(GaussianFit {
        mean: mean(values),
        std: std_dev(values),
    })
}

/// Intersection of the two per-class Gaussian densities that lies between the
/// class means; midpoint of the means when there is no such point or a class
/// has zero spread.
pub fn calibrate_threshold(probs: &[f64], labels: &[Label]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: labels.len(),
        });
    }
    let split = |target: Label| -> Vec<f64> {
        probs
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == target)
            .map(|(&p, _)| p)
            .collect()
    };
    let erg = split(Label::Ergodic);
    let loc = split(Label::Localized);
    if erg.is_empty() || loc.is_empty() {
        return Err(Error::SingleClass);
    }
    let a = gaussian_fit(&loc)?;
    let b = gaussian_fit(&erg)?;
    Ok(gaussian_intersection(a, b))
}

fn gaussian_intersection(a: GaussianFit, b: GaussianFit) -> f64 {
    let mid = 0.5 * (a.mean + b.mean);
    if a.std <= 0.0 || b.std <= 0.0 || a.mean == b.mean {
        return mid;
    }
    let (lo, hi) = if a.mean < b.mean {
        (a.mean, b.mean)
    } else {
        (b.mean, a.mean)
    };
    let (va, vb) = (a.std * a.std, b.std * b.std);
    // ln N(x; a) = ln N(x; b)  ⇔  qa x² + qb x + qc = 0
    let qa = 1.0 / vb - 1.0 / va;
    let qb = 2.0 * (a.mean / va - b.mean / vb);
    let qc = b.mean * b.mean / vb - a.mean * a.mean / va + 2.0 * (b.std / a.std).ln();
    let roots: Vec<f64> = if qa.abs() < 1e-14 * (1.0 / va + 1.0 / vb) {
        vec![-qc / qb]
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return mid;
        }
        let sq = disc.sqrt();
        vec![(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)]
    };
    roots
        .into_iter()
        .filter(|x| x.is_finite() && *x >= lo && *x <= hi)
        .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()))
        .unwrap_or(mid)
}
