use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    /// Plain gradient descent.
    Sgd,
}

#[derive(Debug, Clone)]
pub enum Optimizer {
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        m: Vec<f64>,
        v: Vec<f64>,
        t: i32,
    },
    Sgd {
        lr: f64,
    },
}

impl Optimizer {
    pub fn adam(dim: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Optimizer::Adam {
            lr,
            beta1,
            beta2,
            eps,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    pub fn sgd(lr: f64) -> Self {
        Optimizer::Sgd { lr }
    }

    pub fn step(&mut self, x: &mut [f64], grad: &[f64]) {
        match self {
            Optimizer::Sgd { lr } => {
                for (xi, g) in x.iter_mut().zip(grad) {
                    *xi -= *lr * g;
                }
            }
            Optimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
                m,
                v,
                t,
            } => {
                *t += 1;
                let c1 = 1.0 - beta1.powi(*t);
                let c2 = 1.0 - beta2.powi(*t);
                for i in 0..x.len() {
                    m[i] = *beta1 * m[i] + (1.0 - *beta1) * grad[i];
                    v[i] = *beta2 * v[i] + (1.0 - *beta2) * grad[i] * grad[i];
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    x[i] -= *lr * m_hat / (v_hat.sqrt() + *eps);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut x = vec![0.3, 1.2];
        let mut opt = Optimizer::adam(2, 0.05, 0.9, 0.999, 1e-8);
        for _ in 0..10 {
            opt.step(&mut x, &[0.0, 0.0]);
        }
        assert_eq!(x, vec![0.3, 1.2]);
    }

    #[test]
    fn minimizes_a_quadratic() {
        for mut opt in [Optimizer::adam(1, 0.1, 0.9, 0.999, 1e-8), Optimizer::sgd(0.1)] {
            let mut x = vec![3.0];
            for _ in 0..500 {
                let g = [2.0 * (x[0] - 1.0)];
                opt.step(&mut x, &g);
            }
            assert!((x[0] - 1.0).abs() < 1e-2);
        }
    }
}
