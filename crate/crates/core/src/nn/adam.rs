use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-parameter first/second moment accumulators with bias correction.
#[derive(Clone, Debug)]
pub struct AdamState {
    config: AdamConfig,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    step_count: u64,
}

impl AdamState {
    /// `shapes` are the lengths of the parameter slices, in update order.
    pub fn new(config: AdamConfig, shapes: &[usize]) -> Self {
        Self {
            config,
            first_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn step(&mut self, params: Vec<&mut [f64]>, grads: &[&[f64]]) -> Result<()> {
        ensure!(
            params.len() == self.first_moment.len() && grads.len() == params.len(),
            Dimension,
            "optimizer tracks {} tensors, got {} params and {} grads",
            self.first_moment.len(),
            params.len(),
            grads.len()
        );
        self.step_count += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step_count as i32;
        let bias1 = 1.0 - beta1.powi(t);
        let bias2 = 1.0 - beta2.powi(t);
        for (((p, g), m), v) in params
            .into_iter()
            .zip(grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            ensure!(
                p.len() == g.len() && p.len() == m.len(),
                Dimension,
                "parameter tensor has {} entries, gradient {}, state {}",
                p.len(),
                g.len(),
                m.len()
            );
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_loss_decreases_for_fifty_steps() {
        let mut w = vec![1.0, 1.0];
        let mut adam = AdamState::new(AdamConfig::default(), &[2]);
        let loss = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>();
        let mut prev = loss(&w);
        for _ in 0..50 {
            let g: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
            adam.step(vec![w.as_mut_slice()], &[g.as_slice()]).unwrap();
            let l = loss(&w);
            assert!(l < prev);
            prev = l;
        }
        assert_eq!(adam.step_count(), 50);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut w = vec![0.5];
        let mut adam = AdamState::new(AdamConfig::default(), &[1]);
        adam.step(vec![w.as_mut_slice()], &[&[3.0]]).unwrap();
        assert!((w[0] - (0.5 - 1e-3)).abs() < 1e-9);
    }

    #[test]
    fn rejects_mismatched_tensors() {
        let mut w = vec![0.0; 3];
        let mut adam = AdamState::new(AdamConfig::default(), &[3]);
        assert!(adam.step(vec![w.as_mut_slice()], &[&[1.0]]).is_err());
    }
}
