//! Adam with per-coordinate learning rates, used in gradient-ascent mode by
//! the policy trainer (angles and inverse temperatures learn at very
//! different rates).

/// First/second-moment state across updates.
#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(dim: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Adam { beta1, beta2, epsilon, t: 0, m: vec![0.0; dim], v: vec![0.0; dim] }
    }

    /// Steps count so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Applies one ascent step `params += lr * m_hat / (sqrt(v_hat) + eps)`.
    /// `lrs` supplies the per-coordinate learning rate.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lrs: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] += lrs[i] * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut adam = Adam::new(3, 0.9, 0.999, 1e-8);
        let mut params = vec![1.0, -2.0, 0.5];
        let before = params.clone();
        adam.step(&mut params, &[0.0; 3], &[0.1; 3]);
        assert_eq!(params, before);
    }

    #[test]
    fn first_step_moves_by_about_lr() {
        // With bias correction, the first step is lr * g/|g| (up to epsilon).
        let mut adam = Adam::new(1, 0.9, 0.999, 1e-8);
        let mut params = vec![0.0];
        adam.step(&mut params, &[3.7], &[0.5]);
        assert!((params[0] - 0.5).abs() < 1e-6);

        let mut adam = Adam::new(1, 0.9, 0.999, 1e-8);
        let mut params = vec![0.0];
        adam.step(&mut params, &[-3.7], &[0.5]);
        assert!((params[0] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn ascends_a_quadratic() {
        // Maximize -(x - 2)^2.
        let mut adam = Adam::new(1, 0.9, 0.999, 1e-8);
        let mut params = vec![-1.0];
        for _ in 0..2000 {
            let g = -2.0 * (params[0] - 2.0);
            adam.step(&mut params, &[g], &[0.05]);
        }
        assert!((params[0] - 2.0).abs() < 1e-3);
    }
}
