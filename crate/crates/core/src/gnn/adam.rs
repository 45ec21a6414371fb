use super::GnnError;

/// Adam moments for a list of parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    step_count: u64,
}

impl AdamState {
    /// Zeroed moments for blocks of the given lengths, with the usual
    /// `beta1 = 0.9`, `beta2 = 0.999`, `epsilon = 1e-8`.
    pub fn new(learning_rate: f64, block_lens: &[usize]) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: block_lens.iter().map(|&l| vec![0.0; l]).collect(),
            second_moment: block_lens.iter().map(|&l| vec![0.0; l]).collect(),
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.second_moment
    }
}

/// One bias-corrected Adam update applied in place.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
) -> Result<(), GnnError> {
    if params.len() != state.first_moment.len() || grads.len() != params.len() {
        return Err(GnnError::ShapeMismatch(format!(
            "{} parameter blocks, {} gradient blocks, optimizer holds {}",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    for (k, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.first_moment[k].len() {
            return Err(GnnError::ShapeMismatch(format!(
                "block {k}: {} parameters, {} gradients, optimizer holds {}",
                p.len(),
                g.len(),
                state.first_moment[k].len()
            )));
        }
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let lr = state.learning_rate;
    let eps = state.epsilon;
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.first_moment[k];
        let v = &mut state.second_moment[k];
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_parameters() {
        let mut s = AdamState::new(0.1, &[3]);
        let mut p = vec![1.0, -2.0, 3.0];
        adam_step(&mut s, &mut [&mut p], &[&[0.0; 3]]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
        assert_eq!(s.step_count(), 1);
    }

    #[test]
    fn first_step_is_signed_learning_rate() {
        let lr = 1e-3;
        let mut s = AdamState::new(lr, &[4]);
        let mut p = vec![0.0; 4];
        let g = [2.5, -0.01, 100.0, -7.0];
        adam_step(&mut s, &mut [&mut p], &[&g]).unwrap();
        for (pi, gi) in p.iter().zip(g) {
            assert!((pi + lr * gi.signum()).abs() < 1e-6, "{pi}");
        }
    }

    #[test]
    fn two_steps_by_hand() {
        let (lr, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-8);
        let mut s = AdamState::new(lr, &[1]);
        let mut p = vec![0.5];
        adam_step(&mut s, &mut [&mut p], &[&[0.2]]).unwrap();
        adam_step(&mut s, &mut [&mut p], &[&[-0.4]]).unwrap();

        let mut x = 0.5f64;
        let (mut m, mut v) = (0.0f64, 0.0f64);
        for (t, g) in [(1, 0.2f64), (2, -0.4)] {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            x -= lr * mh / (vh.sqrt() + eps);
        }
        assert!((p[0] - x).abs() < 1e-12);
        assert_eq!(s.step_count(), 2);
    }

    #[test]
    fn shape_mismatch() {
        let mut s = AdamState::new(0.1, &[2]);
        let mut p = vec![0.0; 3];
        assert!(matches!(
            adam_step(&mut s, &mut [&mut p], &[&[0.0; 3]]),
            Err(GnnError::ShapeMismatch(_))
        ));
        let mut p = vec![0.0; 2];
        assert!(matches!(
            adam_step(&mut s, &mut [&mut p], &[&[0.0; 2], &[0.0]]),
            Err(GnnError::ShapeMismatch(_))
        ));
        assert_eq!(s.step_count(), 0);
    }
}
