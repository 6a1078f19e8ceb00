//! Integrating controller outputs into torques, for tasks where the network
//! commands changes rather than absolute values.

/// `clamp(previous + output * scale, -limit, limit)` per joint.
pub fn integrate_torque(previous: &[f64], outputs: &[f64], limits: &[f64], scale: f64) -> Vec<f64> {
    assert_eq!(previous.len(), outputs.len());
    assert_eq!(previous.len(), limits.len());
    previous
        .iter()
        .zip(outputs)
        .zip(limits)
        .map(|((&p, &y), &l)| (p + y * scale).clamp(-l, l))
        .collect()
}

/// Holds the running torque vector between control steps.
#[derive(Clone, Debug)]
pub struct TorqueIntegrator {
    torque: Vec<f64>,
    limits: Vec<f64>,
    scale: f64,
}

impl TorqueIntegrator {
    pub fn new(limits: Vec<f64>, scale: f64) -> Self {
        TorqueIntegrator {
            torque: vec![0.0; limits.len()],
            limits,
            scale,
        }
    }

    pub fn apply(&mut self, outputs: &[f64]) -> &[f64] {
        self.torque = integrate_torque(&self.torque, outputs, &self.limits, self.scale);
        &self.torque
    }

    pub fn torque(&self) -> &[f64] {
        &self.torque
    }

    pub fn reset(&mut self) {
        self.torque.fill(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturates_at_limits() {
        let mut t = TorqueIntegrator::new(vec![1.0, 2.0], 0.4);
        for _ in 0..10 {
            t.apply(&[1.0, -1.0]);
        }
        assert_eq!(t.torque(), &[1.0, -2.0]);
        t.apply(&[-1.0, 0.5]);
        assert!((t.torque()[0] - 0.6).abs() < 1e-12);
        assert!((t.torque()[1] + 1.8).abs() < 1e-12);
    }

    #[test]
    fn increments_previous_torque() {
        let t = integrate_torque(&[0.2], &[0.3], &[1.0], 1.0);
        assert!((t[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_output_holds() {
        assert_eq!(integrate_torque(&[0.3, -0.2], &[0.0, 0.0], &[1.0, 1.0], 5.0), vec![0.3, -0.2]);
    }
}
