//! Leapfrog integration of the Hamilton equations.
//!
//! The integrator is a sequence of shearing maps, so it preserves
//! phase-space volume exactly, and the final momentum flip makes the whole
//! trajectory map its own inverse. Step size and step count are jittered
//! per trajectory to avoid nonergodic resonances.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LeapfrogError {
    #[error("force evaluated non-finite along the trajectory")]
    NonFiniteForce,
}

/// Base step size and count plus fractional jitter half-widths.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectoryConfig {
    pub tau: f64,
    pub steps: usize,
    pub jitter_tau: f64,
    pub jitter_steps: f64,
}

impl TrajectoryConfig {
    pub fn new(tau: f64, steps: usize) -> Self {
        Self {
            tau,
            steps,
            jitter_tau: 0.1,
            jitter_steps: 0.1,
        }
    }

    pub fn validate(&self) -> bool {
        self.tau > 0.0
            && self.steps >= 1
            && (0.0..=0.5).contains(&self.jitter_tau)
            && (0.0..=0.5).contains(&self.jitter_steps)
    }
}

impl Default for TrajectoryConfig {
    /// Library defaults tuned for the qubit targets.
    fn default() -> Self {
        Self::new(0.1, 20)
    }
}

fn eval_force(
    force: &dyn Fn(&[f64]) -> Vec<f64>,
    at: &[f64],
) -> Result<Vec<f64>, LeapfrogError> {
    let u = force(at);
    if u.iter().all(|x| x.is_finite()) {
        Ok(u)
    } else {
        Err(LeapfrogError::NonFiniteForce)
    }
}

/// One leapfrog jump of duration tau:
/// theta' = theta + tau*mom + (tau^2/2) u(theta + (tau/2) mom),
/// mom'   = mom + tau u(theta + (tau/2) mom).
pub fn leapfrog_step(
    theta: &[f64],
    mom: &[f64],
    tau: f64,
    force: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Result<(Vec<f64>, Vec<f64>), LeapfrogError> {
    let mid: Vec<f64> = theta
        .iter()
        .zip(mom)
        .map(|(t, v)| t + 0.5 * tau * v)
        .collect();
    let u = eval_force(force, &mid)?;
    let new_mom: Vec<f64> = mom.iter().zip(&u).map(|(v, f)| v + tau * f).collect();
    let new_theta: Vec<f64> = mid
        .iter()
        .zip(&new_mom)
        .map(|(m, v)| m + 0.5 * tau * v)
        .collect();
    Ok((new_theta, new_mom))
}

/// Composes `steps` leapfrog jumps with the interior half-drifts merged,
/// then negates the momentum. Applying the map twice returns the start.
pub fn trajectory(
    theta0: &[f64],
    mom0: &[f64],
    tau: f64,
    steps: usize,
    force: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Result<(Vec<f64>, Vec<f64>), LeapfrogError> {
    assert!(steps >= 1);
    let mut theta: Vec<f64> = theta0
        .iter()
        .zip(mom0)
        .map(|(t, v)| t + 0.5 * tau * v)
        .collect();
    let mut mom = mom0.to_vec();
    for j in 1..=(2 * steps - 1) {
        if j % 2 == 1 {
            let u = eval_force(force, &theta)?;
            for (v, f) in mom.iter_mut().zip(&u) {
                *v += tau * f;
            }
        } else {
            for (t, v) in theta.iter_mut().zip(&mom) {
                *t += tau * v;
            }
        }
    }
    let theta_star: Vec<f64> = theta
        .iter()
        .zip(&mom)
        .map(|(t, v)| t + 0.5 * tau * v)
        .collect();
    let mom_star: Vec<f64> = mom.iter().map(|v| -v).collect();
    Ok((theta_star, mom_star))
}

/// Draws the step size and count for one trajectory. The step size is
/// uniform in tau*(1 +- jitter_tau); the count is a uniform integer in
/// steps*(1 +- jitter_steps), floored at 1.
pub fn jitter(cfg: &TrajectoryConfig, rng: &mut impl Rng) -> (f64, usize) {
    let tau = if cfg.jitter_tau > 0.0 {
        cfg.tau * (1.0 + cfg.jitter_tau * (2.0 * rng.random::<f64>() - 1.0))
    } else {
        cfg.tau
    };
    let steps = if cfg.jitter_steps > 0.0 {
        let base = cfg.steps as f64;
        let lo = ((base * (1.0 - cfg.jitter_steps)).ceil() as usize).max(1);
        let hi = ((base * (1.0 + cfg.jitter_steps)).floor() as usize).max(lo);
        rng.random_range(lo..=hi)
    } else {
        cfg.steps
    };
    (tau, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn free(_: &[f64]) -> Vec<f64> {
        vec![0.0]
    }

    fn harmonic(t: &[f64]) -> Vec<f64> {
        vec![-t[0]]
    }

    #[test]
    fn free_particle_single_step() {
        let (t, v) = leapfrog_step(&[0.0], &[1.0], 0.1, &free).unwrap();
        assert_abs_diff_eq!(t[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn harmonic_single_step() {
        let (t, v) = leapfrog_step(&[1.0], &[0.0], 0.2, &harmonic).unwrap();
        assert_abs_diff_eq!(t[0], 0.98, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0], -0.2, epsilon = 1e-15);
    }

    #[test]
    fn single_step_error_is_third_order() {
        // Exact harmonic motion vs one leapfrog jump; halving tau should
        // shrink the error by about 8. (A nonzero start momentum keeps the
        // third-order error term from cancelling by symmetry.)
        let err = |tau: f64| {
            let (t, _) = leapfrog_step(&[1.0], &[0.5], tau, &harmonic).unwrap();
            (t[0] - (tau.cos() + 0.5 * tau.sin())).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((6.0..10.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn free_flight_trajectory() {
        let (t, v) = trajectory(&[0.0], &[1.0], 0.1, 10, &free).unwrap();
        assert_abs_diff_eq!(t[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[0], -1.0, epsilon = 1e-15);
    }

    fn hamiltonian_1d(t: f64, v: f64) -> f64 {
        0.5 * v * v + 0.5 * t * t
    }

    #[test]
    fn energy_error_second_order_at_fixed_duration() {
        let h0 = hamiltonian_1d(1.3, -0.4);
        let dh = |tau: f64, steps: usize| {
            let (t, v) = trajectory(&[1.3], &[-0.4], tau, steps, &harmonic).unwrap();
            (hamiltonian_1d(t[0], v[0]) - h0).abs()
        };
        assert!(dh(0.01, 100) < 1e-3);
        let ratio = dh(0.01, 100) / dh(0.005, 200);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trajectory_is_reversible() {
        let qubit_force = |t: &[f64]| {
            vec![
                6.0 * (2.0 * t[0]).cos() / (2.0 * t[0]).sin(),
                2.0 * (2.0 * t[1]).cos() / (2.0 * t[1]).sin(),
                0.0,
            ]
        };
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        while checked < 100 {
            let theta: Vec<f64> = (0..3)
                .map(|_| 0.2 + rng.random::<f64>() * (std::f64::consts::PI / 2.0 - 0.4))
                .collect();
            let mom: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let Ok((t1, v1)) = trajectory(&theta, &mom, 0.05, 10, &qubit_force) else {
                continue;
            };
            let Ok((t2, v2)) = trajectory(&t1, &v1, 0.05, 10, &qubit_force) else {
                continue;
            };
            for i in 0..3 {
                assert!((t2[i] - theta[i]).abs() < 1e-9, "coordinate error");
                assert!((v2[i] - mom[i]).abs() < 1e-9, "momentum error");
            }
            checked += 1;
        }
    }

    #[test]
    fn volume_preservation_by_finite_differences() {
        // Jacobian of the one-step phase-space map equals 1.
        let phase_map = |z: &[f64]| {
            let (t, v) = leapfrog_step(&z[..1], &z[1..], 0.15, &harmonic).unwrap();
            vec![t[0], v[0]]
        };
        let det = crate::param::numeric_jacobian(&phase_map, &[0.7, -0.3], 1e-6).unwrap();
        assert_abs_diff_eq!(det, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn non_finite_force_is_reported() {
        let bad = |_: &[f64]| vec![f64::NAN];
        assert_eq!(
            trajectory(&[0.1], &[0.2], 0.1, 5, &bad),
            Err(LeapfrogError::NonFiniteForce)
        );
    }

    #[test]
    fn jitter_laws() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(30);
        let fixed = TrajectoryConfig {
            tau: 0.1,
            steps: 20,
            jitter_tau: 0.0,
            jitter_steps: 0.0,
        };
        for _ in 0..10 {
            assert_eq!(jitter(&fixed, &mut rng), (0.1, 20));
        }

        let cfg = TrajectoryConfig {
            tau: 0.1,
            steps: 20,
            jitter_tau: 0.1,
            jitter_steps: 0.1,
        };
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let n = 100_000;
        for _ in 0..n {
            let (tau, steps) = jitter(&cfg, &mut rng);
            assert!((18..=22).contains(&steps));
            sum += tau;
            min = min.min(tau);
            max = max.max(tau);
        }
        assert!(min >= 0.09 && max <= 0.11);
        assert!((sum / n as f64 - 0.1).abs() < 0.0002);

        let tiny = TrajectoryConfig {
            tau: 0.1,
            steps: 1,
            jitter_tau: 0.0,
            jitter_steps: 0.5,
        };
        for _ in 0..100 {
            assert_eq!(jitter(&tiny, &mut rng).1, 1);
        }
    }
}
