//! Infinite-horizon LQR on the 6-state CW system, regulating the bandit
//! onto the lady's relative state.
//!
//! The continuous-time algebraic Riccati equation
//! `AᵀP + PA - PBR⁻¹BᵀP + Q = 0` is solved by Newton-Kleinman iteration:
//! starting from a stabilizing gain, each step solves the Lyapunov equation
//! `(A-BKᵢ)ᵀP + P(A-BKᵢ) = -(Q + KᵢᵀRKᵢ)` and refits `Kᵢ₊₁ = R⁻¹BᵀP`.
//! The Lyapunov solve uses the Kronecker-vectorized 36x36 linear system,
//! which is ample for a 6-state plant.

use crate::dynamics::{Observation, ThrustCommand};
use crate::error::{Error, Result};
use crate::math::Vec3;
use nalgebra::{Complex, DMatrix, DVector, SMatrix, SVector};

type Mat6 = SMatrix<f64, 6, 6>;
type Mat63 = SMatrix<f64, 6, 3>;
type Mat36 = SMatrix<f64, 3, 6>;
type Mat3 = SMatrix<f64, 3, 3>;

/// Default state weights: position 1e-4, velocity 1e-3.
pub fn default_q() -> Mat6 {
    Mat6::from_diagonal(&SVector::<f64, 6>::from_row_slice(&[
        1e-4, 1e-4, 1e-4, 1e-3, 1e-3, 1e-3,
    ]))
}

/// Default control weight: 1e-2 on each axis.
pub fn default_r() -> Mat3 {
    Mat3::identity() * 1e-2
}

/// CW system matrices for state (x, y, z, vx, vy, vz) with acceleration
/// input on each axis.
pub fn cw_system(n: f64) -> (Mat6, Mat63) {
    let mut a = Mat6::zeros();
    a[(0, 3)] = 1.0;
    a[(1, 4)] = 1.0;
    a[(2, 5)] = 1.0;
    a[(3, 0)] = 3.0 * n * n;
    a[(3, 4)] = 2.0 * n;
    a[(4, 3)] = -2.0 * n;
    a[(5, 2)] = -n * n;

    let mut b = Mat63::zeros();
    b[(3, 0)] = 1.0;
    b[(4, 1)] = 1.0;
    b[(5, 2)] = 1.0;
    (a, b)
}

/// Frobenius norm of the CARE residual for a candidate P.
pub fn care_residual(a: &Mat6, b: &Mat63, q: &Mat6, r: &Mat3, p: &Mat6) -> f64 {
    let r_inv = r.try_inverse().expect("R is positive definite");
    let res = a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q;
    res.norm()
}

/// Solve `acl' P + P acl = -s` by LU on the vectorized system.
fn solve_lyapunov(acl: &Mat6, s: &Mat6) -> Result<Mat6> {
    let at = acl.transpose();
    let mut m = DMatrix::<f64>::zeros(36, 36);
    // vec(AᵀP) = (I ⊗ Aᵀ) vec(P); vec(P A) = (Aᵀ ⊗ I) vec(P).
    for col_block in 0..6 {
        for row in 0..6 {
            for col in 0..6 {
                m[(col_block * 6 + row, col_block * 6 + col)] += at[(row, col)];
            }
        }
    }
    for i in 0..6 {
        for j in 0..6 {
            let w = at[(i, j)];
            if w != 0.0 {
                for k in 0..6 {
                    m[(i * 6 + k, j * 6 + k)] += w;
                }
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(36);
    for j in 0..6 {
        for i in 0..6 {
            rhs[j * 6 + i] = -s[(i, j)];
        }
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Validation("Lyapunov system is singular".into()))?;
    let mut p = Mat6::zeros();
    for j in 0..6 {
        for i in 0..6 {
            p[(i, j)] = sol[j * 6 + i];
        }
    }
    // Symmetrize against round-off.
    Ok((p + p.transpose()) * 0.5)
}

/// Newton-Kleinman CARE solve from an initial stabilizing gain.
pub fn solve_care_newton_kleinman(
    a: &Mat6,
    b: &Mat63,
    q: &Mat6,
    r: &Mat3,
    k0: Mat36,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(Mat6, Mat36)> {
    let r_inv = r.try_inverse().ok_or_else(|| Error::Validation("R must be invertible".into()))?;
    let mut k = k0;
    let mut p = Mat6::zeros();
    for _ in 0..max_iterations {
        let acl = a - b * k;
        let s = q + k.transpose() * r * k;
        p = solve_lyapunov(&acl, &s)?;
        k = r_inv * b.transpose() * p;
        if care_residual(a, b, q, r, &p) <= tolerance {
            return Ok((p, k));
        }
    }
    Err(Error::Validation(format!(
        "Newton-Kleinman did not reach residual {tolerance} in {max_iterations} iterations \
         (residual {})",
        care_residual(a, b, q, r, &p)
    )))
}

/// Precomputed regulator for one scenario's mean motion.
#[derive(Debug, Clone)]
pub struct LqrController {
    gain: Mat36,
    riccati: Mat6,
}

impl LqrController {
    /// Build the regulator for the given mean motion with the default
    /// weights, solved to residual 1e-8.
    pub fn for_mean_motion(n: f64) -> Result<Self> {
        let (a, b) = cw_system(n);
        // Symmetric PD start: stiff enough to dominate the CW coupling
        // (kp >> 3n²), so the initial closed loop is Hurwitz.
        let mut k0 = Mat36::zeros();
        for i in 0..3 {
            k0[(i, i)] = 1e-2;
            k0[(i, i + 3)] = 2e-1;
        }
        let (riccati, gain) =
            solve_care_newton_kleinman(&a, &b, &default_q(), &default_r(), k0, 1e-8, 50)?;
        Ok(Self { gain, riccati })
    }

    pub fn gain(&self) -> &Mat36 {
        &self.gain
    }

    /// CARE residual of the stored solution.
    pub fn residual(&self, n: f64) -> f64 {
        let (a, b) = cw_system(n);
        care_residual(&a, &b, &default_q(), &default_r(), &self.riccati)
    }

    /// Closed-loop eigenvalues of A - BK.
    pub fn closed_loop_eigenvalues(&self, n: f64) -> Vec<Complex<f64>> {
        let (a, b) = cw_system(n);
        let acl = a - b * self.gain;
        acl.complex_eigenvalues().iter().copied().collect()
    }

    /// Regulate the bandit onto the lady: acceleration −K·(relative state),
    /// converted to per-axis throttle and clamped.
    pub fn action(&self, obs: &Observation, bandit_max_accel: f64, control_period: f64) -> ThrustCommand {
        let dp = obs.bandit.position - obs.lady.position;
        let dv = obs.bandit.velocity - obs.lady.velocity;
        let x = SVector::<f64, 6>::from_row_slice(&[dp.x, dp.y, dp.z, dv.x, dv.y, dv.z]);
        let u = -self.gain * x;
        let throttle = Vec3::new(
            (u[0] / bandit_max_accel).clamp(-1.0, 1.0),
            (u[1] / bandit_max_accel).clamp(-1.0, 1.0),
            (u[2] / bandit_max_accel).clamp(-1.0, 1.0),
        );
        ThrustCommand::new(throttle, control_period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{default_mean_motion, SpacecraftState};

    #[test]
    fn care_residual_meets_tolerance() {
        let n = default_mean_motion();
        let ctl = LqrController::for_mean_motion(n).unwrap();
        assert!(ctl.residual(n) <= 1e-8, "residual {}", ctl.residual(n));
    }

    #[test]
    fn closed_loop_is_hurwitz() {
        let n = default_mean_motion();
        let ctl = LqrController::for_mean_motion(n).unwrap();
        for ev in ctl.closed_loop_eigenvalues(n) {
            assert!(ev.re < 0.0, "eigenvalue {ev} not strictly stable");
        }
    }

    #[test]
    fn zero_relative_state_gives_zero_command() {
        let n = default_mean_motion();
        let ctl = LqrController::for_mean_motion(n).unwrap();
        let craft = SpacecraftState::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.1, 0.0, 0.0), 1000.0, 200.0);
        let obs = Observation { t: 0.0, bandit: craft, lady: craft, guards: vec![craft] };
        let cmd = ctl.action(&obs, 0.4, 1.0);
        assert_eq!(cmd.throttle, Vec3::ZERO);
    }

    #[test]
    fn lyapunov_solution_satisfies_equation() {
        let n = default_mean_motion();
        let (a, b) = cw_system(n);
        let mut k0 = Mat36::zeros();
        for i in 0..3 {
            k0[(i, i)] = 1e-2;
            k0[(i, i + 3)] = 2e-1;
        }
        let acl = a - b * k0;
        let s = Mat6::identity();
        let p = solve_lyapunov(&acl, &s).unwrap();
        let res = acl.transpose() * p + p * acl + s;
        assert!(res.norm() < 1e-9, "residual {}", res.norm());
    }
}
