//! Clohessy–Wiltshire relative-motion propagation.
//!
//! Hill-frame convention: x radial (away from Earth), y along-track,
//! z cross-track. For a chief on a circular orbit with mean motion `n`,
//! relative motion of a deputy obeys
//!
//! ```text
//! x'' = 3n²x + 2n y' + ax
//! y'' = -2n x'       + ay
//! z'' = -n²z         + az
//! ```
//!
//! Propagation uses the closed-form solution of these linear equations,
//! including the exact forced response for a constant acceleration over
//! the step, so a single call advances any `dt` without integration error.

use crate::error::{Error, Result};
use crate::math::Vec3;
use serde::{Deserialize, Serialize};

/// Standard gravitational parameter of Earth, m³/s².
pub const MU_EARTH: f64 = 3.986_004_418e14;

/// Mean motion of a circular orbit at the given semi-major axis (m).
pub fn mean_motion(semi_major_axis: f64) -> f64 {
    (MU_EARTH / semi_major_axis.powi(3)).sqrt()
}

/// Default chief orbit: circular at 400 km altitude (n ≈ 1.13e-3 rad/s).
pub fn default_mean_motion() -> f64 {
    mean_motion(6_778_137.0)
}

/// Translational state plus the mass bookkeeping the fuel model needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacecraftState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub total_mass: f64,
    pub prop_mass: f64,
}

impl SpacecraftState {
    pub fn new(position: Vec3, velocity: Vec3, total_mass: f64, prop_mass: f64) -> Self {
        Self { position, velocity, total_mass, prop_mass }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() || !self.velocity.is_finite() {
            return Err(Error::InvalidInput("non-finite spacecraft state".into()));
        }
        if !self.total_mass.is_finite() || !self.prop_mass.is_finite() {
            return Err(Error::InvalidInput("non-finite mass".into()));
        }
        if self.total_mass <= 0.0 {
            return Err(Error::Validation("total_mass must be positive".into()));
        }
        if self.prop_mass < 0.0 || self.prop_mass > self.total_mass {
            return Err(Error::Validation("prop_mass must lie in [0, total_mass]".into()));
        }
        Ok(())
    }
}

/// Kinematic part of the update: closed-form CW solution with a constant
/// applied acceleration. Does not touch masses.
fn propagate_kinematics(position: Vec3, velocity: Vec3, accel: Vec3, dt: f64, n: f64) -> (Vec3, Vec3) {
    let nt = n * dt;
    let s = nt.sin();
    let c = nt.cos();

    let (x0, y0, z0) = (position.x, position.y, position.z);
    let (vx0, vy0, vz0) = (velocity.x, velocity.y, velocity.z);
    let (ax, ay, az) = (accel.x, accel.y, accel.z);

    // Free response (state-transition matrix rows).
    let x_free = (4.0 - 3.0 * c) * x0 + (s / n) * vx0 + (2.0 * (1.0 - c) / n) * vy0;
    let y_free = 6.0 * (s - nt) * x0 + y0 + (2.0 * (c - 1.0) / n) * vx0 + ((4.0 * s - 3.0 * nt) / n) * vy0;
    let z_free = c * z0 + (s / n) * vz0;
    let vx_free = 3.0 * n * s * x0 + c * vx0 + 2.0 * s * vy0;
    let vy_free = 6.0 * n * (c - 1.0) * x0 - 2.0 * s * vx0 + (4.0 * c - 3.0) * vy0;
    let vz_free = -n * s * z0 + c * vz0;

    // Forced response: integral of the STM columns that map acceleration
    // into the state, evaluated in closed form.
    let n2 = n * n;
    let g_x_ax = (1.0 - c) / n2;
    let g_x_ay = 2.0 * (nt - s) / n2;
    let g_y_ax = -2.0 * (nt - s) / n2;
    let g_y_ay = 4.0 * (1.0 - c) / n2 - 1.5 * dt * dt;
    let g_z_az = (1.0 - c) / n2;
    let g_vx_ax = s / n;
    let g_vx_ay = 2.0 * (1.0 - c) / n;
    let g_vy_ax = -2.0 * (1.0 - c) / n;
    let g_vy_ay = 4.0 * s / n - 3.0 * dt;
    let g_vz_az = s / n;

    let pos = Vec3::new(
        x_free + g_x_ax * ax + g_x_ay * ay,
        y_free + g_y_ax * ax + g_y_ay * ay,
        z_free + g_z_az * az,
    );
    let vel = Vec3::new(
        vx_free + g_vx_ax * ax + g_vx_ay * ay,
        vy_free + g_vy_ax * ax + g_vy_ay * ay,
        vz_free + g_vz_az * az,
    );
    (pos, vel)
}

/// Advance a spacecraft `dt` seconds under CW dynamics with a constant
/// commanded acceleration.
///
/// Mass depletion: `Δm = m·|a|·dt / v_e` (constant exhaust velocity `v_e`),
/// drawn from `prop_mass`. When the remaining propellant cannot sustain the
/// commanded acceleration for the whole step, the craft thrusts until the
/// tank empties and coasts for the remainder; an empty tank clamps the
/// acceleration to zero.
pub fn propagate(
    state: &SpacecraftState,
    accel: Vec3,
    dt: f64,
    mean_motion: f64,
    exhaust_velocity: f64,
) -> Result<SpacecraftState> {
    if !accel.is_finite() || !dt.is_finite() || !mean_motion.is_finite() {
        return Err(Error::InvalidInput("non-finite propagate argument".into()));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if mean_motion <= 0.0 {
        return Err(Error::InvalidInput("mean motion must be positive".into()));
    }
    state.validate()?;

    let a_mag = accel.norm();
    if a_mag == 0.0 || state.prop_mass <= 0.0 {
        // Coast (an empty tank clamps thrust to zero).
        let (pos, vel) = propagate_kinematics(state.position, state.velocity, Vec3::ZERO, dt, mean_motion);
        return Ok(SpacecraftState { position: pos, velocity: vel, ..*state });
    }

    let dm_full = state.total_mass * a_mag * dt / exhaust_velocity;
    if dm_full <= state.prop_mass {
        let (pos, vel) = propagate_kinematics(state.position, state.velocity, accel, dt, mean_motion);
        return Ok(SpacecraftState {
            position: pos,
            velocity: vel,
            total_mass: state.total_mass - dm_full,
            prop_mass: state.prop_mass - dm_full,
        });
    }

    // Partial burn: thrust until the tank empties, then coast.
    let t_burn = (state.prop_mass * exhaust_velocity / (state.total_mass * a_mag)).min(dt);
    let (pos1, vel1) = propagate_kinematics(state.position, state.velocity, accel, t_burn, mean_motion);
    let dry = state.total_mass - state.prop_mass;
    let (pos2, vel2) = propagate_kinematics(pos1, vel1, Vec3::ZERO, dt - t_burn, mean_motion);
    Ok(SpacecraftState { position: pos2, velocity: vel2, total_mass: dry, prop_mass: 0.0 })
}

/// Analytic CW state-transition matrix as a row-major 6x6 array over the
/// state ordering (x, y, z, vx, vy, vz). Exposed for verification against
/// independently constructed propagators.
pub fn transition_matrix(n: f64, dt: f64) -> [[f64; 6]; 6] {
    let nt = n * dt;
    let s = nt.sin();
    let c = nt.cos();
    [
        [4.0 - 3.0 * c, 0.0, 0.0, s / n, 2.0 * (1.0 - c) / n, 0.0],
        [6.0 * (s - nt), 1.0, 0.0, 2.0 * (c - 1.0) / n, (4.0 * s - 3.0 * nt) / n, 0.0],
        [0.0, 0.0, c, 0.0, 0.0, s / n],
        [3.0 * n * s, 0.0, 0.0, c, 2.0 * s, 0.0],
        [6.0 * n * (c - 1.0), 0.0, 0.0, -2.0 * s, 4.0 * c - 3.0, 0.0],
        [0.0, 0.0, -n * s, 0.0, 0.0, c],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn test_state(pos: Vec3, vel: Vec3) -> SpacecraftState {
        SpacecraftState::new(pos, vel, 1000.0, 200.0)
    }

    /// CW right-hand side, used by the RK4 oracle below.
    fn cw_rhs(state: &[f64; 6], accel: Vec3, n: f64) -> [f64; 6] {
        let [x, _y, z, vx, vy, vz] = *state;
        [
            vx,
            vy,
            vz,
            3.0 * n * n * x + 2.0 * n * vy + accel.x,
            -2.0 * n * vx + accel.y,
            -n * n * z + accel.z,
        ]
    }

    /// Independent RK4 integration of the forced CW equations.
    fn rk4_oracle(pos: Vec3, vel: Vec3, accel: Vec3, dt: f64, n: f64, steps: usize) -> (Vec3, Vec3) {
        let mut y = [pos.x, pos.y, pos.z, vel.x, vel.y, vel.z];
        let h = dt / steps as f64;
        for _ in 0..steps {
            let k1 = cw_rhs(&y, accel, n);
            let mut y2 = y;
            for i in 0..6 {
                y2[i] = y[i] + 0.5 * h * k1[i];
            }
            let k2 = cw_rhs(&y2, accel, n);
            let mut y3 = y;
            for i in 0..6 {
                y3[i] = y[i] + 0.5 * h * k2[i];
            }
            let k3 = cw_rhs(&y3, accel, n);
            let mut y4 = y;
            for i in 0..6 {
                y4[i] = y[i] + h * k3[i];
            }
            let k4 = cw_rhs(&y4, accel, n);
            for i in 0..6 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        (Vec3::new(y[0], y[1], y[2]), Vec3::new(y[3], y[4], y[5]))
    }

    #[test]
    fn origin_is_equilibrium() {
        let n = default_mean_motion();
        let s = test_state(Vec3::ZERO, Vec3::ZERO);
        let out = propagate(&s, Vec3::ZERO, 1234.5, n, 2000.0).unwrap();
        assert_eq!(out.position, Vec3::ZERO);
        assert_eq!(out.velocity, Vec3::ZERO);
        assert_eq!(out.total_mass, s.total_mass);
    }

    #[test]
    fn quarter_period_coast_matches_rk4() {
        let n = default_mean_motion();
        let quarter = 0.25 * std::f64::consts::TAU / n;
        let s = test_state(Vec3::new(100.0, 0.0, 0.0), Vec3::ZERO);
        let out = propagate(&s, Vec3::ZERO, quarter, n, 2000.0).unwrap();
        let (pos, vel) = rk4_oracle(s.position, s.velocity, Vec3::ZERO, quarter, n, 20_000);
        assert_relative_eq!(out.position.x, pos.x, max_relative = 1e-9, epsilon = 1e-9);
        assert_relative_eq!(out.position.y, pos.y, max_relative = 1e-9, epsilon = 1e-9);
        assert_relative_eq!(out.velocity.x, vel.x, max_relative = 1e-9, epsilon = 1e-9);
        assert_relative_eq!(out.velocity.y, vel.y, max_relative = 1e-9, epsilon = 1e-9);
    }

    #[test]
    fn thrusted_step_matches_rk4() {
        let n = default_mean_motion();
        let s = test_state(Vec3::new(250.0, -400.0, 120.0), Vec3::new(1.5, -2.0, 0.7));
        let accel = Vec3::new(0.05, -0.3, 0.12);
        let out = propagate(&s, accel, 5.0, n, 2000.0).unwrap();
        let (pos, vel) = rk4_oracle(s.position, s.velocity, accel, 5.0, n, 5_000);
        for (got, want) in [
            (out.position.x, pos.x),
            (out.position.y, pos.y),
            (out.position.z, pos.z),
            (out.velocity.x, vel.x),
            (out.velocity.y, vel.y),
            (out.velocity.z, vel.z),
        ] {
            assert_relative_eq!(got, want, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn mass_depletes_linearly_and_dry_mass_is_conserved() {
        let n = default_mean_motion();
        let s = test_state(Vec3::ZERO, Vec3::ZERO);
        let accel = Vec3::new(0.4, 0.0, 0.0);
        let out = propagate(&s, accel, 10.0, n, 2000.0).unwrap();
        let expected_dm = 1000.0 * 0.4 * 10.0 / 2000.0;
        assert_relative_eq!(s.total_mass - out.total_mass, expected_dm, max_relative = 1e-12);
        assert_relative_eq!(out.total_mass - out.prop_mass, 800.0, max_relative = 1e-12);
    }

    #[test]
    fn fuel_exhaustion_clamps_thrust() {
        let n = default_mean_motion();
        let s = SpacecraftState::new(Vec3::ZERO, Vec3::ZERO, 800.5, 0.5);
        let accel = Vec3::new(1.0, 0.0, 0.0);
        // Needs 0.4 kg/s of propellant; 0.5 kg lasts ~1.25 s of a 100 s step.
        let out = propagate(&s, accel, 100.0, n, 2000.0).unwrap();
        assert_eq!(out.prop_mass, 0.0);
        assert_relative_eq!(out.total_mass, 800.0, max_relative = 1e-12);
        // Velocity gained is bounded by the propellant, far below a*dt.
        assert!(out.velocity.norm() < 2.0, "velocity {:?}", out.velocity);

        // With no propellant at all the craft just coasts.
        let dry = SpacecraftState::new(Vec3::new(50.0, 0.0, 0.0), Vec3::ZERO, 800.0, 0.0);
        let coasted = propagate(&dry, accel, 10.0, n, 2000.0).unwrap();
        let reference = propagate(&dry, Vec3::ZERO, 10.0, n, 2000.0).unwrap();
        assert_eq!(coasted.position, reference.position);
    }

    #[test]
    fn rejects_non_finite_inputs() {
        let n = default_mean_motion();
        let s = test_state(Vec3::new(f64::NAN, 0.0, 0.0), Vec3::ZERO);
        assert!(propagate(&s, Vec3::ZERO, 1.0, n, 2000.0).is_err());
        let ok = test_state(Vec3::ZERO, Vec3::ZERO);
        assert!(propagate(&ok, Vec3::new(f64::INFINITY, 0.0, 0.0), 1.0, n, 2000.0).is_err());
        assert!(propagate(&ok, Vec3::ZERO, -1.0, n, 2000.0).is_err());
    }
}
