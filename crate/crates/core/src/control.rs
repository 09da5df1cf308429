//! Guidance, sink-rate, velocity and pitch control loops.
//!
//! Sign conventions: `z` is altitude (up positive), so a descent has `zdot < 0`.
//! Pitch-loop outputs are angular-acceleration demands that are mapped to an
//! elevator increment through the plant partial `dqdot_dde`.

use serde::{Deserialize, Serialize};

use crate::environment::LandingPoint;
use crate::observer::ObserverState;
use crate::trimlin::reference;

/// Output of one control step, before actuator saturation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ControlCommand {
    /// rad
    pub delta_e_cmd: f64,
    /// N
    pub thrust_cmd: f64,
    /// rad
    pub theta_r: f64,
    /// m/s
    pub zdot_r: f64,
    /// m/s
    pub v_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchGains {
    pub kp_theta: f64,
    pub kd_theta: f64,
    pub kp_theta2: f64,
    pub ki_theta: f64,
    pub kd_theta2: f64,
    /// 1/s
    pub dqdot_dq: f64,
    /// 1/s^2 per rad
    pub dqdot_dde: f64,
}

impl Default for PitchGains {
    fn default() -> Self {
        Self {
            kp_theta: 88.89,
            kd_theta: 26.5186,
            kp_theta2: 57.01,
            ki_theta: 50.0,
            kd_theta2: 17.19,
            dqdot_dq: reference::DQDOT_DQ,
            dqdot_dde: reference::DQDOT_DDE_PER_DEG.to_degrees(),
        }
    }
}

/// Second-order pole placement for the pitch loop: `(kp, kd)` for a 2%
/// settling time `t_settle` and damping ratio `damping`.
pub fn derive_pitch_gains(t_settle: f64, damping: f64, dqdot_dq: f64) -> (f64, f64) {
    let wn = 4.0 / (t_settle * damping);
    (wn * wn, 2.0 * damping * wn - dqdot_dq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpdOutput {
    pub delta_e_cmd: f64,
    /// elevator increment about trim, rad
    pub delta_de: f64,
    pub h_theta: f64,
}

/// Known input of the pitch channel for the observer.
pub fn known_input(gains: &PitchGains, x2: f64, delta_de: f64) -> f64 {
    gains.dqdot_dq * x2 + gains.dqdot_dde * delta_de
}

/// Observer-based PD with disturbance cancellation.
pub fn pitch_opd(
    theta_r: f64,
    theta_meas: f64,
    obs: &ObserverState,
    gains: &PitchGains,
    delta_e_trim: f64,
) -> OpdOutput {
    let e = theta_r - theta_meas;
    let e_dot = -obs.x2;
    let u = gains.kp_theta * e + gains.kd_theta * e_dot;
    let delta_de = (u - obs.x3) / gains.dqdot_dde;
    OpdOutput {
        delta_e_cmd: delta_e_trim + delta_de,
        delta_de,
        h_theta: known_input(gains, obs.x2, delta_de),
    }
}

/// Trapezoidal integrator with a symmetric clamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integrator {
    pub value: f64,
    pub limit: f64,
    prev: Option<f64>,
}

impl Integrator {
    pub fn new(limit: f64) -> Self {
        Self {
            value: 0.0,
            limit,
            prev: None,
        }
    }

    pub fn with_value(limit: f64, value: f64) -> Self {
        Self {
            value: value.clamp(-limit, limit),
            limit,
            prev: None,
        }
    }

    /// Integrates `e` over `dt`. With `hold` set the accumulated value is
    /// frozen (conditional integration while the actuator is saturated).
    pub fn step(&mut self, e: f64, dt: f64, hold: bool) -> f64 {
        if dt == 0.0 {
            return self.value;
        }
        let prev = self.prev.unwrap_or(e);
        if !hold {
            self.value = (self.value + 0.5 * dt * (prev + e)).clamp(-self.limit, self.limit);
        }
        self.prev = Some(e);
        self.value
    }
}

/// Derivative through a first-order low-pass `s/(tau s + 1)`, seeded with
/// the first sample so that a nonzero initial input produces no spike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilteredDerivative {
    pub tau: f64,
    state: Option<f64>,
}

impl FilteredDerivative {
    pub fn new(tau: f64) -> Self {
        Self { tau, state: None }
    }

    pub fn step(&mut self, u: f64, dt: f64) -> f64 {
        let Some(s) = self.state else {
            self.state = Some(u);
            return 0.0;
        };
        if dt == 0.0 {
            return (u - s) / self.tau;
        }
        let s = s + (1.0 - (-dt / self.tau).exp()) * (u - s);
        self.state = Some(s);
        (u - s) / self.tau
    }
}

/// PID baseline on the pitch error. The derivative is taken on the measured
/// pitch error through a first-order filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PitchPid {
    pub integral: Integrator,
    pub derivative: FilteredDerivative,
}

impl PitchPid {
    pub fn new(integral_limit: f64, derivative_tau: f64) -> Self {
        Self {
            integral: Integrator::new(integral_limit),
            derivative: FilteredDerivative::new(derivative_tau),
        }
    }

    /// Returns `(delta_e_cmd, delta_de)`.
    pub fn step(
        &mut self,
        theta_r: f64,
        theta_meas: f64,
        gains: &PitchGains,
        delta_e_trim: f64,
        dt: f64,
        hold: bool,
    ) -> (f64, f64) {
        let e = theta_r - theta_meas;
        let i = self.integral.step(e, dt, hold);
        let d = self.derivative.step(e, dt);
        let u = gains.kp_theta2 * e + gains.ki_theta * i + gains.kd_theta2 * d;
        let delta_de = u / gains.dqdot_dde;
        (delta_e_trim + delta_de, delta_de)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterGains {
    pub kp_v: f64,
    pub ki_v: f64,
    pub kd_v: f64,
    /// m (integral of m/s error)
    pub v_integral_limit: f64,
    pub kp_s: f64,
    pub ki_s: f64,
    /// m (integral of sink-rate error)
    pub s_integral_limit: f64,
    pub kp_z: f64,
    pub ki_z: f64,
    pub kd_z: f64,
    /// m*s
    pub z_integral_limit: f64,
    /// s
    pub z_derivative_tau: f64,
}

impl Default for OuterGains {
    fn default() -> Self {
        Self {
            kp_v: 3.6,
            ki_v: 2.16,
            kd_v: 0.5,
            v_integral_limit: 20.0,
            kp_s: 0.02,
            ki_s: 0.018,
            s_integral_limit: 30.0,
            kp_z: 0.5,
            ki_z: 0.015,
            kd_z: 0.05,
            z_integral_limit: 20.0,
            z_derivative_tau: 0.05,
        }
    }
}

/// Airspeed hold through thrust: `T = T* + m (kd e' + kp e + ki int e)`,
/// with `e' = -vdot` for a constant reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityController {
    pub integral: Integrator,
    pub thrust_trim: f64,
    pub mass: f64,
}

impl VelocityController {
    pub fn new(gains: &OuterGains, thrust_trim: f64, mass: f64) -> Self {
        Self {
            integral: Integrator::new(gains.v_integral_limit),
            thrust_trim,
            mass,
        }
    }

    pub fn step(&mut self, v_r: f64, v_t: f64, vdot: f64, gains: &OuterGains, dt: f64, hold: bool) -> f64 {
        let e = v_r - v_t;
        let i = self.integral.step(e, dt, hold);
        self.thrust_trim + self.mass * (gains.kd_v * -vdot + gains.kp_v * e + gains.ki_v * i)
    }
}

/// Flight-path-rate loop: `theta_r = theta* + kp e + ki int e`, `e = zdot_r - zdot`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinkController {
    pub integral: Integrator,
    pub theta_trim: f64,
}

impl SinkController {
    pub fn new(gains: &OuterGains, theta_trim: f64) -> Self {
        Self {
            integral: Integrator::new(gains.s_integral_limit),
            theta_trim,
        }
    }

    pub fn step(&mut self, zdot_r: f64, zdot: f64, gains: &OuterGains, dt: f64) -> f64 {
        let e = zdot_r - zdot;
        let i = self.integral.step(e, dt, false);
        self.theta_trim + gains.kp_s * e + gains.ki_s * i
    }
}

/// Altitude loop producing the climb-rate reference. `feedforward` is the
/// path's own vertical rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuidanceController {
    pub integral: Integrator,
    pub derivative: FilteredDerivative,
}

impl GuidanceController {
    pub fn new(gains: &OuterGains) -> Self {
        Self {
            integral: Integrator::new(gains.z_integral_limit),
            derivative: FilteredDerivative::new(gains.z_derivative_tau),
        }
    }

    pub fn step(&mut self, z_r: f64, z: f64, feedforward: f64, gains: &OuterGains, dt: f64) -> f64 {
        let e = z_r - z;
        let i = self.integral.step(e, dt, false);
        let d = self.derivative.step(e, dt);
        feedforward + gains.kp_z * e + gains.ki_z * i + gains.kd_z * d
    }
}

/// Altitude of the straight glide path through the landing point.
pub fn flight_path_generator(landing: &LandingPoint, aircraft_x: f64, glide_slope: f64) -> f64 {
    landing.z_l + glide_slope.tan() * (landing.x_l - aircraft_x)
}

/// Vertical rate of the glide path seen by an aircraft moving at `xdot`.
pub fn flight_path_rate(xdot: f64, glide_slope: f64) -> f64 {
    -glide_slope.tan() * xdot
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pitch_gain_derivation() {
        let (kp, kd) = derive_pitch_gains(0.3, 2f64.sqrt(), -0.15);
        assert_relative_eq!(4.0 / (0.3 * 2f64.sqrt()), 9.428_090_415_820_634, epsilon = 1e-12);
        assert_relative_eq!(kp, 88.89, epsilon = 0.01);
        assert_relative_eq!(kd, 26.8167, epsilon = 1e-4);
        let (kp, kd) = derive_pitch_gains(4.0, 1.0, -0.25);
        assert_eq!((kp, kd), (1.0, 2.25));
    }

    #[test]
    fn default_pitch_gains() {
        let g = PitchGains::default();
        assert_eq!((g.kp_theta, g.kd_theta), (88.89, 26.5186));
        assert_eq!((g.kp_theta2, g.ki_theta, g.kd_theta2), (57.01, 50.0, 17.19));
        assert_relative_eq!(g.dqdot_dde, -0.859_436_692_696_235, epsilon = 1e-12);
    }

    #[test]
    fn opd_at_reference_returns_trim() {
        let g = PitchGains::default();
        let out = pitch_opd(0.1, 0.1, &ObserverState::default(), &g, -0.08);
        assert_eq!(out.delta_e_cmd, -0.08);
        assert_eq!(out.delta_de, 0.0);
        assert_eq!(out.h_theta, 0.0);
    }

    #[test]
    fn opd_cancels_estimated_disturbance() {
        let g = PitchGains::default();
        let d0 = 0.37;
        let obs = ObserverState {
            x1: 0.0,
            x2: 0.0,
            x3: d0,
        };
        let out = pitch_opd(0.0, 0.0, &obs, &g, 0.0);
        assert_relative_eq!(out.delta_de, -d0 / g.dqdot_dde, epsilon = 1e-15);
        // Plant acceleration from elevator exactly opposes the disturbance.
        assert_relative_eq!(g.dqdot_dde * out.delta_de + d0, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn integrator_is_trapezoidal_and_clamped() {
        let mut i = Integrator::new(1.0);
        i.step(0.0, 0.1, false);
        assert_relative_eq!(i.step(1.0, 0.1, false), 0.05);
        assert_relative_eq!(i.step(1.0, 0.1, false), 0.15);
        assert_relative_eq!(i.step(1.0, 0.1, true), 0.15);
        for _ in 0..100 {
            i.step(1.0, 0.1, false);
        }
        assert_eq!(i.value, 1.0);
    }

    #[test]
    fn filtered_derivative_has_no_initial_spike_and_tracks_ramps() {
        let mut d = FilteredDerivative::new(0.05);
        assert_eq!(d.step(1.0, 0.001), 0.0);
        let mut last = 0.0;
        for k in 1..=2000 {
            last = d.step(1.0 + 0.5 * k as f64 * 0.001, 0.001);
        }
        // Discrete filter lags a ramp by dt/2, a relative bias of dt/(2 tau).
        assert_relative_eq!(last, 0.5 * (1.0 - 0.001 / 0.1), epsilon = 1e-4);
    }

    #[test]
    fn guidance_initial_offset() {
        let g = OuterGains::default();
        let mut c = GuidanceController::new(&g);
        let zdot_r = c.step(1.0, 0.0, 0.0, &g, 0.001);
        // Proportional term plus half a step of integral; no derivative kick.
        assert_relative_eq!(zdot_r, g.kp_z * 1.0 + g.ki_z * 0.001, epsilon = 1e-12);
        let mut fresh = GuidanceController::new(&g);
        assert_eq!(fresh.step(0.0, 0.0, -3.0, &g, 0.001), -3.0);
    }

    #[test]
    fn zero_error_maps_to_trim() {
        let g = OuterGains::default();
        let mut v = VelocityController::new(&g, 9400.0, 15097.39);
        assert_eq!(v.step(69.1, 69.1, 0.0, &g, 0.001, false), 9400.0);
        let mut s = SinkController::new(&g, 0.124);
        assert_eq!(s.step(-2.0, -2.0, &g, 0.001), 0.124);
        let mut p = PitchPid::new(1.0, 0.02);
        let gp = PitchGains::default();
        for _ in 0..10 {
            assert_eq!(p.step(0.12, 0.12, &gp, -0.087, 0.001, false).0, -0.087);
        }
    }

    #[test]
    fn glide_path_geometry() {
        let lp = LandingPoint { x_l: 1000.0, z_l: 0.0 };
        assert_eq!(flight_path_generator(&lp, 1000.0, 0.06), 0.0);
        assert_relative_eq!(
            flight_path_generator(&lp, 0.0, 3.5f64.to_radians()),
            61.16,
            epsilon = 0.01
        );
        let moved = LandingPoint { x_l: 1000.0, z_l: 1.5 };
        let gs = 3.5f64.to_radians();
        assert_relative_eq!(
            flight_path_generator(&moved, 200.0, gs) - flight_path_generator(&lp, 200.0, gs),
            1.5,
            epsilon = 1e-12
        );
    }

    proptest! {
        #[test]
        fn integrator_stays_within_bounds(errs in proptest::collection::vec(-1e3f64..1e3, 1..200),
                                          limit in 0.01f64..10.0, dt in 1e-4f64..0.1) {
            let mut i = Integrator::new(limit);
            for e in errs {
                let v = i.step(e, dt, false);
                prop_assert!(v.abs() <= limit);
            }
        }

        #[test]
        fn zero_dt_steps_are_inert(e1 in -1.0f64..1.0, e2 in -1.0f64..1.0, theta in -0.3f64..0.3) {
            let g = OuterGains::default();
            let gp = PitchGains::default();
            let mut pid = PitchPid::new(1.0, 0.02);
            pid.step(e1, 0.0, &gp, 0.0, 0.001, false);
            let a = pid.step(e2 + theta, theta, &gp, 0.0, 0.0, false);
            let b = pid.step(e2 + theta, theta, &gp, 0.0, 0.0, false);
            prop_assert_eq!(a, b);

            let mut gc = GuidanceController::new(&g);
            gc.step(e1, 0.0, 0.0, &g, 0.001);
            let a = gc.step(e2, 0.0, 0.0, &g, 0.0);
            let snapshot = gc;
            let b = gc.step(e2, 0.0, 0.0, &g, 0.0);
            prop_assert_eq!(a, b);
            prop_assert_eq!(snapshot, gc);
        }

        #[test]
        fn gain_identity(t in 0.05f64..10.0, damping in 0.1f64..3.0, dq in -1.0f64..0.0) {
            let (kp, kd) = derive_pitch_gains(t, damping, dq);
            prop_assert_eq!(kp, (4.0 / (t * damping)).powi(2));
            prop_assert_eq!(kd, 2.0 * damping * (4.0 / (t * damping)) - dq);
        }
    }
}
