//! Engine and elevator actuators.
//!
//! Engine: first-order lag `1/(tau s + 1)` on the thrust command.
//! Elevator: second-order `w^2/(s^2 + 2 zeta w s + w^2)` in controllable form.
//! Commands are clamped to the physical limits before entering the dynamics and
//! the actuator states are clamped again after each integration step.

use serde::{Deserialize, Serialize};

use crate::airframe::AircraftParams;
use crate::control::ControlCommand;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorParams {
    /// s, non-afterburner value
    pub engine_tau: f64,
    /// rad/s
    pub elevator_omega: f64,
    pub elevator_zeta: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self {
            engine_tau: 0.625,
            elevator_omega: 30.74,
            elevator_zeta: 0.509,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineState {
    /// N
    pub thrust_actual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElevatorState {
    /// rad
    pub deflection: f64,
    /// rad/s
    pub deflection_rate: f64,
}

pub fn engine_derivative(state: &EngineState, thrust_cmd: f64, params: &ActuatorParams) -> f64 {
    (thrust_cmd - state.thrust_actual) / params.engine_tau
}

/// Returns `(d deflection/dt, d rate/dt)`.
pub fn elevator_derivative(state: &ElevatorState, delta_e_cmd: f64, params: &ActuatorParams) -> (f64, f64) {
    let w = params.elevator_omega;
    let accel = w * w * (delta_e_cmd - state.deflection) - 2.0 * params.elevator_zeta * w * state.deflection_rate;
    (state.deflection_rate, accel)
}

/// Which channels were clipped on a given step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SaturationFlags {
    pub elevator: bool,
    pub thrust: bool,
}

pub fn saturate_inputs(raw: &ControlCommand, params: &AircraftParams) -> (ControlCommand, SaturationFlags) {
    let de = raw.delta_e_cmd.clamp(params.elevator_min(), params.elevator_max());
    let thrust = raw.thrust_cmd.clamp(0.0, params.t_max);
    let flags = SaturationFlags {
        elevator: de != raw.delta_e_cmd,
        thrust: thrust != raw.thrust_cmd,
    };
    (
        ControlCommand {
            delta_e_cmd: de,
            thrust_cmd: thrust,
            ..*raw
        },
        flags,
    )
}

/// Holds the actuator states at the physical stops. A deflection pinned at a
/// stop loses any rate that would drive it further out.
pub fn clamp_actuators(engine: &mut EngineState, elevator: &mut ElevatorState, params: &AircraftParams) {
    engine.thrust_actual = engine.thrust_actual.clamp(0.0, params.t_max);
    let (lo, hi) = (params.elevator_min(), params.elevator_max());
    if elevator.deflection <= lo {
        elevator.deflection = lo;
        elevator.deflection_rate = elevator.deflection_rate.max(0.0);
    } else if elevator.deflection >= hi {
        elevator.deflection = hi;
        elevator.deflection_rate = elevator.deflection_rate.min(0.0);
    }
}
