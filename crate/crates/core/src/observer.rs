//! Finite-time augmented observer for the pitch channel.
//!
//! The pitch perturbation is modelled as a double integrator driven by a known
//! input `h` and an unknown lumped disturbance `w3`:
//!
//! ```text
//! w1' = w2,  w2' = w3 + h,  w3' = eta,  y = w1 + n
//! ```
//!
//! `x1, x2, x3` estimate `w1, w2, w3` with fractional-power output injection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::rk4_step;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub alpha1: f64,
    pub epsilon: f64,
}

impl Default for ObserverParams {
    fn default() -> Self {
        Self {
            k1: 6.0,
            k2: 11.0,
            k3: 6.0,
            alpha1: 0.6,
            epsilon: 0.5,
        }
    }
}

impl ObserverParams {
    pub fn alpha2(&self) -> f64 {
        (2.0 * self.alpha1 + 1.0) / 3.0
    }

    pub fn alpha3(&self) -> f64 {
        (self.alpha1 + 2.0) / 3.0
    }

    /// Lists every violated constraint; empty when the parameters are usable.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let finite = [self.k1, self.k2, self.k3, self.alpha1, self.epsilon]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            v.push("all observer parameters must be finite".to_string());
            return v;
        }
        if self.k1 <= 0.0 {
            v.push(format!("k1 must be > 0 (got {})", self.k1));
        }
        if self.k3 <= 0.0 {
            v.push(format!("k3 must be > 0 (got {})", self.k3));
        }
        if self.k1 > 0.0 && self.k3 > 0.0 {
            let gate = 4.0 * self.k1 / (std::f64::consts::PI * self.k3);
            if self.k2 <= gate {
                v.push(format!("k2 must be > 4*k1/(pi*k3) = {gate} (got {})", self.k2));
            }
        }
        if !(self.alpha1 > 0.0 && self.alpha1 < 1.0) {
            v.push(format!("alpha1 must lie in (0, 1) (got {})", self.alpha1));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            v.push(format!("epsilon must lie in (0, 1) (got {})", self.epsilon));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidObserver(v))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ObserverState {
    /// estimated pitch perturbation, rad
    pub x1: f64,
    /// estimated pitch-rate perturbation, rad/s
    pub x2: f64,
    /// estimated lumped disturbance, rad/s^2
    pub x3: f64,
}

impl ObserverState {
    pub fn to_array(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            x1: a[0],
            x2: a[1],
            x3: a[2],
        }
    }
}

/// `|e|^a sign(e)`
fn sig(e: f64, a: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        e.abs().powf(a).copysign(e)
    }
}

pub fn observer_derivative(state: &ObserverState, y_op: f64, h: f64, p: &ObserverParams) -> [f64; 3] {
    let e = state.x1 - y_op;
    let eps = p.epsilon;
    [
        state.x2 - p.k3 / eps * sig(e, p.alpha3()),
        state.x3 + h - p.k2 / (eps * eps) * sig(e, p.alpha2()),
        -p.k1 / (eps * eps * eps) * sig(e, p.alpha1),
    ]
}

/// One RK4 step with the measurement linearly interpolated between its
/// values at the start and end of the step and the known input held.
///
/// Holding the measurement constant instead lets `x1` run past a stale
/// sample inside the step, which the fractional-power injection turns into a
/// large bias whenever the signal moves faster than `|e|/dt`.
pub fn estimate_step_interpolated(
    state: &ObserverState,
    y_start: f64,
    y_end: f64,
    h: f64,
    p: &ObserverParams,
    dt: f64,
) -> Result<ObserverState> {
    let next = rk4_step(
        |tau, x| {
            let y = y_start + (y_end - y_start) * (tau / dt);
            Ok(observer_derivative(&ObserverState::from_array(*x), y, h, p))
        },
        &state.to_array(),
        0.0,
        dt,
    )?;
    if next.iter().all(|v| v.is_finite()) {
        Ok(ObserverState::from_array(next))
    } else {
        Err(Error::NonFiniteEstimate)
    }
}

/// One RK4 step with the measurement and known input held over the step.
pub fn estimate_step(state: &ObserverState, y_op: f64, h: f64, p: &ObserverParams, dt: f64) -> Result<ObserverState> {
    let next = rk4_step(
        |_, x| Ok(observer_derivative(&ObserverState::from_array(*x), y_op, h, p)),
        &state.to_array(),
        0.0,
        dt,
    )?;
    if next.iter().all(|v| v.is_finite()) {
        Ok(ObserverState::from_array(next))
    } else {
        Err(Error::NonFiniteEstimate)
    }
}
