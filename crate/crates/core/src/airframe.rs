//! Longitudinal rigid-body dynamics of the F/A-18-class airframe.
//!
//! The dynamic state carries the flight-path speed `v_t`, pitch `theta`,
//! flight-path angle of attack `alpha` and pitch rate `q`, plus the inertial
//! position. Aerodynamic forces are evaluated on the air-relative velocity,
//! so wind shows up as a shift in airspeed and angle of attack rather than as
//! explicit gust-derivative terms. In still air the equations reduce to the
//! classical four-state longitudinal model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass, geometry and environment constants of the airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AircraftParams {
    /// kg
    pub mass: f64,
    /// kg/m^3, constant over the approach altitudes
    pub rho: f64,
    /// m/s^2
    pub g: f64,
    /// N, thrust saturation limit
    pub t_max: f64,
    /// m^2
    pub s_ref: f64,
    /// kg m^2
    pub j_y: f64,
    /// m
    pub c_bar: f64,
    pub elevator_min_deg: f64,
    pub elevator_max_deg: f64,
}

impl Default for AircraftParams {
    fn default() -> Self {
        Self {
            mass: 15000.0,
            rho: 1.33,
            g: 9.75,
            t_max: 71172.0,
            s_ref: 37.16,
            j_y: 205000.0,
            c_bar: 3.51,
            elevator_min_deg: -25.0,
            elevator_max_deg: 10.0,
        }
    }
}

impl AircraftParams {
    pub fn elevator_min(&self) -> f64 {
        self.elevator_min_deg.to_radians()
    }

    pub fn elevator_max(&self) -> f64 {
        self.elevator_max_deg.to_radians()
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.g
    }

    /// Returns the name of every violated constraint.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("aircraft.mass", self.mass),
            ("aircraft.rho", self.rho),
            ("aircraft.g", self.g),
            ("aircraft.t_max", self.t_max),
            ("aircraft.s_ref", self.s_ref),
            ("aircraft.j_y", self.j_y),
            ("aircraft.c_bar", self.c_bar),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(key, "must be > 0"));
            }
        }
        if !(self.elevator_min_deg < 0.0 && self.elevator_max_deg > 0.0) {
            return Err(Error::config(
                "aircraft.elevator_min_deg",
                "elevator range must satisfy min < 0 < max",
            ));
        }
        Ok(())
    }
}

/// Polynomial in angle of attack (rad), coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial(self.0.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }
}

/// Aerodynamic coefficient model. Base curves depend on angle of attack;
/// rate and elevator terms are linear increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeroModel {
    pub alpha_min_deg: f64,
    pub alpha_max_deg: f64,
    pub cl_base: Polynomial,
    pub cd_base: Polynomial,
    pub cm_base: Polynomial,
    /// per rad of nondimensional pitch rate q c/(2V)
    pub cl_q: f64,
    pub cm_q: f64,
    /// per rad of elevator deflection
    pub cl_de: f64,
    pub cd_de: f64,
    pub cm_de: f64,
}

const DEFAULT_AERO: &str = include_str!("../data/fa18_aero.toml");

impl Default for AeroModel {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_AERO).expect("bundled aero model is valid")
    }
}

/// Total aerodynamic coefficients at one flight condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroCoefficients {
    pub cl: f64,
    pub cd: f64,
    pub cm: f64,
}

impl AeroModel {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let model: AeroModel = toml::from_str(text).map_err(|e| Error::AeroModel(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("aero model serializes")
    }

    pub fn alpha_range(&self) -> (f64, f64) {
        (self.alpha_min_deg.to_radians(), self.alpha_max_deg.to_radians())
    }

    /// Structural checks only; the physical shape constraints are covered by tests.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min_deg < self.alpha_max_deg) {
            return Err(Error::AeroModel("alpha_min_deg must be below alpha_max_deg".into()));
        }
        for (name, poly) in [
            ("cl_base", &self.cl_base),
            ("cd_base", &self.cd_base),
            ("cm_base", &self.cm_base),
        ] {
            if poly.0.is_empty() || poly.0.iter().any(|c| !c.is_finite()) {
                return Err(Error::AeroModel(format!("{name} needs finite coefficients")));
            }
        }
        Ok(())
    }

    /// Evaluates the coefficients. `q_hat` is the nondimensional pitch rate.
    pub fn coefficients(&self, alpha: f64, q_hat: f64, delta_e: f64) -> Result<AeroCoefficients> {
        let (lo, hi) = self.alpha_range();
        if !(alpha >= lo && alpha <= hi) {
            return Err(Error::OutOfTableRange {
                alpha_deg: alpha.to_degrees(),
                min_deg: self.alpha_min_deg,
                max_deg: self.alpha_max_deg,
            });
        }
        Ok(AeroCoefficients {
            cl: self.cl_base.eval(alpha) + self.cl_q * q_hat + self.cl_de * delta_e,
            cd: self.cd_base.eval(alpha) + self.cd_de * delta_e,
            cm: self.cm_base.eval(alpha) + self.cm_q * q_hat + self.cm_de * delta_e,
        })
    }
}

/// Longitudinal state. `gamma` is always derived as `theta - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AircraftState {
    pub v_t: f64,
    pub theta: f64,
    pub alpha: f64,
    pub q: f64,
    /// m, positive toward the ship
    pub x: f64,
    /// m, positive up
    pub z: f64,
}

impl AircraftState {
    pub fn gamma(&self) -> f64 {
        self.theta - self.alpha
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.v_t, self.theta, self.alpha, self.q, self.x, self.z]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            v_t: s[0],
            theta: s[1],
            alpha: s[2],
            q: s[3],
            x: s[4],
            z: s[5],
        }
    }
}

/// Time derivative of [`AircraftState`], field for field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AircraftDerivative {
    pub v_t: f64,
    pub theta: f64,
    pub alpha: f64,
    pub q: f64,
    pub x: f64,
    pub z: f64,
}

impl AircraftDerivative {
    pub fn to_array(&self) -> [f64; 6] {
        [self.v_t, self.theta, self.alpha, self.q, self.x, self.z]
    }
}

/// Effective plant inputs after actuator dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInputs {
    /// rad
    pub delta_e: f64,
    /// N
    pub thrust: f64,
}

impl ControlInputs {
    pub fn from_throttle(delta_e: f64, delta_t: f64, params: &AircraftParams) -> Self {
        Self {
            delta_e,
            thrust: delta_t * params.t_max,
        }
    }

    /// Throttle fraction δ_T = T / T_max.
    pub fn delta_t(&self, params: &AircraftParams) -> f64 {
        self.thrust / params.t_max
    }
}

/// Inertial wind velocity: `u` along +x, `w` along +z (up).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wind {
    pub u: f64,
    pub w: f64,
}

impl Wind {
    pub const CALM: Wind = Wind { u: 0.0, w: 0.0 };
}

/// Air-relative flight condition seen by the aerodynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirData {
    pub airspeed: f64,
    pub alpha: f64,
    /// Air-relative flight-path angle.
    pub gamma: f64,
}

impl AirData {
    pub fn new(state: &AircraftState, wind: Wind) -> Self {
        if wind.u == 0.0 && wind.w == 0.0 {
            return Self {
                airspeed: state.v_t,
                alpha: state.alpha,
                gamma: state.gamma(),
            };
        }
        let gamma = state.gamma();
        let vx = state.v_t * gamma.cos() - wind.u;
        let vz = state.v_t * gamma.sin() - wind.w;
        let gamma_air = vz.atan2(vx);
        Self {
            airspeed: vx.hypot(vz),
            alpha: state.theta - gamma_air,
            gamma: gamma_air,
        }
    }
}

/// Lift, drag (N) and pitching moment (N m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroForces {
    pub lift: f64,
    pub drag: f64,
    pub moment: f64,
}

pub fn dynamic_pressure(v_t: f64, rho: f64) -> f64 {
    0.5 * rho * v_t * v_t
}

/// Forces in still air, with the state's own speed and angle of attack.
pub fn aero_forces(
    state: &AircraftState,
    inputs: &ControlInputs,
    model: &AeroModel,
    params: &AircraftParams,
) -> Result<AeroForces> {
    aero_forces_air(&AirData::new(state, Wind::CALM), state.q, inputs.delta_e, model, params)
}

pub fn aero_forces_air(
    air: &AirData,
    q: f64,
    delta_e: f64,
    model: &AeroModel,
    params: &AircraftParams,
) -> Result<AeroForces> {
    let q_hat = if air.airspeed > 0.0 {
        q * params.c_bar / (2.0 * air.airspeed)
    } else {
        0.0
    };
    let c = model.coefficients(air.alpha, q_hat, delta_e)?;
    let qs = dynamic_pressure(air.airspeed, params.rho) * params.s_ref;
    Ok(AeroForces {
        lift: qs * c.cl,
        drag: qs * c.cd,
        moment: qs * params.c_bar * c.cm,
    })
}

/// Equations of motion.
///
/// Forces are resolved in the earth frame and projected onto the flight-path
/// axes. With calm air this is
///
/// ```text
/// V'     = (T cos a - D)/m - g sin(gamma)
/// theta' = q
/// a'     = q - (T sin a + L)/(m V) + g cos(gamma)/V
/// q'     = M / J_y
/// ```
pub fn state_derivative(
    state: &AircraftState,
    inputs: &ControlInputs,
    wind: Wind,
    model: &AeroModel,
    params: &AircraftParams,
) -> Result<AircraftDerivative> {
    if !(state.v_t > 0.0) {
        return Err(Error::NonFiniteDerivative("flight-path speed must stay positive"));
    }
    let air = AirData::new(state, wind);
    let f = aero_forces_air(&air, state.q, inputs.delta_e, model, params)?;
    let m = params.mass;
    let gamma = state.gamma();
    let (sg, cg) = gamma.sin_cos();
    let (sa, ca) = air.gamma.sin_cos();
    let (st, ct) = state.theta.sin_cos();

    let fx = inputs.thrust * ct - f.drag * ca - f.lift * sa;
    let fz = inputs.thrust * st - f.drag * sa + f.lift * ca - m * params.g;

    let v_dot = (fx * cg + fz * sg) / m;
    let gamma_dot = (fz * cg - fx * sg) / (m * state.v_t);
    let d = AircraftDerivative {
        v_t: v_dot,
        theta: state.q,
        alpha: state.q - gamma_dot,
        q: f.moment / params.j_y,
        x: state.v_t * cg,
        z: state.v_t * sg,
    };
    if d.to_array().iter().all(|v| v.is_finite()) {
        Ok(d)
    } else {
        Err(Error::NonFiniteDerivative("aircraft dynamics"))
    }
}
