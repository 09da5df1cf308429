//! Closed-loop scenario runner.
//!
//! Each step evaluates the controllers on the sampled measurements, saturates
//! the commands, then advances aircraft, actuators and observer together as
//! one RK4 system. Deck motion and turbulence are advanced afterwards with
//! their own held inputs; wind is held over a step.

use std::io::Write;

use serde::Serialize;

use crate::actuation::{clamp_actuators, saturate_inputs, ActuatorParams, ElevatorState, EngineState, SaturationFlags};
use crate::airframe::{state_derivative, AeroModel, AircraftParams, AircraftState, ControlInputs, Wind};
use crate::control::{
    flight_path_generator, flight_path_rate, known_input, pitch_opd, ControlCommand, GuidanceController, Integrator,
    OuterGains, PitchGains, PitchPid, SinkController, VelocityController,
};
use crate::environment::{Environment, EnvironmentToggles, NoiseParams, ShipParams, WindParams};
use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::observer::{observer_derivative, ObserverParams, ObserverState};
use crate::trimlin::{linearize, solve_trim, TrimOptions, TrimPoint, TrimTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    PitchStep,
    SinkStep,
    Approach,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::PitchStep, Scenario::SinkStep, Scenario::Approach];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::PitchStep => "pitch_step",
            Scenario::SinkStep => "sink_step",
            Scenario::Approach => "approach",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }

    pub fn default_duration(self) -> f64 {
        match self {
            Scenario::PitchStep => 10.0,
            Scenario::SinkStep => 30.0,
            Scenario::Approach => 60.0,
        }
    }

    pub fn default_initial_range(self) -> f64 {
        match self {
            Scenario::Approach => 2000.0,
            _ => 800.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Opd,
    Pid,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Opd => "opd",
            ControllerKind::Pid => "pid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "opd" => Some(ControllerKind::Opd),
            "pid" => Some(ControllerKind::Pid),
            _ => None,
        }
    }
}

/// Source of the pitch-channel partials used by the controllers and observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Partials {
    /// Reference small-perturbation values.
    Reference,
    /// Recomputed from the local trim Jacobian.
    Linearized,
}

impl Partials {
    pub fn as_str(self) -> &'static str {
        match self {
            Partials::Reference => "reference",
            Partials::Linearized => "linearized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reference" => Some(Partials::Reference),
            "linearized" => Some(Partials::Linearized),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub controller: ControllerKind,
    pub wind_on: bool,
    pub noise_on: bool,
    pub ship_on: bool,
    pub seed: u64,
    /// s
    pub duration: f64,
    /// s
    pub dt: f64,
    /// m, horizontal distance from the ship's centre of pitch at t = 0
    pub initial_range: f64,
    /// deg
    pub pitch_step_deg: f64,
    /// m/s, descent positive
    pub sink_rate: f64,
    /// deg
    pub glide_slope_deg: f64,
    /// m/s
    pub trim_speed: f64,
    /// s; metrics that exclude the initial transient start here
    pub transient: f64,
    pub decimation: usize,
    /// Replace the observer by the true perturbation states and disturbance.
    pub oracle_observer: bool,
    pub partials: Partials,
    pub pid_integral_limit: f64,
    /// s
    pub pid_derivative_tau: f64,
    pub aircraft: AircraftParams,
    pub aero: AeroModel,
    pub actuators: ActuatorParams,
    pub observer: ObserverParams,
    pub pitch: PitchGains,
    pub outer: OuterGains,
    pub ship: ShipParams,
    pub wind: WindParams,
    pub noise: NoiseParams,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, controller: ControllerKind) -> Self {
        Self {
            scenario,
            controller,
            wind_on: false,
            noise_on: false,
            ship_on: scenario == Scenario::Approach,
            seed: 0,
            duration: scenario.default_duration(),
            dt: 0.001,
            initial_range: scenario.default_initial_range(),
            pitch_step_deg: 1.0,
            sink_rate: 10.0,
            glide_slope_deg: 3.5,
            trim_speed: 69.1,
            transient: 5.0,
            decimation: 10,
            oracle_observer: false,
            partials: Partials::Reference,
            pid_integral_limit: 0.5,
            pid_derivative_tau: 0.01,
            aircraft: AircraftParams::default(),
            aero: AeroModel::default(),
            actuators: ActuatorParams::default(),
            observer: ObserverParams::default(),
            pitch: PitchGains::default(),
            outer: OuterGains::default(),
            ship: ShipParams::default(),
            wind: WindParams::default(),
            noise: NoiseParams::default(),
        }
    }

    pub fn with_disturbances(mut self, on: bool) -> Self {
        self.wind_on = on;
        self.noise_on = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("duration", self.duration),
            ("trim_speed", self.trim_speed),
            ("pid.tau_d", self.pid_derivative_tau),
            ("pid.integral_limit", self.pid_integral_limit),
            ("guid.tau_d", self.outer.z_derivative_tau),
            ("ship.noise_dt", self.ship.noise_dt),
            ("noise.dt", self.noise.noise_dt),
            ("wind.turbulence_dt", self.wind.turbulence_dt),
            ("actuator.engine_tau", self.actuators.engine_tau),
            ("actuator.elevator_omega", self.actuators.elevator_omega),
            ("actuator.elevator_zeta", self.actuators.elevator_zeta),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be > 0"));
            }
        }
        if self.decimation == 0 {
            return Err(Error::config("decimation", "must be >= 1"));
        }
        if self.initial_range < 0.0 || !self.initial_range.is_finite() {
            return Err(Error::config("initial_range", "must be >= 0"));
        }
        if self.pitch.dqdot_dde == 0.0 {
            return Err(Error::config("pitch.dqdot_dde", "must be nonzero"));
        }
        if !(self.glide_slope_deg > 0.0 && self.glide_slope_deg < 45.0) {
            return Err(Error::config("glide_slope_deg", "must lie in (0, 45)"));
        }
        if !(self.transient >= 0.0) {
            return Err(Error::config("transient", "must be >= 0"));
        }
        self.aircraft.validate()?;
        self.aero.validate()?;
        self.observer.validate()?;
        Ok(())
    }
}

/// Angles in degrees, everything else SI.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub v_t: f64,
    pub theta: f64,
    pub alpha: f64,
    pub q: f64,
    pub x: f64,
    pub z: f64,
    pub gamma: f64,
    pub delta_e: f64,
    pub thrust: f64,
    pub theta_r: f64,
    pub zdot_r: f64,
    pub z_r: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub d_true: f64,
    pub u_g: f64,
    pub w_g: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub z_g: f64,
    pub theta_s: f64,
    pub x_l: f64,
    pub z_l: f64,
    pub noise: f64,
    pub sat_elev: u8,
    pub sat_thr: u8,
}

pub const TRACE_HEADER: [&str; 32] = [
    "t", "v_t", "theta", "alpha", "q", "x", "z", "gamma", "delta_e", "thrust", "theta_r", "zdot_r", "z_r", "x1", "x2",
    "x3", "d_true", "u_g", "w_g", "u1", "u2", "u3", "w1", "w2", "w3", "z_g", "theta_s", "x_l", "z_l", "noise",
    "sat_elev", "sat_thr",
];

impl TraceRecord {
    pub fn values(&self) -> [f64; 32] {
        [
            self.t,
            self.v_t,
            self.theta,
            self.alpha,
            self.q,
            self.x,
            self.z,
            self.gamma,
            self.delta_e,
            self.thrust,
            self.theta_r,
            self.zdot_r,
            self.z_r,
            self.x1,
            self.x2,
            self.x3,
            self.d_true,
            self.u_g,
            self.w_g,
            self.u1,
            self.u2,
            self.u3,
            self.w1,
            self.w2,
            self.w3,
            self.z_g,
            self.theta_s,
            self.x_l,
            self.z_l,
            self.noise,
            self.sat_elev as f64,
            self.sat_thr as f64,
        ]
    }
}

pub trait TraceSink {
    fn record(&mut self, r: &TraceRecord) -> Result<()>;

    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Discards records.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _: &TraceRecord) -> Result<()> {
        Ok(())
    }
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, r: &TraceRecord) -> Result<()> {
        self.push(*r);
        Ok(())
    }
}

/// Streams CSV rows; written rows survive an aborted run.
pub struct CsvSink<W: Write> {
    out: W,
    label: String,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut out: W, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        writeln!(out, "{}", TRACE_HEADER.join(",")).map_err(|e| Error::io(&label, e))?;
        Ok(Self { out, label })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TraceSink for CsvSink<W> {
    fn record(&mut self, r: &TraceRecord) -> Result<()> {
        let v = r.values();
        let mut line = String::with_capacity(400);
        for (i, x) in v.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            if i >= 30 {
                line.push_str(if *x != 0.0 { "1" } else { "0" });
            } else {
                line.push_str(&x.to_string());
            }
        }
        writeln!(self.out, "{line}").map_err(|e| Error::io(&self.label, e))
    }

    fn finish(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.label, e))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunMetrics {
    pub scenario: String,
    pub controller: String,
    pub seed: u64,
    /// s after t = 0 from which the tracked signal stays in the 2% band; `None` if it never does.
    pub settle_time_2pct: Option<f64>,
    /// fraction of the commanded step, averaged over the last second
    pub steady_state_error: f64,
    /// fraction of the commanded step
    pub overshoot: f64,
    /// m, after the transient
    pub max_glidepath_deviation: f64,
    /// m, path error when touchdown is detected
    pub touchdown_vertical_error: Option<f64>,
    pub touchdown_time: Option<f64>,
    pub elevator_saturation_count: u64,
    pub thrust_saturation_count: u64,
    /// deg/s^2, RMS of x3 - d_true after the transient
    pub observer_rms_error: f64,
    /// deg, RMS of theta - theta_r after the transient
    pub pitch_tracking_rms: f64,
    pub duration_simulated: f64,
}

/// Full continuous state integrated by the main RK4 step.
const N: usize = 12;

fn pack(ac: &AircraftState, eng: &EngineState, el: &ElevatorState, obs: &ObserverState) -> [f64; N] {
    [
        ac.v_t,
        ac.theta,
        ac.alpha,
        ac.q,
        ac.x,
        ac.z,
        eng.thrust_actual,
        el.deflection,
        el.deflection_rate,
        obs.x1,
        obs.x2,
        obs.x3,
    ]
}

fn unpack(y: &[f64; N]) -> (AircraftState, EngineState, ElevatorState, ObserverState) {
    (
        AircraftState::from_slice(&y[0..6]),
        EngineState { thrust_actual: y[6] },
        ElevatorState {
            deflection: y[7],
            deflection_rate: y[8],
        },
        ObserverState {
            x1: y[9],
            x2: y[10],
            x3: y[11],
        },
    )
}

/// Tracks the last exit from a tolerance band around a target.
#[derive(Debug, Clone, Copy)]
struct SettleTracker {
    band: f64,
    last_outside: Option<f64>,
    last_inside: bool,
}

impl SettleTracker {
    fn new(band: f64) -> Self {
        Self {
            band,
            last_outside: None,
            last_inside: true,
        }
    }

    fn observe(&mut self, t: f64, error: f64) {
        let inside = error.abs() <= self.band;
        if !inside {
            self.last_outside = Some(t);
        }
        self.last_inside = inside;
    }

    /// Time of the first sample after the last exit from the band.
    fn settle_time(&self, dt: f64) -> Option<f64> {
        if !self.last_inside {
            return None;
        }
        Some(self.last_outside.map_or(0.0, |t| t + dt))
    }
}

struct Controllers {
    pid: PitchPid,
    velocity: VelocityController,
    sink: SinkController,
    guidance: GuidanceController,
}

/// Result of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub metrics: RunMetrics,
    pub trim: TrimPoint,
    pub pitch_gains: PitchGains,
}

fn pitch_gains_for(config: &ScenarioConfig, trim: &TrimPoint) -> Result<PitchGains> {
    let mut gains = config.pitch;
    if config.partials == Partials::Linearized {
        let lin = linearize(trim, &config.aircraft, &config.aero)?;
        gains.dqdot_dq = lin.dqdot_dq();
        gains.dqdot_dde = lin.dqdot_dde();
    }
    Ok(gains)
}

pub fn trim_for(config: &ScenarioConfig) -> Result<TrimPoint> {
    solve_trim(
        &config.aircraft,
        &config.aero,
        TrimTarget::Airspeed(config.trim_speed),
        &TrimOptions::default(),
    )
}

/// Runs one scenario, streaming decimated trace records into `sink`.
pub fn run_scenario(config: &ScenarioConfig, sink: &mut dyn TraceSink) -> Result<RunReport> {
    config.validate()?;
    let trim = trim_for(config)?;
    let gains = pitch_gains_for(config, &trim)?;
    let dt = config.dt;
    let steps = (config.duration / dt).round() as u64;
    let params = &config.aircraft;
    let gs = config.glide_slope_deg.to_radians();

    let mut env = Environment::new(
        config.seed,
        dt,
        config.ship,
        config.wind,
        config.noise,
        EnvironmentToggles {
            ship: config.ship_on,
            wind: config.wind_on,
            noise: config.noise_on,
        },
    )?;
    env.warm_up(dt)?;

    let mut ctl = Controllers {
        pid: PitchPid::new(config.pid_integral_limit, config.pid_derivative_tau),
        velocity: VelocityController::new(&config.outer, trim.thrust_star, params.mass),
        sink: SinkController::new(&config.outer, trim.theta_star),
        guidance: GuidanceController::new(&config.outer),
    };

    let x0 = env.ship.x_g - config.initial_range;
    let mut ac = AircraftState { x: x0, ..trim.state() };
    let mut engine = EngineState {
        thrust_actual: trim.thrust_star,
    };
    if config.scenario == Scenario::Approach {
        // Steady descent along the path at trim speed and angle of attack.
        ac.theta = trim.alpha_star - gs;
        ac.z = flight_path_generator(&env.landing_point(), x0, gs);
        let thrust = trim.thrust_star - params.weight() * gs.sin();
        engine.thrust_actual = thrust;
        let o = &config.outer;
        ctl.sink.integral = Integrator::with_value(o.s_integral_limit, -gs / o.ki_s);
        ctl.velocity.integral =
            Integrator::with_value(o.v_integral_limit, (thrust - trim.thrust_star) / (params.mass * o.ki_v));
    }
    let mut elevator = ElevatorState {
        deflection: trim.delta_e_star,
        deflection_rate: 0.0,
    };
    let mut obs = ObserverState {
        x1: ac.theta - trim.theta_star,
        ..Default::default()
    };

    let mut metrics = RunMetrics {
        scenario: config.scenario.as_str().to_string(),
        controller: config.controller.as_str().to_string(),
        seed: config.seed,
        ..Default::default()
    };
    let step_rad = config.pitch_step_deg.to_radians();
    let sink_cmd = -config.sink_rate;
    let mut settle = match config.scenario {
        Scenario::PitchStep => SettleTracker::new(0.02 * step_rad.abs()),
        Scenario::SinkStep => SettleTracker::new(0.02 * sink_cmd.abs()),
        Scenario::Approach => SettleTracker::new(f64::INFINITY),
    };
    let tail_start = config.duration - 1.0;
    let (mut tail_sum, mut tail_n) = (0.0, 0u64);
    let mut peak: f64 = 0.0;
    let (mut obs_sq, mut pitch_sq, mut rms_n) = (0.0, 0.0, 0u64);
    let mut prev_sat = SaturationFlags::default();
    let mut prev_vdot = 0.0;
    let mut t = 0.0;

    for k in 0..=steps {
        t = k as f64 * dt;
        env.sample_sensor();
        let wind = env.wind(t, ac.x);
        let wind_vec = Wind {
            u: wind.u_g,
            w: wind.w_g,
        };
        let lp = env.landing_point();
        let noise = env.sensor_noise(t);
        let theta_meas = ac.theta + noise;

        // Touchdown: first sample at or below the deck plane once past the
        // landing point. An aircraft already under the plane when it reaches
        // x_l (a short arrival) is caught on that sample.
        if config.scenario == Scenario::Approach && ac.z <= lp.z_l && ac.x >= lp.x_l {
            let z_r = flight_path_generator(&lp, ac.x, gs);
            metrics.touchdown_time = Some(t);
            metrics.touchdown_vertical_error = Some(ac.z - z_r);
            break;
        }

        // The plant derivative at the start of the step gives the true pitch
        // acceleration. The oracle's disturbance is taken against the actual
        // surface position: against the command it would contain the
        // controller's own previous output and close an algebraic loop.
        let inputs_now = ControlInputs {
            delta_e: elevator.deflection,
            thrust: engine.thrust_actual,
        };
        let d_now = state_derivative(&ac, &inputs_now, wind_vec, &config.aero, params).map_err(|e| abort(t, e))?;
        if config.oracle_observer {
            obs = ObserverState {
                x1: ac.theta - trim.theta_star,
                x2: ac.q - trim.q_star,
                x3: d_now.q
                    - gains.dqdot_dq * (ac.q - trim.q_star)
                    - gains.dqdot_dde * (elevator.deflection - trim.delta_e_star),
            };
        }

        let (z_r, zdot_r, theta_r) = match config.scenario {
            Scenario::PitchStep => (ac.z, 0.0, trim.theta_star + step_rad),
            Scenario::SinkStep => {
                let th = ctl.sink.step(sink_cmd, d_now.z, &config.outer, dt);
                (ac.z, sink_cmd, th)
            }
            Scenario::Approach => {
                let z_r = flight_path_generator(&lp, ac.x, gs);
                let ff = flight_path_rate(d_now.x, gs);
                let zdot_r = ctl.guidance.step(z_r, ac.z, ff, &config.outer, dt);
                let th = ctl.sink.step(zdot_r, d_now.z, &config.outer, dt);
                (z_r, zdot_r, th)
            }
        };
        let v_r = trim.v_t_star;
        let thrust_cmd = ctl
            .velocity
            .step(v_r, ac.v_t, prev_vdot, &config.outer, dt, prev_sat.thrust);
        let delta_e_cmd = match config.controller {
            ControllerKind::Opd => pitch_opd(theta_r, theta_meas, &obs, &gains, trim.delta_e_star).delta_e_cmd,
            ControllerKind::Pid => {
                ctl.pid
                    .step(theta_r, theta_meas, &gains, trim.delta_e_star, dt, prev_sat.elevator)
                    .0
            }
        };
        let raw = ControlCommand {
            delta_e_cmd,
            thrust_cmd,
            theta_r,
            zdot_r,
            v_r,
        };
        if !(raw.delta_e_cmd.is_finite() && raw.thrust_cmd.is_finite()) {
            return Err(abort(t, Error::NonFiniteDerivative("control command")));
        }
        let (cmd, sat) = saturate_inputs(&raw, params);
        metrics.elevator_saturation_count += sat.elevator as u64;
        metrics.thrust_saturation_count += sat.thrust as u64;
        let delta_de_sat = cmd.delta_e_cmd - trim.delta_e_star;
        let h = known_input(&gains, obs.x2, delta_de_sat);
        let d_true = d_now.q - gains.dqdot_dq * (ac.q - trim.q_star) - gains.dqdot_dde * delta_de_sat;

        // Metrics on the state at t.
        let pitch_err = ac.theta - theta_r;
        match config.scenario {
            Scenario::PitchStep => {
                let dtheta = ac.theta - trim.theta_star;
                settle.observe(t, dtheta - step_rad);
                peak = if step_rad >= 0.0 {
                    peak.max(dtheta)
                } else {
                    peak.min(dtheta)
                };
                if t >= tail_start {
                    tail_sum += dtheta - step_rad;
                    tail_n += 1;
                }
            }
            Scenario::SinkStep => {
                let e = d_now.z - sink_cmd;
                settle.observe(t, e);
                peak = if sink_cmd <= 0.0 {
                    peak.min(d_now.z)
                } else {
                    peak.max(d_now.z)
                };
                if t >= tail_start {
                    tail_sum += e;
                    tail_n += 1;
                }
            }
            Scenario::Approach => {}
        }
        if t >= config.transient {
            obs_sq += (obs.x3 - d_true).powi(2);
            pitch_sq += pitch_err.powi(2);
            rms_n += 1;
            if config.scenario == Scenario::Approach {
                metrics.max_glidepath_deviation = metrics.max_glidepath_deviation.max((ac.z - z_r).abs());
            }
        }

        if k % config.decimation as u64 == 0 {
            let deg = f64::to_degrees;
            sink.record(&TraceRecord {
                t,
                v_t: ac.v_t,
                theta: deg(ac.theta),
                alpha: deg(ac.alpha),
                q: deg(ac.q),
                x: ac.x,
                z: ac.z,
                gamma: deg(ac.gamma()),
                delta_e: deg(elevator.deflection),
                thrust: engine.thrust_actual,
                theta_r: deg(theta_r),
                zdot_r,
                z_r,
                x1: deg(obs.x1),
                x2: deg(obs.x2),
                x3: deg(obs.x3),
                d_true: deg(d_true),
                u_g: wind.u_g,
                w_g: wind.w_g,
                u1: wind.u1,
                u2: wind.u2,
                u3: wind.u3,
                w1: wind.w1,
                w2: wind.w2,
                w3: wind.w3,
                z_g: env.ship.z_g(),
                theta_s: deg(env.ship.theta_s()),
                x_l: lp.x_l,
                z_l: lp.z_l,
                noise: deg(noise),
                sat_elev: sat.elevator as u8,
                sat_thr: sat.thrust as u8,
            })?;
        }
        if k == steps {
            break;
        }

        // Advance the coupled continuous state over [t, t + dt].
        let y0 = pack(&ac, &engine, &elevator, &obs);
        let theta_star = trim.theta_star;
        let oracle = config.oracle_observer;
        let y1 = rk4_step(
            |_, y: &[f64; N]| {
                let (a, e, el, o) = unpack(y);
                let inputs = ControlInputs {
                    delta_e: el.deflection,
                    thrust: e.thrust_actual,
                };
                let da = state_derivative(&a, &inputs, wind_vec, &config.aero, params)?;
                let de = crate::actuation::engine_derivative(&e, cmd.thrust_cmd, &config.actuators);
                let (d_el, d_rate) = crate::actuation::elevator_derivative(&el, cmd.delta_e_cmd, &config.actuators);
                let dobs = if oracle {
                    [0.0; 3]
                } else {
                    observer_derivative(&o, a.theta - theta_star + noise, h, &config.observer)
                };
                let a6 = da.to_array();
                Ok([
                    a6[0], a6[1], a6[2], a6[3], a6[4], a6[5], de, d_el, d_rate, dobs[0], dobs[1], dobs[2],
                ])
            },
            &y0,
            t,
            dt,
        )
        .map_err(|e| abort(t, e))?;
        if y1.iter().any(|v| !v.is_finite()) {
            let err = if y1[9..].iter().any(|v| !v.is_finite()) {
                Error::NonFiniteEstimate
            } else {
                Error::NonFiniteDerivative("state update")
            };
            return Err(abort(t, err));
        }
        (ac, engine, elevator, obs) = unpack(&y1);
        clamp_actuators(&mut engine, &mut elevator, params);
        env.advance(ac.v_t, dt).map_err(|e| abort(t, e))?;
        prev_sat = sat;
        prev_vdot = d_now.v_t;
    }
    sink.finish()?;

    metrics.duration_simulated = t;
    let step_size = match config.scenario {
        Scenario::PitchStep => step_rad.abs(),
        Scenario::SinkStep => sink_cmd.abs(),
        Scenario::Approach => 1.0,
    };
    if config.scenario != Scenario::Approach {
        metrics.settle_time_2pct = settle.settle_time(dt);
        metrics.steady_state_error = if tail_n > 0 {
            (tail_sum / tail_n as f64).abs() / step_size
        } else {
            f64::NAN
        };
        let target = match config.scenario {
            Scenario::PitchStep => step_rad,
            _ => sink_cmd,
        };
        metrics.overshoot = ((peak - target) / target).max(0.0);
    }
    if rms_n > 0 {
        metrics.observer_rms_error = (obs_sq / rms_n as f64).sqrt().to_degrees();
        metrics.pitch_tracking_rms = (pitch_sq / rms_n as f64).sqrt().to_degrees();
    }
    Ok(RunReport {
        metrics,
        trim,
        pitch_gains: gains,
    })
}

fn abort(t: f64, e: Error) -> Error {
    match e {
        Error::Abort { .. } => e,
        other => Error::Abort {
            t,
            source: Box::new(other),
        },
    }
}

/// Paired metrics for the two pitch controllers on identical environments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub opd: RunMetrics,
    pub pid: RunMetrics,
    /// `1 - t_opd / t_pid`; `None` unless both settled
    pub speedup: Option<f64>,
}

pub fn compare_controllers(
    config: &ScenarioConfig,
    opd_sink: &mut dyn TraceSink,
    pid_sink: &mut dyn TraceSink,
) -> Result<Comparison> {
    let mut c = config.clone();
    c.controller = ControllerKind::Opd;
    let opd = run_scenario(&c, opd_sink)?.metrics;
    c.controller = ControllerKind::Pid;
    let pid = run_scenario(&c, pid_sink)?.metrics;
    let speedup = match (opd.settle_time_2pct, pid.settle_time_2pct) {
        (Some(a), Some(b)) if b > 0.0 => Some(1.0 - a / b),
        _ => None,
    };
    Ok(Comparison { opd, pid, speedup })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settle_tracker_reports_after_last_exit() {
        let mut s = SettleTracker::new(0.1);
        for (k, e) in [1.0, 0.5, 0.05, 0.2, 0.05, 0.0].iter().enumerate() {
            s.observe(k as f64, *e);
        }
        assert_eq!(s.settle_time(1.0), Some(4.0));
        s.observe(6.0, 0.3);
        assert_eq!(s.settle_time(1.0), None);
    }

    #[test]
    fn header_matches_record_width() {
        assert_eq!(TRACE_HEADER.len(), TraceRecord::default().values().len());
        assert_eq!(TRACE_HEADER[0], "t");
        assert_eq!(TRACE_HEADER[31], "sat_thr");
    }

    #[test]
    fn csv_sink_writes_header_and_rows() {
        let mut sink = CsvSink::new(Vec::new(), "mem").unwrap();
        sink.record(&TraceRecord {
            t: 0.5,
            sat_elev: 1,
            ..Default::default()
        })
        .unwrap();
        let text = String::from_utf8(sink.into_inner()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER.join(","));
        assert!(lines[1].starts_with("0.5,0,"));
        assert!(lines[1].ends_with(",1,0"));
    }

    #[test]
    fn invalid_dt_is_rejected() {
        let mut c = ScenarioConfig::new(Scenario::PitchStep, ControllerKind::Opd);
        c.dt = -0.001;
        match run_scenario(&c, &mut NullSink) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::parse(s.as_str()), Some(s));
        }
        for c in [ControllerKind::Opd, ControllerKind::Pid] {
            assert_eq!(ControllerKind::parse(c.as_str()), Some(c));
        }
        assert_eq!(Partials::parse("linearized"), Some(Partials::Linearized));
    }
}
