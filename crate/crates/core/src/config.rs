//! Flat dotted-key view of [`ScenarioConfig`].
//!
//! Configuration is resolved as defaults, then a TOML file, then inline
//! `key=value` overrides. A resolved configuration serializes back to TOML
//! that reproduces it exactly.

use std::fmt::Write as _;

use crate::environment::AngleUnit;
use crate::error::{Error, Result};
use crate::sim::{ControllerKind, Partials, Scenario, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Float,
    Int,
    Bool,
    Choice(&'static [&'static str]),
}

impl KeyKind {
    pub fn describe(self) -> String {
        match self {
            KeyKind::Float => "number".into(),
            KeyKind::Int => "integer".into(),
            KeyKind::Bool => "on|off".into(),
            KeyKind::Choice(c) => c.join("|"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

pub struct Key {
    pub name: &'static str,
    /// Accepted in place of `name` on the command line and in overrides.
    pub alias: Option<&'static str>,
    pub kind: KeyKind,
    pub help: &'static str,
    get: fn(&ScenarioConfig) -> Value,
    set: fn(&mut ScenarioConfig, Value),
}

impl std::fmt::Debug for Key {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Key")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Key {
    pub fn get(&self, c: &ScenarioConfig) -> Value {
        (self.get)(c)
    }
}

const SCENARIOS: &[&str] = &["pitch_step", "sink_step", "approach"];
const CONTROLLERS: &[&str] = &["opd", "pid"];
const PARTIALS: &[&str] = &["reference", "linearized"];
const UNITS: &[&str] = &["deg", "rad"];

macro_rules! float {
    ($name:literal, $help:literal, $($f:ident).+) => {
        Key {
            name: $name,
            alias: None,
            kind: KeyKind::Float,
            help: $help,
            get: |c| Value::Float(c.$($f).+),
            set: |c, v| {
                if let Value::Float(x) = v {
                    c.$($f).+ = x;
                }
            },
        }
    };
}

macro_rules! boolean {
    ($name:literal, $alias:literal, $help:literal, $($f:ident).+) => {
        Key {
            name: $name,
            alias: Some($alias),
            kind: KeyKind::Bool,
            help: $help,
            get: |c| Value::Bool(c.$($f).+),
            set: |c, v| {
                if let Value::Bool(x) = v {
                    c.$($f).+ = x;
                }
            },
        }
    };
}

fn text(v: Value) -> String {
    match v {
        Value::Text(s) => s,
        _ => String::new(),
    }
}

/// Every configurable key, in snapshot order.
pub static KEYS: &[Key] = &[
    Key {
        name: "scenario",
        alias: None,
        kind: KeyKind::Choice(SCENARIOS),
        help: "scenario to run",
        get: |c| Value::Text(c.scenario.as_str().into()),
        set: |c, v| {
            if let Some(s) = Scenario::parse(&text(v)) {
                c.scenario = s;
            }
        },
    },
    Key {
        name: "controller",
        alias: None,
        kind: KeyKind::Choice(CONTROLLERS),
        help: "pitch controller",
        get: |c| Value::Text(c.controller.as_str().into()),
        set: |c, v| {
            if let Some(k) = ControllerKind::parse(&text(v)) {
                c.controller = k;
            }
        },
    },
    Key {
        name: "seed",
        alias: None,
        kind: KeyKind::Int,
        help: "random seed for every stochastic stream",
        get: |c| Value::Int(c.seed),
        set: |c, v| {
            if let Value::Int(x) = v {
                c.seed = x;
            }
        },
    },
    float!("duration", "s, simulated time", duration),
    float!("dt", "s, integration step", dt),
    float!("initial_range", "m, initial distance behind the ship", initial_range),
    float!("pitch_step_deg", "deg, pitch command step", pitch_step_deg),
    float!("sink_rate", "m/s, commanded sink rate (descent positive)", sink_rate),
    float!("glide_slope_deg", "deg, glide-path angle", glide_slope_deg),
    float!("trim_speed", "m/s, trim airspeed", trim_speed),
    float!("transient", "s, start of the metric window", transient),
    Key {
        name: "decimation",
        alias: None,
        kind: KeyKind::Int,
        help: "trace every k-th step",
        get: |c| Value::Int(c.decimation as u64),
        set: |c, v| {
            if let Value::Int(x) = v {
                c.decimation = x as usize;
            }
        },
    },
    boolean!("wind_on", "wind", "air-wake and turbulence", wind_on),
    boolean!("noise_on", "noise", "pitch measurement noise", noise_on),
    boolean!("ship_on", "ship", "deck motion", ship_on),
    boolean!(
        "oracle_observer",
        "oracle",
        "feed the controller true states instead of estimates",
        oracle_observer
    ),
    Key {
        name: "partials",
        alias: None,
        kind: KeyKind::Choice(PARTIALS),
        help: "pitch partials: reference values or local Jacobian",
        get: |c| Value::Text(c.partials.as_str().into()),
        set: |c, v| {
            if let Some(p) = Partials::parse(&text(v)) {
                c.partials = p;
            }
        },
    },
    float!("pitch.kp", "O-PD proportional gain, 1/s^2", pitch.kp_theta),
    float!("pitch.kd", "O-PD derivative gain, 1/s", pitch.kd_theta),
    float!("pitch.dqdot_dq", "pitch damping partial, 1/s", pitch.dqdot_dq),
    float!(
        "pitch.dqdot_dde",
        "elevator effectiveness, 1/s^2 per rad",
        pitch.dqdot_dde
    ),
    float!("pid.kp", "PID proportional gain", pitch.kp_theta2),
    float!("pid.ki", "PID integral gain", pitch.ki_theta),
    float!("pid.kd", "PID derivative gain", pitch.kd_theta2),
    float!("pid.tau_d", "s, PID derivative filter", pid_derivative_tau),
    float!("pid.integral_limit", "rad s, PID integrator clamp", pid_integral_limit),
    float!("observer.k1", "observer gain k1", observer.k1),
    float!("observer.k2", "observer gain k2", observer.k2),
    float!("observer.k3", "observer gain k3", observer.k3),
    float!("observer.alpha1", "observer exponent alpha1", observer.alpha1),
    float!("observer.epsilon", "observer time-scale parameter", observer.epsilon),
    float!("vel.kp", "velocity loop proportional gain, 1/s", outer.kp_v),
    float!("vel.ki", "velocity loop integral gain, 1/s^2", outer.ki_v),
    float!("vel.kd", "velocity loop derivative gain", outer.kd_v),
    float!(
        "vel.integral_limit",
        "m, velocity integrator clamp",
        outer.v_integral_limit
    ),
    float!("sink.kp", "sink loop proportional gain, rad per m/s", outer.kp_s),
    float!("sink.ki", "sink loop integral gain, rad per m", outer.ki_s),
    float!(
        "sink.integral_limit",
        "m, sink integrator clamp",
        outer.s_integral_limit
    ),
    float!("guid.kp", "guidance proportional gain, 1/s", outer.kp_z),
    float!("guid.ki", "guidance integral gain, 1/s^2", outer.ki_z),
    float!("guid.kd", "guidance derivative gain", outer.kd_z),
    float!(
        "guid.integral_limit",
        "m s, guidance integrator clamp",
        outer.z_integral_limit
    ),
    float!("guid.tau_d", "s, guidance derivative filter", outer.z_derivative_tau),
    float!("aircraft.mass", "kg", aircraft.mass),
    float!("aircraft.rho", "kg/m^3, air density", aircraft.rho),
    float!("aircraft.g", "m/s^2", aircraft.g),
    float!("aircraft.t_max", "N, thrust limit", aircraft.t_max),
    float!("aircraft.s_ref", "m^2, wing area", aircraft.s_ref),
    float!("aircraft.j_y", "kg m^2, pitch inertia", aircraft.j_y),
    float!("aircraft.c_bar", "m, mean chord", aircraft.c_bar),
    float!(
        "aircraft.elevator_min_deg",
        "deg, elevator lower limit",
        aircraft.elevator_min_deg
    ),
    float!(
        "aircraft.elevator_max_deg",
        "deg, elevator upper limit",
        aircraft.elevator_max_deg
    ),
    float!(
        "aero.alpha_min_deg",
        "deg, lower edge of the aerodynamic table",
        aero.alpha_min_deg
    ),
    float!(
        "aero.alpha_max_deg",
        "deg, upper edge of the aerodynamic table",
        aero.alpha_max_deg
    ),
    float!("aero.cl_q", "lift per nondimensional pitch rate", aero.cl_q),
    float!("aero.cm_q", "moment per nondimensional pitch rate", aero.cm_q),
    float!("aero.cl_de", "lift per rad of elevator", aero.cl_de),
    float!("aero.cd_de", "drag per rad of elevator", aero.cd_de),
    float!("aero.cm_de", "moment per rad of elevator", aero.cm_de),
    float!("actuator.engine_tau", "s, engine lag", actuators.engine_tau),
    float!(
        "actuator.elevator_omega",
        "rad/s, elevator natural frequency",
        actuators.elevator_omega
    ),
    float!(
        "actuator.elevator_zeta",
        "elevator damping ratio",
        actuators.elevator_zeta
    ),
    float!(
        "ship.heave_power_db",
        "dB, heave driving-noise power",
        ship.heave_power_db
    ),
    float!(
        "ship.pitch_power_db",
        "dB, pitch driving-noise power",
        ship.pitch_power_db
    ),
    float!("ship.noise_dt", "s, deck-motion noise hold", ship.noise_dt),
    float!("ship.x_g", "m, ship centre of pitch", ship.x_g),
    float!(
        "ship.deck_offset",
        "m, landing point aft of the centre of pitch",
        ship.deck_offset
    ),
    float!("ship.warm_up", "s, deck-motion burn-in before t = 0", ship.warm_up),
    float!("wind.v_wd", "m/s, wind over deck", wind.v_wd),
    float!("wind.wake_length", "m, extent of the air-wake", wind.wake_length),
    float!(
        "wind.wake_pitch_amplitude",
        "rad, ship pitch amplitude driving the periodic wake",
        wind.wake_pitch_amplitude
    ),
    float!(
        "wind.wake_frequency",
        "rad/s, ship pitch frequency driving the periodic wake",
        wind.wake_frequency
    ),
    float!(
        "wind.turbulence_scale",
        "m, turbulence length scale",
        wind.turbulence_scale
    ),
    float!("wind.psd_u", "axial turbulence intensity", wind.psd_u),
    float!("wind.psd_w", "vertical turbulence intensity", wind.psd_w),
    float!("wind.turbulence_dt", "s, turbulence noise hold", wind.turbulence_dt),
    float!(
        "noise.amplitude",
        "sinusoidal measurement noise amplitude",
        noise.amplitude
    ),
    float!(
        "noise.frequency",
        "rad/s, sinusoidal measurement noise frequency",
        noise.frequency
    ),
    float!("noise.power_db", "dB, random measurement noise power", noise.power_db),
    float!("noise.dt", "s, measurement noise hold", noise.noise_dt),
    Key {
        name: "noise.units",
        alias: None,
        kind: KeyKind::Choice(UNITS),
        help: "angle unit of the measurement noise",
        get: |c| Value::Text(c.noise.units.as_str().into()),
        set: |c, v| {
            if let Some(u) = AngleUnit::parse(&text(v)) {
                c.noise.units = u;
            }
        },
    },
];

pub fn find(name: &str) -> Result<&'static Key> {
    KEYS.iter()
        .find(|k| k.name == name || k.alias == Some(name))
        .ok_or_else(|| Error::UnknownKey {
            key: name.to_string(),
            valid: KEYS.iter().map(|k| k.name.to_string()).collect(),
        })
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "on" | "true" | "1" | "yes" => Some(true),
        "off" | "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn bad(key: &Key, got: &str) -> Error {
    Error::config(key.name, format!("expected {} (got {got:?})", key.kind.describe()))
}

/// Parses an inline value for `key`.
pub fn parse_value(key: &Key, raw: &str) -> Result<Value> {
    let raw = raw.trim();
    match key.kind {
        KeyKind::Float => raw.parse::<f64>().map(Value::Float).map_err(|_| bad(key, raw)),
        KeyKind::Int => raw.parse::<u64>().map(Value::Int).map_err(|_| bad(key, raw)),
        KeyKind::Bool => parse_bool(raw).map(Value::Bool).ok_or_else(|| bad(key, raw)),
        KeyKind::Choice(c) => {
            if c.contains(&raw) {
                Ok(Value::Text(raw.to_string()))
            } else {
                Err(bad(key, raw))
            }
        }
    }
}

fn from_toml(key: &Key, v: &toml::Value) -> Result<Value> {
    match (key.kind, v) {
        (KeyKind::Float, toml::Value::Float(x)) => Ok(Value::Float(*x)),
        (KeyKind::Float, toml::Value::Integer(i)) => Ok(Value::Float(*i as f64)),
        (KeyKind::Int, toml::Value::Integer(i)) if *i >= 0 => Ok(Value::Int(*i as u64)),
        (KeyKind::Bool, toml::Value::Boolean(b)) => Ok(Value::Bool(*b)),
        (_, toml::Value::String(s)) => parse_value(key, s),
        _ => Err(bad(key, &v.to_string())),
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let name = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&name, t, out),
            other => out.push((name, other.clone())),
        }
    }
}

/// Parses a TOML document into typed `(key, value)` pairs, rejecting unknown keys.
pub fn parse_toml(text: &str) -> Result<Vec<(&'static Key, Value)>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
    let mut flat = Vec::new();
    flatten("", &table, &mut flat);
    flat.iter()
        .map(|(name, v)| {
            let key = find(name)?;
            Ok((key, from_toml(key, v)?))
        })
        .collect()
}

/// Parses `key=value` strings, rejecting unknown keys.
pub fn parse_overrides<S: AsRef<str>>(items: &[S]) -> Result<Vec<(&'static Key, Value)>> {
    items
        .iter()
        .map(|item| {
            let item = item.as_ref();
            let (name, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::config(item, "expected key=value"))?;
            let key = find(name.trim())?;
            Ok((key, parse_value(key, raw)?))
        })
        .collect()
}

/// Builds a configuration from layered assignments, last one winning.
///
/// The scenario is settled first because it selects the defaults for
/// duration, initial range and deck motion.
pub fn resolve(layers: &[Vec<(&'static Key, Value)>]) -> Result<ScenarioConfig> {
    let pick = |name: &str| {
        layers
            .iter()
            .flatten()
            .rev()
            .find(|(k, _)| k.name == name)
            .map(|(_, v)| text(v.clone()))
    };
    let scenario = pick("scenario")
        .and_then(|s| Scenario::parse(&s))
        .unwrap_or(Scenario::PitchStep);
    let controller = pick("controller")
        .and_then(|s| ControllerKind::parse(&s))
        .unwrap_or(ControllerKind::Opd);
    let mut c = ScenarioConfig::new(scenario, controller);
    for (key, value) in layers.iter().flatten() {
        (key.set)(&mut c, value.clone());
    }
    c.validate()?;
    Ok(c)
}

fn render(v: &Value) -> String {
    match v {
        // Debug formatting is the shortest string that parses back to the same bits.
        Value::Float(x) => format!("{x:?}"),
        Value::Int(i) if *i > i64::MAX as u64 => format!("\"{i}\""),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => format!("\"{s}\""),
    }
}

/// Serializes every key as TOML; reading it back with [`parse_toml`] and
/// [`resolve`] reproduces `config`.
pub fn snapshot(config: &ScenarioConfig) -> String {
    let mut out = String::new();
    for key in KEYS {
        let _ = writeln!(out, "{} = {}", key.name, render(&key.get(config)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names: Vec<&str> = KEYS.iter().map(|k| k.name).collect();
        names.sort_unstable();
        let n = names.len();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn every_key_writes_its_field() {
        for key in KEYS {
            let mut c = ScenarioConfig::new(Scenario::PitchStep, ControllerKind::Opd);
            let new = match (key.kind, key.get(&c)) {
                (KeyKind::Float, Value::Float(x)) => Value::Float(x + 0.125),
                (KeyKind::Int, Value::Int(i)) => Value::Int(i + 3),
                (KeyKind::Bool, Value::Bool(b)) => Value::Bool(!b),
                (KeyKind::Choice(ch), Value::Text(s)) => Value::Text(ch.iter().find(|o| **o != s).unwrap().to_string()),
                other => panic!("{}: {other:?}", key.name),
            };
            (key.set)(&mut c, new.clone());
            assert_eq!(key.get(&c), new, "{}", key.name);
        }
    }

    #[test]
    fn snapshot_round_trips() {
        let mut c = ScenarioConfig::new(Scenario::Approach, ControllerKind::Pid);
        c.seed = u64::MAX;
        c.dt = 0.1 + 0.2;
        c.observer.epsilon = 1.0 / 3.0;
        c.noise.units = AngleUnit::Radians;
        let text = snapshot(&c);
        let back = resolve(&[parse_toml(&text).unwrap()]).unwrap();
        assert_eq!(back, c);
        assert_eq!(snapshot(&back), text);
    }

    #[test]
    fn precedence_is_file_then_inline() {
        let file = parse_toml("seed = 5\ndt = 0.002\n[pitch]\nkp = 70.0\n").unwrap();
        let inline = parse_overrides(&["seed=9"]).unwrap();
        let c = resolve(&[file, inline]).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.dt, 0.002);
        assert_eq!(c.pitch.kp_theta, 70.0);
    }

    #[test]
    fn scenario_selects_defaults() {
        let c = resolve(&[parse_overrides(&["scenario=approach"]).unwrap()]).unwrap();
        assert_eq!(c.initial_range, 2000.0);
        assert!(c.ship_on);
        let c = resolve(&[parse_overrides(&["ship=off", "scenario=approach"]).unwrap()]).unwrap();
        assert!(!c.ship_on);
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        match parse_overrides(&["pitch.kq=1"]) {
            Err(Error::UnknownKey { key, valid }) => {
                assert_eq!(key, "pitch.kq");
                assert_eq!(valid.len(), KEYS.len());
                assert!(valid.iter().any(|v| v == "pitch.kp"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_toml("[vel]\nkq = 1.0\n"), Err(Error::UnknownKey { .. })));
    }

    #[test]
    fn invalid_values_name_the_key() {
        let e = resolve(&[parse_overrides(&["dt=-0.001"]).unwrap()]).unwrap_err();
        assert_eq!(e.to_string(), "invalid configuration: dt: must be > 0");
        match parse_overrides(&["wind=maybe"]) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "wind_on"),
            other => panic!("{other:?}"),
        }
        match parse_toml("seed = -1") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "seed"),
            other => panic!("{other:?}"),
        }
    }
}
