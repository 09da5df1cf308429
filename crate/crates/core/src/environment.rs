//! Deck motion, landing-point kinematics, carrier air wake and pitch-sensor noise.
//!
//! Every stochastic source draws from its own ChaCha stream derived from the
//! run seed, so switching one source off leaves the others bit-identical.
//! White-noise inputs are zero-order held over a per-source sample period.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::rk4_step;

/// Shared denominator of the heave and pitch spectra, `s^4 + a3 s^3 + a2 s^2 + a1 s + a0`,
/// stored as `[a0, a1, a2, a3]`.
pub const SHIP_DEN: [f64; 4] = [0.16, 0.4, 1.32, 2.08];
pub const HEAVE_GAIN: f64 = 1.21;
pub const PITCH_GAIN: f64 = 0.773;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u64)]
pub enum Stream {
    ShipHeave = 1,
    ShipPitch = 2,
    TurbulenceU = 3,
    TurbulenceW = 4,
    Sensor = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShipParams {
    /// dB; held-sample variance is `10^(P/10)`
    pub heave_power_db: f64,
    pub pitch_power_db: f64,
    /// s, hold period of the white-noise input
    pub noise_dt: f64,
    /// m, horizontal position of the ship's centre of pitch
    pub x_g: f64,
    /// m, landing point to centre of mass
    pub deck_offset: f64,
    /// s of motion simulated before t = 0 so the deck starts in steady state
    pub warm_up: f64,
}

impl Default for ShipParams {
    fn default() -> Self {
        Self {
            heave_power_db: 4.5,
            pitch_power_db: -20.0,
            noise_dt: 0.02,
            x_g: 0.0,
            deck_offset: 81.0,
            warm_up: 200.0,
        }
    }
}

/// Two fourth-order shaping filters in controllable canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShipState {
    pub heave_filter: [f64; 4],
    pub pitch_filter: [f64; 4],
    pub x_g: f64,
}

impl ShipState {
    pub fn at(x_g: f64) -> Self {
        Self {
            x_g,
            ..Default::default()
        }
    }

    /// m, up positive
    pub fn z_g(&self) -> f64 {
        HEAVE_GAIN * self.heave_filter[0]
    }

    /// rad
    pub fn theta_s(&self) -> f64 {
        PITCH_GAIN * self.pitch_filter[2]
    }
}

fn canonical_derivative(x: &[f64; 4], u: f64) -> [f64; 4] {
    let [a0, a1, a2, a3] = SHIP_DEN;
    [x[1], x[2], x[3], u - a0 * x[0] - a1 * x[1] - a2 * x[2] - a3 * x[3]]
}

/// Advances both filters one step with held white-noise inputs.
pub fn ship_step(state: &ShipState, heave_input: f64, pitch_input: f64, dt: f64) -> Result<ShipState> {
    let h = rk4_step(
        |_, x| Ok(canonical_derivative(x, heave_input)),
        &state.heave_filter,
        0.0,
        dt,
    )?;
    let p = rk4_step(
        |_, x| Ok(canonical_derivative(x, pitch_input)),
        &state.pitch_filter,
        0.0,
        dt,
    )?;
    Ok(ShipState {
        heave_filter: h,
        pitch_filter: p,
        x_g: state.x_g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LandingPoint {
    pub x_l: f64,
    pub z_l: f64,
}

pub fn landing_point(ship: &ShipState, deck_offset: f64) -> LandingPoint {
    let th = ship.theta_s();
    LandingPoint {
        x_l: ship.x_g - deck_offset * th.cos(),
        z_l: ship.z_g() - deck_offset * th.sin(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindParams {
    /// m/s, wind over deck
    pub v_wd: f64,
    /// m, extent of the air wake behind the centre of pitch
    pub wake_length: f64,
    /// rad, ship pitch amplitude used by the periodic wake
    pub wake_pitch_amplitude: f64,
    /// rad/s
    pub wake_frequency: f64,
    /// m, turbulence length scale
    pub turbulence_scale: f64,
    /// numerators of the free-air turbulence spectra
    pub psd_u: f64,
    pub psd_w: f64,
    /// s, hold period of the turbulence white noise
    pub turbulence_dt: f64,
}

impl Default for WindParams {
    fn default() -> Self {
        Self {
            v_wd: 10.0,
            wake_length: 914.0,
            wake_pitch_amplitude: 0.05,
            wake_frequency: 1.25,
            turbulence_scale: 100.0,
            psd_u: 200.0,
            psd_w: 71.6,
            turbulence_dt: 0.01,
        }
    }
}

impl WindParams {
    /// Variance of a turbulence component: `int_0^inf P/(1 + (L W)^2) dW = P pi/(2 L)`.
    pub fn variance_u(&self) -> f64 {
        self.psd_u * std::f64::consts::PI / (2.0 * self.turbulence_scale)
    }

    pub fn variance_w(&self) -> f64 {
        self.psd_w * std::f64::consts::PI / (2.0 * self.turbulence_scale)
    }
}

/// Components along the approach axis (`u`, +x) and vertical (`w`, up positive).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct WindSample {
    pub u_g: f64,
    pub w_g: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl WindSample {
    pub fn from_components(u: [f64; 3], w: [f64; 3]) -> Self {
        Self {
            u_g: u[0] + u[1] + u[2],
            w_g: w[0] + w[1] + w[2],
            u1: u[0],
            u2: u[1],
            u3: u[2],
            w1: w[0],
            w2: w[1],
            w3: w[2],
        }
    }
}

/// Steady wake `(u2, w2)` at distance `x_rel` behind the centre of pitch.
pub fn steady_wake(x_rel: f64, params: &WindParams) -> (f64, f64) {
    if x_rel >= params.wake_length {
        return (0.0, 0.0);
    }
    let u2 = if x_rel > 0.0 { 0.002 * x_rel } else { 0.0 };
    (u2, -1.0 + 0.0013 * x_rel)
}

/// Periodic wake `(u3, w3)`.
pub fn periodic_wake(t: f64, x_rel: f64, params: &WindParams) -> (f64, f64) {
    if x_rel >= params.wake_length {
        return (0.0, 0.0);
    }
    let c = (params.wake_frequency * (2.28 * t + x_rel / (0.85 * params.v_wd)) + 0.1).cos();
    let a = params.wake_pitch_amplitude * params.v_wd;
    (a * (2.22 + 0.000091 * x_rel) * c, a * (4.98 + 0.0018 * x_rel) * c)
}

/// First-order turbulence filters with corner `V/L` driven by unit-intensity
/// white noise; stationary variance equals the spectrum integral.
pub fn turbulence_derivative(state: &[f64; 2], airspeed: f64, noise: [f64; 2], params: &WindParams) -> [f64; 2] {
    let a = airspeed.max(1.0) / params.turbulence_scale;
    let bu = (2.0 * a * params.variance_u()).sqrt();
    let bw = (2.0 * a * params.variance_w()).sqrt();
    [-a * state[0] + bu * noise[0], -a * state[1] + bw * noise[1]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// periodic amplitude, in `units`
    pub amplitude: f64,
    /// rad/s
    pub frequency: f64,
    /// dB; held-sample variance is `10^(P/10)` in `units`^2
    pub power_db: f64,
    /// s, hold period
    pub noise_dt: f64,
    pub units: AngleUnit,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            amplitude: 0.001,
            frequency: 7.0,
            power_db: -60.0,
            noise_dt: 0.02,
            units: AngleUnit::Degrees,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Degrees,
    Radians,
}

impl AngleUnit {
    pub fn to_rad(self, v: f64) -> f64 {
        match self {
            AngleUnit::Degrees => v.to_radians(),
            AngleUnit::Radians => v,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "deg" | "degrees" => Some(AngleUnit::Degrees),
            "rad" | "radians" => Some(AngleUnit::Radians),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AngleUnit::Degrees => "deg",
            AngleUnit::Radians => "rad",
        }
    }
}

/// Sensor noise in rad given the current held random draw (in `units`).
pub fn pitch_noise(t: f64, held: f64, params: &NoiseParams) -> f64 {
    params
        .units
        .to_rad(params.amplitude * (params.frequency * t).sin() + held)
}

/// Zero-order-held Gaussian source on its own stream.
#[derive(Debug, Clone)]
pub struct HeldNoise {
    rng: ChaCha8Rng,
    std_dev: f64,
    steps_per_sample: u64,
    counter: u64,
    value: f64,
}

impl HeldNoise {
    pub fn new(seed: u64, stream: Stream, std_dev: f64, sample_dt: f64, dt: f64) -> Result<Self> {
        if !(sample_dt > 0.0 && sample_dt.is_finite()) {
            return Err(Error::config("noise_dt", "must be > 0"));
        }
        let steps = (sample_dt / dt).round().max(1.0) as u64;
        Ok(Self {
            rng: stream_rng(seed, stream),
            std_dev,
            steps_per_sample: steps,
            counter: 0,
            value: 0.0,
        })
    }

    /// Value to hold over the next step.
    pub fn draw(&mut self) -> f64 {
        if self.counter.is_multiple_of(self.steps_per_sample) {
            self.value = self.std_dev * self.rng.sample::<f64, _>(StandardNormal);
        }
        self.counter += 1;
        self.value
    }

    pub fn steps_per_sample(&self) -> u64 {
        self.steps_per_sample
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentToggles {
    pub ship: bool,
    pub wind: bool,
    pub noise: bool,
}

/// Everything outside the aircraft: deck motion, wind and sensor noise.
#[derive(Debug, Clone)]
pub struct Environment {
    pub ship_params: ShipParams,
    pub wind_params: WindParams,
    pub noise_params: NoiseParams,
    pub toggles: EnvironmentToggles,
    pub ship: ShipState,
    pub turbulence: [f64; 2],
    heave_src: HeldNoise,
    pitch_src: HeldNoise,
    turb_u_src: HeldNoise,
    turb_w_src: HeldNoise,
    sensor_src: HeldNoise,
    sensor_held: f64,
}

impl Environment {
    pub fn new(
        seed: u64,
        dt: f64,
        ship_params: ShipParams,
        wind_params: WindParams,
        noise_params: NoiseParams,
        toggles: EnvironmentToggles,
    ) -> Result<Self> {
        let sd = |db: f64| 10f64.powf(db / 20.0);
        // Unit-intensity white noise held over T has variance 1/T.
        let unit = |t: f64| 1.0 / t.sqrt();
        Ok(Self {
            heave_src: HeldNoise::new(
                seed,
                Stream::ShipHeave,
                sd(ship_params.heave_power_db),
                ship_params.noise_dt,
                dt,
            )?,
            pitch_src: HeldNoise::new(
                seed,
                Stream::ShipPitch,
                sd(ship_params.pitch_power_db),
                ship_params.noise_dt,
                dt,
            )?,
            turb_u_src: HeldNoise::new(
                seed,
                Stream::TurbulenceU,
                unit(wind_params.turbulence_dt),
                wind_params.turbulence_dt,
                dt,
            )?,
            turb_w_src: HeldNoise::new(
                seed,
                Stream::TurbulenceW,
                unit(wind_params.turbulence_dt),
                wind_params.turbulence_dt,
                dt,
            )?,
            sensor_src: HeldNoise::new(
                seed,
                Stream::Sensor,
                sd(noise_params.power_db),
                noise_params.noise_dt,
                dt,
            )?,
            ship: ShipState::at(ship_params.x_g),
            turbulence: [0.0; 2],
            ship_params,
            wind_params,
            noise_params,
            toggles,
            sensor_held: 0.0,
        })
    }

    /// Runs the deck-motion filters alone for the configured warm-up time.
    pub fn warm_up(&mut self, dt: f64) -> Result<()> {
        if !self.toggles.ship {
            return Ok(());
        }
        let n = (self.ship_params.warm_up / dt).round() as u64;
        for _ in 0..n {
            self.advance_ship(dt)?;
        }
        Ok(())
    }

    fn advance_ship(&mut self, dt: f64) -> Result<()> {
        let (h, p) = (self.heave_src.draw(), self.pitch_src.draw());
        self.ship = ship_step(&self.ship, h, p, dt)?;
        Ok(())
    }

    pub fn landing_point(&self) -> LandingPoint {
        landing_point(&self.ship, self.ship_params.deck_offset)
    }

    /// Wind at time `t` for an aircraft at `aircraft_x`.
    pub fn wind(&self, t: f64, aircraft_x: f64) -> WindSample {
        if !self.toggles.wind {
            return WindSample::default();
        }
        let x_rel = self.ship.x_g - aircraft_x;
        let (u2, w2) = steady_wake(x_rel, &self.wind_params);
        let (u3, w3) = periodic_wake(t, x_rel, &self.wind_params);
        WindSample::from_components([self.turbulence[0], u2, u3], [self.turbulence[1], w2, w3])
    }

    /// Measurement noise in rad held over the current step.
    pub fn sensor_noise(&self, t: f64) -> f64 {
        if !self.toggles.noise {
            return 0.0;
        }
        pitch_noise(t, self.sensor_held, &self.noise_params)
    }

    /// Draws the held sensor value for the step starting now.
    pub fn sample_sensor(&mut self) {
        let v = self.sensor_src.draw();
        self.sensor_held = if self.toggles.noise { v } else { 0.0 };
    }

    /// Advances deck motion and turbulence over one step.
    pub fn advance(&mut self, airspeed: f64, dt: f64) -> Result<()> {
        if self.toggles.ship {
            self.advance_ship(dt)?;
        }
        if self.toggles.wind {
            let noise = [self.turb_u_src.draw(), self.turb_w_src.draw()];
            let p = self.wind_params;
            self.turbulence = rk4_step(
                |_, x| Ok(turbulence_derivative(x, airspeed, noise, &p)),
                &self.turbulence,
                0.0,
                dt,
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn toggles(on: bool) -> EnvironmentToggles {
        EnvironmentToggles {
            ship: on,
            wind: on,
            noise: on,
        }
    }

    #[test]
    fn ship_at_rest_stays_at_rest() {
        let mut s = ShipState::default();
        for _ in 0..1000 {
            s = ship_step(&s, 0.0, 0.0, 0.01).unwrap();
        }
        assert_eq!((s.z_g(), s.theta_s()), (0.0, 0.0));
    }

    #[test]
    fn heave_dc_gain() {
        assert_relative_eq!(HEAVE_GAIN / SHIP_DEN[0], 7.5625, epsilon = 1e-12);
        let mut s = ShipState::default();
        for _ in 0..100_000 {
            s = ship_step(&s, 1.0, 1.0, 0.01).unwrap();
        }
        assert_relative_eq!(s.z_g(), 7.5625, epsilon = 1e-6);
        // Pitch filter has a double zero at the origin.
        assert!(s.theta_s().abs() < 1e-6);
    }

    #[test]
    fn heave_filter_matches_transfer_function_at_a_frequency() {
        // Steady-state sinusoidal amplitude against |G(jw)|.
        let w = 0.7f64;
        let dt = 0.005;
        let mut s = ShipState::default();
        let mut peak: f64 = 0.0;
        for k in 0..((400.0 / dt) as usize) {
            let t = k as f64 * dt;
            s = ship_step(&s, (w * (t + 0.5 * dt)).sin(), 0.0, dt).unwrap();
            if t > 300.0 {
                peak = peak.max(s.z_g().abs());
            }
        }
        let (re, im) = (
            w.powi(4) - SHIP_DEN[2] * w * w + SHIP_DEN[0],
            SHIP_DEN[1] * w - SHIP_DEN[3] * w.powi(3),
        );
        let gain = HEAVE_GAIN / re.hypot(im);
        assert_relative_eq!(peak, gain, max_relative = 2e-3);
    }

    #[test]
    fn landing_point_examples() {
        let s = ShipState::default();
        assert_eq!(landing_point(&s, 81.0), LandingPoint { x_l: -81.0, z_l: 0.0 });

        let mk = |z_g: f64, theta: f64| ShipState {
            heave_filter: [z_g / HEAVE_GAIN, 0.0, 0.0, 0.0],
            pitch_filter: [0.0, 0.0, theta / PITCH_GAIN, 0.0],
            x_g: 0.0,
        };
        let up = landing_point(&mk(1.0, 0.05), 81.0);
        assert_relative_eq!(up.z_l, -3.048, epsilon = 1e-3);
        let down = landing_point(&mk(1.0, -0.05), 81.0);
        assert_relative_eq!(down.z_l, 1.0 + 4.048, epsilon = 1e-3);
    }

    #[test]
    fn steady_wake_examples() {
        let p = WindParams::default();
        assert_relative_eq!(steady_wake(500.0, &p).0, 1.0, epsilon = 1e-12);
        assert_eq!(steady_wake(0.0, &p), (0.0, -1.0));
        assert_eq!(steady_wake(-10.0, &p).0, 0.0);
        assert_eq!(steady_wake(914.0, &p), (0.0, 0.0));
        assert_eq!(steady_wake(2000.0, &p), (0.0, 0.0));
    }

    #[test]
    fn periodic_wake_example() {
        let p = WindParams::default();
        let (u3, w3) = periodic_wake(0.0, 0.0, &p);
        assert_relative_eq!(u3, 0.05 * 10.0 * 2.22 * 0.1f64.cos(), epsilon = 1e-12);
        assert_relative_eq!(u3, 1.1045, epsilon = 1e-4);
        assert_relative_eq!(w3, 0.05 * 10.0 * 4.98 * 0.1f64.cos(), epsilon = 1e-12);
    }

    #[test]
    fn periodic_noise_component() {
        let p = NoiseParams {
            units: AngleUnit::Radians,
            ..Default::default()
        };
        assert_eq!(pitch_noise(0.0, 0.0, &p), 0.0);
        assert_relative_eq!(
            pitch_noise(std::f64::consts::PI / 14.0, 0.0, &p),
            0.001,
            epsilon = 1e-15
        );
        let deg = NoiseParams::default();
        assert_relative_eq!(
            pitch_noise(std::f64::consts::PI / 14.0, 0.0, &deg),
            0.001f64.to_radians(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn held_noise_variance() {
        let mut src = HeldNoise::new(11, Stream::Sensor, 1e-3, 0.001, 0.001).unwrap();
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| src.draw()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert_relative_eq!(var, 1e-6, max_relative = 0.05);
    }

    #[test]
    fn held_noise_holds_for_the_sample_period() {
        let mut src = HeldNoise::new(3, Stream::ShipHeave, 1.0, 0.02, 0.001).unwrap();
        assert_eq!(src.steps_per_sample(), 20);
        let xs: Vec<f64> = (0..60).map(|_| src.draw()).collect();
        assert!(xs[..20].iter().all(|&x| x == xs[0]));
        assert!(xs[20..40].iter().all(|&x| x == xs[20]));
        assert_ne!(xs[0], xs[20]);
    }

    #[test]
    fn turbulence_variance_matches_spectrum_integral() {
        let p = WindParams::default();
        assert_relative_eq!(p.variance_u(), std::f64::consts::PI, epsilon = 1e-12);
        assert_relative_eq!(p.variance_w(), 1.1247, epsilon = 1e-4);
        let mut env = Environment::new(
            5,
            0.01,
            ShipParams::default(),
            p,
            NoiseParams::default(),
            EnvironmentToggles {
                ship: false,
                wind: true,
                noise: false,
            },
        )
        .unwrap();
        let (mut su, mut sw, mut n) = (0.0, 0.0, 0usize);
        for k in 0..400_000 {
            env.advance(69.1, 0.01).unwrap();
            if k > 2000 {
                su += env.turbulence[0].powi(2);
                sw += env.turbulence[1].powi(2);
                n += 1;
            }
        }
        // 4000 s is roughly 2800 correlation times; allow a 10% statistical band.
        assert_relative_eq!(su / n as f64, p.variance_u(), max_relative = 0.1);
        assert_relative_eq!(sw / n as f64, p.variance_w(), max_relative = 0.1);
    }

    #[test]
    fn disabled_sources_are_zero_and_do_not_shift_others() {
        let make = |t: EnvironmentToggles| {
            Environment::new(
                9,
                0.001,
                ShipParams::default(),
                WindParams::default(),
                NoiseParams::default(),
                t,
            )
            .unwrap()
        };
        let mut all = make(toggles(true));
        let mut no_wind = make(EnvironmentToggles {
            ship: true,
            wind: false,
            noise: true,
        });
        for k in 0..5000 {
            let t = k as f64 * 0.001;
            all.sample_sensor();
            no_wind.sample_sensor();
            assert_eq!(no_wind.wind(t, -500.0), WindSample::default());
            assert_eq!(all.sensor_noise(t), no_wind.sensor_noise(t));
            all.advance(69.1, 0.001).unwrap();
            no_wind.advance(69.1, 0.001).unwrap();
            assert_eq!(all.ship, no_wind.ship);
        }
        let mut quiet = make(toggles(false));
        quiet.sample_sensor();
        quiet.advance(69.1, 0.001).unwrap();
        assert_eq!(quiet.sensor_noise(0.3), 0.0);
        assert_eq!(quiet.ship, ShipState::default());
    }

    #[test]
    fn same_seed_same_environment() {
        let mk = || {
            Environment::new(
                42,
                0.001,
                ShipParams::default(),
                WindParams::default(),
                NoiseParams::default(),
                toggles(true),
            )
            .unwrap()
        };
        let (mut a, mut b) = (mk(), mk());
        for k in 0..3000 {
            let t = k as f64 * 0.001;
            a.sample_sensor();
            b.sample_sensor();
            assert_eq!(a.wind(t, -700.0), b.wind(t, -700.0));
            assert_eq!(a.sensor_noise(t).to_bits(), b.sensor_noise(t).to_bits());
            a.advance(69.1, 0.001).unwrap();
            b.advance(69.1, 0.001).unwrap();
        }
        assert_eq!(a.ship, b.ship);
    }

    proptest! {
        #[test]
        fn landing_point_is_81_m_from_centre(theta in -0.2f64..0.2, z in -6.0f64..6.0, xg in -100.0f64..100.0) {
            let s = ShipState {
                heave_filter: [z / HEAVE_GAIN, 0.0, 0.0, 0.0],
                pitch_filter: [0.0, 0.0, theta / PITCH_GAIN, 0.0],
                x_g: xg,
            };
            let lp = landing_point(&s, 81.0);
            let d = (s.x_g - lp.x_l).hypot(s.z_g() - lp.z_l);
            prop_assert!((d - 81.0).abs() < 1e-9);
        }

        #[test]
        fn wake_is_continuous_in_time(t in 0.0f64..100.0, x in 0.0f64..900.0) {
            let p = WindParams::default();
            let (a, b) = (periodic_wake(t, x, &p), periodic_wake(t + 1e-7, x, &p));
            prop_assert!((a.0 - b.0).abs() < 1e-5 && (a.1 - b.1).abs() < 1e-5);
        }
    }
}
