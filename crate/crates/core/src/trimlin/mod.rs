//! Level-flight trim, small-perturbation linearization and mode analysis.

pub mod eigen;

use serde::Serialize;

use crate::airframe::{
    aero_forces, dynamic_pressure, state_derivative, AeroModel, AircraftParams, AircraftState, ControlInputs, Wind,
};
use crate::error::{Error, Result};
use crate::integrate::rk4_step;
pub use eigen::Complex;

/// Reference small-perturbation model at the approach trim point, states
/// (ΔV, Δθ, Δα, Δq), inputs (Δδe in degrees, Δδt).
///
/// The V̇/V entry is commonly quoted as -0.18. That value does not give the
/// reference eigenvalues (-0.40 ± 0.45i, 0.022 ± 0.17i) and -0.018 does, so
/// the corrected entry is used here.
pub mod reference {
    pub const A: [[f64; 4]; 4] = [
        [-0.018, -9.81, -0.274, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-0.0041, 0.0, -0.59, 1.0],
        [0.0, 0.0, -0.26, -0.15],
    ];

    /// With the uncorrected -0.18 entry, kept to document the discrepancy.
    pub const A_UNCORRECTED: [[f64; 4]; 4] = [
        [-0.18, -9.81, -0.274, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-0.0041, 0.0, -0.59, 1.0],
        [0.0, 0.0, -0.26, -0.15],
    ];

    pub const B_PER_DEG: [[f64; 2]; 4] = [[-0.001, 9.85], [0.0, 0.0], [-0.00075, -0.018], [-0.015, 0.0]];

    /// ∂q̇/∂q, 1/s
    pub const DQDOT_DQ: f64 = -0.15;
    /// ∂q̇/∂δe, 1/s^2 per degree
    pub const DQDOT_DDE_PER_DEG: f64 = -0.015;
}

/// What is held fixed while solving for trim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrimTarget {
    /// m/s; solve for angle of attack, elevator and thrust.
    Airspeed(f64),
    /// rad; solve for airspeed, elevator and thrust.
    AngleOfAttack(f64),
}

impl Default for TrimTarget {
    fn default() -> Self {
        TrimTarget::Airspeed(69.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Starting guess: (angle of attack or airspeed, elevator rad, throttle fraction).
    pub initial_guess: Option<[f64; 3]>,
}

impl Default for TrimOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-12,
            initial_guess: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrimPoint {
    pub v_t_star: f64,
    pub theta_star: f64,
    pub alpha_star: f64,
    pub q_star: f64,
    pub gamma_star: f64,
    pub delta_e_star: f64,
    pub thrust_star: f64,
    /// Normalized residuals: axial force / W, normal force / W, moment / (q̄ S c̄).
    pub residuals: [f64; 3],
    pub iterations: usize,
}

impl TrimPoint {
    pub fn state(&self) -> AircraftState {
        AircraftState {
            v_t: self.v_t_star,
            theta: self.theta_star,
            alpha: self.alpha_star,
            q: self.q_star,
            x: 0.0,
            z: 0.0,
        }
    }

    pub fn inputs(&self) -> ControlInputs {
        ControlInputs {
            delta_e: self.delta_e_star,
            thrust: self.thrust_star,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

fn level_residuals(
    v: f64,
    alpha: f64,
    de: f64,
    thrust: f64,
    model: &AeroModel,
    params: &AircraftParams,
) -> Result<[f64; 3]> {
    let state = AircraftState {
        v_t: v,
        theta: alpha,
        alpha,
        ..Default::default()
    };
    let f = aero_forces(&state, &ControlInputs { delta_e: de, thrust }, model, params)?;
    let w = params.weight();
    let (sa, ca) = alpha.sin_cos();
    let moment_scale = dynamic_pressure(v, params.rho) * params.s_ref * params.c_bar;
    Ok([
        (thrust * ca - f.drag) / w,
        (f.lift + thrust * sa - w) / w,
        f.moment / moment_scale,
    ])
}

fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (v, pv) in m[row].iter_mut().zip(pivot_row).skip(col) {
                *v -= f * pv;
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = ((row + 1)..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Some(x)
}

/// Solves steady level flight (γ = 0, q = 0) by damped Newton iteration.
///
/// The equilibrium is exact for the equations of motion: `T cos α = D` and
/// `L + T sin α = W`, with zero pitching moment.
pub fn solve_trim(
    params: &AircraftParams,
    model: &AeroModel,
    target: TrimTarget,
    options: &TrimOptions,
) -> Result<TrimPoint> {
    // Unknowns: u0 is α (rad) or V/V_scale, then δe (rad) and throttle fraction.
    const V_SCALE: f64 = 100.0;
    let (a_lo, a_hi) = model.alpha_range();
    let unpack = |u: &[f64; 3]| match target {
        TrimTarget::Airspeed(v) => (v, u[0], u[1], u[2] * params.t_max),
        TrimTarget::AngleOfAttack(a) => (u[0] * V_SCALE, a, u[1], u[2] * params.t_max),
    };
    let eval = |u: &[f64; 3]| {
        let (v, a, de, t) = unpack(u);
        level_residuals(v, a, de, t, model, params)
    };
    let norm = |r: &[f64; 3]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut u = options.initial_guess.unwrap_or(match target {
        TrimTarget::Airspeed(_) => [5f64.to_radians(), 0.0, 0.3],
        TrimTarget::AngleOfAttack(_) => [0.7, 0.0, 0.3],
    });
    let mut r = eval(&u)?;
    for iteration in 0..options.max_iterations {
        if norm(&r) < options.tolerance {
            let (v, a, de, t) = unpack(&u);
            return Ok(TrimPoint {
                v_t_star: v,
                theta_star: a,
                alpha_star: a,
                q_star: 0.0,
                gamma_star: 0.0,
                delta_e_star: de,
                thrust_star: t,
                residuals: r,
                iterations: iteration,
            });
        }
        let h = 1e-7;
        let mut jac = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut up = u;
            let mut dn = u;
            up[j] += h;
            dn[j] -= h;
            let (rp, rm) = (eval(&up)?, eval(&dn)?);
            for i in 0..3 {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let Some(step) = solve3(jac, [-r[0], -r[1], -r[2]]) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = [
                u[0] + lambda * step[0],
                u[1] + lambda * step[1],
                u[2] + lambda * step[2],
            ];
            if let TrimTarget::Airspeed(_) = target {
                trial[0] = trial[0].clamp(a_lo, a_hi);
            } else {
                trial[0] = trial[0].max(1e-3);
            }
            if let Ok(rt) = eval(&trial) {
                if norm(&rt) < norm(&r) {
                    u = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::TrimNotConverged {
        iterations: options.max_iterations,
        residual: norm(&r),
    })
}

/// Jacobian of the four dynamic states about trim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearModel {
    /// Rows/columns ordered (ΔV, Δθ, Δα, Δq).
    pub a: [[f64; 4]; 4],
    /// Columns: Δδe (per rad), Δδt (per unit throttle).
    pub b: [[f64; 2]; 4],
}

impl LinearModel {
    pub fn dqdot_dq(&self) -> f64 {
        self.a[3][3]
    }

    pub fn dqdot_dalpha(&self) -> f64 {
        self.a[3][2]
    }

    pub fn dqdot_dde(&self) -> f64 {
        self.b[3][0]
    }

    /// B with the elevator column expressed per degree.
    pub fn b_per_degree(&self) -> [[f64; 2]; 4] {
        let mut b = self.b;
        for row in b.iter_mut() {
            row[0] = row[0].to_radians();
        }
        b
    }

    pub fn derivative(&self, x: &[f64; 4], u: &[f64; 2]) -> [f64; 4] {
        std::array::from_fn(|i| {
            (0..4).map(|j| self.a[i][j] * x[j]).sum::<f64>() + self.b[i][0] * u[0] + self.b[i][1] * u[1]
        })
    }
}

fn dynamic_part(x: [f64; 4], u: [f64; 2], params: &AircraftParams, model: &AeroModel) -> Result<[f64; 4]> {
    let state = AircraftState {
        v_t: x[0],
        theta: x[1],
        alpha: x[2],
        q: x[3],
        ..Default::default()
    };
    let d = state_derivative(
        &state,
        &ControlInputs::from_throttle(u[0], u[1], params),
        Wind::CALM,
        model,
        params,
    )?;
    Ok([d.v_t, d.theta, d.alpha, d.q])
}

/// Central-difference Jacobian with steps of 1e-6 of each variable's scale.
pub fn linearize(trim: &TrimPoint, params: &AircraftParams, model: &AeroModel) -> Result<LinearModel> {
    let x0 = [trim.v_t_star, trim.theta_star, trim.alpha_star, trim.q_star];
    let u0 = [trim.delta_e_star, trim.thrust_star / params.t_max];
    let x_scale = [trim.v_t_star, 1.0, 1.0, 1.0];
    let mut a = [[0.0; 4]; 4];
    let mut b = [[0.0; 2]; 4];
    for j in 0..4 {
        let h = 1e-6 * x_scale[j];
        let (mut xp, mut xm) = (x0, x0);
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (
            dynamic_part(xp, u0, params, model)?,
            dynamic_part(xm, u0, params, model)?,
        );
        for i in 0..4 {
            a[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    for j in 0..2 {
        let h = 1e-6;
        let (mut up, mut um) = (u0, u0);
        up[j] += h;
        um[j] -= h;
        let (fp, fm) = (
            dynamic_part(x0, up, params, model)?,
            dynamic_part(x0, um, params, model)?,
        );
        for i in 0..4 {
            b[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(LinearModel { a, b })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeLabel {
    ShortPeriod,
    Phugoid,
}

impl ModeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeLabel::ShortPeriod => "short-period",
            ModeLabel::Phugoid => "phugoid",
        }
    }
}

/// Spectrum that is not two complex-conjugate pairs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("eigenvalues are not two complex-conjugate pairs")]
pub struct DegenerateSpectrum {
    pub eigenvalues: Vec<Complex>,
}

/// Labels the faster conjugate pair short-period and the slower one phugoid.
pub fn eigenmodes(a: &[[f64; 4]; 4]) -> std::result::Result<Vec<(Complex, ModeLabel)>, DegenerateSpectrum> {
    let rows: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
    let eig = eigen::eigenvalues(&rows).map_err(|_| DegenerateSpectrum { eigenvalues: vec![] })?;
    let scale = eig.iter().fold(0.0f64, |m, c| m.max(c.norm())).max(1e-300);
    let mut upper: Vec<Complex> = eig.iter().copied().filter(|c| c.im > 1e-12 * scale).collect();
    let lower = eig.iter().filter(|c| c.im < -1e-12 * scale).count();
    if upper.len() != 2 || lower != 2 {
        return Err(DegenerateSpectrum { eigenvalues: eig });
    }
    upper.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    let (sp, ph) = (upper[0], upper[1]);
    Ok(vec![
        (sp, ModeLabel::ShortPeriod),
        (sp.conj(), ModeLabel::ShortPeriod),
        (ph, ModeLabel::Phugoid),
        (ph.conj(), ModeLabel::Phugoid),
    ])
}

/// Open-loop airspeed response to a throttle step, linear and nonlinear.
#[derive(Debug, Clone, PartialEq)]
pub struct StepComparison {
    pub t: Vec<f64>,
    pub dv_linear: Vec<f64>,
    pub dv_nonlinear: Vec<f64>,
}

impl StepComparison {
    /// Largest linear/nonlinear gap relative to the peak nonlinear excursion.
    pub fn max_relative_gap(&self) -> f64 {
        let peak = self.dv_nonlinear.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gap = self
            .dv_linear
            .iter()
            .zip(&self.dv_nonlinear)
            .fold(0.0f64, |m, (l, n)| m.max((l - n).abs()));
        gap / peak
    }
}

pub fn throttle_step_response(
    trim: &TrimPoint,
    linear: &LinearModel,
    params: &AircraftParams,
    model: &AeroModel,
    d_throttle: f64,
    duration: f64,
    dt: f64,
) -> Result<StepComparison> {
    let steps = (duration / dt).round() as usize;
    let x0 = [trim.v_t_star, trim.theta_star, trim.alpha_star, trim.q_star];
    let u = [trim.delta_e_star, trim.thrust_star / params.t_max + d_throttle];
    let du = [0.0, d_throttle];
    let mut lin = [0.0; 4];
    let mut nl = x0;
    let mut out = StepComparison {
        t: vec![0.0],
        dv_linear: vec![0.0],
        dv_nonlinear: vec![0.0],
    };
    for k in 0..steps {
        let t = k as f64 * dt;
        lin = rk4_step(|_, x| Ok(linear.derivative(x, &du)), &lin, t, dt)?;
        nl = rk4_step(|_, x| dynamic_part(*x, u, params, model), &nl, t, dt)?;
        out.t.push(t + dt);
        out.dv_linear.push(lin[0]);
        out.dv_nonlinear.push(nl[0] - x0[0]);
    }
    Ok(out)
}
