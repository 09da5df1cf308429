//! Classical fixed-step fourth-order Runge-Kutta.

use crate::error::Result;

/// One RK4 step of `y' = f(t, y)`. Inputs that `f` closes over are held
/// constant over the four stages.
pub fn rk4_step<const N: usize, F>(f: F, y: &[f64; N], t: f64, dt: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let dy = rk4_increment(f, y, t, dt)?;
    let mut out = *y;
    for (o, d) in out.iter_mut().zip(dy) {
        *o += d;
    }
    Ok(out)
}

/// The RK4 update `y(t + dt) - y(t)`.
pub fn rk4_increment<const N: usize, F>(mut f: F, y: &[f64; N], t: f64, dt: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let offset = |base: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *base;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += h * ki;
        }
        out
    };
    let half = 0.5 * dt;
    let k1 = f(t, y)?;
    let k2 = f(t + half, &offset(y, &k1, half))?;
    let k3 = f(t + half, &offset(y, &k2, half))?;
    let k4 = f(t + dt, &offset(y, &k3, dt))?;
    let mut dy = [0.0; N];
    for i in 0..N {
        dy[i] = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(dy)
}

/// Integrates from `t0` over `steps` steps and returns the final state.
/// Increments are accumulated with Kahan compensation so that rounding in
/// the running sum stays below the truncation error at small steps.
pub fn rk4_integrate<const N: usize, F>(mut f: F, y0: [f64; N], t0: f64, dt: f64, steps: usize) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut y = y0;
    let mut c = [0.0; N];
    for k in 0..steps {
        let dy = rk4_increment(&mut f, &y, t0 + k as f64 * dt, dt)?;
        for i in 0..N {
            let d = dy[i] - c[i];
            let s = y[i] + d;
            c[i] = (s - y[i]) - d;
            y[i] = s;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn constant_state_is_fixed() {
        let y = rk4_step(|_, _| Ok([0.0; 2]), &[3.5, -1.0], 0.0, 0.1).unwrap();
        assert_eq!(y, [3.5, -1.0]);
    }

    #[test]
    fn exponential_decay_single_step() {
        let y = rk4_step(|_, y: &[f64; 1]| Ok([-y[0]]), &[1.0], 0.0, 0.001).unwrap();
        let exact = (-0.001f64).exp();
        assert!((y[0] - 0.999_000_499_833_375).abs() < 1e-15);
        assert!((y[0] - exact).abs() <= 0.001f64.powi(5));
    }

    #[test]
    fn time_dependent_forcing() {
        let dt = 0.01;
        let y = rk4_step(|t, _: &[f64; 1]| Ok([t.cos()]), &[0.0], 0.0, dt).unwrap();
        assert!((y[0] - dt.sin()).abs() <= dt.powi(5));
    }

    #[test]
    fn errors_propagate() {
        let r = rk4_step(
            |_, _: &[f64; 1]| Err(Error::NonFiniteDerivative("test")),
            &[0.0],
            0.0,
            0.1,
        );
        assert!(r.is_err());
    }

    fn global_error(dt: f64) -> f64 {
        let steps = (1.0 / dt).round() as usize;
        let y = rk4_integrate(|_, y: &[f64; 1]| Ok([-y[0]]), [1.0], 0.0, dt, steps).unwrap();
        (y[0] - (-1.0f64).exp()).abs()
    }

    #[test]
    fn observed_order_is_four() {
        let e: Vec<f64> = [0.004, 0.002, 0.001].iter().map(|&dt| global_error(dt)).collect();
        let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        assert!(orders.iter().all(|&p| p >= 3.8), "{orders:?}");
    }
}
