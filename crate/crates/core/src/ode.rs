//! Fixed-step explicit integrators.

/// One classical fourth-order Runge-Kutta step of `dy/dt = f(y)` for an
/// autonomous system (inputs are held constant over the step).
pub fn rk4_step<const N: usize, F>(f: F, y: &[f64; N], dt: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * dt, &k1));
    let k3 = f(&axpy(y, 0.5 * dt, &k2));
    let k4 = f(&axpy(y, dt, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, x: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_taylor_polynomial() {
        // For y' = -y a single RK4 step is exactly the 4th-order Taylor polynomial.
        let dt = 0.1;
        let y = rk4_step(|y: &[f64; 1]| [-y[0]], &[1.0], dt);
        let taylor = 1.0 - dt + dt * dt / 2.0 - dt.powi(3) / 6.0 + dt.powi(4) / 24.0;
        assert!((y[0] - taylor).abs() < 1e-15);
    }

    #[test]
    fn harmonic_oscillator_global_error_is_fourth_order() {
        let run = |dt: f64| {
            let n = (1.0 / dt).round() as usize;
            let mut y = [1.0, 0.0];
            for _ in 0..n {
                y = rk4_step(|y: &[f64; 2]| [y[1], -y[0]], &y, dt);
            }
            (y[0] - 1f64.cos()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
