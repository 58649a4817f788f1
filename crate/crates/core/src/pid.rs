//! PID control with output saturation and conditional-integration anti-windup,
//! plus Ziegler-Nichols closed-loop tuning.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::rk4_step;
use crate::plant::{LinearModel, TankParams, TransferFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PidError {
    #[error("invalid PID gain `{key}`: must be finite and >= 0 (got {value})")]
    InvalidGain { key: &'static str, value: f64 },
    #[error("{what} must be finite and > 0 (got {value})")]
    NonPositive { what: &'static str, value: f64 },
    #[error("closed loop is stable for every gain in [{k_lo}, {k_hi}]: no ultimate gain")]
    NoUltimateGain { k_lo: f64, k_hi: f64 },
    #[error("search lower bound {k_lo} is already unstable")]
    UnstableLowerBound { k_lo: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    /// Rounded Ziegler-Nichols gains used as the reference PID tuning
    /// (`Ku = 142`, `Tu = 11.5 s`).
    pub const fn reference() -> Self {
        Self::new(83.5, 14.5, 120.0)
    }

    pub fn validate(&self) -> Result<(), PidError> {
        for (key, value) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !value.is_finite() || value < 0.0 {
                return Err(PidError::InvalidGain { key, value });
            }
        }
        Ok(())
    }
}

impl Default for PidGains {
    fn default() -> Self {
        Self::reference()
    }
}

/// Integrator and derivative memory. A value type: each run owns its own.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PidState {
    pub integral_accumulator: f64,
    pub previous_error: f64,
    pub initialized: bool,
}

impl PidState {
    /// State whose integral term alone produces `output` under `ki`, so the
    /// first step at zero error continues the current actuator flow.
    pub fn preloaded(output: f64, ki: f64) -> Self {
        Self {
            integral_accumulator: if ki > 0.0 { output / ki } else { 0.0 },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AntiWindup {
    /// Freeze the integrator while the output is saturated in the direction
    /// of the error, and keep `ki·∫e` inside the output bounds.
    #[default]
    ConditionalIntegration,
    /// Plain integrator; only the output is clamped.
    Off,
}

/// One PID update. Trapezoidal integral, backward-difference derivative on the
/// error (zero on the first call of a fresh state).
pub fn pid_step(state: PidState, error: f64, dt: f64, gains: &PidGains, u_min: f64, u_max: f64) -> (f64, PidState) {
    pid_step_with(
        state,
        error,
        dt,
        gains,
        u_min,
        u_max,
        AntiWindup::ConditionalIntegration,
    )
}

pub fn pid_step_with(
    state: PidState,
    error: f64,
    dt: f64,
    gains: &PidGains,
    u_min: f64,
    u_max: f64,
    anti_windup: AntiWindup,
) -> (f64, PidState) {
    debug_assert!(dt > 0.0 && u_min < u_max);
    let derivative = if state.initialized {
        (error - state.previous_error) / dt
    } else {
        0.0
    };
    let bound = |integral: f64| match anti_windup {
        AntiWindup::ConditionalIntegration if gains.ki > 0.0 => integral.clamp(u_min / gains.ki, u_max / gains.ki),
        _ => integral,
    };
    let output = |integral: f64| gains.kp * error + gains.ki * integral + gains.kd * derivative;

    let mut integral = bound(state.integral_accumulator + 0.5 * dt * (state.previous_error + error));
    if anti_windup == AntiWindup::ConditionalIntegration {
        let raw = output(integral);
        if (raw > u_max && error > 0.0) || (raw < u_min && error < 0.0) {
            integral = bound(state.integral_accumulator);
        }
    }
    let u = output(integral).clamp(u_min, u_max);
    (
        u,
        PidState {
            integral_accumulator: integral,
            previous_error: error,
            initialized: true,
        },
    )
}

/// Table arithmetic: `Kp = Ku/1.7`, `Ti = Tu/2`, `Td = Tu/8`,
/// `Ki = Kp/Ti`, `Kd = Kp·Td`.
pub fn zn_from_ultimate(ku: f64, tu: f64) -> Result<PidGains, PidError> {
    if !(ku > 0.0 && ku.is_finite()) {
        return Err(PidError::NonPositive {
            what: "ultimate gain",
            value: ku,
        });
    }
    if !(tu > 0.0 && tu.is_finite()) {
        return Err(PidError::NonPositive {
            what: "ultimate period",
            value: tu,
        });
    }
    let kp = ku / 1.7;
    let ti = tu / 2.0;
    let td = tu / 8.0;
    Ok(PidGains::new(kp, kp / ti, kp * td))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltimateSearch {
    pub k_lo: f64,
    pub k_hi: f64,
    /// Relative bracket width at which bisection stops.
    pub tolerance: f64,
}

impl Default for UltimateSearch {
    fn default() -> Self {
        Self {
            k_lo: 0.0,
            k_hi: 1.0e5,
            tolerance: 1.0e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltimateGainResult {
    pub ku: f64,
    pub tu: f64,
    /// Late-to-early oscillation amplitude ratio of the simulated
    /// proportional loop at `ku`. Close to 1 means sustained oscillation.
    pub peak_ratio: f64,
}

/// Closed-loop characteristic polynomial of proportional gain `k` × actuator
/// lag × `tf`, highest degree first:
/// `tc·a s³ + (a + tc·b) s² + (b + tc·c) s + (c + k·num)`.
pub fn characteristic_polynomial(tc: f64, tf: &TransferFunction, k: f64) -> [f64; 4] {
    let (a, b, c) = tf.den;
    [tc * a, a + tc * b, b + tc * c, c + k * tf.num]
}

/// Roots of a real polynomial (highest degree first) as `(re, im)` pairs,
/// via the eigenvalues of its companion matrix. Leading zeros are dropped.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let first = coeffs.iter().position(|c| *c != 0.0).unwrap_or(coeffs.len());
    let coeffs = &coeffs[first..];
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[0];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for j in 0..degree {
        companion[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    companion.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

fn max_real_part(coeffs: &[f64]) -> f64 {
    polynomial_roots(coeffs)
        .into_iter()
        .map(|(re, _)| re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Ultimate gain and period of the proportional loop around the printed
/// transfer function (`tf_num = k1·k2`) and the actuator lag.
pub fn find_ultimate_gain(
    params: &TankParams,
    model: &LinearModel,
    search: UltimateSearch,
) -> Result<UltimateGainResult, PidError> {
    find_ultimate_gain_for(params.tc, &model.printed_tf(), search)
}

/// Bisection on the proportional gain for the stability boundary of
/// `k × 1/(tc s + 1) × tf`.
pub fn find_ultimate_gain_for(
    tc: f64,
    tf: &TransferFunction,
    search: UltimateSearch,
) -> Result<UltimateGainResult, PidError> {
    let stable = |k: f64| max_real_part(&characteristic_polynomial(tc, tf, k)) < 0.0;
    let UltimateSearch { k_lo, k_hi, tolerance } = search;
    if !stable(k_lo) {
        return Err(PidError::UnstableLowerBound { k_lo });
    }
    if stable(k_hi) {
        return Err(PidError::NoUltimateGain { k_lo, k_hi });
    }
    let (mut lo, mut hi) = (k_lo, k_hi);
    while hi - lo > tolerance * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if stable(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ku = 0.5 * (lo + hi);
    // oscillation frequency from the least-damped root pair at the boundary
    let omega = polynomial_roots(&characteristic_polynomial(tc, tf, ku))
        .into_iter()
        .filter(|(_, im)| *im > 0.0)
        .max_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, im)| im)
        .ok_or(PidError::NoUltimateGain { k_lo, k_hi })?;
    let tu = 2.0 * PI / omega;
    let peak_ratio = simulated_peak_ratio(tc, tf, ku, tu);
    Ok(UltimateGainResult { ku, tu, peak_ratio })
}

/// Simulates the unit-setpoint proportional loop `y = tf·lag·k·(1 − y)` over
/// twelve periods and returns the ratio of late to early oscillation
/// amplitude about the closed-loop steady state.
pub fn simulated_peak_ratio(tc: f64, tf: &TransferFunction, k: f64, tu: f64) -> f64 {
    let (a, b, c) = tf.den;
    let dt = tu / 2000.0;
    let y_ss = k * tf.num / (c + k * tf.num);
    // states: y, y', q (actuator output)
    let f = |s: &[f64; 3]| {
        let command = k * (1.0 - s[0]);
        let dq = if tc > 0.0 { (command - s[2]) / tc } else { 0.0 };
        let q = if tc > 0.0 { s[2] } else { command };
        [s[1], (tf.num * q - b * s[1] - c * s[0]) / a, dq]
    };
    let mut s = [0.0; 3];
    let steps_per_period = 2000;
    let mut amplitudes = Vec::new();
    for _ in 0..12 {
        let mut amp: f64 = 0.0;
        for _ in 0..steps_per_period {
            s = rk4_step(f, &s, dt);
            amp = amp.max((s[0] - y_ss).abs());
        }
        amplitudes.push(amp);
    }
    // skip the first periods where the step transient dominates
    amplitudes[11] / amplitudes[3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::linearize;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn proportional_only() {
        let (u, _) = pid_step(
            PidState::default(),
            5.0,
            0.1,
            &PidGains::new(1.0, 0.0, 0.0),
            -100.0,
            100.0,
        );
        assert_eq!(u, 5.0);
    }

    #[test]
    fn trapezoidal_integral_by_hand() {
        let g = PidGains::new(0.0, 2.0, 0.0);
        let (u1, s1) = pid_step(PidState::default(), 1.0, 0.5, &g, -100.0, 100.0);
        assert_eq!(s1.integral_accumulator, 0.25);
        assert_eq!(u1, 0.5);
        let (u2, s2) = pid_step(s1, 1.0, 0.5, &g, -100.0, 100.0);
        assert_eq!(s2.integral_accumulator, 0.75);
        assert_eq!(u2, 1.5);
    }

    #[test]
    fn saturation_freezes_integrator() {
        let state = PidState::default();
        let (u, next) = pid_step(state, 10.0, 0.01, &PidGains::reference(), 0.0, 300.0);
        assert_eq!(u, 300.0);
        assert_eq!(next.integral_accumulator, state.integral_accumulator);
    }

    #[test]
    fn derivative_is_zero_on_first_call_then_backward_difference() {
        let g = PidGains::new(0.0, 0.0, 2.0);
        let (u1, s1) = pid_step(PidState::default(), 3.0, 0.5, &g, -100.0, 100.0);
        assert_eq!(u1, 0.0);
        let (u2, _) = pid_step(s1, 4.0, 0.5, &g, -100.0, 100.0);
        assert_eq!(u2, 4.0);
    }

    #[test]
    fn zero_error_gives_zero_output() {
        let mut s = PidState::default();
        for _ in 0..1000 {
            let (u, next) = pid_step(s, 0.0, 0.01, &PidGains::reference(), 0.0, 300.0);
            assert_eq!(u, 0.0);
            s = next;
        }
    }

    #[test]
    fn preloaded_state_continues_flow() {
        let g = PidGains::reference();
        let (u, _) = pid_step(PidState::preloaded(139.0, g.ki), 0.0, 0.01, &g, 0.0, 300.0);
        assert_relative_eq!(u, 139.0, max_relative = 1e-14);
    }

    /// Drive a first-order process up against saturation, then reverse the
    /// setpoint and count steps until the output leaves the upper bound.
    fn recovery_steps(mode: AntiWindup) -> (usize, f64) {
        let g = PidGains::new(2.0, 1.0, 0.0);
        let dt = 0.01;
        let mut s = PidState::default();
        let mut y = 0.0;
        let mut max_integral: f64 = 0.0;
        for _ in 0..2000 {
            let (u, next) = pid_step_with(s, 10.0 - y, dt, &g, 0.0, 1.0, mode);
            s = next;
            max_integral = max_integral.max(s.integral_accumulator);
            y += dt * (u - 0.1 * y);
        }
        let mut steps = 0;
        loop {
            let (u, next) = pid_step_with(s, 0.0 - y, dt, &g, 0.0, 1.0, mode);
            s = next;
            y += dt * (u - 0.1 * y);
            steps += 1;
            if u < 1.0 || steps > 100_000 {
                return (steps, max_integral);
            }
        }
    }

    #[test]
    fn anti_windup_recovers_faster_and_stays_bounded() {
        let (with, bounded) = recovery_steps(AntiWindup::ConditionalIntegration);
        let (without, unbounded) = recovery_steps(AntiWindup::Off);
        assert!(bounded <= 1.0 / 1.0 + 1e-12, "{bounded}");
        assert!(unbounded > 10.0 * bounded);
        assert!(with < without, "{with} vs {without}");
    }

    #[test]
    fn zn_table_values() {
        let g = zn_from_ultimate(142.0, 11.5).unwrap();
        assert_relative_eq!(g.kp, 83.529, epsilon = 1e-3);
        assert_relative_eq!(g.ki, 14.527, epsilon = 1e-3);
        assert_relative_eq!(g.kd, 120.074, epsilon = 1e-3);
        let r = PidGains::reference();
        assert_relative_eq!(g.kp, r.kp, max_relative = 5e-3);
        assert_relative_eq!(g.ki, r.ki, max_relative = 5e-3);
        assert_relative_eq!(g.kd, r.kd, max_relative = 5e-3);

        assert_eq!(zn_from_ultimate(1.7, 8.0).unwrap(), PidGains::new(1.0, 0.25, 1.0));
        assert!(zn_from_ultimate(0.0, 8.0).is_err());
        assert!(zn_from_ultimate(1.0, -1.0).is_err());
    }

    #[test]
    fn polynomial_roots_of_known_cubic() {
        // (s + 1)(s + 2)(s + 3)
        let mut roots: Vec<f64> = polynomial_roots(&[1.0, 6.0, 11.0, 6.0])
            .into_iter()
            .map(|r| r.0)
            .collect();
        roots.sort_by(f64::total_cmp);
        for (r, e) in roots.iter().zip([-3.0, -2.0, -1.0]) {
            assert_relative_eq!(*r, e, epsilon = 1e-10);
        }
        // leading zero is dropped: 2 s + 4
        assert_eq!(polynomial_roots(&[0.0, 2.0, 4.0]), vec![(-2.0, 0.0)]);
    }

    /// Routh boundary of `a3 s³ + a2 s² + a1 s + a0`: `a2·a1 = a3·a0`.
    fn routh_oracle(tc: f64, tf: &TransferFunction) -> (f64, f64) {
        let [a3, a2, a1, _] = characteristic_polynomial(tc, tf, 0.0);
        let ku = (a2 * a1 / a3 - tf.den.2) / tf.num;
        (ku, 2.0 * PI * (a3 / a1).sqrt())
    }

    #[test]
    fn ultimate_gain_of_printed_transfer_function() {
        let tf = TransferFunction::new(0.045, (46.159, 13.645, 0.65295));
        let r = find_ultimate_gain_for(1.0, &tf, UltimateSearch::default()).unwrap();
        let (ku, tu) = routh_oracle(1.0, &tf);
        assert_relative_eq!(r.ku, ku, max_relative = 1e-6);
        assert_relative_eq!(r.tu, tu, max_relative = 1e-6);
        assert_relative_eq!(r.tu, 2.0 * PI * (46.159f64 / 14.298).sqrt(), max_relative = 1e-5);
        assert_relative_eq!(r.tu, 11.29, epsilon = 5e-3);
        assert_relative_eq!(r.ku, 397.0, max_relative = 5e-3);
        assert!((r.peak_ratio - 1.0).abs() < 0.05, "{}", r.peak_ratio);
    }

    #[test]
    fn elimination_numerator_recovers_ku_142() {
        let p = TankParams::default();
        let m = linearize(&p, 22.0, 9.0).unwrap();
        let r = find_ultimate_gain_for(p.tc, &m.plant_tf(), UltimateSearch::default()).unwrap();
        assert_relative_eq!(r.ku, 142.0, max_relative = 1e-2);
        let printed = find_ultimate_gain(&p, &m, UltimateSearch::default()).unwrap();
        assert_relative_eq!(r.tu, printed.tu, max_relative = 1e-6);
    }

    #[test]
    fn simulated_loop_decays_below_and_grows_above_ku() {
        let tf = TransferFunction::new(0.045, (46.159, 13.645, 0.65295));
        let r = find_ultimate_gain_for(1.0, &tf, UltimateSearch::default()).unwrap();
        assert!(simulated_peak_ratio(1.0, &tf, 0.8 * r.ku, r.tu) < 0.5);
        assert!(simulated_peak_ratio(1.0, &tf, 1.2 * r.ku, r.tu) > 2.0);
    }

    #[test]
    fn second_order_loop_has_no_ultimate_gain() {
        let tf = TransferFunction::new(0.045, (46.159, 13.645, 0.65295));
        assert!(matches!(
            find_ultimate_gain_for(0.0, &tf, UltimateSearch::default()),
            Err(PidError::NoUltimateGain { .. })
        ));
    }

    #[test]
    fn unstable_lower_bound_is_rejected() {
        let tf = TransferFunction::new(0.045, (46.159, 13.645, 0.65295));
        let search = UltimateSearch {
            k_lo: 1000.0,
            k_hi: 2000.0,
            tolerance: 1e-9,
        };
        assert!(matches!(
            find_ultimate_gain_for(1.0, &tf, search),
            Err(PidError::UnstableLowerBound { .. })
        ));
    }

    proptest! {
        #[test]
        fn output_stays_in_bounds(
            errors in proptest::collection::vec(-50.0..50.0f64, 1..200),
            kp in 0.0..200.0f64, ki in 0.0..50.0f64, kd in 0.0..200.0f64,
            dt in 0.001..0.5f64,
        ) {
            let g = PidGains::new(kp, ki, kd);
            let mut s = PidState::default();
            for e in errors {
                let (u, next) = pid_step(s, e, dt, &g, 0.0, 300.0);
                prop_assert!((0.0..=300.0).contains(&u));
                if ki > 0.0 {
                    let term = ki * next.integral_accumulator;
                    prop_assert!((-1e-9..=300.0 + 1e-9).contains(&term));
                }
                s = next;
            }
        }

        #[test]
        fn zn_identities_hold(ku in 1e-3..1e4f64, tu in 1e-3..1e3f64) {
            let g = zn_from_ultimate(ku, tu).unwrap();
            let ti = tu / 2.0;
            let td = tu / 8.0;
            prop_assert!((ti * g.ki - g.kp).abs() <= 4.0 * f64::EPSILON * g.kp);
            prop_assert!((g.kd - g.kp * td).abs() <= 4.0 * f64::EPSILON * g.kd);
        }
    }
}
