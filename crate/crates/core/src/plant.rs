//! Coupled-tank plant: physical parameters, nonlinear dynamics, pump actuator
//! lag, and the small-perturbation linear model.
//!
//! Units throughout: levels in cm, areas in cm², flows in cm³/s, time in s.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("invalid plant parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },
    #[error("degenerate operating point (h1 = {h1}, h2 = {h2}): need h1 > h2 > 0")]
    DegenerateOperatingPoint { h1: f64, h2: f64 },
    #[error("linearization is singular: every orifice draining tank {tank} is closed")]
    SingularLinearization { tank: u8 },
}

/// Physical constants of the rig.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TankParams {
    /// Cross-section of tank 1 (cm²).
    pub a1: f64,
    /// Cross-section of tank 2 (cm²).
    pub a2: f64,
    /// Tank 1 outlet orifice constant (cm^{3/2}/s).
    pub alpha1: f64,
    /// Tank 2 outlet orifice constant (cm^{3/2}/s).
    pub alpha2: f64,
    /// Inter-tank orifice constant (cm^{3/2}/s).
    pub alpha3: f64,
    /// Pump actuator time constant (s). Zero means an ideal actuator.
    pub tc: f64,
    /// Maximum pump flow (cm³/s).
    pub q_max: f64,
}

impl Default for TankParams {
    fn default() -> Self {
        Self {
            a1: 32.0,
            a2: 32.0,
            alpha1: 14.30,
            alpha2: 14.30,
            alpha3: 20.00,
            tc: 1.0,
            q_max: 300.0,
        }
    }
}

impl TankParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let checks: [(&'static str, f64, bool, &str); 7] = [
            ("a1", self.a1, self.a1 > 0.0, "must be > 0"),
            ("a2", self.a2, self.a2 > 0.0, "must be > 0"),
            ("alpha1", self.alpha1, self.alpha1 >= 0.0, "must be >= 0"),
            ("alpha2", self.alpha2, self.alpha2 >= 0.0, "must be >= 0"),
            ("alpha3", self.alpha3, self.alpha3 >= 0.0, "must be >= 0"),
            ("tc", self.tc, self.tc >= 0.0, "must be >= 0"),
            ("q_max", self.q_max, self.q_max > 0.0, "must be > 0"),
        ];
        for (key, value, ok, why) in checks {
            if !value.is_finite() || !ok {
                return Err(PlantError::InvalidParameter {
                    key,
                    reason: format!("{why} (got {value})"),
                });
            }
        }
        Ok(())
    }

    pub fn clamp_flow(&self, q: f64) -> f64 {
        q.clamp(0.0, self.q_max)
    }
}

/// Instantaneous plant state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TankState {
    pub h1: f64,
    pub h2: f64,
    /// Actuator output flow feeding tank 1 (cm³/s).
    pub q_actuator: f64,
}

impl TankState {
    pub fn new(h1: f64, h2: f64, q_actuator: f64) -> Self {
        Self { h1, h2, q_actuator }
    }

    /// Liquid volume held by both tanks (cm³).
    pub fn volume(&self, params: &TankParams) -> f64 {
        params.a1 * self.h1 + params.a2 * self.h2
    }
}

/// External flows acting on the plant during one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Inflows {
    /// Commanded pump flow into tank 1; reaches the tank through the actuator lag.
    pub qi1: f64,
    /// Pump flow into tank 2.
    pub qi2: f64,
    /// Additive disturbance flow into tank 2; negative values drain it.
    pub qd: f64,
}

impl Inflows {
    pub fn clamped(self, params: &TankParams) -> Self {
        Self {
            qi1: params.clamp_flow(self.qi1),
            qi2: params.clamp_flow(self.qi2),
            qd: self.qd,
        }
    }
}

/// Signed orifice flow from tank 1 to tank 2.
pub fn flow_between_tanks(h1: f64, h2: f64, alpha3: f64) -> f64 {
    let dh = h1 - h2;
    alpha3 * dh.signum() * dh.abs().sqrt()
}

fn outflow(level: f64, alpha: f64) -> f64 {
    alpha * level.max(0.0).sqrt()
}

/// Level rates `(dh1/dt, dh2/dt)` of the nonlinear plant.
///
/// Tank 1 is fed by the actuator output, not by the raw command.
pub fn nonlinear_derivatives(state: &TankState, inflows: &Inflows, params: &TankParams) -> (f64, f64) {
    let q3 = flow_between_tanks(state.h1, state.h2, params.alpha3);
    let dh1 = (state.q_actuator - outflow(state.h1, params.alpha1) - q3) / params.a1;
    let dh2 = (inflows.qi2 + inflows.qd + q3 - outflow(state.h2, params.alpha2)) / params.a2;
    (dh1, dh2)
}

/// First-order pump lag `tc·dq/dt + q = q_commanded`.
pub fn actuator_derivative(q_actuator: f64, q_commanded: f64, tc: f64) -> f64 {
    (q_commanded - q_actuator) / tc
}

/// Small-perturbation model about a steady operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearModel {
    pub h1_op: f64,
    pub h2_op: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k12: f64,
    pub k21: f64,
    /// Numerator of the second-order transfer function in its printed form `k1·k2`.
    pub tf_num: f64,
    /// Denominator `(a, b, c)` of `a s² + b s + c`.
    pub tf_den: (f64, f64, f64),
}

/// Outflow coefficients `(α1/(2√H1), α2/(2√H2), α3/(2√(H1−H2)))`.
fn conductances(params: &TankParams, h1_op: f64, h2_op: f64) -> (f64, f64, f64) {
    (
        params.alpha1 / (2.0 * h1_op.sqrt()),
        params.alpha2 / (2.0 * h2_op.sqrt()),
        params.alpha3 / (2.0 * (h1_op - h2_op).sqrt()),
    )
}

pub fn linearize(params: &TankParams, h1_op: f64, h2_op: f64) -> Result<LinearModel, PlantError> {
    // negated comparisons also reject NaN
    if !(h2_op > 0.0 && h1_op > h2_op && h1_op.is_finite()) {
        return Err(PlantError::DegenerateOperatingPoint { h1: h1_op, h2: h2_op });
    }
    let (c1, c2, c3) = conductances(params, h1_op, h2_op);
    let g1 = c1 + c3;
    let g2 = c2 + c3;
    if g1 <= 0.0 {
        return Err(PlantError::SingularLinearization { tank: 1 });
    }
    if g2 <= 0.0 {
        return Err(PlantError::SingularLinearization { tank: 2 });
    }
    let k1 = 1.0 / g1;
    let k2 = 1.0 / g2;
    let k12 = c3 / g1;
    let k21 = c3 / g2;
    let tau1 = params.a1 * k1;
    let tau2 = params.a2 * k2;
    Ok(LinearModel {
        h1_op,
        h2_op,
        tau1,
        tau2,
        k1,
        k2,
        k12,
        k21,
        tf_num: k1 * k2,
        tf_den: (tau1 * tau2, tau1 + tau2, 1.0 - k12 * k21),
    })
}

impl LinearModel {
    /// Numerator obtained by eliminating h1 from the two perturbation
    /// equations: `k1·k21`. This is the transfer function the linear ODEs
    /// actually realize, as opposed to the printed `k1·k2` in [`Self::tf_num`].
    pub fn elimination_numerator(&self) -> f64 {
        self.k1 * self.k21
    }

    /// `k1·k2 / (a s² + b s + c)`, the transfer function as printed.
    pub fn printed_tf(&self) -> TransferFunction {
        TransferFunction::new(self.tf_num, self.tf_den)
    }

    /// `k1·k21 / (a s² + b s + c)`, exact for [`linear_derivatives`].
    pub fn plant_tf(&self) -> TransferFunction {
        TransferFunction::new(self.elimination_numerator(), self.tf_den)
    }

    /// Steady external inflows `(Q1, Q2)` into tank 1 and tank 2 that hold the
    /// nonlinear plant at this operating point. `Q2` is negative when tank 2
    /// must be drained to stay at `h2_op`.
    pub fn operating_inflows(&self, params: &TankParams) -> (f64, f64) {
        let q3 = flow_between_tanks(self.h1_op, self.h2_op, params.alpha3);
        (
            outflow(self.h1_op, params.alpha1) + q3,
            outflow(self.h2_op, params.alpha2) - q3,
        )
    }
}

/// Perturbation rates `(dh1/dt, dh2/dt)` of the linearized plant.
pub fn linear_derivatives(
    perturbation: (f64, f64),
    q1: f64,
    q2: f64,
    model: &LinearModel,
    params: &TankParams,
) -> (f64, f64) {
    let (h1, h2) = perturbation;
    let (c1, c2, c3) = conductances(params, model.h1_op, model.h2_op);
    let cross = c3 * (h1 - h2);
    ((q1 - c1 * h1 - cross) / params.a1, (q2 - c2 * h2 + cross) / params.a2)
}

/// `num / (a s² + b s + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferFunction {
    pub num: f64,
    pub den: (f64, f64, f64),
}

impl TransferFunction {
    pub fn new(num: f64, den: (f64, f64, f64)) -> Self {
        Self { num, den }
    }

    pub fn dc_gain(&self) -> f64 {
        self.num / self.den.2
    }

    /// Response at time `t` to a step of size `amplitude` applied at t = 0
    /// from rest. Requires a stable denominator with `a > 0`, `c > 0`.
    pub fn step_response(&self, amplitude: f64, t: f64) -> f64 {
        let (a, b, c) = self.den;
        debug_assert!(a > 0.0 && b >= 0.0 && c > 0.0, "unstable or degenerate denominator");
        if amplitude == 0.0 || t <= 0.0 {
            return 0.0;
        }
        let gain = amplitude * self.num / c;
        let disc = b * b - 4.0 * a * c;
        let shape = if disc.abs() <= 1e-12 * b * b {
            // confluent case: double root r
            let r = -b / (2.0 * a);
            1.0 - (r * t).exp() * (1.0 - r * t)
        } else if disc > 0.0 {
            let sq = disc.sqrt();
            // numerically stable root pair
            let q = -0.5 * (b + sq);
            let r1 = c / q;
            let r2 = q / a;
            1.0 + (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r1 - r2)
        } else {
            let sigma = -b / (2.0 * a);
            let omega = (-disc).sqrt() / (2.0 * a);
            1.0 - (sigma * t).exp() * ((omega * t).cos() - sigma / omega * (omega * t).sin())
        };
        gain * shape
    }
}

/// Closed-form tank-2 perturbation after a step of `q1_step` on the tank-1
/// inflow, for the linear plant of [`linear_derivatives`] (numerator
/// [`LinearModel::elimination_numerator`]).
pub fn step_response_analytic(model: &LinearModel, q1_step: f64, t: f64) -> f64 {
    model.plant_tf().step_response(q1_step, t)
}
