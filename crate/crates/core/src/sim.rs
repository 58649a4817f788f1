//! Fixed-step closed-loop simulation of the coupled-tank rig.
//!
//! Each step samples the setpoint, runs the controller, records a trace row,
//! then advances plant and actuator together with one RK4 step. Schedules are
//! zero-order holds; the controller runs at the integration rate.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{fuzzy_pid_step, FuzzyError, FuzzyScheduler};
use crate::ode::rk4_step;
use crate::pid::{pid_step, PidError, PidGains, PidState};
use crate::plant::{
    actuator_derivative, linear_derivatives, nonlinear_derivatives, Inflows, LinearModel, PlantError, TankParams,
    TankState,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario `{key}`: {reason}")]
    InvalidScenario { key: &'static str, reason: String },
    #[error("controller needs a `{0}` configuration")]
    ConfigMissing(&'static str),
    #[error("state became non-finite at t = {t:e} s (time step too large?)")]
    NonFiniteState { t: f64 },
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Pid(#[from] PidError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantModel {
    Nonlinear,
    /// Perturbation model about the operating point of the given linearization.
    Linear(LinearModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    /// Open loop: the command follows the scenario's open-loop schedule.
    None,
    Pid,
    FuzzyPid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub duration: f64,
    pub dt: f64,
    /// `(time, level)` steps of the tank-2 setpoint. Before the first entry
    /// the setpoint equals the initial tank-2 level.
    pub setpoint_schedule: Vec<(f64, f64)>,
    /// `(time, flow)` steps of the additive tank-2 disturbance; 0 before the first entry.
    pub disturbance_schedule: Vec<(f64, f64)>,
    /// `(time, flow)` steps of the pump command when `controller` is `None`.
    pub open_loop_schedule: Vec<(f64, f64)>,
    pub initial_state: TankState,
    pub plant: PlantModel,
    pub controller: ControllerKind,
    /// Preload the integrator so the first controller output equals the
    /// initial actuator flow.
    pub bumpless_start: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            duration: 150.0,
            dt: 0.01,
            setpoint_schedule: vec![(0.0, 5.0)],
            disturbance_schedule: Vec::new(),
            open_loop_schedule: Vec::new(),
            initial_state: TankState::default(),
            plant: PlantModel::Nonlinear,
            controller: ControllerKind::Pid,
            bumpless_start: false,
        }
    }
}

/// Upper bound on `duration / dt`, keeping traces within memory.
pub const MAX_STEPS: usize = 50_000_000;

/// Index of the first step at which a schedule entry at `time` is in force.
fn start_index(time: f64, dt: f64) -> usize {
    (time / dt - 1e-9).ceil().max(0.0) as usize
}

/// A zero-order-hold schedule resolved to step indices.
struct Hold {
    steps: Vec<(usize, f64)>,
    before: f64,
}

impl Hold {
    fn new(schedule: &[(f64, f64)], dt: f64, before: f64) -> Self {
        Self {
            steps: schedule.iter().map(|&(t, v)| (start_index(t, dt), v)).collect(),
            before,
        }
    }

    fn at(&self, k: usize) -> f64 {
        self.steps
            .iter()
            .take_while(|(start, _)| *start <= k)
            .last()
            .map_or(self.before, |(_, v)| *v)
    }
}

impl Scenario {
    pub fn row_count(&self) -> usize {
        (self.duration / self.dt + 1e-9).floor() as usize + 1
    }

    pub fn validate(&self, params: &TankParams) -> Result<(), SimError> {
        let invalid = |key, reason: String| Err(SimError::InvalidScenario { key, reason });
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid("dt", format!("must be finite and > 0 (got {})", self.dt));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return invalid("duration", format!("must be finite and >= dt (got {})", self.duration));
        }
        if self.duration / self.dt > MAX_STEPS as f64 {
            return invalid("duration", format!("more than {MAX_STEPS} steps of dt"));
        }
        for (key, schedule) in [
            ("setpoint_schedule", &self.setpoint_schedule),
            ("disturbance_schedule", &self.disturbance_schedule),
            ("open_loop_schedule", &self.open_loop_schedule),
        ] {
            let mut last = 0.0;
            for &(t, v) in schedule {
                if !(t.is_finite() && v.is_finite()) {
                    return invalid(key, "entries must be finite".into());
                }
                if t < last || t > self.duration {
                    return invalid(
                        key,
                        format!("times must be nondecreasing within [0, duration] (got {t})"),
                    );
                }
                last = t;
            }
        }
        let s = self.initial_state;
        if !(s.h1 >= 0.0 && s.h2 >= 0.0 && s.h1.is_finite() && s.h2.is_finite()) {
            return invalid("initial_state", "levels must be finite and >= 0".into());
        }
        if !(0.0..=params.q_max).contains(&s.q_actuator) {
            return invalid("initial_state", format!("q_actuator must lie in [0, {}]", params.q_max));
        }
        Ok(())
    }

    /// Largest setpoint excursion from the initial tank-2 level; 1 if the
    /// schedule never moves.
    pub fn step_amplitude(&self) -> f64 {
        let h0 = self.initial_state.h2;
        let amp = self
            .setpoint_schedule
            .iter()
            .map(|(_, sp)| (sp - h0).abs())
            .fold(0.0, f64::max);
        if amp > 0.0 {
            amp
        } else {
            1.0
        }
    }

    /// First setpoint change: `(time, target)`.
    pub fn primary_step(&self) -> Option<(f64, f64)> {
        let mut current = self.initial_state.h2;
        for &(t, sp) in &self.setpoint_schedule {
            if sp != current {
                return Some((t, sp));
            }
            current = sp;
        }
        None
    }
}

/// One recorded sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub setpoint: f64,
    pub h1: f64,
    pub h2: f64,
    pub q_commanded: f64,
    pub q_actuator: f64,
    pub error: f64,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

pub const CSV_HEADER: &str = "t,setpoint,h1,h2,q_commanded,q_actuator,error,kp,ki,kd";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace CSV header must be `{CSV_HEADER}`")]
    Header,
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn h2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h2).collect()
    }

    /// CSV with `.` decimals, shortest round-trip float formatting, LF endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.t, r.setpoint, r.h1, r.h2, r.q_commanded, r.q_actuator, r.error, r.kp, r.ki, r.kd
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TraceError> {
        let mut reader = csv::Reader::from_reader(input);
        if reader.headers()?.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
            return Err(TraceError::Header);
        }
        let rows = reader.deserialize().collect::<Result<Vec<TraceRow>, _>>()?;
        Ok(Self { rows })
    }
}

/// Plant in integration coordinates: absolute for the nonlinear model,
/// perturbations about the operating point for the linear one.
#[derive(Clone, Copy)]
enum Dynamics<'a> {
    Nonlinear(&'a TankParams),
    Linear {
        params: &'a TankParams,
        model: &'a LinearModel,
        q1_op: f64,
        q2_op: f64,
    },
}

impl<'a> Dynamics<'a> {
    fn new(plant: &'a PlantModel, params: &'a TankParams) -> Self {
        match plant {
            PlantModel::Nonlinear => Self::Nonlinear(params),
            PlantModel::Linear(model) => {
                let (q1_op, q2_op) = model.operating_inflows(params);
                Self::Linear {
                    params,
                    model,
                    q1_op,
                    q2_op,
                }
            }
        }
    }

    fn params(&self) -> &TankParams {
        match self {
            Self::Nonlinear(p) | Self::Linear { params: p, .. } => p,
        }
    }

    fn offset(&self) -> (f64, f64) {
        match self {
            Self::Nonlinear(_) => (0.0, 0.0),
            Self::Linear { model, .. } => (model.h1_op, model.h2_op),
        }
    }

    fn internal(&self, s: &TankState) -> [f64; 3] {
        let (o1, o2) = self.offset();
        [s.h1 - o1, s.h2 - o2, s.q_actuator]
    }

    fn absolute(&self, x: &[f64; 3]) -> TankState {
        let (o1, o2) = self.offset();
        TankState::new(x[0] + o1, x[1] + o2, x[2])
    }

    fn levels(&self, x: &[f64; 3], inflows: &Inflows) -> (f64, f64) {
        match *self {
            Self::Nonlinear(params) => nonlinear_derivatives(&TankState::new(x[0], x[1], x[2]), inflows, params),
            Self::Linear {
                params,
                model,
                q1_op,
                q2_op,
            } => linear_derivatives(
                (x[0], x[1]),
                x[2] - q1_op,
                inflows.qi2 + inflows.qd - q2_op,
                model,
                params,
            ),
        }
    }

    /// Advances by `dt`; `t_next` is only used for error reporting. Finiteness
    /// is checked before clamping, since `max` would swallow a NaN.
    fn step(&self, x: &[f64; 3], inflows: &Inflows, dt: f64, t_next: f64) -> Result<[f64; 3], SimError> {
        let params = self.params();
        let inflows = inflows.clamped(params);
        let ideal = params.tc <= 0.0;
        let mut start = *x;
        if ideal {
            start[2] = inflows.qi1;
        }
        let f = |y: &[f64; 3]| {
            let (dh1, dh2) = self.levels(y, &inflows);
            let dq = if ideal {
                0.0
            } else {
                actuator_derivative(y[2], inflows.qi1, params.tc)
            };
            [dh1, dh2, dq]
        };
        let mut next = rk4_step(f, &start, dt);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(SimError::NonFiniteState { t: t_next });
        }
        let (o1, o2) = self.offset();
        next[0] = next[0].max(-o1);
        next[1] = next[1].max(-o2);
        next[2] = params.clamp_flow(next[2]);
        Ok(next)
    }
}

/// One RK4 step of the nonlinear plant and actuator, with levels clamped at 0
/// and the actuator output clamped to `[0, q_max]`.
pub fn integrate_step(state: TankState, inflows: Inflows, params: &TankParams, dt: f64) -> Result<TankState, SimError> {
    let dynamics = Dynamics::Nonlinear(params);
    let next = dynamics.step(&dynamics.internal(&state), &inflows, dt, dt)?;
    Ok(dynamics.absolute(&next))
}

/// One RK4 step of the linearized plant. `state` holds absolute levels.
pub fn integrate_linear_step(
    state: TankState,
    inflows: Inflows,
    params: &TankParams,
    model: &LinearModel,
    dt: f64,
) -> Result<TankState, SimError> {
    let plant = PlantModel::Linear(*model);
    let dynamics = Dynamics::new(&plant, params);
    let next = dynamics.step(&dynamics.internal(&state), &inflows, dt, dt)?;
    Ok(dynamics.absolute(&next))
}

enum Controller<'a> {
    Open(Hold),
    Pid(&'a PidGains, PidState),
    Fuzzy(&'a FuzzyScheduler, PidState),
}

pub fn run_scenario(
    scenario: &Scenario,
    params: &TankParams,
    pid: Option<&PidGains>,
    scheduler: Option<&FuzzyScheduler>,
) -> Result<Trace, SimError> {
    params.validate()?;
    scenario.validate(params)?;
    let dt = scenario.dt;
    let rows = scenario.row_count();
    let q_max = params.q_max;
    let h2_0 = scenario.initial_state.h2;
    let setpoint = Hold::new(&scenario.setpoint_schedule, dt, h2_0);
    let disturbance = Hold::new(&scenario.disturbance_schedule, dt, 0.0);

    let q0 = scenario.initial_state.q_actuator;
    let mut controller = match scenario.controller {
        ControllerKind::None => Controller::Open(Hold::new(&scenario.open_loop_schedule, dt, 0.0)),
        ControllerKind::Pid => {
            let gains = pid.ok_or(SimError::ConfigMissing("pid"))?;
            gains.validate()?;
            let state = if scenario.bumpless_start {
                PidState::preloaded(q0, gains.ki)
            } else {
                PidState::default()
            };
            Controller::Pid(gains, state)
        }
        ControllerKind::FuzzyPid => {
            let scheduler = scheduler.ok_or(SimError::ConfigMissing("fuzzy"))?;
            let state = if scenario.bumpless_start {
                let ki = scheduler.infer(setpoint.at(0) - h2_0, 0.0)?.ki;
                PidState::preloaded(q0, ki)
            } else {
                PidState::default()
            };
            Controller::Fuzzy(scheduler, state)
        }
    };

    let dynamics = Dynamics::new(&scenario.plant, params);
    let mut x = dynamics.internal(&scenario.initial_state);
    let mut trace = Trace {
        rows: Vec::with_capacity(rows),
    };
    for k in 0..rows {
        let t = k as f64 * dt;
        let state = dynamics.absolute(&x);
        let sp = setpoint.at(k);
        let error = sp - state.h2;
        let (q_commanded, gains) = match &mut controller {
            Controller::Open(hold) => (params.clamp_flow(hold.at(k)), PidGains::new(0.0, 0.0, 0.0)),
            Controller::Pid(gains, pid_state) => {
                let (u, next) = pid_step(*pid_state, error, dt, gains, 0.0, q_max);
                *pid_state = next;
                (u, **gains)
            }
            Controller::Fuzzy(scheduler, pid_state) => {
                let (u, next, g) = fuzzy_pid_step(scheduler, *pid_state, error, dt, 0.0, q_max)?;
                *pid_state = next;
                (u, g.into())
            }
        };
        trace.rows.push(TraceRow {
            t,
            setpoint: sp,
            h1: state.h1,
            h2: state.h2,
            q_commanded,
            q_actuator: state.q_actuator,
            error,
            kp: gains.kp,
            ki: gains.ki,
            kd: gains.kd,
        });
        if k + 1 < rows {
            let inflows = Inflows {
                qi1: q_commanded,
                qi2: 0.0,
                qd: disturbance.at(k),
            };
            x = dynamics.step(&x, &inflows, dt, t + dt)?;
        }
    }
    Ok(trace)
}
