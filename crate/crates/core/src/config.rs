//! TOML configuration for the `tanklab` binary.
//!
//! Every section is optional and falls back to the reference setup; with
//! `strict = true` (or `--strict`) each section a command consumes must be
//! present. Validation errors carry the dotted key of the offending value.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::DEFAULT_SETTLE_BAND_PCT;
use crate::fuzzy::{
    FuzzyError, FuzzyScheduler, LinguisticVariable, RuleTable, TriangularMf, DEFAULT_RESOLUTION, INPUT_LABELS,
    OUTPUT_LABELS,
};
use crate::pid::{PidError, PidGains, UltimateSearch};
use crate::plant::{linearize, LinearModel, PlantError, TankParams, TankState};
use crate::sim::{ControllerKind, PlantModel, Scenario, SimError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config value `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing config section `[{0}]` (strict mode allows no defaults)")]
    MissingSection(&'static str),
}

fn invalid(key: impl Into<String>, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.to_string(),
    }
}

impl From<PlantError> for ConfigError {
    fn from(e: PlantError) -> Self {
        match &e {
            PlantError::InvalidParameter { key, reason } => invalid(format!("plant.{key}"), reason),
            _ => invalid("operating_point", e),
        }
    }
}

impl From<PidError> for ConfigError {
    fn from(e: PidError) -> Self {
        match &e {
            PidError::InvalidGain { key, .. } => invalid(format!("pid.{key}"), e),
            _ => invalid("tuning", e),
        }
    }
}

impl From<FuzzyError> for ConfigError {
    fn from(e: FuzzyError) -> Self {
        let key = match &e {
            FuzzyError::InvalidVariable { var, .. } => match var.as_str() {
                "rules" => "fuzzy.rules".to_string(),
                v => format!("fuzzy.{}_breakpoints", v.to_lowercase()),
            },
            FuzzyError::InvalidScale { key, .. } => format!("fuzzy.{key}"),
            FuzzyError::ResolutionTooLow(_) => "fuzzy.resolution".into(),
            FuzzyError::UnknownLabel(_) => "fuzzy.rules".into(),
            FuzzyError::EmptyAggregate(_) => "fuzzy".into(),
        };
        invalid(key, e)
    }
}

impl From<SimError> for ConfigError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidScenario { key, reason } => {
                let key = match key {
                    "setpoint_schedule" => "setpoint",
                    "disturbance_schedule" => "disturbance",
                    "open_loop_schedule" => "open_loop",
                    other => other,
                };
                invalid(format!("scenario.{key}"), reason)
            }
            SimError::Plant(e) => e.into(),
            SimError::Pid(e) => e.into(),
            SimError::Fuzzy(e) => e.into(),
            other => invalid("scenario", other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantChoice {
    #[default]
    Nonlinear,
    Linear,
}

impl FromStr for PlantChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nonlinear" => Ok(Self::Nonlinear),
            "linear" => Ok(Self::Linear),
            _ => Err(format!("expected `nonlinear` or `linear`, got `{s}`")),
        }
    }
}

impl FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "pid" => Ok(Self::Pid),
            "fuzzy-pid" => Ok(Self::FuzzyPid),
            _ => Err(format!("expected `none`, `pid` or `fuzzy-pid`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatingPoint {
    pub h1: f64,
    pub h2: f64,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self { h1: 22.0, h2: 9.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub duration: f64,
    pub dt: f64,
    pub plant: PlantChoice,
    pub controller: ControllerKind,
    /// `[time, level]` pairs.
    pub setpoint: Vec<[f64; 2]>,
    /// `[time, flow]` pairs of the tank-2 disturbance.
    pub disturbance: Vec<[f64; 2]>,
    /// `[time, flow]` pairs of the pump command for `controller = "none"`.
    pub open_loop: Vec<[f64; 2]>,
    /// Start at the operating point and read `open_loop` and `disturbance`
    /// as offsets from the operating inflows.
    pub about_operating_point: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_h1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_h2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_q: Option<f64>,
    pub bumpless_start: bool,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            duration: 150.0,
            dt: 0.01,
            plant: PlantChoice::Nonlinear,
            controller: ControllerKind::Pid,
            setpoint: vec![[0.0, 5.0]],
            disturbance: Vec::new(),
            open_loop: Vec::new(),
            about_operating_point: false,
            initial_h1: None,
            initial_h2: None,
            initial_q: None,
            bumpless_start: false,
        }
    }
}

type Breakpoints = Option<Vec<[f64; 3]>>;
type Rules = Option<Vec<Vec<String>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzySection {
    pub e_universe: [f64; 2],
    pub ce_universe: [f64; 2],
    /// Output universes; default `[0, 2·g]` with `g` the `[pid]` gain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp_universe: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ki_universe: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kd_universe: Option<[f64; 2]>,
    /// Five `[left, peak, right]` triangles per variable; default evenly spaced.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_breakpoints: Breakpoints,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ce_breakpoints: Breakpoints,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp_breakpoints: Breakpoints,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ki_breakpoints: Breakpoints,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kd_breakpoints: Breakpoints,
    /// Default `1 / step amplitude`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_scale: Option<f64>,
    /// Default `tc / step amplitude`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ce_scale: Option<f64>,
    pub resolution: usize,
    /// Rows are error labels NB..PB, columns change-of-error labels NB..PB.
    pub rules: Vec<Vec<String>>,
    /// Per-output overrides of `rules`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp_rules: Rules,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ki_rules: Rules,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kd_rules: Rules,
}

impl Default for FuzzySection {
    fn default() -> Self {
        Self {
            e_universe: [-1.0, 1.0],
            ce_universe: [-1.0, 1.0],
            kp_universe: None,
            ki_universe: None,
            kd_universe: None,
            e_breakpoints: None,
            ce_breakpoints: None,
            kp_breakpoints: None,
            ki_breakpoints: None,
            kd_breakpoints: None,
            e_scale: None,
            ce_scale: None,
            resolution: DEFAULT_RESOLUTION,
            rules: RuleTable::standard().to_labels(),
            kp_rules: None,
            ki_rules: None,
            kd_rules: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub settle_band_pct: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            settle_band_pct: DEFAULT_SETTLE_BAND_PCT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    /// Start of the tank-2 disturbance in the disturbance scenario (s).
    pub disturbance_time: f64,
    /// Disturbance flow (cm³/s); negative drains tank 2.
    pub disturbance_flow: f64,
    /// Length of the disturbance scenario (s).
    pub disturbance_duration: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            disturbance_time: 100.0,
            disturbance_flow: -15.0,
            disturbance_duration: 200.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningSection {
    /// Skip the search and use this ultimate gain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ku: Option<f64>,
    /// Skip the search and use this ultimate period (s).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tu: Option<f64>,
    pub k_hi: f64,
    pub tolerance: f64,
}

impl Default for TuningSection {
    fn default() -> Self {
        let s = UltimateSearch::default();
        Self {
            ku: None,
            tu: None,
            k_hi: s.k_hi,
            tolerance: s.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Output file; each command picks its own default name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plant: Option<TankParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<OperatingPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pid: Option<PidGains>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuzzy: Option<FuzzySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuning: Option<TuningSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

fn pairs(v: &[[f64; 2]]) -> Vec<(f64, f64)> {
    v.iter().map(|p| (p[0], p[1])).collect()
}

fn variable(
    name: &str,
    key: &str,
    universe: [f64; 2],
    breakpoints: &Breakpoints,
    labels: [&str; 5],
) -> Result<LinguisticVariable, ConfigError> {
    let universe = (universe[0], universe[1]);
    match breakpoints {
        None => Ok(LinguisticVariable::evenly_spaced(name, universe, labels)?),
        Some(bp) => {
            let bp: &[[f64; 3]; 5] = bp.as_slice().try_into().map_err(|_| {
                invalid(
                    format!("fuzzy.{key}_breakpoints"),
                    "need exactly 5 [left, peak, right] triples",
                )
            })?;
            let mfs = bp.map(|[l, p, r]| TriangularMf::new(l, p, r));
            Ok(LinguisticVariable::new(name, universe, labels, mfs)?)
        }
    }
}

impl Config {
    /// Every section filled with its defaults.
    pub fn reference() -> Self {
        Self {
            schema_version: Some(SCHEMA_VERSION),
            strict: false,
            plant: Some(TankParams::default()),
            operating_point: Some(OperatingPoint::default()),
            scenario: Some(ScenarioSection::default()),
            pid: Some(PidGains::reference()),
            fuzzy: Some(FuzzySection::default()),
            analysis: Some(AnalysisSection::default()),
            compare: Some(CompareSection::default()),
            tuning: Some(TuningSection::default()),
            output: Some(OutputSection::default()),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        match config.schema_version {
            Some(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(invalid(
                    "schema_version",
                    format!("unsupported version {v} (expected {SCHEMA_VERSION})"),
                ))
            }
            None if config.strict => return Err(invalid("schema_version", "required in strict mode")),
            None => {}
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    fn section<T: Clone + Default>(&self, value: &Option<T>, name: &'static str) -> Result<T, ConfigError> {
        match value {
            Some(v) => Ok(v.clone()),
            None if self.strict => Err(ConfigError::MissingSection(name)),
            None => Ok(T::default()),
        }
    }

    pub fn scenario_mut(&mut self) -> &mut ScenarioSection {
        self.scenario.get_or_insert_with(Default::default)
    }

    pub fn tuning_mut(&mut self) -> &mut TuningSection {
        self.tuning.get_or_insert_with(Default::default)
    }

    pub fn analysis_mut(&mut self) -> &mut AnalysisSection {
        self.analysis.get_or_insert_with(Default::default)
    }

    pub fn output_mut(&mut self) -> &mut OutputSection {
        self.output.get_or_insert_with(Default::default)
    }

    pub fn plant_params(&self) -> Result<TankParams, ConfigError> {
        let p = self.section(&self.plant, "plant")?;
        p.validate()?;
        Ok(p)
    }

    pub fn linear_model(&self) -> Result<LinearModel, ConfigError> {
        let params = self.plant_params()?;
        let op = self.section(&self.operating_point, "operating_point")?;
        Ok(linearize(&params, op.h1, op.h2)?)
    }

    pub fn pid_gains(&self) -> Result<PidGains, ConfigError> {
        let g = self.section(&self.pid, "pid")?;
        g.validate()?;
        Ok(g)
    }

    pub fn settle_band_pct(&self) -> Result<f64, ConfigError> {
        let band = self.section(&self.analysis, "analysis")?.settle_band_pct;
        if !(band > 0.0 && band < 100.0) {
            return Err(invalid(
                "analysis.settle_band_pct",
                format!("must lie in (0, 100) (got {band})"),
            ));
        }
        Ok(band)
    }

    pub fn compare_settings(&self) -> Result<CompareSection, ConfigError> {
        let c = self.section(&self.compare, "compare")?;
        if !(c.disturbance_duration.is_finite()
            && c.disturbance_time >= 0.0
            && c.disturbance_time < c.disturbance_duration)
        {
            return Err(invalid(
                "compare.disturbance_time",
                "must lie in [0, disturbance_duration)",
            ));
        }
        if !c.disturbance_flow.is_finite() {
            return Err(invalid("compare.disturbance_flow", "must be finite"));
        }
        Ok(c)
    }

    pub fn tuning(&self) -> Result<TuningSection, ConfigError> {
        let t = self.section(&self.tuning, "tuning")?;
        for (key, v) in [("ku", t.ku), ("tu", t.tu)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(
                        format!("tuning.{key}"),
                        format!("must be finite and > 0 (got {v})"),
                    ));
                }
            }
        }
        if !(t.k_hi > 0.0 && t.tolerance > 0.0) {
            return Err(invalid("tuning.k_hi", "search bound and tolerance must be > 0"));
        }
        Ok(t)
    }

    pub fn output_path(&self) -> Option<String> {
        self.output.as_ref().and_then(|o| o.path.clone())
    }

    /// Resolved scenario, validated against the plant parameters.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let params = self.plant_params()?;
        let s = self.section(&self.scenario, "scenario")?;
        let needs_op = s.plant == PlantChoice::Linear || s.about_operating_point;
        let model = if needs_op { Some(self.linear_model()?) } else { None };

        let mut initial = TankState::default();
        let mut open_loop = pairs(&s.open_loop);
        let mut disturbance = pairs(&s.disturbance);
        if s.about_operating_point {
            let m = model.as_ref().expect("operating point resolved above");
            let (q1, q2) = m.operating_inflows(&params);
            initial = TankState::new(m.h1_op, m.h2_op, params.clamp_flow(q1));
            open_loop.iter_mut().for_each(|(_, q)| *q += q1);
            open_loop.insert(0, (0.0, q1));
            disturbance.iter_mut().for_each(|(_, q)| *q += q2);
            disturbance.insert(0, (0.0, q2));
        }
        initial.h1 = s.initial_h1.unwrap_or(initial.h1);
        initial.h2 = s.initial_h2.unwrap_or(initial.h2);
        initial.q_actuator = s.initial_q.unwrap_or(initial.q_actuator);

        let scenario = Scenario {
            duration: s.duration,
            dt: s.dt,
            setpoint_schedule: pairs(&s.setpoint),
            disturbance_schedule: disturbance,
            open_loop_schedule: open_loop,
            initial_state: initial,
            plant: match model {
                Some(m) if s.plant == PlantChoice::Linear => PlantModel::Linear(m),
                _ => PlantModel::Nonlinear,
            },
            controller: s.controller,
            bumpless_start: s.bumpless_start,
        };
        scenario.validate(&params).map_err(|e| match e {
            SimError::InvalidScenario {
                key: "initial_state",
                reason,
            } => invalid("scenario.initial_h1", reason),
            other => other.into(),
        })?;
        Ok(scenario)
    }

    /// Fuzzy scheduler for `scenario`; input scales default from its step amplitude.
    pub fn scheduler(&self, scenario: &Scenario) -> Result<FuzzyScheduler, ConfigError> {
        let params = self.plant_params()?;
        let f = self.section(&self.fuzzy, "fuzzy")?;
        let needs_gains = f.kp_universe.is_none() || f.ki_universe.is_none() || f.kd_universe.is_none();
        let gains = if needs_gains {
            self.pid_gains()?
        } else {
            PidGains::reference()
        };
        let universe = |u: Option<[f64; 2]>, g: f64| u.unwrap_or([0.0, 2.0 * g]);

        let e_var = variable("E", "e", f.e_universe, &f.e_breakpoints, INPUT_LABELS)?;
        let ce_var = variable("CE", "ce", f.ce_universe, &f.ce_breakpoints, INPUT_LABELS)?;
        let outs = [
            variable(
                "Kp",
                "kp",
                universe(f.kp_universe, gains.kp),
                &f.kp_breakpoints,
                OUTPUT_LABELS,
            )?,
            variable(
                "Ki",
                "ki",
                universe(f.ki_universe, gains.ki),
                &f.ki_breakpoints,
                OUTPUT_LABELS,
            )?,
            variable(
                "Kd",
                "kd",
                universe(f.kd_universe, gains.kd),
                &f.kd_breakpoints,
                OUTPUT_LABELS,
            )?,
        ];
        let table = |rules: &Rules, key: &str| -> Result<RuleTable, ConfigError> {
            RuleTable::from_labels(rules.as_ref().unwrap_or(&f.rules)).map_err(|e| invalid(format!("fuzzy.{key}"), e))
        };
        let tables = [
            table(&f.kp_rules, if f.kp_rules.is_some() { "kp_rules" } else { "rules" })?,
            table(&f.ki_rules, if f.ki_rules.is_some() { "ki_rules" } else { "rules" })?,
            table(&f.kd_rules, if f.kd_rules.is_some() { "kd_rules" } else { "rules" })?,
        ];
        let step = scenario.step_amplitude();
        let tc = if params.tc > 0.0 { params.tc } else { 1.0 };
        Ok(FuzzyScheduler::new(
            e_var,
            ce_var,
            outs,
            tables,
            f.e_scale.unwrap_or(1.0 / step),
            f.ce_scale.unwrap_or(tc / step),
            f.resolution,
        )?)
    }
}
