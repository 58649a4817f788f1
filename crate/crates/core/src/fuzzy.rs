//! Mamdani fuzzy inference used as a PID gain scheduler.
//!
//! Two inputs (error and change of error), five triangular terms each, a 5×5
//! rule table, and three outputs (Kp, Ki, Kd). Inference is min/max with
//! min implication and discrete centroid defuzzification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pid::{pid_step, PidGains, PidState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("variable `{var}`: {reason}")]
    InvalidVariable { var: String, reason: String },
    #[error("`{key}` must be finite and > 0 (got {value})")]
    InvalidScale { key: &'static str, value: f64 },
    #[error("defuzz_resolution must be >= 101 (got {0})")]
    ResolutionTooLow(usize),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("no rule fired for output `{0}`")]
    EmptyAggregate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangularMf {
    pub left: f64,
    pub peak: f64,
    pub right: f64,
}

impl TriangularMf {
    pub const fn new(left: f64, peak: f64, right: f64) -> Self {
        Self { left, peak, right }
    }

    /// Degree of membership in `[0, 1]`. A shoulder (`left == peak` or
    /// `peak == right`) is 1 at the peak and falls off on one side only.
    pub fn membership(&self, x: f64) -> f64 {
        if x < self.left || x > self.right {
            0.0
        } else if x == self.peak {
            1.0
        } else if x < self.peak {
            (x - self.left) / (self.peak - self.left)
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }
}

pub fn membership(mf: &TriangularMf, x: f64) -> f64 {
    mf.membership(x)
}

/// Linguistic labels of the two inputs, in universe order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputLabel {
    NB,
    NS,
    Z,
    PS,
    PB,
}

impl InputLabel {
    pub const ALL: [InputLabel; 5] = [Self::NB, Self::NS, Self::Z, Self::PS, Self::PB];
}

/// Linguistic labels of the three gain outputs, in universe order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutputLabel {
    S,
    MS,
    M,
    MB,
    B,
}

impl OutputLabel {
    pub const ALL: [OutputLabel; 5] = [Self::S, Self::MS, Self::M, Self::MB, Self::B];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for InputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for OutputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for OutputLabel {
    type Err = FuzzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OutputLabel::ALL
            .into_iter()
            .find(|l| l.to_string() == s)
            .ok_or_else(|| FuzzyError::UnknownLabel(s.to_string()))
    }
}

/// A variable with five ordered triangular terms over a closed universe.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    pub name: String,
    pub universe: (f64, f64),
    pub terms: [(String, TriangularMf); 5],
}

impl LinguisticVariable {
    pub fn new(
        name: impl Into<String>,
        universe: (f64, f64),
        labels: [&str; 5],
        mfs: [TriangularMf; 5],
    ) -> Result<Self, FuzzyError> {
        let var = Self {
            name: name.into(),
            universe,
            terms: std::array::from_fn(|i| (labels[i].to_string(), mfs[i])),
        };
        var.validate()?;
        Ok(var)
    }

    /// Five evenly spaced triangles over `[lo, hi]`, shouldered at both ends.
    pub fn evenly_spaced(name: impl Into<String>, universe: (f64, f64), labels: [&str; 5]) -> Result<Self, FuzzyError> {
        let (lo, hi) = universe;
        let step = (hi - lo) / 4.0;
        let peak = |i: usize| if i == 4 { hi } else { lo + step * i as f64 };
        let mfs = std::array::from_fn(|i| {
            TriangularMf::new(
                if i == 0 { lo } else { peak(i - 1) },
                peak(i),
                if i == 4 { hi } else { peak(i + 1) },
            )
        });
        Self::new(name, universe, labels, mfs)
    }

    fn validate(&self) -> Result<(), FuzzyError> {
        let err = |reason: String| FuzzyError::InvalidVariable {
            var: self.name.clone(),
            reason,
        };
        let (lo, hi) = self.universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(err(format!("universe [{lo}, {hi}] is empty or not finite")));
        }
        for (label, mf) in &self.terms {
            if ![mf.left, mf.peak, mf.right].iter().all(|v| v.is_finite()) {
                return Err(err(format!("term {label}: non-finite breakpoint")));
            }
            if !(mf.left <= mf.peak && mf.peak <= mf.right) {
                return Err(err(format!("term {label}: need left <= peak <= right")));
            }
        }
        for pair in self.terms.windows(2) {
            let ((l0, a), (l1, b)) = (&pair[0], &pair[1]);
            if a.peak >= b.peak {
                return Err(err(format!("peaks of {l0} and {l1} are not strictly increasing")));
            }
            // every point between the two peaks needs a nonzero degree
            if b.left >= a.right {
                return Err(err(format!("gap between {l0} and {l1}")));
            }
        }
        let first = &self.terms[0].1;
        let last = &self.terms[4].1;
        if !(first.peak <= lo || first.left < lo) || first.right <= lo {
            return Err(err("lower end of the universe is not covered".into()));
        }
        if !(last.peak >= hi || last.right > hi) || last.left >= hi {
            return Err(err("upper end of the universe is not covered".into()));
        }
        Ok(())
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.universe.0, self.universe.1)
    }

    /// Degrees of all five terms at `x` (clamped to the universe).
    pub fn degrees(&self, x: f64) -> [f64; 5] {
        let x = self.clamp(x);
        std::array::from_fn(|i| self.terms[i].1.membership(x))
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.universe.0 + self.universe.1)
    }
}

pub fn fuzzify(var: &LinguisticVariable, x: f64) -> Vec<(String, f64)> {
    let d = var.degrees(x);
    var.terms
        .iter()
        .zip(d)
        .map(|((label, _), deg)| (label.clone(), deg))
        .collect()
}

/// 5×5 rule grid: rows are error terms, columns change-of-error terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleTable(pub [[OutputLabel; 5]; 5]);

impl RuleTable {
    /// The 25-rule table (rows E = NB..PB, columns CE = NB..PB).
    pub fn standard() -> Self {
        use OutputLabel::*;
        Self([
            [S, S, S, MS, M],
            [S, S, MS, M, MB],
            [S, MS, M, MB, B],
            [MS, M, MB, B, B],
            [M, MB, B, B, B],
        ])
    }

    pub fn get(&self, e: InputLabel, ce: InputLabel) -> OutputLabel {
        self.0[e as usize][ce as usize]
    }

    pub fn from_labels(rows: &[Vec<String>]) -> Result<Self, FuzzyError> {
        if rows.len() != 5 || rows.iter().any(|r| r.len() != 5) {
            return Err(FuzzyError::InvalidVariable {
                var: "rules".into(),
                reason: "rule table must be 5 rows of 5 labels".into(),
            });
        }
        let mut grid = [[OutputLabel::M; 5]; 5];
        for (i, row) in rows.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                grid[i][j] = cell.parse()?;
            }
        }
        Ok(Self(grid))
    }

    pub fn to_labels(&self) -> Vec<Vec<String>> {
        self.0
            .iter()
            .map(|r| r.iter().map(|l| l.to_string()).collect())
            .collect()
    }
}

impl Default for RuleTable {
    fn default() -> Self {
        Self::standard()
    }
}

pub const INPUT_LABELS: [&str; 5] = ["NB", "NS", "Z", "PS", "PB"];
pub const OUTPUT_LABELS: [&str; 5] = ["S", "MS", "M", "MB", "B"];

/// One output variable with its rule table and pre-sampled membership grid.
#[derive(Debug, Clone, PartialEq)]
struct OutputChannel {
    var: LinguisticVariable,
    table: RuleTable,
    xs: Vec<f64>,
    /// `samples[i][label]` = membership of label at `xs[i]`.
    samples: Vec<[f64; 5]>,
}

impl OutputChannel {
    fn new(var: LinguisticVariable, table: RuleTable, resolution: usize) -> Self {
        let (lo, hi) = var.universe;
        let xs: Vec<f64> = (0..resolution)
            .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
            .collect();
        let samples = xs
            .iter()
            .map(|&x| std::array::from_fn(|l| var.terms[l].1.membership(x)))
            .collect();
        Self {
            var,
            table,
            xs,
            samples,
        }
    }

    /// Centroid of the max-aggregate of consequents clipped at `strength[label]`.
    fn defuzzify(&self, strength: &[f64; 5]) -> Result<f64, FuzzyError> {
        let active: Vec<usize> = (0..5).filter(|&l| strength[l] > 0.0).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for (x, mu) in self.xs.iter().zip(&self.samples) {
            let agg = active.iter().map(|&l| mu[l].min(strength[l])).fold(0.0, f64::max);
            num += x * agg;
            den += agg;
        }
        if den > 0.0 {
            Ok(num / den)
        } else {
            Err(FuzzyError::EmptyAggregate(self.var.name.clone()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl From<ScheduledGains> for PidGains {
    fn from(g: ScheduledGains) -> Self {
        PidGains::new(g.kp, g.ki, g.kd)
    }
}

/// Maps `(error, change of error)` to PID gains every control step.
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyScheduler {
    pub e_var: LinguisticVariable,
    pub ce_var: LinguisticVariable,
    pub e_scale: f64,
    pub ce_scale: f64,
    pub defuzz_resolution: usize,
    outputs: [OutputChannel; 3],
}

pub const DEFAULT_RESOLUTION: usize = 1001;

impl FuzzyScheduler {
    /// `out_vars` and `tables` are ordered (kp, ki, kd).
    pub fn new(
        e_var: LinguisticVariable,
        ce_var: LinguisticVariable,
        out_vars: [LinguisticVariable; 3],
        tables: [RuleTable; 3],
        e_scale: f64,
        ce_scale: f64,
        defuzz_resolution: usize,
    ) -> Result<Self, FuzzyError> {
        for (key, value) in [("e_scale", e_scale), ("ce_scale", ce_scale)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(FuzzyError::InvalidScale { key, value });
            }
        }
        if defuzz_resolution < 101 {
            return Err(FuzzyError::ResolutionTooLow(defuzz_resolution));
        }
        for var in &out_vars {
            for ((label, _), expected) in var.terms.iter().zip(OUTPUT_LABELS) {
                if label != expected {
                    return Err(FuzzyError::InvalidVariable {
                        var: var.name.clone(),
                        reason: format!("output terms must be labelled {OUTPUT_LABELS:?}"),
                    });
                }
            }
        }
        let [kp, ki, kd] = out_vars;
        let outputs = [
            OutputChannel::new(kp, tables[0], defuzz_resolution),
            OutputChannel::new(ki, tables[1], defuzz_resolution),
            OutputChannel::new(kd, tables[2], defuzz_resolution),
        ];
        Ok(Self {
            e_var,
            ce_var,
            e_scale,
            ce_scale,
            defuzz_resolution,
            outputs,
        })
    }

    /// Default layout: inputs on `[-1, 1]`, each output on `[0, 2·g]` where `g`
    /// is the corresponding entry of `gains`; evenly spaced terms, the
    /// standard rule table for all outputs, `e_scale = 1/step` and
    /// `ce_scale = tc/step`.
    pub fn standard(gains: &PidGains, step_amplitude: f64, tc: f64) -> Result<Self, FuzzyError> {
        let step = step_amplitude.abs();
        let e_var = LinguisticVariable::evenly_spaced("E", (-1.0, 1.0), INPUT_LABELS)?;
        let ce_var = LinguisticVariable::evenly_spaced("CE", (-1.0, 1.0), INPUT_LABELS)?;
        let out = |name: &str, g: f64| LinguisticVariable::evenly_spaced(name, (0.0, 2.0 * g), OUTPUT_LABELS);
        Self::new(
            e_var,
            ce_var,
            [out("Kp", gains.kp)?, out("Ki", gains.ki)?, out("Kd", gains.kd)?],
            [RuleTable::standard(); 3],
            1.0 / step,
            // an ideal actuator has no time scale of its own; fall back to 1 s
            if tc > 0.0 { tc } else { 1.0 } / step,
            DEFAULT_RESOLUTION,
        )
    }

    pub fn output_vars(&self) -> [&LinguisticVariable; 3] {
        [&self.outputs[0].var, &self.outputs[1].var, &self.outputs[2].var]
    }

    pub fn tables(&self) -> [RuleTable; 3] {
        [self.outputs[0].table, self.outputs[1].table, self.outputs[2].table]
    }

    /// Rule firing strengths `min(μE, μCE)` for every cell of the grid.
    pub fn firing_strengths(&self, e: f64, ce: f64) -> [[f64; 5]; 5] {
        let de = self.e_var.degrees(e * self.e_scale);
        let dce = self.ce_var.degrees(ce * self.ce_scale);
        std::array::from_fn(|i| std::array::from_fn(|j| de[i].min(dce[j])))
    }

    pub fn infer(&self, e: f64, ce: f64) -> Result<ScheduledGains, FuzzyError> {
        let fire = self.firing_strengths(e, ce);
        let mut out = [0.0; 3];
        for (k, channel) in self.outputs.iter().enumerate() {
            let mut strength = [0.0f64; 5];
            for (i, row) in fire.iter().enumerate() {
                for (j, &w) in row.iter().enumerate() {
                    if w > 0.0 {
                        let l = channel.table.0[i][j].index();
                        strength[l] = strength[l].max(w);
                    }
                }
            }
            out[k] = channel.defuzzify(&strength)?;
        }
        Ok(ScheduledGains {
            kp: out[0],
            ki: out[1],
            kd: out[2],
        })
    }
}

/// One fuzzy-scheduled PID update. Change of error is a backward difference,
/// zero on the first call of a fresh state.
pub fn fuzzy_pid_step(
    scheduler: &FuzzyScheduler,
    state: PidState,
    error: f64,
    dt: f64,
    u_min: f64,
    u_max: f64,
) -> Result<(f64, PidState, ScheduledGains), FuzzyError> {
    let ce = if state.initialized {
        (error - state.previous_error) / dt
    } else {
        0.0
    };
    let gains = scheduler.infer(error, ce)?;
    let (u, next) = pid_step(state, error, dt, &gains.into(), u_min, u_max);
    Ok((u, next, gains))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scheduler() -> FuzzyScheduler {
        FuzzyScheduler::standard(&PidGains::reference(), 5.0, 1.0).unwrap()
    }

    #[test]
    fn triangle_examples() {
        let mf = TriangularMf::new(-1.0, 0.0, 1.0);
        assert_eq!(membership(&mf, 0.0), 1.0);
        assert_eq!(membership(&mf, 0.5), 0.5);
        assert_eq!(membership(&mf, 2.0), 0.0);
        assert_eq!(membership(&mf, -1.0), 0.0);
        let shoulder = TriangularMf::new(0.5, 1.0, 1.0);
        assert_eq!(shoulder.membership(1.0), 1.0);
        assert_eq!(shoulder.membership(0.75), 0.5);
        assert_eq!(shoulder.membership(1.1), 0.0);
    }

    #[test]
    fn fuzzify_examples() {
        let e = LinguisticVariable::evenly_spaced("E", (-1.0, 1.0), INPUT_LABELS).unwrap();
        let at = |x: f64| fuzzify(&e, x).into_iter().map(|(_, d)| d).collect::<Vec<_>>();
        assert_eq!(at(0.0), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(at(0.25), vec![0.0, 0.0, 0.5, 0.5, 0.0]);
        assert_eq!(at(7.0), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(fuzzify(&e, -7.0)[0], ("NB".to_string(), 1.0));
    }

    #[test]
    fn invalid_variables_are_rejected() {
        let tri = TriangularMf::new;
        // gap between NS and Z
        let gap = [
            tri(-1.0, -1.0, -0.5),
            tri(-1.0, -0.5, -0.2),
            tri(-0.1, 0.0, 0.5),
            tri(0.0, 0.5, 1.0),
            tri(0.5, 1.0, 1.0),
        ];
        assert!(LinguisticVariable::new("E", (-1.0, 1.0), INPUT_LABELS, gap).is_err());
        // peaks out of order
        let order = [
            tri(-1.0, -1.0, 0.0),
            tri(-1.0, 0.0, 0.5),
            tri(-0.5, -0.2, 0.5),
            tri(0.0, 0.5, 1.0),
            tri(0.5, 1.0, 1.0),
        ];
        assert!(LinguisticVariable::new("E", (-1.0, 1.0), INPUT_LABELS, order).is_err());
        // left > peak
        let bad = [
            tri(-0.5, -1.0, -0.5),
            tri(-1.0, -0.5, 0.0),
            tri(-0.5, 0.0, 0.5),
            tri(0.0, 0.5, 1.0),
            tri(0.5, 1.0, 1.0),
        ];
        assert!(LinguisticVariable::new("E", (-1.0, 1.0), INPUT_LABELS, bad).is_err());
        // upper end uncovered
        let short = [
            tri(-1.0, -1.0, -0.5),
            tri(-1.0, -0.5, 0.0),
            tri(-0.5, 0.0, 0.5),
            tri(0.0, 0.5, 0.8),
            tri(0.5, 0.8, 0.9),
        ];
        assert!(LinguisticVariable::new("E", (-1.0, 1.0), INPUT_LABELS, short).is_err());
    }

    #[test]
    fn scheduler_rejects_bad_configuration() {
        let s = scheduler();
        let outs = s.output_vars().map(|v| v.clone());
        let build = |e_scale: f64, res: usize| {
            FuzzyScheduler::new(
                s.e_var.clone(),
                s.ce_var.clone(),
                outs.clone(),
                s.tables(),
                e_scale,
                1.0,
                res,
            )
        };
        assert!(matches!(
            build(0.0, 1001),
            Err(FuzzyError::InvalidScale { key: "e_scale", .. })
        ));
        assert!(matches!(build(1.0, 100), Err(FuzzyError::ResolutionTooLow(100))));
        assert!(build(1.0, 101).is_ok());
    }

    #[test]
    fn rule_table_cells() {
        use InputLabel::*;
        use OutputLabel::*;
        let t = RuleTable::standard();
        assert_eq!(t.get(NB, NB), S);
        assert_eq!(t.get(PB, PB), B);
        assert_eq!(t.0[2], [S, MS, M, MB, B]);
        assert_eq!(t.get(NB, PB), M);
        assert_eq!(t.get(PB, NB), M);
        let round = RuleTable::from_labels(&t.to_labels()).unwrap();
        assert_eq!(round, t);
        assert!(RuleTable::from_labels(&vec![vec!["S".into(); 5]; 4]).is_err());
        let mut bad = t.to_labels();
        bad[0][0] = "XL".into();
        assert_eq!(RuleTable::from_labels(&bad), Err(FuzzyError::UnknownLabel("XL".into())));
    }

    #[test]
    fn centered_inputs_give_universe_midpoints() {
        let s = scheduler();
        let g = s.infer(0.0, 0.0).unwrap();
        let mids = s.output_vars().map(|v| v.midpoint());
        assert_relative_eq!(g.kp, mids[0], epsilon = 1e-9 * mids[0]);
        assert_relative_eq!(g.ki, mids[1], epsilon = 1e-9 * mids[1]);
        assert_relative_eq!(g.kd, mids[2], epsilon = 1e-9 * mids[2]);
    }

    #[test]
    fn top_corner_gives_big_gains() {
        let s = scheduler();
        // PB peaks: e = 1/e_scale, ce = 1/ce_scale
        let g = s.infer(1.0 / s.e_scale, 1.0 / s.ce_scale).unwrap();
        let r = PidGains::reference();
        // centroid of the B shoulder (1.5g, 2g, 2g) is 11/6 g
        assert_relative_eq!(g.kp, 11.0 / 6.0 * r.kp, max_relative = 2e-3);
        assert!(g.ki > 1.8 * r.ki && g.kd > 1.8 * r.kd);
    }

    #[test]
    fn at_most_four_rules_fire() {
        let s = scheduler();
        for i in -20..=20 {
            for j in -20..=20 {
                let fire = s.firing_strengths(i as f64 * 0.137, j as f64 * 0.291);
                let n = fire.iter().flatten().filter(|w| **w > 0.0).count();
                assert!((1..=4).contains(&n), "{n} rules fired");
            }
        }
    }

    #[test]
    fn fuzzy_pid_zero_error_is_quiet() {
        let s = scheduler();
        let mut st = PidState::default();
        for _ in 0..50 {
            let (u, next, _) = fuzzy_pid_step(&s, st, 0.0, 0.01, 0.0, 300.0).unwrap();
            assert_eq!(u, 0.0);
            st = next;
        }
    }

    #[test]
    fn fuzzy_pid_constant_error_ramps_integral() {
        let s = scheduler();
        let (e, dt) = (0.05, 0.01);
        let (_, mut st, g0) = fuzzy_pid_step(&s, PidState::default(), e, dt, 0.0, 300.0).unwrap();
        let mut outputs = Vec::new();
        for _ in 0..20 {
            let (u, next, g) = fuzzy_pid_step(&s, st, e, dt, 0.0, 300.0).unwrap();
            assert_eq!(g, g0);
            outputs.push(u);
            st = next;
        }
        let inc: Vec<f64> = outputs.windows(2).map(|w| w[1] - w[0]).collect();
        for d in &inc {
            assert_relative_eq!(*d, g0.ki * e * dt, max_relative = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn outputs_stay_in_universe(e in -20.0..20.0f64, ce in -50.0..50.0f64) {
            let s = scheduler();
            let g = s.infer(e, ce).unwrap();
            for (v, var) in [g.kp, g.ki, g.kd].into_iter().zip(s.output_vars()) {
                prop_assert!(v >= var.universe.0 && v <= var.universe.1);
            }
        }

        #[test]
        fn scale_invariance(e in -10.0..10.0f64, ce in -10.0..10.0f64) {
            let s = scheduler();
            let mut doubled = s.clone();
            doubled.e_scale *= 2.0;
            prop_assert_eq!(s.infer(e, ce).unwrap(), doubled.infer(e / 2.0, ce).unwrap());
        }

        #[test]
        fn single_symmetric_triangle_centroid_is_peak(peak in 0.3..0.7f64, width in 0.05..0.25f64) {
            let lo_hi = (0.0, 1.0);
            let mf = TriangularMf::new(peak - width, peak, peak + width);
            let var = LinguisticVariable::new("X", lo_hi, OUTPUT_LABELS, [
                TriangularMf::new(0.0, 0.0, peak - width + 1e-3),
                TriangularMf::new(0.0, peak - width, peak),
                mf,
                TriangularMf::new(peak, peak + width, 1.0),
                TriangularMf::new(peak + width - 1e-3, 1.0, 1.0),
            ]).unwrap();
            let ch = OutputChannel::new(var, RuleTable::standard(), DEFAULT_RESOLUTION);
            let c = ch.defuzzify(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
            prop_assert!((c - peak).abs() <= 1.0 / DEFAULT_RESOLUTION as f64);
        }
    }
}
