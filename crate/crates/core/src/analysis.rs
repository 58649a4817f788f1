//! Step-response metrics and side-by-side controller comparison.
//!
//! Conventions: the pre-step level is the last sample strictly before the
//! step (or the first sample when the step is at the start); crossings are
//! located by linear interpolation between samples; the final value is the
//! mean of the last 5% of samples. Metrics that never occur are `None`.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::sim::{Scenario, Trace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no setpoint step found in the trace")]
    NoStepFound,
    #[error("response never settles within the band (last exit at t = {last_exit} s)")]
    Unsettled { last_exit: f64 },
    #[error("nothing to compare: the trace list is empty")]
    EmptyComparison,
}

pub const DEFAULT_SETTLE_BAND_PCT: f64 = 2.0;
/// Fraction of the trace averaged for the final value.
pub const TAIL_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepMetrics {
    pub overshoot_pct: f64,
    pub rise_time: Option<f64>,
    pub settling_time: Option<f64>,
    pub steady_state_error: f64,
    pub final_value: f64,
}

fn tail_mean(y: &[f64]) -> f64 {
    let n = ((y.len() as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, y.len());
    y[y.len() - n..].iter().sum::<f64>() / n as f64
}

/// Time at which the linearly interpolated signal between samples `k-1` and
/// `k` reaches `level`.
fn interpolate(t: &[f64], y: &[f64], k: usize, level: f64) -> f64 {
    if k == 0 || y[k] == y[k - 1] {
        return t[k];
    }
    let frac = ((level - y[k - 1]) / (y[k] - y[k - 1])).clamp(0.0, 1.0);
    t[k - 1] + frac * (t[k] - t[k - 1])
}

/// First setpoint change in a trace: `(time, target)`. A trace whose first
/// setpoint differs from its first level counts as a step at the start.
pub fn detect_step(trace: &Trace) -> Option<(f64, f64)> {
    let first = trace.rows.first()?;
    if let Some(w) = trace.rows.windows(2).find(|w| w[1].setpoint != w[0].setpoint) {
        if first.setpoint == first.h2 || w[0].setpoint == first.h2 {
            return Some((w[1].t, w[1].setpoint));
        }
    }
    (first.setpoint != first.h2).then_some((first.t, first.setpoint))
}

pub fn step_metrics(
    trace: &Trace,
    step_time: f64,
    step_target: f64,
    settle_band_pct: f64,
) -> Result<StepMetrics, AnalysisError> {
    let t = trace.times();
    let y = trace.h2();
    let eps = 1e-9 * step_time.abs().max(1.0);
    let start = t
        .iter()
        .position(|&ti| ti >= step_time - eps)
        .ok_or(AnalysisError::NoStepFound)?;
    let y0 = if start > 0 { y[start - 1] } else { y[0] };
    let amplitude = step_target - y0;
    if amplitude == 0.0 || !amplitude.is_finite() {
        return Err(AnalysisError::NoStepFound);
    }
    let dir = amplitude.signum();
    let span = amplitude.abs();
    // progress along the step direction, 0 at y0 and 1 at the target
    let progress: Vec<f64> = y.iter().map(|v| (v - y0) * dir / span).collect();
    let post = &progress[start..];

    let peak = post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overshoot_pct = ((peak - 1.0) * 100.0).max(0.0);

    let crossing = |level: f64| {
        post.iter()
            .position(|&p| p >= level)
            .map(|i| interpolate(&t, &progress, start + i, level))
    };
    let rise_time = match (crossing(0.1), crossing(0.9)) {
        (Some(t10), Some(t90)) => Some(t90 - t10),
        _ => None,
    };

    let final_value = tail_mean(&y[start..]);
    let steady_state_error = (step_target - final_value).abs();

    let band = settle_band_pct / 100.0 * span;
    let dev: Vec<f64> = y.iter().map(|v| (v - final_value).abs()).collect();
    let settling_time = match dev[start..].iter().rposition(|&d| d > band) {
        None => Some(0.0),
        Some(i) if start + i + 1 == y.len() => {
            return Err(AnalysisError::Unsettled {
                last_exit: t[start + i],
            });
        }
        Some(i) => {
            let k = start + i + 1;
            Some(interpolate(&t, &dev, k, band) - step_time)
        }
    };

    Ok(StepMetrics {
        overshoot_pct,
        rise_time,
        settling_time,
        steady_state_error,
        final_value,
    })
}

/// Load-rejection figures after a disturbance enters at `disturbance_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisturbanceMetrics {
    /// Largest |h2 − setpoint| after the disturbance.
    pub max_deviation: f64,
    /// Time after the disturbance from which h2 stays within the band of the
    /// setpoint; `None` if it never returns.
    pub recovery_time: Option<f64>,
    /// |setpoint − tail mean| at the end of the run.
    pub steady_state_error: f64,
}

pub fn disturbance_metrics(
    trace: &Trace,
    disturbance_time: f64,
    target: f64,
    band: f64,
) -> Result<DisturbanceMetrics, AnalysisError> {
    let t = trace.times();
    let y = trace.h2();
    let eps = 1e-9 * disturbance_time.abs().max(1.0);
    let start = t
        .iter()
        .position(|&ti| ti >= disturbance_time - eps)
        .ok_or(AnalysisError::NoStepFound)?;
    let dev: Vec<f64> = y.iter().map(|v| (v - target).abs()).collect();
    let max_deviation = dev[start..].iter().copied().fold(0.0, f64::max);
    let recovery_time = match dev[start..].iter().rposition(|&d| d > band) {
        None => Some(0.0),
        Some(i) if start + i + 1 == y.len() => None,
        Some(i) => Some(interpolate(&t, &dev, start + i + 1, band) - disturbance_time),
    };
    Ok(DisturbanceMetrics {
        max_deviation,
        recovery_time,
        steady_state_error: (target - tail_mean(&y[start..])).abs(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerRow {
    pub name: String,
    /// `Err` marks a degraded row; the report still renders.
    pub step: Result<StepMetrics, AnalysisError>,
    pub disturbance: Option<Result<DisturbanceMetrics, AnalysisError>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub metric: &'static str,
    /// Name of the best controller, `"tie"`, or `"n/a"` when nobody has a value.
    pub winner: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub title: String,
    pub step_amplitude: f64,
    pub settle_band_pct: f64,
    pub rows: Vec<ControllerRow>,
    pub verdicts: Vec<Verdict>,
    pub observations: Vec<String>,
}

type Extract = fn(&ControllerRow) -> Option<f64>;

const METRICS: [(&str, Extract); 7] = [
    ("overshoot_pct", |r| r.step.as_ref().ok().map(|m| m.overshoot_pct)),
    ("rise_time", |r| r.step.as_ref().ok().and_then(|m| m.rise_time)),
    ("settling_time", |r| r.step.as_ref().ok().and_then(|m| m.settling_time)),
    ("steady_state_error", |r| {
        r.step.as_ref().ok().map(|m| m.steady_state_error)
    }),
    ("disturbance_max_deviation", |r| {
        disturbance_of(r).map(|d| d.max_deviation)
    }),
    ("disturbance_recovery_time", |r| {
        disturbance_of(r).and_then(|d| d.recovery_time)
    }),
    ("disturbance_sse", |r| disturbance_of(r).map(|d| d.steady_state_error)),
];

fn disturbance_of(row: &ControllerRow) -> Option<&DisturbanceMetrics> {
    row.disturbance.as_ref().and_then(|d| d.as_ref().ok())
}

/// Lower is better for every metric. Missing values lose to present ones.
fn verdict(rows: &[ControllerRow], extract: Extract) -> String {
    let values: Vec<(&str, f64)> = rows
        .iter()
        .filter_map(|r| extract(r).map(|v| (r.name.as_str(), v)))
        .collect();
    let Some(best) = values.iter().map(|(_, v)| *v).reduce(f64::min) else {
        return "n/a".into();
    };
    let tol = 1e-12 * best.abs().max(1e-12);
    let winners: Vec<&str> = values
        .iter()
        .filter(|(_, v)| v - best <= tol)
        .map(|(n, _)| *n)
        .collect();
    match winners.as_slice() {
        [one] => one.to_string(),
        _ => "tie".into(),
    }
}

/// Post-disturbance error below this fraction of the step amplitude counts as
/// returning to the setpoint.
pub const RECOVERY_FRACTION: f64 = 0.01;

/// Builds a report for traces produced from `scenario`. Step metrics use the
/// part of each trace before the first disturbance; disturbance metrics are
/// added when the scenario has one.
pub fn compare(
    traces: &[(String, Trace)],
    scenario: &Scenario,
    settle_band_pct: f64,
) -> Result<ComparisonReport, AnalysisError> {
    if traces.is_empty() {
        return Err(AnalysisError::EmptyComparison);
    }
    let amplitude = scenario.step_amplitude();
    let disturbance = scenario
        .disturbance_schedule
        .iter()
        .find(|(_, q)| *q != 0.0)
        .map(|(t, _)| *t);
    let step = scenario.primary_step();

    let rows: Vec<ControllerRow> = traces
        .iter()
        .map(|(name, trace)| {
            let step_part = match disturbance {
                Some(td) => Trace {
                    rows: trace.rows.iter().copied().take_while(|r| r.t < td - 1e-9).collect(),
                },
                None => trace.clone(),
            };
            let step_metrics = step
                .ok_or(AnalysisError::NoStepFound)
                .and_then(|(ts, target)| step_metrics(&step_part, ts, target, settle_band_pct));
            let disturbance = disturbance.map(|td| {
                let target = trace
                    .rows
                    .iter()
                    .find(|r| r.t >= td - 1e-9)
                    .map_or(scenario.initial_state.h2, |r| r.setpoint);
                disturbance_metrics(trace, td, target, settle_band_pct / 100.0 * amplitude)
            });
            ControllerRow {
                name: name.clone(),
                step: step_metrics,
                disturbance,
            }
        })
        .collect();

    let verdicts = METRICS
        .iter()
        .filter(|(name, _)| disturbance.is_some() || !name.starts_with("disturbance"))
        .map(|&(metric, extract)| Verdict {
            metric,
            winner: verdict(&rows, extract),
        })
        .collect();

    let mut observations = Vec::new();
    for row in &rows {
        if let Err(e) = &row.step {
            observations.push(format!("{}: step metrics degraded ({e})", row.name));
        }
        match &row.disturbance {
            Some(Ok(d)) => {
                let recovered = d.steady_state_error < RECOVERY_FRACTION * amplitude;
                observations.push(format!(
                    "{}: {} after the disturbance (residual error {:.3e} cm, {:.4}% of step)",
                    row.name,
                    if recovered {
                        "returned to the setpoint"
                    } else {
                        "did not return to the setpoint"
                    },
                    d.steady_state_error,
                    d.steady_state_error / amplitude * 100.0
                ));
            }
            Some(Err(e)) => observations.push(format!("{}: disturbance metrics degraded ({e})", row.name)),
            None => {}
        }
    }

    let title = match disturbance {
        Some(td) => format!("disturbance rejection (disturbance at t = {td} s)"),
        None => "setpoint step".to_string(),
    };
    Ok(ComparisonReport {
        title,
        step_amplitude: amplitude,
        settle_band_pct,
        rows,
        verdicts,
        observations,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn csv_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl ComparisonReport {
    fn has_disturbance(&self) -> bool {
        self.rows.iter().any(|r| r.disturbance.is_some())
    }

    fn values(&self, row: &ControllerRow, with_disturbance: bool) -> Vec<Option<f64>> {
        let final_value = row.step.as_ref().ok().map(|m| m.final_value);
        let mut v: Vec<Option<f64>> = METRICS[..4].iter().map(|(_, f)| f(row)).collect();
        v.push(final_value);
        if with_disturbance {
            v.extend(METRICS[4..].iter().map(|(_, f)| f(row)));
        }
        v
    }

    fn columns(with_disturbance: bool) -> Vec<&'static str> {
        let mut c = vec!["overshoot_pct", "rise_time_s", "settling_time_s", "sse_cm", "final_cm"];
        if with_disturbance {
            c.extend(["dist_max_dev_cm", "dist_recovery_s", "dist_sse_cm"]);
        }
        c
    }

    /// Aligned plain-text table followed by verdicts and observations.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.title);
        let _ = writeln!(
            out,
            "step amplitude {} cm, settling band {}%",
            self.step_amplitude, self.settle_band_pct
        );
        let columns = Self::columns(self.has_disturbance());
        let name_w = self.rows.iter().map(|r| r.name.len()).chain([10]).max().unwrap_or(10);
        let _ = write!(out, "{:<name_w$}", "controller");
        for c in &columns {
            let _ = write!(out, " {c:>16}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<name_w$}", row.name);
            for v in self.values(row, self.has_disturbance()) {
                let _ = write!(out, " {:>16}", cell(v));
            }
            if row.step.is_err() || matches!(row.disturbance, Some(Err(_))) {
                out.push_str("  (degraded)");
            }
            out.push('\n');
        }
        out.push_str("verdicts (lower is better):\n");
        for v in &self.verdicts {
            let _ = writeln!(out, "  {:<26} {}", v.metric, v.winner);
        }
        if !self.observations.is_empty() {
            out.push_str("observations:\n");
            for o in &self.observations {
                let _ = writeln!(out, "  {o}");
            }
        }
        out
    }

    pub const CSV_HEADER: &'static str = "scenario,controller,overshoot_pct,rise_time_s,settling_time_s,sse_cm,final_cm,dist_max_dev_cm,dist_recovery_s,dist_sse_cm,status";

    /// One row per controller under [`Self::CSV_HEADER`]; absent metrics are
    /// empty fields, so reports of different scenarios can be concatenated.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        out.push_str(&self.csv_rows());
        out
    }

    /// [`Self::to_csv`] without the header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let values: Vec<String> = self.values(row, true).into_iter().map(csv_cell).collect();
            let status = match (&row.step, &row.disturbance) {
                (Err(e), _) | (_, Some(Err(e))) => format!("degraded: {e}"),
                _ => "ok".into(),
            };
            let _ = writeln!(
                out,
                "{},{},{},\"{}\"",
                if self.has_disturbance() { "disturbance" } else { "step" },
                row.name,
                values.join(","),
                status.replace('"', "'")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TraceRow;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn trace_from(t: &[f64], y: &[f64], sp: &[f64]) -> Trace {
        Trace {
            rows: t
                .iter()
                .zip(y)
                .zip(sp)
                .map(|((&t, &h2), &setpoint)| TraceRow {
                    t,
                    setpoint,
                    h1: 0.0,
                    h2,
                    q_commanded: 0.0,
                    q_actuator: 0.0,
                    error: setpoint - h2,
                    kp: 0.0,
                    ki: 0.0,
                    kd: 0.0,
                })
                .collect(),
        }
    }

    fn sampled(dt: f64, duration: f64, f: impl Fn(f64) -> f64) -> Trace {
        let n = (duration / dt).round() as usize + 1;
        let t: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let y: Vec<f64> = t.iter().map(|&t| f(t)).collect();
        trace_from(&t, &y, &vec![1.0; n])
    }

    fn second_order(zeta: f64, wn: f64) -> impl Fn(f64) -> f64 {
        move |t| {
            let wd = wn * (1.0 - zeta * zeta).sqrt();
            let phi = (1.0 - zeta * zeta).sqrt().atan2(zeta);
            1.0 - (-zeta * wn * t).exp() / (1.0 - zeta * zeta).sqrt() * (wd * t + phi).sin()
        }
    }

    #[test]
    fn ideal_step() {
        let t: Vec<f64> = (0..11).map(|k| k as f64).collect();
        let y: Vec<f64> = t.iter().map(|&t| if t >= 5.0 { 1.0 } else { 0.0 }).collect();
        let sp = y.clone();
        let m = step_metrics(&trace_from(&t, &y, &sp), 5.0, 1.0, 2.0).unwrap();
        assert_eq!(m.overshoot_pct, 0.0);
        assert_eq!(m.steady_state_error, 0.0);
        let rise = m.rise_time.unwrap();
        assert!(rise > 0.0 && rise <= 1.0, "{rise}");
        assert_eq!(m.settling_time, Some(0.0));
    }

    #[test]
    fn second_order_overshoot_matches_closed_form() {
        let zeta: f64 = 0.4566;
        let oracle = (-std::f64::consts::PI * zeta / (1.0 - zeta * zeta).sqrt()).exp() * 100.0;
        // ζ = 0.4566 is the rounded damping for 20% overshoot
        assert!((oracle - 20.0).abs() < 0.1);
        let m = step_metrics(&sampled(0.001, 40.0, second_order(zeta, 1.0)), 0.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(m.overshoot_pct, oracle, max_relative = 1e-4);
    }

    #[test]
    fn second_order_settling_bracketed_by_envelope() {
        // envelope bound: the response is inside 2% once e^{-ζωt}/√(1−ζ²) < 0.02
        let zeta: f64 = 0.3;
        let m = step_metrics(&sampled(0.001, 60.0, second_order(zeta, 1.0)), 0.0, 1.0, 2.0).unwrap();
        let envelope = -(0.02 * (1.0 - zeta * zeta).sqrt()).ln() / zeta;
        let ts = m.settling_time.unwrap();
        assert!(ts <= envelope && ts > 0.7 * envelope, "{ts} vs {envelope}");
    }

    #[test]
    fn first_order_rise_time() {
        let tau = 5.0;
        let oracle = tau * ((1.0f64 / 0.1).ln() - (1.0f64 / 0.9).ln());
        assert_relative_eq!(oracle, 10.986, epsilon = 1e-3);
        let m = step_metrics(&sampled(0.001, 100.0, |t| 1.0 - (-t / tau).exp()), 0.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(m.rise_time.unwrap(), oracle, epsilon = 1e-5);
        assert_eq!(m.overshoot_pct, 0.0);
        // 2% settling of a first-order lag: τ·ln(50)
        assert_relative_eq!(m.settling_time.unwrap(), tau * 50f64.ln(), epsilon = 1e-2);
    }

    #[test]
    fn unreached_rise_is_absent() {
        let m = step_metrics(&sampled(0.01, 10.0, |t| 0.5 * (1.0 - (-t).exp())), 0.0, 1.0, 2.0).unwrap();
        assert_eq!(m.rise_time, None);
        assert_relative_eq!(m.steady_state_error, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn errors() {
        let trace = sampled(0.1, 10.0, |_| 1.0);
        assert_eq!(step_metrics(&trace, 0.0, 1.0, 2.0), Err(AnalysisError::NoStepFound));
        assert_eq!(step_metrics(&trace, 50.0, 2.0, 2.0), Err(AnalysisError::NoStepFound));
        assert_eq!(
            step_metrics(&Trace::default(), 0.0, 1.0, 2.0),
            Err(AnalysisError::NoStepFound)
        );
        let ringing = sampled(0.1, 10.0, |t| {
            1.0 + (if (t * 10.0).round() as i64 % 2 == 0 { 0.5 } else { -0.5 })
        });
        assert!(matches!(
            step_metrics(&ringing, 0.0, 5.0, 2.0),
            Err(AnalysisError::Unsettled { .. })
        ));
    }

    #[test]
    fn downward_steps_mirror_upward_ones() {
        let up = step_metrics(&sampled(0.01, 40.0, second_order(0.5, 1.0)), 0.0, 1.0, 2.0).unwrap();
        let down_trace = sampled(0.01, 40.0, |t| 10.0 - second_order(0.5, 1.0)(t));
        let down = step_metrics(&down_trace, 0.0, 9.0, 2.0).unwrap();
        assert_relative_eq!(up.overshoot_pct, down.overshoot_pct, epsilon = 1e-9);
        assert_relative_eq!(up.rise_time.unwrap(), down.rise_time.unwrap(), epsilon = 1e-9);
        assert_relative_eq!(up.settling_time.unwrap(), down.settling_time.unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn step_detection() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let trace = trace_from(&t, &[2.0, 2.0, 2.0, 3.0], &[2.0, 2.0, 4.0, 4.0]);
        assert_eq!(detect_step(&trace), Some((2.0, 4.0)));
        let trace = trace_from(&t, &[0.0, 1.0, 2.0, 3.0], &[5.0; 4]);
        assert_eq!(detect_step(&trace), Some((0.0, 5.0)));
        let trace = trace_from(&t, &[5.0; 4], &[5.0; 4]);
        assert_eq!(detect_step(&trace), None);
    }

    fn scenario() -> Scenario {
        Scenario {
            duration: 40.0,
            dt: 0.01,
            ..Scenario::default()
        }
    }

    #[test]
    fn identical_traces_tie() {
        let trace = sampled(0.01, 40.0, |t| 5.0 * second_order(0.5, 1.0)(t));
        let report = compare(&[("a".into(), trace.clone()), ("b".into(), trace)], &scenario(), 2.0).unwrap();
        assert_eq!(report.rows[0].step, report.rows[1].step);
        assert!(report.verdicts.iter().all(|v| v.winner == "tie"));
        assert_eq!(report.verdicts.len(), 4);
    }

    #[test]
    fn verdict_names_the_better_controller() {
        let slow = sampled(0.01, 40.0, |t| 5.0 * second_order(0.3, 1.0)(t));
        let fast = sampled(0.01, 40.0, |t| 5.0 * second_order(0.7, 1.0)(t));
        let report = compare(&[("slow".into(), slow), ("fast".into(), fast)], &scenario(), 2.0).unwrap();
        let winner = |m| report.verdicts.iter().find(|v| v.metric == m).unwrap().winner.clone();
        assert_eq!(winner("overshoot_pct"), "fast");
        assert_eq!(winner("settling_time"), "fast");
        assert_eq!(winner("rise_time"), "slow");
    }

    #[test]
    fn degraded_rows_still_render() {
        let good = sampled(0.01, 40.0, |t| 5.0 * second_order(0.5, 1.0)(t));
        let ringing = sampled(
            0.01,
            40.0,
            |t| if (t * 100.0).round() as i64 % 2 == 0 { 2.0 } else { -2.0 },
        );
        let report = compare(&[("good".into(), good), ("ringing".into(), ringing)], &scenario(), 2.0).unwrap();
        assert!(matches!(report.rows[1].step, Err(AnalysisError::Unsettled { .. })));
        let winner = |m| report.verdicts.iter().find(|v| v.metric == m).unwrap().winner.clone();
        assert_eq!(winner("settling_time"), "good");
        let text = report.to_text();
        assert!(text.contains("(degraded)"));
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn empty_comparison_is_an_error() {
        assert_eq!(compare(&[], &scenario(), 2.0), Err(AnalysisError::EmptyComparison));
    }

    #[test]
    fn disturbance_metrics_on_synthetic_dip() {
        // setpoint 5, dip of depth 1 at t = 10 decaying with τ = 2
        let trace = sampled(
            0.01,
            60.0,
            |t| if t < 10.0 { 5.0 } else { 5.0 - (-(t - 10.0) / 2.0).exp() },
        );
        let d = disturbance_metrics(&trace, 10.0, 5.0, 0.1).unwrap();
        assert_relative_eq!(d.max_deviation, 1.0);
        assert_relative_eq!(d.recovery_time.unwrap(), 2.0 * 10f64.ln(), epsilon = 1e-3);
        assert!(d.steady_state_error < 1e-6);
    }

    proptest! {
        #[test]
        fn time_shift_invariance(shift in 0.0..20.0f64, zeta in 0.2..0.9f64) {
            let dt = 0.01;
            let shift = (shift / dt).round() * dt;
            let f = second_order(zeta, 1.0);
            let base = sampled(dt, 40.0, &f);
            let shifted = sampled(dt, 40.0 + shift, |t| if t < shift { 0.0 } else { f(t - shift) });
            let a = step_metrics(&base, 0.0, 1.0, 2.0).unwrap();
            let b = step_metrics(&shifted, shift, 1.0, 2.0).unwrap();
            prop_assert!((a.overshoot_pct - b.overshoot_pct).abs() < 1e-6);
            prop_assert!((a.rise_time.unwrap() - b.rise_time.unwrap()).abs() < 1e-6);
            prop_assert!((a.settling_time.unwrap() - b.settling_time.unwrap()).abs() < 1e-6);
        }

        #[test]
        fn level_translation_invariance(offset in -50.0..50.0f64, zeta in 0.2..0.9f64) {
            let f = second_order(zeta, 1.0);
            let a = step_metrics(&sampled(0.01, 40.0, &f), 0.0, 1.0, 2.0).unwrap();
            let b = step_metrics(&sampled(0.01, 40.0, |t| f(t) + offset), 0.0, 1.0 + offset, 2.0).unwrap();
            prop_assert!((a.overshoot_pct - b.overshoot_pct).abs() < 1e-6);
            prop_assert!((a.steady_state_error - b.steady_state_error).abs() < 1e-9);
        }

        #[test]
        fn monotone_responses_never_overshoot(tau in 0.1..10.0f64, gain in 0.1..1.0f64) {
            let m = step_metrics(&sampled(0.01, 80.0, |t| gain * (1.0 - (-t / tau).exp())), 0.0, 1.0, 2.0).unwrap();
            prop_assert_eq!(m.overshoot_pct, 0.0);
        }

        #[test]
        fn rise_never_exceeds_settling(zeta in 0.1..1.5f64, wn in 0.3..3.0f64) {
            let f = move |t: f64| if zeta < 1.0 { second_order(zeta, wn)(t) } else { 1.0 - (1.0 + wn * t) * (-wn * t).exp() };
            let m = step_metrics(&sampled(0.01, 200.0, f), 0.0, 1.0, 2.0).unwrap();
            prop_assert!(m.overshoot_pct >= 0.0);
            prop_assert!(m.rise_time.unwrap() <= m.settling_time.unwrap());
        }
    }
}
