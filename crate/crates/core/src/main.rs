use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand};

use tanklab::analysis::{compare, detect_step, step_metrics, AnalysisError, ComparisonReport};
use tanklab::config::{Config, ConfigError, PlantChoice};
use tanklab::pid::{find_ultimate_gain, find_ultimate_gain_for, zn_from_ultimate, PidError, PidGains, UltimateSearch};
use tanklab::sim::{run_scenario, ControllerKind, PlantModel, Scenario, SimError, Trace, TraceError};
use tanklab::FuzzyScheduler;

/// Coupled-tank level control: simulation, Ziegler-Nichols tuning and
/// PID versus fuzzy-scheduled PID comparison.
#[derive(Parser)]
#[command(name = "tanklab", version)]
struct Cli {
    /// TOML configuration file; omitted sections use the reference setup.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Require every consumed config section to be present.
    #[arg(long, global = true)]
    strict: bool,
    /// Output file (trace CSV for `simulate`, report for `compare` and `metrics`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Integration and control step (s).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Simulated time (s).
    #[arg(long, global = true)]
    duration: Option<f64>,
    /// Settling band as a percentage of the step amplitude.
    #[arg(long, global = true)]
    settle_band: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace as CSV.
    Simulate {
        /// `nonlinear` or `linear`.
        #[arg(long)]
        plant: Option<PlantChoice>,
        /// `none`, `pid` or `fuzzy-pid`.
        #[arg(long)]
        controller: Option<ControllerKind>,
    },
    /// Find the ultimate gain and period and print Ziegler-Nichols gains.
    TuneZn {
        #[arg(long)]
        ku: Option<f64>,
        #[arg(long)]
        tu: Option<f64>,
    },
    /// Step and disturbance experiments under PID and fuzzy-scheduled PID.
    Compare,
    /// Step-response metrics of a trace CSV.
    Metrics {
        trace: PathBuf,
        /// Step instant (s); detected from the setpoint column by default.
        #[arg(long)]
        step_time: Option<f64>,
        /// Step target (cm); detected from the setpoint column by default.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Print the reference configuration as TOML.
    PrintConfig,
}

enum Failure {
    Config(String),
    NonFinite(String),
    NoUltimateGain(String),
    Other(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Other(_) => 1,
            Self::Config(_) => 2,
            Self::NonFinite(_) => 3,
            Self::NoUltimateGain(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::NonFinite(m) | Self::NoUltimateGain(m) | Self::Other(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::NonFiniteState { .. } => Self::NonFinite(e.to_string()),
            other => Self::Config(ConfigError::from(other).to_string()),
        }
    }
}

impl From<PidError> for Failure {
    fn from(e: PidError) -> Self {
        match e {
            PidError::NoUltimateGain { .. } => Self::NoUltimateGain(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Self::Other(e.to_string())
    }
}

impl From<TraceError> for Failure {
    fn from(e: TraceError) -> Self {
        Self::Other(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Other(format!("{}: {e}", path.display()))
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if cli.strict && !config.strict {
        config.strict = true;
        if config.schema_version.is_none() {
            return Err(ConfigError::Invalid {
                key: "schema_version".into(),
                reason: "required in strict mode".into(),
            }
            .into());
        }
    }
    if let Some(dt) = cli.dt {
        config.scenario_mut().dt = dt;
    }
    if let Some(duration) = cli.duration {
        config.scenario_mut().duration = duration;
    }
    if let Some(band) = cli.settle_band {
        config.analysis_mut().settle_band_pct = band;
    }
    if let Some(out) = &cli.out {
        config.output_mut().path = Some(out.display().to_string());
    }
    Ok(config)
}

fn output_path(config: &Config, default: &str) -> PathBuf {
    PathBuf::from(config.output_path().unwrap_or_else(|| default.to_string()))
}

fn write_trace(trace: &Trace, path: &Path) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    trace.write_csv(BufWriter::new(file)).map_err(|e| io_failure(path, e))
}

fn write_text(text: &str, path: &Path) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn simulate(config: Config, plant: Option<PlantChoice>, controller: Option<ControllerKind>) -> Result<(), Failure> {
    let mut config = config;
    if let Some(p) = plant {
        config.scenario_mut().plant = p;
    }
    if let Some(c) = controller {
        config.scenario_mut().controller = c;
    }
    let params = config.plant_params()?;
    let scenario = config.scenario()?;
    let (gains, scheduler) = match scenario.controller {
        ControllerKind::None => (None, None),
        ControllerKind::Pid => (Some(config.pid_gains()?), None),
        ControllerKind::FuzzyPid => (None, Some(config.scheduler(&scenario)?)),
    };
    let trace = run_scenario(&scenario, &params, gains.as_ref(), scheduler.as_ref())?;
    let path = output_path(&config, "trace.csv");
    write_trace(&trace, &path)?;
    let last = trace.rows.last().expect("a scenario has at least two rows");
    println!("wrote {} rows to {}", trace.len(), path.display());
    println!(
        "final h1 = {} cm, h2 = {} cm, q = {} cm^3/s",
        last.h1, last.h2, last.q_actuator
    );
    Ok(())
}

fn tune_zn(config: Config, ku: Option<f64>, tu: Option<f64>) -> Result<(), Failure> {
    let mut config = config;
    if ku.is_some() {
        config.tuning_mut().ku = ku;
    }
    if tu.is_some() {
        config.tuning_mut().tu = tu;
    }
    let tuning = config.tuning()?;
    let (ku, tu) = match (tuning.ku, tuning.tu) {
        (Some(ku), Some(tu)) => (ku, tu),
        (ku_override, tu_override) => {
            let params = config.plant_params()?;
            let model = config.linear_model()?;
            let search = UltimateSearch {
                k_hi: tuning.k_hi,
                tolerance: tuning.tolerance,
                ..UltimateSearch::default()
            };
            let found = find_ultimate_gain(&params, &model, search)?;
            println!("search on the printed second-order model with actuator lag:");
            println!(
                "  ku = {:.4}  tu = {:.4} s  (oscillation amplitude ratio {:.4})",
                found.ku, found.tu, found.peak_ratio
            );
            if let Ok(lin) = find_ultimate_gain_for(params.tc, &model.plant_tf(), search) {
                println!("same loop with the linear-ODE numerator k1*k21:");
                println!("  ku = {:.4}  tu = {:.4} s", lin.ku, lin.tu);
            }
            (ku_override.unwrap_or(found.ku), tu_override.unwrap_or(found.tu))
        }
    };
    let gains = zn_from_ultimate(ku, tu)?;
    let reference = PidGains::reference();
    println!("ziegler-nichols from ku = {ku:.4}, tu = {tu:.4} s:");
    println!("  kp = {:.2}  ki = {:.2}  kd = {:.2}", gains.kp, gains.ki, gains.kd);
    println!("reference gains:");
    println!("  kp = {}  ki = {}  kd = {}", reference.kp, reference.ki, reference.kd);
    Ok(())
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    base.with_file_name(format!("{stem}_{suffix}"))
}

fn run_pair(
    scenario: &Scenario,
    params: &tanklab::TankParams,
    gains: &PidGains,
    scheduler: &FuzzyScheduler,
) -> [Result<Trace, SimError>; 2] {
    let pid = Scenario {
        controller: ControllerKind::Pid,
        ..scenario.clone()
    };
    let fuzzy = Scenario {
        controller: ControllerKind::FuzzyPid,
        ..scenario.clone()
    };
    thread::scope(|s| {
        let a = s.spawn(|| run_scenario(&pid, params, Some(gains), None));
        let b = s.spawn(|| run_scenario(&fuzzy, params, None, Some(scheduler)));
        [
            a.join().expect("simulation thread panicked"),
            b.join().expect("simulation thread panicked"),
        ]
    })
}

fn run_compare(config: Config) -> Result<(), Failure> {
    let params = config.plant_params()?;
    let gains = config.pid_gains()?;
    let band = config.settle_band_pct()?;
    let settings = config.compare_settings()?;
    let mut step = config.scenario()?;
    step.plant = PlantModel::Nonlinear;
    let scheduler = config.scheduler(&step)?;

    let mut disturbance = step.clone();
    disturbance.duration = settings.disturbance_duration;
    disturbance
        .disturbance_schedule
        .push((settings.disturbance_time, settings.disturbance_flow));
    disturbance.validate(&params)?;

    let (step_runs, dist_runs) = thread::scope(|s| {
        let a = s.spawn(|| run_pair(&step, &params, &gains, &scheduler));
        let b = s.spawn(|| run_pair(&disturbance, &params, &gains, &scheduler));
        (
            a.join().expect("simulation thread panicked"),
            b.join().expect("simulation thread panicked"),
        )
    });
    let [step_pid, step_fuzzy] = step_runs;
    let [dist_pid, dist_fuzzy] = dist_runs;
    let step_traces = vec![("PID".to_string(), step_pid?), ("PIDFLC".to_string(), step_fuzzy?)];
    let dist_traces = vec![("PID".to_string(), dist_pid?), ("PIDFLC".to_string(), dist_fuzzy?)];

    let reports: [ComparisonReport; 2] = [
        compare(&step_traces, &step, band)?,
        compare(&dist_traces, &disturbance, band)?,
    ];
    let text = reports.iter().map(|r| r.to_text()).collect::<Vec<_>>().join("\n");
    let csv = reports[0].to_csv() + &reports[1].csv_rows();

    let report_path = output_path(&config, "report.txt");
    write_text(&text, &report_path)?;
    write_text(&csv, &with_suffix(&report_path, "metrics.csv"))?;
    for (scenario, traces) in [("step", &step_traces), ("disturbance", &dist_traces)] {
        for (name, trace) in traces.iter() {
            let file = format!("{scenario}_{}.csv", name.to_lowercase());
            write_trace(trace, &with_suffix(&report_path, &file))?;
        }
    }
    print!("{text}");
    println!("report written to {}", report_path.display());
    Ok(())
}

fn metrics(config: Config, path: &Path, step_time: Option<f64>, target: Option<f64>) -> Result<(), Failure> {
    let band = config.settle_band_pct()?;
    let file = File::open(path).map_err(|e| io_failure(path, e))?;
    let trace = Trace::read_csv(file)?;
    let detected = detect_step(&trace);
    let (t0, target) = match (step_time, target, detected) {
        (Some(t), Some(y), _) => (t, y),
        (t, y, Some((dt0, dy))) => (t.unwrap_or(dt0), y.unwrap_or(dy)),
        _ => return Err(AnalysisError::NoStepFound.into()),
    };
    let m = step_metrics(&trace, t0, target, band)?;
    let show = |v: Option<f64>| v.map_or_else(|| "absent".to_string(), |v| format!("{v:.4} s"));
    let text = format!(
        "step at t = {t0} s to {target} cm (band {band}%)\n\
         overshoot_pct      {:.4}\n\
         rise_time          {}\n\
         settling_time      {}\n\
         steady_state_error {:.6} cm\n\
         final_value        {:.6} cm\n",
        m.overshoot_pct,
        show(m.rise_time),
        show(m.settling_time),
        m.steady_state_error,
        m.final_value
    );
    print!("{text}");
    if let Some(out) = config.output_path() {
        write_text(&text, Path::new(&out))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::PrintConfig = cli.command {
        print!("{}", Config::reference().to_toml_string());
        return Ok(());
    }
    let config = load_config(&cli)?;
    match cli.command {
        Command::Simulate { plant, controller } => simulate(config, plant, controller),
        Command::TuneZn { ku, tu } => tune_zn(config, ku, tu),
        Command::Compare => run_compare(config),
        Command::Metrics {
            trace,
            step_time,
            target,
        } => metrics(config, &trace, step_time, target),
        Command::PrintConfig => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
