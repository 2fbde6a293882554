#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hfboost::analysis::{self, Column, MetricField, RippleMetrics, Trace, Window};
use hfboost::observer;
use hfboost::plant::{self, BoostParams, LoadModel, PlantState};
use hfboost::scenario::{self, FeedbackMode, ScenarioConfig};
use hfboost::tuner::{self, Target, TuneSpec};
use hfboost::{Error, Result};

#[derive(Parser)]
#[command(name = "hfboost", version, about = "Boost converter with observer-based harmonic ripple feedback")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Discretize the harmonic model and place the observer poles.
    DesignObserver {
        /// Ripple fundamental in Hz.
        #[arg(long)]
        freq: f64,
        #[arg(long)]
        sample_rate: f64,
        #[arg(long, default_value_t = 0.99)]
        rho: f64,
    },
    /// Run the closed loop and write the trace.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// off | voltage | voltage+current
        #[arg(long, default_value = "off")]
        feedback: FeedbackMode,
        /// Trace CSV path (defaults to the config's outputs.trace, then trace.csv).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Summary JSON path (defaults to the config's outputs.metrics).
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Ripple metrics of one trace column.
    Analyze {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "v_dc")]
        column: Column,
        /// `start:end` in seconds; defaults to the last 40% of the trace.
        #[arg(long)]
        window: Option<Window>,
        /// Ripple fundamental in Hz; defaults to the mean of the beta column.
        #[arg(long)]
        fundamental: Option<f64>,
        /// Switching frequency for the lowpass; defaults to the sample rate.
        #[arg(long)]
        switching_hz: Option<f64>,
        /// Trace to compare against; adds `reduction_vs_baseline`.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Metric the reduction is computed on: p2p_lowpass | p2p_raw.
        #[arg(long, default_value = "p2p_lowpass")]
        metric: String,
    },
    /// Capacitor and inductor ripple design calculations.
    CalcRipple(RippleArgs),
    /// Coordinate search for harmonic feedback gains.
    Tune {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// voltage | current
        #[arg(long)]
        target: Target,
        #[arg(long, default_value_t = 21)]
        grid_points: usize,
        #[arg(long, default_value_t = 2)]
        passes: usize,
        /// Write every evaluation to this JSON file.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ScenarioArg {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: paper-default
    #[arg(long)]
    preset: Option<String>,
}

impl ScenarioArg {
    fn load(&self) -> Result<ScenarioConfig> {
        match (&self.config, &self.preset) {
            (Some(p), _) => ScenarioConfig::from_json(&read(p)?),
            (None, Some(name)) => ScenarioConfig::preset(name),
            (None, None) => Err(Error::Input("--config or --preset is required".into())),
        }
    }
}

#[derive(Args)]
struct RippleArgs {
    #[arg(long)]
    vin: f64,
    #[arg(long)]
    vout: f64,
    /// Maximum output current, A.
    #[arg(long)]
    iout: f64,
    #[arg(long)]
    duty: f64,
    /// Switching frequency, Hz.
    #[arg(long)]
    fs: f64,
    #[arg(long = "L")]
    inductance: f64,
    #[arg(long = "C")]
    capacitance: f64,
    #[arg(long, default_value_t = 0.0)]
    esr: f64,
    /// Allowed output voltage ripple, V.
    #[arg(long)]
    dv: f64,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Input(e.to_string()))?;
    match writeln!(io::stdout().lock(), "{text}") {
        // a closed pipe (e.g. `| head`) is not a failure of the command
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::Input(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(io::BufWriter::new(file));
    w.write_record(Column::header()).map_err(|e| io_err(path, e))?;
    for k in 0..trace.len() {
        // `{}` on f64 is the shortest representation that parses back exactly
        w.write_record(trace.row(k).iter().map(|v| v.to_string())).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_trace(path: &Path) -> Result<Trace> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| io_err(path, e))?.iter().map(str::to_owned).collect();
    if header != Column::header() {
        return Err(Error::Input(format!(
            "{}: unexpected header, want {}",
            path.display(),
            Column::header().join(",")
        )));
    }
    let mut trace = Trace::default();
    let mut row = Vec::with_capacity(header.len());
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        row.clear();
        for field in rec.iter() {
            let v: f64 =
                field.trim().parse().map_err(|_| io_err(path, format!("row {}: bad number '{field}'", line + 2)))?;
            row.push(v);
        }
        trace.push_row(&row)?;
    }
    trace.validate()?;
    Ok(trace)
}

#[derive(Serialize)]
struct ObserverReport {
    beta: f64,
    #[serde(rename = "T")]
    t: f64,
    rho: f64,
    #[serde(rename = "S_d")]
    s_d: Vec<Vec<f64>>,
    #[serde(rename = "L_d")]
    l_d: Vec<f64>,
    residuals: Vec<f64>,
}

fn design_observer(freq: f64, sample_rate: f64, rho: f64) -> Result<()> {
    if !(freq > 0.0) || !(sample_rate > 0.0) {
        return Err(Error::Input("freq and sample-rate must be positive".into()));
    }
    let beta = 2.0 * std::f64::consts::PI * freq;
    let cfg = observer::design(beta, 1.0 / sample_rate, rho)?;
    print_json(&ObserverReport {
        beta,
        t: cfg.sample_period,
        rho,
        s_d: cfg.s_d.to_nested(),
        l_d: cfg.l_d.to_vec(),
        residuals: cfg.placement_residuals()?,
    })
}

fn simulate(
    scenario: &ScenarioArg,
    mode: FeedbackMode,
    trace_path: Option<PathBuf>,
    metrics_path: Option<PathBuf>,
) -> Result<()> {
    let cfg = scenario.load()?;
    let trace_path = trace_path
        .or_else(|| cfg.outputs.trace.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("trace.csv"));
    let metrics_path = metrics_path.or_else(|| cfg.outputs.metrics.as_ref().map(PathBuf::from));

    let out = match scenario::simulate(&cfg, mode) {
        Ok(out) => out,
        Err(fail) => {
            write_trace(&trace_path, &fail.partial)?;
            return Err(fail.error);
        }
    };
    write_trace(&trace_path, &out.trace)?;
    let summary = scenario::summarize(&cfg, &out)?;
    if let Some(p) = metrics_path {
        write_json(&p, &summary)?;
    }
    print_json(&summary)
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    trace_path: &Path,
    column: Column,
    window: Option<Window>,
    fundamental: Option<f64>,
    switching_hz: Option<f64>,
    baseline: Option<PathBuf>,
    metric: &str,
) -> Result<()> {
    let field = match metric {
        "p2p_lowpass" => MetricField::P2pLowpass,
        "p2p_raw" => MetricField::P2pRaw,
        other => return Err(Error::Input(format!("unknown metric '{other}' (p2p_lowpass|p2p_raw)"))),
    };
    let metrics_of = |trace: &Trace| -> Result<RippleMetrics> {
        let w = window.unwrap_or_else(|| Window::steady_state(trace));
        let f0 = match fundamental {
            Some(f) => f,
            None => analysis::tracked_fundamental_hz(trace, &w)?,
        };
        let f_sw = match switching_hz {
            Some(f) => f,
            None => 1.0 / trace.sample_period()?,
        };
        analysis::measure(trace, column, &w, f0, f_sw)
    };
    let mut m = metrics_of(&read_trace(trace_path)?)?;
    if let Some(b) = baseline {
        let before = metrics_of(&read_trace(&b)?)?;
        m.reduction_vs_baseline = Some(m.reduction_from(&before, field)?);
    }
    print_json(&m)
}

#[derive(Serialize)]
struct RippleReport {
    c_out_min: f64,
    dv_esr: f64,
    di_est: [f64; 2],
    di_max: f64,
    /// Inductor current rise over one ON interval of an open-loop simulation.
    di_max_simulated: f64,
}

fn calc_ripple(a: &RippleArgs) -> Result<()> {
    let c_out_min = analysis::min_output_capacitance(a.iout, a.duty, a.fs, a.dv)?;
    let (lo, hi) = analysis::inductor_ripple_estimate(a.iout, a.vout, a.vin)?;
    let di_max = analysis::inductor_ripple_max(a.vin, a.duty, a.fs, a.inductance)?;
    let dv_esr = analysis::esr_ripple(a.esr, a.iout, a.duty, di_max)?;

    // one open-loop period from the ideal operating point
    let p = BoostParams {
        v_in: a.vin,
        inductance: a.inductance,
        capacitance: a.capacitance,
        esr: a.esr,
        r_on: 0.0,
        f_pwm: a.fs,
        substeps_per_period: 64,
    };
    p.validate()?;
    let i0 = a.iout / (1.0 - a.duty) + di_max;
    let st = PlantState { i_l: i0, v_c: a.vout, t: 0.0, motor: None };
    let (_, m) = plant::sample_step(&p, &LoadModel::ConstantCurrent { i0: a.iout }, &st, a.duty)?;
    let di_sim = m.i_l_max - i0;
    let tol = 0.05 * di_max.max(1e-12);
    if (di_sim - di_max).abs() > tol {
        return Err(Error::Input(format!(
            "calculator disagrees with simulation: di_max {di_max} vs simulated {di_sim}"
        )));
    }
    print_json(&RippleReport { c_out_min, dv_esr, di_est: [lo, hi], di_max, di_max_simulated: di_sim })
}

fn tune(scenario: &ScenarioArg, target: Target, grid_points: usize, passes: usize, log: Option<PathBuf>) -> Result<()> {
    let cfg = scenario.load()?;
    let spec = TuneSpec { grid_points, passes, ..TuneSpec::new(target) };
    let (report, search) = tuner::tune(&cfg, &spec)?;
    if let Some(p) = log {
        write_json(&p, &search.log)?;
    }
    print_json(&report)
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::DesignObserver { freq, sample_rate, rho } => design_observer(freq, sample_rate, rho),
        Cmd::Simulate { scenario, feedback, trace, metrics } => simulate(&scenario, feedback, trace, metrics),
        Cmd::Analyze { trace, column, window, fundamental, switching_hz, baseline, metric } => {
            analyze(&trace, column, window, fundamental, switching_hz, baseline, &metric)
        }
        Cmd::CalcRipple(args) => calc_ripple(&args),
        Cmd::Tune { scenario, target, grid_points, passes, log } => tune(&scenario, target, grid_points, passes, log),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.detail().replace('\n', " ");
            let _ = writeln!(io::stderr(), "error: {}: {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
