//! Scenario configuration and the closed-loop simulation driver.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Column, RippleMetrics, Trace, Window};
use crate::controller::{self, ControllerConfig, ControllerState, HarmonicGains};
use crate::error::{input, Error, Result};
use crate::observer::{self, HarmonicObserver};
use crate::plant::{BldcParams, BoostParams, Diagnostics, LoadModel, Measurement, Plant};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedSource {
    /// Observers stay at the ripple frequency of this speed.
    FixedRpm { rpm: f64 },
    /// Observers follow the simulated motor speed, starting from
    /// `nominal_rpm`.
    MotorState { nominal_rpm: f64 },
}

impl SpeedSource {
    pub fn nominal_rpm(&self) -> f64 {
        match *self {
            SpeedSource::FixedRpm { rpm } => rpm,
            SpeedSource::MotorState { nominal_rpm } => nominal_rpm,
        }
    }
}

fn default_pulses() -> u32 {
    6
}

fn default_retune_interval() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSettings {
    pub rho: f64,
    pub speed_source: SpeedSource,
    pub pole_pairs: u32,
    #[serde(default = "default_pulses")]
    pub pulses_per_electrical_cycle: u32,
    /// Minimum simulated time between two redesigns.
    #[serde(default = "default_retune_interval")]
    pub retune_interval: f64,
}

impl ObserverSettings {
    pub fn nominal_beta(&self) -> Result<f64> {
        observer::beta_from_speed(self.speed_source.nominal_rpm(), self.pole_pairs, self.pulses_per_electrical_cycle)
    }

    pub fn nominal_hz(&self) -> Result<f64> {
        Ok(self.nominal_beta()? / (2.0 * PI))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseStddev {
    pub v_dc: f64,
    #[serde(rename = "i_L")]
    pub i_l: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise_stddev: NoiseStddev,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub trace: Option<String>,
    #[serde(default)]
    pub metrics: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub plant: BoostParams,
    pub load: LoadModel,
    pub observer: ObserverSettings,
    pub controller: ControllerConfig,
    pub sim: SimSettings,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Voltage-loop gains found by the coordinate search on the paper-default
/// scenario (`hfboost tune --preset paper-default --target voltage`).
pub const TUNED_VOLTAGE_GAINS: HarmonicGains = HarmonicGains {
    z2: -0.9921799432457308,
    z3: 0.20634056049028404,
    z4: -0.8711309552514511,
    z5: -0.05503365225422706,
    z6: 0.9000000000000001,
    z7: -0.8679520214927235,
};

/// Current-loop gains found by the same search with `--target current`,
/// holding the voltage gains above.
pub const TUNED_CURRENT_GAINS: HarmonicGains = HarmonicGains {
    z2: -0.9128450554949107,
    z3: -0.2728303927461934,
    z4: -0.02236454974392218,
    z5: 0.01671842700025241,
    z6: -0.7163345512551526,
    z7: -0.4337474160020189,
};

impl ScenarioConfig {
    /// 13.9 V to 24 V boost at 18 kHz (330 uH, 470 uF, 0.1 ohm ESR) feeding a
    /// six-step BLDC drive loaded to run near 1000 rpm. Harmonic feedback
    /// starts at 0.1 s (voltage) and 0.2 s (current).
    pub fn paper_default() -> Self {
        let plant = BoostParams::reference();
        let mut motor = BldcParams::reference();
        motor.load_torque = motor.load_torque_for_speed(24.0, 1000.0);
        let controller = ControllerConfig {
            kv: TUNED_VOLTAGE_GAINS,
            ki: TUNED_CURRENT_GAINS,
            sample_period: plant.period(),
            ..ControllerConfig::reference()
        };
        Self {
            plant,
            load: LoadModel::SixStepBldc(motor),
            observer: ObserverSettings {
                rho: 0.99,
                speed_source: SpeedSource::MotorState { nominal_rpm: 1000.0 },
                pole_pairs: 4,
                pulses_per_electrical_cycle: 6,
                retune_interval: 0.01,
            },
            controller,
            sim: SimSettings { duration: 1.0, seed: 0, noise_stddev: NoiseStddev::default() },
            outputs: Outputs::default(),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-default" => Ok(Self::paper_default()),
            other => input(format!("unknown preset '{other}' (available: paper-default)")),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))?;
        cfg.controller.sample_period = cfg.plant.period();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.load.validate()?;
        self.controller.validate()?;
        if (self.controller.sample_period - self.plant.period()).abs() > 1e-15 {
            return input("controller sample period must equal the PWM period");
        }
        if !(self.sim.duration > 0.0) || !self.sim.duration.is_finite() {
            return input(format!("duration must be positive, got {}", self.sim.duration));
        }
        let n = self.sim.noise_stddev;
        if !(n.v_dc >= 0.0) || !(n.i_l >= 0.0) {
            return input("noise_stddev must be >= 0");
        }
        if !(self.observer.retune_interval >= 0.0) {
            return input("retune_interval must be >= 0");
        }
        observer::design(self.observer.nominal_beta()?, self.plant.period(), self.observer.rho)?;
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.sim.duration * self.plant.f_pwm).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    Off,
    Voltage,
    VoltageCurrent,
}

impl std::str::FromStr for FeedbackMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(Self::Off),
            "voltage" => Ok(Self::Voltage),
            "voltage+current" | "voltage_current" => Ok(Self::VoltageCurrent),
            _ => input(format!("unknown feedback mode '{s}' (off|voltage|voltage+current)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub trace: Trace,
    /// Per-sample extremes within each PWM period.
    pub envelope: Vec<Measurement>,
    pub diagnostics: Diagnostics,
    pub final_rpm: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SimFailure {
    pub error: Error,
    pub partial: Trace,
}

impl From<Error> for SimFailure {
    fn from(error: Error) -> Self {
        Self { error, partial: Trace::default() }
    }
}

/// Run the closed loop. Harmonic gains not selected by `mode` are zeroed.
// the failure carries the partial trace on purpose
#[allow(clippy::result_large_err)]
pub fn simulate(cfg: &ScenarioConfig, mode: FeedbackMode) -> std::result::Result<SimOutcome, SimFailure> {
    cfg.validate()?;
    let mut ctrl = cfg.controller.clone();
    match mode {
        FeedbackMode::Off => {
            ctrl.kv = HarmonicGains::ZERO;
            ctrl.ki = HarmonicGains::ZERO;
        }
        FeedbackMode::Voltage => ctrl.ki = HarmonicGains::ZERO,
        FeedbackMode::VoltageCurrent => {}
    }

    let period = cfg.plant.period();
    let mut plant = Plant::new(cfg.plant.clone(), cfg.load.clone())?;
    let obs_cfg = observer::design(cfg.observer.nominal_beta()?, period, cfg.observer.rho)?;
    let mut obs_v = HarmonicObserver::new(obs_cfg.clone());
    let mut obs_i = HarmonicObserver::new(obs_cfg);
    let mut ctrl_state = ControllerState::default();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sim.seed);
    let noise = cfg.sim.noise_stddev;
    let dist = |sd: f64| Normal::new(0.0, sd).map_err(|e| Error::Input(e.to_string()));
    let (noise_v, noise_i) = (dist(noise.v_dc)?, dist(noise.i_l)?);

    let n = cfg.samples();
    let mut trace = Trace::with_capacity(n);
    let mut envelope = Vec::with_capacity(n);
    let retune_every = (cfg.observer.retune_interval / period).round().max(1.0) as usize;
    let nominal_rpm = cfg.observer.speed_source.nominal_rpm();

    // the sampling instant at t = 0 sees the precharged capacitor
    let mut meas = Measurement {
        v_dc: plant.state.v_c,
        i_l: plant.state.i_l,
        i_load: 0.0,
        i_l_min: plant.state.i_l,
        i_l_max: plant.state.i_l,
        v_dc_min: plant.state.v_c,
        v_dc_max: plant.state.v_c,
    };

    for k in 0..n {
        let t = k as f64 * period;
        if k > 0 && k % retune_every == 0 {
            if let (SpeedSource::MotorState { .. }, Some(rpm)) = (cfg.observer.speed_source, plant.motor_rpm()) {
                // below a tenth of nominal speed the harmonic model is meaningless
                if rpm > 0.1 * nominal_rpm {
                    let beta = observer::beta_from_speed(
                        rpm,
                        cfg.observer.pole_pairs,
                        cfg.observer.pulses_per_electrical_cycle,
                    );
                    if let Ok(beta) = beta {
                        if obs_v.retune(beta).is_ok() {
                            obs_i.retune(beta).map_err(|error| SimFailure { error, partial: trace.clone() })?;
                        }
                    }
                }
            }
        }

        let (mut y_v, mut y_i) = (meas.v_dc, meas.i_l);
        if noise.v_dc > 0.0 {
            y_v += noise_v.sample(&mut rng);
        }
        if noise.i_l > 0.0 {
            y_i += noise_i.sample(&mut rng);
        }

        let fail = |error: Error, partial: &Trace| SimFailure { error, partial: partial.clone() };
        if k == 0 {
            obs_v.start(y_v).map_err(|e| fail(e, &trace))?;
            obs_i.start(y_i).map_err(|e| fail(e, &trace))?;
        }
        // z[k], predicted from samples up to k - 1
        let (zv, zi) = (obs_v.estimate(), obs_i.estimate());
        let duty = controller::compute_duty(&ctrl, &mut ctrl_state, y_i, y_v, &zv, &zi, t);

        trace.t.push(t);
        trace.v_dc.push(y_v);
        trace.i_l.push(y_i);
        trace.duty.push(duty);
        trace.zv.push(zv.0);
        trace.zi.push(zi.0);
        trace.i_load.push(meas.i_load);
        trace.beta.push(obs_v.config().beta);

        if k + 1 == n {
            break;
        }
        obs_v.update(y_v).map_err(|e| fail(e, &trace))?;
        obs_i.update(y_i).map_err(|e| fail(e, &trace))?;
        meas = plant.step(duty).map_err(|e| fail(e, &trace))?;
        envelope.push(meas);
        if !meas.v_dc.is_finite() || !meas.i_l.is_finite() || meas.v_dc > 5.0 * cfg.controller.v_ref {
            return Err(SimFailure {
                error: Error::Divergence { t: t + period, reason: format!("v_dc = {}, i_L = {}", meas.v_dc, meas.i_l) },
                partial: trace,
            });
        }
    }
    Ok(SimOutcome { trace, envelope, diagnostics: plant.diagnostics, final_rpm: plant.motor_rpm() })
}

/// Steady-state summary reported after a simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Ripple fundamental the harmonic magnitudes were taken at.
    pub fundamental_hz: f64,
    pub mean_v_dc: f64,
    pub mean_i_l: f64,
    pub final_rpm: Option<f64>,
    pub v_dc: RippleMetrics,
    pub i_l: RippleMetrics,
    /// Peak-to-peak inductor current including the switching ripple inside
    /// each PWM period.
    pub i_l_envelope_p2p: f64,
}

pub fn summarize(cfg: &ScenarioConfig, out: &SimOutcome) -> Result<Summary> {
    let tr = &out.trace;
    let w = Window::steady_state(tr);
    let (a, b) = w.indices(tr)?;
    let fundamental = analysis::tracked_fundamental_hz(tr, &w)?;
    let f_sw = cfg.plant.f_pwm;
    let mean = |v: &[f64]| v[a..=b].iter().sum::<f64>() / (b - a + 1) as f64;
    // envelope[k] covers the period that ends at sample k + 1
    let env = &out.envelope[a.saturating_sub(1)..b.min(out.envelope.len())];
    let lo = env.iter().map(|m| m.i_l_min).fold(f64::INFINITY, f64::min);
    let hi = env.iter().map(|m| m.i_l_max).fold(f64::NEG_INFINITY, f64::max);
    Ok(Summary {
        fundamental_hz: fundamental,
        mean_v_dc: mean(&tr.v_dc),
        mean_i_l: mean(&tr.i_l),
        final_rpm: out.final_rpm,
        v_dc: analysis::measure(tr, Column::VDc, &w, fundamental, f_sw)?,
        i_l: analysis::measure(tr, Column::IL, &w, fundamental, f_sw)?,
        i_l_envelope_p2p: hi - lo,
    })
}
