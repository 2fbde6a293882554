//! Discrete-time harmonic observer.
//!
//! Runs the predictor form `z[k+1] = S_d z[k] + L_d (y[k] - G z[k])`, so the
//! estimation error obeys `e[k+1] = (S_d - L_d G) e[k]`. The gain places the
//! error poles at `rho` times the open-loop poles `{1, e^{+-i n beta T}}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::harmonic_model::{self, StateVector7, HARMONICS, ORDER};
use crate::numerics::{self, Matrix};

/// Largest residual accepted when checking the placed characteristic
/// polynomial at its target roots.
pub const PLACEMENT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObserverConfig {
    pub beta: f64,
    pub sample_period: f64,
    pub rho: f64,
    #[serde(serialize_with = "ser_matrix")]
    pub s_d: Matrix,
    pub g: [f64; ORDER],
    pub l_d: [f64; ORDER],
    #[serde(skip)]
    pub targets: Vec<Complex64>,
    /// `(cos n beta T, sin n beta T)` for n = 1..3.
    #[serde(skip)]
    rotations: [(f64, f64); HARMONICS],
}

fn ser_matrix<S: serde::Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&m.to_nested(), s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObserverState {
    pub z: StateVector7,
    pub samples_seen: u64,
}

impl ObserverState {
    /// Dc estimate seeded from the first measurement, harmonics at zero.
    pub fn from_first_sample(y: f64) -> Self {
        Self { z: StateVector7::dc(y), samples_seen: 0 }
    }
}

/// Target error poles: `rho * {1, e^{+-i beta T}, e^{+-2i beta T}, e^{+-3i beta T}}`.
pub fn target_poles(beta: f64, t: f64, rho: f64) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(rho, 0.0)];
    for n in 1..=HARMONICS {
        let theta = n as f64 * beta * t;
        v.push(Complex64::from_polar(rho, theta));
        v.push(Complex64::from_polar(rho, -theta));
    }
    v
}

pub fn design(beta: f64, sample_period: f64, rho: f64) -> Result<ObserverConfig> {
    if !(rho > 0.0 && rho < 1.0) {
        return input(format!("rho must be in (0,1), got {rho}"));
    }
    if !(sample_period > 0.0) {
        return input(format!("sample period must be positive, got {sample_period}"));
    }
    let s_d = harmonic_model::discretize(beta, sample_period)?;
    let g = harmonic_model::output_map();
    let targets = target_poles(beta, sample_period, rho);
    let l = numerics::pole_place_observer(&s_d, &g, &targets)?;

    let mut rotations = [(0.0, 0.0); HARMONICS];
    for (n, r) in rotations.iter_mut().enumerate() {
        let i = 2 * n + 1;
        *r = (s_d[(i, i)], s_d[(i + 1, i)]);
    }
    let mut l_d = [0.0; ORDER];
    l_d.copy_from_slice(l.as_slice());
    let mut g_row = [0.0; ORDER];
    g_row.copy_from_slice(g.as_slice());
    let cfg = ObserverConfig { beta, sample_period, rho, s_d, g: g_row, l_d, targets, rotations };

    let worst = cfg.placement_residuals()?.into_iter().fold(0.0, f64::max);
    if worst > PLACEMENT_TOLERANCE {
        return Err(Error::Rank(format!("placed poles miss their targets (residual {worst:.3e})")));
    }
    Ok(cfg)
}

/// Full redesign at a new fundamental. State is untouched by construction:
/// callers keep their [`ObserverState`].
pub fn retune(cfg: &ObserverConfig, new_beta: f64) -> Result<ObserverConfig> {
    design(new_beta, cfg.sample_period, cfg.rho)
}

impl ObserverConfig {
    /// `S_d - L_d G`.
    pub fn error_dynamics(&self) -> Matrix {
        let lg = Matrix::column(&self.l_d).mul(&Matrix::row(&self.g)).expect("7x1 times 1x7");
        self.s_d.sub(&lg).expect("both 7x7")
    }

    /// `|det(mu I - (S_d - L_d G))|` at each target `mu`.
    pub fn placement_residuals(&self) -> Result<Vec<f64>> {
        let p = numerics::char_poly(&self.error_dynamics())?;
        Ok(self.targets.iter().map(|&mu| p.eval(mu).norm()).collect())
    }
}

fn check_measurement(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::Measurement(format!("non-finite sample {y}")))
    }
}

/// One observer update with the full 7x7 products.
pub fn step(cfg: &ObserverConfig, st: &ObserverState, y: f64) -> Result<ObserverState> {
    check_measurement(y)?;
    let z = &st.z.0;
    let innovation = y - cfg.g.iter().zip(z).map(|(g, z)| g * z).sum::<f64>();
    let mut next = [0.0; ORDER];
    for (i, out) in next.iter_mut().enumerate() {
        let row = cfg.s_d.row_slice(i);
        *out = row.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + cfg.l_d[i] * innovation;
    }
    Ok(ObserverState { z: StateVector7(next), samples_seen: st.samples_seen + 1 })
}

/// Same update as [`step`], exploiting the 1 + 2 + 2 + 2 block structure of
/// `S_d`: 1 multiply for the dc state and 6 per harmonic pair, 19 in total.
pub fn step_decomposed(cfg: &ObserverConfig, st: &ObserverState, y: f64) -> Result<ObserverState> {
    check_measurement(y)?;
    let z = &st.z.0;
    let l = &cfg.l_d;
    let e = y - (z[0] + z[1] + z[3] + z[5]);
    let mut next = [0.0; ORDER];
    next[0] = z[0] + l[0] * e;
    for (n, &(c, s)) in cfg.rotations.iter().enumerate() {
        let (i, j) = (2 * n + 1, 2 * n + 2);
        next[i] = c * z[i] - s * z[j] + l[i] * e;
        next[j] = s * z[i] + c * z[j] + l[j] * e;
    }
    Ok(ObserverState { z: StateVector7(next), samples_seen: st.samples_seen + 1 })
}

/// Ripple fundamental seen on the dc link for a six-step drive:
/// `2 pi (rpm / 60) pole_pairs pulses_per_electrical_cycle`.
pub fn beta_from_speed(rpm: f64, pole_pairs: u32, pulses_per_electrical_cycle: u32) -> Result<f64> {
    if !(rpm > 0.0) || !rpm.is_finite() {
        return input(format!("speed must be positive, got {rpm} rpm"));
    }
    if pole_pairs == 0 || pulses_per_electrical_cycle == 0 {
        return input("pole pairs and pulses per cycle must be >= 1");
    }
    Ok(2.0 * PI * rpm / 60.0 * f64::from(pole_pairs) * f64::from(pulses_per_electrical_cycle))
}

/// Observer instance with its configuration, used by the simulation loop.
#[derive(Clone, Debug)]
pub struct HarmonicObserver {
    cfg: ObserverConfig,
    state: Option<ObserverState>,
}

impl HarmonicObserver {
    pub fn new(cfg: ObserverConfig) -> Self {
        Self { cfg, state: None }
    }

    pub fn config(&self) -> &ObserverConfig {
        &self.cfg
    }

    /// Current estimate; all zeros before the first sample.
    pub fn estimate(&self) -> StateVector7 {
        self.state.map(|s| s.z).unwrap_or_default()
    }

    pub fn samples_seen(&self) -> u64 {
        self.state.map_or(0, |s| s.samples_seen)
    }

    /// Seed the estimate from the first measurement.
    pub fn start(&mut self, y: f64) -> Result<()> {
        check_measurement(y)?;
        self.state = Some(ObserverState::from_first_sample(y));
        Ok(())
    }

    /// Consume sample `y[k]`, advancing the estimate to `z[k+1]`. Starts the
    /// observer if it has not seen a sample yet.
    pub fn update(&mut self, y: f64) -> Result<StateVector7> {
        let st = match self.state {
            Some(st) => st,
            None => {
                check_measurement(y)?;
                ObserverState::from_first_sample(y)
            }
        };
        let next = step_decomposed(&self.cfg, &st, y)?;
        self.state = Some(next);
        Ok(next.z)
    }

    pub fn retune(&mut self, new_beta: f64) -> Result<()> {
        self.cfg = retune(&self.cfg, new_beta)?;
        Ok(())
    }
}
