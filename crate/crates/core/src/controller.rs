//! Duty-cycle law: nominal duty, current and voltage error terms, an
//! integral of the voltage error, and delayed harmonic state feedback from
//! the voltage and current observers.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::harmonic_model::StateVector7;

/// Feedback gains on observer states z2..z7. z1, the dc estimate, is never
/// fed back.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicGains {
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
    pub z5: f64,
    pub z6: f64,
    pub z7: f64,
}

impl HarmonicGains {
    pub const ZERO: Self = Self { z2: 0.0, z3: 0.0, z4: 0.0, z5: 0.0, z6: 0.0, z7: 0.0 };

    /// Voltage-loop gains `(-0.3, 0.2, -0.1, 0.2, -0.03, 0.14)`.
    pub const PUBLISHED_VOLTAGE: Self = Self { z2: -0.3, z3: 0.2, z4: -0.1, z5: 0.2, z6: -0.03, z7: 0.14 };

    pub fn from_array(k: [f64; 6]) -> Self {
        Self { z2: k[0], z3: k[1], z4: k[2], z5: k[3], z6: k[4], z7: k[5] }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.z2, self.z3, self.z4, self.z5, self.z6, self.z7]
    }

    pub fn is_zero(&self) -> bool {
        self.to_array().iter().all(|&k| k == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    #[serde(rename = "D0")]
    pub d0: f64,
    #[serde(rename = "i_L0")]
    pub i_l0: f64,
    pub v_ref: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub duty_min: f64,
    pub duty_max: f64,
    #[serde(rename = "Kv")]
    pub kv: HarmonicGains,
    #[serde(rename = "Ki")]
    pub ki: HarmonicGains,
    pub enable_time_v: f64,
    pub enable_time_i: f64,
    /// Integrator time step, the control sample period.
    pub sample_period: f64,
}

impl ControllerConfig {
    /// Baseline law for the 13.9 V to 24 V operating point: current gain
    /// -0.08 /A, voltage gain -0.06 /V, integral gain -1 /(V s), duty limits
    /// [0, 0.8], harmonic loops enabled at 0.1 s (voltage) and 0.2 s
    /// (current) with zero gains.
    pub fn reference() -> Self {
        Self {
            d0: 1.0 - 13.9 / 24.0,
            i_l0: 0.9,
            v_ref: 24.0,
            k1: -0.08,
            k2: -0.06,
            k3: -1.0,
            duty_min: 0.0,
            duty_max: 0.8,
            kv: HarmonicGains::ZERO,
            ki: HarmonicGains::ZERO,
            enable_time_v: 0.1,
            enable_time_i: 0.2,
            sample_period: 1.0 / 18_000.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.duty_min && self.duty_min < self.duty_max && self.duty_max <= 1.0) {
            return input(format!(
                "duty limits must satisfy 0 <= min < max <= 1, got [{}, {}]",
                self.duty_min, self.duty_max
            ));
        }
        if !(self.enable_time_v >= 0.0) || !(self.enable_time_i >= 0.0) {
            return input("enable times must be >= 0");
        }
        if !(self.sample_period > 0.0) {
            return input("sample_period must be positive");
        }
        let finite = [self.d0, self.i_l0, self.v_ref, self.k1, self.k2, self.k3];
        if finite.iter().chain(&self.kv.to_array()).chain(&self.ki.to_array()).any(|v| !v.is_finite()) {
            return input("controller gains must be finite");
        }
        Ok(())
    }

    /// Anti-windup bound on the integral, `(duty_max - duty_min) / |k3|`.
    pub fn integral_limit(&self) -> f64 {
        if self.k3 == 0.0 {
            f64::INFINITY
        } else {
            (self.duty_max - self.duty_min) / self.k3.abs()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ControllerState {
    /// Integral of `v_dc - v_ref`, V s.
    pub integral: f64,
    pub t: f64,
}

/// Unsaturated baseline duty. Accumulates `(v_dc - v_ref) T` into the
/// integral (forward Euler) before using it.
pub fn base_duty(cfg: &ControllerConfig, st: &mut ControllerState, i_l: f64, v_dc: f64) -> f64 {
    let err = v_dc - cfg.v_ref;
    let lim = cfg.integral_limit();
    st.integral = (st.integral + err * cfg.sample_period).clamp(-lim, lim);
    cfg.d0 + cfg.k1 * (i_l - cfg.i_l0) + cfg.k2 * err + cfg.k3 * st.integral
}

/// `K . (z2, ..., z7)`.
pub fn harmonic_term(k: &HarmonicGains, z: &StateVector7) -> f64 {
    k.to_array().iter().zip(&z.0[1..]).map(|(k, z)| k * z).sum()
}

/// Saturated duty for the sample at time `t`. If saturation clips the
/// output, this sample's integral update is undone.
pub fn compute_duty(
    cfg: &ControllerConfig,
    st: &mut ControllerState,
    i_l: f64,
    v_dc: f64,
    zv: &StateVector7,
    zi: &StateVector7,
    t: f64,
) -> f64 {
    let before = st.integral;
    let mut d = base_duty(cfg, st, i_l, v_dc);
    if t >= cfg.enable_time_v {
        d += harmonic_term(&cfg.kv, zv);
    }
    if t >= cfg.enable_time_i {
        d += harmonic_term(&cfg.ki, zi);
    }
    st.t = t;
    if d.is_nan() {
        st.integral = before;
        return cfg.duty_min;
    }
    let clamped = d.clamp(cfg.duty_min, cfg.duty_max);
    if clamped != d {
        st.integral = before;
    }
    clamped
}
