//! Switching model of a boost converter feeding a dc-link load.
//!
//! One call to [`sample_step`] advances one PWM period. The low-side switch
//! conducts for the first `duty` fraction of the period. The period is cut
//! into `substeps_per_period` equal pieces. The piece that contains the
//! turn-off instant is split there, so the duty is not quantized. The boost
//! LC network is integrated with the trapezoidal rule. The motor uses Heun's
//! method, which is the explicit trapezoidal rule.
//!
//! The six-step motor load keeps all three phase currents. When the inverter
//! commutates, the outgoing phase freewheels through its diode until its
//! current reaches zero. That transfer interval is what puts the 6x
//! electrical-frequency ripple onto the dc link.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostParams {
    pub v_in: f64,
    #[serde(rename = "L")]
    pub inductance: f64,
    #[serde(rename = "C")]
    pub capacitance: f64,
    pub esr: f64,
    #[serde(default)]
    pub r_on: f64,
    pub f_pwm: f64,
    pub substeps_per_period: u32,
}

impl BoostParams {
    /// Component values of the 13.9 V to 24 V, 18 kHz design with a 470 uF
    /// output capacitor.
    pub fn reference() -> Self {
        Self {
            v_in: 13.9,
            inductance: 330e-6,
            capacitance: 470e-6,
            esr: 0.1,
            r_on: 0.0,
            f_pwm: 18_000.0,
            substeps_per_period: 16,
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f_pwm
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("v_in", self.v_in), ("L", self.inductance), ("C", self.capacitance), ("f_pwm", self.f_pwm)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return input(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.esr >= 0.0) || !(self.r_on >= 0.0) {
            return input("esr and r_on must be >= 0");
        }
        if self.substeps_per_period < 8 {
            return input(format!("substeps_per_period must be >= 8, got {}", self.substeps_per_period));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadHarmonic {
    pub magnitude: f64,
    pub order: u32,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BldcParams {
    pub r_phase: f64,
    pub l_phase: f64,
    /// Torque per ampere with two phases conducting on their flat back-EMF;
    /// also the line-to-line back-EMF constant in V s/rad.
    pub k_t: f64,
    /// Width of the flat top of each phase back-EMF, electrical degrees.
    pub flat_angle: f64,
    pub inertia: f64,
    pub damping: f64,
    pub pole_pairs: u32,
    pub load_torque: f64,
}

impl BldcParams {
    /// Three-phase trapezoidal motor: 0.41 ohm, 0.7 mH per phase, 120 degree
    /// flat back-EMF, J = 9.6e-5 kg m^2, F = 1e-3 N m s, four pole pairs.
    ///
    /// The torque constant is 1.4 N m per ampere per revolution, i.e.
    /// 1.4 / 2 pi N m/A. With the SI reading the motor could not turn faster
    /// than about 160 rpm on a 24 V bus.
    pub fn reference() -> Self {
        Self {
            r_phase: 0.41,
            l_phase: 0.0007,
            k_t: 1.4 / (2.0 * PI),
            flat_angle: 120.0,
            inertia: 9.6e-5,
            damping: 1e-3,
            pole_pairs: 4,
            load_torque: 0.0,
        }
    }

    /// Load torque that balances the motor at `rpm` when fed from `v_dc`,
    /// neglecting commutation intervals.
    pub fn load_torque_for_speed(&self, v_dc: f64, rpm: f64) -> f64 {
        let w = rpm * 2.0 * PI / 60.0;
        let i = (v_dc - self.k_t * w) / (2.0 * self.r_phase);
        self.k_t * i - self.damping * w
    }

    /// Steady mechanical speed (rad/s) at constant `v_dc`, neglecting
    /// commutation intervals.
    pub fn equilibrium_speed(&self, v_dc: f64) -> f64 {
        let r2 = 2.0 * self.r_phase;
        (self.k_t * v_dc / r2 - self.load_torque) / (self.k_t * self.k_t / r2 + self.damping)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("r_phase", self.r_phase),
            ("l_phase", self.l_phase),
            ("k_t", self.k_t),
            ("flat_angle", self.flat_angle),
            ("inertia", self.inertia),
            ("damping", self.damping),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return input(format!("{name} must be positive, got {v}"));
            }
        }
        if self.flat_angle >= 180.0 {
            return input("flat_angle must be below 180 degrees");
        }
        if self.pole_pairs == 0 {
            return input("pole_pairs must be >= 1");
        }
        if !self.load_torque.is_finite() {
            return input("load_torque must be finite");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadModel {
    ConstantCurrent { i0: f64 },
    PeriodicHarmonics { i0: f64, beta: f64, components: Vec<LoadHarmonic> },
    SixStepBldc(BldcParams),
}

impl LoadModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            LoadModel::ConstantCurrent { i0 } if !i0.is_finite() => input("i0 must be finite"),
            LoadModel::ConstantCurrent { .. } => Ok(()),
            LoadModel::PeriodicHarmonics { i0, beta, components } => {
                if !i0.is_finite() || !(*beta > 0.0) {
                    return input("periodic load needs finite i0 and beta > 0");
                }
                if let Some(c) = components.iter().find(|c| !(1..=3).contains(&c.order)) {
                    return input(format!("harmonic order {} not in 1..=3", c.order));
                }
                Ok(())
            }
            LoadModel::SixStepBldc(m) => m.validate(),
        }
    }
}

/// Motor mechanical and electrical state. Phase currents are positive into
/// the motor and always sum to zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MotorState {
    /// Electrical angle in [0, 2 pi).
    pub theta_e: f64,
    pub omega_m: f64,
    pub i_phase: [f64; 3],
}

impl MotorState {
    pub fn rpm(&self) -> f64 {
        self.omega_m * 60.0 / (2.0 * PI)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub i_l: f64,
    pub v_c: f64,
    pub t: f64,
    pub motor: Option<MotorState>,
}

impl PlantState {
    /// Inductor empty, output capacitor precharged to the input voltage
    /// through the diode, motor at rest.
    pub fn initial(p: &BoostParams, load: &LoadModel) -> Self {
        Self {
            i_l: 0.0,
            v_c: p.v_in,
            t: 0.0,
            motor: matches!(load, LoadModel::SixStepBldc(_)).then(MotorState::default),
        }
    }
}

/// Values at the end of a PWM period (the synchronous sampling instant) plus
/// the extremes seen during it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub v_dc: f64,
    pub i_l: f64,
    pub i_load: f64,
    pub i_l_min: f64,
    pub i_l_max: f64,
    pub v_dc_min: f64,
    pub v_dc_max: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Accumulated time during which the motor back-EMF exceeded the bus.
    pub stall_time: f64,
}

// ---------------------------------------------------------------------------
// motor

#[derive(Clone, Copy, Debug, PartialEq)]
enum Terminal {
    /// Tied to a rail through a switch or a conducting diode.
    Rail(f64),
    Open,
}

/// (upper, lower) phase for each 60 degree sector starting at 30 degrees.
const SECTOR_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)];

/// Normalized trapezoidal back-EMF of a phase at electrical angle `phi`
/// (radians). +1 over the flat top centred at 90 degrees.
pub fn emf_shape(phi: f64, flat_angle_deg: f64) -> f64 {
    let half_flat = flat_angle_deg.to_radians() / 2.0;
    let ramp = PI - 2.0 * half_flat;
    let mut u = (phi - PI / 2.0).rem_euclid(2.0 * PI);
    if u > PI {
        u -= 2.0 * PI;
    }
    let u = u.abs();
    if u <= half_flat {
        1.0
    } else if u >= PI - half_flat {
        -1.0
    } else {
        1.0 - 2.0 * (u - half_flat) / ramp
    }
}

fn phase_shapes(theta_e: f64, flat: f64) -> [f64; 3] {
    [0.0, 1.0, 2.0].map(|k| emf_shape(theta_e - k * 2.0 * PI / 3.0, flat))
}

pub fn sector(theta_e: f64) -> usize {
    (((theta_e - PI / 6.0).rem_euclid(2.0 * PI)) / (PI / 3.0)) as usize % 6
}

fn terminals(m: &BldcParams, st: &MotorState, v_dc: f64) -> [Terminal; 3] {
    let (up, low) = SECTOR_PAIRS[sector(st.theta_e)];
    let off = 3 - up - low;
    let mut term = [Terminal::Open; 3];
    term[up] = Terminal::Rail(v_dc);
    term[low] = Terminal::Rail(0.0);
    let i_off = st.i_phase[off];
    term[off] = if i_off > 0.0 {
        Terminal::Rail(0.0)
    } else if i_off < 0.0 {
        Terminal::Rail(v_dc)
    } else {
        // open-circuit voltage of the idle phase; its diode conducts once
        // that leaves the rails
        let k = m.k_t / 2.0 * st.omega_m;
        let e = phase_shapes(st.theta_e, m.flat_angle).map(|s| k * s);
        let v_n = (v_dc - e[up] - e[low]) / 2.0;
        let v_open = v_n + e[off];
        if v_open > v_dc {
            Terminal::Rail(v_dc)
        } else if v_open < 0.0 {
            Terminal::Rail(0.0)
        } else {
            Terminal::Open
        }
    };
    term
}

struct MotorRates {
    d_theta: f64,
    d_omega: f64,
    d_i: [f64; 3],
}

fn motor_rates(m: &BldcParams, st: &MotorState, term: &[Terminal; 3]) -> MotorRates {
    let k = m.k_t / 2.0;
    let shapes = phase_shapes(st.theta_e, m.flat_angle);
    let e = shapes.map(|s| k * st.omega_m * s);
    let i = st.i_phase;
    let mut d_i = [0.0; 3];
    let connected: Vec<usize> = (0..3).filter(|&x| term[x] != Terminal::Open).collect();
    let volt = |x: usize| match term[x] {
        Terminal::Rail(v) => v,
        Terminal::Open => 0.0,
    };
    if connected.len() == 3 {
        let v_n = (0..3).map(|x| volt(x) - e[x]).sum::<f64>() / 3.0;
        for x in 0..3 {
            d_i[x] = (volt(x) - v_n - m.r_phase * i[x] - e[x]) / m.l_phase;
        }
    } else {
        let (p, q) = (connected[0], connected[1]);
        let di = (volt(p) - volt(q) - m.r_phase * (i[p] - i[q]) - e[p] + e[q]) / (2.0 * m.l_phase);
        d_i[p] = di;
        d_i[q] = -di;
    }
    let torque = k * (0..3).map(|x| shapes[x] * i[x]).sum::<f64>();
    MotorRates {
        d_theta: f64::from(m.pole_pairs) * st.omega_m,
        d_omega: (torque - m.load_torque - m.damping * st.omega_m) / m.inertia,
        d_i,
    }
}

fn advance(st: &MotorState, r: &MotorRates, dt: f64) -> MotorState {
    let mut i_phase = st.i_phase;
    for (i, d) in i_phase.iter_mut().zip(&r.d_i) {
        *i += dt * d;
    }
    MotorState { theta_e: st.theta_e + dt * r.d_theta, omega_m: st.omega_m + dt * r.d_omega, i_phase }
}

/// Advance the motor by `dt` at a constant bus voltage. The inverter state
/// is frozen over the step; a freewheeling current that would change sign is
/// extinguished at zero.
pub fn motor_substep(m: &BldcParams, st: &MotorState, v_dc: f64, dt: f64) -> MotorState {
    let term = terminals(m, st, v_dc);
    let k1 = motor_rates(m, st, &term);
    let predicted = advance(st, &k1, dt);
    let k2 = motor_rates(m, &predicted, &term);
    let avg = MotorRates {
        d_theta: 0.5 * (k1.d_theta + k2.d_theta),
        d_omega: 0.5 * (k1.d_omega + k2.d_omega),
        d_i: [0, 1, 2].map(|x| 0.5 * (k1.d_i[x] + k2.d_i[x])),
    };
    let mut next = advance(st, &avg, dt);
    next.theta_e = next.theta_e.rem_euclid(2.0 * PI);

    let (up, low) = SECTOR_PAIRS[sector(st.theta_e)];
    let off = 3 - up - low;
    let before = st.i_phase[off];
    let after = next.i_phase[off];
    if before * after < 0.0 || (before == 0.0 && term[off] == Terminal::Open) {
        next.i_phase[off] = 0.0;
    }
    // restore the zero-sum constraint exactly on the conducting pair
    let residual = next.i_phase.iter().sum::<f64>();
    if next.i_phase[off] == 0.0 {
        next.i_phase[up] -= residual / 2.0;
        next.i_phase[low] -= residual / 2.0;
    } else {
        for x in &mut next.i_phase {
            *x -= residual / 3.0;
        }
    }
    next
}

/// Current drawn from the dc link by the inverter: the sum of the phase
/// currents tied to the positive rail.
pub fn inverter_dc_current(m: &BldcParams, st: &MotorState, v_dc: f64) -> f64 {
    let term = terminals(m, st, v_dc);
    let (up, _) = SECTOR_PAIRS[sector(st.theta_e)];
    (0..3)
        .filter(|&x| x == up || (term[x] == Terminal::Rail(v_dc) && st.i_phase[x] != 0.0))
        .map(|x| st.i_phase[x])
        .sum()
}

/// Load current at time `t`.
pub fn load_current(load: &LoadModel, t: f64, v_dc: f64, motor: Option<&MotorState>) -> f64 {
    match load {
        LoadModel::ConstantCurrent { i0 } => *i0,
        LoadModel::PeriodicHarmonics { i0, beta, components } => {
            i0 + components.iter().map(|c| c.magnitude * (f64::from(c.order) * beta * t + c.phase).cos()).sum::<f64>()
        }
        LoadModel::SixStepBldc(m) => motor.map_or(0.0, |st| inverter_dc_current(m, st, v_dc)),
    }
}

// ---------------------------------------------------------------------------
// boost

fn bus_voltage(p: &BoostParams, i_l: f64, v_c: f64, on: bool, i_load: f64) -> f64 {
    let i_c = if on { -i_load } else { i_l - i_load };
    v_c + p.esr * i_c
}

/// Trapezoidal step of the linear LC network with the load current known at
/// both ends of the interval.
fn lc_trapezoid(p: &BoostParams, i0: f64, v0: f64, on: bool, load0: f64, load1: f64, h: f64) -> (f64, f64) {
    let (l, c) = (p.inductance, p.capacitance);
    // x' = A x + b
    let (a, b0, b1) = if on {
        ([[-p.r_on / l, 0.0], [0.0, 0.0]], [p.v_in / l, -load0 / c], [p.v_in / l, -load1 / c])
    } else {
        (
            [[-p.esr / l, -1.0 / l], [1.0 / c, 0.0]],
            [(p.v_in + p.esr * load0) / l, -load0 / c],
            [(p.v_in + p.esr * load1) / l, -load1 / c],
        )
    };
    let hh = h / 2.0;
    let rhs = [
        i0 + hh * (a[0][0] * i0 + a[0][1] * v0) + hh * (b0[0] + b1[0]),
        v0 + hh * (a[1][0] * i0 + a[1][1] * v0) + hh * (b0[1] + b1[1]),
    ];
    let m = [[1.0 - hh * a[0][0], -hh * a[0][1]], [-hh * a[1][0], 1.0 - hh * a[1][1]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let i1 = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
    let v1 = (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det;
    if i1 < 0.0 {
        // diode blocks: the inductor empties and stays empty
        let i_avg = i0.max(0.0) / 2.0;
        let v1 = v0 + h * (i_avg - 0.5 * (load0 + load1)) / c;
        return (0.0, v1);
    }
    (i1, v1)
}

struct Extremes {
    i_min: f64,
    i_max: f64,
    v_min: f64,
    v_max: f64,
}

impl Extremes {
    fn new() -> Self {
        Self { i_min: f64::INFINITY, i_max: f64::NEG_INFINITY, v_min: f64::INFINITY, v_max: f64::NEG_INFINITY }
    }

    fn see(&mut self, i: f64, v: f64) {
        self.i_min = self.i_min.min(i);
        self.i_max = self.i_max.max(i);
        self.v_min = self.v_min.min(v);
        self.v_max = self.v_max.max(v);
    }
}

/// Advance one PWM period at `duty`.
pub fn sample_step(p: &BoostParams, load: &LoadModel, st: &PlantState, duty: f64) -> Result<(PlantState, Measurement)> {
    let mut diag = Diagnostics::default();
    sample_step_with(p, load, st, duty, &mut diag)
}

/// [`sample_step`] that also accumulates diagnostics.
pub fn sample_step_with(
    p: &BoostParams,
    load: &LoadModel,
    st: &PlantState,
    duty: f64,
    diag: &mut Diagnostics,
) -> Result<(PlantState, Measurement)> {
    if !(0.0..=1.0).contains(&duty) {
        return input(format!("duty must be in [0,1], got {duty}"));
    }
    let period = p.period();
    let n = p.substeps_per_period as usize;
    let h = period / n as f64;
    let t_on = duty * period;

    let mut s = *st;
    let mut ext = Extremes::new();
    let bldc = match load {
        LoadModel::SixStepBldc(m) => Some(m),
        _ => None,
    };

    for k in 0..n {
        let a = k as f64 * h;
        let b = a + h;
        let mut pieces = [(a, b, a < t_on), (b, b, false)];
        if t_on > a && t_on < b {
            pieces = [(a, t_on, true), (t_on, b, false)];
        }
        for (start, end, on) in pieces {
            let dt = end - start;
            if dt <= 0.0 {
                continue;
            }
            let t0 = st.t + start;
            // bus voltage seen by the inverter at the start of the piece
            let mut load0 = load_current(load, t0, s.v_c, s.motor.as_ref());
            let mut v_dc0 = bus_voltage(p, s.i_l, s.v_c, on, load0);
            if bldc.is_some() {
                load0 = load_current(load, t0, v_dc0, s.motor.as_ref());
                v_dc0 = bus_voltage(p, s.i_l, s.v_c, on, load0);
            }
            ext.see(s.i_l, v_dc0);

            let motor1 = match (bldc, s.motor.as_ref()) {
                (Some(m), Some(ms)) => {
                    if m.k_t * ms.omega_m.abs() > v_dc0 {
                        diag.stall_time += dt;
                    }
                    Some(motor_substep(m, ms, v_dc0, dt))
                }
                _ => s.motor,
            };
            let load1 = load_current(load, t0 + dt, v_dc0, motor1.as_ref());
            let (i1, v1) = lc_trapezoid(p, s.i_l, s.v_c, on, load0, load1, dt);
            s.i_l = i1;
            s.v_c = v1.max(0.0);
            s.motor = motor1;
            ext.see(s.i_l, bus_voltage(p, s.i_l, s.v_c, on, load1));
        }
    }
    s.t = st.t + period;

    let mut i_load = load_current(load, s.t, s.v_c, s.motor.as_ref());
    let mut v_dc = bus_voltage(p, s.i_l, s.v_c, false, i_load);
    if bldc.is_some() {
        i_load = load_current(load, s.t, v_dc, s.motor.as_ref());
        v_dc = bus_voltage(p, s.i_l, s.v_c, false, i_load);
    }
    let meas = Measurement {
        v_dc,
        i_l: s.i_l,
        i_load,
        i_l_min: ext.i_min,
        i_l_max: ext.i_max,
        v_dc_min: ext.v_min,
        v_dc_max: ext.v_max,
    };
    Ok((s, meas))
}

/// Plant instance: parameters, load and evolving state.
#[derive(Clone, Debug)]
pub struct Plant {
    pub params: BoostParams,
    pub load: LoadModel,
    pub state: PlantState,
    pub diagnostics: Diagnostics,
}

impl Plant {
    pub fn new(params: BoostParams, load: LoadModel) -> Result<Self> {
        params.validate()?;
        load.validate()?;
        let state = PlantState::initial(&params, &load);
        Ok(Self { params, load, state, diagnostics: Diagnostics::default() })
    }

    pub fn step(&mut self, duty: f64) -> Result<Measurement> {
        let (next, meas) = sample_step_with(&self.params, &self.load, &self.state, duty, &mut self.diagnostics)?;
        self.state = next;
        Ok(meas)
    }

    /// Mechanical speed in rpm when a motor load is attached.
    pub fn motor_rpm(&self) -> Option<f64> {
        self.state.motor.map(|m| m.rpm())
    }
}
