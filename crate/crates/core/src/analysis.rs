//! Ripple measurement on sampled traces and closed-form boost design
//! calculators.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Uniformly sampled simulation record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub t: Vec<f64>,
    pub v_dc: Vec<f64>,
    pub i_l: Vec<f64>,
    pub duty: Vec<f64>,
    pub zv: Vec<[f64; 7]>,
    pub zi: Vec<[f64; 7]>,
    pub i_load: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Time,
    VDc,
    IL,
    Duty,
    /// Voltage-observer state, 1-based index.
    Zv(usize),
    /// Current-observer state, 1-based index.
    Zi(usize),
    ILoad,
    Beta,
}

impl Column {
    pub const ALL_NAMES: &'static str = "t, v_dc, i_L, duty, zv1..zv7, zi1..zi7, i_load, beta";

    /// Header used in trace files, in column order.
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = ["t", "v_dc", "i_L", "duty"].iter().map(|s| s.to_string()).collect();
        h.extend((1..=7).map(|i| format!("zv{i}")));
        h.extend((1..=7).map(|i| format!("zi{i}")));
        h.push("i_load".into());
        h.push("beta".into());
        h
    }
}

impl FromStr for Column {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let idx = |rest: &str| rest.parse::<usize>().ok().filter(|i| (1..=7).contains(i));
        Ok(match s {
            "t" => Column::Time,
            "v_dc" => Column::VDc,
            "i_L" | "i_l" => Column::IL,
            "duty" => Column::Duty,
            "i_load" => Column::ILoad,
            "beta" => Column::Beta,
            _ => {
                if let Some(i) = s.strip_prefix("zv").and_then(idx) {
                    Column::Zv(i)
                } else if let Some(i) = s.strip_prefix("zi").and_then(idx) {
                    Column::Zi(i)
                } else {
                    return input(format!("unknown column '{s}', expected one of {}", Column::ALL_NAMES));
                }
            }
        })
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Time => write!(f, "t"),
            Column::VDc => write!(f, "v_dc"),
            Column::IL => write!(f, "i_L"),
            Column::Duty => write!(f, "duty"),
            Column::Zv(i) => write!(f, "zv{i}"),
            Column::Zi(i) => write!(f, "zi{i}"),
            Column::ILoad => write!(f, "i_load"),
            Column::Beta => write!(f, "beta"),
        }
    }
}

impl Trace {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            t: Vec::with_capacity(n),
            v_dc: Vec::with_capacity(n),
            i_l: Vec::with_capacity(n),
            duty: Vec::with_capacity(n),
            zv: Vec::with_capacity(n),
            zi: Vec::with_capacity(n),
            i_load: Vec::with_capacity(n),
            beta: Vec::with_capacity(n),
        }
    }

    /// Trace holding a single signal column (others zero), handy for
    /// analysing synthetic data.
    pub fn from_signal(sample_period: f64, column: Column, values: &[f64]) -> Self {
        let n = values.len();
        let mut tr = Self {
            t: (0..n).map(|k| k as f64 * sample_period).collect(),
            v_dc: vec![0.0; n],
            i_l: vec![0.0; n],
            duty: vec![0.0; n],
            zv: vec![[0.0; 7]; n],
            zi: vec![[0.0; 7]; n],
            i_load: vec![0.0; n],
            beta: vec![0.0; n],
        };
        for (k, &v) in values.iter().enumerate() {
            tr.set(column, k, v);
        }
        tr
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn value(&self, column: Column, k: usize) -> f64 {
        match column {
            Column::Time => self.t[k],
            Column::VDc => self.v_dc[k],
            Column::IL => self.i_l[k],
            Column::Duty => self.duty[k],
            Column::Zv(i) => self.zv[k][i - 1],
            Column::Zi(i) => self.zi[k][i - 1],
            Column::ILoad => self.i_load[k],
            Column::Beta => self.beta[k],
        }
    }

    fn set(&mut self, column: Column, k: usize, v: f64) {
        match column {
            Column::Time => self.t[k] = v,
            Column::VDc => self.v_dc[k] = v,
            Column::IL => self.i_l[k] = v,
            Column::Duty => self.duty[k] = v,
            Column::Zv(i) => self.zv[k][i - 1] = v,
            Column::Zi(i) => self.zi[k][i - 1] = v,
            Column::ILoad => self.i_load[k] = v,
            Column::Beta => self.beta[k] = v,
        }
    }

    /// One row in header order.
    pub fn row(&self, k: usize) -> Vec<f64> {
        let mut r = vec![self.t[k], self.v_dc[k], self.i_l[k], self.duty[k]];
        r.extend_from_slice(&self.zv[k]);
        r.extend_from_slice(&self.zi[k]);
        r.push(self.i_load[k]);
        r.push(self.beta[k]);
        r
    }

    /// Append a row given in header order.
    pub fn push_row(&mut self, r: &[f64]) -> Result<()> {
        if r.len() != 20 {
            return Err(Error::Dimension(format!("trace row has {} fields, expected 20", r.len())));
        }
        self.t.push(r[0]);
        self.v_dc.push(r[1]);
        self.i_l.push(r[2]);
        self.duty.push(r[3]);
        let mut zv = [0.0; 7];
        zv.copy_from_slice(&r[4..11]);
        let mut zi = [0.0; 7];
        zi.copy_from_slice(&r[11..18]);
        self.zv.push(zv);
        self.zi.push(zi);
        self.i_load.push(r[18]);
        self.beta.push(r[19]);
        Ok(())
    }

    /// Sample period implied by the time column.
    pub fn sample_period(&self) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return input("trace needs at least two samples");
        }
        Ok((self.t[n - 1] - self.t[0]) / (n - 1) as f64)
    }

    /// Checks strictly increasing, uniformly spaced time stamps.
    pub fn validate(&self) -> Result<()> {
        let dt = self.sample_period()?;
        if !(dt > 0.0) {
            return input("time column must be strictly increasing");
        }
        let tol = 1e-9 * dt + 4.0 * f64::EPSILON * self.t[self.len() - 1].abs();
        for (k, w) in self.t.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > tol.max(1e-6 * dt) {
                return input(format!("non-uniform sampling at row {}", k + 1));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    /// Last 40 % of the trace.
    pub fn steady_state(trace: &Trace) -> Self {
        let t0 = trace.t.first().copied().unwrap_or(0.0);
        let t1 = trace.t.last().copied().unwrap_or(0.0);
        Self { start: t0 + 0.6 * (t1 - t0), end: t1 }
    }

    /// Inclusive index range of the samples inside the window.
    pub fn indices(&self, trace: &Trace) -> Result<(usize, usize)> {
        if trace.is_empty() {
            return input("empty trace");
        }
        let dt = trace.sample_period().unwrap_or(0.0);
        let eps = 1e-6 * dt;
        let (t0, t1) = (trace.t[0], trace.t[trace.len() - 1]);
        if !(self.start < self.end) || self.start < t0 - eps || self.end > t1 + eps {
            return input(format!("window [{}, {}] not inside trace [{t0}, {t1}]", self.start, self.end));
        }
        let first = trace.t.partition_point(|&t| t < self.start - eps);
        let last = trace.t.partition_point(|&t| t <= self.end + eps);
        if last <= first {
            return input("window holds no samples");
        }
        Ok((first, last - 1))
    }
}

impl FromStr for Window {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| Error::Input(format!("window '{s}' is not of the form a:b")))?;
        let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad window bound '{x}'")));
        Ok(Self::new(parse(a)?, parse(b)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P2pMode {
    Raw,
    Lowpass,
}

/// Zero-phase boxcar exactly one switching period wide. For an even width
/// the two end taps carry half weight so the kernel stays centred.
/// Output samples are produced only where the kernel fits in `x`.
fn switching_lowpass(x: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return x.to_vec();
    }
    let half = width / 2;
    let mut taps = vec![1.0; 2 * half + 1];
    if width.is_multiple_of(2) {
        taps[0] = 0.5;
        taps[2 * half] = 0.5;
    }
    let norm = width as f64;
    if x.len() < taps.len() {
        return Vec::new();
    }
    (half..x.len() - half)
        .map(|i| taps.iter().enumerate().map(|(j, w)| w * x[i + j - half]).sum::<f64>() / norm)
        .collect()
}

fn window_values(trace: &Trace, column: Column, window: &Window) -> Result<Vec<f64>> {
    trace.validate()?;
    let (a, b) = window.indices(trace)?;
    Ok((a..=b).map(|k| trace.value(column, k)).collect())
}

/// Max minus min over the window. `lowpass` first removes the switching
/// component with a one-period moving average.
pub fn peak_to_peak(
    trace: &Trace,
    column: Column,
    window: &Window,
    mode: P2pMode,
    fundamental_hz: f64,
    switching_hz: f64,
) -> Result<f64> {
    if !(fundamental_hz > 0.0) {
        return input("fundamental frequency must be positive");
    }
    let span = window.end - window.start;
    if span * fundamental_hz < 3.0 - 1e-9 {
        return input(format!("window of {span} s is shorter than 3 periods of {fundamental_hz} Hz"));
    }
    let x = window_values(trace, column, window)?;
    let x = match mode {
        P2pMode::Raw => x,
        P2pMode::Lowpass => {
            let dt = trace.sample_period()?;
            let width = if switching_hz > 0.0 { (1.0 / (switching_hz * dt)).round() as usize } else { 1 };
            switching_lowpass(&x, width)
        }
    };
    if x.is_empty() {
        return input("window too short for the lowpass filter");
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(hi - lo)
}

/// Ripple fundamental tracked by the observer: mean of the `beta` column
/// over the window, in Hz.
pub fn tracked_fundamental_hz(trace: &Trace, window: &Window) -> Result<f64> {
    let b = window_values(trace, Column::Beta, window)?;
    let f = b.iter().sum::<f64>() / b.len() as f64 / (2.0 * PI);
    if !(f > 0.0) || !f.is_finite() {
        return input("trace carries no positive beta over the window");
    }
    Ok(f)
}

/// Single-bin DFT magnitude `2/N |sum x[k] e^{-i 2 pi f k T}|` over the
/// longest prefix of the window holding a whole number of cycles of `f`.
pub fn spectral_mag(trace: &Trace, column: Column, f: f64, window: &Window) -> Result<f64> {
    let x = window_values(trace, column, window)?;
    let dt = trace.sample_period()?;
    if !(f > 0.0) || f >= 0.5 / dt {
        return input(format!("frequency {f} Hz outside (0, Nyquist)"));
    }
    let cycles = (x.len() as f64 * dt * f).floor();
    if cycles < 5.0 {
        return input(format!("window holds {cycles} cycles of {f} Hz, need >= 5"));
    }
    let n = ((cycles / (f * dt)).round() as usize).min(x.len());
    let w = -2.0 * PI * f * dt;
    let acc: Complex64 = x[..n].iter().enumerate().map(|(k, &v)| Complex64::from_polar(v, w * k as f64)).sum();
    Ok(2.0 * acc.norm() / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMag {
    pub n: u32,
    pub freq_hz: f64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RippleMetrics {
    pub column: String,
    pub window: [f64; 2],
    pub p2p_raw: f64,
    pub p2p_lowpass: f64,
    pub harmonics: Vec<HarmonicMag>,
    /// Magnitude at the switching frequency; `None` when that frequency is
    /// not below the trace's Nyquist limit (synchronously sampled traces).
    pub switching_mag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reduction_vs_baseline: Option<f64>,
}

/// Full ripple report for one column.
pub fn measure(
    trace: &Trace,
    column: Column,
    window: &Window,
    fundamental_hz: f64,
    switching_hz: f64,
) -> Result<RippleMetrics> {
    let p2p_raw = peak_to_peak(trace, column, window, P2pMode::Raw, fundamental_hz, switching_hz)?;
    let p2p_lowpass = peak_to_peak(trace, column, window, P2pMode::Lowpass, fundamental_hz, switching_hz)?;
    let harmonics = (1..=3)
        .map(|n| {
            let f = n as f64 * fundamental_hz;
            spectral_mag(trace, column, f, window).map(|magnitude| HarmonicMag { n, freq_hz: f, magnitude })
        })
        .collect::<Result<Vec<_>>>()?;
    let dt = trace.sample_period()?;
    let switching_mag =
        if switching_hz < 0.5 / dt { Some(spectral_mag(trace, column, switching_hz, window)?) } else { None };
    Ok(RippleMetrics {
        column: column.to_string(),
        window: [window.start, window.end],
        p2p_raw,
        p2p_lowpass,
        harmonics,
        switching_mag,
        reduction_vs_baseline: None,
    })
}

/// `(before - after) / before`.
pub fn reduction_ratio(before: f64, after: f64) -> Result<f64> {
    if !(before > 0.0) {
        return input(format!("baseline ripple must be positive, got {before}"));
    }
    Ok((before - after) / before)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricField {
    P2pRaw,
    P2pLowpass,
}

impl RippleMetrics {
    pub fn field(&self, f: MetricField) -> f64 {
        match f {
            MetricField::P2pRaw => self.p2p_raw,
            MetricField::P2pLowpass => self.p2p_lowpass,
        }
    }

    pub fn reduction_from(&self, before: &RippleMetrics, f: MetricField) -> Result<f64> {
        reduction_ratio(before.field(f), self.field(f))
    }
}

fn require_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in pairs {
        if !(v > 0.0) || !v.is_finite() {
            return input(format!("{name} must be positive, got {v}"));
        }
    }
    Ok(())
}

/// Smallest output capacitance for a peak-to-peak ripple `dv_out`:
/// `I_out D / (f_s dV)`.
pub fn min_output_capacitance(i_out_max: f64, duty: f64, f_s: f64, dv_out: f64) -> Result<f64> {
    require_positive(&[("i_out_max", i_out_max), ("f_s", f_s), ("dv_out", dv_out)])?;
    if !(0.0..1.0).contains(&duty) {
        return input(format!("duty must be in [0,1), got {duty}"));
    }
    Ok(i_out_max * duty / (f_s * dv_out))
}

/// Ripple added by the capacitor ESR: `ESR (I_out / (1 - D) + dI_L / 2)`.
pub fn esr_ripple(esr: f64, i_out_max: f64, duty: f64, di_l: f64) -> Result<f64> {
    if !(duty < 1.0) {
        return input(format!("duty must be below 1, got {duty}"));
    }
    Ok(esr * (i_out_max / (1.0 - duty) + di_l / 2.0))
}

/// Rule-of-thumb inductor ripple band, 20 % to 40 % of the output current
/// referred to the input.
pub fn inductor_ripple_estimate(i_out_max: f64, v_out: f64, v_in: f64) -> Result<(f64, f64)> {
    require_positive(&[("i_out_max", i_out_max), ("v_out", v_out), ("v_in", v_in)])?;
    let r = i_out_max * v_out / v_in;
    Ok((0.2 * r, 0.4 * r))
}

/// Peak-to-peak inductor ripple over the on-time: `V_in D / (f_s L)`.
pub fn inductor_ripple_max(v_in: f64, duty: f64, f_s: f64, inductance: f64) -> Result<f64> {
    require_positive(&[("v_in", v_in), ("f_s", f_s), ("L", inductance)])?;
    if !(0.0..1.0).contains(&duty) {
        return input(format!("duty must be in [0,1), got {duty}"));
    }
    Ok(v_in * duty / (f_s * inductance))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 18_000.0;

    fn synth(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> Trace {
        let v: Vec<f64> = (0..n).map(|k| f(k as f64 * dt)).collect();
        Trace::from_signal(dt, Column::VDc, &v)
    }

    #[test]
    fn column_names_round_trip() {
        for name in Column::header() {
            let c: Column = name.parse().unwrap();
            assert_eq!(c.to_string(), name);
        }
        assert!("zv8".parse::<Column>().is_err());
        assert!("nope".parse::<Column>().is_err());
    }

    #[test]
    fn constant_signal_has_no_ripple() {
        let tr = synth(|_| 24.0, 1.0 / FS, 2000);
        let w = Window::new(0.0, tr.t[1999]);
        for mode in [P2pMode::Raw, P2pMode::Lowpass] {
            assert_eq!(peak_to_peak(&tr, Column::VDc, &w, mode, 400.0, FS).unwrap(), 0.0);
        }
        assert!(spectral_mag(&tr, Column::VDc, 400.0, &w).unwrap() < 1e-6 * 24.0);
    }

    #[test]
    fn pure_tone_peak_to_peak() {
        let beta = 2.0 * PI * 400.0;
        let dt = 1.0 / FS;
        let n = 3 * 45 + 1;
        let tr = synth(|t| 0.1 * (beta * t).cos(), dt, n);
        let w = Window::new(0.0, tr.t[n - 1]);
        let p = peak_to_peak(&tr, Column::VDc, &w, P2pMode::Raw, 400.0, FS).unwrap();
        assert!((p - 0.2).abs() < 0.002, "{p}");
    }

    #[test]
    fn lowpass_strips_switching_square() {
        // oversampled so the 18 kHz square is resolved
        let dt = 1.0 / (FS * 20.0);
        let beta = 2.0 * PI * 400.0;
        let square = |t: f64| if (t * FS).fract() < 0.5 { 0.05 } else { -0.05 };
        let n = (0.01 / dt) as usize;
        let tr = synth(|t| 0.1 * (beta * t).cos() + square(t + 0.25 * dt), dt, n);
        let w = Window::new(0.0, tr.t[n - 1]);
        let raw = peak_to_peak(&tr, Column::VDc, &w, P2pMode::Raw, 400.0, FS).unwrap();
        let lp = peak_to_peak(&tr, Column::VDc, &w, P2pMode::Lowpass, 400.0, FS).unwrap();
        assert!((raw - 0.3).abs() < 0.015, "{raw}");
        assert!((lp - 0.2).abs() < 0.01, "{lp}");
        assert!(lp <= raw + 1e-9);
    }

    #[test]
    fn short_window_is_rejected() {
        let tr = synth(|_| 1.0, 1.0 / FS, 100);
        let w = Window::new(0.0, tr.t[99]);
        assert!(peak_to_peak(&tr, Column::VDc, &w, P2pMode::Raw, 400.0, FS).is_err());
        assert!(spectral_mag(&tr, Column::VDc, 400.0, &w).is_err());
        assert!(Window::new(0.0, 1.0).indices(&tr).is_err());
    }

    #[test]
    fn spectral_magnitude_of_tones() {
        let dt = 1.0 / FS;
        let n = 9000;
        let f = 400.0;
        let tr = synth(|t| 3.0 + 0.4 * (2.0 * PI * f * t + 1.0).cos(), dt, n);
        let w = Window::new(0.0, tr.t[n - 1]);
        let m = spectral_mag(&tr, Column::VDc, f, &w).unwrap();
        assert!((m - 0.4).abs() < 0.004, "{m}");

        let tr = synth(|t| 0.3 * (2.0 * PI * 400.0 * t).cos() + 0.1 * (2.0 * PI * 1200.0 * t + 0.3).cos(), dt, n);
        let a = spectral_mag(&tr, Column::VDc, 400.0, &w).unwrap();
        let b = spectral_mag(&tr, Column::VDc, 1200.0, &w).unwrap();
        assert!((a - 0.3).abs() < 0.006 && (b - 0.1).abs() < 0.002, "{a} {b}");
    }

    #[test]
    fn capacitance_calculator() {
        let c = min_output_capacitance(2.65, 0.55, 18_000.0, 0.24).unwrap();
        assert!((c - 337.4e-6).abs() < 0.1e-6, "{c}");
        let c = min_output_capacitance(1.0, 0.5, 1000.0, 0.5).unwrap();
        assert!((c - 1000e-6).abs() < 1e-15);
        let a = min_output_capacitance(2.0, 0.3, 1000.0, 0.1).unwrap();
        let b = min_output_capacitance(2.0, 0.3, 2000.0, 0.1).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
        assert!(min_output_capacitance(0.0, 0.5, 1.0, 1.0).is_err());
        assert!(min_output_capacitance(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn esr_calculator() {
        let v = esr_ripple(0.1, 2.65, 0.55, 1.28).unwrap();
        assert!((v - 0.6529).abs() < 1e-4, "{v}");
        assert_eq!(esr_ripple(0.0, 2.65, 0.55, 1.28).unwrap(), 0.0);
        assert!((esr_ripple(0.1, 0.0, 0.5, 2.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(esr_ripple(0.1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn inductor_calculators() {
        let (lo, hi) = inductor_ripple_estimate(2.65, 24.0, 13.9).unwrap();
        assert!((lo - 0.915).abs() < 1e-3 && (hi - 1.830).abs() < 1e-3);
        assert_eq!(hi, 2.0 * lo);
        let (lo, hi) = inductor_ripple_estimate(1.0, 1.0, 1.0).unwrap();
        assert!((lo - 0.2).abs() < 1e-15 && (hi - 0.4).abs() < 1e-15);

        let di = inductor_ripple_max(13.9, 0.55, 18_000.0, 0.00033).unwrap();
        assert!((di - 1.287).abs() < 1e-3, "{di}");
        assert_eq!(inductor_ripple_max(13.9, 0.0, 18_000.0, 0.00033).unwrap(), 0.0);
        let a = inductor_ripple_max(10.0, 0.4, 1e4, 1e-3).unwrap();
        let b = inductor_ripple_max(10.0, 0.4, 1e4, 2e-3).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
        assert!(inductor_ripple_max(10.0, 0.4, 1e4, 0.0).is_err());
    }

    #[test]
    fn reduction_ratios() {
        assert!((reduction_ratio(0.37, 0.17).unwrap() - 0.5405).abs() < 1e-4);
        assert!((reduction_ratio(1.688, 1.156).unwrap() - 0.3152).abs() < 1e-4);
        assert_eq!(reduction_ratio(0.5, 0.5).unwrap(), 0.0);
        assert!(reduction_ratio(0.0, 0.1).is_err());
    }

    #[test]
    fn window_parsing() {
        let w: Window = "0.6:1.0".parse().unwrap();
        assert_eq!(w, Window::new(0.6, 1.0));
        assert!("0.6".parse::<Window>().is_err());
        assert!("a:b".parse::<Window>().is_err());
    }
}
