//! Simulation-in-the-loop gain search.
//!
//! Harmonic feedback gains are chosen one at a time: sweep a grid with the
//! other gains frozen, refine around the best grid point by golden-section
//! search, keep the minimizer, move on to the next gain. Each objective value
//! comes from a full closed-loop simulation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Column, P2pMode, Window};
use crate::controller::HarmonicGains;
use crate::error::{input, Error, Result};
use crate::scenario::{self, FeedbackMode, ScenarioConfig};

/// Objective value of a run that diverged, lost regulation, or could not be
/// evaluated.
pub const INFEASIBLE: f64 = f64::INFINITY;

/// Steady-state mean v_dc further than this fraction from v_ref counts as
/// lost regulation.
pub const REGULATION_BAND: f64 = 0.1;

/// Lost regulation also when the duty sits on a limit for more than this
/// fraction of the steady-state samples. Saturation bounds v_dc well below
/// the divergence threshold, so an unstable loop shows up here instead.
pub const MAX_SATURATED_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Voltage,
    Current,
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voltage" => Ok(Target::Voltage),
            "current" => Ok(Target::Current),
            _ => input(format!("unknown target '{s}' (voltage|current)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneSpec {
    pub target: Target,
    /// Indices into (z2, ..., z7), searched in this order.
    pub gain_order: [usize; 6],
    pub intervals: [(f64, f64); 6],
    pub grid_points: usize,
    pub passes: usize,
    /// Golden-section iterations after each grid sweep.
    pub golden_iterations: usize,
    /// Gains before the first sweep.
    pub start: [f64; 6],
}

impl TuneSpec {
    pub fn new(target: Target) -> Self {
        Self {
            target,
            gain_order: [0, 1, 2, 3, 4, 5],
            intervals: [(-1.0, 1.0); 6],
            grid_points: 21,
            passes: 2,
            golden_iterations: 12,
            start: [0.0; 6],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 6];
        for &g in &self.gain_order {
            if g >= 6 || seen[g] {
                return input("gain_order must be a permutation of 0..6");
            }
            seen[g] = true;
        }
        if self.intervals.iter().any(|&(lo, hi)| !(lo < hi)) {
            return input("each search interval needs lo < hi");
        }
        if self.grid_points < 5 {
            return input("grid_points must be >= 5");
        }
        if self.passes < 1 {
            return input("passes must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub pass: usize,
    /// Index of the gain being searched (0 = z2).
    pub gain: usize,
    pub k: [f64; 6],
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub k: [f64; 6],
    pub objective: f64,
    /// Best objective after each one-dimensional search, in order.
    pub sweep_bests: Vec<f64>,
    pub log: Vec<Evaluation>,
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    // (value, objective): lower objective wins, ties go to the value nearer 0
    a.1 < b.1 || (a.1 == b.1 && a.0.abs() < b.0.abs())
}

/// Coordinate search over the six gains with an arbitrary objective.
pub fn coordinate_search<F>(spec: &TuneSpec, objective: F) -> Result<SearchResult>
where
    F: Fn(&[f64; 6]) -> f64 + Sync,
{
    spec.validate()?;
    let mut log = Vec::new();
    let mut k = spec.start;
    let mut best = objective(&k);
    log.push(Evaluation { pass: 0, gain: spec.gain_order[0], k, objective: best });
    let mut sweep_bests = Vec::new();

    for pass in 0..spec.passes {
        for &gi in &spec.gain_order {
            let (lo, hi) = spec.intervals[gi];
            let step = (hi - lo) / (spec.grid_points - 1) as f64;
            let grid: Vec<f64> = (0..spec.grid_points).map(|j| lo + j as f64 * step).collect();
            let with = |v: f64| {
                let mut kk = k;
                kk[gi] = v;
                kk
            };
            let values: Vec<f64> = grid.par_iter().map(|&v| objective(&with(v))).collect();
            for (&v, &o) in grid.iter().zip(&values) {
                log.push(Evaluation { pass, gain: gi, k: with(v), objective: o });
            }

            let mut champion = (k[gi], best);
            let mut grid_best: Option<(usize, f64)> = None;
            for (j, (&v, &o)) in grid.iter().zip(&values).enumerate() {
                if better((v, o), champion) {
                    champion = (v, o);
                }
                if grid_best.is_none_or(|(i, ob)| better((v, o), (grid[i], ob))) {
                    grid_best = Some((j, o));
                }
            }

            if let Some((j, _)) = grid_best.filter(|&(_, o)| o.is_finite()) {
                let mut a = grid[j.saturating_sub(1)];
                let mut b = grid[(j + 1).min(grid.len() - 1)];
                let r = (5f64.sqrt() - 1.0) / 2.0;
                let mut c = b - r * (b - a);
                let mut d = a + r * (b - a);
                let mut fc = objective(&with(c));
                let mut fd = objective(&with(d));
                log.push(Evaluation { pass, gain: gi, k: with(c), objective: fc });
                log.push(Evaluation { pass, gain: gi, k: with(d), objective: fd });
                for _ in 0..spec.golden_iterations {
                    if fc <= fd {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - r * (b - a);
                        fc = objective(&with(c));
                        log.push(Evaluation { pass, gain: gi, k: with(c), objective: fc });
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + r * (b - a);
                        fd = objective(&with(d));
                        log.push(Evaluation { pass, gain: gi, k: with(d), objective: fd });
                    }
                }
                for cand in [(c, fc), (d, fd)] {
                    if better(cand, champion) {
                        champion = cand;
                    }
                }
            }
            k[gi] = champion.0;
            best = champion.1;
            sweep_bests.push(best);
        }
    }

    if !best.is_finite() {
        return Err(Error::Search(format!("all {} evaluations were infeasible", log.len())));
    }
    Ok(SearchResult { k, objective: best, sweep_bests, log })
}

/// Steady-state ripple of the scenario with harmonic gains `k` on the
/// target loop: lowpass peak-to-peak v_dc for the voltage loop, raw
/// peak-to-peak i_L for the current loop (with the scenario's voltage gains
/// active). Failed or diverging runs score [`INFEASIBLE`].
pub fn objective_eval(cfg: &ScenarioConfig, k: &[f64; 6], target: Target) -> f64 {
    let mut cfg = cfg.clone();
    let gains = HarmonicGains::from_array(*k);
    let mode = match target {
        Target::Voltage => {
            cfg.controller.kv = gains;
            FeedbackMode::Voltage
        }
        Target::Current => {
            cfg.controller.ki = gains;
            FeedbackMode::VoltageCurrent
        }
    };
    let Ok(out) = scenario::simulate(&cfg, mode) else {
        return INFEASIBLE;
    };
    if !regulated(&cfg, &out.trace).unwrap_or(false) {
        return INFEASIBLE;
    }
    ripple_objective(&cfg, &out.trace, target).unwrap_or(INFEASIBLE)
}

/// Whether the steady-state part of `trace` holds v_ref without living on
/// the duty limits.
pub fn regulated(cfg: &ScenarioConfig, trace: &analysis::Trace) -> Result<bool> {
    let (a, b) = Window::steady_state(trace).indices(trace)?;
    let n = (b - a + 1) as f64;
    let mean = trace.v_dc[a..=b].iter().sum::<f64>() / n;
    let c = &cfg.controller;
    let saturated = trace.duty[a..=b].iter().filter(|&&d| d <= c.duty_min || d >= c.duty_max).count() as f64;
    Ok((mean - c.v_ref).abs() <= REGULATION_BAND * c.v_ref && saturated <= MAX_SATURATED_FRACTION * n)
}

/// The ripple metric the tuner minimizes, computed from a finished trace.
pub fn ripple_objective(cfg: &ScenarioConfig, trace: &analysis::Trace, target: Target) -> Result<f64> {
    let w = Window::steady_state(trace);
    let f0 = cfg.observer.nominal_hz()?;
    let (col, mode) = match target {
        Target::Voltage => (Column::VDc, P2pMode::Lowpass),
        Target::Current => (Column::IL, P2pMode::Raw),
    };
    let v = analysis::peak_to_peak(trace, col, &w, mode, f0, cfg.plant.f_pwm)?;
    Ok(if v.is_finite() { v } else { INFEASIBLE })
}

/// Tuned-gains report, consumable as controller `Kv` / `Ki`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedGains {
    pub target: Target,
    #[serde(rename = "K")]
    pub k: HarmonicGains,
    pub objective: f64,
    pub baseline: f64,
    pub reduction: f64,
}

pub fn tune(cfg: &ScenarioConfig, spec: &TuneSpec) -> Result<(TunedGains, SearchResult)> {
    let result = coordinate_search(spec, |k| objective_eval(cfg, k, spec.target))?;
    let baseline = objective_eval(cfg, &[0.0; 6], spec.target);
    if !baseline.is_finite() {
        return Err(Error::Search("baseline run is infeasible".into()));
    }
    let report = TunedGains {
        target: spec.target,
        k: HarmonicGains::from_array(result.k),
        objective: result.objective,
        baseline,
        reduction: analysis::reduction_ratio(baseline, result.objective)?,
    };
    Ok((report, result))
}
