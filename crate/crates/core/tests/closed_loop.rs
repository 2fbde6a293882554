use std::f64::consts::PI;

use hfboost::controller::HarmonicGains;
use hfboost::scenario::{simulate, summarize, FeedbackMode, ScenarioConfig};
use hfboost::tuner::{objective_eval, Target, INFEASIBLE};
use hfboost::Error;

/// Largest deviation of the one-ripple-period running mean of v_dc from
/// v_ref at or after `from` seconds.
fn worst_mean_error(cfg: &ScenarioConfig, v: &[f64], from: f64) -> f64 {
    let f = cfg.plant.f_pwm;
    let w = (f / 400.0).round() as usize;
    let start = (from * f) as usize;
    (start..v.len() - w)
        .map(|k| (v[k..k + w].iter().sum::<f64>() / w as f64 - cfg.controller.v_ref).abs())
        .fold(0.0, f64::max)
}

#[test]
fn integral_action_tracks_for_negative_gains_only() {
    let base = ScenarioConfig::paper_default();
    for k3 in [-0.3, -1.0, -3.0] {
        let mut cfg = base.clone();
        cfg.controller.k3 = k3;
        let out = simulate(&cfg, FeedbackMode::Off).unwrap();
        let err = worst_mean_error(&cfg, &out.trace.v_dc, 0.5);
        assert!(err < 0.005 * cfg.controller.v_ref, "k3 = {k3}: {err}");
    }
    for k3 in [0.3, 1.0] {
        let mut cfg = base.clone();
        cfg.controller.k3 = k3;
        let out = simulate(&cfg, FeedbackMode::Off).unwrap();
        let err = worst_mean_error(&cfg, &out.trace.v_dc, 0.8);
        assert!(err > 0.05 * cfg.controller.v_ref, "k3 = {k3} should lose the reference: {err}");
    }
}

#[test]
fn duty_stays_in_limits_in_every_mode() {
    let cfg = ScenarioConfig::paper_default();
    for mode in [FeedbackMode::Off, FeedbackMode::Voltage, FeedbackMode::VoltageCurrent] {
        let out = simulate(&cfg, mode).unwrap();
        assert!(out.trace.duty.iter().all(|d| (0.0..=0.8).contains(d)));
    }
}

#[test]
fn zero_gain_objective_is_the_baseline_metric() {
    let cfg = ScenarioConfig::paper_default();
    let off = simulate(&cfg, FeedbackMode::Off).unwrap();
    let s = summarize(&cfg, &off).unwrap();
    assert_eq!(objective_eval(&cfg, &[0.0; 6], Target::Voltage), s.v_dc.p2p_lowpass);
}

#[test]
fn published_voltage_gains_beat_the_baseline() {
    let cfg = ScenarioConfig::paper_default();
    let base = objective_eval(&cfg, &[0.0; 6], Target::Voltage);
    let published = objective_eval(&cfg, &HarmonicGains::PUBLISHED_VOLTAGE.to_array(), Target::Voltage);
    assert!(published < base, "{published} vs {base}");
}

#[test]
fn destabilizing_gains_are_infeasible() {
    let cfg = ScenarioConfig::paper_default();
    assert_eq!(objective_eval(&cfg, &[10.0; 6], Target::Voltage), INFEASIBLE);
    assert_eq!(objective_eval(&cfg, &[10.0; 6], Target::Current), INFEASIBLE);
}

#[test]
fn divergence_reports_time_and_partial_trace() {
    let mut cfg = ScenarioConfig::paper_default();
    // the precharged bus alone is above 5 v_ref
    cfg.controller.v_ref = 2.0;
    cfg.sim.duration = 0.01;
    let fail = simulate(&cfg, FeedbackMode::Off).unwrap_err();
    assert!(matches!(fail.error, Error::Divergence { .. }), "{:?}", fail.error);
    assert!(!fail.partial.is_empty());
}

#[test]
fn runs_are_reproducible_and_noise_is_seeded() {
    let mut cfg = ScenarioConfig::paper_default();
    cfg.sim.duration = 0.05;
    let a = simulate(&cfg, FeedbackMode::Voltage).unwrap().trace;
    let b = simulate(&cfg, FeedbackMode::Voltage).unwrap().trace;
    assert_eq!(a, b);
    cfg.sim.noise_stddev.v_dc = 0.01;
    let c = simulate(&cfg, FeedbackMode::Voltage).unwrap().trace;
    let d = simulate(&cfg, FeedbackMode::Voltage).unwrap().trace;
    assert_eq!(c, d);
    assert_ne!(a.v_dc, c.v_dc);
    cfg.sim.seed = 1;
    let e = simulate(&cfg, FeedbackMode::Voltage).unwrap().trace;
    assert_ne!(c.v_dc, e.v_dc);
}

#[test]
fn observer_frequency_follows_motor_speed() {
    let cfg = ScenarioConfig::paper_default();
    let out = simulate(&cfg, FeedbackMode::Off).unwrap();
    let rpm = out.final_rpm.unwrap();
    let expect = 2.0 * PI * rpm / 60.0 * 4.0 * 6.0;
    let beta = *out.trace.beta.last().unwrap();
    // retuned every 10 ms, so allow the speed drift within one interval
    assert!((beta - expect).abs() < 0.01 * expect, "{beta} vs {expect}");
    assert!((rpm - 1000.0).abs() < 30.0);
}
