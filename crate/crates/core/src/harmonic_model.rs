//! Seventh-order autonomous model of a periodic signal: a dc level plus three
//! harmonics of a fundamental `beta`, each carried by a rotating
//! cosine/sine state pair.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::numerics::Matrix;

pub const ORDER: usize = 7;
pub const HARMONICS: usize = 3;

/// Harmonic state `(dc, c1, s1, c2, s2, c3, s3)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector7(pub [f64; ORDER]);

impl StateVector7 {
    pub fn dc(value: f64) -> Self {
        let mut x = [0.0; ORDER];
        x[0] = value;
        Self(x)
    }

    /// Cosine/sine pair of harmonic `n` (1-based).
    pub fn pair(&self, n: usize) -> (f64, f64) {
        (self.0[2 * n - 1], self.0[2 * n])
    }

    /// Amplitude of harmonic `n` (1-based).
    pub fn amplitude(&self, n: usize) -> f64 {
        let (c, s) = self.pair(n);
        c.hypot(s)
    }

    /// `G x`: the modeled signal value.
    pub fn output(&self) -> f64 {
        let x = &self.0;
        x[0] + x[1] + x[3] + x[5]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for StateVector7 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub magnitude: f64,
    /// Radians in (-pi, pi].
    pub phase: f64,
}

/// `v(t) = average + sum_n b_n cos(n beta t + phi_n)` for n = 1..3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicDecomposition {
    pub average: f64,
    pub harmonics: [Harmonic; HARMONICS],
    pub beta: f64,
}

impl HarmonicDecomposition {
    pub fn new(average: f64, harmonics: [(f64, f64); HARMONICS], beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return input(format!("beta must be positive, got {beta}"));
        }
        let mut hs = [Harmonic { magnitude: 0.0, phase: 0.0 }; HARMONICS];
        for (h, &(b, phi)) in hs.iter_mut().zip(&harmonics) {
            if !(b >= 0.0) || !b.is_finite() || !phi.is_finite() {
                return input(format!("harmonic ({b}, {phi}) must have finite magnitude >= 0"));
            }
            *h = Harmonic { magnitude: b, phase: normalize_phase(phi) };
        }
        Ok(Self { average, harmonics: hs, beta })
    }

    /// Closed-form signal value at time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.average
            + self
                .harmonics
                .iter()
                .enumerate()
                .map(|(i, h)| h.magnitude * ((i + 1) as f64 * self.beta * t + h.phase).cos())
                .sum::<f64>()
    }
}

/// Wrap an angle into (-pi, pi].
pub fn normalize_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Continuous generator: zero dc row and blocks `[0, -n beta; n beta, 0]`.
pub fn build_s(beta: f64) -> Result<Matrix> {
    if !(beta > 0.0) || !beta.is_finite() {
        return input(format!("beta must be positive, got {beta}"));
    }
    let mut s = Matrix::zeros(ORDER, ORDER);
    for n in 1..=HARMONICS {
        let w = n as f64 * beta;
        let (c, sn) = (2 * n - 1, 2 * n);
        s[(c, sn)] = -w;
        s[(sn, c)] = w;
    }
    Ok(s)
}

/// Output map `G = [1 1 0 1 0 1 0]`.
pub fn output_map() -> Matrix {
    Matrix::row(&[1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
}

/// Largest admissible `beta * T`: the third harmonic must stay below pi.
pub const MAX_BETA_T: f64 = PI / 3.0;

pub(crate) fn check_sampling(beta: f64, t: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return input(format!("beta must be positive, got {beta}"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return input(format!("sample period must be >= 0, got {t}"));
    }
    if beta * t >= MAX_BETA_T {
        return Err(Error::Input(format!("beta*T = {:.4} aliases the third harmonic (limit pi/3)", beta * t)));
    }
    Ok(())
}

/// Closed-form `e^{S T}`: 1 for the dc state and rotation blocks
/// `[cos n beta T, -sin n beta T; sin n beta T, cos n beta T]`.
pub fn discretize(beta: f64, t: f64) -> Result<Matrix> {
    check_sampling(beta, t)?;
    let mut sd = Matrix::identity(ORDER);
    for n in 1..=HARMONICS {
        let (s, c) = (n as f64 * beta * t).sin_cos();
        let (i, j) = (2 * n - 1, 2 * n);
        sd[(i, i)] = c;
        sd[(i, j)] = -s;
        sd[(j, i)] = s;
        sd[(j, j)] = c;
    }
    Ok(sd)
}

pub fn state_from_harmonics(h: &HarmonicDecomposition) -> StateVector7 {
    let mut x = [0.0; ORDER];
    x[0] = h.average;
    for (i, hn) in h.harmonics.iter().enumerate() {
        let (s, c) = hn.phase.sin_cos();
        x[2 * i + 1] = hn.magnitude * c;
        x[2 * i + 2] = hn.magnitude * s;
    }
    StateVector7(x)
}

/// Inverse of [`state_from_harmonics`]. A zero pair maps to phase 0.
///
/// `beta` is carried through unchecked; the state itself has no frequency.
pub fn harmonics_from_state(x: &StateVector7, beta: f64) -> HarmonicDecomposition {
    let mut harmonics = [Harmonic { magnitude: 0.0, phase: 0.0 }; HARMONICS];
    for (i, h) in harmonics.iter_mut().enumerate() {
        let (c, s) = x.pair(i + 1);
        let magnitude = c.hypot(s);
        let phase = if magnitude == 0.0 { 0.0 } else { s.atan2(c) };
        *h = Harmonic { magnitude, phase };
    }
    HarmonicDecomposition { average: x[0], harmonics, beta }
}

/// `S_d^k x`. Uses the rotation blocks of `s_d` directly.
pub fn propagate(x: &StateVector7, s_d: &Matrix, k: u64) -> StateVector7 {
    let mut out = *x;
    for _ in 0..k {
        let v = s_d.mul_vec(&out.0).expect("S_d is 7x7");
        out.0.copy_from_slice(&v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::mat_exp;

    const BETA: f64 = 2.0 * PI * 400.0;
    const T: f64 = 1.0 / 18000.0;

    #[test]
    fn generator_structure() {
        let s = build_s(1.0).unwrap();
        assert_eq!(s[(2, 1)], 1.0);
        assert_eq!(s[(1, 2)], -1.0);
        assert_eq!(s[(4, 3)], 2.0);
        assert_eq!(s[(6, 5)], 3.0);
        let s = build_s(2513.27).unwrap();
        assert!((s[(6, 5)] - 7539.8).abs() < 0.1);
        for i in 0..ORDER {
            assert_eq!(s[(i, i)], 0.0);
            for j in 0..ORDER {
                assert_eq!(s[(i, j)], -s[(j, i)]);
            }
        }
        assert!(build_s(0.0).is_err());
        assert!(build_s(-3.0).is_err());
    }

    #[test]
    fn output_map_entries() {
        let g = output_map();
        assert_eq!(g.as_slice().iter().filter(|&&v| v != 0.0).count(), 4);
        let x = StateVector7::dc(1.0);
        assert_eq!(g.mul_vec(&x.0).unwrap()[0], 1.0);
        let h = HarmonicDecomposition::new(2.0, [(1.0, 0.3), (0.5, -1.0), (0.25, 2.0)], 1.0).unwrap();
        let x = state_from_harmonics(&h);
        let expect = 2.0 + 0.3f64.cos() + 0.5 * (-1.0f64).cos() + 0.25 * 2.0f64.cos();
        assert!((g.mul_vec(&x.0).unwrap()[0] - expect).abs() < 1e-15);
        assert!((x.output() - expect).abs() < 1e-15);
    }

    #[test]
    fn discretize_matches_printed_rotation_entries() {
        let sd = discretize(BETA, T).unwrap();
        assert!((sd[(1, 1)] - 0.99027).abs() < 1e-5);
        assert!((sd[(1, 2)] + 0.13918).abs() < 1e-5);
        assert!((sd[(2, 1)] - 0.13918).abs() < 1e-5);
        assert!((sd[(5, 5)] - 0.91355).abs() < 1e-5);
        assert_eq!(discretize(BETA, 0.0).unwrap(), Matrix::identity(ORDER));
    }

    #[test]
    fn discretize_equals_matrix_exponential() {
        for &(beta, t) in &[(BETA, T), (2.0 * PI * 100.0, T), (3.0, 0.2)] {
            let closed = discretize(beta, t).unwrap();
            let series = mat_exp(&build_s(beta).unwrap(), t).unwrap();
            assert!(closed.max_abs_diff(&series) < 1e-12);
        }
    }

    #[test]
    fn discretize_rejects_aliasing() {
        assert!(discretize(BETA, 1.0 / 1000.0).is_err());
        assert!(discretize(-1.0, T).is_err());
    }

    #[test]
    fn harmonic_state_conversions() {
        let h = HarmonicDecomposition::new(28.0, [(0.0, 0.0); 3], 1.0).unwrap();
        assert_eq!(state_from_harmonics(&h), StateVector7::dc(28.0));
        let h = HarmonicDecomposition::new(0.0, [(1.0, PI / 2.0), (0.0, 0.0), (0.0, 0.0)], 1.0).unwrap();
        let x = state_from_harmonics(&h);
        assert!(x[1].abs() < 1e-16 && (x[2] - 1.0).abs() < 1e-16);

        let back = harmonics_from_state(&StateVector7([28.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 1.0);
        assert_eq!(back.average, 28.0);
        assert!(back.harmonics.iter().all(|h| h.magnitude == 0.0 && h.phase == 0.0));

        let back = harmonics_from_state(&StateVector7([0.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0]), 1.0);
        assert!((back.harmonics[0].magnitude - 5.0).abs() < 1e-15);
        assert!((back.harmonics[0].phase - 0.927295218).abs() < 1e-9);
    }

    #[test]
    fn decomposition_validates() {
        assert!(HarmonicDecomposition::new(0.0, [(-1.0, 0.0), (0.0, 0.0), (0.0, 0.0)], 1.0).is_err());
        assert!(HarmonicDecomposition::new(0.0, [(0.0, 0.0); 3], 0.0).is_err());
        let h = HarmonicDecomposition::new(0.0, [(1.0, 3.0 * PI), (0.0, -PI), (0.0, 0.0)], 1.0).unwrap();
        assert!((h.harmonics[0].phase - PI).abs() < 1e-12);
        assert!((h.harmonics[1].phase - PI).abs() < 1e-12);
    }

    #[test]
    fn propagation_zero_steps_and_full_turn() {
        let x = StateVector7([1.0, 0.3, -0.2, 0.1, 0.05, -0.02, 0.01]);
        let sd = discretize(BETA, T).unwrap();
        assert_eq!(propagate(&x, &sd, 0), x);
        // 400 Hz at 18 kHz: 45 samples per fundamental period
        let y = propagate(&x, &sd, 45);
        for i in 0..ORDER {
            assert!((y[i] - x[i]).abs() < 1e-6);
        }
    }
}
