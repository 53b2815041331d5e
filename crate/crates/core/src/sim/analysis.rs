//! Post-processing of simulated series: modal fits, spectra, envelopes.

use crate::ssfe::{hann_peak, remove_fundamental};
use crate::Complex64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Continuous-time modes of `x` from a linear-prediction fit of the given
/// order with a constant term.
pub fn lp_modes(x: &[f64], fs: f64, order: usize) -> Vec<Complex64> {
    let n = x.len();
    if order == 0 || n < 3 * order + 2 {
        return Vec::new();
    }
    let rows = n - order;
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(rows, order + 1, |r, c| if c == order { 1.0 } else { x[r + order - 1 - c] / scale });
    let b = DVector::from_fn(rows, |r, _| x[r + order] / scale);
    let Ok(coef) = a.svd(true, true).solve(&b, 1e-12) else {
        return Vec::new();
    };
    // z^p − c1 z^{p−1} − … − cp
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    poly.extend((0..order).map(|k| Complex64::new(-coef[k], 0.0)));
    poly.reverse();
    crate::tf::poly_roots(&poly)
        .unwrap_or_default()
        .into_iter()
        .filter(|z| z.norm() > 0.0)
        .map(|z| z.ln() * fs)
        .collect()
}

/// Least-damped mode of `x` whose frequency lies in `band_hz`, as
/// `σ + jω` with `ω ≥ 0`.
pub fn dominant_mode(x: &[f64], fs: f64, order: usize, band_hz: (f64, f64)) -> Option<Complex64> {
    lp_modes(x, fs, order)
        .into_iter()
        .filter(|s| {
            let f = s.im.abs() / TAU;
            f >= band_hz.0 && f <= band_hz.1
        })
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .map(|s| Complex64::new(s.re, s.im.abs()))
}

/// Strongest spectral line of `x` in `band` after removing the fundamental.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub freq: f64,
    pub amplitude: f64,
}

pub fn spectral_peak(x: &[f64], fs: f64, f1: f64, band: (f64, f64), grid: f64) -> Option<Peak> {
    let r = remove_fundamental(x, fs, f1)?;
    hann_peak(&r, fs, band, grid).map(|(freq, amplitude)| Peak { freq, amplitude })
}

/// Oscillation amplitude of `x` over time: first-order high-pass at
/// `corner` Hz, then `√2`·RMS over a trailing `window`.
pub fn envelope(x: &[f64], fs: f64, corner: f64, window: f64) -> Vec<f64> {
    let dt = 1.0 / fs;
    let rc = 1.0 / (TAU * corner);
    let alpha = rc / (rc + dt);
    let len = (window * fs).round().max(1.0) as usize;
    let mut hp = Vec::with_capacity(x.len());
    let (mut prev_in, mut prev_out) = (x.first().copied().unwrap_or(0.0), 0.0);
    for &v in x {
        let y = alpha * (prev_out + v - prev_in);
        prev_in = v;
        prev_out = y;
        hp.push(y);
    }
    let mut out = Vec::with_capacity(x.len());
    let mut sum = 0.0;
    for k in 0..hp.len() {
        sum += hp[k] * hp[k];
        if k >= len {
            sum -= hp[k - len] * hp[k - len];
        }
        let m = (k + 1).min(len) as f64;
        out.push((2.0 * sum.max(0.0) / m).sqrt());
    }
    out
}

/// Time after `from` at which `env` last exceeds `level`; `Some(0)` when it
/// never does, `None` when it is still above at the end.
pub fn settling_time(t: &[f64], env: &[f64], from: f64, level: f64) -> Option<f64> {
    let start = t.partition_point(|&v| v < from);
    let last = (start..env.len()).rev().find(|&k| env[k] > level);
    match last {
        None => Some(0.0),
        Some(k) if k + 1 == env.len() => None,
        Some(k) => Some(t[k + 1] - from),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_recovers_damped_sine() {
        let fs = 5000.0;
        let x: Vec<f64> = (0..2000)
            .map(|k| {
                let t = k as f64 / fs;
                3.0 + (-4.0 * t).exp() * (TAU * 24.0 * t + 0.4).sin()
            })
            .collect();
        let m = dominant_mode(&x, fs, 2, (10.0, 40.0)).unwrap();
        assert!((m.re + 4.0).abs() < 1e-6 && (m.im - TAU * 24.0).abs() < 1e-6, "{m}");
    }

    #[test]
    fn envelope_of_sine() {
        let fs = 5000.0;
        let x: Vec<f64> = (0..5000).map(|k| 2.0 * (TAU * 24.0 * k as f64 / fs).sin()).collect();
        let e = envelope(&x, fs, 2.0, 1.0 / 24.0);
        assert!((e[4000] - 2.0).abs() < 0.05, "{}", e[4000]);
    }
}
