//! Discrete band-pass damping branch driven by the PLL error.

use crate::impedance::SsrdcConfig;
use std::f64::consts::TAU;

/// Biquad coefficients (`a0 = 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
struct Biquad {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

/// Bilinear band-pass with the center frequency prewarped, so its response
/// at the center is exactly `H0/(2ζ)` with zero phase.
fn band_pass(h0: f64, zeta: f64, omega: f64, dt: f64) -> Biquad {
    let k = omega / (omega * dt / 2.0).tan();
    let a0 = k * k + 2.0 * zeta * omega * k + omega * omega;
    let g = h0 * omega * k / a0;
    Biquad {
        b0: g,
        b2: -g,
        a1: (2.0 * omega * omega - 2.0 * k * k) / a0,
        a2: (k * k - 2.0 * zeta * omega * k + omega * omega) / a0,
    }
}

/// Runtime form of the damping branch; gated by the frequency estimate.
#[derive(Clone, Debug)]
pub struct SsrdcRuntime {
    h0: f64,
    zeta: f64,
    k_sso: f64,
    limiter: f64,
    f1: f64,
    dt: f64,
    center: Option<f64>,
    coef: Biquad,
    z1: f64,
    z2: f64,
}

impl SsrdcRuntime {
    pub fn new(cfg: &SsrdcConfig, f1: f64, dt: f64) -> Self {
        Self {
            h0: cfg.h0,
            zeta: cfg.zeta,
            k_sso: cfg.k_sso,
            limiter: cfg.limiter,
            f1,
            dt,
            center: None,
            coef: Biquad { b0: 0.0, b2: 0.0, a1: 0.0, a2: 0.0 },
            z1: 0.0,
            z2: 0.0,
        }
    }

    pub fn k_sso(&self) -> f64 {
        self.k_sso
    }

    pub fn set_k_sso(&mut self, k: f64) {
        self.k_sso = k;
    }

    /// One sample: `vq` is the PLL error, `fp` the published tone
    /// frequency in Hz. Returns the frequency correction, rad/s.
    pub fn step(&mut self, vq: f64, fp: Option<f64>) -> f64 {
        let omega = match fp {
            Some(f) if f > self.f1 => TAU * (f - self.f1),
            _ => {
                self.center = None;
                self.z1 = 0.0;
                self.z2 = 0.0;
                return 0.0;
            }
        };
        if self.center != Some(omega) {
            self.coef = band_pass(self.h0, self.zeta, omega, self.dt);
            self.center = Some(omega);
        }
        let c = self.coef;
        // transposed direct form II
        let y = c.b0 * vq + self.z1;
        self.z1 = -c.a1 * y + self.z2;
        self.z2 = c.b2 * vq - c.a2 * y;
        (self.k_sso * y).clamp(-self.limiter, self.limiter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_response() {
        let dt = 2e-5;
        let w = TAU * 24.0;
        let c = band_pass(1.0, 0.3, w, dt);
        let z = num_complex::Complex64::from_polar(1.0, w * dt);
        let h = (c.b0 * z * z + c.b2) / (z * z + c.a1 * z + c.a2);
        assert!((h.norm() - 1.0 / 0.6).abs() < 1e-9);
        assert!(h.arg().abs() < 1e-9);
    }
}
