//! Aggregated grid-side converter on an R-L Thevenin grid.
//!
//! Currents are complex space vectors (amplitude-invariant), one vector per
//! unit; the grid line carries `n` times the unit current. The same right-hand
//! side serves the stationary frame (`frame = 0`) used for simulation and the
//! synchronous frame (`frame = ω1`) used for linearization.

use crate::impedance::transformer_inductance;
use crate::params::{ohm_to_henry, pu_to_ohm};
use crate::system::System;
use crate::Complex64;
use nalgebra::{DMatrix, SMatrix};
use num_complex::ComplexFloat;
use std::f64::consts::TAU;

pub type C = Complex64;

/// PLL frequency excursion limit, Hz.
pub const DEFAULT_PLL_LIMIT_HZ: f64 = 15.0;

/// Electrical and control constants of one aggregated run.
#[derive(Clone, Debug, PartialEq)]
pub struct Plant {
    /// Modulator gain `km·Vdc`.
    pub k: f64,
    pub kip: f64,
    pub kii: f64,
    pub kp: f64,
    pub ki: f64,
    /// `K·kd`, Ω.
    pub kkd: f64,
    /// `K·kf`.
    pub kkf: f64,
    pub l1: f64,
    pub lt: f64,
    /// Line inductance, H.
    pub lg: f64,
    /// Line resistance, Ω.
    pub r: f64,
    pub n: f64,
    pub omega1: f64,
    /// Bound on the PLL frequency deviation, rad/s.
    pub pll_limit: f64,
}

impl Plant {
    pub fn from_system(sys: &System) -> Self {
        let p = &sys.plant;
        let k = p.k();
        Self {
            k,
            kip: p.kip,
            kii: p.kii,
            kp: p.kp,
            ki: p.ki,
            kkd: k * p.kd,
            kkf: k * p.kf,
            l1: p.l1,
            lt: transformer_inductance(&sys.grid, p.f1),
            lg: ohm_to_henry(pu_to_ohm(sys.grid.xl, &sys.grid), p.f1),
            r: pu_to_ohm(sys.grid.rl, &sys.grid),
            n: sys.units(),
            omega1: p.omega1(),
            pll_limit: TAU * DEFAULT_PLL_LIMIT_HZ,
        }
    }

    /// Series inductance seen by one unit with the line shared by `n`.
    pub fn ltot(&self) -> f64 {
        self.l1 + self.lt + self.n * self.lg
    }

    /// Source voltage, in a frame aligned with the terminal voltage, that
    /// holds the terminal at `v1` while each unit delivers `i0`.
    pub fn source_for(&self, v1: f64, i0: C) -> C {
        let x = self.lt + self.n * self.lg;
        C::new(v1, 0.0) - C::new(0.0, self.omega1 * x) * i0 - self.n * self.r * i0
    }
}

/// How the converter voltage is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Converter {
    Active,
    /// Terminals shorted, controls idle.
    Passive,
    /// Disconnected after a trip.
    Blocked,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct State {
    /// Unit current in the working frame, A.
    pub i: C,
    /// Current controller integrator, controller frame.
    pub xi: C,
    /// PLL integrator, rad/s.
    pub xp: f64,
    /// PLL angle relative to the working frame, rad.
    pub theta: f64,
}

impl State {
    fn axpy(&self, h: f64, d: &State) -> State {
        State { i: self.i + d.i * h, xi: self.xi + d.xi * h, xp: self.xp + h * d.xp, theta: self.theta + h * d.theta }
    }

    fn to_vec(self) -> [f64; 6] {
        [self.i.re, self.i.im, self.xi.re, self.xi.im, self.xp, self.theta]
    }

    fn from_vec(v: &[f64]) -> State {
        State { i: C::new(v[0], v[1]), xi: C::new(v[2], v[3]), xp: v[4], theta: v[5] }
    }
}

/// Inputs held over one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inputs {
    /// Current reference, controller frame.
    pub iref: C,
    /// Extra PLL frequency from the damping controller, rad/s.
    pub aux: f64,
    pub mode: Converter,
    /// PLL frozen: integrator held, proportional path off.
    pub pll_hold: bool,
}

/// Algebraic quantities at a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Signals {
    /// Converter voltage, working frame.
    pub vc: C,
    /// Terminal voltage, working frame.
    pub vt: C,
    /// Current, controller frame.
    pub ic: C,
    /// Terminal voltage, controller frame.
    pub vtc: C,
    /// PLL output frequency, rad/s.
    pub omega: f64,
}

impl Plant {
    pub fn signals(&self, x: &State, ug: C, u: &Inputs) -> Signals {
        let e = C::from_polar(1.0, -x.theta);
        let ic = x.i * e;
        let (vc, vt) = match u.mode {
            Converter::Blocked => (ug, ug),
            Converter::Passive => {
                let ratio = self.l1 / self.ltot();
                (C::new(0.0, 0.0), ratio * (ug + self.n * self.r * x.i))
            }
            Converter::Active => {
                let ratio = self.l1 / self.ltot();
                let a = 1.0 - ratio;
                let b = ratio * (ug + self.n * self.r * x.i);
                let err = u.iref - ic;
                let vcc = (self.k * (self.kip * err + x.xi) + C::new(0.0, self.kkd) * ic + self.kkf * b * e)
                    / (1.0 - self.kkf * a);
                let vc = vcc / e;
                (vc, a * vc + b)
            }
        };
        let vtc = vt * e;
        let prop = if u.pll_hold { 0.0 } else { self.kp * vtc.im };
        let dev = (prop + x.xp + u.aux).clamp(-self.pll_limit, self.pll_limit);
        Signals { vc, vt, ic, vtc, omega: self.omega1 + dev }
    }

    /// Time derivative in a frame rotating at `frame` rad/s.
    pub fn deriv(&self, x: &State, ug: C, u: &Inputs, frame: f64) -> State {
        let s = self.signals(x, ug, u);
        let di = match u.mode {
            Converter::Blocked => C::new(0.0, 0.0),
            _ => (s.vc - ug - self.n * self.r * x.i) / self.ltot() - C::new(0.0, frame) * x.i,
        };
        let dxi = match u.mode {
            Converter::Active => self.kii * (u.iref - s.ic),
            _ => C::new(0.0, 0.0),
        };
        // integration stops while the output sits on its limit
        let raw = self.kp * s.vtc.im + x.xp + u.aux;
        let dxp = self.ki * s.vtc.im;
        let wind = u.pll_hold || (raw.abs() >= self.pll_limit && raw.signum() == dxp.signum());
        State { i: di, xi: dxi, xp: if wind { 0.0 } else { dxp }, theta: s.omega - frame }
    }

    /// One classical Runge–Kutta step in the stationary frame; `ug(t)` is
    /// the source voltage.
    pub fn rk4(&self, x: &State, t: f64, h: f64, u: &Inputs, ug: impl Fn(f64) -> C) -> State {
        let k1 = self.deriv(x, ug(t), u, 0.0);
        let k2 = self.deriv(&x.axpy(h / 2.0, &k1), ug(t + h / 2.0), u, 0.0);
        let k3 = self.deriv(&x.axpy(h / 2.0, &k2), ug(t + h / 2.0), u, 0.0);
        let k4 = self.deriv(&x.axpy(h, &k3), ug(t + h), u, 0.0);
        State {
            i: x.i + (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i) * (h / 6.0),
            xi: x.xi + (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi) * (h / 6.0),
            xp: x.xp + (k1.xp + 2.0 * k2.xp + 2.0 * k3.xp + k4.xp) * (h / 6.0),
            theta: x.theta + (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta) * (h / 6.0),
        }
    }

    /// Steady state with the PLL aligned to the terminal voltage `v1` and
    /// each unit delivering `i0` (controller frame); returns the state and
    /// the source phasor at `t = 0`.
    pub fn equilibrium(&self, v1: f64, i0: C) -> (State, C) {
        let ug = self.source_for(v1, i0);
        let vt = C::new(v1, 0.0);
        let vc = vt + C::new(0.0, self.omega1 * self.l1) * i0;
        let xi = (vc - C::new(0.0, self.kkd) * i0 - self.kkf * vt) / self.k;
        (State { i: i0, xi, xp: 0.0, theta: 0.0 }, ug)
    }

    /// Jacobian of the synchronous-frame dynamics at `x`.
    pub fn jacobian(&self, x: &State, ug: C, u: &Inputs) -> DMatrix<f64> {
        let x0 = x.to_vec();
        let mut j = DMatrix::zeros(6, 6);
        for col in 0..6 {
            let h = 1e-6 * x0[col].abs().max(1.0);
            let (mut up, mut dn) = (x0, x0);
            up[col] += h;
            dn[col] -= h;
            let fu = self.deriv(&State::from_vec(&up), ug, u, self.omega1).to_vec();
            let fd = self.deriv(&State::from_vec(&dn), ug, u, self.omega1).to_vec();
            for row in 0..6 {
                j[(row, col)] = (fu[row] - fd[row]) / (2.0 * h);
            }
        }
        j
    }

    /// Eigenvalues of the linearized dynamics around the operating point
    /// (`v1`, `i0`), synchronous frame.
    pub fn eigenvalues(&self, v1: f64, i0: C) -> Vec<C> {
        let (x, ug) = self.equilibrium(v1, i0);
        let u = Inputs { iref: i0, aux: 0.0, mode: Converter::Active, pll_hold: false };
        let j: SMatrix<f64, 6, 6> = self.jacobian(&x, ug, &u).fixed_view::<6, 6>(0, 0).into_owned();
        j.complex_eigenvalues().iter().copied().collect()
    }
}

/// Least-damped oscillatory eigenvalue with frequency in `band_hz`.
pub fn dominant_mode(eigs: &[C], band_hz: (f64, f64)) -> Option<C> {
    eigs.iter()
        .copied()
        .filter(|z| {
            let f = z.im().abs() / std::f64::consts::TAU;
            f >= band_hz.0 && f <= band_hz.1
        })
        .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.abs().total_cmp(&b.im.abs())))
        .map(|z| C::new(z.re, z.im.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_is_stationary() {
        let p = Plant::from_system(&System::default());
        let (x, ug) = p.equilibrium(609.0, C::new(1650.0, 0.0));
        let u = Inputs { iref: C::new(1650.0, 0.0), aux: 0.0, mode: Converter::Active, pll_hold: false };
        let d = p.deriv(&x, ug, &u, p.omega1);
        assert!(d.i.norm() < 1e-6 && d.xi.norm() < 1e-6 && d.xp.abs() < 1e-9 && d.theta.abs() < 1e-9, "{d:?}");
        let s = p.signals(&x, ug, &u);
        assert!((s.vt - C::new(609.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn passive_energy_decays() {
        let p = Plant::from_system(&System::default());
        let u = Inputs { iref: C::new(0.0, 0.0), aux: 0.0, mode: Converter::Passive, pll_hold: false };
        let mut x = State { i: C::new(100.0, -50.0), ..Default::default() };
        let mut last = x.i.norm_sqr();
        for k in 0..1000 {
            x = p.rk4(&x, k as f64 * 2e-5, 2e-5, &u, |_| C::new(0.0, 0.0));
            assert!(x.i.norm_sqr() <= last);
            last = x.i.norm_sqr();
        }
    }
}
