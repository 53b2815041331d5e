//! Closed-loop poles of `1/(Zg + Zfarm)`, dominant-pole selection and
//! damping, sensitivity, and an argument-principle cross-check.

mod sensitivity;
mod winding;

pub use sensitivity::{sensitivity, sensitivity_forward, sweep, ParamId, SweepPoint};
pub use winding::{count_rhp_zeros, rhp_contour, Contour};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tf::{cluster_roots, poly_roots, ComplexRational, Poly};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Sigma difference below which two in-band poles count as tied.
pub const TIE_TOL: f64 = 1e-6;
const POLISH_REL: f64 = 1e-6;

/// Closed-loop pole `σ + jω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole<F: Scalar = f64> {
    pub sigma: F,
    pub omega: F,
}

impl<F: Scalar> Pole<F> {
    pub fn new(sigma: F, omega: F) -> Self {
        Self { sigma, omega }
    }

    pub fn from_complex(z: Complex<F>) -> Self {
        Self { sigma: z.re, omega: z.im }
    }

    pub fn as_complex(&self) -> Complex<F> {
        Complex::new(self.sigma, self.omega)
    }

    pub fn freq_hz(&self) -> F {
        self.omega / F::TAU()
    }

    pub fn damping_ratio(&self) -> Result<F> {
        damping_ratio(self)
    }
}

impl std::fmt::Display for Pole<f64> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.omega < 0.0 { '-' } else { '+' };
        write!(f, "{:.2}{}{:.2}j", self.sigma, sign, self.omega.abs())
    }
}

/// `num(zg)·den(zfarm) + num(zfarm)·den(zg)`.
pub fn characteristic<F: Scalar>(zg: &ComplexRational<F>, zfarm: &ComplexRational<F>) -> Poly<F> {
    zg.num().mul(zfarm.den()).add(&zfarm.num().mul(zg.den()))
}

/// Roots of the characteristic polynomial, Newton-polished against
/// `Zg + Zfarm` and clustered.
pub fn closed_loop_poles<F: Scalar>(zg: &ComplexRational<F>, zfarm: &ComplexRational<F>) -> Result<Vec<Pole<F>>> {
    let ch = characteristic(zg, zfarm);
    if ch.degree() == 0 {
        return Err(Error::DegenerateCharacteristic);
    }
    let d = ch.derivative();
    let roots: Vec<Complex<F>> = poly_roots(ch.coeffs())?
        .into_iter()
        .map(|mut r| {
            for _ in 0..4 {
                if polished(zg, zfarm, r) {
                    break;
                }
                let step = ch.eval(r) / d.eval(r);
                let next = r - step;
                if !(next.re.is_finite() && next.im.is_finite()) || ch.eval(next).norm() >= ch.eval(r).norm() {
                    break;
                }
                r = next;
            }
            r
        })
        .collect();
    Ok(cluster_roots(&roots, F::lit(POLISH_REL)).into_iter().map(|c| Pole::from_complex(c.center)).collect())
}

fn polished<F: Scalar>(zg: &ComplexRational<F>, zfarm: &ComplexRational<F>, r: Complex<F>) -> bool {
    match (zg.eval(r), zfarm.eval(r)) {
        (Ok(a), Ok(b)) => (a + b).norm() < F::lit(POLISH_REL) * a.norm(),
        _ => true,
    }
}

/// Pole with the largest real part among those with `ω/2π` in `band`;
/// near-ties go to the larger `ω`.
pub fn dominant_pole<F: Scalar>(poles: &[Pole<F>], band: (F, F)) -> Result<Pole<F>> {
    let tie = F::lit(TIE_TOL);
    poles
        .iter()
        .filter(|p| p.sigma.is_finite() && p.freq_hz() >= band.0 && p.freq_hz() <= band.1)
        .fold(None::<Pole<F>>, |best, &p| match best {
            None => Some(p),
            Some(b) if p.sigma > b.sigma + tie => Some(p),
            Some(b) if (p.sigma - b.sigma).abs() <= tie && p.omega > b.omega => Some(p),
            keep => keep,
        })
        .ok_or(Error::NoPoleInBand {
            lo: band.0.to_f64().unwrap_or(f64::NAN),
            hi: band.1.to_f64().unwrap_or(f64::NAN),
        })
}

/// In-band poles whose real part ties with the dominant one.
pub fn dominant_ties<F: Scalar>(poles: &[Pole<F>], band: (F, F)) -> Result<Vec<Pole<F>>> {
    let d = dominant_pole(poles, band)?;
    let tie = F::lit(TIE_TOL);
    Ok(poles
        .iter()
        .copied()
        .filter(|p| p.freq_hz() >= band.0 && p.freq_hz() <= band.1 && (p.sigma - d.sigma).abs() <= tie)
        .collect())
}

/// `−σ/|p|`.
pub fn damping_ratio<F: Scalar>(p: &Pole<F>) -> Result<F> {
    let m = p.sigma.hypot(p.omega);
    if m.is_zero() {
        return Err(Error::OriginPole);
    }
    Ok(-p.sigma / m)
}
