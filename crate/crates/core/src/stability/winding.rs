use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tf::ComplexRational;
use num_complex::Complex;

const SEGMENTS_PER_EDGE: usize = 256;
const MAX_DEPTH: usize = 48;

/// Closed, counter-clockwise integration path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Contour<F: Scalar> {
    Rectangle { re_min: F, re_max: F, im_min: F, im_max: F },
}

impl<F: Scalar> Contour<F> {
    fn corners(&self) -> [Complex<F>; 4] {
        match *self {
            Contour::Rectangle { re_min, re_max, im_min, im_max } => [
                Complex::new(re_min, im_min),
                Complex::new(re_max, im_min),
                Complex::new(re_max, im_max),
                Complex::new(re_min, im_max),
            ],
        }
    }
}

/// Rectangle `[0, R] × [−R, R]` enclosing every right-half-plane zero of
/// the characteristic polynomial. `R` is the Fujiwara root bound with a
/// margin; looser bounds stretch the edge segments far beyond the root scale.
pub fn rhp_contour<F: Scalar>(zg: &ComplexRational<F>, zfarm: &ComplexRational<F>) -> Contour<F> {
    let ch = super::characteristic(zg, zfarm);
    let n = ch.degree();
    let ln_lead = ch.lead().norm().ln();
    let c = ch.coeffs();
    let mut ln_bound = F::neg_infinity();
    for k in 1..=n {
        let ck = c[n - k].norm();
        if ck.is_zero() {
            continue;
        }
        // the constant term enters halved
        let ck = if k == n { ck / F::lit(2.0) } else { ck };
        ln_bound = ln_bound.max((ck.ln() - ln_lead) / F::lit(k as f64));
    }
    let r = F::lit(2.2) * ln_bound.exp() + F::one();
    Contour::Rectangle { re_min: F::zero(), re_max: r, im_min: -r, im_max: r }
}

struct Characteristic<'a, F: Scalar> {
    zg: &'a ComplexRational<F>,
    zf: &'a ComplexRational<F>,
}

impl<F: Scalar> Characteristic<'_, F> {
    /// `Ng·Df + Nf·Dg` at `s` by direct evaluation of the four factors.
    fn at(&self, s: Complex<F>) -> Result<Complex<F>> {
        let (ng, dg) = (self.zg.num(), self.zg.den());
        let (nf, df) = (self.zf.num(), self.zf.den());
        let v = ng.eval(s) * df.eval(s) + nf.eval(s) * dg.eval(s);
        let scale = ng.eval_scale(s) * df.eval_scale(s) + nf.eval_scale(s) * dg.eval_scale(s);
        if v.norm() <= F::lit(1e3) * F::epsilon() * scale {
            return Err(Error::ZeroOnContour {
                re: s.re.to_f64().unwrap_or(f64::NAN),
                im: s.im.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(v)
    }

    fn phase_change(&self, a: Complex<F>, fa: Complex<F>, b: Complex<F>, fb: Complex<F>, depth: usize) -> Result<F> {
        let d = (fb / fa).arg();
        if d.abs() < F::FRAC_PI_4() {
            return Ok(d);
        }
        if depth == MAX_DEPTH {
            return Err(Error::ZeroOnContour {
                re: a.re.to_f64().unwrap_or(f64::NAN),
                im: a.im.to_f64().unwrap_or(f64::NAN),
            });
        }
        let m = (a + b) / F::lit(2.0);
        let fm = self.at(m)?;
        Ok(self.phase_change(a, fa, m, fm, depth + 1)? + self.phase_change(m, fm, b, fb, depth + 1)?)
    }
}

/// Number of zeros of `Zg + Zfarm` (after clearing denominators) inside the
/// contour, from the winding number of the characteristic function.
pub fn count_rhp_zeros<F: Scalar>(
    zg: &ComplexRational<F>,
    zfarm: &ComplexRational<F>,
    contour: &Contour<F>,
) -> Result<i64> {
    let ch = Characteristic { zg, zf: zfarm };
    let c = contour.corners();
    let mut total = F::zero();
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        let n = F::lit(SEGMENTS_PER_EDGE as f64);
        let mut prev = a;
        let mut fprev = ch.at(a)?;
        for i in 1..=SEGMENTS_PER_EDGE {
            let t = F::lit(i as f64) / n;
            let s = a + (b - a) * t;
            let fs = ch.at(s)?;
            total += ch.phase_change(prev, fprev, s, fs, 0)?;
            prev = s;
            fprev = fs;
        }
    }
    let turns = total / F::TAU();
    Ok(turns.round().to_i64().unwrap_or(0))
}
