use super::poly::Poly;
use super::roots::{near, poly_roots};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Complex-coefficient rational function `num(s)/den(s)`.
///
/// Always stored reduced: the denominator is monic and numerator/denominator
/// roots that coincide within the relative cancellation tolerance have been
/// divided out.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: Deserialize<'de> + Scalar"))]
#[serde(into = "RationalDump<F>", try_from = "RationalDump<F>")]
pub struct ComplexRational<F: Scalar> {
    num: Poly<F>,
    den: Poly<F>,
    tol: F,
}

/// Plain coefficient dump used for (de)serialization.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: Deserialize<'de> + Scalar"))]
pub struct RationalDump<F: Scalar> {
    pub num: Poly<F>,
    pub den: Poly<F>,
}

impl<F: Scalar> From<ComplexRational<F>> for RationalDump<F> {
    fn from(h: ComplexRational<F>) -> Self {
        Self { num: h.num, den: h.den }
    }
}

impl<F: Scalar> TryFrom<RationalDump<F>> for ComplexRational<F> {
    type Error = Error;
    fn try_from(d: RationalDump<F>) -> Result<Self> {
        Self::new(d.num, d.den)
    }
}

impl<F: Scalar> PartialEq for ComplexRational<F> {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

fn cone<F: Scalar>() -> Complex<F> {
    Complex::new(F::one(), F::zero())
}

impl<F: Scalar> ComplexRational<F> {
    pub fn new(num: Poly<F>, den: Poly<F>) -> Result<Self> {
        Self::with_tolerance(num, den, F::cancel_tol())
    }

    pub fn with_tolerance(num: Poly<F>, den: Poly<F>, tol: F) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(reduce(num, den, tol))
    }

    /// Rational from real coefficient slices (ascending powers).
    pub fn from_real(num: &[F], den: &[F]) -> Result<Self> {
        Self::new(Poly::from_real(num), Poly::from_real(den))
    }

    pub fn constant(c: Complex<F>) -> Self {
        Self::polynomial(Poly::constant(c))
    }

    pub fn real(c: F) -> Self {
        Self::constant(Complex::new(c, F::zero()))
    }

    pub fn polynomial(p: Poly<F>) -> Self {
        Self { num: p, den: Poly::one(), tol: F::cancel_tol() }
    }

    pub fn zero() -> Self {
        Self::polynomial(Poly::zero())
    }

    pub fn one() -> Self {
        Self::polynomial(Poly::one())
    }

    /// The Laplace variable `s`.
    pub fn s() -> Self {
        Self::polynomial(Poly::s())
    }

    pub fn num(&self) -> &Poly<F> {
        &self.num
    }

    pub fn den(&self) -> &Poly<F> {
        &self.den
    }

    pub fn tolerance(&self) -> F {
        self.tol
    }

    /// Same function with a different cancellation tolerance for later operations.
    pub fn set_tolerance(mut self, tol: F) -> Self {
        self.tol = tol;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn build(&self, num: Poly<F>, den: Poly<F>) -> Self {
        reduce(num, den, self.tol)
    }

    pub fn eval(&self, s: Complex<F>) -> Result<Complex<F>> {
        let d = self.den.eval(s);
        if d.norm() <= F::lit(64.0) * F::epsilon() * self.den.eval_scale(s) {
            return Err(Error::EvalAtPole {
                re: s.re.to_f64().unwrap_or(f64::NAN),
                im: s.im.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.num.eval(s) / d)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.approx_eq(&other.den, F::lit(64.0) * F::epsilon()) {
            return self.build(self.num.add(&other.num), self.den.clone());
        }
        let (a_rest, b_rest) = split_common(&self.den, &other.den, self.tol);
        let num = self.num.mul(&b_rest).add(&other.num.mul(&a_rest));
        let den = self.den.mul(&b_rest);
        self.build(num, den)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero().set_tolerance(self.tol);
        }
        self.build(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(canonical(self.den.clone(), self.num.clone(), self.tol))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.neg(), den: self.den.clone(), tol: self.tol }
    }

    pub fn scalar_mul(&self, k: Complex<F>) -> Self {
        if k.norm().is_zero() {
            return Self::zero().set_tolerance(self.tol);
        }
        Self { num: self.num.scale(k), den: self.den.clone(), tol: self.tol }
    }

    pub fn add_const(&self, c: Complex<F>) -> Self {
        self.add(&Self::constant(c))
    }

    /// `h(s − a)` as a rational function of `s`.
    pub fn shift_by(&self, a: Complex<F>) -> Self {
        canonical(self.num.shift(a), self.den.shift(a), self.tol)
    }

    /// `h(s − j·2π·f1)`.
    pub fn shift(&self, f1: F) -> Self {
        self.shift_by(Complex::new(F::zero(), F::TAU() * f1))
    }

    pub fn approx_eq(&self, other: &Self, tol: F) -> bool {
        self.num.approx_eq(&other.num, tol) && self.den.approx_eq(&other.den, tol)
    }

    /// Poles (roots of the reduced denominator).
    pub fn poles(&self) -> Result<Vec<Complex<F>>> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        poly_roots(self.den.coeffs())
    }

    pub fn zeros(&self) -> Result<Vec<Complex<F>>> {
        if self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        poly_roots(self.num.coeffs())
    }

    pub fn dump(&self) -> RationalDump<F> {
        RationalDump { num: self.num.clone(), den: self.den.clone() }
    }
}

/// `(Σ 1/Z_i)^−1`.
pub fn parallel<F: Scalar>(zs: &[ComplexRational<F>]) -> Result<ComplexRational<F>> {
    let first = zs.first().ok_or(Error::EmptyList)?;
    if zs.iter().any(ComplexRational::is_zero) {
        return Err(Error::ZeroElement);
    }
    if zs.iter().all(|z| z == first) {
        let k = F::lit(zs.len() as f64);
        return Ok(first.scalar_mul(Complex::new(F::one() / k, F::zero())));
    }
    let mut acc = ComplexRational::zero().set_tolerance(first.tol);
    for z in zs {
        acc = acc.add(&z.recip()?);
    }
    acc.recip()
}

fn canonical<F: Scalar>(num: Poly<F>, den: Poly<F>, tol: F) -> ComplexRational<F> {
    if num.is_zero() {
        return ComplexRational { num, den: Poly::one(), tol };
    }
    let lead = den.lead();
    if lead == cone() {
        return ComplexRational { num, den, tol };
    }
    let inv = cone::<F>() / lead;
    let mut den = den.scale(inv);
    let mut c: Vec<Complex<F>> = den.coeffs().to_vec();
    *c.last_mut().expect("nonempty") = cone();
    den = Poly::new(c);
    ComplexRational { num: num.scale(inv), den, tol }
}

/// Pairs of indices `(i, j)` with `a[i]` and `b[j]` coincident within `tol`,
/// matched greedily by increasing distance.
fn match_pairs<F: Scalar>(a: &[Complex<F>], b: &[Complex<F>], tol: F) -> Vec<(usize, usize)> {
    let mut cand: Vec<(F, usize, usize)> = Vec::new();
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            if near(x, y, tol) {
                cand.push(((x - y).norm(), i, j));
            }
        }
    }
    cand.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut ua = vec![false; a.len()];
    let mut ub = vec![false; b.len()];
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            out.push((i, j));
        }
    }
    out
}

fn roots_or_empty<F: Scalar>(p: &Poly<F>) -> Vec<Complex<F>> {
    if p.degree() == 0 {
        return Vec::new();
    }
    poly_roots(p.coeffs()).unwrap_or_default()
}

/// Splits `a = g·a_rest`, `b = g·b_rest` for the common root factor `g`.
fn split_common<F: Scalar>(a: &Poly<F>, b: &Poly<F>, tol: F) -> (Poly<F>, Poly<F>) {
    let ra = roots_or_empty(a);
    let rb = roots_or_empty(b);
    let mut a_rest = a.clone();
    let mut b_rest = b.clone();
    for (i, j) in match_pairs(&ra, &rb, tol) {
        let c = (ra[i] + rb[j]) / F::lit(2.0);
        a_rest = a_rest.deflate(c);
        b_rest = b_rest.deflate(c);
    }
    (a_rest, b_rest)
}

fn reduce<F: Scalar>(num: Poly<F>, den: Poly<F>, tol: F) -> ComplexRational<F> {
    if num.is_zero() {
        return canonical(num, den, tol);
    }
    let zn = num.coeffs().iter().take_while(|c| c.norm().is_zero()).count();
    let zd = den.coeffs().iter().take_while(|c| c.norm().is_zero()).count();
    let k = zn.min(zd);
    let mut num = Poly::new(num.coeffs()[k..].to_vec());
    let mut den = Poly::new(den.coeffs()[k..].to_vec());
    if num.degree() > 0 && den.degree() > 0 {
        let rn = roots_or_empty(&num);
        let rd = roots_or_empty(&den);
        for (i, j) in match_pairs(&rn, &rd, tol) {
            let c = (rn[i] + rd[j]) / F::lit(2.0);
            num = num.deflate(c);
            den = den.deflate(c);
        }
    }
    canonical(num, den, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    type R = ComplexRational<f64>;
    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn r(num: &[f64], den: &[f64]) -> R {
        R::from_real(num, den).unwrap()
    }

    #[test]
    fn like_terms() {
        let h = r(&[1.0], &[1.0, 1.0]);
        assert_eq!(h.add(&h), r(&[2.0], &[1.0, 1.0]));
    }

    #[test]
    fn additive_identity() {
        let h = r(&[1.0, 2.0], &[3.0, 1.0, 1.0]);
        assert_eq!(h.add(&R::zero()), h);
    }

    #[test]
    fn common_factor_cancels() {
        let a = r(&[0.0, 1.0], &[2.0, 1.0]);
        let b = r(&[2.0], &[2.0, 1.0]);
        let sum = a.add(&b);
        assert!(sum.approx_eq(&R::one(), 1e-12), "{sum:?}");
        assert_eq!(sum.den().degree(), 0);
    }

    #[test]
    fn parallel_cases() {
        assert!(parallel(&[R::real(2.0), R::real(2.0)]).unwrap().approx_eq(&R::one(), 0.0));
        let p = parallel(&[R::s(), R::one()]).unwrap();
        assert!(p.approx_eq(&r(&[0.0, 1.0], &[1.0, 1.0]), 1e-14));
        let z = r(&[1.0, 3.0], &[2.0, 1.0]);
        let p3 = parallel(&[z.clone(), z.clone(), z.clone()]).unwrap();
        assert_eq!(p3, z.scalar_mul(c(1.0 / 3.0, 0.0)));
        assert_eq!(parallel::<f64>(&[]), Err(Error::EmptyList));
        assert_eq!(parallel(&[R::zero()]), Err(Error::ZeroElement));
    }

    #[test]
    fn shift_of_integrator() {
        let h = r(&[1.0], &[0.0, 1.0]).shift(50.0);
        let w1 = 2.0 * std::f64::consts::PI * 50.0;
        assert_eq!(h.den().coeffs(), &[c(0.0, -w1), c(1.0, 0.0)]);
        let s = c(0.0, 400.0);
        assert!((h.eval(s).unwrap() - (s - c(0.0, w1)).inv()).norm() < 1e-15);
    }

    #[test]
    fn eval_cases() {
        assert_eq!(r(&[1.0], &[1.0, 1.0]).eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(R::s().eval(c(0.0, 1.0)).unwrap(), c(0.0, 1.0));
        assert!(matches!(r(&[1.0], &[1.0, 1.0]).eval(c(-1.0, 0.0)), Err(Error::EvalAtPole { .. })));
    }

    #[test]
    fn division_by_zero_function() {
        assert_eq!(R::one().checked_div(&R::zero()), Err(Error::DivisionByZero));
        assert!(R::new(Poly::one(), Poly::zero()).is_err());
    }

    #[test]
    fn json_dump_round_trip() {
        let h = R::new(Poly::new(vec![c(1.0, -2.0)]), Poly::new(vec![c(0.5, 0.0), c(0.0, 1.0), c(1.0, 0.0)])).unwrap();
        let js = serde_json::to_string(&h).unwrap();
        let back: R = serde_json::from_str(&js).unwrap();
        assert!(back.approx_eq(&h, 1e-15));
    }

    #[test]
    fn single_precision_algebra() {
        let a = ComplexRational::<f32>::from_real(&[1.0], &[1.0, 1.0]).unwrap();
        let b = ComplexRational::<f32>::from_real(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(a.add(&b).approx_eq(&ComplexRational::one(), 1e-5));
    }
}
