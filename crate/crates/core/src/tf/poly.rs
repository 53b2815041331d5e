use crate::scalar::Scalar;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Dense complex polynomial, coefficients in ascending powers of `s`.
///
/// Trailing (highest-power) exact zeros are always stripped; the zero
/// polynomial is stored as a single zero coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: Deserialize<'de> + Scalar"))]
#[serde(from = "Vec<Complex<F>>", into = "Vec<Complex<F>>")]
pub struct Poly<F: Scalar> {
    coeffs: Vec<Complex<F>>,
}

impl<F: Scalar> From<Vec<Complex<F>>> for Poly<F> {
    fn from(coeffs: Vec<Complex<F>>) -> Self {
        Self::new(coeffs)
    }
}

impl<F: Scalar> From<Poly<F>> for Vec<Complex<F>> {
    fn from(p: Poly<F>) -> Self {
        p.coeffs
    }
}

impl<F: Scalar> Poly<F> {
    pub fn new(mut coeffs: Vec<Complex<F>>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.re.is_zero() && c.im.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex::new(F::zero(), F::zero()));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[F]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, F::zero())).collect())
    }

    pub fn constant(c: Complex<F>) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn one() -> Self {
        Self::constant(Complex::new(F::one(), F::zero()))
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Self::from_real(&[F::zero(), F::one()])
    }

    /// `lead · Π (s − r)`.
    pub fn from_roots(lead: Complex<F>, roots: &[Complex<F>]) -> Self {
        let mut c = vec![lead];
        for &r in roots {
            let mut next = vec![Complex::new(F::zero(), F::zero()); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex<F>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].re.is_zero() && self.coeffs[0].im.is_zero()
    }

    pub fn lead(&self) -> Complex<F> {
        *self.coeffs.last().expect("nonempty")
    }

    pub fn eval(&self, s: Complex<F>) -> Complex<F> {
        self.coeffs.iter().rev().fold(Complex::new(F::zero(), F::zero()), |acc, &c| acc * s + c)
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, s: Complex<F>) -> (Complex<F>, Complex<F>) {
        let zero = Complex::new(F::zero(), F::zero());
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    /// `Σ |c_k| |s|^k`, the rounding scale of an evaluation at `s`.
    pub fn eval_scale(&self, s: Complex<F>) -> F {
        let r = s.norm();
        self.coeffs.iter().rev().fold(F::zero(), |acc, c| acc * r + c.norm())
    }

    pub fn max_abs(&self) -> F {
        self.coeffs.iter().fold(F::zero(), |m, c| m.max(c.norm()))
    }

    pub fn scale(&self, k: Complex<F>) -> Self {
        if k.re.is_zero() && k.im.is_zero() {
            return Self::zero();
        }
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|&c| -c).collect())
    }

    /// Sum with rounding-level cancellations flushed to exact zero.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex::new(F::zero(), F::zero());
        let flush = F::epsilon() * F::lit(4.0);
        let out = (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(zero);
                let b = other.coeffs.get(k).copied().unwrap_or(zero);
                let c = a + b;
                if c.norm() <= flush * (a.norm() + b.norm()) {
                    zero
                } else {
                    c
                }
            })
            .collect();
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex::new(F::zero(), F::zero()); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * F::lit(k as f64))
                .collect(),
        )
    }

    /// `p(s − a)` as a polynomial in `s`.
    pub fn shift(&self, a: Complex<F>) -> Self {
        let lin = Self::new(vec![-a, Complex::new(F::one(), F::zero())]);
        let mut acc = Self::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Self::constant(c));
        }
        // keep the exact leading coefficient; shifting never changes it
        let mut coeffs = acc.coeffs;
        coeffs.resize(self.coeffs.len(), Complex::new(F::zero(), F::zero()));
        *coeffs.last_mut().expect("nonempty") = self.lead();
        Self::new(coeffs)
    }

    /// Quotient of division by `(s − r)`, remainder dropped.
    ///
    /// Runs the recurrence from both ends and keeps the quotient that
    /// reproduces `self` best, so large and small roots both deflate stably.
    pub fn deflate(&self, r: Complex<F>) -> Self {
        let n = self.degree();
        if n == 0 {
            return self.clone();
        }
        let c = &self.coeffs;
        let zero = Complex::new(F::zero(), F::zero());
        let mut fwd = vec![zero; n];
        let mut acc = zero;
        for k in (1..=n).rev() {
            acc = acc * r + c[k];
            fwd[k - 1] = acc;
        }
        let fwd = Self::new(fwd);
        if r.norm() == F::zero() {
            return fwd;
        }
        let mut bwd = vec![zero; n];
        let mut prev = zero;
        for k in 0..n {
            // c_k = q_{k-1} − r q_k
            let q = (prev - c[k]) / r;
            bwd[k] = q;
            prev = q;
        }
        // the quotient's leading coefficient is exactly the dividend's
        bwd[n - 1] = c[n];
        let bwd = Self::new(bwd);
        let lin = Self::new(vec![-r, Complex::new(F::one(), F::zero())]);
        let err = |q: &Self| self.sub(&q.mul(&lin)).coeffs.iter().fold(F::zero(), |m, d| m.max(d.norm()));
        if err(&bwd) < err(&fwd) {
            bwd
        } else {
            fwd
        }
    }

    /// True when both polynomials agree coefficient-wise within `tol`
    /// relative to the larger coefficient magnitude.
    pub fn approx_eq(&self, other: &Self, tol: F) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        let scale = self.max_abs().max(other.max_abs()).max(F::min_positive_value());
        let zero = Complex::new(F::zero(), F::zero());
        (0..n).all(|k| {
            let a = self.coeffs.get(k).copied().unwrap_or(zero);
            let b = other.coeffs.get(k).copied().unwrap_or(zero);
            (a - b).norm() <= tol * scale
        })
    }

    pub fn cast<G: Scalar>(&self) -> Poly<G> {
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| Complex::new(G::lit(c.re.to_f64().unwrap_or(0.0)), G::lit(c.im.to_f64().unwrap_or(0.0))))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn horner_and_derivative() {
        let p = Poly::from_real(&[1.0, 2.0, 3.0]);
        let (v, d) = p.eval_with_derivative(c(2.0, 0.0));
        assert_eq!(v, c(17.0, 0.0));
        assert_eq!(d, c(14.0, 0.0));
        assert_eq!(p.derivative(), Poly::from_real(&[2.0, 6.0]));
    }

    #[test]
    fn from_roots_expands() {
        let p = Poly::from_roots(c(1.0, 0.0), &[c(1.0, 2.0), c(3.0, 0.0)]);
        assert!(p.eval(c(1.0, 2.0)).norm() < 1e-14);
        assert!(p.eval(c(3.0, 0.0)).norm() < 1e-14);
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn shift_substitutes_argument() {
        let p = Poly::new(vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.25)]);
        let a = c(0.0, 314.159);
        let q = p.shift(a);
        let s = c(-2.0, 100.0);
        let lhs = q.eval(s);
        let rhs = p.eval(s - a);
        assert!((lhs - rhs).norm() < 1e-10 * rhs.norm());
        assert!(q.shift(-a).approx_eq(&p, 1e-12));
    }

    #[test]
    fn deflation_removes_factor() {
        let roots = [c(-1e-3, 0.0), c(2.0, 1.0), c(-4e4, 3.0)];
        let p = Poly::from_roots(c(2.0, 0.0), &roots);
        for r in roots {
            let q = p.deflate(r);
            let back = q.mul(&Poly::new(vec![-r, c(1.0, 0.0)]));
            assert!(back.approx_eq(&p, 1e-13));
        }
    }

    #[test]
    fn cancellation_flushes_to_zero() {
        let p = Poly::from_real(&[0.1, 0.2, 0.3]);
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn serde_roundtrip() {
        let p = Poly::new(vec![c(1.0, 2.0), c(0.0, -1.0)]);
        let js = serde_json::to_string(&p).unwrap();
        let back: Poly<f64> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
    }
}
