use super::poly::Poly;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_complex::Complex;

/// Highest polynomial degree accepted by [`poly_roots`].
pub const DEGREE_CAP: usize = 200;

const MAX_SWEEPS: usize = 600;
const ANGLE_OFFSET: f64 = 0.7;

/// A group of numerically coincident roots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootCluster<F: Scalar> {
    pub center: Complex<F>,
    pub multiplicity: usize,
}

/// All roots of the polynomial with ascending coefficients `coeffs`.
///
/// Aberth–Ehrlich simultaneous iteration on a variable- and
/// magnitude-scaled copy, started from circles fitted to the Newton polygon,
/// followed by one Newton polish per root on the original coefficients.
pub fn poly_roots<F: Scalar>(coeffs: &[Complex<F>]) -> Result<Vec<Complex<F>>> {
    let p = Poly::new(coeffs.to_vec());
    if p.degree() == 0 {
        return Err(Error::DegreeZero);
    }
    if p.degree() > DEGREE_CAP {
        return Err(Error::DegreeCap(p.degree(), DEGREE_CAP));
    }
    let zero = Complex::new(F::zero(), F::zero());
    let low = p.coeffs().iter().take_while(|c| c.norm().is_zero()).count();
    let mut roots = vec![zero; low];
    let reduced = Poly::new(p.coeffs()[low..].to_vec());
    let m = reduced.degree();
    match m {
        0 => {}
        1 => roots.push(-reduced.coeffs()[0] / reduced.coeffs()[1]),
        _ => roots.extend(aberth(&reduced)),
    }
    Ok(roots)
}

fn aberth<F: Scalar>(p: &Poly<F>) -> Vec<Complex<F>> {
    let n = p.degree();
    let c = p.coeffs();
    let ln_rho = (c[0].norm().ln() - c[n].norm().ln()) / F::lit(n as f64);
    let rho = ln_rho.exp();

    // d_k = c_k ρ^k / max, computed in the log domain to avoid overflow
    let logs: Vec<Option<F>> = c
        .iter()
        .enumerate()
        .map(|(k, ck)| (!ck.norm().is_zero()).then(|| ck.norm().ln() + F::lit(k as f64) * ln_rho))
        .collect();
    let top = logs.iter().flatten().fold(F::neg_infinity(), |m, &v| m.max(v));
    let d: Vec<Complex<F>> = c
        .iter()
        .zip(&logs)
        .map(|(ck, l)| match l {
            Some(l) => (ck / ck.norm()) * (*l - top).exp(),
            None => Complex::new(F::zero(), F::zero()),
        })
        .collect();
    let q = Poly::new(d);

    let mut z = initial_guesses(&q);
    let mut done = vec![false; n];
    let eps = F::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (pv, dv) = q.eval_with_derivative(z[k]);
            if pv.norm() <= F::lit(8.0) * eps * q.eval_scale(z[k]) {
                done[k] = true;
                continue;
            }
            let ratio = pv / dv;
            let mut sum = Complex::new(F::zero(), F::zero());
            for j in 0..n {
                if j != k {
                    sum += (z[k] - z[j]).inv();
                }
            }
            let w = ratio / (Complex::new(F::one(), F::zero()) - ratio * sum);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[k] -= w;
            if w.norm() <= eps * z[k].norm() {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }

    z.into_iter()
        .map(|zk| {
            let r = zk * rho;
            let (pv, dv) = p.eval_with_derivative(r);
            if dv.norm().is_zero() {
                return r;
            }
            let polished = r - pv / dv;
            if polished.re.is_finite() && polished.im.is_finite() && p.eval(polished).norm() < pv.norm() {
                polished
            } else {
                r
            }
        })
        .collect()
}

/// Starting points on circles whose radii come from the upper convex hull
/// of `(k, ln|d_k|)`, one circle per hull edge.
fn initial_guesses<F: Scalar>(q: &Poly<F>) -> Vec<Complex<F>> {
    let n = q.degree();
    let pts: Vec<(usize, F)> = q
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.norm().is_zero())
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, F)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (F::lit(x2 as f64) - F::lit(x1 as f64)) * (pt.1 - y1)
                - (y2 - y1) * (F::lit(pt.0 as f64) - F::lit(x1 as f64));
            if cross >= F::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let two_pi = F::TAU();
    let mut z = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, yi) = w[0];
        let (j, yj) = w[1];
        let count = j - i;
        let r = ((yi - yj) / F::lit(count as f64)).exp();
        for m in 0..count {
            let theta = two_pi * F::lit(m as f64) / F::lit(count as f64)
                + two_pi * F::lit(i as f64) / F::lit(n as f64)
                + F::lit(ANGLE_OFFSET);
            z.push(Complex::from_polar(r, theta));
        }
    }
    z
}

/// Groups roots closer than `tol` relative to their magnitude.
pub fn cluster_roots<F: Scalar>(roots: &[Complex<F>], tol: F) -> Vec<RootCluster<F>> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i]];
        for j in (i + 1)..roots.len() {
            if !used[j] && near(roots[i], roots[j], tol) {
                used[j] = true;
                members.push(roots[j]);
            }
        }
        let k = F::lit(members.len() as f64);
        let center = members.iter().fold(Complex::new(F::zero(), F::zero()), |a, &b| a + b) / k;
        out.push(RootCluster { center, multiplicity: members.len() });
    }
    out
}

pub(crate) fn near<F: Scalar>(a: Complex<F>, b: Complex<F>, tol: F) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(F::min_positive_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn matched_error(found: &[C], truth: &[C]) -> f64 {
        let scale = truth.iter().fold(0.0f64, |m, r| m.max(r.norm()));
        let mut used = vec![false; found.len()];
        let mut worst = 0.0f64;
        for t in truth {
            let (k, d) = found
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, f)| (k, (f - t).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            used[k] = true;
            worst = worst.max(d / scale);
        }
        worst
    }

    #[test]
    fn unit_imaginary_pair() {
        let r = poly_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(matched_error(&r, &[c(0.0, 1.0), c(0.0, -1.0)]) < 1e-14);
    }

    #[test]
    fn product_round_trip() {
        let truth = [c(1.0, 2.0), c(3.0, 0.0)];
        let p = Poly::from_roots(c(1.0, 0.0), &truth);
        let r = poly_roots(p.coeffs()).unwrap();
        assert!(matched_error(&r, &truth) < 1e-10);
    }

    #[test]
    fn degree_zero_rejected() {
        assert_eq!(poly_roots(&[c(3.0, 0.0)]), Err(Error::DegreeZero));
        assert_eq!(poly_roots::<f64>(&[]), Err(Error::DegreeZero));
    }

    #[test]
    fn zero_roots_are_exact() {
        let r = poly_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    #[test]
    fn widely_spread_magnitudes() {
        let truth = [c(-3.6e6, 0.0), c(-126.7, -10.3), c(-4.9, 461.1), c(-120.0, 630.0), c(0.0, 314.159)];
        let p = Poly::from_roots(c(1.0, 0.0), &truth);
        let r = poly_roots(p.coeffs()).unwrap();
        for t in truth {
            let best = r.iter().map(|f| (f - t).norm() / t.norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "{t} {best}");
        }
    }

    #[test]
    fn clustering_groups_double_root() {
        let p = Poly::from_roots(c(1.0, 0.0), &[c(2.0, 0.0), c(2.0, 0.0), c(-1.0, 1.0)]);
        let r = poly_roots(p.coeffs()).unwrap();
        let cl = cluster_roots(&r, 1e-6);
        assert_eq!(cl.len(), 2);
        assert!(cl.iter().any(|k| k.multiplicity == 2 && (k.center - c(2.0, 0.0)).norm() < 1e-7));
    }

    #[test]
    fn single_precision() {
        let truth = [Complex::new(1.0f32, 2.0), Complex::new(-3.0, 0.5)];
        let p = Poly::from_roots(Complex::new(1.0f32, 0.0), &truth);
        let r = poly_roots(p.coeffs()).unwrap();
        for t in truth {
            assert!(r.iter().any(|f| (f - t).norm() < 1e-4));
        }
    }
}
