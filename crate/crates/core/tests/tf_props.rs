use num_complex::Complex64 as C;
use proptest::prelude::*;
use ssrdc_core::tf::{parallel, poly_roots, ComplexRational, Poly};
use ssrdc_core::Rational;

fn complex() -> impl Strategy<Value = C> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| C::new(a, b))
}

fn root() -> impl Strategy<Value = C> {
    (0.2f64..4.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| C::from_polar(r, t))
}

/// Proper rational with well separated random roots.
fn rational() -> impl Strategy<Value = Rational> {
    (
        prop::collection::vec(root(), 0..3),
        prop::collection::vec(root(), 1..4),
        complex().prop_filter("nonzero gain", |g| g.norm() > 0.1),
    )
        .prop_map(|(z, p, g)| {
            ComplexRational::new(Poly::from_roots(g, &z), Poly::from_roots(C::new(1.0, 0.0), &p)).unwrap()
        })
}

fn rel_coeff_err(a: &Rational, b: &Rational) -> f64 {
    // a rounding-level leading coefficient may survive trimming; it must still be tiny
    let diff = |x: &Poly<f64>, y: &Poly<f64>| {
        let scale = x.max_abs().max(y.max_abs());
        let (x, y) = (x.coeffs(), y.coeffs());
        let zero = C::new(0.0, 0.0);
        (0..x.len().max(y.len()))
            .map(|k| (x.get(k).unwrap_or(&zero) - y.get(k).unwrap_or(&zero)).norm() / scale)
            .fold(0.0, f64::max)
    };
    diff(a.num(), b.num()).max(diff(a.den(), b.den()))
}

fn separated(a: &Rational, b: &Rational) -> bool {
    // operands sharing near-coincident roots make the identities ill-posed
    let mut all = a.poles().unwrap();
    all.extend(b.poles().unwrap());
    all.extend(a.zeros().unwrap());
    all.extend(b.zeros().unwrap());
    all.iter().enumerate().all(|(i, x)| all[i + 1..].iter().all(|y| (x - y).norm() > 0.05))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn add_then_subtract(a in rational(), b in rational()) {
        prop_assume!(separated(&a, &b));
        let back = a.add(&b).sub(&b);
        prop_assert!(rel_coeff_err(&back, &a) < 1e-10, "{:?} vs {:?}", back, a);
    }

    #[test]
    fn multiply_then_divide(a in rational(), b in rational()) {
        prop_assume!(separated(&a, &b));
        let back = a.mul(&b).checked_div(&b).unwrap();
        prop_assert!(rel_coeff_err(&back, &a) < 1e-10, "{:?} vs {:?}", back, a);
    }

    #[test]
    fn shift_evaluates_at_offset(h in rational(), w in -800.0f64..800.0, f1 in 10.0f64..60.0) {
        let shifted = h.shift(f1);
        let lhs = shifted.eval(C::new(0.0, w));
        let rhs = h.eval(C::new(0.0, w - std::f64::consts::TAU * f1));
        if let (Ok(l), Ok(r)) = (lhs, rhs) {
            prop_assert!((l - r).norm() <= 1e-9 * r.norm().max(1.0));
        }
    }

    #[test]
    fn shift_inverse(h in rational(), f1 in 10.0f64..60.0) {
        // coefficients of the shifted copy grow like (2π f1)^n, which bounds
        // the attainable coefficient accuracy of the round trip
        let growth = (std::f64::consts::TAU * f1).powi(h.den().degree().max(h.num().degree()) as i32);
        prop_assert!(h.shift(f1).shift(-f1).approx_eq(&h, 64.0 * f64::EPSILON * growth));
    }

    #[test]
    fn parallel_identical_is_exact_scaling(h in rational(), k in 1usize..9) {
        let zs = vec![h.clone(); k];
        let p = parallel(&zs).unwrap();
        prop_assert_eq!(p, h.scalar_mul(C::new(1.0 / k as f64, 0.0)));
    }

    #[test]
    fn roots_of_degree_ten(rs in prop::collection::vec(root(), 10), lead in complex()) {
        prop_assume!(lead.norm() > 0.1);
        prop_assume!(rs.iter().enumerate().all(|(i, x)| rs[i + 1..].iter().all(|y| (x - y).norm() > 0.05)));
        let p = Poly::from_roots(lead, &rs);
        let found = poly_roots(p.coeffs()).unwrap();
        prop_assert_eq!(found.len(), 10);
        for t in &rs {
            let best = found.iter().map(|f| (f - t).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-7 * t.norm().max(1.0));
        }
        for f in &found {
            prop_assert!(p.eval(*f).norm() <= 1e-8 * p.eval_scale(*f));
        }
    }
}

#[test]
fn inverse_shift_of_integrator() {
    let h = Rational::from_real(&[1.0], &[0.0, 1.0]).unwrap();
    let w1 = std::f64::consts::TAU * 50.0;
    let shifted = h.shift(50.0);
    let expected = ComplexRational::new(Poly::one(), Poly::new(vec![C::new(0.0, -w1), C::new(1.0, 0.0)])).unwrap();
    assert_eq!(shifted, expected);
}
