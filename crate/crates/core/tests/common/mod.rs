#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64 as C;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssrdc_core::System;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The calibrated case with controller gains, load, unit count and line
/// length drawn around their nominal values.
pub fn random_system(rng: &mut impl Rng) -> System {
    let mut s = System::default()
        .with_n(rng.gen_range(1..=10))
        .with_grid_scale(rng.gen_range(0.3..1.6))
        .with_i1(rng.gen_range(0.0..2200.0));
    s.plant.kp *= rng.gen_range(0.5..1.5);
    s.plant.ki *= rng.gen_range(0.5..1.5);
    s.plant.kip *= rng.gen_range(0.5..1.5);
    s.plant.kii *= rng.gen_range(0.5..1.5);
    s
}

/// Pairs every true root with its nearest unused found root and returns
/// the largest distance relative to the true root's magnitude.
pub fn matched_error(found: &[C], truth: &[C]) -> f64 {
    assert_eq!(found.len(), truth.len());
    let mut used = vec![false; found.len()];
    let mut worst = 0.0f64;
    for t in truth {
        let (k, d) = found
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, f)| (k, (f - t).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("as many found roots as true ones");
        used[k] = true;
        worst = worst.max(d / t.norm());
    }
    worst
}

/// `|a − b| ≤ tol·max(|a|, |b|)`.
pub fn near(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm())
}

/// Least-squares amplitude and phase of `x` against `cos(ωt)`/`sin(ωt)`.
pub fn sine_fit(x: &[f64], dt: f64, omega: f64) -> (f64, f64) {
    let (mut cc, mut ss, mut cs, mut xc, mut xs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, v) in x.iter().enumerate() {
        let (s, c) = (omega * k as f64 * dt).sin_cos();
        cc += c * c;
        ss += s * s;
        cs += c * s;
        xc += v * c;
        xs += v * s;
    }
    let det = cc * ss - cs * cs;
    let a = (xc * ss - xs * cs) / det;
    let b = (xs * cc - xc * cs) / det;
    // x ≈ a·cos + b·sin = A·cos(ωt − φ)
    (a.hypot(b), b.atan2(a))
}

const FRAC_BITS: i32 = 64;

/// Rounds both parts to multiples of 2^-64 so they have an exact integer image.
pub fn dyadic(z: C) -> C {
    let s = 2f64.powi(FRAC_BITS);
    C::new((z.re * s).round() / s, (z.im * s).round() / s)
}

fn fixed(x: f64) -> BigInt {
    BigInt::from_f64(x * 2f64.powi(FRAC_BITS)).expect("finite")
}

fn round_scaled(x: &BigInt, scale: i32) -> f64 {
    let shift = (x.bits() as i32 - 64).max(0);
    (x >> shift as usize).to_f64().expect("64-bit head") * 2f64.powi(shift - scale)
}

/// Ascending coefficients of `lead·Π(s − r)`, expanded in exact integer
/// arithmetic and rounded to double precision once. Inputs must be `dyadic`.
pub fn exact_from_roots(lead: C, roots: &[C]) -> Vec<C> {
    let mut c = vec![(fixed(lead.re), fixed(lead.im))];
    for r in roots {
        let (rr, ri) = (fixed(r.re), fixed(r.im));
        let mut next = vec![(BigInt::zero(), BigInt::zero()); c.len() + 1];
        for (k, (a, b)) in c.iter().enumerate() {
            next[k + 1].0 += a << FRAC_BITS as usize;
            next[k + 1].1 += b << FRAC_BITS as usize;
            next[k].0 -= a * &rr - b * &ri;
            next[k].1 -= a * &ri + b * &rr;
        }
        c = next;
    }
    let scale = FRAC_BITS * (roots.len() as i32 + 1);
    c.iter().map(|(a, b)| C::new(round_scaled(a, scale), round_scaled(b, scale))).collect()
}
