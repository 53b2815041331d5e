use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssrdc_core::ssfe::{bench_tone, SsfeConfig, SsfeState};
use std::f64::consts::TAU;

fn cfg() -> SsfeConfig {
    SsfeConfig::default()
}

fn feed(st: &mut SsfeState, secs: f64, x: impl Fn(f64) -> f64) -> Vec<Option<f64>> {
    let fs = st.config().sample_rate;
    let t0 = st.time();
    (0..(secs * fs).round() as usize).map(|k| st.push_one(x(t0 + k as f64 / fs))).collect()
}

#[test]
fn clean_fundamental_publishes_nothing() {
    let mut st = SsfeState::new(cfg()).unwrap();
    let est = feed(&mut st, 2.0, |t| (TAU * 50.0 * t).sin());
    assert!(est.iter().all(Option::is_none));
}

#[test]
fn noise_publishes_nothing() {
    let mut st = SsfeState::new(cfg()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<f64> = (0..10000).map(|k| (TAU * 50.0 * k as f64 / 5000.0).sin() + rng.gen_range(-0.02..0.02)).collect();
    assert_eq!(st.push(&samples), None);
    assert!(samples.chunks(100).all(|c| st.push(c).is_none()));
}

#[test]
fn tone_is_published_after_the_delay() {
    let c = cfg();
    let r = bench_tone(&c, 74.0, 0.1, 0.3, 0.5, 1.0, 0.6).unwrap();
    assert!(!r.false_alarm);
    let latency = r.latency.expect("detected");
    assert!(latency >= c.t_e && latency <= c.t_e + 2.0 * c.hop, "{latency}");
    assert!(r.error.unwrap().abs() < 0.5);
    let reset = r.reset.expect("cleared");
    assert!(reset >= c.t_e && reset <= c.t_e + 2.0 * c.hop, "{reset}");
}

#[test]
fn reset_forgets_the_tone() {
    let mut st = SsfeState::new(cfg()).unwrap();
    let est = feed(&mut st, 1.0, |t| (TAU * 50.0 * t).sin() + 0.2 * (TAU * 80.0 * t).sin());
    assert!(est.last().unwrap().is_some());
    st.reset();
    assert_eq!(st.current_estimate(), None);
    assert_eq!(st.latest_fit(), None);
    let est = feed(&mut st, 0.1, |t| (TAU * 50.0 * t).sin() + 0.2 * (TAU * 80.0 * t).sin());
    assert!(est.iter().all(Option::is_none));
}

#[test]
fn non_finite_input_resets() {
    let mut st = SsfeState::new(cfg()).unwrap();
    feed(&mut st, 1.0, |t| (TAU * 50.0 * t).sin() + 0.2 * (TAU * 80.0 * t).sin());
    assert!(st.current_estimate().is_some());
    assert_eq!(st.push_one(f64::NAN), None);
}

#[test]
fn deterministic() {
    let run = || {
        let mut st = SsfeState::new(cfg()).unwrap();
        feed(&mut st, 1.5, |t| (TAU * 50.0 * t).sin() + 0.1 * (TAU * 67.3 * t).sin())
    };
    assert_eq!(run(), run());
}

#[test]
fn invalid_settings_rejected() {
    assert!(SsfeState::new(SsfeConfig { sample_rate: 500.0, ..cfg() }).is_err());
    assert!(SsfeState::new(SsfeConfig { threshold: 0.0, ..cfg() }).is_err());
    assert!(SsfeState::new(SsfeConfig { hop: 0.0, ..cfg() }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn in_band_tones_are_found(fp in 55.0f64..95.0, amp in 0.06f64..0.3, phase in 0.0f64..TAU) {
        let c = cfg();
        let r = bench_tone(&c, fp, amp, phase, 0.4, 0.8, 0.5).unwrap();
        prop_assert!(!r.false_alarm);
        prop_assert!(r.latency.is_some_and(|l| l >= c.t_e && l <= c.t_e + 2.0 * c.hop), "{:?}", r);
        prop_assert!(r.error.unwrap().abs() < 0.05, "{:?}", r);
    }

    #[test]
    fn weak_tones_are_ignored(fp in 55.0f64..95.0, amp in 0.0f64..0.02) {
        let r = bench_tone(&cfg(), fp, amp, 0.0, 0.4, 0.8, 0.2).unwrap();
        prop_assert!(r.latency.is_none() && !r.false_alarm);
    }
}
