use num_complex::Complex64 as C;
use ssrdc_core::sim::analysis::spectral_peak;
use ssrdc_core::sim::relay::{Relay, RelayConfig};
use ssrdc_core::sim::{simulate, Event, EventKind, KssoSource, Scenario};
use ssrdc_core::{Error, System};
use std::f64::consts::TAU;

fn short(name: &str) -> Scenario {
    Scenario { name: name.into(), t_end: 0.6, ..Default::default() }
}

#[test]
fn steady_state_stays_put() {
    let sc = Scenario { ssrdc_enabled: false, ..short("steady") };
    let out = simulate(&sc).unwrap();
    let p0 = out.p[0];
    assert!(out.p.iter().all(|p| (p - p0).abs() < 1e-3 * p0.abs()), "{p0}");
    assert!(out.f_pll.iter().all(|f| (f - 50.0).abs() < 1e-3));
    assert_eq!(out.relay_trip_time, None);
}

#[test]
fn reruns_are_identical() {
    let sc = Scenario {
        events: vec![Event { t: 0.2, kind: EventKind::PowerStep { mw: 2.0 } }],
        k_sso_source: KssoSource::Pretuned,
        ..short("step")
    };
    assert_eq!(simulate(&sc).unwrap(), simulate(&sc).unwrap());
}

#[test]
fn passive_network_loses_energy() {
    let sc = Scenario { passive: true, ssrdc_enabled: false, ..short("passive") };
    let out = simulate(&sc).unwrap();
    let energy: Vec<f64> =
        (0..out.len()).map(|k| out.ia[k].powi(2) + out.ib[k].powi(2) + out.ic[k].powi(2)).collect();
    assert!(energy.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    assert!(*energy.last().unwrap() < 1e-3 * energy[0]);
}

#[test]
fn unit_count_change_retunes_online() {
    let sc = Scenario { events: vec![Event { t: 0.1, kind: EventKind::UnitCount { n: 8 } }], t_end: 0.3, ..short("n8") };
    let out = simulate(&sc).unwrap();
    assert_eq!(out.k_sso_history.len(), 2);
    let (t, k) = out.k_sso_history[1];
    assert!((t - 0.1 - sc.retune_latency).abs() < 1.5 * sc.dt);
    let pre = ssrdc_core::tuner::tune_ksso(&System::default().with_n(8)).unwrap().k_sso;
    assert_eq!(k, pre);
}

#[test]
fn fixed_gain_is_not_retuned() {
    let mut sc = Scenario {
        k_sso_source: KssoSource::Fixed,
        events: vec![Event { t: 0.1, kind: EventKind::UnitCount { n: 8 } }],
        t_end: 0.2,
        ..short("fixed")
    };
    sc.system.ssrdc.k_sso = 0.03;
    let out = simulate(&sc).unwrap();
    assert_eq!(out.k_sso_history, vec![(0.0, 0.03)]);
}

#[test]
fn csv_has_one_row_per_sample() {
    let out = simulate(&Scenario { t_end: 0.05, ..short("csv") }).unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), out.len() + 1);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 12);
}

#[test]
fn bad_settings_rejected() {
    for sc in [
        Scenario { dt: 1e-3, ..short("dt") },
        Scenario { t_end: 0.0, ..short("t_end") },
        Scenario { decimation: 0, ..short("decimation") },
        Scenario {
            events: vec![
                Event { t: 0.3, kind: EventKind::UnitCount { n: 7 } },
                Event { t: 0.1, kind: EventKind::UnitCount { n: 8 } },
            ],
            ..short("order")
        },
        Scenario { events: vec![Event { t: 0.1, kind: EventKind::UnitCount { n: 0 } }], ..short("n0") },
    ] {
        assert!(matches!(simulate(&sc), Err(Error::Invalid(_))), "{}", sc.name);
    }
}

fn relay_run(burst: f64) -> Option<f64> {
    let dt = 2e-4;
    let mut r = Relay::new(&RelayConfig::default(), 2200.0, dt);
    for k in 0..10000 {
        let t = k as f64 * dt;
        let osc = if (0.5..0.5 + burst).contains(&t) { C::from_polar(1500.0, TAU * 26.0 * t) } else { C::new(0.0, 0.0) };
        r.step(C::new(1650.0, 0.0) + osc, t);
    }
    r.trip_time()
}

#[test]
fn relay_rides_through_a_short_burst() {
    assert_eq!(relay_run(0.1), None);
    assert_eq!(relay_run(0.45), None);
    let t = relay_run(1.2).expect("sustained oscillation trips");
    assert!((1.0..1.1).contains(&t), "{t}");
}

#[test]
fn super_synchronous_line_has_a_mirror() {
    let sc = Scenario { ssrdc_enabled: false, theta0: 0.05, t_end: 0.8, ..short("kick") };
    let out = simulate(&sc).unwrap();
    let fs = out.sample_rate();
    let sup = spectral_peak(&out.ia, fs, 50.0, (52.0, 98.0), 0.25).expect("super line");
    let sub = spectral_peak(&out.ia, fs, 50.0, (2.0, 48.0), 0.25).expect("sub line");
    assert!(sub.amplitude > 0.0);
    assert!((sup.freq + sub.freq - 100.0).abs() < 0.5, "{} + {}", sup.freq, sub.freq);
}
