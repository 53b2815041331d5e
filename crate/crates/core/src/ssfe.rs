//! Super-synchronous frequency estimator.
//!
//! Every hop the most recent window is fitted with the fundamental plus one
//! tone; the tone frequency comes from a Hann-windowed DFT on a fine grid,
//! refined by least squares. A detected tone is published once it has
//! persisted for `t_e` since its estimated onset, and withdrawn `t_e` after
//! its estimated end.

use crate::error::{invalid, Result};
use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::TAU;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsfeConfig {
    /// Hz.
    pub sample_rate: f64,
    /// Fundamental, Hz.
    pub f1: f64,
    /// Tone amplitude relative to the fundamental that counts as present.
    pub threshold: f64,
    /// Reporting delay, s.
    pub t_e: f64,
    /// Analysis window, s.
    pub window: f64,
    /// Analysis interval, s.
    pub hop: f64,
    /// DFT grid spacing, Hz.
    pub grid: f64,
}

impl Default for SsfeConfig {
    fn default() -> Self {
        Self { sample_rate: 5000.0, f1: 50.0, threshold: 0.05, t_e: 0.2, window: 0.2, hop: 0.02, grid: 0.5 }
    }
}

impl SsfeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.f1 > 0.0
            && self.sample_rate >= 20.0 * self.f1
            && self.threshold > 0.0
            && self.threshold < 1.0
            && self.t_e >= 0.0
            && self.window > 0.0
            && self.hop > 0.0
            && self.grid > 0.0;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("ssfe settings out of range: {self:?}")))
        }
    }

    /// Search band `(f1 + 2, 2f1 − 2)`.
    pub fn band(&self) -> (f64, f64) {
        (self.f1 + 2.0, 2.0 * self.f1 - 2.0)
    }

    fn samples(&self, seconds: f64) -> usize {
        (seconds * self.sample_rate).round().max(1.0) as usize
    }
}

/// Fundamental and strongest in-band tone of a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToneFit {
    /// Tone frequency, Hz.
    pub fp: f64,
    pub amplitude: f64,
    pub fundamental: f64,
}

fn ls<const K: usize>(x: &[f64], basis: impl Fn(usize) -> [f64; K]) -> Option<(SVector<f64, K>, f64)> {
    let mut g = SMatrix::<f64, K, K>::zeros();
    let mut p = SVector::<f64, K>::zeros();
    let mut yy = 0.0;
    for (k, &y) in x.iter().enumerate() {
        let b = SVector::<f64, K>::from(basis(k));
        g += b * b.transpose();
        p += b * y;
        yy += y * y;
    }
    let c = g.cholesky()?.solve(&p);
    Some((c, (yy - c.dot(&p)).max(0.0)))
}

fn trig(w: f64, fs: f64) -> impl Fn(usize) -> (f64, f64) {
    move |k| (w * k as f64 / fs).sin_cos()
}

/// Single-bin magnitude of the Hann-windowed signal at `f`, scaled so a
/// sinusoid of amplitude `A` reads `A`.
pub fn hann_amplitude(x: &[f64], fs: f64, f: f64) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let (mut re, mut im, mut wsum) = (0.0, 0.0, 0.0);
    let step = TAU * f / fs;
    for (k, &v) in x.iter().enumerate() {
        let w = 0.5 - 0.5 * (TAU * k as f64 / (n - 1) as f64).cos();
        let (s, c) = (step * k as f64).sin_cos();
        re += w * v * c;
        im -= w * v * s;
        wsum += w;
    }
    2.0 * re.hypot(im) / wsum
}

/// Peak of [`hann_amplitude`] over `band` on a `grid`-spaced search,
/// interpolated through the log-magnitudes of the neighbouring points.
pub fn hann_peak(x: &[f64], fs: f64, band: (f64, f64), grid: f64) -> Option<(f64, f64)> {
    let m = ((band.1 - band.0) / grid).floor() as usize;
    if m < 2 || x.len() < 4 {
        return None;
    }
    let mags: Vec<f64> = (0..=m).map(|i| hann_amplitude(x, fs, band.0 + i as f64 * grid)).collect();
    let (i, &peak) = mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if i == 0 || i == m || peak <= 0.0 {
        return Some((band.0 + i as f64 * grid, peak));
    }
    let (a, b, c) = (mags[i - 1].max(1e-300).ln(), peak.ln(), mags[i + 1].max(1e-300).ln());
    let den = a - 2.0 * b + c;
    let d = if den < 0.0 { 0.5 * (a - c) / den } else { 0.0 };
    Some((band.0 + (i as f64 + d) * grid, (b - 0.25 * (a - c) * d).exp()))
}

/// `x` minus its least-squares fit by a sinusoid at `f1` and an offset.
pub fn remove_fundamental(x: &[f64], fs: f64, f1: f64) -> Option<Vec<f64>> {
    let t1 = trig(TAU * f1, fs);
    let (c1, _) = ls(x, |k| {
        let (s, c) = t1(k);
        [c, s, 1.0]
    })?;
    Some(
        x.iter()
            .enumerate()
            .map(|(k, &y)| {
                let (s, c) = t1(k);
                y - c1[0] * c - c1[1] * s - c1[2]
            })
            .collect(),
    )
}

/// Fits `x` with the fundamental, an offset and one in-band tone.
pub fn fit_tone(x: &[f64], cfg: &SsfeConfig) -> Option<ToneFit> {
    let fs = cfg.sample_rate;
    let t1 = trig(TAU * cfg.f1, fs);
    let resid = remove_fundamental(x, fs, cfg.f1)?;
    let band = cfg.band();
    let (f0, _) = hann_peak(&resid, fs, band, cfg.grid)?;

    let joint = |f: f64| {
        let tp = trig(TAU * f, fs);
        ls(x, |k| {
            let (s, c) = t1(k);
            let (sp, cp) = tp(k);
            [c, s, 1.0, cp, sp]
        })
    };
    let sse = |f: f64| joint(f).map_or(f64::INFINITY, |(_, e)| e);
    // the fundamental removal leaks near-fundamental tones, so the spectral
    // peak is only a start; scan the joint residual before refining
    let step = cfg.grid / 2.0;
    let fc = (-4..=4)
        .map(|j| (f0 + f64::from(j) * step).clamp(band.0, band.1))
        .map(|f| (f, sse(f)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(f0, |(f, _)| f);
    let (mut lo, mut hi) = ((fc - step).max(band.0), (fc + step).min(band.1));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fa, mut fb) = (sse(a), sse(b));
    while hi - lo > 1e-4 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = sse(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = sse(b);
        }
    }
    fit_at(x, cfg, 0.5 * (lo + hi))
}

/// Fundamental and tone amplitudes of `x` with the tone frequency fixed.
pub fn fit_at(x: &[f64], cfg: &SsfeConfig, fp: f64) -> Option<ToneFit> {
    let t1 = trig(TAU * cfg.f1, cfg.sample_rate);
    let tp = trig(TAU * fp, cfg.sample_rate);
    let (c, _) = ls(x, |k| {
        let (s, c) = t1(k);
        let (sp, cp) = tp(k);
        [c, s, 1.0, cp, sp]
    })?;
    Some(ToneFit { fp, amplitude: c[3].hypot(c[4]), fundamental: c[0].hypot(c[1]) })
}

fn level(fit: Option<ToneFit>) -> f64 {
    match fit {
        Some(f) if f.fundamental > 0.0 => f.amplitude / f.fundamental,
        Some(f) if f.amplitude > 0.0 => f64::INFINITY,
        _ => 0.0,
    }
}

/// Boundary `τ` of a tone at `fp` in `x`: the split maximizing the energy
/// the tone explains on the side where it is present (`after` or before).
fn change_point(x: &[f64], cfg: &SsfeConfig, fp: f64, after: bool) -> usize {
    let n = x.len();
    let fs = cfg.sample_rate;
    let Some(resid) = remove_fundamental(x, fs, cfg.f1) else {
        return 0;
    };
    let tp = trig(TAU * fp, fs);
    // running sums of r·c, r·s, c², s², c·s from the present side
    let mut acc = [0.0f64; 5];
    let mut best = (0.0, if after { 0 } else { n });
    let min_len = (fs / fp).ceil() as usize;
    let order: Box<dyn Iterator<Item = usize>> = if after { Box::new((0..n).rev()) } else { Box::new(0..n) };
    for (len, k) in order.enumerate() {
        let (s, c) = tp(k);
        let r = resid[k];
        acc[0] += r * c;
        acc[1] += r * s;
        acc[2] += c * c;
        acc[3] += s * s;
        acc[4] += c * s;
        if len + 1 < min_len {
            continue;
        }
        let det = acc[2] * acc[3] - acc[4] * acc[4];
        if det <= 0.0 {
            continue;
        }
        let e = (acc[3] * acc[0] * acc[0] - 2.0 * acc[4] * acc[0] * acc[1] + acc[2] * acc[1] * acc[1]) / det;
        if e > best.0 {
            best = (e, if after { k } else { k + 1 });
        }
    }
    best.1
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Pending {
    None,
    Publish { at: u64, onset: u64 },
    Clear { at: u64 },
}

/// Streaming estimator; one instance per controller.
#[derive(Clone, Debug)]
pub struct SsfeState {
    cfg: SsfeConfig,
    buf: VecDeque<f64>,
    depth: usize,
    window: usize,
    hop: usize,
    guard: u64,
    count: u64,
    latest: Option<ToneFit>,
    estimate: Option<f64>,
    pending: Pending,
}

impl SsfeState {
    pub fn new(cfg: SsfeConfig) -> Result<Self> {
        cfg.validate()?;
        let window = cfg.samples(cfg.window);
        let depth = cfg.samples(2.0 * cfg.t_e).max(2 * window) + window;
        let hop = cfg.samples(cfg.hop);
        let guard = (hop / 4) as u64;
        Ok(Self {
            cfg,
            buf: VecDeque::with_capacity(depth),
            depth,
            window,
            hop,
            guard,
            count: 0,
            latest: None,
            estimate: None,
            pending: Pending::None,
        })
    }

    pub fn config(&self) -> &SsfeConfig {
        &self.cfg
    }

    /// Published tone frequency, Hz.
    pub fn current_estimate(&self) -> Option<f64> {
        self.estimate
    }

    /// Most recent window fit, published or not.
    pub fn latest_fit(&self) -> Option<ToneFit> {
        self.latest
    }

    /// Time of the next sample, s.
    pub fn time(&self) -> f64 {
        self.count as f64 / self.cfg.sample_rate
    }

    pub fn reset(&mut self) {
        self.buf.clear();
        self.latest = None;
        self.estimate = None;
        self.pending = Pending::None;
    }

    pub fn push(&mut self, samples: &[f64]) -> Option<f64> {
        for &x in samples {
            self.push_one(x);
        }
        self.estimate
    }

    pub fn push_one(&mut self, x: f64) -> Option<f64> {
        let k = self.count;
        self.count += 1;
        if !x.is_finite() {
            self.reset();
            return None;
        }
        if self.buf.len() == self.depth {
            self.buf.pop_front();
        }
        self.buf.push_back(x);
        if self.buf.len() >= self.window && self.count % self.hop as u64 == 0 {
            self.analyze();
        }
        match self.pending {
            Pending::Publish { at, .. } if k >= at => {
                self.estimate = self.latest.map(|f| f.fp);
                self.pending = Pending::None;
            }
            Pending::Clear { at } if k >= at => {
                self.estimate = None;
                self.pending = Pending::None;
            }
            _ => {}
        }
        self.estimate
    }

    fn analyze(&mut self) {
        let (a, b) = self.buf.as_slices();
        let all: Vec<f64> = a.iter().chain(b).copied().collect();
        let start = all.len() - self.window;
        let fit = fit_tone(&all[start..], &self.cfg);
        self.latest = fit;
        let thr = self.cfg.threshold;
        let mut lvl = level(fit);
        let first = self.count - all.len() as u64;
        let delay = (self.cfg.t_e * self.cfg.sample_rate).round() as u64;

        let mut onset = None;
        if let Pending::Publish { onset: o, .. } = self.pending {
            // a decaying transient must not ride on its own past: judge the latest stretch
            let recent = (all.len() - self.window / 4).max(o.saturating_sub(first) as usize).min(all.len() - self.window / 8);
            lvl = match fit {
                Some(f) if lvl >= thr / 2.0 => level(fit_at(&all[recent..], &self.cfg, f.fp)),
                _ => lvl,
            };
        } else if self.estimate.is_none() && lvl >= thr / 2.0 {
            // a tone that began inside the window is diluted by the part before it
            let fp = fit.expect("nonzero level implies a fit").fp;
            let k = change_point(&all, &self.cfg, fp, true);
            let from = k.max(start);
            if from > start && all.len() - from >= self.window / 4 {
                lvl = lvl.max(level(fit_at(&all[from..], &self.cfg, fp)));
            }
            onset = Some(k);
        }
        // amplitudes are estimates; an exact-threshold tone must not flicker
        let present = lvl >= thr * (1.0 - 1e-6);
        let absent = lvl < thr / 2.0;

        match (self.estimate.is_some(), self.pending) {
            (false, Pending::None) if present => {
                let onset = first + onset.expect("computed above") as u64;
                self.pending = Pending::Publish { at: (onset + delay + self.guard).max(self.count - 1), onset };
            }
            // presence must hold without a break until publication
            (false, Pending::Publish { .. }) if !present => self.pending = Pending::None,
            (true, Pending::None) if absent => {
                let fp = self.estimate.expect("published");
                let end = first + change_point(&all, &self.cfg, fp, false) as u64;
                self.pending = Pending::Clear { at: (end + delay + self.guard).max(self.count - 1) };
            }
            (true, Pending::Clear { .. }) if present => self.pending = Pending::None,
            (true, _) => {
                if let Some(f) = fit.filter(|_| !absent) {
                    self.estimate = Some(f.fp);
                }
            }
            _ => {}
        }
    }
}

/// Outcome of one synthetic record fed through a fresh estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub fp: f64,
    pub amplitude: f64,
    /// Time from tone onset to the first published estimate, s.
    pub latency: Option<f64>,
    /// Last estimate while the tone is on, minus `fp`, Hz.
    pub error: Option<f64>,
    /// Time from tone removal until the estimate clears, s.
    pub reset: Option<f64>,
    /// An estimate was published before the tone started.
    pub false_alarm: bool,
}

/// Unit fundamental at `f1`, plus a tone of relative `amplitude` at `fp`
/// (phase `phase` at onset) present from `onset` for `duration` seconds,
/// followed by `tail` seconds of fundamental alone.
pub fn bench_tone(
    cfg: &SsfeConfig,
    fp: f64,
    amplitude: f64,
    phase: f64,
    onset: f64,
    duration: f64,
    tail: f64,
) -> Result<BenchResult> {
    let mut st = SsfeState::new(cfg.clone())?;
    let fs = cfg.sample_rate;
    let off = onset + duration;
    let total = ((off + tail) * fs).round() as usize;
    let mut r = BenchResult { fp, amplitude, latency: None, error: None, reset: None, false_alarm: false };
    for k in 0..total {
        let t = k as f64 / fs;
        let on = t >= onset && t < off;
        let mut x = (TAU * cfg.f1 * t).sin();
        if on {
            x += amplitude * (TAU * fp * (t - onset) + phase).sin();
        }
        let e = st.push_one(x);
        match e {
            Some(_) if t < onset => r.false_alarm = true,
            Some(f) if on => {
                r.latency.get_or_insert(t - onset);
                r.error = Some(f - fp);
            }
            None if t >= off && r.latency.is_some() && r.reset.is_none() => r.reset = Some(t - off),
            _ => {}
        }
    }
    Ok(r)
}
