//! Seeded synthetic traces and cooldown fixtures.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{lorentzian_model, ResonanceFit, ResonanceTrace};
use crate::error::{Error, Result};

pub const TRACE_POINTS: usize = 401;
/// Half-span of a synthetic trace in linewidths.
pub const TRACE_HALF_SPAN: f64 = 10.0;

/// Samples the Lorentzian with Gaussian noise on |S21|² (truncated at zero).
///
/// The noise standard deviation is `amplitude · 10^(−snr_db/10)`; an
/// infinite `snr_db` gives the exact model.
pub fn synth_trace(p: &ResonanceFit, snr_db: f64, seed: u64) -> Result<ResonanceTrace> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::param(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    if !(p.f0 > 0.0 && p.q_loaded > 0.0 && p.amplitude >= 0.0 && p.baseline >= 0.0) {
        return Err(Error::param("resonance parameters must be positive"));
    }
    let sigma = if snr_db.is_infinite() { 0.0 } else { p.amplitude * 10f64.powf(-snr_db / 10.0) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = TRACE_HALF_SPAN * p.fwhm();
    let step = 2.0 * half / (TRACE_POINTS - 1) as f64;
    let mut freqs = Vec::with_capacity(TRACE_POINTS);
    let mut s21 = Vec::with_capacity(TRACE_POINTS);
    for i in 0..TRACE_POINTS {
        let f = p.f0 - half + i as f64 * step;
        let mut power = lorentzian_model(p.f0, p.q_loaded, p.amplitude, p.baseline, f);
        if sigma > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            power = (power + sigma * z).max(0.0);
        }
        let phase = -(2.0 * p.q_loaded * (f - p.f0) / p.f0).atan();
        freqs.push(f);
        s21.push(Complex64::from_polar(power.sqrt(), phase));
    }
    ResonanceTrace::new(freqs, s21, format!("synthetic seed={seed} snr_db={snr_db}"))
}

/// Four-feature Δf(T) template rendered as a cooldown of traces.
///
/// Temperatures run from `t_start` down to `t_end` in `t_step`. Δf is
/// `rest_level` down to `rest_end`; then fluctuates within
/// `[rest_level, rest_level + fluctuation]`, starting at the top and returning
/// to `rest_level` on the last sample; steps up by `step` at the first sample
/// at or below `fluctuation_end` and again at or below `second_step`; wobbles
/// by ±`wobble` in alternation until `steady`; then holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthProfile {
    pub label: String,
    pub bare_f0: f64,
    pub q_loaded: f64,
    pub amplitude: f64,
    pub baseline: f64,
    pub snr_db: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub t_step: f64,
    pub rest_end: f64,
    pub fluctuation_end: f64,
    pub second_step: f64,
    pub steady: f64,
    pub rest_level: f64,
    pub fluctuation: f64,
    pub step: f64,
    pub wobble: f64,
    /// Small shift of the bare cavity once its walls superconduct.
    pub wall_transition_shift: f64,
    pub wall_tc: f64,
}

impl SynthProfile {
    /// N35-like template: −120 MHz at rest, two +35 MHz steps.
    pub fn n35() -> Self {
        SynthProfile {
            label: "N35".into(),
            bare_f0: 10e9,
            q_loaded: 2500.0,
            amplitude: 1e-2,
            baseline: 1e-4,
            snr_db: 20.0,
            t_start: 1.25,
            t_end: 0.05,
            t_step: 0.01,
            rest_end: 0.6,
            fluctuation_end: 0.3,
            second_step: 0.22,
            steady: 0.12,
            rest_level: -120e6,
            fluctuation: 21e6,
            step: 35e6,
            wobble: 14e6,
            wall_transition_shift: 3e3,
            wall_tc: 1.2,
        }
    }

    /// N50/N52-like template: −90 MHz at rest, two +50 MHz steps.
    pub fn n52() -> Self {
        SynthProfile {
            label: "N52".into(),
            rest_level: -90e6,
            step: 50e6,
            ..Self::n35()
        }
    }

    /// Default template for a magnet label.
    pub fn for_label(label: &str) -> Result<Self> {
        let mut p = match label.to_ascii_uppercase().as_str() {
            "N35" | "N42" => Self::n35(),
            "N50" | "N52" => Self::n52(),
            other => return Err(Error::param(format!("no cooldown template for magnet '{other}'"))),
        };
        p.label = label.to_ascii_uppercase();
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let temps = [self.t_start, self.rest_end, self.fluctuation_end, self.second_step, self.steady, self.t_end];
        if !temps.windows(2).all(|w| w[0] > w[1]) || !(self.t_end >= 0.0) {
            return Err(Error::param(
                "profile temperatures must satisfy t_start > rest_end > fluctuation_end > second_step > steady > t_end >= 0",
            ));
        }
        if !(self.t_step > 0.0) {
            return Err(Error::param("t_step must be > 0"));
        }
        let levels = [self.rest_level, self.fluctuation, self.step, self.wobble, self.wall_transition_shift];
        if !levels.iter().all(|v| v.is_finite()) || self.fluctuation < 0.0 || self.wobble < 0.0 {
            return Err(Error::param("profile levels must be finite and widths non-negative"));
        }
        if !(self.bare_f0 > 0.0 && self.q_loaded > 0.0 && self.amplitude > 0.0 && self.baseline >= 0.0) {
            return Err(Error::param("resonance parameters must be positive"));
        }
        Ok(())
    }

    pub fn temperatures(&self) -> Vec<f64> {
        let n = ((self.t_start - self.t_end) / self.t_step + 1e-9).floor() as usize + 1;
        // Rounded to the microkelvin so boundary comparisons are exact.
        (0..n)
            .map(|i| ((self.t_start - i as f64 * self.t_step) * 1e6).round() / 1e6)
            .collect()
    }

    /// Δf per temperature, relative to the bare cavity.
    pub fn template(&self, seed: u64) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let temps = self.temperatures();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fluct: Vec<usize> = (0..temps.len())
            .filter(|&i| temps[i] < self.rest_end && temps[i] > self.fluctuation_end)
            .collect();
        let mut out = Vec::with_capacity(temps.len());
        let mut wobble_index = 0;
        for (i, &t) in temps.iter().enumerate() {
            let base = if t >= self.rest_end {
                self.rest_level
            } else if t > self.fluctuation_end {
                let k = fluct.iter().position(|&j| j == i).unwrap();
                if k == 0 {
                    self.rest_level + self.fluctuation
                } else if k == fluct.len() - 1 {
                    self.rest_level
                } else {
                    self.rest_level + rng.gen_range(0.0..=self.fluctuation)
                }
            } else if t > self.second_step {
                self.rest_level + self.step
            } else if t > self.steady {
                let level = self.rest_level + 2.0 * self.step;
                if t == temps.iter().copied().find(|&x| x <= self.second_step).unwrap() {
                    level
                } else {
                    wobble_index += 1;
                    if wobble_index % 2 == 1 {
                        level - self.wobble
                    } else {
                        level + self.wobble
                    }
                }
            } else {
                self.rest_level + 2.0 * self.step
            };
            let wall = if t < self.wall_tc { self.wall_transition_shift } else { 0.0 };
            out.push((t, base + wall));
        }
        Ok(out)
    }

    /// Indices where fluctuation, transition and levitated regions begin.
    pub fn expected_boundaries(&self) -> [usize; 3] {
        let temps = self.temperatures();
        let first = |pred: &dyn Fn(f64) -> bool| temps.iter().position(|&t| pred(t)).unwrap_or(temps.len());
        [
            first(&|t| t < self.rest_end),
            first(&|t| t <= self.fluctuation_end),
            first(&|t| t <= self.steady),
        ]
    }
}

/// Renders the profile's template as one trace per temperature.
pub fn synth_cooldown(profile: &SynthProfile, seed: u64) -> Result<Vec<(f64, ResonanceTrace)>> {
    let template = profile.template(seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7ace);
    template
        .into_iter()
        .map(|(t, df)| {
            let fit = ResonanceFit {
                f0: profile.bare_f0 + df,
                q_loaded: profile.q_loaded,
                amplitude: profile.amplitude,
                baseline: profile.baseline,
                rms_residual: 0.0,
            };
            let trace_seed: u64 = rng.gen();
            let mut trace = synth_trace(&fit, profile.snr_db, trace_seed)?;
            trace.source_meta = format!("{} T={t} K", profile.label);
            Ok((t, trace))
        })
        .collect()
}
