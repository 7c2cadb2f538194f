//! Lorentzian fits to |S21|².

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ResonanceTrace;
use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};

pub const MIN_FIT_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFit {
    pub f0: f64,
    pub q_loaded: f64,
    /// Peak height above the baseline (linear power).
    pub amplitude: f64,
    pub baseline: f64,
    /// RMS of the residuals in units of `amplitude`.
    pub rms_residual: f64,
}

impl ResonanceFit {
    pub fn fwhm(&self) -> f64 {
        self.f0 / self.q_loaded
    }
}

/// `amplitude / (1 + 4q²(f/f0 − 1)²) + baseline`.
pub fn lorentzian_model(f0: f64, q: f64, amplitude: f64, baseline: f64, f: f64) -> f64 {
    let x = (f - f0) / f0;
    amplitude / (1.0 + 4.0 * q * q * x * x) + baseline
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

struct Guess {
    f0: f64,
    fwhm: f64,
    amplitude: f64,
    baseline: f64,
}

fn initial_guess(freqs: &[f64], power: &[f64]) -> Result<Guess> {
    let no_peak = |why: &str| Error::Fit {
        message: format!("no identifiable peak: {why}"),
        best: None,
    };
    let mut sorted = power.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = quantile(&sorted, 0.5);
    let (imax, &pmax) = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty trace");
    // 3 dB in power.
    if !(pmax >= 2.0 * median) || pmax <= 0.0 {
        return Err(no_peak("maximum is less than 3 dB above the median"));
    }
    if imax == 0 || imax == power.len() - 1 {
        return Err(no_peak("maximum sits on the edge of the span"));
    }
    let baseline = quantile(&sorted, 0.1);
    let amplitude = pmax - baseline;
    let half = baseline + 0.5 * amplitude;
    let crossing = |range: &mut dyn Iterator<Item = usize>, step: isize| -> Option<f64> {
        for i in range {
            if power[i] < half {
                let j = (i as isize - step) as usize;
                let t = (power[j] - half) / (power[j] - power[i]);
                return Some(freqs[j] + t * (freqs[i] - freqs[j]));
            }
        }
        None
    };
    let left = crossing(&mut (0..imax).rev(), -1).ok_or_else(|| no_peak("left half-power point not in span"))?;
    let right = crossing(&mut (imax + 1..power.len()), 1).ok_or_else(|| no_peak("right half-power point not in span"))?;
    Ok(Guess {
        f0: freqs[imax],
        fwhm: right - left,
        amplitude,
        baseline,
    })
}

/// Least-squares Lorentzian on |S21|².
///
/// Parameters are internally rescaled to the guessed width and peak height so
/// all four are of order one.
pub fn fit_resonance(trace: &ResonanceTrace) -> Result<ResonanceFit> {
    if trace.len() < MIN_FIT_POINTS {
        return Err(Error::Fit {
            message: format!("need at least {MIN_FIT_POINTS} points, got {}", trace.len()),
            best: None,
        });
    }
    let freqs = &trace.frequencies;
    let power = trace.power();
    let g = initial_guess(freqs, &power)?;
    let scale = g.amplitude;

    let unpack = |p: &[f64]| (g.f0 + p[0] * g.fwhm, p[1].exp(), p[2] * scale, p[3] * scale);
    let model = |p: &[f64]| {
        let (f0, q, a, b) = unpack(p);
        let n = freqs.len();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, 4);
        for i in 0..n {
            let f = freqs[i];
            let x = (f - f0) / f0;
            let d = 1.0 + 4.0 * q * q * x * x;
            r[i] = (a / d + b - power[i]) / scale;
            let dd = d * d;
            j[(i, 0)] = 8.0 * a * q * q * x * f / (f0 * f0 * dd) * g.fwhm / scale;
            j[(i, 1)] = -8.0 * a * q * q * x * x / dd / scale;
            j[(i, 2)] = 1.0 / d;
            j[(i, 3)] = 1.0;
        }
        (r, j)
    };
    let x0 = [0.0, (g.f0 / g.fwhm).ln(), 1.0, g.baseline / scale];
    let report = levenberg_marquardt(model, &x0, LmOptions::default());
    let (f0, q, amplitude, baseline) = unpack(&report.params);
    let best = Some(vec![f0, q, amplitude, baseline]);
    if !report.converged {
        return Err(Error::Fit {
            message: format!("did not converge in {} iterations", report.iterations),
            best,
        });
    }
    if !(f0 >= freqs[0] && f0 <= freqs[freqs.len() - 1]) || !(q > 0.0) || !(amplitude > 0.0) {
        return Err(Error::Fit {
            message: "fit left the physical region".into(),
            best,
        });
    }
    let rms_residual = (2.0 * report.cost / freqs.len() as f64).sqrt() * scale / amplitude;
    Ok(ResonanceFit {
        f0,
        q_loaded: q,
        amplitude,
        baseline,
        rms_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::synth_trace;
    use num_complex::Complex64;

    fn truth() -> ResonanceFit {
        ResonanceFit {
            f0: 10e9,
            q_loaded: 2500.0,
            amplitude: 1e-2,
            baseline: 1e-4,
            rms_residual: 0.0,
        }
    }

    #[test]
    fn model_shape() {
        let p = truth();
        assert_eq!(lorentzian_model(p.f0, p.q_loaded, 1.0, 0.5, p.f0), 1.5);
        let half = p.f0 / p.q_loaded / 2.0;
        assert!((p.fwhm() - 4e6).abs() < 1e-6);
        for side in [-1.0, 1.0] {
            let v = lorentzian_model(p.f0, p.q_loaded, 1.0, 0.0, p.f0 + side * half);
            assert!((v - 0.5).abs() < 1e-12);
        }
        for k in 1..=10 {
            let d = p.fwhm() * k as f64 / 10.0;
            let up = lorentzian_model(p.f0, p.q_loaded, 1.0, 0.0, p.f0 + d);
            let down = lorentzian_model(p.f0, p.q_loaded, 1.0, 0.0, p.f0 - d);
            assert!((up - down).abs() < 1e-3 * up);
        }
    }

    #[test]
    fn noiseless_recovery() {
        let p = truth();
        let trace = synth_trace(&p, f64::INFINITY, 0).unwrap();
        let fit = fit_resonance(&trace).unwrap();
        assert!(((fit.f0 - p.f0) / p.f0).abs() < 1e-8);
        assert!(((fit.q_loaded - p.q_loaded) / p.q_loaded).abs() < 1e-8);
        assert!(((fit.amplitude - p.amplitude) / p.amplitude).abs() < 1e-8);
        assert!(((fit.baseline - p.baseline) / p.baseline).abs() < 1e-8);
        assert!(fit.rms_residual < 1e-10);
    }

    #[test]
    fn noisy_recovery_few_seeds() {
        let p = truth();
        for seed in 0..10 {
            let fit = fit_resonance(&synth_trace(&p, 20.0, seed).unwrap()).unwrap();
            assert!((fit.f0 - p.f0).abs() < 40e3, "seed {seed}: {}", fit.f0 - p.f0);
            assert!(((fit.q_loaded - p.q_loaded) / p.q_loaded).abs() < 0.05);
        }
    }

    #[test]
    fn no_peak() {
        let freqs: Vec<f64> = (0..100).map(|i| 1e9 + i as f64 * 1e5).collect();
        let s21 = (0..100).map(|i| Complex64::new((1.0 + i as f64 / 100.0).sqrt() * 0.01, 0.0)).collect();
        let trace = ResonanceTrace::new(freqs, s21, "ramp").unwrap();
        assert!(matches!(fit_resonance(&trace), Err(Error::Fit { best: None, .. })));
    }

    #[test]
    fn too_short() {
        let trace = ResonanceTrace::new(vec![1.0, 2.0, 3.0], vec![Complex64::new(0.1, 0.0); 3], "").unwrap();
        assert!(fit_resonance(&trace).is_err());
    }
}
