//! Per-temperature fits assembled into a Δf(T) series.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{fit_resonance, ResonanceFit, ResonanceTrace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    Explicit(f64),
    /// The highest-temperature record that fitted.
    FirstRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooldownRecord {
    pub temperature: f64,
    pub f0: Option<f64>,
    pub q_loaded: Option<f64>,
    /// `f0 − reference_f0`.
    pub df: Option<f64>,
    /// Why the fit failed, for gaps.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooldownSeries {
    /// Strictly decreasing temperature.
    pub records: Vec<CooldownRecord>,
    pub reference_f0: f64,
}

impl CooldownSeries {
    /// Indices and Δf of records that have a fit.
    pub fn valid(&self) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.df.map(|d| (i, d)))
            .collect()
    }
}

/// Builds a series from fits that were already computed, e.g. in parallel.
pub fn assemble_series(mut fits: Vec<(f64, Result<ResonanceFit>)>, reference: Reference) -> Result<CooldownSeries> {
    if fits.len() < 2 {
        return Err(Error::Pipeline(format!("a cooldown needs at least 2 records, got {}", fits.len())));
    }
    if let Some((t, _)) = fits.iter().find(|(t, _)| !t.is_finite()) {
        return Err(Error::Pipeline(format!("non-finite temperature {t}")));
    }
    fits.sort_by(|a, b| b.0.total_cmp(&a.0));
    if let Some(w) = fits.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Pipeline(format!("duplicate temperature {} K", w[0].0)));
    }
    let reference_f0 = match reference {
        Reference::Explicit(f) => f,
        Reference::FirstRecord => match fits.iter().find_map(|(_, r)| r.as_ref().ok()) {
            Some(fit) => fit.f0,
            None => return Err(Error::Pipeline("no record could be fitted".into())),
        },
    };
    if fits.iter().all(|(_, r)| r.is_err()) {
        return Err(Error::Pipeline("no record could be fitted".into()));
    }
    let records = fits
        .into_iter()
        .map(|(temperature, fit)| match fit {
            Ok(fit) => CooldownRecord {
                temperature,
                f0: Some(fit.f0),
                q_loaded: Some(fit.q_loaded),
                df: Some(fit.f0 - reference_f0),
                error: None,
            },
            Err(e) => CooldownRecord {
                temperature,
                f0: None,
                q_loaded: None,
                df: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(CooldownSeries { records, reference_f0 })
}

/// Fits every trace and assembles the series; failed fits become gaps.
pub fn track_cooldown(records: &[(f64, ResonanceTrace)], reference: Reference) -> Result<CooldownSeries> {
    let fits = records.iter().map(|(t, trace)| (*t, fit_resonance(trace))).collect();
    assemble_series(fits, reference)
}

/// `temperature_k,f0_hz,q_loaded,df_hz`; gaps leave the fitted cells empty.
pub fn write_cooldown_csv<W: Write>(series: &CooldownSeries, mut out: W) -> std::io::Result<()> {
    writeln!(out, "temperature_k,f0_hz,q_loaded,df_hz")?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &series.records {
        writeln!(out, "{},{},{},{}", r.temperature, cell(r.f0), cell(r.q_loaded), cell(r.df))?;
    }
    Ok(())
}
