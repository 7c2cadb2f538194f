use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use levsim_core::spectra::{
    assemble_series, classify_regions, fit_resonance, parse_csv_trace, synth_cooldown, write_cooldown_csv,
    DataFormat, FrequencyUnit, Reference, Region, ResonanceTrace, SynthProfile, Touchstone,
};
use rayon::prelude::*;
use serde_json::json;

use crate::report::{write_json, write_text, RunReport, Stopwatch};
use crate::{units, AnalyzeArgs, CliError, Context, EXIT_NO_DATA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Auto,
    S2p,
    Csv,
}

impl FromStr for TraceFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(TraceFormat::Auto),
            "s2p" | "touchstone" => Ok(TraceFormat::S2p),
            "csv" => Ok(TraceFormat::Csv),
            other => Err(format!("unknown trace format '{other}' (auto|s2p|csv)")),
        }
    }
}

fn format_mk(t: f64) -> String {
    let mk = (t * 1e6).round() / 1e3;
    format!("{mk}")
}

/// Temperature (K) encoded in a `T_<millikelvin>mK.<ext>` file name.
pub fn temperature_from_name(name: &str) -> Option<f64> {
    let stem = name.strip_prefix("T_")?;
    let (value, ext) = stem.rsplit_once('.')?;
    if !matches!(ext.to_ascii_lowercase().as_str(), "s2p" | "csv") {
        return None;
    }
    let digits = value.strip_suffix("mK")?;
    let mk: f64 = digits.parse().ok()?;
    if !(mk.is_finite() && mk >= 0.0) {
        return None;
    }
    if digits.contains(['e', 'E']) {
        Some(mk * 1e-3)
    } else {
        format!("{digits}e-3").parse().ok()
    }
}

fn trace_format(path: &Path, requested: TraceFormat) -> Option<TraceFormat> {
    match requested {
        TraceFormat::Auto => match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "s2p" => Some(TraceFormat::S2p),
            "csv" => Some(TraceFormat::Csv),
            _ => None,
        },
        other => Some(other),
    }
}

fn read_trace(path: &Path, format: TraceFormat) -> Result<ResonanceTrace, String> {
    let file = File::open(path).map_err(|e| e.to_string())?;
    let reader = BufReader::new(file);
    let meta = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let result = match format {
        TraceFormat::Csv => parse_csv_trace(reader).map(|mut t| {
            t.source_meta = meta;
            t
        }),
        _ => Touchstone::parse(reader).and_then(|t| t.to_trace(meta)),
    };
    result.map_err(|e| e.to_string())
}

fn discover(dir: &Path, requested: TraceFormat) -> Result<(Vec<(f64, PathBuf)>, Vec<String>), CliError> {
    let mut warnings = Vec::new();
    let manifest = dir.join("manifest.csv");
    if manifest.is_file() {
        let file = File::open(&manifest).map_err(|e| CliError::io("reading manifest", e))?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| CliError::io("reading manifest", e))?;
            let line = line.trim();
            if i == 0 {
                if line != "file,temperature_k" {
                    return Err(CliError::config(format!(
                        "{}: expected header file,temperature_k",
                        manifest.display()
                    )));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            match line.split_once(',').and_then(|(f, t)| Some((f.trim(), t.trim().parse::<f64>().ok()?))) {
                Some((f, t)) if t.is_finite() => entries.push((t, dir.join(f))),
                _ => warnings.push(format!("manifest line {}: cannot read '{line}', skipped", i + 1)),
            }
        }
        return Ok((entries, warnings));
    }
    let read = std::fs::read_dir(dir)
        .map_err(|e| CliError::new(EXIT_NO_DATA, format!("cannot read input directory {}: {e}", dir.display())))?;
    let mut names: Vec<PathBuf> = read.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_file()).collect();
    names.sort();
    let mut entries = Vec::new();
    for path in names {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match temperature_from_name(&name) {
            Some(t) if trace_format(&path, requested).is_some() => entries.push((t, path)),
            _ => warnings.push(format!("{name}: not a T_<mK>mK trace file, skipped")),
        }
    }
    Ok((entries, warnings))
}

fn emit_synthetic(ctx: &Context, args: &AnalyzeArgs, label: &str) -> Result<usize, CliError> {
    let mut profile = SynthProfile::for_label(label)?;
    profile.snr_db = args.snr_db.unwrap_or(ctx.config.analysis.snr_db);
    let seed = args.seed.unwrap_or(ctx.config.seed);
    let records = synth_cooldown(&profile, seed)?;
    std::fs::create_dir_all(&args.input)
        .map_err(|e| CliError::io(&format!("creating {}", args.input.display()), e))?;
    for (t, trace) in &records {
        let path = args.input.join(format!("T_{}mK.s2p", format_mk(*t)));
        let mut buf = Vec::new();
        Touchstone::from_trace(trace, FrequencyUnit::GHz, DataFormat::Ma)
            .write(&mut buf)
            .map_err(|e| CliError::io("formatting trace", e))?;
        write_text(&path, std::str::from_utf8(&buf).expect("ascii"))?;
    }
    Ok(records.len())
}

pub fn run(ctx: &Context, args: &AnalyzeArgs) -> Result<(), CliError> {
    let clock = Stopwatch::start();
    let emitted = match &args.emit_synthetic {
        Some(label) => Some(emit_synthetic(ctx, args, label)?),
        None => None,
    };

    let reference = match args.reference.as_deref() {
        Some(s) if s.eq_ignore_ascii_case("first") => Reference::FirstRecord,
        Some(s) => Reference::Explicit(units::frequency(s).map_err(CliError::config)?),
        None => ctx.config.analysis.reference_hz.map_or(Reference::FirstRecord, Reference::Explicit),
    };
    let mut thresholds = ctx.config.thresholds;
    if let Some(v) = args.fluctuation {
        thresholds.fluctuation = v;
    }
    if let Some(v) = args.step {
        thresholds.step = v;
    }
    if let Some(v) = args.stability {
        thresholds.stability_std = v;
    }
    if let Some(v) = args.window {
        thresholds.window = v;
    }
    thresholds.validate()?;

    let (entries, mut warnings) = discover(&args.input, args.format)?;
    let parsed: Vec<Result<(f64, ResonanceTrace), String>> = entries
        .par_iter()
        .map(|(t, path)| {
            let format = trace_format(path, args.format).unwrap_or(TraceFormat::S2p);
            read_trace(path, format)
                .map(|trace| (*t, trace))
                .map_err(|e| format!("{}: {e}, skipped", path.display()))
        })
        .collect();
    let mut traces = Vec::new();
    for p in parsed {
        match p {
            Ok(v) => traces.push(v),
            Err(w) => warnings.push(w),
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if traces.is_empty() {
        return Err(CliError::new(
            EXIT_NO_DATA,
            format!("no readable traces in {}", args.input.display()),
        ));
    }

    let fits: Vec<_> = traces.par_iter().map(|(t, trace)| (*t, fit_resonance(trace))).collect();
    let series = assemble_series(fits, reference).map_err(|e| CliError::new(EXIT_NO_DATA, e.to_string()))?;
    let cooldown_path = ctx.output_path(&args.cooldown, "cooldown.csv")?;
    let mut csv = Vec::new();
    write_cooldown_csv(&series, &mut csv).map_err(|e| CliError::io("formatting cooldown", e))?;
    write_text(&cooldown_path, std::str::from_utf8(&csv).expect("ascii"))?;

    let segmentation = classify_regions(&series, &thresholds)?;
    let rest = segmentation.segment(Region::Rest).mean_df;
    let lev = segmentation.segment(Region::Levitated).mean_df;
    let shift = rest.zip(lev).map(|(a, b)| b - a);
    let seg_json = json!({
        "reference_f0_hz": series.reference_f0,
        "records": series.records.len(),
        "segments": segmentation.segments,
        "thresholds": segmentation.thresholds,
        "rest_to_levitated_shift_hz": shift,
    });
    let seg_path = ctx.output_path(&args.segments, "segmentation.json")?;
    write_json(&seg_path, &seg_json)?;

    let gaps = series.records.iter().filter(|r| r.df.is_none()).count();
    ctx.say(format!("records       {} ({} gaps)", series.records.len(), gaps));
    for s in &segmentation.segments {
        let range = match (s.t_high, s.t_low) {
            (Some(a), Some(b)) => format!("{:>7.1} -> {:>7.1} mK", a * 1e3, b * 1e3),
            _ => "empty".to_string(),
        };
        let mean = s.mean_df.map_or(String::new(), |m| format!("  mean {:>9.3} MHz", m / 1e6));
        ctx.say(format!("{:<12} {range}{mean}", format!("{:?}", s.region).to_lowercase()));
    }
    if let Some(d) = shift {
        ctx.say(format!("rest -> levitated shift {:+.3} MHz", d / 1e6));
    }

    let report_path = ctx.output_path(&None, "analyze.json")?;
    let report = RunReport {
        command: "analyze",
        version: env!("CARGO_PKG_VERSION"),
        config: &ctx.config,
        inputs: json!({
            "input": args.input,
            "reference": reference,
            "thresholds": thresholds,
            "emitted_synthetic": emitted,
            "warnings": warnings,
            "cooldown_csv": cooldown_path,
            "segmentation_json": seg_path,
        }),
        results: seg_json,
        timing: clock.timing(),
    };
    write_json(&report_path, &report)
}
