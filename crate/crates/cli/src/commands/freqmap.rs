use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use levsim_core::cavity::{
    bare_frequency, calibrate_map_anchors, default_anchors, load_shift_map_csv, shift_at, FrequencyMap,
};
use serde_json::json;

use crate::report::{write_json, write_text, RunReport, Stopwatch};
use crate::{CliError, Context, FreqmapArgs};

pub(crate) fn load_map(path: &Path) -> Result<FrequencyMap, CliError> {
    let file = File::open(path).map_err(|e| CliError::config(format!("cannot open map {}: {e}", path.display())))?;
    load_shift_map_csv(BufReader::new(file)).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

const DEFAULT_HEIGHTS_MM: [f64; 8] = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5];

pub fn run(ctx: &Context, args: &FreqmapArgs) -> Result<(), CliError> {
    let clock = Stopwatch::start();
    let mut anchor_report = None;
    let map = match &args.map {
        Some(path) => load_map(path)?,
        None if args.calibrate => {
            let cal = calibrate_map_anchors(&default_anchors())?;
            let mut p = cal.map;
            p.r_max = ctx.config.map.r_max;
            p.polarity = ctx.config.map.polarity;
            anchor_report = Some(serde_json::to_value(&cal.residuals).expect("serializable"));
            FrequencyMap::Parametric(p)
        }
        None => FrequencyMap::Parametric(ctx.config.map),
    };
    if args.r_points < 2 {
        return Err(CliError::config("--r-points must be >= 2"));
    }
    let (r_lo, r_hi) = map.r_domain();
    let r: Vec<f64> = (0..args.r_points)
        .map(|i| r_lo + (r_hi - r_lo) * i as f64 / (args.r_points - 1) as f64)
        .collect();
    let z: Vec<f64> = if args.z.is_empty() {
        let (z_lo, z_hi) = map.z_domain();
        DEFAULT_HEIGHTS_MM
            .iter()
            .map(|mm| mm * 1e-3)
            .filter(|&v| v >= z_lo && v <= z_hi)
            .collect()
    } else {
        args.z.clone()
    };
    if z.is_empty() {
        return Err(CliError::config("no heights inside the map's domain"));
    }

    let mut columns = Vec::with_capacity(z.len());
    for &zj in &z {
        columns.push(r.iter().map(|&ri| shift_at(&map, ri, zj)).collect::<Result<Vec<f64>, _>>()?);
    }

    let mut csv = String::from("r_m");
    for zj in &z {
        write!(csv, ",df_hz_z{zj}m").expect("string write");
    }
    csv.push('\n');
    for (i, ri) in r.iter().enumerate() {
        write!(csv, "{ri}").expect("string write");
        for col in &columns {
            write!(csv, ",{}", col[i]).expect("string write");
        }
        csv.push('\n');
    }
    let csv_path = ctx.output_path(&args.output, "freqmap.csv")?;
    write_text(&csv_path, &csv)?;

    let spread = |col: &[f64]| {
        let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        hi - lo
    };
    let base_spread = spread(&columns[0]);
    let rows: Vec<_> = z
        .iter()
        .zip(&columns)
        .map(|(zj, col)| {
            let s = spread(col);
            let slope = (col[1] - col[0]) / (r[1] - r[0]);
            json!({
                "z_m": zj,
                "lateral_spread_hz": s,
                "relative_spread": if base_spread > 0.0 { s / base_spread } else { 0.0 },
                "first_radial_slope_hz_per_m": slope,
            })
        })
        .collect();

    ctx.say(format!("bare cavity   {:.6} GHz", bare_frequency(&ctx.config.geometry) / 1e9));
    for row in &rows {
        ctx.say(format!(
            "z = {:>6.3} mm  lateral spread {:>8.3} MHz  ({:.1}% of first row)",
            row["z_m"].as_f64().unwrap() * 1e3,
            row["lateral_spread_hz"].as_f64().unwrap() / 1e6,
            100.0 * row["relative_spread"].as_f64().unwrap()
        ));
    }

    let report_path = ctx.output_path(&None, "freqmap.json")?;
    let report = RunReport {
        command: "freqmap",
        version: env!("CARGO_PKG_VERSION"),
        config: &ctx.config,
        inputs: json!({
            "map_source": args.map,
            "calibrate": args.calibrate,
            "r_points": args.r_points,
            "z_m": z,
            "csv": csv_path,
        }),
        results: json!({
            "bare_frequency_hz": bare_frequency(&ctx.config.geometry),
            "map": match &map { FrequencyMap::Parametric(p) => json!(p), FrequencyMap::Gridded(_) => json!("gridded") },
            "anchor_residuals": anchor_report,
            "rows": rows,
        }),
        timing: clock.timing(),
    };
    write_json(&report_path, &report)
}
