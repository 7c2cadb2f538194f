use std::fmt::Write as _;

use levsim_core::levitation::{
    equilibrium_height, image_equilibrium_height, onset_temperature, Model, SolverOptions, SuperconductorDisc,
};
use levsim_core::magnetostatics::Magnet;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::report::{write_json, write_text, RunReport, Stopwatch};
use crate::{CliError, Context, SweepArgs};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub remanence_t: f64,
    pub moment_a_m2: f64,
    pub height_image_m: Option<f64>,
    pub height_two_loop_m: Option<f64>,
    pub onset_t_k: Option<f64>,
    pub error: Option<String>,
}

pub const HEADER: &str = "label,remanence_t,moment_a_m2,height_image_m,height_two_loop_m,onset_t_k,error";

impl SweepRow {
    fn csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let error = self.error.as_deref().unwrap_or("").replace(['"', ','], ";");
        format!(
            "{},{},{},{},{},{},{}",
            self.label,
            self.remanence_t,
            self.moment_a_m2,
            cell(self.height_image_m),
            cell(self.height_two_loop_m),
            cell(self.onset_t_k),
            error
        )
    }
}

fn row(magnet: &Magnet, model: Model, temperature: Option<f64>, disc: &SuperconductorDisc, opts: &SolverOptions) -> SweepRow {
    let mut errors = Vec::new();
    let image = match image_equilibrium_height(magnet) {
        Ok(eq) => Some(eq.height),
        Err(e) => {
            errors.push(format!("image: {e}"));
            None
        }
    };
    let (two_loop, onset) = if model == Model::TwoLoop {
        let h = match equilibrium_height(Model::TwoLoop, magnet, disc, temperature, opts) {
            Ok(eq) => Some(eq.height),
            Err(e) => {
                errors.push(format!("two-loop: {e}"));
                None
            }
        };
        let t = match onset_temperature(magnet, disc, opts) {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(format!("onset: {e}"));
                None
            }
        };
        (h, t)
    } else {
        (None, None)
    };
    SweepRow {
        label: magnet.label.clone(),
        remanence_t: magnet.remanence,
        moment_a_m2: magnet.moment().magnitude(),
        height_image_m: image,
        height_two_loop_m: two_loop,
        onset_t_k: onset,
        error: (!errors.is_empty()).then(|| errors.join(" | ")),
    }
}

pub fn run(ctx: &Context, args: &SweepArgs) -> Result<(), CliError> {
    let clock = Stopwatch::start();
    let labels = if !args.presets.is_empty() {
        args.presets.clone()
    } else if !ctx.config.sweep.presets.is_empty() {
        ctx.config.sweep.presets.clone()
    } else {
        ctx.presets.labels()
    };
    if labels.is_empty() {
        return Err(CliError::config("sweep needs at least one preset"));
    }
    let magnets = labels.iter().map(|l| ctx.presets.get(l)).collect::<Result<Vec<_>, _>>()?;
    let model = args.model.unwrap_or(ctx.config.sweep.model);
    let temperature = args.temperature.or(ctx.config.sweep.temperature);
    let mut disc = ctx.config.disc.clone();
    if let Some(n) = args.loops {
        disc.loop_count = n;
    }
    disc.validate()?;
    let mut opts = ctx.config.solver;
    if let Some(n) = args.z_points {
        if n < 2 {
            return Err(CliError::config("--z-points must be >= 2"));
        }
        opts.scan_points = n;
    }

    let rows: Vec<SweepRow> = magnets
        .par_iter()
        .map(|m| row(m, model, temperature, &disc, &opts))
        .collect();

    let mut csv = String::from(HEADER);
    csv.push('\n');
    for r in &rows {
        writeln!(csv, "{}", r.csv()).expect("string write");
    }
    let csv_path = ctx.output_path(&args.output, "sweep.csv")?;
    write_text(&csv_path, &csv)?;

    for r in &rows {
        let mm = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.4} mm", x * 1e3));
        let mk = r.onset_t_k.map_or("-".to_string(), |t| format!("{:.1} mK", t * 1e3));
        ctx.say(format!(
            "{:<6} image {:>11}  two-loop {:>11}  onset {:>9}{}",
            r.label,
            mm(r.height_image_m),
            mm(r.height_two_loop_m),
            mk,
            r.error.as_ref().map(|e| format!("  [{e}]")).unwrap_or_default()
        ));
    }

    let report_path = ctx.output_path(&None, "sweep.json")?;
    let report = RunReport {
        command: "sweep",
        version: env!("CARGO_PKG_VERSION"),
        config: &ctx.config,
        inputs: json!({
            "presets": labels,
            "model": model,
            "temperature_k": temperature,
            "disc": disc,
            "solver": opts,
            "csv": csv_path,
        }),
        results: json!({ "rows": rows }),
        timing: clock.timing(),
    };
    write_json(&report_path, &report)
}
