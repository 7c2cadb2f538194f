use levsim_core::levitation::{
    equilibrium_height, image_equilibrium_height, normal_region_radius, onset_temperature, Model,
};
use serde::Serialize;
use serde_json::json;

use super::resolve_magnet;
use crate::report::{write_json, RunReport, Stopwatch};
use crate::{CliError, Context, LevitateArgs};

#[derive(Debug, Serialize)]
struct LevitateResult {
    model: Model,
    height_m: f64,
    stable: bool,
    residual_force_n: f64,
    iterations: usize,
    image_height_m: f64,
    onset_temperature_k: Option<f64>,
    onset_note: Option<String>,
    normal_region_radius_m: f64,
}

pub fn run(ctx: &Context, args: &LevitateArgs) -> Result<(), CliError> {
    let clock = Stopwatch::start();
    let magnet = resolve_magnet(ctx, &args.magnet)?;
    let mut disc = ctx.config.disc.clone();
    if let Some(n) = args.loops {
        disc.loop_count = n;
    }
    disc.validate()?;
    let opts = ctx.config.solver;

    let eq = equilibrium_height(args.model, &magnet, &disc, args.temperature, &opts)?;
    let image = image_equilibrium_height(&magnet)?;
    let (onset, onset_note) = match args.model {
        Model::Image => (None, Some("onset needs the response-loop model".to_string())),
        Model::TwoLoop => match onset_temperature(&magnet, &disc, &opts) {
            Ok(t) => (Some(t), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    let rest = 0.5 * magnet.height;
    let rho_n = normal_region_radius(&magnet, rest, args.temperature.unwrap_or(0.0), &disc)?;

    let result = LevitateResult {
        model: args.model,
        height_m: eq.height,
        stable: eq.stable,
        residual_force_n: eq.residual_force,
        iterations: eq.iterations,
        image_height_m: image.height,
        onset_temperature_k: onset,
        onset_note,
        normal_region_radius_m: rho_n,
    };

    ctx.say(format!("magnet        {} ({} T)", magnet.label, magnet.remanence));
    ctx.say(format!("model         {}", args.model));
    ctx.say(format!(
        "height        {:.4} mm ({})",
        eq.height * 1e3,
        if eq.stable { "stable" } else { "unstable" }
    ));
    if let Some(t) = onset {
        ctx.say(format!("onset         {:.1} mK", t * 1e3));
    }
    ctx.say(format!("normal region {:.3} mm", rho_n * 1e3));

    let path = ctx.output_path(&None, "levitate.json")?;
    let report = RunReport {
        command: "levitate",
        version: env!("CARGO_PKG_VERSION"),
        config: &ctx.config,
        inputs: json!({
            "magnet": magnet,
            "model": args.model,
            "temperature_k": args.temperature,
            "disc": disc,
        }),
        results: serde_json::to_value(&result).expect("serializable"),
        timing: clock.timing(),
    };
    write_json(&path, &report)
}
