use levsim_core::cavity::{invert_height, FrequencyMap};
use serde_json::json;

use super::freqmap::load_map;
use crate::report::{write_json, RunReport, Stopwatch};
use crate::units::Radius;
use crate::{CliError, Context, InvertArgs};

pub fn run(ctx: &Context, args: &InvertArgs) -> Result<(), CliError> {
    let clock = Stopwatch::start();
    let map = match &args.map {
        Some(path) => load_map(path)?,
        None => FrequencyMap::Parametric(ctx.config.map),
    };
    let r = match args.r {
        Radius::Edge => ctx.config.edge_radius,
        Radius::Value(v) => v,
    };
    let est = invert_height(&map, args.df, r, args.noise, &ctx.config.inversion)?;

    ctx.say(format!("height        {:.4} mm", est.height * 1e3));
    ctx.say(format!("sensitivity   {:.3} MHz/mm", est.sensitivity * 1e-3 / 1e6));
    ctx.say(format!("uncertainty   {:.3e} mm", est.uncertainty * 1e3));
    if let Some(w) = &est.warning {
        eprintln!("warning: {w}");
    }

    let path = ctx.output_path(&None, "invert.json")?;
    let report = RunReport {
        command: "invert",
        version: env!("CARGO_PKG_VERSION"),
        config: &ctx.config,
        inputs: json!({
            "df_hz": args.df,
            "r_m": r,
            "noise_hz": args.noise,
            "map_source": args.map,
        }),
        results: serde_json::to_value(&est).expect("serializable"),
        timing: clock.timing(),
    };
    write_json(&path, &report)
}
