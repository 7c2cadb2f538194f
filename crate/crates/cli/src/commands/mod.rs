pub mod analyze;
pub mod freqmap;
pub mod invert;
pub mod levitate;
pub mod sweep;

use levsim_core::magnetostatics::Magnet;

use crate::{CliError, Context, MagnetArgs};

/// The magnet named by a preset, or a custom one whose unspecified
/// dimensions fall back to the first preset's.
pub(crate) fn resolve_magnet(ctx: &Context, args: &MagnetArgs) -> Result<Magnet, CliError> {
    match (&args.preset, args.remanence) {
        (Some(label), _) => ctx.presets.get(label),
        (None, Some(br)) => {
            let template = ctx
                .presets
                .magnets
                .first()
                .ok_or_else(|| CliError::config("preset table is empty; give --radius, --height and --mass"))?;
            let radius = args.radius.unwrap_or(template.radius);
            let height = args.height.unwrap_or(template.height);
            let mass = args.mass.unwrap_or(template.mass);
            Ok(Magnet::new("custom", radius, height, mass, br)?)
        }
        (None, None) => Err(CliError::config("give --preset or --remanence")),
    }
}
