//! Quarter-wave cavity resonance and the magnet-position frequency-shift map.

mod calibrate;
mod geometry;
mod map;

pub use calibrate::{calibrate_map_anchors, default_anchors, Anchor, AnchorKind, MapCalibration};
pub use geometry::{bare_frequency, calibrate_effective_length, CavityGeometry};
pub use map::{
    build_shift_map_parametric, invert_height, load_shift_map_csv, shift_at, write_shift_map_csv,
    FrequencyMap, GriddedMap, HeightEstimate, InversionOptions, ParametricMap, Polarity,
    DEFAULT_EDGE_RADIUS,
};
