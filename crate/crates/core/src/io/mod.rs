//! File formats, presets and reports.

pub mod presets;
pub mod report;
pub mod scenario_file;
pub mod svg;
pub mod tables;

pub use presets::Preset;
pub use scenario_file::{parse_scenario, serialize_scenario, ScenarioFileError};
pub use tables::{read_observations, thin, write_sweep_csv, write_trajectory_csv, ObservationFileError, MAX_ROWS};

/// Shortest round-trip decimal text, switching to exponent form for very
/// large or very small magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
