//! Sweep runner and single-point queries behind the `noma-pairing` binary.
//!
//! Sweeps are described by flat JSON objects ([`SweepSpec`]); the figure
//! presets are shipped as such files under `presets/`.

pub mod point;
pub mod spec;
pub mod sweep;

pub use spec::{load_config, parse_specs, preset, Format, MetricName, SweepSpec, SweepVar, PRESETS};
pub use sweep::{run_sweep, Columns, Row, SweepResult};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid sweep spec: {0}")]
    Spec(String),
    #[error("{0}")]
    Io(String),
    #[error("curve `{curve}` at sweep value {sweep_var}: {source}")]
    Point {
        curve: String,
        sweep_var: f64,
        #[source]
        source: noma_pairing::Error,
    },
    #[error(transparent)]
    Core(#[from] noma_pairing::Error),
}
