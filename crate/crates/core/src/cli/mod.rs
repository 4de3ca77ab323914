//! Experiment driver behind the `nhqm` binary: JSON configs, expectation sweeps written as CSV,
//! transport reports, and plots.

mod config;
mod plot;
mod report;
mod sweep;

pub use config::{
    ExperimentConfig, GammaGrid, HamiltonianSource, InnerProductKind, ModelSpec, StateSpec,
    DEFAULT_SITES,
};
pub use plot::{emit_plot, PlotKind};
pub use report::{
    run_transport_report, MapSection, NormMatchingSection, SpectrumSection, TransportReport,
};
pub use sweep::{run_expectation_sweep, SweepRow, SweepTable, SWEEP_HEADER};
